// Dataset validation, qualification partitioning and stratified splitting.
#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "signalrank/types.hpp"

namespace signalrank {

// Checks every dataset invariant. Empty result means the dataset is valid;
// each entry names the impression and the rule it breaks.
std::vector<Violation> validate_dataset(const Dataset& d);

// Buckets impression indices by exact qualification mask, preserving the
// original impression order inside each bucket. Keys iterate in canonical
// (width, bits) order.
std::map<QualificationMask, std::vector<std::size_t>> partition_by_qualification(const Dataset& d);

// Disjoint train/eval split, stratified per qualification bucket: each
// bucket contributes round(eval_fraction * bucket size) impressions to the
// eval side. Deterministic for a fixed seed. With strict=true, a bucket of
// fewer than 2 impressions is an error.
std::pair<Dataset, Dataset> split_train_eval(const Dataset& d, double eval_fraction,
                                             std::uint64_t seed, bool strict = true);

}  // namespace signalrank
