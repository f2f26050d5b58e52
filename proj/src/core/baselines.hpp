#ifndef PULEARN_CORE_BASELINES_HPP
#define PULEARN_CORE_BASELINES_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "data.hpp"
#include "ensemble.hpp"
#include "learners.hpp"

namespace pulearn::baselines {

enum class BaselineKind {
    // One model, every unlabeled sample treated as negative.
    Naive,
    // bag_count models, each on all observed positives plus a random
    // unlabeled subsample treated as negative.
    Bagging,
};

struct BaselineSpec {
    BaselineKind kind = BaselineKind::Naive;
    learners::BaseClassifierSpec base;
    std::size_t bag_count = 50;
    // Unset means "as many as there are observed positives".
    std::optional<std::size_t> negatives_per_bag;
    int threads = 1;

    void validate() const;
};

// Training rows of one bag in ascending index order.
std::vector<std::size_t> bag_rows(const PUDataset& pu, std::size_t negatives, std::uint64_t seed, std::size_t bag);

EnsembleModel train_baseline(const PUDataset& pu, const BaselineSpec& spec, std::uint64_t seed);

}  // namespace pulearn::baselines

#endif
