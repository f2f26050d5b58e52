#ifndef PULEARN_CORE_PROBTAGGING_HPP
#define PULEARN_CORE_PROBTAGGING_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "credibility.hpp"
#include "data.hpp"
#include "ensemble.hpp"
#include "learners.hpp"

namespace pulearn::probtagging {

// One probabilistically tagged copy of a PU set.
struct TaggedDataset {
    FeaturesPtr features;
    std::vector<int> tags;
    std::size_t round_index = 0;
    std::uint64_t seed_used = 0;
};

struct Config {
    // Unset means select k from the E_k curve over [k_min, k_max].
    std::optional<std::size_t> k;
    std::size_t k_min = 1;
    std::size_t k_max = 50;
    double growth_threshold = 0.01;
    std::size_t window = 3;

    std::size_t m = 50;
    learners::BaseClassifierSpec base;
    std::uint64_t seed = 42;
    credibility::KnnOptions knn;
    int max_attempts = 5;
    int threads = 1;
};

// Observed positives are tagged +1; unlabeled sample i is tagged +1 when its
// uniform draw keyed by (round_seed, i) is <= cred(i), else -1.
TaggedDataset tag_round(const PUDataset& pu, const credibility::CredibilityTable& cred, std::uint64_t round_seed,
                        std::size_t round_index = 0);

// Seed for attempt `attempt` of round `round`.
std::uint64_t round_seed(std::uint64_t seed, std::size_t round, int attempt);

// Seed handed to the base learner trained on a given round seed.
std::uint64_t member_seed(std::uint64_t round_seed);

EnsembleModel train_ensemble(const PUDataset& pu, const Config& config);

}  // namespace pulearn::probtagging

#endif
