#include "baselines.hpp"

#include <algorithm>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace pulearn::baselines {

namespace {

std::uint64_t baseline_member_seed(std::uint64_t seed, std::size_t bag) {
    return rng::derive(seed, {0x6d656d62ULL, bag});
}

}  // namespace

void BaselineSpec::validate() const {
    base.validate();
    require(bag_count >= 1, "bagCount must be at least 1");
    require(!negatives_per_bag || *negatives_per_bag >= 1, "negativesPerBag must be at least 1");
}

std::vector<std::size_t> bag_rows(const PUDataset& pu, std::size_t negatives, std::uint64_t seed, std::size_t bag) {
    auto unlabeled = pu.unlabeled_indices();
    if (negatives > unlabeled.size()) {
        fail(ErrorCode::InvalidArgument, "negativesPerBag " + std::to_string(negatives) + " exceeds the " +
                                             std::to_string(unlabeled.size()) + " unlabeled samples");
    }
    rng::Stream stream(rng::derive(seed, {0x62616773ULL, bag}));
    for (std::size_t j = 0; j < negatives; ++j) {
        const auto pick = j + static_cast<std::size_t>(stream.below(unlabeled.size() - j));
        std::swap(unlabeled[j], unlabeled[pick]);
    }
    std::vector<std::size_t> rows = pu.observed_indices();
    rows.insert(rows.end(), unlabeled.begin(), unlabeled.begin() + static_cast<std::ptrdiff_t>(negatives));
    std::sort(rows.begin(), rows.end());
    return rows;
}

EnsembleModel train_baseline(const PUDataset& pu, const BaselineSpec& spec, std::uint64_t seed) {
    spec.validate();
    EnsembleModel model;
    model.base = spec.base;
    model.seed = seed;
    model.dim = pu.features().cols();

    std::vector<int> tags(pu.size());
    for (std::size_t i = 0; i < pu.size(); ++i) tags[i] = pu.observed()[i] == 1 ? 1 : -1;

    if (spec.kind == BaselineKind::Naive) {
        model.method = "naive";
        model.m_requested = 1;
        model.members.push_back(learners::train_base(spec.base, pu.features(), tags, baseline_member_seed(seed, 0)));
        return model;
    }

    model.method = "bagging";
    model.m_requested = spec.bag_count;
    const std::size_t negatives = spec.negatives_per_bag.value_or(pu.observed_count());
    model.metadata["bagCount"] = spec.bag_count;
    model.metadata["negativesPerBag"] = negatives;
    // Validate the bag size before spawning work.
    (void)bag_rows(pu, negatives, seed, 0);

    std::vector<learners::BaseScorer> members(spec.bag_count);
    parallel_for(spec.bag_count, spec.threads, [&](std::size_t b) {
        const auto rows = bag_rows(pu, negatives, seed, b);
        const auto features = pu.features().select_rows(rows);
        std::vector<int> bag_tags;
        bag_tags.reserve(rows.size());
        for (auto r : rows) bag_tags.push_back(tags[r]);
        members[b] = learners::train_base(spec.base, features, bag_tags, baseline_member_seed(seed, b));
    });
    model.members = std::move(members);
    return model;
}

}  // namespace pulearn::baselines
