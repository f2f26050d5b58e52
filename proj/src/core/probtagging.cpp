#include "probtagging.hpp"

#include <algorithm>
#include <cstdio>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace pulearn::probtagging {

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<int> flags_as_ints(const PUDataset& pu) {
    return {pu.observed().begin(), pu.observed().end()};
}

}  // namespace

std::uint64_t round_seed(std::uint64_t seed, std::size_t round, int attempt) {
    return rng::derive(seed, {0x726f756eULL, round, static_cast<std::uint64_t>(attempt)});
}

std::uint64_t member_seed(std::uint64_t round_seed) {
    return rng::derive(round_seed, {0x74726169ULL});
}

TaggedDataset tag_round(const PUDataset& pu, const credibility::CredibilityTable& cred, std::uint64_t round_seed,
                        std::size_t round_index) {
    require(cred.cred.size() == pu.size(), "tag round: credibility table is not aligned with the dataset");
    TaggedDataset tagged;
    tagged.features = pu.shared_features();
    tagged.round_index = round_index;
    tagged.seed_used = round_seed;
    tagged.tags.resize(pu.size());
    const auto& observed = pu.observed();
    for (std::size_t i = 0; i < pu.size(); ++i) {
        if (observed[i] == 1) {
            tagged.tags[i] = 1;
            continue;
        }
        const double c = cred.cred[i];
        require(c >= 0.0 && c <= 1.0, "tag round: credibility outside [0,1]");
        tagged.tags[i] = rng::keyed_uniform(round_seed, i) <= c ? 1 : -1;
    }
    return tagged;
}

EnsembleModel train_ensemble(const PUDataset& pu, const Config& config) {
    config.base.validate();
    require(config.m >= 1, "m must be at least 1");
    require(config.max_attempts >= 1, "max attempts must be at least 1");
    const std::size_t n = pu.size();
    require(n >= 2, "ProbTagging needs at least two samples");
    const std::size_t k_limit = config.knn.include_self ? n : n - 1;

    auto knn = config.knn;
    knn.threads = config.threads;

    EnsembleModel model;
    model.method = "probtagging";
    model.base = config.base;
    model.m_requested = config.m;
    model.seed = config.seed;
    model.dim = pu.features().cols();
    auto& meta = model.metadata;
    meta["datasetHash"] = hex64(dataset_hash(pu.features(), flags_as_ints(pu)));
    meta["n"] = n;
    meta["nObserved"] = pu.observed_count();
    meta["standardize"] = knn.standardize;
    meta["includeSelf"] = knn.include_self;
    nlohmann::ordered_json warnings = nlohmann::ordered_json::array();

    std::optional<credibility::NeighborTable> table;
    if (config.k) {
        const std::size_t k = *config.k;
        require(k >= 1 && k <= k_limit, "k must lie in [1, " + std::to_string(k_limit) + "]");
        table = credibility::knn_neighbors(pu.features(), k, knn);
        model.k = k;
    } else {
        const std::size_t k_max = std::min(config.k_max, k_limit);
        require(config.k_min >= 1 && config.k_min <= k_max, "automatic k: empty search range");
        const auto full = credibility::knn_neighbors(pu.features(), k_max, knn);
        const auto curve = credibility::ek_curve(full, pu.observed(), config.k_min, k_max);
        const auto choice = credibility::select_k(curve, config.growth_threshold, config.window);
        table = full.truncated(choice.k);
        model.k = choice.k;
        meta["kSelection"] = {{"kMin", config.k_min},
                              {"kMax", k_max},
                              {"growthThreshold", config.growth_threshold},
                              {"window", config.window},
                              {"fallback", choice.fallback}};
        if (choice.fallback) {
            warnings.push_back("no stable E_k stage found; using k = " + std::to_string(choice.k));
        }
    }
    const auto cred = credibility::credibility(*table, pu.observed());
    meta["ek"] = credibility::ek(cred, pu.observed());

    struct RoundResult {
        std::optional<learners::BaseScorer> scorer;
        int attempts = 0;
    };
    std::vector<RoundResult> results(config.m);
    parallel_for(config.m, config.threads, [&](std::size_t r) {
        for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
            results[r].attempts = attempt + 1;
            const auto seed = round_seed(config.seed, r, attempt);
            const auto tagged = tag_round(pu, cred, seed, r);
            if (std::find(tagged.tags.begin(), tagged.tags.end(), -1) == tagged.tags.end()) {
                continue;
            }
            results[r].scorer = learners::train_base(config.base, *tagged.features, tagged.tags, member_seed(seed));
            return;
        }
    });

    nlohmann::ordered_json redraws = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < results.size(); ++r) {
        if (results[r].scorer) {
            model.members.push_back(std::move(*results[r].scorer));
            if (results[r].attempts > 1) redraws.push_back({{"round", r}, {"attempts", results[r].attempts}});
        } else {
            warnings.push_back("round " + std::to_string(r) + " skipped: every sample tagged positive in " +
                               std::to_string(config.max_attempts) + " attempts");
        }
    }
    if (model.members.empty()) {
        fail(ErrorCode::Degenerate, "every tag round was degenerate (all samples tagged positive)");
    }
    if (!redraws.empty()) meta["redrawnRounds"] = std::move(redraws);
    meta["warnings"] = std::move(warnings);
    return model;
}

}  // namespace pulearn::probtagging
