#ifndef PULEARN_CORE_LEARNERS_HPP
#define PULEARN_CORE_LEARNERS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "data.hpp"

namespace pulearn::learners {

enum class BaseKind { Gbdt, Logistic };

// Defaults follow LightGBM's documented defaults.
struct GbdtParams {
    int tree_count = 100;
    int max_leaves = 31;
    double learning_rate = 0.1;
    int min_samples_per_leaf = 20;
    double subsample_ratio = 1.0;
    int max_bins = 255;
    double min_hessian_per_leaf = 1e-3;
    double l2_leaf = 0.0;
};

struct LogisticParams {
    double l2_penalty = 1.0;
    int max_iterations = 200;
    double tolerance = 1e-6;
};

struct BaseClassifierSpec {
    BaseKind kind = BaseKind::Gbdt;
    GbdtParams gbdt;
    LogisticParams logistic;

    void validate() const;
};

std::string to_string(BaseKind kind);
BaseKind parse_base_kind(const std::string& name);

void to_json(nlohmann::ordered_json& j, const BaseClassifierSpec& spec);
void from_json(const nlohmann::ordered_json& j, BaseClassifierSpec& spec);

struct TreeNode {
    // Internal nodes route x[feature] <= threshold to `left`.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double evaluate(std::span<const double> x) const;
};

struct GbdtModel {
    std::size_t dim = 0;
    double init_margin = 0.0;
    std::vector<RegressionTree> trees;

    double margin(std::span<const double> x) const;
};

struct LogisticModel {
    std::size_t dim = 0;
    double bias = 0.0;
    std::vector<double> weights;

    double margin(std::span<const double> x) const;
};

// A trained member; scores are probabilities of the positive class.
class BaseScorer {
public:
    BaseScorer() = default;
    explicit BaseScorer(GbdtModel model) : model_(std::move(model)) {}
    explicit BaseScorer(LogisticModel model) : model_(std::move(model)) {}

    std::size_t dim() const noexcept;
    double score(std::span<const double> x) const;
    void score_all(const FeatureMatrix& features, std::span<double> out) const;

    const std::variant<GbdtModel, LogisticModel>& model() const noexcept { return model_; }

private:
    std::variant<GbdtModel, LogisticModel> model_;
};

void to_json(nlohmann::ordered_json& j, const BaseScorer& scorer);
BaseScorer scorer_from_json(const nlohmann::ordered_json& j);

// Trains on labels in {+1, -1}. Throws Degenerate if only one class is
// present. `seed` drives row subsampling and is otherwise unused.
BaseScorer train_base(const BaseClassifierSpec& spec, const FeatureMatrix& features, std::span<const int> labels,
                      std::uint64_t seed);

GbdtModel train_gbdt(const GbdtParams& params, const FeatureMatrix& features, std::span<const int> labels,
                     std::uint64_t seed);
LogisticModel train_logistic(const LogisticParams& params, const FeatureMatrix& features, std::span<const int> labels);

}  // namespace pulearn::learners

#endif
