#ifndef PULEARN_CORE_HARNESS_HPP
#define PULEARN_CORE_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "data.hpp"
#include "ensemble.hpp"
#include "learners.hpp"
#include "metrics.hpp"

namespace pulearn::harness {

enum class Method { ProbTagging, Naive, Bagging };

std::string to_string(Method method);
Method parse_method(const std::string& name);

// Everything needed to train one model with any of the three methods.
struct TrainConfig {
    Method method = Method::ProbTagging;
    learners::BaseClassifierSpec base;
    // ProbTagging: unset k selects it from the E_k curve.
    std::optional<std::size_t> k;
    std::size_t k_min = 1;
    std::size_t k_max = 50;
    double growth_threshold = 0.01;
    std::size_t window = 3;
    bool standardize = true;
    bool include_self = false;
    // Member count: tag rounds for ProbTagging, bags for bagging.
    std::size_t m = 50;
    std::optional<std::size_t> negatives_per_bag;
    std::uint64_t seed = 42;
    // Not part of the result; excluded from config echoes.
    int threads = 1;
};

nlohmann::ordered_json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::ordered_json& j);

EnsembleModel train(const PUDataset& pu, const TrainConfig& config);

struct CvConfig {
    TrainConfig train;
    std::size_t folds = 3;
    std::uint64_t seed = 42;
    // Required for PN input: observation probability used to turn the
    // training folds (and the AUL test view) into PU sets.
    std::optional<double> theta_o;
    ObservationMode mode = ObservationMode::ExactFraction;
};

nlohmann::ordered_json to_json(const CvConfig& config);

struct FoldResult {
    std::size_t fold = 0;
    std::size_t n_test = 0;
    std::size_t n_test_observed = 0;
    double aul_pu = 0.0;
    std::optional<double> auc;
    std::optional<double> aul_pn;
    std::optional<double> residual;
    std::size_t k = 0;
    std::size_t m_effective = 0;
};

struct Summary {
    double mean = 0.0;
    double std_dev = 0.0;
    double min = 0.0;
    double max = 0.0;
};

Summary summarize(std::span<const double> values);

struct CvReport {
    std::string method;
    std::vector<FoldResult> folds;
    nlohmann::ordered_json config;

    Summary aul_pu() const;
    std::optional<Summary> auc() const;
    std::optional<Summary> aul_pn() const;

    // One row per fold.
    std::string to_csv() const;
    std::string summary_json() const;
};

CvReport cross_validate(const PUDataset& data, const CvConfig& config);
CvReport cross_validate(const PNDataset& data, const CvConfig& config);

enum class ScorerKind { BayesLinear, Trained };

using ScoreFunction = std::function<double(std::span<const double>)>;

struct ConvergenceConfig {
    SyntheticSpec spec;
    std::vector<std::size_t> n_grid;
    std::size_t repeats = 20;
    ScorerKind scorer = ScorerKind::BayesLinear;
    // Size of the independent draw a Trained scorer is fit on.
    std::size_t trained_n = 5000;
    metrics::TieMode ties = metrics::TieMode::Average;
    int threads = 1;
};

nlohmann::ordered_json to_json(const ConvergenceConfig& config);

struct ConvergenceTrial {
    std::size_t n = 0;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    double aul_pn = 0.0;
    double aul_pu = 0.0;
    double gap = 0.0;
};

struct ConvergenceReport {
    std::vector<std::size_t> n_grid;
    std::size_t repeats = 0;
    std::vector<double> mean_gap;
    std::vector<double> max_gap;
    std::vector<ConvergenceTrial> trials;
    nlohmann::ordered_json config;

    // One row per grid point: n,repeats,mean_gap,max_gap
    std::string to_csv() const;
    std::string trials_csv() const;
};

// Linear discriminant of the two generating Gaussians.
ScoreFunction bayes_linear_scorer(const SyntheticSpec& spec);

ConvergenceReport convergence_experiment(const ConvergenceConfig& config);
ConvergenceReport convergence_experiment(const ConvergenceConfig& config, const ScoreFunction& scorer);

struct SweepConfig {
    std::vector<double> theta_o_grid;
    std::vector<TrainConfig> methods;
    std::size_t folds = 3;
    std::uint64_t seed = 42;
    ObservationMode mode = ObservationMode::ExactFraction;
};

nlohmann::ordered_json to_json(const SweepConfig& config);

struct SweepRow {
    double theta_o = 0.0;
    std::string method;
    Summary auc;
    Summary aul_pu;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    nlohmann::ordered_json config;

    std::string to_csv() const;
};

SweepReport robustness_sweep(const PNDataset& data, const SweepConfig& config);

nlohmann::ordered_json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::ordered_json& j);

CvConfig cv_config_from_json(const nlohmann::ordered_json& j);
ConvergenceConfig convergence_config_from_json(const nlohmann::ordered_json& j);
SweepConfig sweep_config_from_json(const nlohmann::ordered_json& j);

struct EvalRequest {
    bool aul = true;
    bool auc = true;
    // Prior for the residual; PN input falls back to the label fraction.
    std::optional<double> theta_p;
    metrics::TieMode ties = metrics::TieMode::Canonical;
};

// AUL over the true positives, AUC, and the relation residual when both are
// requested.
metrics::MetricReport evaluate(std::span<const double> scores, const PNDataset& data, const EvalRequest& request);
// AUL_PU over the observed positives. AUC and an explicit prior are rejected.
metrics::MetricReport evaluate(std::span<const double> scores, const PUDataset& data, const EvalRequest& request);

// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace pulearn::harness

#endif
