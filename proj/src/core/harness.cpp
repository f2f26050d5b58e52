#include "harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "baselines.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "probtagging.hpp"
#include "rng.hpp"

namespace pulearn::harness {

namespace {

constexpr std::uint64_t kFoldSalt = 0x666f6c64ULL;
constexpr std::uint64_t kTrainPuSalt = 0x74727075ULL;
constexpr std::uint64_t kTestPuSalt = 0x74737075ULL;
constexpr std::uint64_t kModelSalt = 0x6d6f646cULL;

std::string optional_cell(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
}

nlohmann::ordered_json summary_to_json(const Summary& s) {
    return {{"mean", s.mean}, {"std", s.std_dev}, {"min", s.min}, {"max", s.max}};
}

std::vector<unsigned char> as_mask(std::span<const std::uint8_t> flags) {
    return {flags.begin(), flags.end()};
}

std::vector<unsigned char> positive_mask(std::span<const int> labels) {
    std::vector<unsigned char> mask(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) mask[i] = labels[i] == 1 ? 1 : 0;
    return mask;
}

EnsembleModel train_fold(const PUDataset& train_set, const CvConfig& config, std::size_t fold) {
    auto tc = config.train;
    tc.seed = rng::derive(config.seed, {kModelSalt, fold});
    return train(train_set, tc);
}

const char* mode_name(ObservationMode mode) {
    return mode == ObservationMode::ExactFraction ? "exact" : "bernoulli";
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::string to_string(Method method) {
    switch (method) {
        case Method::ProbTagging:
            return "probtagging";
        case Method::Naive:
            return "naive";
        case Method::Bagging:
            return "bagging";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "probtagging") return Method::ProbTagging;
    if (name == "naive") return Method::Naive;
    if (name == "bagging") return Method::Bagging;
    fail(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
    nlohmann::ordered_json j;
    j["method"] = to_string(c.method);
    j["base"] = c.base;
    j["k"] = c.k ? nlohmann::ordered_json(*c.k) : nlohmann::ordered_json("auto");
    j["kMin"] = c.k_min;
    j["kMax"] = c.k_max;
    j["growthThreshold"] = c.growth_threshold;
    j["window"] = c.window;
    j["standardize"] = c.standardize;
    j["includeSelf"] = c.include_self;
    j["m"] = c.m;
    j["negativesPerBag"] = c.negatives_per_bag ? nlohmann::ordered_json(*c.negatives_per_bag)
                                               : nlohmann::ordered_json("match-positives");
    j["seed"] = c.seed;
    return j;
}

TrainConfig train_config_from_json(const nlohmann::ordered_json& j) {
    TrainConfig c;
    try {
        if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
        if (j.contains("base")) learners::from_json(j.at("base"), c.base);
        if (j.contains("k")) {
            const auto& k = j.at("k");
            if (k.is_string()) {
                require(k.get<std::string>() == "auto", "k must be an integer or \"auto\"");
                c.k.reset();
            } else {
                c.k = k.get<std::size_t>();
            }
        }
        c.k_min = j.value("kMin", c.k_min);
        c.k_max = j.value("kMax", c.k_max);
        c.growth_threshold = j.value("growthThreshold", c.growth_threshold);
        c.window = j.value("window", c.window);
        c.standardize = j.value("standardize", c.standardize);
        c.include_self = j.value("includeSelf", c.include_self);
        c.m = j.value("m", c.m);
        if (j.contains("negativesPerBag")) {
            const auto& v = j.at("negativesPerBag");
            if (v.is_string()) {
                require(v.get<std::string>() == "match-positives", "negativesPerBag must be an integer or \"match-positives\"");
                c.negatives_per_bag.reset();
            } else {
                c.negatives_per_bag = v.get<std::size_t>();
            }
        }
        c.seed = j.value("seed", c.seed);
        c.threads = j.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("train config: ") + e.what());
    }
    return c;
}

EnsembleModel train(const PUDataset& pu, const TrainConfig& config) {
    require(config.m >= 1, "m must be at least 1");
    if (config.method == Method::ProbTagging) {
        probtagging::Config pt;
        pt.k = config.k;
        pt.k_min = config.k_min;
        pt.k_max = config.k_max;
        pt.growth_threshold = config.growth_threshold;
        pt.window = config.window;
        pt.m = config.m;
        pt.base = config.base;
        pt.seed = config.seed;
        pt.knn.standardize = config.standardize;
        pt.knn.include_self = config.include_self;
        pt.threads = config.threads;
        return probtagging::train_ensemble(pu, pt);
    }
    baselines::BaselineSpec spec;
    spec.kind = config.method == Method::Naive ? baselines::BaselineKind::Naive : baselines::BaselineKind::Bagging;
    spec.base = config.base;
    spec.bag_count = config.m;
    spec.negatives_per_bag = config.negatives_per_bag;
    spec.threads = config.threads;
    return baselines::train_baseline(pu, spec, config.seed);
}

nlohmann::ordered_json to_json(const CvConfig& c) {
    nlohmann::ordered_json j;
    j["train"] = to_json(c.train);
    j["folds"] = c.folds;
    j["seed"] = c.seed;
    j["thetaO"] = c.theta_o ? nlohmann::ordered_json(*c.theta_o) : nlohmann::ordered_json(nullptr);
    j["mode"] = mode_name(c.mode);
    return j;
}

Summary summarize(std::span<const double> values) {
    require(!values.empty(), "summary of an empty list");
    Summary s;
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / static_cast<double>(values.size());
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    s.mean = std::clamp(s.mean, s.min, s.max);
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

Summary CvReport::aul_pu() const {
    std::vector<double> v;
    for (const auto& f : folds) v.push_back(f.aul_pu);
    return summarize(v);
}

std::optional<Summary> CvReport::auc() const {
    std::vector<double> v;
    for (const auto& f : folds) {
        if (!f.auc) return std::nullopt;
        v.push_back(*f.auc);
    }
    return summarize(v);
}

std::optional<Summary> CvReport::aul_pn() const {
    std::vector<double> v;
    for (const auto& f : folds) {
        if (!f.aul_pn) return std::nullopt;
        v.push_back(*f.aul_pn);
    }
    return summarize(v);
}

std::string CvReport::to_csv() const {
    std::string out = "method,fold,n_test,n_test_observed,aul_pu,auc,aul_pn,residual,k,m_effective\n";
    for (const auto& f : folds) {
        out += method + ',' + std::to_string(f.fold) + ',' + std::to_string(f.n_test) + ',' +
               std::to_string(f.n_test_observed) + ',' + format_number(f.aul_pu) + ',' + optional_cell(f.auc) + ',' +
               optional_cell(f.aul_pn) + ',' + optional_cell(f.residual) + ',' + std::to_string(f.k) + ',' +
               std::to_string(f.m_effective) + '\n';
    }
    return out;
}

std::string CvReport::summary_json() const {
    nlohmann::ordered_json j;
    j["method"] = method;
    j["folds"] = folds.size();
    j["aul_pu"] = summary_to_json(aul_pu());
    if (auto s = auc()) j["auc"] = summary_to_json(*s);
    if (auto s = aul_pn()) j["aul_pn"] = summary_to_json(*s);
    j["config"] = config;
    return j.dump(2) + "\n";
}

CvReport cross_validate(const PUDataset& data, const CvConfig& config) {
    std::vector<int> strata(data.observed().begin(), data.observed().end());
    const auto folds = split_folds(strata, config.folds, rng::derive(config.seed, {kFoldSalt}));
    CvReport report;
    report.method = to_string(config.train.method);
    report.config = to_json(config);
    report.config["input"] = "pu";
    for (std::size_t f = 0; f < config.folds; ++f) {
        const auto train_rows = folds.train_indices(f);
        const auto test_rows = folds.test_indices(f);
        const auto train_set = data.subset(train_rows);
        const auto test_set = data.subset(test_rows);
        const auto model = train_fold(train_set, config, f);
        const auto scores = predict(model, test_set.features());

        FoldResult r;
        r.fold = f;
        r.n_test = test_set.size();
        r.n_test_observed = test_set.observed_count();
        r.aul_pu = metrics::aul(scores, as_mask(test_set.observed()));
        r.k = model.k;
        r.m_effective = model.m_effective();
        report.folds.push_back(r);
    }
    return report;
}

CvReport cross_validate(const PNDataset& data, const CvConfig& config) {
    require(config.theta_o.has_value(), "cross-validation of PN data needs thetaO");
    const double theta_o = *config.theta_o;
    const auto folds = split_folds(data.labels(), config.folds, rng::derive(config.seed, {kFoldSalt}));
    CvReport report;
    report.method = to_string(config.train.method);
    report.config = to_json(config);
    report.config["input"] = "pn";
    for (std::size_t f = 0; f < config.folds; ++f) {
        const auto train_pn = data.subset(folds.train_indices(f));
        const auto test_pn = data.subset(folds.test_indices(f));
        const auto train_pu = make_pu(train_pn, theta_o, rng::derive(config.seed, {kTrainPuSalt, f}), config.mode);
        const auto test_pu = make_pu(test_pn, theta_o, rng::derive(config.seed, {kTestPuSalt, f}), config.mode);

        const auto model = train_fold(train_pu, config, f);
        const auto scores = predict(model, test_pn.features());

        FoldResult r;
        r.fold = f;
        r.n_test = test_pn.size();
        r.n_test_observed = test_pu.observed_count();
        r.aul_pu = metrics::aul(scores, as_mask(test_pu.observed()));
        r.auc = metrics::auc(scores, test_pn.labels());
        r.aul_pn = metrics::aul(scores, positive_mask(test_pn.labels()));
        const double theta_p = static_cast<double>(test_pn.positive_count()) / static_cast<double>(test_pn.size());
        r.residual = metrics::relation_residual(*r.auc, *r.aul_pn, theta_p);
        r.k = model.k;
        r.m_effective = model.m_effective();
        report.folds.push_back(r);
    }
    return report;
}

nlohmann::ordered_json to_json(const ConvergenceConfig& c) {
    nlohmann::ordered_json j;
    j["spec"] = to_json(c.spec);
    j["nGrid"] = c.n_grid;
    j["repeats"] = c.repeats;
    j["scorer"] = c.scorer == ScorerKind::BayesLinear ? "bayes-linear" : "trained";
    j["trainedN"] = c.trained_n;
    j["ties"] = c.ties == metrics::TieMode::Average ? "average" : "canonical";
    return j;
}

std::string ConvergenceReport::to_csv() const {
    std::string out = "n,repeats,mean_gap,max_gap\n";
    for (std::size_t a = 0; a < n_grid.size(); ++a) {
        out += std::to_string(n_grid[a]) + ',' + std::to_string(repeats) + ',' + format_number(mean_gap[a]) + ',' +
               format_number(max_gap[a]) + '\n';
    }
    return out;
}

std::string ConvergenceReport::trials_csv() const {
    std::string out = "n,repeat,seed,aul_pn,aul_pu,gap\n";
    for (const auto& t : trials) {
        out += std::to_string(t.n) + ',' + std::to_string(t.repeat) + ',' + std::to_string(t.seed) + ',' +
               format_number(t.aul_pn) + ',' + format_number(t.aul_pu) + ',' + format_number(t.gap) + '\n';
    }
    return out;
}

ScoreFunction bayes_linear_scorer(const SyntheticSpec& spec) {
    spec.validate();
    std::vector<double> w(spec.dim);
    const double var = spec.shared_std_dev * spec.shared_std_dev;
    for (std::size_t j = 0; j < spec.dim; ++j) w[j] = (spec.mean_p[j] - spec.mean_n[j]) / var;
    return [w](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
        return s;
    };
}

ConvergenceReport convergence_experiment(const ConvergenceConfig& config) {
    if (config.scorer == ScorerKind::BayesLinear) {
        return convergence_experiment(config, bayes_linear_scorer(config.spec));
    }
    auto train_spec = config.spec;
    train_spec.seed = rng::derive(config.spec.seed, {0x66697473ULL});
    train_spec.theta_o = 1.0;
    const auto [train_pn, train_pu] = synth_generate(train_spec, config.trained_n);
    const auto model = learners::train_logistic(learners::LogisticParams{}, train_pn.features(), train_pn.labels());
    ScoreFunction scorer = [model](std::span<const double> x) { return model.margin(x); };
    auto report = convergence_experiment(config, scorer);
    return report;
}

ConvergenceReport convergence_experiment(const ConvergenceConfig& config, const ScoreFunction& scorer) {
    require(!config.n_grid.empty(), "convergence: empty n grid");
    require(config.repeats >= 1, "convergence: repeats must be at least 1");
    for (std::size_t a = 0; a < config.n_grid.size(); ++a) {
        require(config.n_grid[a] >= 10, "convergence: grid values must be at least 10");
        require(a == 0 || config.n_grid[a] > config.n_grid[a - 1], "convergence: grid must be strictly increasing");
    }
    config.spec.validate();

    ConvergenceReport report;
    report.n_grid = config.n_grid;
    report.repeats = config.repeats;
    report.config = to_json(config);
    const std::size_t total = config.n_grid.size() * config.repeats;
    report.trials.resize(total);

    parallel_for(total, config.threads, [&](std::size_t item) {
        const std::size_t a = item / config.repeats;
        const std::size_t r = item % config.repeats;
        const std::size_t n = config.n_grid[a];
        auto spec = config.spec;
        // Redraw (deterministically) in the rare event of no observed positive.
        for (std::uint64_t attempt = 0;; ++attempt) {
            spec.seed = rng::derive(config.spec.seed, {n, r, attempt});
            try {
                const auto [pn, pu] = synth_generate(spec, n);
                std::vector<double> scores(n);
                for (std::size_t i = 0; i < n; ++i) scores[i] = scorer(pn.features().row(i));
                auto& t = report.trials[item];
                t.n = n;
                t.repeat = r;
                t.seed = spec.seed;
                t.aul_pn = metrics::aul(scores, positive_mask(pn.labels()), config.ties);
                t.aul_pu = metrics::aul(scores, as_mask(pu.observed()), config.ties);
                t.gap = std::abs(t.aul_pu - t.aul_pn);
                return;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::Degenerate || attempt >= 1000) throw;
            }
        }
    });

    for (std::size_t a = 0; a < config.n_grid.size(); ++a) {
        double total_gap = 0.0;
        double worst = 0.0;
        for (std::size_t r = 0; r < config.repeats; ++r) {
            const double g = report.trials[a * config.repeats + r].gap;
            total_gap += g;
            worst = std::max(worst, g);
        }
        report.mean_gap.push_back(total_gap / static_cast<double>(config.repeats));
        report.max_gap.push_back(worst);
    }
    return report;
}

nlohmann::ordered_json to_json(const SweepConfig& c) {
    nlohmann::ordered_json j;
    j["thetaOGrid"] = c.theta_o_grid;
    auto& methods = j["methods"] = nlohmann::ordered_json::array();
    for (const auto& m : c.methods) methods.push_back(to_json(m));
    j["folds"] = c.folds;
    j["seed"] = c.seed;
    j["mode"] = mode_name(c.mode);
    return j;
}

std::string SweepReport::to_csv() const {
    std::string out = "theta_o,method,auc_mean,auc_std,aul_pu_mean,aul_pu_std\n";
    for (const auto& r : rows) {
        out += format_number(r.theta_o) + ',' + r.method + ',' + format_number(r.auc.mean) + ',' +
               format_number(r.auc.std_dev) + ',' + format_number(r.aul_pu.mean) + ',' +
               format_number(r.aul_pu.std_dev) + '\n';
    }
    return out;
}

SweepReport robustness_sweep(const PNDataset& data, const SweepConfig& config) {
    require(!config.theta_o_grid.empty(), "sweep: empty thetaO grid");
    require(!config.methods.empty(), "sweep: no methods");
    for (double t : config.theta_o_grid) require(t > 0.0 && t <= 1.0, "sweep: thetaO values must lie in (0,1]");
    SweepReport report;
    report.config = to_json(config);
    for (double theta_o : config.theta_o_grid) {
        for (const auto& method : config.methods) {
            CvConfig cv;
            cv.train = method;
            cv.folds = config.folds;
            cv.seed = config.seed;
            cv.theta_o = theta_o;
            cv.mode = config.mode;
            const auto result = cross_validate(data, cv);
            report.rows.push_back({theta_o, result.method, *result.auc(), result.aul_pu()});
        }
    }
    return report;
}

metrics::MetricReport evaluate(std::span<const double> scores, const PNDataset& data, const EvalRequest& request) {
    require(scores.size() == data.size(), "score count " + std::to_string(scores.size()) +
                                              " does not match dataset size " + std::to_string(data.size()));
    require(request.aul || request.auc, "no metric requested");
    metrics::MetricReport report;
    report.n = data.size();
    report.n_pos = data.positive_count();
    if (report.n_pos == 0) fail(ErrorCode::Degenerate, "dataset has no positives");
    const double aul_value = metrics::aul(scores, positive_mask(data.labels()), request.ties);
    if (request.aul) report.aul = aul_value;
    if (request.auc) {
        if (!data.has_both_classes()) fail(ErrorCode::Degenerate, "AUC needs both classes");
        report.auc = metrics::auc(scores, data.labels());
    }
    if (request.aul && request.auc) {
        const double theta = request.theta_p.value_or(static_cast<double>(report.n_pos) / static_cast<double>(report.n));
        report.theta_p_used = theta;
        report.residual = metrics::relation_residual(*report.auc, aul_value, theta);
    }
    return report;
}

metrics::MetricReport evaluate(std::span<const double> scores, const PUDataset& data, const EvalRequest& request) {
    require(scores.size() == data.size(), "score count " + std::to_string(scores.size()) +
                                              " does not match dataset size " + std::to_string(data.size()));
    require(!request.auc, "AUC needs ground-truth labels; PU input only supports aul");
    require(!request.theta_p, "a residual needs ground-truth labels; thetaP is not accepted for PU input");
    require(request.aul, "no metric requested");
    metrics::MetricReport report;
    report.n = data.size();
    report.n_pos = data.observed_count();
    report.aul = metrics::aul(scores, as_mask(data.observed()), request.ties);
    return report;
}

nlohmann::ordered_json to_json(const SyntheticSpec& spec) {
    return {{"thetaP", spec.theta_p}, {"thetaO", spec.theta_o},   {"d", spec.dim},
            {"meanP", spec.mean_p},   {"meanN", spec.mean_n},     {"sharedStdDev", spec.shared_std_dev},
            {"seed", spec.seed}};
}

namespace {

ObservationMode parse_mode(const std::string& name) {
    if (name == "exact") return ObservationMode::ExactFraction;
    if (name == "bernoulli") return ObservationMode::Bernoulli;
    fail(ErrorCode::InvalidArgument, "unknown observation mode '" + name + "'");
}

template <typename Fn>
auto with_json_errors(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string(what) + ": " + e.what());
    }
}

}  // namespace

SyntheticSpec synthetic_spec_from_json(const nlohmann::ordered_json& j) {
    return with_json_errors("synthetic spec", [&] {
        SyntheticSpec spec;
        spec.theta_p = j.at("thetaP").get<double>();
        spec.theta_o = j.value("thetaO", 1.0);
        spec.mean_p = j.at("meanP").get<std::vector<double>>();
        spec.mean_n = j.at("meanN").get<std::vector<double>>();
        spec.dim = j.value("d", spec.mean_p.size());
        spec.shared_std_dev = j.value("sharedStdDev", 1.0);
        spec.seed = j.value("seed", std::uint64_t{42});
        spec.validate();
        return spec;
    });
}

CvConfig cv_config_from_json(const nlohmann::ordered_json& j) {
    return with_json_errors("cross-validation config", [&] {
        CvConfig c;
        if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
        c.folds = j.value("folds", c.folds);
        c.seed = j.value("seed", c.seed);
        if (j.contains("thetaO") && !j.at("thetaO").is_null()) c.theta_o = j.at("thetaO").get<double>();
        if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
        if (j.contains("threads")) c.train.threads = j.at("threads").get<int>();
        return c;
    });
}

ConvergenceConfig convergence_config_from_json(const nlohmann::ordered_json& j) {
    return with_json_errors("convergence config", [&] {
        ConvergenceConfig c;
        c.spec = synthetic_spec_from_json(j.at("spec"));
        c.n_grid = j.at("nGrid").get<std::vector<std::size_t>>();
        c.repeats = j.value("repeats", c.repeats);
        if (j.contains("scorer")) {
            const auto name = j.at("scorer").get<std::string>();
            if (name == "bayes-linear") {
                c.scorer = ScorerKind::BayesLinear;
            } else if (name == "trained") {
                c.scorer = ScorerKind::Trained;
            } else {
                fail(ErrorCode::InvalidArgument, "unknown scorer '" + name + "'");
            }
        }
        c.trained_n = j.value("trainedN", c.trained_n);
        if (j.contains("ties")) {
            const auto name = j.at("ties").get<std::string>();
            require(name == "average" || name == "canonical", "ties must be average or canonical");
            c.ties = name == "average" ? metrics::TieMode::Average : metrics::TieMode::Canonical;
        }
        c.threads = j.value("threads", c.threads);
        return c;
    });
}

SweepConfig sweep_config_from_json(const nlohmann::ordered_json& j) {
    return with_json_errors("sweep config", [&] {
        SweepConfig c;
        c.theta_o_grid = j.at("thetaOGrid").get<std::vector<double>>();
        for (const auto& m : j.at("methods")) c.methods.push_back(train_config_from_json(m));
        c.folds = j.value("folds", c.folds);
        c.seed = j.value("seed", c.seed);
        if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
        if (j.contains("threads")) {
            for (auto& m : c.methods) m.threads = j.at("threads").get<int>();
        }
        return c;
    });
}

}  // namespace pulearn::harness
