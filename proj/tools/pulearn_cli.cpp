// pulearn command-line front end. Exit codes: 0 success, 1 runtime error,
// 2 usage error.
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pulearn/pulearn.h"

namespace {

using json = nlohmann::ordered_json;

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void usage_error(const std::string& message) {
    throw CliError{2, message};
}

void check(pul_status status) {
    if (status == PUL_OK) return;
    throw CliError{status == PUL_ERR_INVALID_ARGUMENT ? 2 : 1, pul_last_error()};
}

struct DatasetDeleter {
    void operator()(pul_dataset* d) const { pul_dataset_free(d); }
};
struct ModelDeleter {
    void operator()(pul_model* m) const { pul_model_free(m); }
};
struct StringDeleter {
    void operator()(char* s) const { pul_string_free(s); }
};

using Dataset = std::unique_ptr<pul_dataset, DatasetDeleter>;
using Model = std::unique_ptr<pul_model, ModelDeleter>;
using OwnedString = std::unique_ptr<char, StringDeleter>;

pul_missing_policy missing_policy(const std::string& name) {
    if (name == "median") return PUL_MISSING_MEDIAN;
    if (name == "drop") return PUL_MISSING_DROP;
    return PUL_MISSING_ERROR;
}

Dataset load(const std::string& path, pul_dataset_kind kind, const std::string& missing) {
    pul_dataset* d = nullptr;
    check(pul_dataset_load_csv(path.c_str(), kind, missing_policy(missing), &d));
    return Dataset(d);
}

pul_dataset_kind kind_of(const pul_dataset* d) {
    pul_dataset_kind kind{};
    check(pul_dataset_shape(d, nullptr, nullptr, &kind));
    return kind;
}

std::size_t rows_of(const pul_dataset* d) {
    std::size_t n = 0;
    check(pul_dataset_shape(d, &n, nullptr, nullptr));
    return n;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError{1, "cannot open " + path};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError{1, "cannot create " + path};
    out << text;
    out.flush();
    if (!out) throw CliError{1, "failed writing " + path};
}

json parse_json_file(const std::string& path) {
    const auto text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw CliError{1, path + ": " + e.what()};
    }
}

// Fully resolved invocation, written next to the primary output (or to
// stderr when the command only prints).
struct RunConfig {
    json doc;

    explicit RunConfig(const std::string& command) {
        doc["command"] = command;
        doc["version"] = pul_version();
        doc["flags"] = json::object();
        doc["inputs"] = json::object();
        doc["outputs"] = json::object();
    }

    void flag(const std::string& name, json value) { doc["flags"][name] = std::move(value); }
    void input(const std::string& name, const std::string& path) { doc["inputs"][name] = path; }
    void output(const std::string& name, const std::string& path) { doc["outputs"][name] = path; }
    void seed(std::uint64_t s) { doc["seed"] = s; }

    void emit(const std::optional<std::string>& primary) const {
        const auto text = doc.dump(2) + "\n";
        if (primary) {
            write_file(*primary + ".run.json", text);
        } else {
            std::cerr << text;
        }
    }
};

// Training flags shared by train, cv and sweep.
struct TrainOptions {
    std::string method = "probtagging";
    std::string base = "gbdt";
    std::string k = "auto";
    std::size_t k_min = 1;
    std::size_t k_max = 50;
    double threshold = 0.01;
    std::size_t window = 3;
    std::size_t m = 50;
    std::optional<std::size_t> negatives_per_bag;
    std::size_t trees = 100;
    double learning_rate = 0.1;
    std::size_t max_leaves = 31;
    std::size_t min_leaf = 20;
    double l2 = 1.0;
    bool no_standardize = false;
    bool include_self = false;

    void add(CLI::App* app, bool with_method) {
        if (with_method) {
            app->add_option("--method", method, "Training method")
                ->check(CLI::IsMember({"probtagging", "naive", "bagging"}));
        }
        app->add_option("--base", base, "Base classifier")->check(CLI::IsMember({"gbdt", "logistic"}));
        app->add_option("--k", k, "Neighbor count for ProbTagging, an integer or auto");
        app->add_option("--k-min", k_min, "Smallest k scanned by auto selection")->check(CLI::PositiveNumber);
        app->add_option("--k-max", k_max, "Largest k scanned by auto selection (clamped to n-1)")
            ->check(CLI::PositiveNumber);
        app->add_option("--threshold", threshold, "Relative E_k growth counted as stable")
            ->check(CLI::NonNegativeNumber);
        app->add_option("--window", window, "Consecutive stable steps required")->check(CLI::PositiveNumber);
        app->add_option("--m", m, "Ensemble size: tag rounds (probtagging) or bags (bagging)")
            ->check(CLI::PositiveNumber);
        app->add_option("--negatives-per-bag", negatives_per_bag,
                        "Unlabeled samples per bag (default: observed-positive count)")
            ->check(CLI::PositiveNumber);
        app->add_option("--trees", trees, "GBDT boosting rounds")->check(CLI::PositiveNumber);
        app->add_option("--learning-rate", learning_rate, "GBDT shrinkage")->check(CLI::PositiveNumber);
        app->add_option("--max-leaves", max_leaves, "GBDT leaves per tree")->check(CLI::Range(2, 1 << 20));
        app->add_option("--min-leaf", min_leaf, "GBDT minimum samples per leaf")->check(CLI::PositiveNumber);
        app->add_option("--l2", l2, "Logistic L2 penalty")->check(CLI::NonNegativeNumber);
        app->add_flag("--no-standardize", no_standardize, "Use raw features for neighbor search");
        app->add_flag("--include-self", include_self, "Count a sample among its own neighbors");
    }

    json to_json(const std::string& method_name, std::uint64_t seed, int threads) const {
        json base_json;
        base_json["kind"] = base;
        base_json["gbdt"] = {{"treeCount", trees},
                             {"maxLeaves", max_leaves},
                             {"learningRate", learning_rate},
                             {"minSamplesPerLeaf", min_leaf}};
        base_json["logistic"] = {{"l2Penalty", l2}};
        json j;
        j["method"] = method_name;
        j["base"] = base_json;
        if (k == "auto") {
            j["k"] = "auto";
        } else {
            try {
                std::size_t used = 0;
                const auto value = std::stoull(k, &used);
                if (used != k.size() || value == 0) throw std::invalid_argument(k);
                j["k"] = value;
            } catch (const std::exception&) {
                usage_error("--k must be a positive integer or auto, got '" + k + "'");
            }
        }
        j["kMin"] = k_min;
        j["kMax"] = k_max;
        j["growthThreshold"] = threshold;
        j["window"] = window;
        j["standardize"] = !no_standardize;
        j["includeSelf"] = include_self;
        j["m"] = m;
        if (negatives_per_bag) {
            j["negativesPerBag"] = *negatives_per_bag;
        } else {
            j["negativesPerBag"] = "match-positives";
        }
        j["seed"] = seed;
        j["threads"] = threads;
        return j;
    }
};

std::size_t clamp_k_max(std::size_t k_max, std::size_t n) {
    if (n < 2) usage_error("neighbor search needs at least 2 samples");
    return std::min(k_max, n - 1);
}

json without_threads(json j) {
    j.erase("threads");
    return j;
}

struct Common {
    int threads = 1;
    std::string missing = "median";

    void add(CLI::App* app) {
        app->add_option("--threads", threads, "Worker threads; results do not depend on it")
            ->check(CLI::PositiveNumber);
        app->add_option("--missing", missing, "Missing-value policy for CSV input")
            ->check(CLI::IsMember({"error", "median", "drop"}));
    }

    void echo(RunConfig& rc) const {
        rc.flag("threads", threads);
        rc.flag("missing", missing);
    }
};

void add_synth(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("synth", "Draw paired PN and PU datasets from a Gaussian spec");
    struct Opts {
        std::string spec, out_pn, out_pu;
        std::size_t n = 0;
        std::optional<std::uint64_t> seed;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--spec", o->spec, "JSON spec: thetaP, thetaO, d, meanP, meanN, sharedStdDev, seed")
        ->required();
    app->add_option("--n", o->n, "Sample count")->required()->check(CLI::PositiveNumber);
    app->add_option("--out-pn", o->out_pn, "PN output CSV")->required();
    app->add_option("--out-pu", o->out_pu, "PU output CSV")->required();
    app->add_option("--seed", o->seed, "Overrides the spec seed (spec default 42)");
    app->callback([&action, o] {
        action = [o] {
            auto spec = parse_json_file(o->spec);
            if (!spec.is_object()) usage_error(o->spec + ": expected a JSON object");
            if (o->seed) spec["seed"] = *o->seed;
            if (!spec.contains("seed")) spec["seed"] = 42;
            pul_dataset* pn = nullptr;
            pul_dataset* pu = nullptr;
            check(pul_synth_generate(spec.dump().c_str(), o->n, &pn, &pu));
            Dataset pn_owned(pn), pu_owned(pu);
            check(pul_dataset_save_csv(pn, o->out_pn.c_str()));
            check(pul_dataset_save_csv(pu, o->out_pu.c_str()));
            RunConfig rc("synth");
            rc.flag("spec", spec);
            rc.flag("n", o->n);
            rc.seed(spec["seed"].get<std::uint64_t>());
            rc.input("spec", o->spec);
            rc.output("pn", o->out_pn);
            rc.output("pu", o->out_pu);
            rc.emit(o->out_pu);
        };
    });
}

void add_make_pu(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("make-pu", "Hide positive labels of a PN dataset");
    struct Opts {
        std::string in, out, mode = "exact";
        double theta_o = 0.0;
        std::uint64_t seed = 42;
        Common common;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--in", o->in, "PN input CSV")->required();
    app->add_option("--theta-o", o->theta_o, "Probability that a positive is observed, in (0,1]")->required();
    app->add_option("--mode", o->mode, "exact: round(thetaO * nP) observed; bernoulli: independent draws")
        ->check(CLI::IsMember({"exact", "bernoulli"}));
    app->add_option("--seed", o->seed, "Random seed");
    app->add_option("--out", o->out, "PU output CSV")->required();
    app->add_option("--missing", o->common.missing, "Missing-value policy for CSV input")
        ->check(CLI::IsMember({"error", "median", "drop"}));
    app->callback([&action, o] {
        action = [o] {
            auto pn = load(o->in, PUL_KIND_PN, o->common.missing);
            pul_dataset* pu = nullptr;
            check(pul_make_pu(pn.get(), o->theta_o, o->seed,
                              o->mode == "exact" ? PUL_OBSERVE_EXACT : PUL_OBSERVE_BERNOULLI, &pu));
            Dataset pu_owned(pu);
            check(pul_dataset_save_csv(pu, o->out.c_str()));
            RunConfig rc("make-pu");
            rc.flag("thetaO", o->theta_o);
            rc.flag("mode", o->mode);
            rc.flag("missing", o->common.missing);
            rc.seed(o->seed);
            rc.input("pn", o->in);
            rc.output("pu", o->out);
            rc.emit(o->out);
        };
    });
}

void add_select_k(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("select-k", "Compute the E_k curve and print the selected k");
    struct Opts {
        std::string in, out_curve;
        std::size_t k_min = 1, k_max = 50, window = 3;
        double threshold = 0.01;
        bool no_standardize = false;
        Common common;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--in", o->in, "PU input CSV")->required();
    app->add_option("--k-min", o->k_min, "Smallest k")->check(CLI::PositiveNumber);
    app->add_option("--k-max", o->k_max, "Largest k (clamped to n-1)")->check(CLI::PositiveNumber);
    app->add_option("--threshold", o->threshold, "Relative growth counted as stable")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--window", o->window, "Consecutive stable steps required")->check(CLI::PositiveNumber);
    app->add_flag("--no-standardize", o->no_standardize, "Use raw features for neighbor search");
    app->add_option("--out-curve", o->out_curve, "E_k curve CSV (k,ek)")->required();
    o->common.add(app);
    app->callback([&action, o] {
        action = [o] {
            auto pu = load(o->in, PUL_KIND_PU, o->common.missing);
            const auto k_max = clamp_k_max(o->k_max, rows_of(pu.get()));
            if (o->k_min > k_max) usage_error("--k-min exceeds the usable k-max " + std::to_string(k_max));
            std::vector<double> ek(k_max - o->k_min + 1);
            check(pul_ek_curve(pu.get(), o->k_min, k_max, o->no_standardize ? 0 : 1, o->common.threads, ek.data()));
            std::size_t chosen = 0;
            int fallback = 0;
            check(pul_select_k(ek.data(), ek.size(), o->k_min, o->threshold, o->window, &chosen, &fallback));
            char* csv = nullptr;
            check(pul_ek_curve_csv(ek.data(), ek.size(), o->k_min, &csv));
            OwnedString csv_owned(csv);
            write_file(o->out_curve, csv);
            if (fallback != 0) std::cerr << "warning: E_k never stabilized; using k-max\n";
            std::cout << chosen << '\n';
            RunConfig rc("select-k");
            rc.flag("kMin", o->k_min);
            rc.flag("kMax", k_max);
            rc.flag("threshold", o->threshold);
            rc.flag("window", o->window);
            rc.flag("standardize", !o->no_standardize);
            o->common.echo(rc);
            rc.input("pu", o->in);
            rc.output("curve", o->out_curve);
            rc.doc["result"] = {{"k", chosen}, {"fallback", fallback != 0}};
            rc.emit(o->out_curve);
        };
    });
}

void add_train(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("train", "Train a ProbTagging ensemble or a baseline on PU data");
    struct Opts {
        std::string in, out;
        std::uint64_t seed = 42;
        TrainOptions train;
        Common common;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--in", o->in, "PU input CSV")->required();
    app->add_option("--seed", o->seed, "Random seed");
    app->add_option("--out", o->out, "Model JSON output")->required();
    o->train.add(app, true);
    o->common.add(app);
    app->callback([&action, o] {
        action = [o] {
            auto pu = load(o->in, PUL_KIND_PU, o->common.missing);
            auto config = o->train.to_json(o->train.method, o->seed, o->common.threads);
            if (config["k"].is_string()) config["kMax"] = clamp_k_max(o->train.k_max, rows_of(pu.get()));
            pul_model* model = nullptr;
            check(pul_train(pu.get(), config.dump().c_str(), &model));
            Model owned(model);
            check(pul_model_save(model, o->out.c_str()));
            std::size_t k = 0, m_eff = 0;
            check(pul_model_info(model, nullptr, &k, &m_eff));
            RunConfig rc("train");
            rc.flag("train", without_threads(config));
            o->common.echo(rc);
            rc.seed(o->seed);
            rc.input("pu", o->in);
            rc.output("model", o->out);
            rc.doc["result"] = {{"k", k}, {"mEffective", m_eff}};
            rc.emit(o->out);
        };
    });
}

void add_score(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("score", "Score a CSV with a saved model");
    struct Opts {
        std::string model, in, out;
        Common common;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--model", o->model, "Model JSON")->required();
    app->add_option("--in", o->in, "Input CSV; a label or observed column is ignored")->required();
    app->add_option("--out", o->out, "Scores CSV (single score column)")->required();
    app->add_option("--missing", o->common.missing, "Missing-value policy for CSV input")
        ->check(CLI::IsMember({"error", "median", "drop"}));
    app->callback([&action, o] {
        action = [o] {
            pul_model* model = nullptr;
            check(pul_model_load(o->model.c_str(), &model));
            Model owned(model);
            auto data = load(o->in, PUL_KIND_AUTO, o->common.missing);
            const auto n = rows_of(data.get());
            std::vector<double> scores(n);
            check(pul_predict(model, data.get(), scores.data(), scores.size()));
            check(pul_save_scores_csv(scores.data(), scores.size(), o->out.c_str()));
            RunConfig rc("score");
            rc.flag("missing", o->common.missing);
            rc.input("model", o->model);
            rc.input("data", o->in);
            rc.output("scores", o->out);
            rc.emit(o->out);
        };
    });
}

void add_eval(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("eval", "Evaluate scores: AUL (PN or PU input), AUC and residual (PN input)");
    struct Opts {
        std::string scores, in, metric = "both", ties = "canonical";
        std::optional<double> theta_p;
        std::optional<std::string> out;
        Common common;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--scores", o->scores, "Scores CSV with a score column")->required();
    app->add_option("--in", o->in, "PN (label) or PU (observed) CSV aligned with the scores")->required();
    app->add_option("--metric", o->metric, "Metrics to report; PU input reports AUL only")
        ->check(CLI::IsMember({"aul", "auc", "both"}));
    app->add_option("--theta-p", o->theta_p, "Class prior for the residual (PN input; default label fraction)");
    app->add_option("--ties", o->ties, "Lift-curve tie handling")->check(CLI::IsMember({"canonical", "average"}));
    app->add_option("--out", o->out, "Write the report here instead of stdout");
    app->add_option("--missing", o->common.missing, "Missing-value policy for CSV input")
        ->check(CLI::IsMember({"error", "median", "drop"}));
    app->callback([&action, o] {
        action = [o] {
            auto data = load(o->in, PUL_KIND_AUTO, o->common.missing);
            const auto kind = kind_of(data.get());
            if (kind == PUL_KIND_FEATURES) usage_error(o->in + " has neither a label nor an observed column");
            if (kind == PUL_KIND_PU && o->metric == "auc") usage_error("--metric auc needs PN labels");
            if (kind == PUL_KIND_PU && o->theta_p) usage_error("--theta-p needs PN labels; PU input has no residual");
            if (o->theta_p && o->metric != "both") usage_error("--theta-p is only used with --metric both");
            auto scores_data = load(o->scores, PUL_KIND_FEATURES, "error");
            std::size_t n = 0, d = 0;
            check(pul_dataset_shape(scores_data.get(), &n, &d, nullptr));
            if (d != 1) usage_error(o->scores + ": expected a single score column");
            std::vector<double> scores(n);
            check(pul_dataset_features(scores_data.get(), scores.data(), scores.size()));
            // On PU input "both" reduces to the AUL_PU estimate.
            const int metrics = o->metric == "aul" || kind == PUL_KIND_PU ? PUL_METRIC_AUL
                                : o->metric == "auc"                      ? PUL_METRIC_AUC
                                                                          : PUL_METRIC_AUL | PUL_METRIC_AUC;
            const double* theta = o->theta_p ? &*o->theta_p : nullptr;
            char* report = nullptr;
            check(pul_evaluate(scores.data(), n, data.get(), metrics, theta,
                               o->ties == "average" ? PUL_TIES_AVERAGE : PUL_TIES_CANONICAL, &report));
            OwnedString owned(report);
            if (o->out) {
                write_file(*o->out, report);
            } else {
                std::cout << report;
            }
            RunConfig rc("eval");
            rc.flag("metric", o->metric);
            rc.flag("thetaP", o->theta_p ? json(*o->theta_p) : json(nullptr));
            rc.flag("ties", o->ties);
            rc.flag("missing", o->common.missing);
            rc.input("scores", o->scores);
            rc.input("data", o->in);
            if (o->out) rc.output("report", *o->out);
            rc.emit(o->out);
        };
    });
}

void add_cv(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("cv", "Stratified k-fold cross-validation");
    struct Opts {
        std::string in, out, mode = "exact";
        std::size_t folds = 3;
        std::optional<double> theta_o;
        std::uint64_t seed = 42;
        TrainOptions train;
        Common common;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--in", o->in, "PN or PU input CSV")->required();
    app->add_option("--folds", o->folds, "Fold count")->check(CLI::Range(2, 1000));
    app->add_option("--theta-o", o->theta_o, "Observation probability; required for PN input");
    app->add_option("--mode", o->mode, "Observation mode used with --theta-o")
        ->check(CLI::IsMember({"exact", "bernoulli"}));
    app->add_option("--seed", o->seed, "Random seed");
    app->add_option("--out", o->out, "Per-fold CSV; the summary goes to <out>.summary.json")->required();
    o->train.add(app, true);
    o->common.add(app);
    app->callback([&action, o] {
        action = [o] {
            auto data = load(o->in, PUL_KIND_AUTO, o->common.missing);
            const auto kind = kind_of(data.get());
            if (kind == PUL_KIND_FEATURES) usage_error(o->in + " has neither a label nor an observed column");
            if (kind == PUL_KIND_PN && !o->theta_o) usage_error("PN input needs --theta-o");
            if (kind == PUL_KIND_PU && o->theta_o) usage_error("--theta-o applies to PN input only");
            json config;
            config["train"] = o->train.to_json(o->train.method, o->seed, o->common.threads);
            config["folds"] = o->folds;
            config["seed"] = o->seed;
            if (o->theta_o) config["thetaO"] = *o->theta_o;
            config["mode"] = o->mode;
            char* csv = nullptr;
            char* summary = nullptr;
            check(pul_cross_validate(data.get(), config.dump().c_str(), &csv, &summary));
            OwnedString csv_owned(csv), summary_owned(summary);
            write_file(o->out, csv);
            write_file(o->out + ".summary.json", summary);
            RunConfig rc("cv");
            config["train"] = without_threads(config["train"]);
            rc.flag("cv", config);
            o->common.echo(rc);
            rc.seed(o->seed);
            rc.input("data", o->in);
            rc.output("folds", o->out);
            rc.output("summary", o->out + ".summary.json");
            rc.emit(o->out);
        };
    });
}

void add_converge(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("converge", "Monte Carlo gap |AUL_PU - AUL_PN| over a grid of sample sizes");
    struct Opts {
        std::string spec, out, scorer = "bayes-linear", ties = "average";
        std::vector<std::size_t> n_grid;
        std::size_t repeats = 20, trained_n = 5000;
        std::optional<std::uint64_t> seed;
        std::optional<std::string> trials_out;
        int threads = 1;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--spec", o->spec, "JSON synthetic spec")->required();
    app->add_option("--n-grid", o->n_grid, "Sample sizes, e.g. 100,1000,10000")
        ->required()
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    app->add_option("--repeats", o->repeats, "Draws per grid point")->check(CLI::PositiveNumber);
    app->add_option("--scorer", o->scorer, "Fixed scorer")->check(CLI::IsMember({"bayes-linear", "trained"}));
    app->add_option("--trained-n", o->trained_n, "Size of the draw the trained scorer is fit on")
        ->check(CLI::PositiveNumber);
    app->add_option("--ties", o->ties, "Lift-curve tie handling")->check(CLI::IsMember({"canonical", "average"}));
    app->add_option("--seed", o->seed, "Overrides the spec seed (spec default 42)");
    app->add_option("--out", o->out, "Aggregate CSV (n,repeats,mean_gap,max_gap)")->required();
    app->add_option("--trials-out", o->trials_out, "Per-trial CSV");
    app->add_option("--threads", o->threads, "Worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
    app->callback([&action, o] {
        action = [o] {
            auto spec = parse_json_file(o->spec);
            if (!spec.is_object()) usage_error(o->spec + ": expected a JSON object");
            if (o->seed) spec["seed"] = *o->seed;
            if (!spec.contains("seed")) spec["seed"] = 42;
            json config;
            config["spec"] = spec;
            config["nGrid"] = o->n_grid;
            config["repeats"] = o->repeats;
            config["scorer"] = o->scorer;
            config["trainedN"] = o->trained_n;
            config["ties"] = o->ties;
            config["threads"] = o->threads;
            char* csv = nullptr;
            char* trials = nullptr;
            check(pul_convergence(config.dump().c_str(), &csv, &trials));
            OwnedString csv_owned(csv), trials_owned(trials);
            write_file(o->out, csv);
            if (o->trials_out) write_file(*o->trials_out, trials);
            RunConfig rc("converge");
            rc.flag("converge", without_threads(config));
            rc.flag("threads", o->threads);
            rc.seed(spec["seed"].get<std::uint64_t>());
            rc.input("spec", o->spec);
            rc.output("aggregate", o->out);
            if (o->trials_out) rc.output("trials", *o->trials_out);
            rc.emit(o->out);
        };
    });
}

void add_sweep(CLI::App& root, std::function<void()>& action) {
    auto* app = root.add_subcommand("sweep", "Cross-validated AUC and AUL_PU across observation probabilities");
    struct Opts {
        std::string in, out, mode = "exact";
        std::vector<double> grid;
        std::vector<std::string> methods{"probtagging", "naive", "bagging"};
        std::size_t folds = 3;
        std::uint64_t seed = 42;
        TrainOptions train;
        Common common;
    };
    auto o = std::make_shared<Opts>();
    app->add_option("--in", o->in, "PN input CSV")->required();
    app->add_option("--theta-o-grid", o->grid, "Observation probabilities, e.g. 0.1,0.5,1")
        ->required()
        ->delimiter(',');
    app->add_option("--methods", o->methods, "Methods to compare")
        ->delimiter(',')
        ->check(CLI::IsMember({"probtagging", "naive", "bagging"}));
    app->add_option("--folds", o->folds, "Fold count")->check(CLI::Range(2, 1000));
    app->add_option("--mode", o->mode, "Observation mode")->check(CLI::IsMember({"exact", "bernoulli"}));
    app->add_option("--seed", o->seed, "Random seed");
    app->add_option("--out", o->out, "Robustness table CSV")->required();
    o->train.add(app, false);
    o->common.add(app);
    app->callback([&action, o] {
        action = [o] {
            auto data = load(o->in, PUL_KIND_PN, o->common.missing);
            json config;
            config["thetaOGrid"] = o->grid;
            config["methods"] = json::array();
            for (const auto& m : o->methods) {
                config["methods"].push_back(o->train.to_json(m, o->seed, o->common.threads));
            }
            config["folds"] = o->folds;
            config["seed"] = o->seed;
            config["mode"] = o->mode;
            char* csv = nullptr;
            check(pul_sweep(data.get(), config.dump().c_str(), &csv));
            OwnedString csv_owned(csv);
            write_file(o->out, csv);
            RunConfig rc("sweep");
            for (auto& m : config["methods"]) m = without_threads(m);
            rc.flag("sweep", config);
            o->common.echo(rc);
            rc.seed(o->seed);
            rc.input("pn", o->in);
            rc.output("table", o->out);
            rc.emit(o->out);
        };
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pulearn: positive-unlabeled evaluation and ProbTagging training"};
    app.set_version_flag("--version", pul_version());
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 1 runtime error, 2 usage error.");

    std::function<void()> action;
    add_synth(app, action);
    add_make_pu(app, action);
    add_select_k(app, action);
    add_train(app, action);
    add_score(app, action);
    add_eval(app, action);
    add_cv(app, action);
    add_converge(app, action);
    add_sweep(app, action);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (action) action();
        return 0;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
