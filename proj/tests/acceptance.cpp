// Acceptance suite: one PASS/FAIL/SKIP line per criterion, nonzero exit on any
// failure. Set PULEARN_CREDITCARD_CSV to the public credit-card fraud CSV to
// enable criterion 9.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "credibility.hpp"
#include "data.hpp"
#include "harness.hpp"
#include "metrics.hpp"
#include "oracles.hpp"
#include "probtagging.hpp"
#include "rng.hpp"

using namespace pulearn;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)}; }

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::vector<unsigned char> mask_of(const std::vector<int>& v) { return {v.begin(), v.end()}; }

SyntheticSpec two_gaussians(double theta_p, double theta_o, std::uint64_t seed) {
    SyntheticSpec s;
    s.theta_p = theta_p;
    s.theta_o = theta_o;
    s.dim = 2;
    s.mean_p = {1.0, 1.0};
    s.mean_n = {0.0, 0.0};
    s.seed = seed;
    return s;
}

std::vector<double> score_all(const harness::ScoreFunction& f, const FeatureMatrix& x) {
    std::vector<double> s(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) s[i] = f(x.row(i));
    return s;
}

// 1. Rank-cutoff AUL equals the integral of the empirical step function.
Outcome aul_oracle() {
    rng::Stream stream(1);
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t n = 1; n <= 8; ++n) {
        for (std::uint32_t pattern = 1; pattern < (1u << n); ++pattern) {
            std::vector<int> pos(n);
            for (std::size_t i = 0; i < n; ++i) pos[i] = (pattern >> i) & 1u;
            for (int draw = 0; draw < 50; ++draw) {
                std::vector<double> s(n);
                for (auto& v : s) v = stream.normal();
                const double got = metrics::aul(s, mask_of(pos));
                worst = std::max(worst, std::abs(got - oracle::aul_integral(s, pos, 10)));
                ++cases;
            }
        }
    }
    return pass_if(worst < 1e-12, std::to_string(cases) + " cases, max |diff| = " + fmt("%.3g", worst));
}

// 2. AUC equals pairwise enumeration, ties included.
Outcome auc_oracle() {
    rng::Stream stream(2);
    double worst = 0.0;
    for (int draw = 0; draw < 1000; ++draw) {
        const std::size_t n = 2 + stream.below(19);
        const bool coarse = draw % 2 == 0;
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = coarse ? static_cast<double>(stream.below(4)) : stream.normal();
            y[i] = stream.bernoulli(0.5) ? 1 : -1;
        }
        y[0] = 1;
        y[1] = -1;
        worst = std::max(worst, std::abs(metrics::auc(s, y) - oracle::auc_pairs(s, y)));
    }
    return pass_if(worst < 1e-12, "1000 draws, max |diff| = " + fmt("%.3g", worst));
}

// 3. The AUL_PU - AUL_PN gap shrinks with n. The threshold is twice the mean
// gap the Monte Carlo oracle observed at n = 1e5 for this configuration.
Outcome convergence() {
    constexpr double kThreshold = 0.0022;
    harness::ConvergenceConfig c;
    c.spec = two_gaussians(0.3, 0.5, 42);
    c.n_grid = {100, 1000, 10000, 100000};
    c.repeats = 20;
    const auto report = harness::convergence_experiment(c);
    bool decreasing = true;
    for (std::size_t i = 1; i < report.mean_gap.size(); ++i) {
        decreasing = decreasing && report.mean_gap[i] < report.mean_gap[i - 1];
    }
    std::string detail = "mean gaps";
    for (double g : report.mean_gap) detail += " " + fmt("%.5f", g);
    detail += "; threshold " + fmt("%.4f", kThreshold);
    return pass_if(decreasing && report.mean_gap.back() < kThreshold, detail);
}

// 4. With every positive observed the PU and PN views give the same AUL.
Outcome theta_o_identity() {
    int mismatches = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto spec = two_gaussians(0.05 + 0.009 * static_cast<double>(seed), 1.0, seed);
        const auto [pn, pu] = synth_generate(spec, 200 + 10 * seed);
        auto scores = score_all(harness::bayes_linear_scorer(spec), pn.features());
        if (seed % 3 == 0) {
            for (auto& v : scores) v = std::round(v * 4.0);
        }
        const auto pos = pn.positive_indices();
        const auto obs = pu.observed_indices();
        for (auto ties : {metrics::TieMode::Canonical, metrics::TieMode::Average}) {
            if (metrics::aul(scores, pos, ties) != metrics::aul(scores, obs, ties)) ++mismatches;
        }
    }
    return pass_if(mismatches == 0, "100 datasets, " + std::to_string(mismatches) + " mismatches");
}

// 5. AUC - AUL_PN = theta_P (AUC - 0.5) holds to 0.01 at n = 1e4.
Outcome relation() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto spec = two_gaussians(0.3, 1.0, seed);
        const auto [pn, pu] = synth_generate(spec, 10000);
        const auto scores = score_all(harness::bayes_linear_scorer(spec), pn.features());
        const double auc = metrics::auc(scores, pn.labels());
        const double aul = metrics::aul(scores, pn.positive_indices());
        worst = std::max(worst, std::abs(metrics::relation_residual(auc, aul, spec.theta_p)));
    }
    return pass_if(worst <= 0.01, "20 seeds, max |residual| = " + fmt("%.5f", worst));
}

// 6. Credibility and E_k agree with brute-force recomputation.
Outcome credibility_oracle() {
    rng::Stream stream(6);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + stream.below(48);
        const std::size_t d = 1 + stream.below(4);
        std::vector<double> v(n * d);
        for (auto& e : v) e = trial % 4 == 0 ? static_cast<double>(stream.below(3)) : stream.normal();
        std::vector<std::uint8_t> obs(n);
        std::vector<int> obs_int(n);
        for (std::size_t i = 0; i < n; ++i) obs[i] = stream.bernoulli(0.3) ? 1 : 0;
        obs[stream.below(n)] = 1;
        for (std::size_t i = 0; i < n; ++i) obs_int[i] = obs[i];
        const FeatureMatrix x(n, d, v);
        const auto z = oracle::standardized(v, n, d);
        for (std::size_t k : {std::size_t{1}, std::size_t{3}, n - 1}) {
            if (k >= n) continue;
            const auto expect = oracle::cred(oracle::knn(z, n, d, k), obs_int);
            const auto got = credibility::credibility(credibility::knn_neighbors(x, k), obs);
            if (got.cred != expect || credibility::ek(got, obs) != oracle::ek(expect, obs_int)) ++mismatches;
        }
    }
    return pass_if(mismatches == 0, "200 instances, " + std::to_string(mismatches) + " mismatches");
}

// 7. Tag rounds hit E_k on average and always keep observed positives.
Outcome tagging_statistics() {
    rng::Stream stream(7);
    const std::size_t n = 30;
    std::vector<double> v(n * 2);
    for (auto& e : v) e = stream.normal();
    std::vector<std::uint8_t> obs(n, 0);
    for (std::size_t i = 0; i < n; i += 3) obs[i] = 1;
    const PUDataset pu(std::make_shared<const FeatureMatrix>(n, 2, v), obs);
    const auto cred = credibility::credibility(credibility::knn_neighbors(pu.features(), 5), obs);
    const double expected = credibility::ek(cred, obs);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (obs[i] == 0) var += cred.cred[i] * (1.0 - cred.cred[i]);
    }
    const int rounds = 10000;
    double total = 0.0;
    bool observed_kept = true;
    for (int r = 0; r < rounds; ++r) {
        const auto tagged = probtagging::tag_round(pu, cred, probtagging::round_seed(7, static_cast<std::size_t>(r), 0));
        for (std::size_t i = 0; i < n; ++i) {
            if (obs[i] == 1) {
                observed_kept = observed_kept && tagged.tags[i] == 1;
            } else if (tagged.tags[i] == 1) {
                total += 1.0;
            }
        }
    }
    const double mean = total / rounds;
    const double bound = 3.0 * std::sqrt(var);
    return pass_if(observed_kept && std::abs(mean - expected) <= bound,
                   "mean " + fmt("%.4f", mean) + " vs E_k " + fmt("%.4f", expected) + ", bound " +
                       fmt("%.4f", bound) + (observed_kept ? "" : ", observed positive lost"));
}

// 8. ProbTagging versus the naive baseline on rare, overlapping positives.
Outcome probtagging_vs_naive() {
    std::vector<double> auc_pt, auc_nv;
    int agree = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto [pn, pu] = synth_generate(two_gaussians(0.01, 0.5, seed), 50000);
        harness::CvConfig c;
        c.folds = 3;
        c.seed = seed;
        c.theta_o = 0.5;
        c.train.method = harness::Method::ProbTagging;
        const auto pt = harness::cross_validate(pn, c);
        c.train.method = harness::Method::Naive;
        const auto nv = harness::cross_validate(pn, c);
        const double a_pt = pt.auc()->mean, a_nv = nv.auc()->mean;
        const double l_pt = pt.aul_pu().mean, l_nv = nv.aul_pu().mean;
        auc_pt.push_back(a_pt);
        auc_nv.push_back(a_nv);
        if ((a_pt > a_nv) == (l_pt > l_nv)) ++agree;
        detail += " [" + fmt("%.4f", a_pt) + "/" + fmt("%.4f", a_nv) + " aul " + fmt("%.4f", l_pt) + "/" +
                  fmt("%.4f", l_nv) + "]";
    }
    std::sort(auc_pt.begin(), auc_pt.end());
    std::sort(auc_nv.begin(), auc_nv.end());
    return pass_if(auc_pt[2] >= auc_nv[2] && agree >= 4,
                   "median AUC " + fmt("%.4f", auc_pt[2]) + " vs " + fmt("%.4f", auc_nv[2]) + ", ranking agrees in " +
                       std::to_string(agree) + "/5; per seed pt/naive:" + detail);
}

// Reads the public credit-card CSV: numeric columns, quoted or not, with the
// class in a column named Class (1 = fraud).
PNDataset load_creditcard(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cell.erase(std::remove(cell.begin(), cell.end(), '"'), cell.end());
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            out.push_back(cell);
        }
        return out;
    };
    const auto header = split(line);
    const auto cls = static_cast<std::size_t>(std::find(header.begin(), header.end(), "Class") - header.begin());
    if (cls == header.size()) throw std::runtime_error("no Class column");
    std::vector<double> values;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j == cls) {
                labels.push_back(std::stod(cells[j]) > 0.5 ? 1 : -1);
            } else {
                values.push_back(std::stod(cells[j]));
            }
        }
    }
    const std::size_t d = header.size() - 1;
    return PNDataset(std::make_shared<const FeatureMatrix>(labels.size(), d, std::move(values)), std::move(labels));
}

// 9. Public-data reproduction; skipped without the dataset.
Outcome creditcard() {
    const char* path = std::getenv("PULEARN_CREDITCARD_CSV");
    if (path == nullptr || !std::ifstream(path).good()) return {Verdict::Skip, "PULEARN_CREDITCARD_CSV not set"};
    const auto pn = load_creditcard(path);
    harness::CvConfig c;
    c.folds = 3;
    c.theta_o = 0.5;
    c.train.m = 50;
    c.train.base.kind = learners::BaseKind::Gbdt;
    const auto report = harness::cross_validate(pn, c);
    const double auc = report.auc()->mean, aul = report.aul_pu().mean;
    return pass_if(std::abs(auc - 0.9757) <= 0.02 && std::abs(aul - 0.9794) <= 0.02,
                   "AUC " + fmt("%.4f", auc) + " (0.9757 +/- 0.02), AUL " + fmt("%.4f", aul) + " (0.9794 +/- 0.02)");
}

// 10. Primary CLI outputs are byte-identical across reruns and thread counts.
Outcome determinism() {
    struct Command {
        std::string name;
        std::string args;  // {T} expands to the thread flag, {D} to the run directory
        std::vector<std::string> outputs;
    };
    const std::string fast = " --m 5 --trees 20 --min-leaf 5";
    const std::vector<Command> matrix = {
        {"synth", "synth --spec {D}/spec.json --n 1500 --out-pn {D}/pn.csv --out-pu {D}/pu.csv", {"pn.csv", "pu.csv"}},
        {"make-pu", "make-pu --in {D}/pn.csv --theta-o 0.4 --mode bernoulli --seed 5 --out {D}/made.csv", {"made.csv"}},
        {"select-k", "select-k --in {D}/pu.csv --k-max 40 --out-curve {D}/ek.csv {T}", {"ek.csv"}},
        {"train probtagging", "train --in {D}/pu.csv --out {D}/pt.json {T}" + fast, {"pt.json"}},
        {"train bagging", "train --in {D}/pu.csv --method bagging --out {D}/bag.json {T}" + fast, {"bag.json"}},
        {"score", "score --model {D}/pt.json --in {D}/pn.csv --out {D}/scores.csv", {"scores.csv"}},
        {"eval", "eval --scores {D}/scores.csv --in {D}/pn.csv --out {D}/eval.json", {"eval.json"}},
        {"cv", "cv --in {D}/pn.csv --theta-o 0.5 --out {D}/cv.csv {T}" + fast, {"cv.csv", "cv.csv.summary.json"}},
        {"converge",
         "converge --spec {D}/spec.json --n-grid 100,1000 --repeats 4 --scorer trained --trained-n 800 --out "
         "{D}/conv.csv --trials-out {D}/trials.csv {T}",
         {"conv.csv", "trials.csv"}},
        {"sweep",
         "sweep --in {D}/pn.csv --theta-o-grid 0.3,1 --methods probtagging,naive --out {D}/sweep.csv {T}" + fast,
         {"sweep.csv"}},
    };
    auto expand = [](std::string s, const std::string& dir, int threads) {
        auto replace = [&](const std::string& from, const std::string& to) {
            for (std::size_t p; (p = s.find(from)) != std::string::npos;) s.replace(p, from.size(), to);
        };
        replace("{D}", dir);
        replace("{T}", "--threads " + std::to_string(threads));
        return s;
    };

    const std::vector<int> thread_runs = {1, 4, 1};
    std::vector<std::vector<std::string>> outputs(thread_runs.size());
    std::string failure;
    for (std::size_t run = 0; run < thread_runs.size() && failure.empty(); ++run) {
        clirun::Runner cli(PULEARN_CLI_PATH);
        const auto dir = cli.path("");
        clirun::spit(cli.path("spec.json"),
                     R"({"thetaP":0.2,"thetaO":0.5,"d":2,"meanP":[1,1],"meanN":[0,0],"sharedStdDev":1,"seed":3})");
        for (const auto& cmd : matrix) {
            const auto r = cli.run(expand(cmd.args, dir, thread_runs[run]));
            if (r.code != 0) {
                failure = cmd.name + " exited " + std::to_string(r.code) + ": " + r.err;
                break;
            }
            for (const auto& out : cmd.outputs) outputs[run].push_back(clirun::slurp(cli.path(out)));
        }
    }
    if (!failure.empty()) return {Verdict::Fail, failure};
    std::size_t differing = 0;
    for (std::size_t i = 0; i < outputs[0].size(); ++i) {
        if (outputs[0][i].empty() || outputs[0][i] != outputs[1][i] || outputs[0][i] != outputs[2][i]) ++differing;
    }
    return pass_if(differing == 0, std::to_string(matrix.size()) + " commands, threads 1/4/1, " +
                                       std::to_string(outputs[0].size()) + " outputs, " + std::to_string(differing) +
                                       " differ");
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"1 aul oracle equivalence", aul_oracle},
        {"2 auc oracle equivalence", auc_oracle},
        {"3 aul_pu convergence", convergence},
        {"4 theta_o = 1 identity", theta_o_identity},
        {"5 auc-aul relation", relation},
        {"6 credibility/ek oracle", credibility_oracle},
        {"7 tagging statistics", tagging_statistics},
        {"8 probtagging vs naive", probtagging_vs_naive},
        {"9 public credit-card data", creditcard},
        {"10 cli determinism", determinism},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {Verdict::Fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
        if (o.verdict == Verdict::Fail) ++failures;
        std::printf("%s  %-28s %s (%.1fs)\n", tag, name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
