#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "data.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace pulearn;
using testutil::TempDir;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Internal;
}

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    FAIL("expected an error");
    return {};
}

PNDataset pn_with_positives(std::size_t n_pos, std::size_t n_neg) {
    std::vector<double> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
        x.push_back(static_cast<double>(i));
        y.push_back(i < n_pos ? 1 : -1);
    }
    return testutil::pn_from(n_pos + n_neg, 1, x, y);
}

SyntheticSpec spec_2d(double theta_p, double theta_o, std::uint64_t seed) {
    SyntheticSpec s;
    s.theta_p = theta_p;
    s.theta_o = theta_o;
    s.dim = 2;
    s.mean_p = {1.0, 1.0};
    s.mean_n = {0.0, 0.0};
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("load_pn_csv reads labels +1 and -1") {
    TempDir dir;
    const auto path = dir.file("pn.csv");
    testutil::write_text(path, "a,b,label\n1,2,+1\n3,4,-1\n5,6,1\n7,8,-1\n");
    const auto pn = load_pn_csv(path);
    CHECK(pn.size() == 4);
    CHECK(pn.positive_count() == 2);
    CHECK(pn.features().names() == std::vector<std::string>{"a", "b"});
    CHECK(pn.features().at(2, 1) == 6.0);
}

TEST_CASE("load_pu_csv rejects a file with no observed positives") {
    TempDir dir;
    const auto path = dir.file("pu.csv");
    testutil::write_text(path, "x,observed\n1,0\n2,0\n");
    CHECK(code_of([&] { load_pu_csv(path); }) == ErrorCode::Degenerate);
    CHECK(message_of([&] { load_pu_csv(path); }).find("no observed positives") != std::string::npos);
}

TEST_CASE("NaN entries are a parse error naming the row under the error policy") {
    TempDir dir;
    const auto path = dir.file("nan.csv");
    testutil::write_text(path, "x,y,label\n1,2,1\n3,NaN,-1\n");
    CsvOptions strict;
    strict.missing = MissingPolicy::Error;
    CHECK(code_of([&] { load_pn_csv(path, strict); }) == ErrorCode::Parse);
    const auto msg = message_of([&] { load_pn_csv(path, strict); });
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("'y'") != std::string::npos);
}

TEST_CASE("unparsable entries are a parse error under every policy") {
    TempDir dir;
    const auto path = dir.file("junk.csv");
    testutil::write_text(path, "x,label\n1,1\nabc,-1\n");
    CHECK(code_of([&] { load_pn_csv(path); }) == ErrorCode::Parse);
}

TEST_CASE("missing-value policies") {
    TempDir dir;
    const auto path = dir.file("miss.csv");
    testutil::write_text(path, "x,y,label\n1,2,1\n3,NA,-1\n5,8,-1\n");
    const auto a = load_pn_csv(path);
    CHECK(a.size() == 3);
    CHECK(a.features().at(1, 1) == 5.0);

    CsvOptions drop;
    drop.missing = MissingPolicy::Drop;
    const auto b = load_pn_csv(path, drop);
    CHECK(b.size() == 2);
    CHECK(b.labels() == std::vector<int>{1, -1});
    CHECK(b.features().at(1, 0) == 5.0);
}

TEST_CASE("malformed input is reported") {
    TempDir dir;
    const auto path = dir.file("bad.csv");
    testutil::write_text(path, "x,label\n1,1\n2\n");
    CHECK(code_of([&] { load_pn_csv(path); }) == ErrorCode::Parse);
    testutil::write_text(path, "x,label\n1,2\n");
    CHECK(code_of([&] { load_pn_csv(path); }) == ErrorCode::Parse);
    testutil::write_text(path, "x,y\n1,2\n");
    CHECK(code_of([&] { load_pn_csv(path); }) == ErrorCode::Parse);
    CHECK(code_of([&] { load_pn_csv(dir.file("absent.csv")); }) == ErrorCode::Io);
}

TEST_CASE("schema detection") {
    TempDir dir;
    testutil::write_text(dir.file("a.csv"), "x,label\n1,1\n");
    testutil::write_text(dir.file("b.csv"), "x,observed\n1,1\n");
    testutil::write_text(dir.file("c.csv"), "score\n1\n");
    CHECK(detect_csv_schema(dir.file("a.csv")) == CsvSchema::PN);
    CHECK(detect_csv_schema(dir.file("b.csv")) == CsvSchema::PU);
    CHECK(detect_csv_schema(dir.file("c.csv")) == CsvSchema::FeaturesOnly);
}

TEST_CASE("CSV round trip preserves every bit") {
    TempDir dir;
    const auto [pn, pu] = synth_generate(spec_2d(0.3, 0.5, 7), 200);
    save_csv(pn, dir.file("pn.csv"));
    save_csv(pu, dir.file("pu.csv"));
    const auto pn2 = load_pn_csv(dir.file("pn.csv"));
    const auto pu2 = load_pu_csv(dir.file("pu.csv"));
    CHECK(pn2.features().values() == pn.features().values());
    CHECK(pn2.labels() == pn.labels());
    CHECK(pu2.features().values() == pu.features().values());
    CHECK(pu2.observed() == pu.observed());
}

TEST_CASE("make_pu with thetaO = 1 observes exactly the positives") {
    const auto pn = pn_with_positives(17, 40);
    for (auto mode : {ObservationMode::ExactFraction, ObservationMode::Bernoulli}) {
        const auto pu = make_pu(pn, 1.0, 3, mode);
        for (std::size_t i = 0; i < pn.size(); ++i) {
            CHECK(pu.observed()[i] == (pn.labels()[i] == 1 ? 1 : 0));
        }
    }
}

TEST_CASE("make_pu exact fraction observes round(thetaO * nP) positives") {
    const auto pn = pn_with_positives(100, 50);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pu = make_pu(pn, 0.5, seed, ObservationMode::ExactFraction);
        CHECK(pu.observed_count() == 50);
        for (auto i : pu.observed_indices()) CHECK(pn.labels()[i] == 1);
    }
}

TEST_CASE("make_pu bernoulli count matches the binomial mean") {
    const auto pn = pn_with_positives(100, 20);
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        total += static_cast<double>(make_pu(pn, 0.5, seed, ObservationMode::Bernoulli).observed_count());
    }
    CHECK(std::abs(total / 1000.0 - 50.0) <= 3.0 * std::sqrt(100.0 * 0.25));
}

TEST_CASE("make_pu validates thetaO") {
    const auto pn = pn_with_positives(10, 10);
    CHECK(code_of([&] { make_pu(pn, 0.0, 1); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { make_pu(pn, 1.5, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("synth_generate positive count matches the binomial mean") {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        total += static_cast<double>(synth_generate(spec_2d(0.5, 1.0, seed), 1000).first.positive_count());
    }
    CHECK(std::abs(total / 100.0 - 500.0) <= 3.0 * std::sqrt(250.0));
}

TEST_CASE("synth_generate thetaO = 1 makes the views agree") {
    const auto [pn, pu] = synth_generate(spec_2d(0.2, 1.0, 11), 500);
    for (std::size_t i = 0; i < pn.size(); ++i) CHECK(pu.observed()[i] == (pn.labels()[i] == 1 ? 1 : 0));
    CHECK(&pn.features() == &pu.features());
}

TEST_CASE("synth_generate observed positives are true positives") {
    const auto [pn, pu] = synth_generate(spec_2d(0.3, 0.5, 5), 2000);
    for (auto i : pu.observed_indices()) CHECK(pn.labels()[i] == 1);
    const double frac = static_cast<double>(pu.observed_count()) / static_cast<double>(pn.positive_count());
    CHECK(frac == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("synth_generate is deterministic per seed") {
    const auto a = synth_generate(spec_2d(0.3, 0.5, 99), 300);
    const auto b = synth_generate(spec_2d(0.3, 0.5, 99), 300);
    const auto c = synth_generate(spec_2d(0.3, 0.5, 100), 300);
    CHECK(a.first.features().values() == b.first.features().values());
    CHECK(a.first.labels() == b.first.labels());
    CHECK(a.second.observed() == b.second.observed());
    CHECK(a.first.features().values() != c.first.features().values());
}

TEST_CASE("synthetic spec validation") {
    auto s = spec_2d(0.3, 0.5, 1);
    s.theta_p = 1.0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = spec_2d(0.3, 0.5, 1);
    s.mean_p = {1.0};
    CHECK_THROWS_AS(s.validate(), Error);
    s = spec_2d(0.3, 0.5, 1);
    s.shared_std_dev = 0.0;
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("split_folds stratifies a 6-sample toy set") {
    const std::vector<int> y{1, 1, 1, -1, -1, -1};
    const auto folds = split_folds(y, 3, 42);
    for (std::size_t f = 0; f < 3; ++f) {
        const auto test = folds.test_indices(f);
        REQUIRE(test.size() == 2);
        CHECK(y[test[0]] + y[test[1]] == 0);
        CHECK(folds.train_indices(f).size() == 4);
    }
}

TEST_CASE("split_folds rejects more folds than a stratum holds") {
    const std::vector<int> y{1, 1, 1, -1, -1, -1, -1, -1, -1, -1};
    CHECK(code_of([&] { split_folds(y, 5, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("split_folds is a deterministic balanced partition") {
    rng::Stream stream(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 10 + stream.below(200);
        const std::size_t k = 2 + stream.below(4);
        std::vector<int> y(n);
        for (auto& v : y) v = stream.bernoulli(0.3) ? 1 : -1;
        const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
        if (positives < k || n - positives < k) continue;
        const auto a = split_folds(y, k, 1000 + trial);
        const auto b = split_folds(y, k, 1000 + trial);
        CHECK(a.assignment == b.assignment);
        std::vector<std::size_t> size(k), pos(k);
        for (std::size_t i = 0; i < n; ++i) {
            ++size[a.assignment[i]];
            pos[a.assignment[i]] += y[i] == 1 ? 1 : 0;
        }
        CHECK(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()) <= 1);
        CHECK(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()) <= 1);
        std::set<std::size_t> seen;
        for (std::size_t f = 0; f < k; ++f) {
            for (auto i : a.test_indices(f)) CHECK(seen.insert(i).second);
        }
        CHECK(seen.size() == n);
    }
}

TEST_CASE("dataset hash reacts to labels and values") {
    const auto pn = pn_with_positives(3, 3);
    auto labels = pn.labels();
    const auto h = dataset_hash(pn.features(), labels);
    CHECK(h == dataset_hash(pn.features(), labels));
    labels[0] = -1;
    CHECK(h != dataset_hash(pn.features(), labels));
}

TEST_CASE("feature matrix rejects non-finite values") {
    CHECK_THROWS_AS(FeatureMatrix(1, 2, {1.0, std::nan("")}), Error);
    CHECK_THROWS_AS(FeatureMatrix(1, 2, {1.0}), Error);
}
