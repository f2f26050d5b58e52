#include <doctest.h>

#include <algorithm>
#include <set>

#include "baselines.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "learners.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace pulearn;
using namespace pulearn::baselines;

namespace {

PUDataset toy_pu(std::uint64_t seed, std::size_t n = 150) {
    rng::Stream stream(seed);
    std::vector<double> v;
    std::vector<std::uint8_t> obs;
    for (std::size_t i = 0; i < n; ++i) {
        const bool pos = stream.bernoulli(0.25);
        v.push_back(stream.normal() + (pos ? 2.0 : 0.0));
        obs.push_back(pos && stream.bernoulli(0.6) ? 1 : 0);
    }
    obs[1] = 1;
    return testutil::pu_from(n, 1, v, obs);
}

}  // namespace

TEST_CASE("bags hold every observed positive plus distinct unlabeled rows") {
    const auto pu = toy_pu(1);
    const auto observed = pu.observed_indices();
    for (std::size_t bag = 0; bag < 20; ++bag) {
        const auto rows = bag_rows(pu, 30, 77, bag);
        CHECK(rows.size() == observed.size() + 30);
        CHECK(std::is_sorted(rows.begin(), rows.end()));
        CHECK(std::adjacent_find(rows.begin(), rows.end()) == rows.end());
        for (auto i : observed) CHECK(std::binary_search(rows.begin(), rows.end(), i));
        CHECK(rows == bag_rows(pu, 30, 77, bag));
    }
    CHECK(bag_rows(pu, 30, 77, 0) != bag_rows(pu, 30, 77, 1));
    CHECK_THROWS_AS(bag_rows(pu, pu.unlabeled_indices().size() + 1, 77, 0), Error);
}

TEST_CASE("unlabeled rows are drawn uniformly") {
    const auto pu = toy_pu(2, 60);
    const auto unlabeled = pu.unlabeled_indices();
    std::vector<int> hits(pu.size(), 0);
    const int bags = 4000;
    for (int b = 0; b < bags; ++b) {
        for (auto r : bag_rows(pu, 10, 5, static_cast<std::size_t>(b))) ++hits[r];
    }
    const double p = 10.0 / static_cast<double>(unlabeled.size());
    const double sd = std::sqrt(bags * p * (1 - p));
    for (auto i : unlabeled) CHECK(std::abs(hits[i] - bags * p) <= 4.5 * sd);
}

TEST_CASE("naive trains one member on observed versus unlabeled") {
    const auto pu = toy_pu(3);
    BaselineSpec spec;
    spec.kind = BaselineKind::Naive;
    spec.base.kind = learners::BaseKind::Logistic;
    const auto model = train_baseline(pu, spec, 42);
    CHECK(model.method == "naive");
    REQUIRE(model.m_effective() == 1);

    std::vector<int> tags;
    for (auto f : pu.observed()) tags.push_back(f == 1 ? 1 : -1);
    const auto direct = learners::train_base(spec.base, pu.features(), tags, 0);
    for (std::size_t i = 0; i < pu.size(); ++i) {
        CHECK(model.members[0].score(pu.features().row(i)) == direct.score(pu.features().row(i)));
    }
}

TEST_CASE("bagging with one bag of every unlabeled sample equals naive") {
    const auto pu = toy_pu(4);
    for (auto kind : {learners::BaseKind::Gbdt, learners::BaseKind::Logistic}) {
        BaselineSpec naive;
        naive.kind = BaselineKind::Naive;
        naive.base.kind = kind;
        naive.base.gbdt.tree_count = 20;
        BaselineSpec bag = naive;
        bag.kind = BaselineKind::Bagging;
        bag.bag_count = 1;
        bag.negatives_per_bag = pu.unlabeled_indices().size();
        const auto a = train_baseline(pu, naive, 9);
        const auto b = train_baseline(pu, bag, 9);
        CHECK(predict(a, pu.features()) == predict(b, pu.features()));
    }
}

TEST_CASE("bagging is deterministic across thread counts") {
    const auto pu = toy_pu(5);
    BaselineSpec spec;
    spec.kind = BaselineKind::Bagging;
    spec.bag_count = 5;
    spec.base.gbdt.tree_count = 10;
    const auto a = train_baseline(pu, spec, 1);
    spec.threads = 4;
    const auto b = train_baseline(pu, spec, 1);
    CHECK(serialize_model(a) == serialize_model(b));
    CHECK(a.m_effective() == 5);
    CHECK(a.metadata.at("negativesPerBag").get<std::size_t>() == pu.observed_count());
}

TEST_CASE("baseline spec validation") {
    BaselineSpec spec;
    spec.bag_count = 0;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec.bag_count = 1;
    spec.negatives_per_bag = 0;
    CHECK_THROWS_AS(spec.validate(), Error);
}
