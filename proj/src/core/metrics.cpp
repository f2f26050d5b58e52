#include "metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "error.hpp"

namespace pulearn::metrics {

namespace {

void require_finite(std::span<const double> scores) {
    for (double s : scores) {
        require(std::isfinite(s), "scores must be finite");
    }
}

std::vector<unsigned char> mask_from_indices(std::size_t n, std::span<const std::size_t> positives) {
    std::vector<unsigned char> mask(n, 0);
    for (std::size_t i : positives) {
        require(i < n, "positive index out of range");
        mask[i] = 1;
    }
    return mask;
}

// Cumulative positive counts at cutoffs t = 1..n under the requested ordering.
std::vector<double> cumulative_positives(std::span<const double> scores, std::span<const unsigned char> mask,
                                         TieMode ties) {
    const auto order = canonical_order(scores);
    const std::size_t n = order.size();
    std::vector<double> cum(n);
    if (ties == TieMode::Canonical) {
        std::size_t count = 0;
        for (std::size_t t = 0; t < n; ++t) {
            count += mask[order[t]] ? 1 : 0;
            cum[t] = static_cast<double>(count);
        }
        return cum;
    }
    double before = 0.0;
    std::size_t a = 0;
    while (a < n) {
        std::size_t b = a;
        std::size_t q = 0;
        while (b < n && scores[order[b]] == scores[order[a]]) {
            q += mask[order[b]] ? 1 : 0;
            ++b;
        }
        const double g = static_cast<double>(b - a);
        for (std::size_t j = 1; j <= b - a; ++j) {
            cum[a + j - 1] = before + static_cast<double>(q) * static_cast<double>(j) / g;
        }
        before += static_cast<double>(q);
        a = b;
    }
    return cum;
}

std::size_t check_lift_inputs(std::span<const double> scores, std::span<const unsigned char> mask) {
    require(!scores.empty(), "lift curve needs at least one score");
    require(mask.size() == scores.size(), "positive mask length does not match score count");
    require_finite(scores);
    const auto n_pos = static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](unsigned char m) { return m != 0; }));
    require(n_pos > 0, "lift curve needs at least one positive");
    return n_pos;
}

}  // namespace

double ecdf_at(std::span<const double> scores, double xi) {
    require(!scores.empty(), "ecdf of an empty score series");
    const auto below = std::count_if(scores.begin(), scores.end(), [xi](double s) { return s <= xi; });
    return static_cast<double>(below) / static_cast<double>(scores.size());
}

double quantile_threshold(std::span<const double> scores, double p) {
    require(!scores.empty(), "quantile of an empty score series");
    require(p > 0.0 && p <= 1.0, "p must lie in (0,1]");
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    if (p == 1.0) {
        return sorted.front();
    }
    const double n = static_cast<double>(sorted.size());
    const double level = 1.0 - p;
    // Smallest rank r (1-based) with r / n >= 1 - p.
    auto r = static_cast<std::size_t>(std::ceil(level * n));
    r = std::clamp<std::size_t>(r, 1, sorted.size());
    while (r > 1 && static_cast<double>(r - 1) / n >= level) --r;
    while (r < sorted.size() && static_cast<double>(r) / n < level) ++r;
    return sorted[r - 1];
}

double sensitivity(std::span<const double> scores, std::span<const std::size_t> positives, double s) {
    require(!positives.empty(), "sensitivity needs at least one positive");
    std::size_t hits = 0;
    for (std::size_t i : positives) {
        require(i < scores.size(), "positive index out of range");
        if (scores[i] >= s) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(positives.size());
}

std::vector<std::size_t> canonical_order(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return order;
}

LiftCurve lift_curve(std::span<const double> scores, std::span<const unsigned char> positive_mask, TieMode ties) {
    const std::size_t n_pos = check_lift_inputs(scores, positive_mask);
    const auto cum = cumulative_positives(scores, positive_mask, ties);
    const double n = static_cast<double>(scores.size());
    LiftCurve curve;
    curve.points.reserve(cum.size());
    for (std::size_t t = 0; t < cum.size(); ++t) {
        curve.points.push_back({static_cast<double>(t + 1) / n, cum[t] / static_cast<double>(n_pos)});
    }
    return curve;
}

LiftCurve lift_curve(std::span<const double> scores, std::span<const std::size_t> positives, TieMode ties) {
    const auto mask = mask_from_indices(scores.size(), positives);
    return lift_curve(scores, mask, ties);
}

double aul(std::span<const double> scores, std::span<const unsigned char> positive_mask, TieMode ties) {
    const std::size_t n_pos = check_lift_inputs(scores, positive_mask);
    const auto cum = cumulative_positives(scores, positive_mask, ties);
    // Counts are integers (or halves within tie groups), so this sum is exact.
    double total = 0.0;
    for (double c : cum) total += c;
    return total / (static_cast<double>(scores.size()) * static_cast<double>(n_pos));
}

double aul(std::span<const double> scores, std::span<const std::size_t> positives, TieMode ties) {
    const auto mask = mask_from_indices(scores.size(), positives);
    return aul(scores, mask, ties);
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    require(scores.size() == labels.size(), "score and label counts differ");
    require_finite(scores);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double n_pos = 0.0;
    double n_neg = 0.0;
    double credit = 0.0;
    std::size_t a = 0;
    while (a < order.size()) {
        std::size_t b = a;
        double group_pos = 0.0;
        double group_neg = 0.0;
        while (b < order.size() && scores[order[b]] == scores[order[a]]) {
            const int y = labels[order[b]];
            require(y == 1 || y == -1, "labels must be +1 or -1");
            (y == 1 ? group_pos : group_neg) += 1.0;
            ++b;
        }
        credit += group_pos * n_neg + 0.5 * group_pos * group_neg;
        n_pos += group_pos;
        n_neg += group_neg;
        a = b;
    }
    require(n_pos > 0.0 && n_neg > 0.0, "AUC needs at least one positive and one negative");
    return credit / (n_pos * n_neg);
}

double relation_residual(double auc, double aul_pn, double theta_p) {
    return (auc - aul_pn) - theta_p * (auc - 0.5);
}

std::string MetricReport::to_json() const {
    nlohmann::ordered_json doc;
    if (aul) doc["aul"] = *aul;
    if (auc) doc["auc"] = *auc;
    if (residual) doc["residual"] = *residual;
    if (theta_p_used) doc["theta_p"] = *theta_p_used;
    doc["n"] = n;
    doc["n_pos"] = n_pos;
    return doc.dump(2) + "\n";
}

std::string lift_curve_csv(const LiftCurve& curve) {
    std::string out = "p,alpha\n";
    char buf[64];
    for (const auto& pt : curve.points) {
        auto r1 = std::to_chars(buf, buf + sizeof(buf), pt.p);
        out.append(buf, r1.ptr);
        out.push_back(',');
        auto r2 = std::to_chars(buf, buf + sizeof(buf), pt.alpha);
        out.append(buf, r2.ptr);
        out.push_back('\n');
    }
    return out;
}

}  // namespace pulearn::metrics
