#ifndef PULEARN_CORE_METRICS_HPP
#define PULEARN_CORE_METRICS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pulearn::metrics {

// Ordering used to rank samples for the lift curve.
enum class TieMode {
    // Descending score, ties broken by ascending sample index.
    Canonical,
    // Each tied group contributes its expected positive count, which is the
    // average over all orderings inside the group.
    Average,
};

struct LiftPoint {
    double p;
    double alpha;
};

struct LiftCurve {
    std::vector<LiftPoint> points;
};

struct MetricReport {
    std::optional<double> aul;
    std::optional<double> auc;
    std::optional<double> theta_p_used;
    std::optional<double> residual;
    std::size_t n = 0;
    std::size_t n_pos = 0;

    // {"aul":..,"auc":..,"residual":..,"n":..,"n_pos":..}; absent fields are
    // omitted.
    std::string to_json() const;
};

// Fraction of scores <= xi.
double ecdf_at(std::span<const double> scores, double xi);

// Smallest achieved score s with ecdf_at(s) >= 1 - p. For p = 1 this is the
// minimum score.
double quantile_threshold(std::span<const double> scores, double p);

// Fraction of the indexed scores that are >= s.
double sensitivity(std::span<const double> scores, std::span<const std::size_t> positives, double s);

// Sample indices in canonical rank order (descending score, ascending index).
std::vector<std::size_t> canonical_order(std::span<const double> scores);

// positive_mask[i] != 0 marks sample i as positive (true or observed).
LiftCurve lift_curve(std::span<const double> scores, std::span<const unsigned char> positive_mask,
                     TieMode ties = TieMode::Canonical);
LiftCurve lift_curve(std::span<const double> scores, std::span<const std::size_t> positives,
                     TieMode ties = TieMode::Canonical);

// Mean lift-curve ordinate over p = t/n, t = 1..n.
double aul(std::span<const double> scores, std::span<const unsigned char> positive_mask,
           TieMode ties = TieMode::Canonical);
double aul(std::span<const double> scores, std::span<const std::size_t> positives,
           TieMode ties = TieMode::Canonical);

// Mann-Whitney AUC with 0.5 credit per tied pair. Labels in {+1, -1}.
double auc(std::span<const double> scores, std::span<const int> labels);

// (auc - aul_pn) - theta_p * (auc - 0.5)
double relation_residual(double auc, double aul_pn, double theta_p);

std::string lift_curve_csv(const LiftCurve& curve);

}  // namespace pulearn::metrics

#endif
