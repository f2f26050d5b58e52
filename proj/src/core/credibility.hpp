#ifndef PULEARN_CORE_CREDIBILITY_HPP
#define PULEARN_CORE_CREDIBILITY_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "data.hpp"

namespace pulearn::credibility {

struct KnnOptions {
    // z-score each column before measuring distances; constant columns are
    // left as they are.
    bool standardize = true;
    // Count a sample among its own neighbors (ablation only).
    bool include_self = false;
    int threads = 1;
};

// Exact k-nearest-neighbor lists, each sorted by ascending (distance, index).
class NeighborTable {
public:
    NeighborTable(std::size_t n, std::size_t k, std::vector<std::size_t> flat);

    std::size_t size() const noexcept { return n_; }
    std::size_t k() const noexcept { return k_; }

    std::span<const std::size_t> neighbors(std::size_t i) const noexcept {
        return {flat_.data() + i * k_, k_};
    }

    // The k' <= k nearest neighbors, taken as a prefix of each list.
    NeighborTable truncated(std::size_t k) const;

private:
    std::size_t n_;
    std::size_t k_;
    std::vector<std::size_t> flat_;
};

struct CredibilityTable {
    std::size_t k = 0;
    // Observed positives carry the sentinel 1.
    std::vector<double> cred;
};

struct EkPoint {
    std::size_t k;
    double ek;
};

struct EkCurve {
    std::vector<EkPoint> points;
};

struct KSelection {
    std::size_t k = 0;
    // Set when no stable stage was found and the last k was returned.
    bool fallback = false;
};

NeighborTable knn_neighbors(const FeatureMatrix& features, std::size_t k, const KnnOptions& options = {});

CredibilityTable credibility(const NeighborTable& table, std::span<const std::uint8_t> observed);

// Expected number of unlabeled samples tagged positive in one round.
double ek(const CredibilityTable& cred, std::span<const std::uint8_t> observed);

EkCurve ek_curve(const FeatureMatrix& features, std::span<const std::uint8_t> observed, std::size_t k_min,
                 std::size_t k_max, const KnnOptions& options = {});

// Same curve from a precomputed table holding at least k_max neighbors.
EkCurve ek_curve(const NeighborTable& table, std::span<const std::uint8_t> observed, std::size_t k_min,
                 std::size_t k_max);

// Smallest k whose next `window` relative growth steps
// (E[k+1] - E[k]) / max(E[k], 1) are all at most `threshold`. A curve with no
// such stage, including one shorter than window + 1 points, falls back to its
// last k.
KSelection select_k(const EkCurve& curve, double threshold = 0.01, std::size_t window = 3);

std::string ek_curve_csv(const EkCurve& curve);

}  // namespace pulearn::credibility

#endif
