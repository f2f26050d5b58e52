#include "credibility.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>

#include "error.hpp"
#include "parallel.hpp"

namespace pulearn::credibility {

namespace {

constexpr std::size_t kQueryBlock = 64;
constexpr std::size_t kReferenceTile = 2048;

struct Candidate {
    double dist;
    std::size_t index;
    bool operator<(const Candidate& other) const noexcept {
        return dist < other.dist || (dist == other.dist && index < other.index);
    }
};

std::vector<double> prepared_values(const FeatureMatrix& features, bool standardize) {
    std::vector<double> values = features.values();
    if (!standardize) return values;
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += values[i * d + j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = values[i * d + j] - mean;
            var += c * c;
        }
        const double sd = std::sqrt(var / static_cast<double>(n));
        if (!(sd > 0.0)) continue;
        for (std::size_t i = 0; i < n; ++i) values[i * d + j] = (values[i * d + j] - mean) / sd;
    }
    return values;
}

}  // namespace

NeighborTable::NeighborTable(std::size_t n, std::size_t k, std::vector<std::size_t> flat)
    : n_(n), k_(k), flat_(std::move(flat)) {
    require(flat_.size() == n_ * k_, "neighbor table: size does not match n * k");
}

NeighborTable NeighborTable::truncated(std::size_t k) const {
    require(k >= 1 && k <= k_, "neighbor table: truncation beyond stored k");
    std::vector<std::size_t> flat(n_ * k);
    for (std::size_t i = 0; i < n_; ++i) {
        std::copy_n(flat_.begin() + static_cast<std::ptrdiff_t>(i * k_), k, flat.begin() + static_cast<std::ptrdiff_t>(i * k));
    }
    return NeighborTable(n_, k, std::move(flat));
}

NeighborTable knn_neighbors(const FeatureMatrix& features, std::size_t k, const KnnOptions& options) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    require(n >= 2, "k-NN needs at least two samples");
    const std::size_t k_limit = options.include_self ? n : n - 1;
    require(k >= 1 && k <= k_limit, "k must lie in [1, " + std::to_string(k_limit) + "]");

    const auto values = prepared_values(features, options.standardize);
    std::vector<std::size_t> flat(n * k);
    const std::size_t blocks = (n + kQueryBlock - 1) / kQueryBlock;

    parallel_for(blocks, options.threads, [&](std::size_t block) {
        const std::size_t q_begin = block * kQueryBlock;
        const std::size_t q_end = std::min(n, q_begin + kQueryBlock);
        // Max-heaps holding the current k best per query.
        std::vector<std::vector<Candidate>> heaps(q_end - q_begin);
        for (auto& h : heaps) h.reserve(k + 1);

        for (std::size_t r_begin = 0; r_begin < n; r_begin += kReferenceTile) {
            const std::size_t r_end = std::min(n, r_begin + kReferenceTile);
            for (std::size_t q = q_begin; q < q_end; ++q) {
                const double* qv = values.data() + q * d;
                auto& heap = heaps[q - q_begin];
                for (std::size_t r = r_begin; r < r_end; ++r) {
                    if (r == q && !options.include_self) continue;
                    const double* rv = values.data() + r * d;
                    double dist = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                        const double diff = qv[j] - rv[j];
                        dist += diff * diff;
                    }
                    const Candidate c{dist, r};
                    if (heap.size() < k) {
                        heap.push_back(c);
                        std::push_heap(heap.begin(), heap.end());
                    } else if (c < heap.front()) {
                        std::pop_heap(heap.begin(), heap.end());
                        heap.back() = c;
                        std::push_heap(heap.begin(), heap.end());
                    }
                }
            }
        }
        for (std::size_t q = q_begin; q < q_end; ++q) {
            auto& heap = heaps[q - q_begin];
            std::sort_heap(heap.begin(), heap.end());
            for (std::size_t j = 0; j < k; ++j) flat[q * k + j] = heap[j].index;
        }
    });
    return NeighborTable(n, k, std::move(flat));
}

CredibilityTable credibility(const NeighborTable& table, std::span<const std::uint8_t> observed) {
    require(observed.size() == table.size(), "credibility: flags are not aligned with the neighbor table");
    CredibilityTable out;
    out.k = table.k();
    out.cred.resize(table.size());
    const double k = static_cast<double>(table.k());
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (observed[i] == 1) {
            out.cred[i] = 1.0;
            continue;
        }
        std::size_t hits = 0;
        for (std::size_t j : table.neighbors(i)) hits += observed[j] == 1 ? 1 : 0;
        out.cred[i] = static_cast<double>(hits) / k;
    }
    return out;
}

double ek(const CredibilityTable& cred, std::span<const std::uint8_t> observed) {
    require(observed.size() == cred.cred.size(), "E_k: flags are not aligned with the credibility table");
    double total = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (observed[i] == 0) total += cred.cred[i];
    }
    return total;
}

EkCurve ek_curve(const FeatureMatrix& features, std::span<const std::uint8_t> observed, std::size_t k_min,
                 std::size_t k_max, const KnnOptions& options) {
    require(k_min >= 1 && k_min <= k_max, "E_k curve: need 1 <= kMin <= kMax");
    return ek_curve(knn_neighbors(features, k_max, options), observed, k_min, k_max);
}

EkCurve ek_curve(const NeighborTable& full, std::span<const std::uint8_t> observed, std::size_t k_min,
                 std::size_t k_max) {
    require(k_min >= 1 && k_min <= k_max && k_max <= full.k(), "E_k curve: need 1 <= kMin <= kMax <= table k");
    EkCurve curve;
    curve.points.reserve(k_max - k_min + 1);
    for (std::size_t k = k_min; k <= k_max; ++k) {
        const auto table = k == k_max ? full : full.truncated(k);
        curve.points.push_back({k, ek(credibility(table, observed), observed)});
    }
    return curve;
}

KSelection select_k(const EkCurve& curve, double threshold, std::size_t window) {
    const auto& pts = curve.points;
    require(window >= 1, "select_k: window must be at least 1");
    require(!pts.empty(), "select_k: empty curve");
    for (std::size_t j = 1; j < pts.size(); ++j) {
        require(pts[j].k == pts[j - 1].k + 1, "select_k: curve k values must be consecutive");
    }
    auto growth = [&pts](std::size_t j) { return (pts[j + 1].ek - pts[j].ek) / std::max(pts[j].ek, 1.0); };
    for (std::size_t start = 0; start + window < pts.size(); ++start) {
        bool stable = true;
        for (std::size_t j = start; j < start + window; ++j) {
            if (growth(j) > threshold) {
                stable = false;
                break;
            }
        }
        if (stable) return {pts[start].k, false};
    }
    return {pts.back().k, true};
}

std::string ek_curve_csv(const EkCurve& curve) {
    std::string out = "k,ek\n";
    char buf[64];
    for (const auto& pt : curve.points) {
        out += std::to_string(pt.k);
        out.push_back(',');
        auto r = std::to_chars(buf, buf + sizeof(buf), pt.ek);
        out.append(buf, r.ptr);
        out.push_back('\n');
    }
    return out;
}

}  // namespace pulearn::credibility
