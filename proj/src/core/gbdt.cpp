#include <algorithm>
#include <cmath>
#include <map>

#include "error.hpp"
#include "learners.hpp"
#include "rng.hpp"

// Histogram-based gradient boosting with leaf-wise (best-first) tree growth on
// the logistic loss.

namespace pulearn::learners {

namespace {

double sigmoid(double m) {
    if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
    const double e = std::exp(m);
    return e / (1.0 + e);
}

// Upper bounds of each bin but the last; a value x falls into the first bin
// whose bound is >= x.
std::vector<double> make_bounds(std::vector<double> column, int max_bins) {
    std::sort(column.begin(), column.end());
    std::vector<double> distinct;
    std::vector<std::size_t> counts;
    for (double v : column) {
        if (distinct.empty() || v != distinct.back()) {
            distinct.push_back(v);
            counts.push_back(0);
        }
        ++counts.back();
    }
    auto cut_between = [](double lo, double hi) {
        const double mid = lo + (hi - lo) / 2.0;
        return mid < hi ? mid : lo;
    };
    std::vector<double> bounds;
    if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) bounds.push_back(cut_between(distinct[i], distinct[i + 1]));
        return bounds;
    }
    // Equal-frequency cuts placed between distinct values.
    const double per_bin = static_cast<double>(column.size()) / max_bins;
    std::size_t cumulative = 0;
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        cumulative += counts[i];
        const double target = per_bin * static_cast<double>(bounds.size() + 1);
        if (static_cast<double>(cumulative) >= target && bounds.size() + 1 < static_cast<std::size_t>(max_bins)) {
            bounds.push_back(cut_between(distinct[i], distinct[i + 1]));
        }
    }
    return bounds;
}

struct BinnedFeatures {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<std::vector<double>> bounds;
    std::vector<std::size_t> offsets;  // histogram offset of each feature
    std::size_t total_bins = 0;
    std::vector<std::uint8_t> bins;    // column-major

    std::uint8_t at(std::size_t i, std::size_t j) const { return bins[j * n + i]; }
};

BinnedFeatures bin_features(const FeatureMatrix& features, int max_bins) {
    BinnedFeatures b;
    b.n = features.rows();
    b.d = features.cols();
    b.bins.resize(b.n * b.d);
    std::vector<double> column(b.n);
    for (std::size_t j = 0; j < b.d; ++j) {
        for (std::size_t i = 0; i < b.n; ++i) column[i] = features.at(i, j);
        auto bounds = make_bounds(column, max_bins);
        for (std::size_t i = 0; i < b.n; ++i) {
            const auto pos = std::lower_bound(bounds.begin(), bounds.end(), column[i]) - bounds.begin();
            b.bins[j * b.n + i] = static_cast<std::uint8_t>(pos);
        }
        b.offsets.push_back(b.total_bins);
        b.total_bins += bounds.size() + 1;
        b.bounds.push_back(std::move(bounds));
    }
    return b;
}

struct HistBin {
    double g = 0.0;
    double h = 0.0;
    std::uint32_t count = 0;
};

struct Split {
    double gain = 0.0;
    int feature = -1;
    int bin = -1;
};

struct Leaf {
    std::size_t begin = 0;
    std::size_t end = 0;
    int node = 0;
    double g = 0.0;
    double h = 0.0;
    std::vector<HistBin> hist;
    Split best;

    std::size_t count() const { return end - begin; }
};

class TreeGrower {
public:
    TreeGrower(const GbdtParams& params, const BinnedFeatures& binned, const std::vector<double>& grad,
               const std::vector<double>& hess)
        : params_(params), binned_(binned), grad_(grad), hess_(hess) {}

    // Grows one tree over `rows`; afterwards `rows` is partitioned by leaf and
    // `leaves()` describes the segments.
    RegressionTree grow(std::vector<std::uint32_t>& rows) {
        rows_ = &rows;
        RegressionTree tree;
        tree.nodes.push_back(TreeNode{});
        leaves_.clear();

        Leaf root;
        root.begin = 0;
        root.end = rows.size();
        root.node = 0;
        root.hist = build_histogram(root.begin, root.end);
        for (std::size_t k = 0; k < binned_.bounds[0].size() + 1; ++k) {
            root.g += root.hist[k].g;
            root.h += root.hist[k].h;
        }
        root.best = best_split(root);
        leaves_.push_back(std::move(root));

        while (leaves_.size() < static_cast<std::size_t>(params_.max_leaves)) {
            std::size_t pick = leaves_.size();
            double best_gain = 0.0;
            for (std::size_t l = 0; l < leaves_.size(); ++l) {
                if (leaves_[l].best.feature >= 0 && leaves_[l].best.gain > best_gain) {
                    best_gain = leaves_[l].best.gain;
                    pick = l;
                }
            }
            if (pick == leaves_.size()) break;
            split_leaf(tree, pick);
        }

        for (const auto& leaf : leaves_) {
            tree.nodes[static_cast<std::size_t>(leaf.node)].value =
                -leaf.g / (leaf.h + params_.l2_leaf) * params_.learning_rate;
        }
        return tree;
    }

    const std::vector<Leaf>& leaves() const { return leaves_; }

private:
    std::vector<HistBin> build_histogram(std::size_t begin, std::size_t end) const {
        std::vector<HistBin> hist(binned_.total_bins);
        const auto& rows = *rows_;
        for (std::size_t j = 0; j < binned_.d; ++j) {
            const std::uint8_t* col = binned_.bins.data() + j * binned_.n;
            HistBin* base = hist.data() + binned_.offsets[j];
            for (std::size_t t = begin; t < end; ++t) {
                const std::uint32_t r = rows[t];
                HistBin& b = base[col[r]];
                b.g += grad_[r];
                b.h += hess_[r];
                ++b.count;
            }
        }
        return hist;
    }

    double score(double g, double h) const { return g * g / (h + params_.l2_leaf); }

    Split best_split(const Leaf& leaf) const {
        Split best;
        const auto min_count = static_cast<std::uint32_t>(params_.min_samples_per_leaf);
        const auto total = static_cast<std::uint32_t>(leaf.count());
        if (total < 2 * min_count) return best;
        const double parent = score(leaf.g, leaf.h);
        for (std::size_t j = 0; j < binned_.d; ++j) {
            const std::size_t nb = binned_.bounds[j].size() + 1;
            const HistBin* base = leaf.hist.data() + binned_.offsets[j];
            double gl = 0.0;
            double hl = 0.0;
            std::uint32_t cl = 0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                gl += base[b].g;
                hl += base[b].h;
                cl += base[b].count;
                if (cl < min_count) continue;
                if (total - cl < min_count) break;
                const double gr = leaf.g - gl;
                const double hr = leaf.h - hl;
                if (hl < params_.min_hessian_per_leaf || hr < params_.min_hessian_per_leaf) continue;
                const double gain = score(gl, hl) + score(gr, hr) - parent;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = static_cast<int>(j);
                    best.bin = static_cast<int>(b);
                }
            }
        }
        return best;
    }

    void split_leaf(RegressionTree& tree, std::size_t index) {
        Leaf parent = std::move(leaves_[index]);
        const auto f = static_cast<std::size_t>(parent.best.feature);
        const auto bin = static_cast<std::uint8_t>(parent.best.bin);
        auto& rows = *rows_;

        // Stable partition of the parent's segment: left rows first.
        scratch_.clear();
        std::size_t write = parent.begin;
        for (std::size_t t = parent.begin; t < parent.end; ++t) {
            const std::uint32_t r = rows[t];
            if (binned_.at(r, f) <= bin) {
                rows[write++] = r;
            } else {
                scratch_.push_back(r);
            }
        }
        std::copy(scratch_.begin(), scratch_.end(), rows.begin() + static_cast<std::ptrdiff_t>(write));

        const int left_node = static_cast<int>(tree.nodes.size());
        const int right_node = left_node + 1;
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        TreeNode& node = tree.nodes[static_cast<std::size_t>(parent.node)];
        node.feature = static_cast<int>(f);
        node.threshold = binned_.bounds[f][bin];
        node.left = left_node;
        node.right = right_node;

        Leaf left;
        left.begin = parent.begin;
        left.end = write;
        left.node = left_node;
        Leaf right;
        right.begin = write;
        right.end = parent.end;
        right.node = right_node;

        Leaf& small = left.count() <= right.count() ? left : right;
        Leaf& large = left.count() <= right.count() ? right : left;
        small.hist = build_histogram(small.begin, small.end);
        large.hist = std::move(parent.hist);
        for (std::size_t k = 0; k < large.hist.size(); ++k) {
            large.hist[k].g -= small.hist[k].g;
            large.hist[k].h -= small.hist[k].h;
            large.hist[k].count -= small.hist[k].count;
        }
        for (Leaf* leaf : {&left, &right}) {
            const std::size_t nb0 = binned_.bounds[0].size() + 1;
            for (std::size_t k = 0; k < nb0; ++k) {
                leaf->g += leaf->hist[k].g;
                leaf->h += leaf->hist[k].h;
            }
            leaf->best = best_split(*leaf);
        }
        leaves_[index] = std::move(left);
        leaves_.push_back(std::move(right));
    }

    const GbdtParams& params_;
    const BinnedFeatures& binned_;
    const std::vector<double>& grad_;
    const std::vector<double>& hess_;
    std::vector<std::uint32_t>* rows_ = nullptr;
    std::vector<Leaf> leaves_;
    std::vector<std::uint32_t> scratch_;
};

}  // namespace

double RegressionTree::evaluate(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
}

double GbdtModel::margin(std::span<const double> x) const {
    double m = init_margin;
    for (const auto& tree : trees) m += tree.evaluate(x);
    return m;
}

GbdtModel train_gbdt(const GbdtParams& params, const FeatureMatrix& features, std::span<const int> labels,
                     std::uint64_t seed) {
    const std::size_t n = features.rows();
    require(labels.size() == n, "gbdt: label count does not match row count");
    require(features.cols() >= 1, "gbdt: need at least one feature");
    std::vector<double> target(n);
    double positives = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        target[i] = labels[i] == 1 ? 1.0 : 0.0;
        positives += target[i];
    }
    if (positives == 0.0 || positives == static_cast<double>(n)) {
        fail(ErrorCode::Degenerate, "gbdt: training labels contain a single class");
    }

    const auto binned = bin_features(features, params.max_bins);
    GbdtModel model;
    model.dim = features.cols();
    const double base_rate = positives / static_cast<double>(n);
    model.init_margin = std::log(base_rate / (1.0 - base_rate));

    std::vector<double> margin(n, model.init_margin);
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    std::vector<std::uint32_t> rows;
    rows.reserve(n);
    TreeGrower grower(params, binned, grad, hess);

    for (int t = 0; t < params.tree_count; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = p - target[i];
            hess[i] = p * (1.0 - p);
        }
        rows.clear();
        if (params.subsample_ratio >= 1.0) {
            for (std::size_t i = 0; i < n; ++i) rows.push_back(static_cast<std::uint32_t>(i));
        } else {
            rng::Stream stream(rng::derive(seed, {static_cast<std::uint64_t>(t)}));
            for (std::size_t i = 0; i < n; ++i) {
                if (stream.bernoulli(params.subsample_ratio)) rows.push_back(static_cast<std::uint32_t>(i));
            }
            if (rows.empty()) continue;
        }

        auto tree = grower.grow(rows);
        if (params.subsample_ratio >= 1.0) {
            for (const auto& leaf : grower.leaves()) {
                const double v = tree.nodes[static_cast<std::size_t>(leaf.node)].value;
                for (std::size_t k = leaf.begin; k < leaf.end; ++k) margin[rows[k]] += v;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) margin[i] += tree.evaluate(features.row(i));
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace pulearn::learners
