#include "learners.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "error.hpp"

namespace pulearn::learners {

namespace {

double sigmoid(double m) {
    if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
    const double e = std::exp(m);
    return e / (1.0 + e);
}

// log(1 + exp(m)) without overflow.
double softplus(double m) {
    return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
}

}  // namespace

void BaseClassifierSpec::validate() const {
    require(gbdt.tree_count >= 1, "gbdt treeCount must be at least 1");
    require(gbdt.max_leaves >= 2, "gbdt maxLeaves must be at least 2");
    require(gbdt.learning_rate > 0.0, "gbdt learningRate must be positive");
    require(gbdt.min_samples_per_leaf >= 1, "gbdt minSamplesPerLeaf must be positive");
    require(gbdt.subsample_ratio > 0.0 && gbdt.subsample_ratio <= 1.0, "gbdt subsampleRatio must lie in (0,1]");
    require(gbdt.max_bins >= 2 && gbdt.max_bins <= 256, "gbdt maxBins must lie in [2,256]");
    require(gbdt.min_hessian_per_leaf > 0.0, "gbdt minHessianPerLeaf must be positive");
    require(gbdt.l2_leaf >= 0.0, "gbdt l2Leaf must be non-negative");
    require(logistic.l2_penalty > 0.0, "logistic l2Penalty must be positive");
    require(logistic.max_iterations >= 1, "logistic maxIterations must be positive");
    require(logistic.tolerance > 0.0, "logistic tolerance must be positive");
}

std::string to_string(BaseKind kind) {
    return kind == BaseKind::Gbdt ? "gbdt" : "logistic";
}

BaseKind parse_base_kind(const std::string& name) {
    if (name == "gbdt") return BaseKind::Gbdt;
    if (name == "logistic") return BaseKind::Logistic;
    fail(ErrorCode::InvalidArgument, "unknown base classifier '" + name + "'");
}

void to_json(nlohmann::ordered_json& j, const BaseClassifierSpec& spec) {
    j = nlohmann::ordered_json{
        {"kind", to_string(spec.kind)},
        {"gbdt",
         {{"treeCount", spec.gbdt.tree_count},
          {"maxLeaves", spec.gbdt.max_leaves},
          {"learningRate", spec.gbdt.learning_rate},
          {"minSamplesPerLeaf", spec.gbdt.min_samples_per_leaf},
          {"subsampleRatio", spec.gbdt.subsample_ratio},
          {"maxBins", spec.gbdt.max_bins},
          {"minHessianPerLeaf", spec.gbdt.min_hessian_per_leaf},
          {"l2Leaf", spec.gbdt.l2_leaf}}},
        {"logistic",
         {{"l2Penalty", spec.logistic.l2_penalty},
          {"maxIterations", spec.logistic.max_iterations},
          {"tolerance", spec.logistic.tolerance}}},
    };
}

void from_json(const nlohmann::ordered_json& j, BaseClassifierSpec& spec) {
    spec = BaseClassifierSpec{};
    if (j.contains("kind")) spec.kind = parse_base_kind(j.at("kind").get<std::string>());
    if (j.contains("gbdt")) {
        const auto& g = j.at("gbdt");
        spec.gbdt.tree_count = g.value("treeCount", spec.gbdt.tree_count);
        spec.gbdt.max_leaves = g.value("maxLeaves", spec.gbdt.max_leaves);
        spec.gbdt.learning_rate = g.value("learningRate", spec.gbdt.learning_rate);
        spec.gbdt.min_samples_per_leaf = g.value("minSamplesPerLeaf", spec.gbdt.min_samples_per_leaf);
        spec.gbdt.subsample_ratio = g.value("subsampleRatio", spec.gbdt.subsample_ratio);
        spec.gbdt.max_bins = g.value("maxBins", spec.gbdt.max_bins);
        spec.gbdt.min_hessian_per_leaf = g.value("minHessianPerLeaf", spec.gbdt.min_hessian_per_leaf);
        spec.gbdt.l2_leaf = g.value("l2Leaf", spec.gbdt.l2_leaf);
    }
    if (j.contains("logistic")) {
        const auto& l = j.at("logistic");
        spec.logistic.l2_penalty = l.value("l2Penalty", spec.logistic.l2_penalty);
        spec.logistic.max_iterations = l.value("maxIterations", spec.logistic.max_iterations);
        spec.logistic.tolerance = l.value("tolerance", spec.logistic.tolerance);
    }
    spec.validate();
}

double LogisticModel::margin(std::span<const double> x) const {
    double m = bias;
    for (std::size_t j = 0; j < weights.size(); ++j) m += weights[j] * x[j];
    return m;
}

std::size_t BaseScorer::dim() const noexcept {
    return std::visit([](const auto& m) { return m.dim; }, model_);
}

double BaseScorer::score(std::span<const double> x) const {
    return sigmoid(std::visit([x](const auto& m) { return m.margin(x); }, model_));
}

void BaseScorer::score_all(const FeatureMatrix& features, std::span<double> out) const {
    require(features.cols() == dim(), "feature width " + std::to_string(features.cols()) +
                                          " does not match model width " + std::to_string(dim()));
    require(out.size() == features.rows(), "score buffer size does not match row count");
    for (std::size_t i = 0; i < features.rows(); ++i) out[i] = score(features.row(i));
}

void to_json(nlohmann::ordered_json& j, const BaseScorer& scorer) {
    if (const auto* g = std::get_if<GbdtModel>(&scorer.model())) {
        nlohmann::ordered_json trees = nlohmann::ordered_json::array();
        for (const auto& tree : g->trees) {
            nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
            for (const auto& n : tree.nodes) {
                if (n.is_leaf()) {
                    nodes.push_back({{"leaf", n.value}});
                } else {
                    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
                }
            }
            trees.push_back(std::move(nodes));
        }
        j = nlohmann::ordered_json{{"type", "gbdt"}, {"dim", g->dim}, {"initMargin", g->init_margin}, {"trees", std::move(trees)}};
    } else {
        const auto& l = std::get<LogisticModel>(scorer.model());
        j = nlohmann::ordered_json{{"type", "logistic"}, {"dim", l.dim}, {"bias", l.bias}, {"weights", l.weights}};
    }
}

BaseScorer scorer_from_json(const nlohmann::ordered_json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "gbdt") {
        GbdtModel model;
        model.dim = j.at("dim").get<std::size_t>();
        model.init_margin = j.at("initMargin").get<double>();
        for (const auto& tj : j.at("trees")) {
            RegressionTree tree;
            for (const auto& nj : tj) {
                TreeNode node;
                if (nj.contains("leaf")) {
                    node.value = nj.at("leaf").get<double>();
                } else {
                    node.feature = nj.at("feature").get<int>();
                    node.threshold = nj.at("threshold").get<double>();
                    node.left = nj.at("left").get<int>();
                    node.right = nj.at("right").get<int>();
                }
                tree.nodes.push_back(node);
            }
            // Structural checks so evaluation cannot index out of bounds.
            const auto count = static_cast<int>(tree.nodes.size());
            if (count == 0) fail(ErrorCode::Parse, "model: empty tree");
            for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
                const auto& n = tree.nodes[k];
                if (n.is_leaf()) continue;
                if (n.feature >= static_cast<int>(model.dim) || n.left <= static_cast<int>(k) ||
                    n.right <= static_cast<int>(k) || n.left >= count || n.right >= count) {
                    fail(ErrorCode::Parse, "model: malformed tree node");
                }
            }
            model.trees.push_back(std::move(tree));
        }
        return BaseScorer(std::move(model));
    }
    if (type == "logistic") {
        LogisticModel model;
        model.dim = j.at("dim").get<std::size_t>();
        model.bias = j.at("bias").get<double>();
        model.weights = j.at("weights").get<std::vector<double>>();
        if (model.weights.size() != model.dim) fail(ErrorCode::Parse, "model: logistic weight count mismatch");
        return BaseScorer(std::move(model));
    }
    fail(ErrorCode::Parse, "model: unknown member type '" + type + "'");
}

LogisticModel train_logistic(const LogisticParams& params, const FeatureMatrix& features, std::span<const int> labels) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    require(labels.size() == n, "logistic: label count does not match row count");
    std::size_t positives = 0;
    for (int y : labels) positives += y == 1 ? 1 : 0;
    if (positives == 0 || positives == n) {
        fail(ErrorCode::Degenerate, "logistic: training labels contain a single class");
    }

    // Parameter vector: [bias, w_0 .. w_{d-1}]; the bias is not penalized.
    const auto dd = static_cast<Eigen::Index>(d + 1);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(dd);
    const double rate = static_cast<double>(positives) / static_cast<double>(n);
    beta[0] = std::log(rate / (1.0 - rate));

    auto objective = [&](const Eigen::VectorXd& b) {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double m = b[0];
            auto x = features.row(i);
            for (std::size_t j = 0; j < d; ++j) m += b[static_cast<Eigen::Index>(j + 1)] * x[j];
            loss += softplus(m) - (labels[i] == 1 ? m : 0.0);
        }
        return loss + 0.5 * params.l2_penalty * b.tail(dd - 1).squaredNorm();
    };

    double current = objective(beta);
    for (int iter = 0; iter < params.max_iterations; ++iter) {
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(dd);
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dd, dd);
        Eigen::VectorXd xi(dd);
        for (std::size_t i = 0; i < n; ++i) {
            auto x = features.row(i);
            xi[0] = 1.0;
            for (std::size_t j = 0; j < d; ++j) xi[static_cast<Eigen::Index>(j + 1)] = x[j];
            const double p = sigmoid(xi.dot(beta));
            grad += (p - (labels[i] == 1 ? 1.0 : 0.0)) * xi;
            hess.selfadjointView<Eigen::Lower>().rankUpdate(xi, p * (1.0 - p));
        }
        hess = hess.selfadjointView<Eigen::Lower>();
        for (Eigen::Index j = 1; j < dd; ++j) {
            grad[j] += params.l2_penalty * beta[j];
            hess(j, j) += params.l2_penalty;
        }
        // Keeps the bias direction solvable when every probability saturates.
        hess(0, 0) += 1e-12;
        const Eigen::VectorXd step = hess.ldlt().solve(grad);

        double scale = 1.0;
        Eigen::VectorXd next = beta - step;
        double value = objective(next);
        while (value > current && scale > 1e-10) {
            scale *= 0.5;
            next = beta - scale * step;
            value = objective(next);
        }
        if (value > current) break;
        const double moved = (scale * step).cwiseAbs().maxCoeff();
        beta = next;
        const double improvement = current - value;
        current = value;
        if (moved < params.tolerance || improvement < params.tolerance * std::max(1.0, std::abs(current))) break;
    }

    LogisticModel model;
    model.dim = d;
    model.bias = beta[0];
    model.weights.assign(beta.data() + 1, beta.data() + dd);
    return model;
}

BaseScorer train_base(const BaseClassifierSpec& spec, const FeatureMatrix& features, std::span<const int> labels,
                      std::uint64_t seed) {
    if (spec.kind == BaseKind::Gbdt) {
        return BaseScorer(train_gbdt(spec.gbdt, features, labels, seed));
    }
    return BaseScorer(train_logistic(spec.logistic, features, labels));
}

}  // namespace pulearn::learners
