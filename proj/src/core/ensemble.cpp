#include "ensemble.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace pulearn {

std::vector<double> predict(const EnsembleModel& model, const FeatureMatrix& features) {
    require(!model.members.empty(), "model has no members");
    require(features.cols() == model.dim, "feature width " + std::to_string(features.cols()) +
                                              " does not match model width " + std::to_string(model.dim));
    const std::size_t n = features.rows();
    const std::size_t m = model.members.size();
    std::vector<double> all(m * n);
    for (std::size_t j = 0; j < m; ++j) {
        model.members[j].score_all(features, std::span<double>(all.data() + j * n, n));
    }
    std::vector<double> out(n);
    std::vector<double> column(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) column[j] = all[j * n + i];
        // Summing in sorted order makes the mean independent of member order.
        std::sort(column.begin(), column.end());
        double sum = 0.0;
        for (double v : column) sum += v;
        out[i] = std::clamp(sum / static_cast<double>(m), column.front(), column.back());
    }
    return out;
}

std::string serialize_model(const EnsembleModel& model) {
    nlohmann::ordered_json doc;
    doc["format"] = "pulearn-ensemble";
    doc["version"] = kModelFormatVersion;
    doc["method"] = model.method;
    doc["spec"] = model.base;
    doc["k"] = model.k;
    doc["m_requested"] = model.m_requested;
    doc["m_effective"] = model.m_effective();
    doc["seed"] = model.seed;
    doc["dim"] = model.dim;
    doc["metadata"] = model.metadata;
    auto& members = doc["members"] = nlohmann::ordered_json::array();
    for (const auto& member : model.members) members.push_back(member);
    return doc.dump(1) + "\n";
}

EnsembleModel deserialize_model(const std::string& text) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("model: cannot parse: ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.value("format", "") != "pulearn-ensemble") {
            fail(ErrorCode::Parse, "model: not a pulearn ensemble document");
        }
        if (!doc.contains("version") || !doc.at("version").is_number_integer()) {
            fail(ErrorCode::Version, "model: missing version tag");
        }
        const auto version = doc.at("version").get<int>();
        if (version != kModelFormatVersion) {
            fail(ErrorCode::Version, "model: unsupported version " + std::to_string(version) + " (expected " +
                                         std::to_string(kModelFormatVersion) + ")");
        }
        EnsembleModel model;
        model.method = doc.at("method").get<std::string>();
        learners::from_json(doc.at("spec"), model.base);
        model.k = doc.at("k").get<std::size_t>();
        model.m_requested = doc.at("m_requested").get<std::size_t>();
        model.seed = doc.at("seed").get<std::uint64_t>();
        model.dim = doc.at("dim").get<std::size_t>();
        model.metadata = doc.at("metadata");
        for (const auto& mj : doc.at("members")) {
            auto scorer = learners::scorer_from_json(mj);
            if (scorer.dim() != model.dim) fail(ErrorCode::Parse, "model: member width mismatch");
            model.members.push_back(std::move(scorer));
        }
        if (model.members.size() != doc.at("m_effective").get<std::size_t>() || model.members.empty()) {
            fail(ErrorCode::Parse, "model: member count does not match m_effective");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("model: malformed document: ") + e.what());
    }
}

void save_model(const EnsembleModel& model, const std::string& path) {
    const auto text = serialize_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot create " + path);
    out << text;
    out.flush();
    if (!out) fail(ErrorCode::Io, "failed writing " + path);
}

EnsembleModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize_model(buffer.str());
}

}  // namespace pulearn
