#ifndef PULEARN_CORE_ENSEMBLE_HPP
#define PULEARN_CORE_ENSEMBLE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "data.hpp"
#include "learners.hpp"

namespace pulearn {

inline constexpr int kModelFormatVersion = 1;

// Averaged collection of base scorers; shared by ProbTagging and the
// baselines. `method` is one of probtagging, naive, bagging.
struct EnsembleModel {
    std::string method;
    learners::BaseClassifierSpec base;
    std::size_t k = 0;
    std::size_t m_requested = 0;
    std::uint64_t seed = 0;
    std::size_t dim = 0;
    std::vector<learners::BaseScorer> members;
    // Dataset hash, k selection, skipped rounds and similar provenance.
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

    std::size_t m_effective() const noexcept { return members.size(); }
};

// Per-sample arithmetic mean of member scores. The result does not depend on
// member order.
std::vector<double> predict(const EnsembleModel& model, const FeatureMatrix& features);

std::string serialize_model(const EnsembleModel& model);
EnsembleModel deserialize_model(const std::string& text);

void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(const std::string& path);

}  // namespace pulearn

#endif
