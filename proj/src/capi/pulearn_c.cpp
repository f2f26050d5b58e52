#include "pulearn/pulearn.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <variant>

#include <json.hpp>

#include "credibility.hpp"
#include "data.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "harness.hpp"
#include "metrics.hpp"

using namespace pulearn;

struct pul_dataset {
    std::variant<PNDataset, PUDataset, FeaturesPtr> value;
};

struct pul_model {
    EnsembleModel model;
};

namespace {

thread_local std::string last_error;

pul_status to_status(ErrorCode code) {
    return static_cast<pul_status>(static_cast<int>(code));
}

template <typename Fn>
pul_status guarded(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return PUL_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const nlohmann::json::exception& e) {
        last_error = std::string("json: ") + e.what();
        return PUL_ERR_PARSE;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return PUL_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return PUL_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return PUL_ERR_INTERNAL;
    }
}

template <typename T>
void require_ptr(const T* p, const char* name) {
    if (p == nullptr) fail(ErrorCode::InvalidArgument, std::string(name) + " is null");
}

char* copy_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

nlohmann::ordered_json parse_json(const char* text, const char* what) {
    if (text == nullptr || *text == '\0') return nlohmann::ordered_json::object();
    try {
        auto j = nlohmann::ordered_json::parse(text);
        if (!j.is_object()) fail(ErrorCode::Parse, std::string(what) + ": expected a JSON object");
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::Parse, std::string(what) + ": " + e.what());
    }
}

const FeatureMatrix& features_of(const pul_dataset* d) {
    return std::visit(
        [](const auto& v) -> const FeatureMatrix& {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, FeaturesPtr>) {
                return *v;
            } else {
                return v.features();
            }
        },
        d->value);
}

const PUDataset& as_pu(const pul_dataset* d) {
    require_ptr(d, "dataset");
    const auto* pu = std::get_if<PUDataset>(&d->value);
    if (pu == nullptr) fail(ErrorCode::InvalidArgument, "expected a PU dataset (observed column)");
    return *pu;
}

const PNDataset& as_pn(const pul_dataset* d) {
    require_ptr(d, "dataset");
    const auto* pn = std::get_if<PNDataset>(&d->value);
    if (pn == nullptr) fail(ErrorCode::InvalidArgument, "expected a PN dataset (label column)");
    return *pn;
}

std::vector<unsigned char> mask_of(const int* mask, std::size_t n) {
    std::vector<unsigned char> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = mask[i] != 0 ? 1 : 0;
    return out;
}

metrics::TieMode tie_mode(pul_tie_mode t) {
    switch (t) {
        case PUL_TIES_CANONICAL:
            return metrics::TieMode::Canonical;
        case PUL_TIES_AVERAGE:
            return metrics::TieMode::Average;
    }
    fail(ErrorCode::InvalidArgument, "unknown tie mode");
}

credibility::KnnOptions knn_options(int standardize, int include_self, int threads) {
    credibility::KnnOptions o;
    o.standardize = standardize != 0;
    o.include_self = include_self != 0;
    o.threads = threads;
    return o;
}

credibility::EkCurve curve_of(const double* ek, std::size_t count, std::size_t k_min) {
    credibility::EkCurve curve;
    for (std::size_t i = 0; i < count; ++i) curve.points.push_back({k_min + i, ek[i]});
    return curve;
}

pul_dataset* wrap(auto&& value) {
    return new pul_dataset{std::forward<decltype(value)>(value)};
}

}  // namespace

extern "C" {

const char* pul_version(void) {
    return "0.1.0";
}

const char* pul_last_error(void) {
    return last_error.c_str();
}

const char* pul_status_name(pul_status status) {
    switch (status) {
        case PUL_OK:
            return "ok";
        case PUL_ERR_INVALID_ARGUMENT:
            return "invalid argument";
        case PUL_ERR_IO:
            return "i/o error";
        case PUL_ERR_PARSE:
            return "parse error";
        case PUL_ERR_DEGENERATE:
            return "degenerate input";
        case PUL_ERR_VERSION:
            return "version mismatch";
        case PUL_ERR_INTERNAL:
            return "internal error";
    }
    return "unknown status";
}

void pul_string_free(char* s) {
    std::free(s);
}

pul_status pul_dataset_load_csv(const char* path, pul_dataset_kind kind, pul_missing_policy missing,
                                pul_dataset** out) {
    return guarded([&] {
        require_ptr(path, "path");
        require_ptr(out, "out");
        CsvOptions options;
        switch (missing) {
            case PUL_MISSING_ERROR:
                options.missing = MissingPolicy::Error;
                break;
            case PUL_MISSING_MEDIAN:
                options.missing = MissingPolicy::Median;
                break;
            case PUL_MISSING_DROP:
                options.missing = MissingPolicy::Drop;
                break;
            default:
                fail(ErrorCode::InvalidArgument, "unknown missing-value policy");
        }
        if (kind == PUL_KIND_AUTO) {
            switch (detect_csv_schema(path)) {
                case CsvSchema::PN:
                    kind = PUL_KIND_PN;
                    break;
                case CsvSchema::PU:
                    kind = PUL_KIND_PU;
                    break;
                case CsvSchema::FeaturesOnly:
                    kind = PUL_KIND_FEATURES;
                    break;
            }
        }
        switch (kind) {
            case PUL_KIND_PN:
                *out = wrap(load_pn_csv(path, options));
                break;
            case PUL_KIND_PU:
                *out = wrap(load_pu_csv(path, options));
                break;
            case PUL_KIND_FEATURES:
                *out = wrap(std::make_shared<const FeatureMatrix>(load_features_csv(path, options)));
                break;
            default:
                fail(ErrorCode::InvalidArgument, "unknown dataset kind");
        }
    });
}

pul_status pul_dataset_save_csv(const pul_dataset* data, const char* path) {
    return guarded([&] {
        require_ptr(data, "dataset");
        require_ptr(path, "path");
        std::visit(
            [&](const auto& v) {
                if constexpr (std::is_same_v<std::decay_t<decltype(v)>, FeaturesPtr>) {
                    save_csv(*v, path);
                } else {
                    save_csv(v, path);
                }
            },
            data->value);
    });
}

pul_status pul_dataset_create(size_t n, size_t d, const double* values, const int* targets, pul_dataset_kind kind,
                              pul_dataset** out) {
    return guarded([&] {
        require_ptr(out, "out");
        require(n == 0 || d == 0 || values != nullptr, "values is null");
        auto features =
            std::make_shared<const FeatureMatrix>(n, d, std::vector<double>(values, values + n * d));
        if (kind == PUL_KIND_FEATURES) {
            *out = wrap(FeaturesPtr(features));
            return;
        }
        require(n == 0 || targets != nullptr, "targets is null");
        if (kind == PUL_KIND_PN) {
            *out = wrap(PNDataset(features, std::vector<int>(targets, targets + n)));
        } else if (kind == PUL_KIND_PU) {
            std::vector<std::uint8_t> flags(n);
            for (std::size_t i = 0; i < n; ++i) {
                require(targets[i] == 0 || targets[i] == 1, "observed flags must be 0 or 1");
                flags[i] = static_cast<std::uint8_t>(targets[i]);
            }
            *out = wrap(PUDataset(features, std::move(flags)));
        } else {
            fail(ErrorCode::InvalidArgument, "unknown dataset kind");
        }
    });
}

void pul_dataset_free(pul_dataset* data) {
    delete data;
}

pul_status pul_dataset_shape(const pul_dataset* data, size_t* n, size_t* d, pul_dataset_kind* kind) {
    return guarded([&] {
        require_ptr(data, "dataset");
        const auto& f = features_of(data);
        if (n != nullptr) *n = f.rows();
        if (d != nullptr) *d = f.cols();
        if (kind != nullptr) {
            *kind = std::holds_alternative<PNDataset>(data->value)   ? PUL_KIND_PN
                    : std::holds_alternative<PUDataset>(data->value) ? PUL_KIND_PU
                                                                     : PUL_KIND_FEATURES;
        }
    });
}

pul_status pul_dataset_positive_count(const pul_dataset* data, size_t* count) {
    return guarded([&] {
        require_ptr(data, "dataset");
        require_ptr(count, "count");
        if (const auto* pn = std::get_if<PNDataset>(&data->value)) {
            *count = pn->positive_count();
        } else if (const auto* pu = std::get_if<PUDataset>(&data->value)) {
            *count = pu->observed_count();
        } else {
            fail(ErrorCode::InvalidArgument, "dataset has no target column");
        }
    });
}

pul_status pul_dataset_targets(const pul_dataset* data, int* out, size_t len) {
    return guarded([&] {
        require_ptr(data, "dataset");
        require_ptr(out, "out");
        const std::size_t n = features_of(data).rows();
        require(len >= n, "output buffer too small");
        if (const auto* pn = std::get_if<PNDataset>(&data->value)) {
            std::copy(pn->labels().begin(), pn->labels().end(), out);
        } else if (const auto* pu = std::get_if<PUDataset>(&data->value)) {
            for (std::size_t i = 0; i < n; ++i) out[i] = pu->observed()[i];
        } else {
            fail(ErrorCode::InvalidArgument, "dataset has no target column");
        }
    });
}

pul_status pul_dataset_features(const pul_dataset* data, double* out, size_t len) {
    return guarded([&] {
        require_ptr(data, "dataset");
        require_ptr(out, "out");
        const auto& values = features_of(data).values();
        require(len >= values.size(), "output buffer too small");
        std::copy(values.begin(), values.end(), out);
    });
}

pul_status pul_make_pu(const pul_dataset* pn, double theta_o, uint64_t seed, pul_observation_mode mode,
                       pul_dataset** out) {
    return guarded([&] {
        require_ptr(out, "out");
        require(mode == PUL_OBSERVE_EXACT || mode == PUL_OBSERVE_BERNOULLI, "unknown observation mode");
        *out = wrap(make_pu(as_pn(pn), theta_o, seed,
                            mode == PUL_OBSERVE_EXACT ? ObservationMode::ExactFraction : ObservationMode::Bernoulli));
    });
}

pul_status pul_synth_generate(const char* spec_json, size_t n, pul_dataset** pn_out, pul_dataset** pu_out) {
    return guarded([&] {
        require_ptr(spec_json, "spec_json");
        const auto spec = harness::synthetic_spec_from_json(parse_json(spec_json, "synthetic spec"));
        auto [pn, pu] = synth_generate(spec, n);
        std::unique_ptr<pul_dataset> a(pn_out != nullptr ? wrap(std::move(pn)) : nullptr);
        if (pu_out != nullptr) *pu_out = wrap(std::move(pu));
        if (pn_out != nullptr) *pn_out = a.release();
    });
}

pul_status pul_split_folds(const int* strata, size_t n, size_t fold_count, uint64_t seed, size_t* assignment) {
    return guarded([&] {
        require(n == 0 || (strata != nullptr && assignment != nullptr), "null buffer");
        const auto folds = split_folds(std::span<const int>(strata, n), fold_count, seed);
        std::copy(folds.assignment.begin(), folds.assignment.end(), assignment);
    });
}

pul_status pul_ecdf_at(const double* scores, size_t n, double xi, double* out) {
    return guarded([&] {
        require_ptr(out, "out");
        *out = metrics::ecdf_at(std::span<const double>(scores, n), xi);
    });
}

pul_status pul_quantile_threshold(const double* scores, size_t n, double p, double* out) {
    return guarded([&] {
        require_ptr(out, "out");
        *out = metrics::quantile_threshold(std::span<const double>(scores, n), p);
    });
}

pul_status pul_sensitivity(const double* scores, const int* positive_mask, size_t n, double s, double* out) {
    return guarded([&] {
        require_ptr(out, "out");
        std::vector<std::size_t> positives;
        for (std::size_t i = 0; i < n; ++i) {
            if (positive_mask[i] != 0) positives.push_back(i);
        }
        *out = metrics::sensitivity(std::span<const double>(scores, n), positives, s);
    });
}

pul_status pul_lift_curve(const double* scores, const int* positive_mask, size_t n, pul_tie_mode ties,
                          double* p_out, double* alpha_out) {
    return guarded([&] {
        require(p_out != nullptr && alpha_out != nullptr, "null output buffer");
        const auto curve =
            metrics::lift_curve(std::span<const double>(scores, n), mask_of(positive_mask, n), tie_mode(ties));
        for (std::size_t t = 0; t < curve.points.size(); ++t) {
            p_out[t] = curve.points[t].p;
            alpha_out[t] = curve.points[t].alpha;
        }
    });
}

pul_status pul_aul(const double* scores, const int* positive_mask, size_t n, pul_tie_mode ties, double* out) {
    return guarded([&] {
        require_ptr(out, "out");
        *out = metrics::aul(std::span<const double>(scores, n), mask_of(positive_mask, n), tie_mode(ties));
    });
}

pul_status pul_auc(const double* scores, const int* labels, size_t n, double* out) {
    return guarded([&] {
        require_ptr(out, "out");
        *out = metrics::auc(std::span<const double>(scores, n), std::span<const int>(labels, n));
    });
}

pul_status pul_relation_residual(double auc, double aul_pn, double theta_p, double* out) {
    return guarded([&] {
        require_ptr(out, "out");
        *out = metrics::relation_residual(auc, aul_pn, theta_p);
    });
}

pul_status pul_evaluate(const double* scores, size_t n, const pul_dataset* data, int metrics, const double* theta_p,
                        pul_tie_mode ties, char** report_out) {
    return guarded([&] {
        require_ptr(data, "dataset");
        require_ptr(report_out, "report_out");
        require(n == 0 || scores != nullptr, "scores is null");
        harness::EvalRequest request;
        request.aul = (metrics & PUL_METRIC_AUL) != 0;
        request.auc = (metrics & PUL_METRIC_AUC) != 0;
        if (theta_p != nullptr) request.theta_p = *theta_p;
        request.ties = tie_mode(ties);
        const std::span<const double> s(scores, n);
        metrics::MetricReport report;
        if (const auto* pn = std::get_if<PNDataset>(&data->value)) {
            report = harness::evaluate(s, *pn, request);
        } else if (const auto* pu = std::get_if<PUDataset>(&data->value)) {
            report = harness::evaluate(s, *pu, request);
        } else {
            fail(ErrorCode::InvalidArgument, "evaluation needs a label or observed column");
        }
        *report_out = copy_string(report.to_json());
    });
}

pul_status pul_save_scores_csv(const double* scores, size_t n, const char* path) {
    return guarded([&] {
        require_ptr(path, "path");
        require(n == 0 || scores != nullptr, "scores is null");
        save_scores_csv(std::span<const double>(scores, n), path);
    });
}

pul_status pul_knn(const pul_dataset* data, size_t k, int standardize, int include_self, int threads,
                   size_t* neighbors_out) {
    return guarded([&] {
        require_ptr(data, "dataset");
        require_ptr(neighbors_out, "neighbors_out");
        const auto table = credibility::knn_neighbors(features_of(data), k, knn_options(standardize, include_self, threads));
        for (std::size_t i = 0; i < table.size(); ++i) {
            const auto row = table.neighbors(i);
            std::copy(row.begin(), row.end(), neighbors_out + i * k);
        }
    });
}

pul_status pul_credibility(const pul_dataset* pu, size_t k, int standardize, int threads, double* cred_out) {
    return guarded([&] {
        const auto& data = as_pu(pu);
        require_ptr(cred_out, "cred_out");
        const auto table = credibility::knn_neighbors(data.features(), k, knn_options(standardize, 0, threads));
        const auto cred = credibility::credibility(table, data.observed());
        std::copy(cred.cred.begin(), cred.cred.end(), cred_out);
    });
}

pul_status pul_ek_curve(const pul_dataset* pu, size_t k_min, size_t k_max, int standardize, int threads,
                        double* ek_out) {
    return guarded([&] {
        const auto& data = as_pu(pu);
        require_ptr(ek_out, "ek_out");
        const auto curve =
            credibility::ek_curve(data.features(), data.observed(), k_min, k_max, knn_options(standardize, 0, threads));
        for (std::size_t i = 0; i < curve.points.size(); ++i) ek_out[i] = curve.points[i].ek;
    });
}

pul_status pul_select_k(const double* ek, size_t count, size_t k_min, double threshold, size_t window,
                        size_t* chosen, int* fallback) {
    return guarded([&] {
        require(count == 0 || ek != nullptr, "ek is null");
        require_ptr(chosen, "chosen");
        const auto sel = credibility::select_k(curve_of(ek, count, k_min), threshold, window);
        *chosen = sel.k;
        if (fallback != nullptr) *fallback = sel.fallback ? 1 : 0;
    });
}

pul_status pul_ek_curve_csv(const double* ek, size_t count, size_t k_min, char** csv_out) {
    return guarded([&] {
        require(count == 0 || ek != nullptr, "ek is null");
        require_ptr(csv_out, "csv_out");
        *csv_out = copy_string(credibility::ek_curve_csv(curve_of(ek, count, k_min)));
    });
}

pul_status pul_train(const pul_dataset* pu, const char* config_json, pul_model** out) {
    return guarded([&] {
        const auto& data = as_pu(pu);
        require_ptr(out, "out");
        auto j = parse_json(config_json, "train config");
        auto config = harness::train_config_from_json(j);
        if (j.contains("threads")) config.threads = j.at("threads").get<int>();
        *out = new pul_model{harness::train(data, config)};
    });
}

void pul_model_free(pul_model* model) {
    delete model;
}

pul_status pul_model_save(const pul_model* model, const char* path) {
    return guarded([&] {
        require_ptr(model, "model");
        require_ptr(path, "path");
        save_model(model->model, path);
    });
}

pul_status pul_model_load(const char* path, pul_model** out) {
    return guarded([&] {
        require_ptr(path, "path");
        require_ptr(out, "out");
        *out = new pul_model{load_model(path)};
    });
}

pul_status pul_model_to_json(const pul_model* model, char** out) {
    return guarded([&] {
        require_ptr(model, "model");
        require_ptr(out, "out");
        *out = copy_string(serialize_model(model->model));
    });
}

pul_status pul_model_from_json(const char* text, pul_model** out) {
    return guarded([&] {
        require_ptr(text, "text");
        require_ptr(out, "out");
        *out = new pul_model{deserialize_model(text)};
    });
}

pul_status pul_model_info(const pul_model* model, size_t* dim, size_t* k, size_t* m_effective) {
    return guarded([&] {
        require_ptr(model, "model");
        if (dim != nullptr) *dim = model->model.dim;
        if (k != nullptr) *k = model->model.k;
        if (m_effective != nullptr) *m_effective = model->model.m_effective();
    });
}

pul_status pul_predict(const pul_model* model, const pul_dataset* data, double* out, size_t len) {
    return guarded([&] {
        require_ptr(model, "model");
        require_ptr(data, "dataset");
        require_ptr(out, "out");
        const auto& f = features_of(data);
        require(len >= f.rows(), "output buffer too small");
        const auto scores = predict(model->model, f);
        std::copy(scores.begin(), scores.end(), out);
    });
}

pul_status pul_cross_validate(const pul_dataset* data, const char* config_json, char** csv_out, char** summary_out) {
    return guarded([&] {
        require_ptr(data, "dataset");
        const auto config = harness::cv_config_from_json(parse_json(config_json, "cross-validation config"));
        harness::CvReport report;
        if (const auto* pn = std::get_if<PNDataset>(&data->value)) {
            report = harness::cross_validate(*pn, config);
        } else if (const auto* pu = std::get_if<PUDataset>(&data->value)) {
            report = harness::cross_validate(*pu, config);
        } else {
            fail(ErrorCode::InvalidArgument, "cross-validation needs a label or observed column");
        }
        char* csv = csv_out != nullptr ? copy_string(report.to_csv()) : nullptr;
        if (summary_out != nullptr) {
            try {
                *summary_out = copy_string(report.summary_json());
            } catch (...) {
                std::free(csv);
                throw;
            }
        }
        if (csv_out != nullptr) *csv_out = csv;
    });
}

pul_status pul_convergence(const char* config_json, char** csv_out, char** trials_csv_out) {
    return guarded([&] {
        require_ptr(config_json, "config_json");
        const auto config = harness::convergence_config_from_json(parse_json(config_json, "convergence config"));
        const auto report = harness::convergence_experiment(config);
        char* csv = csv_out != nullptr ? copy_string(report.to_csv()) : nullptr;
        if (trials_csv_out != nullptr) {
            try {
                *trials_csv_out = copy_string(report.trials_csv());
            } catch (...) {
                std::free(csv);
                throw;
            }
        }
        if (csv_out != nullptr) *csv_out = csv;
    });
}

pul_status pul_sweep(const pul_dataset* pn, const char* config_json, char** csv_out) {
    return guarded([&] {
        const auto& data = as_pn(pn);
        require_ptr(config_json, "config_json");
        require_ptr(csv_out, "csv_out");
        const auto config = harness::sweep_config_from_json(parse_json(config_json, "sweep config"));
        *csv_out = copy_string(harness::robustness_sweep(data, config).to_csv());
    });
}

}  // extern "C"
