#ifndef PULEARN_CORE_DATA_HPP
#define PULEARN_CORE_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pulearn {

// Row-major n x d block of finite reals.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    // Throws if values.size() != rows * cols or any entry is non-finite.
    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                  std::vector<std::string> names = {});

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<const double> row(std::size_t i) const noexcept {
        return {values_.data() + i * cols_, cols_};
    }
    double at(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

    FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
    std::vector<std::string> names_;
};

using FeaturesPtr = std::shared_ptr<const FeatureMatrix>;

// Ground-truth labelled set, labels in {+1, -1}.
class PNDataset {
public:
    PNDataset(FeaturesPtr features, std::vector<int> labels);

    const FeatureMatrix& features() const noexcept { return *features_; }
    const FeaturesPtr& shared_features() const noexcept { return features_; }
    const std::vector<int>& labels() const noexcept { return labels_; }

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t positive_count() const noexcept;
    std::vector<std::size_t> positive_indices() const;
    bool has_both_classes() const noexcept;

    PNDataset subset(std::span<const std::size_t> indices) const;

private:
    FeaturesPtr features_;
    std::vector<int> labels_;
};

// Observed set: flag 1 for an observed positive, 0 for unlabeled. At least one
// observed positive is required.
class PUDataset {
public:
    PUDataset(FeaturesPtr features, std::vector<std::uint8_t> observed);

    const FeatureMatrix& features() const noexcept { return *features_; }
    const FeaturesPtr& shared_features() const noexcept { return features_; }
    const std::vector<std::uint8_t>& observed() const noexcept { return observed_; }

    std::size_t size() const noexcept { return observed_.size(); }
    std::size_t observed_count() const noexcept;
    std::vector<std::size_t> observed_indices() const;
    std::vector<std::size_t> unlabeled_indices() const;

    PUDataset subset(std::span<const std::size_t> indices) const;

private:
    FeaturesPtr features_;
    std::vector<std::uint8_t> observed_;
};

struct SyntheticSpec {
    double theta_p = 0.5;
    double theta_o = 1.0;
    std::size_t dim = 2;
    std::vector<double> mean_p;
    std::vector<double> mean_n;
    double shared_std_dev = 1.0;
    std::uint64_t seed = 42;

    // Throws on out-of-range priors, non-positive spread or mismatched means.
    void validate() const;
};

struct FoldAssignment {
    std::size_t fold_count = 0;
    std::vector<std::size_t> assignment;

    std::vector<std::size_t> test_indices(std::size_t fold) const;
    std::vector<std::size_t> train_indices(std::size_t fold) const;
};

enum class ObservationMode { ExactFraction, Bernoulli };

enum class MissingPolicy { Error, Median, Drop };

enum class CsvSchema { PN, PU, FeaturesOnly };

struct CsvOptions {
    MissingPolicy missing = MissingPolicy::Median;
};

// Determine the schema from the header: a `label` column means PN, an
// `observed` column means PU, neither means features only.
CsvSchema detect_csv_schema(const std::string& path);

PNDataset load_pn_csv(const std::string& path, const CsvOptions& options = {});
PUDataset load_pu_csv(const std::string& path, const CsvOptions& options = {});
FeatureMatrix load_features_csv(const std::string& path, const CsvOptions& options = {});

void save_csv(const PNDataset& data, const std::string& path);
void save_csv(const PUDataset& data, const std::string& path);
void save_csv(const FeatureMatrix& data, const std::string& path);

// Single `score` column.
void save_scores_csv(std::span<const double> scores, const std::string& path);

PUDataset make_pu(const PNDataset& pn, double theta_o, std::uint64_t seed,
                  ObservationMode mode = ObservationMode::ExactFraction);

// Paired views over identical features. The class of each sample is drawn with
// prior theta_p, features from the class Gaussian, and the PU view by
// Bernoulli(theta_o) observation of positives. Identical means are accepted
// without complaint.
std::pair<PNDataset, PUDataset> synth_generate(const SyntheticSpec& spec, std::size_t n);

// Stratified assignment; strata are the distinct values of `strata`.
FoldAssignment split_folds(std::span<const int> strata, std::size_t fold_count, std::uint64_t seed);

// FNV-1a over shape, feature bits and labels.
std::uint64_t dataset_hash(const FeatureMatrix& features, std::span<const int> labels);

}  // namespace pulearn

#endif
