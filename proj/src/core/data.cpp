#include "data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace pulearn {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

bool is_missing_token(const std::string& s) {
    return s.empty() || s == "na" || s == "NA" || s == "nan" || s == "NaN" || s == "?";
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

struct RawTable {
    std::vector<std::string> feature_names;
    std::vector<double> values;  // row-major, NaN marks a missing entry
    std::vector<std::string> targets;
    std::vector<std::size_t> line_numbers;
    std::size_t rows = 0;
};

std::vector<std::string> read_header(std::ifstream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) {
        fail(ErrorCode::Parse, path + ": missing header row");
    }
    if (line.size() >= 3 && std::memcmp(line.data(), "\xEF\xBB\xBF", 3) == 0) {
        line.erase(0, 3);
    }
    auto names = split_line(line);
    for (auto& name : names) {
        name = unquote(name);
    }
    return names;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::Io, "cannot open " + path);
    }
    return in;
}

// Reads every column except `target` as a feature. An empty target means the
// file carries no label column.
RawTable read_table(const std::string& path, const std::string& target, const CsvOptions& options) {
    auto in = open_input(path);
    const auto header = read_header(in, path);

    std::ptrdiff_t target_col = -1;
    RawTable table;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!target.empty() && header[c] == target) {
            if (target_col >= 0) {
                fail(ErrorCode::Parse, path + ": duplicate column '" + target + "'");
            }
            target_col = static_cast<std::ptrdiff_t>(c);
        } else {
            table.feature_names.push_back(header[c]);
        }
    }
    if (!target.empty() && target_col < 0) {
        fail(ErrorCode::Parse, path + ": no '" + target + "' column in header");
    }

    std::string line;
    std::size_t line_no = 1;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        ++row;
        const auto fields = split_line(line);
        if (fields.size() != header.size()) {
            fail(ErrorCode::Parse, path + ": malformed row " + std::to_string(row) + " (line " +
                                       std::to_string(line_no) + "): expected " + std::to_string(header.size()) +
                                       " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (static_cast<std::ptrdiff_t>(c) == target_col) {
                table.targets.push_back(fields[c]);
                continue;
            }
            double v = 0.0;
            const bool missing = options.missing != MissingPolicy::Error && is_missing_token(fields[c]);
            if (missing) {
                v = std::numeric_limits<double>::quiet_NaN();
            } else if (!parse_double(fields[c], v) || !std::isfinite(v)) {
                fail(ErrorCode::Parse, path + ": non-finite or unparsable value '" + fields[c] + "' at row " +
                                           std::to_string(row) + " (line " + std::to_string(line_no) +
                                           "), column '" + header[c] + "'");
            }
            table.values.push_back(v);
        }
        table.line_numbers.push_back(line_no);
    }
    table.rows = row;
    return table;
}

// Applies the missing-value policy in place. Returns the retained row indices.
std::vector<std::size_t> resolve_missing(RawTable& table, MissingPolicy policy, const std::string& path) {
    const std::size_t d = table.feature_names.size();
    std::vector<std::size_t> keep;
    if (policy == MissingPolicy::Drop) {
        std::vector<double> kept_values;
        for (std::size_t r = 0; r < table.rows; ++r) {
            const auto first = table.values.begin() + static_cast<std::ptrdiff_t>(r * d);
            if (std::none_of(first, first + static_cast<std::ptrdiff_t>(d), [](double v) { return std::isnan(v); })) {
                keep.push_back(r);
                kept_values.insert(kept_values.end(), first, first + static_cast<std::ptrdiff_t>(d));
            }
        }
        table.values = std::move(kept_values);
        return keep;
    }
    if (policy == MissingPolicy::Median) {
        for (std::size_t c = 0; c < d; ++c) {
            std::vector<double> present;
            for (std::size_t r = 0; r < table.rows; ++r) {
                const double v = table.values[r * d + c];
                if (!std::isnan(v)) present.push_back(v);
            }
            if (present.size() == table.rows) continue;
            if (present.empty()) {
                fail(ErrorCode::Parse, path + ": column '" + table.feature_names[c] + "' has no values to impute from");
            }
            std::sort(present.begin(), present.end());
            const std::size_t m = present.size();
            const double median = m % 2 == 1 ? present[m / 2] : 0.5 * (present[m / 2 - 1] + present[m / 2]);
            for (std::size_t r = 0; r < table.rows; ++r) {
                double& v = table.values[r * d + c];
                if (std::isnan(v)) v = median;
            }
        }
    }
    keep.resize(table.rows);
    for (std::size_t r = 0; r < table.rows; ++r) keep[r] = r;
    return keep;
}

void write_or_throw(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) {
        fail(ErrorCode::Io, "failed writing " + path);
    }
}

void write_header(std::ofstream& out, const FeatureMatrix& m, const char* target) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
        out << m.names()[j] << ',';
    }
    out << target << '\n';
}

void write_row(std::ofstream& out, const FeatureMatrix& m, std::size_t i) {
    for (double v : m.row(i)) {
        out << format_double(v) << ',';
    }
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                             std::vector<std::string> names)
    : rows_(rows), cols_(cols), values_(std::move(values)), names_(std::move(names)) {
    require(values_.size() == rows_ * cols_, "feature matrix: value count does not match shape");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k])) {
            fail(ErrorCode::InvalidArgument,
                 "feature matrix: non-finite value at row " + std::to_string(k / std::max<std::size_t>(cols_, 1)));
        }
    }
    if (names_.empty()) {
        for (std::size_t j = 0; j < cols_; ++j) names_.push_back("x" + std::to_string(j));
    }
    require(names_.size() == cols_, "feature matrix: name count does not match column count");
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * cols_);
    for (std::size_t i : indices) {
        require(i < rows_, "row index out of range");
        auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return FeatureMatrix(indices.size(), cols_, std::move(out), names_);
}

PNDataset::PNDataset(FeaturesPtr features, std::vector<int> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
    require(features_ != nullptr, "PN dataset: missing features");
    require(labels_.size() == features_->rows(), "PN dataset: label count does not match row count");
    for (int y : labels_) {
        require(y == 1 || y == -1, "PN dataset: labels must be +1 or -1");
    }
}

std::size_t PNDataset::positive_count() const noexcept {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
}

std::vector<std::size_t> PNDataset::positive_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == 1) out.push_back(i);
    }
    return out;
}

bool PNDataset::has_both_classes() const noexcept {
    const auto p = positive_count();
    return p > 0 && p < labels_.size();
}

PNDataset PNDataset::subset(std::span<const std::size_t> indices) const {
    std::vector<int> labels;
    labels.reserve(indices.size());
    for (std::size_t i : indices) labels.push_back(labels_.at(i));
    return PNDataset(std::make_shared<const FeatureMatrix>(features_->select_rows(indices)), std::move(labels));
}

PUDataset::PUDataset(FeaturesPtr features, std::vector<std::uint8_t> observed)
    : features_(std::move(features)), observed_(std::move(observed)) {
    require(features_ != nullptr, "PU dataset: missing features");
    require(observed_.size() == features_->rows(), "PU dataset: flag count does not match row count");
    for (auto f : observed_) {
        require(f == 0 || f == 1, "PU dataset: observed flags must be 0 or 1");
    }
    if (observed_count() == 0) {
        fail(ErrorCode::Degenerate, "no observed positives");
    }
}

std::size_t PUDataset::observed_count() const noexcept {
    return static_cast<std::size_t>(std::count(observed_.begin(), observed_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> PUDataset::observed_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < observed_.size(); ++i) {
        if (observed_[i] == 1) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> PUDataset::unlabeled_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < observed_.size(); ++i) {
        if (observed_[i] == 0) out.push_back(i);
    }
    return out;
}

PUDataset PUDataset::subset(std::span<const std::size_t> indices) const {
    std::vector<std::uint8_t> flags;
    flags.reserve(indices.size());
    for (std::size_t i : indices) flags.push_back(observed_.at(i));
    return PUDataset(std::make_shared<const FeatureMatrix>(features_->select_rows(indices)), std::move(flags));
}

void SyntheticSpec::validate() const {
    require(theta_p > 0.0 && theta_p < 1.0, "synthetic spec: thetaP must lie in (0,1)");
    require(theta_o > 0.0 && theta_o <= 1.0, "synthetic spec: thetaO must lie in (0,1]");
    require(shared_std_dev > 0.0 && std::isfinite(shared_std_dev), "synthetic spec: sharedStdDev must be positive");
    require(dim >= 1, "synthetic spec: d must be at least 1");
    require(mean_p.size() == dim && mean_n.size() == dim, "synthetic spec: meanP and meanN must have length d");
}

std::vector<std::size_t> FoldAssignment::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != fold) out.push_back(i);
    }
    return out;
}

CsvSchema detect_csv_schema(const std::string& path) {
    auto in = open_input(path);
    const auto header = read_header(in, path);
    const bool has_label = std::find(header.begin(), header.end(), "label") != header.end();
    const bool has_observed = std::find(header.begin(), header.end(), "observed") != header.end();
    if (has_label && has_observed) {
        fail(ErrorCode::Parse, path + ": header has both 'label' and 'observed' columns");
    }
    if (has_label) return CsvSchema::PN;
    if (has_observed) return CsvSchema::PU;
    return CsvSchema::FeaturesOnly;
}

PNDataset load_pn_csv(const std::string& path, const CsvOptions& options) {
    RawTable table = read_table(path, "label", options);
    std::vector<int> labels;
    labels.reserve(table.rows);
    for (std::size_t r = 0; r < table.rows; ++r) {
        const auto& t = table.targets[r];
        if (t == "+1" || t == "1") {
            labels.push_back(1);
        } else if (t == "-1") {
            labels.push_back(-1);
        } else {
            fail(ErrorCode::Parse, path + ": label '" + t + "' at row " + std::to_string(r + 1) +
                                       " is not one of +1, 1, -1");
        }
    }
    const auto keep = resolve_missing(table, options.missing, path);
    std::vector<int> kept;
    kept.reserve(keep.size());
    for (auto r : keep) kept.push_back(labels[r]);
    auto features = std::make_shared<const FeatureMatrix>(keep.size(), table.feature_names.size(),
                                                          std::move(table.values), table.feature_names);
    return PNDataset(std::move(features), std::move(kept));
}

PUDataset load_pu_csv(const std::string& path, const CsvOptions& options) {
    RawTable table = read_table(path, "observed", options);
    std::vector<std::uint8_t> flags;
    flags.reserve(table.rows);
    for (std::size_t r = 0; r < table.rows; ++r) {
        const auto& t = table.targets[r];
        if (t == "1") {
            flags.push_back(1);
        } else if (t == "0") {
            flags.push_back(0);
        } else {
            fail(ErrorCode::Parse, path + ": observed flag '" + t + "' at row " + std::to_string(r + 1) +
                                       " is not one of 1, 0");
        }
    }
    const auto keep = resolve_missing(table, options.missing, path);
    std::vector<std::uint8_t> kept;
    kept.reserve(keep.size());
    for (auto r : keep) kept.push_back(flags[r]);
    if (std::count(kept.begin(), kept.end(), std::uint8_t{1}) == 0) {
        fail(ErrorCode::Degenerate, path + ": no observed positives");
    }
    auto features = std::make_shared<const FeatureMatrix>(keep.size(), table.feature_names.size(),
                                                          std::move(table.values), table.feature_names);
    return PUDataset(std::move(features), std::move(kept));
}

FeatureMatrix load_features_csv(const std::string& path, const CsvOptions& options) {
    // Label columns, when present, are not features.
    const auto schema = detect_csv_schema(path);
    const std::string target = schema == CsvSchema::PN ? "label" : schema == CsvSchema::PU ? "observed" : "";
    RawTable table = read_table(path, target, options);
    const auto keep = resolve_missing(table, options.missing, path);
    return FeatureMatrix(keep.size(), table.feature_names.size(), std::move(table.values), table.feature_names);
}

void save_csv(const PNDataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot create " + path);
    write_header(out, data.features(), "label");
    for (std::size_t i = 0; i < data.size(); ++i) {
        write_row(out, data.features(), i);
        out << (data.labels()[i] == 1 ? "1" : "-1") << '\n';
    }
    write_or_throw(out, path);
}

void save_csv(const PUDataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot create " + path);
    write_header(out, data.features(), "observed");
    for (std::size_t i = 0; i < data.size(); ++i) {
        write_row(out, data.features(), i);
        out << static_cast<int>(data.observed()[i]) << '\n';
    }
    write_or_throw(out, path);
}

void save_csv(const FeatureMatrix& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot create " + path);
    for (std::size_t j = 0; j < data.cols(); ++j) {
        out << data.names()[j] << (j + 1 < data.cols() ? ',' : '\n');
    }
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            out << format_double(data.at(i, j)) << (j + 1 < data.cols() ? ',' : '\n');
        }
    }
    write_or_throw(out, path);
}

void save_scores_csv(std::span<const double> scores, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot create " + path);
    out << "score\n";
    for (double v : scores) out << format_double(v) << '\n';
    write_or_throw(out, path);
}

PUDataset make_pu(const PNDataset& pn, double theta_o, std::uint64_t seed, ObservationMode mode) {
    require(theta_o > 0.0 && theta_o <= 1.0, "thetaO must lie in (0,1]");
    std::vector<std::uint8_t> flags(pn.size(), 0);
    auto positives = pn.positive_indices();

    if (mode == ObservationMode::ExactFraction) {
        // nearbyint rounds half to even under the default rounding mode.
        const auto target = static_cast<std::size_t>(std::nearbyint(theta_o * static_cast<double>(positives.size())));
        if (target == 0) {
            fail(ErrorCode::Degenerate, "no observed positives: round(thetaO * nP) is 0");
        }
        rng::Stream stream(rng::derive(seed, {0x6d616b65ULL}));
        for (std::size_t j = 0; j < target; ++j) {
            const auto pick = j + static_cast<std::size_t>(stream.below(positives.size() - j));
            std::swap(positives[j], positives[pick]);
            flags[positives[j]] = 1;
        }
    } else {
        const std::uint64_t stream_seed = rng::derive(seed, {0x62657271ULL});
        for (std::size_t i : positives) {
            if (rng::keyed_uniform(stream_seed, i) < theta_o) flags[i] = 1;
        }
    }
    return PUDataset(pn.shared_features(), std::move(flags));
}

std::pair<PNDataset, PUDataset> synth_generate(const SyntheticSpec& spec, std::size_t n) {
    spec.validate();
    require(n >= 10, "synthetic generation needs n >= 10");
    rng::Stream stream(rng::derive(spec.seed, {0x73796e74ULL}));
    std::vector<double> values(n * spec.dim);
    std::vector<int> labels(n);
    std::vector<std::uint8_t> observed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool positive = stream.uniform() < spec.theta_p;
        const auto& mean = positive ? spec.mean_p : spec.mean_n;
        for (std::size_t j = 0; j < spec.dim; ++j) {
            values[i * spec.dim + j] = mean[j] + spec.shared_std_dev * stream.normal();
        }
        labels[i] = positive ? 1 : -1;
        observed[i] = (positive && stream.uniform() < spec.theta_o) ? 1 : 0;
    }
    auto features = std::make_shared<const FeatureMatrix>(n, spec.dim, std::move(values));
    PNDataset pn(features, std::move(labels));
    PUDataset pu(features, std::move(observed));
    return {std::move(pn), std::move(pu)};
}

FoldAssignment split_folds(std::span<const int> strata, std::size_t fold_count, std::uint64_t seed) {
    require(fold_count >= 2, "fold count must be at least 2");
    require(strata.size() >= fold_count, "fewer samples than folds");

    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);
    for (const auto& [value, members] : groups) {
        if (members.size() < fold_count) {
            fail(ErrorCode::InvalidArgument, "fold count " + std::to_string(fold_count) + " exceeds the " +
                                                 std::to_string(members.size()) + " samples in stratum " +
                                                 std::to_string(value));
        }
    }

    FoldAssignment folds;
    folds.fold_count = fold_count;
    folds.assignment.assign(strata.size(), 0);
    std::size_t offset = 0;
    std::uint64_t ordinal = 0;
    for (auto& [value, members] : groups) {
        rng::Stream stream(rng::derive(seed, {0x666f6c64ULL, ordinal++}));
        for (std::size_t j = members.size(); j > 1; --j) {
            std::swap(members[j - 1], members[static_cast<std::size_t>(stream.below(j))]);
        }
        for (std::size_t j = 0; j < members.size(); ++j) {
            folds.assignment[members[j]] = (offset + j) % fold_count;
        }
        offset = (offset + members.size()) % fold_count;
    }
    return folds;
}

std::uint64_t dataset_hash(const FeatureMatrix& features, std::span<const int> labels) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::uint64_t shape[2] = {features.rows(), features.cols()};
    feed(shape, sizeof(shape));
    feed(features.values().data(), features.values().size() * sizeof(double));
    for (int y : labels) {
        const std::int32_t v = y;
        feed(&v, sizeof(v));
    }
    return h;
}

}  // namespace pulearn
