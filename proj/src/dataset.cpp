#include "coldspray/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "coldspray/numeric.hpp"

namespace coldspray {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    auto value = parse_double(cell);
    if (!value) {
        raise(ErrorKind::NonNumericCell, "row " + std::to_string(row) + ", column " +
                                             std::to_string(col) + ": '" + cell + "'");
    }
    return *value;
}

} // namespace

std::optional<std::size_t> target_index(const std::string& name) {
    for (std::size_t i = 0; i < kNumTargets; ++i) {
        if (name == kTargetNames[i]) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> input_index(const std::string& name) {
    for (std::size_t i = 0; i < kNumInputs; ++i) {
        if (name == kInputNames[i]) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t SplitMasks::train_count() const {
    return static_cast<std::size_t>(std::count(train_mask.begin(), train_mask.end(), true));
}

std::size_t SplitMasks::test_count() const {
    return static_cast<std::size_t>(std::count(test_mask.begin(), test_mask.end(), true));
}

std::vector<SampleRecord> load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorKind::Io, "cannot open dataset file: " + path);
    }

    std::string header;
    if (!std::getline(in, header)) {
        raise(ErrorKind::EmptyFile, "no header in " + path);
    }
    header = strip_cr(header);
    if (header != kCsvHeader) {
        raise(ErrorKind::MalformedHeader, "expected '" + std::string(kCsvHeader) + "', got '" + header + "'");
    }

    std::vector<SampleRecord> records;
    std::string line;
    std::size_t row = 0; // 1-based data row number in error messages
    while (std::getline(in, line)) {
        line = strip_cr(line);
        ++row;
        if (line.empty() && in.eof()) {
            --row;
            break; // trailing newline
        }
        auto fields = split_fields(line);
        if (fields.size() != kNumInputs + kNumTargets) {
            raise(ErrorKind::MalformedRow, "row " + std::to_string(row) + " has " +
                                               std::to_string(fields.size()) + " fields, expected " +
                                               std::to_string(kNumInputs + kNumTargets));
        }
        SampleRecord rec;
        rec.velocity = parse_cell(fields[0], row, 1);
        rec.particle_temp = parse_cell(fields[1], row, 2);
        rec.friction = parse_cell(fields[2], row, 3);
        for (std::size_t t = 0; t < kNumTargets; ++t) {
            const std::string& cell = fields[kNumInputs + t];
            if (cell.empty()) {
                continue; // missing target, never zero-filled
            }
            rec.targets[t] = parse_cell(cell, row, kNumInputs + t + 1);
        }
        records.push_back(rec);
    }
    if (records.empty()) {
        raise(ErrorKind::EmptyFile, "no data rows in " + path);
    }
    validate_records(records);
    return records;
}

std::string to_csv(const std::vector<SampleRecord>& records) {
    std::string out(kCsvHeader);
    out.push_back('\n');
    for (const auto& rec : records) {
        out += format_double(rec.velocity);
        out.push_back(',');
        out += format_double(rec.particle_temp);
        out.push_back(',');
        out += format_double(rec.friction);
        for (std::size_t t = 0; t < kNumTargets; ++t) {
            out.push_back(',');
            if (rec.targets[t]) {
                out += format_double(*rec.targets[t]);
            }
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const std::vector<SampleRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorKind::Io, "cannot write dataset file: " + path);
    }
    out << to_csv(records);
}

void validate_records(const std::vector<SampleRecord>& records) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string where = "row " + std::to_string(i + 1);
        if (!std::isfinite(r.velocity) || !std::isfinite(r.particle_temp) || !std::isfinite(r.friction)) {
            raise(ErrorKind::InvalidValue, where + ": non-finite input");
        }
        if (r.friction < 0.0) {
            raise(ErrorKind::InvalidValue, where + ": friction must be >= 0");
        }
        if (r.particle_temp <= 0.0) {
            raise(ErrorKind::InvalidValue, where + ": particle_temp must be > 0 K");
        }
        for (std::size_t t = 0; t < kNumTargets; ++t) {
            if (!r.targets[t]) {
                continue;
            }
            double v = *r.targets[t];
            if (!std::isfinite(v)) {
                raise(ErrorKind::InvalidValue, where + ": non-finite " + kTargetNames[t]);
            }
            if (t == 2 && v <= 0.0) {
                raise(ErrorKind::InvalidValue, where + ": max_temp_K must be > 0");
            }
            if (t == 4 && v < 0.0) {
                raise(ErrorKind::InvalidValue, where + ": deformation_ratio must be >= 0");
            }
        }
    }
}

std::vector<std::string> range_warnings(const std::vector<SampleRecord>& records) {
    // Table-2 envelopes; values outside are suspicious but not fatal.
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string where = "row " + std::to_string(i + 1);
        if (r.velocity < 400.0 || r.velocity > 900.0) {
            warnings.push_back(where + ": velocity " + format_double(r.velocity) + " outside [400, 900] m/s");
        }
        if (r.particle_temp < 300.0 || r.particle_temp > 600.0) {
            warnings.push_back(where + ": particle_temp " + format_double(r.particle_temp) +
                               " outside [300, 600] K");
        }
        if (r.friction < 0.10 || r.friction > 0.50) {
            warnings.push_back(where + ": friction " + format_double(r.friction) + " outside [0.10, 0.50]");
        }
    }
    return warnings;
}

Tensor input_matrix(const std::vector<SampleRecord>& records) {
    Tensor x(records.size(), kNumInputs);
    for (std::size_t i = 0; i < records.size(); ++i) {
        x.at(i, 0) = records[i].velocity;
        x.at(i, 1) = records[i].particle_temp;
        x.at(i, 2) = records[i].friction;
    }
    return x;
}

Tensor target_column(const std::vector<SampleRecord>& records, std::size_t target,
                     const std::vector<bool>& required_mask) {
    if (target >= kNumTargets) {
        raise(ErrorKind::UnknownParameter, "target index " + std::to_string(target));
    }
    if (!required_mask.empty() && required_mask.size() != records.size()) {
        raise(ErrorKind::MaskMismatch, "mask length " + std::to_string(required_mask.size()) +
                                           " vs " + std::to_string(records.size()) + " records");
    }
    Tensor y(records.size(), 1);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& value = records[i].targets[target];
        if (value) {
            y.at(i, 0) = *value;
        } else if (!required_mask.empty() && required_mask[i]) {
            raise(ErrorKind::MissingTarget, std::string(kTargetNames[target]) + " missing on row " +
                                                std::to_string(i + 1));
        }
    }
    return y;
}

NormStats zscore_fit(const Tensor& features, const std::vector<bool>& train_mask,
                     const std::vector<std::string>& column_names) {
    if (train_mask.size() != features.rows) {
        raise(ErrorKind::MaskMismatch, "mask length " + std::to_string(train_mask.size()) + " vs " +
                                           std::to_string(features.rows) + " rows");
    }
    std::size_t n_train = static_cast<std::size_t>(std::count(train_mask.begin(), train_mask.end(), true));
    if (n_train < 2) {
        raise(ErrorKind::TooFewRows, "need >= 2 training rows, got " + std::to_string(n_train));
    }

    NormStats stats;
    stats.columns = column_names;
    stats.mean.resize(features.cols, 0.0);
    stats.std_dev.resize(features.cols, 0.0);
    for (std::size_t f = 0; f < features.cols; ++f) {
        double sum = 0.0;
        for (std::size_t i = 0; i < features.rows; ++i) {
            if (train_mask[i]) {
                sum += features.at(i, f);
            }
        }
        double mean = sum / static_cast<double>(n_train);
        double ss = 0.0;
        for (std::size_t i = 0; i < features.rows; ++i) {
            if (train_mask[i]) {
                double d = features.at(i, f) - mean;
                ss += d * d;
            }
        }
        double variance = ss / static_cast<double>(n_train); // population convention
        double sd = std::sqrt(variance);
        if (sd <= 0.0) {
            const std::string name = f < column_names.size() ? column_names[f] : std::to_string(f);
            raise(ErrorKind::ConstantFeature, "column '" + name + "' is constant over training rows");
        }
        stats.mean[f] = mean;
        stats.std_dev[f] = sd;
    }
    return stats;
}

NormStats zscore_fit(const std::vector<SampleRecord>& records, const std::vector<bool>& train_mask) {
    std::vector<std::string> names(kInputNames.begin(), kInputNames.end());
    return zscore_fit(input_matrix(records), train_mask, names);
}

Tensor zscore_apply(const Tensor& features, const NormStats& stats) {
    if (stats.mean.size() != features.cols || stats.std_dev.size() != features.cols) {
        raise(ErrorKind::ShapeMismatch, "stats cover " + std::to_string(stats.mean.size()) +
                                            " columns, features have " + std::to_string(features.cols));
    }
    Tensor out(features.rows, features.cols);
    for (std::size_t i = 0; i < features.rows; ++i) {
        for (std::size_t f = 0; f < features.cols; ++f) {
            out.at(i, f) = (features.at(i, f) - stats.mean[f]) / stats.std_dev[f];
        }
    }
    return out;
}

Tensor zscore_apply(const std::vector<SampleRecord>& records, const NormStats& stats) {
    return zscore_apply(input_matrix(records), stats);
}

SplitMasks split_masks(std::size_t n, double test_fraction, std::uint64_t seed) {
    if (n < 5) {
        raise(ErrorKind::TooFewRows, "need n >= 5, got " + std::to_string(n));
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        raise(ErrorKind::BadFraction, "test_fraction must be in (0, 1), got " + format_double(test_fraction));
    }
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    if (n_test < 1 || n_test > n - 2) {
        raise(ErrorKind::BadFraction, "test count " + std::to_string(n_test) + " out of [1, " +
                                          std::to_string(n - 2) + "] for n=" + std::to_string(n));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    SplitMasks masks;
    masks.train_mask.assign(n, true);
    masks.test_mask.assign(n, false);
    for (std::size_t i = 0; i < n_test; ++i) {
        masks.train_mask[order[i]] = false;
        masks.test_mask[order[i]] = true;
    }
    return masks;
}

std::string norm_stats_to_json(const NormStats& stats) {
    nlohmann::ordered_json j;
    j["columns"] = stats.columns;
    j["mean"] = stats.mean;
    j["std"] = stats.std_dev;
    return j.dump(2) + "\n";
}

NormStats norm_stats_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    NormStats stats;
    stats.columns = j.at("columns").get<std::vector<std::string>>();
    stats.mean = j.at("mean").get<std::vector<double>>();
    stats.std_dev = j.at("std").get<std::vector<double>>();
    return stats;
}

std::string split_masks_to_json(const SplitMasks& masks) {
    nlohmann::ordered_json j;
    std::vector<int> train(masks.train_mask.begin(), masks.train_mask.end());
    std::vector<int> test(masks.test_mask.begin(), masks.test_mask.end());
    j["train"] = train;
    j["test"] = test;
    return j.dump(2) + "\n";
}

SplitMasks split_masks_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    SplitMasks masks;
    for (int v : j.at("train").get<std::vector<int>>()) {
        masks.train_mask.push_back(v != 0);
    }
    for (int v : j.at("test").get<std::vector<int>>()) {
        masks.test_mask.push_back(v != 0);
    }
    return masks;
}

} // namespace coldspray
