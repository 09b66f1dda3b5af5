#pragma once

// Dataset CSV format shared by the generator dump and the screening entry
// point: header `time,event,<feature columns...>`, one subject per row.
// Ingest validates strictly and reports the offending data row on failure.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "survscreen/datagen.hpp"
#include "survscreen/linalg.hpp"

namespace survscreen {

class CsvParseError : public std::runtime_error {
public:
    CsvParseError(std::size_t row, const std::string& why)
        : std::runtime_error("row " + std::to_string(row) + ": " + why), row_(row) {}
    std::size_t row() const { return row_; }  // 1-based data row

private:
    std::size_t row_;
};

// In-memory dataset for screening; feature names come from the header.
struct Dataset {
    std::vector<std::string> feature_names;
    Matrix X;
    Vector time;
    std::vector<std::uint8_t> event;

    std::size_t n() const { return time.size(); }
    std::size_t n_features() const { return feature_names.size(); }
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

inline double parse_field_double(const std::string& field, std::size_t row,
                                 const std::string& what) {
    if (field.empty()) throw CsvParseError(row, "missing value for " + what);
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw CsvParseError(row, "malformed number '" + field + "' for " + what);
    return value;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline Dataset ingest_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ingest_csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split_fields(line);
    if (header.size() < 3 || header[0] != "time" || header[1] != "event")
        throw std::runtime_error("ingest_csv: header must be time,event,<features...>");

    Dataset ds;
    ds.feature_names.assign(header.begin() + 2, header.end());
    const std::size_t p = ds.feature_names.size();

    std::vector<Vector> rows;
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row_number;
        const auto fields = detail::split_fields(line);
        if (fields.size() != header.size())
            throw CsvParseError(row_number, "expected " + std::to_string(header.size()) +
                                                " fields, found " + std::to_string(fields.size()));
        const double t = detail::parse_field_double(fields[0], row_number, "time");
        if (!(t > 0.0)) throw CsvParseError(row_number, "time must be strictly positive");
        const double e = detail::parse_field_double(fields[1], row_number, "event");
        if (e != 0.0 && e != 1.0) throw CsvParseError(row_number, "event must be 0 or 1");
        Vector row(p + 2);
        row[0] = t;
        row[1] = e;
        for (std::size_t j = 0; j < p; ++j)
            row[2 + j] = detail::parse_field_double(fields[2 + j], row_number,
                                                    ds.feature_names[j]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("ingest_csv: no data rows");

    const std::size_t n = rows.size();
    ds.time.resize(n);
    ds.event.resize(n);
    ds.X = Matrix(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        ds.time[i] = rows[i][0];
        ds.event[i] = rows[i][1] != 0.0 ? 1 : 0;
        for (std::size_t j = 0; j < p; ++j) ds.X(i, j) = rows[i][2 + j];
    }
    return ds;
}

inline Dataset ingest_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest_csv: cannot open " + path);
    return ingest_csv(in);
}

inline Dataset to_dataset(const SimDataset& sim) {
    Dataset ds;
    ds.feature_names.reserve(kScreenedFeatures);
    for (std::size_t j = 1; j <= kScreenedFeatures; ++j)
        ds.feature_names.push_back("f" + std::to_string(j));
    ds.X = sim.X;
    ds.time = sim.time;
    ds.event = sim.event;
    return ds;
}

// Full-precision dump; ingest of the output reproduces the dataset exactly.
inline void write_dataset_csv(const SimDataset& ds, std::ostream& out) {
    out << "time,event";
    for (std::size_t j = 1; j <= kScreenedFeatures; ++j) out << ",f" << j;
    out << "\n";
    for (std::size_t i = 0; i < ds.n(); ++i) {
        out << detail::format_double(ds.time[i]) << "," << static_cast<int>(ds.event[i]);
        for (std::size_t j = 0; j < kScreenedFeatures; ++j)
            out << "," << detail::format_double(ds.X(i, j));
        out << "\n";
    }
}

// Sidecar metadata for a dumped dataset.
inline std::string dataset_metadata_json(const SimDataset& ds, std::uint64_t master_seed,
                                         std::uint64_t scenario_id,
                                         std::size_t replicate_index) {
    nlohmann::json meta;
    meta["observed_true_ids"] = ds.observed_true_ids;
    meta["observed_effects"] = ds.observed_effects;
    meta["theta"] = ds.theta;
    meta["seed"] = {{"master_seed", master_seed},
                    {"scenario_id", scenario_id},
                    {"replicate_index", replicate_index}};
    return meta.dump(2) + "\n";
}

inline void write_dataset_files(const SimDataset& ds, const std::string& csv_path,
                                std::uint64_t master_seed, std::uint64_t scenario_id,
                                std::size_t replicate_index) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open " + csv_path + " for writing");
    write_dataset_csv(ds, csv);
    const std::string meta_path = csv_path + ".meta.json";
    std::ofstream meta(meta_path);
    if (!meta) throw std::runtime_error("cannot open " + meta_path + " for writing");
    meta << dataset_metadata_json(ds, master_seed, scenario_id, replicate_index);
}

}  // namespace survscreen
