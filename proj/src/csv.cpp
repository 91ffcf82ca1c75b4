#include "molelab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace molelab {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

void append_value(std::ostream& out, const CsvValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) {
        out << std::get<std::int64_t>(v);
    } else if (std::holds_alternative<double>(v)) {
        out << format_double(std::get<double>(v));
    } else {
        out << std::get<std::string>(v);
    }
}

} // namespace

void emit_csv(std::ostream& out, const CsvSchema& schema,
              const std::vector<CsvRow>& rows) {
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
        if (c) out << ',';
        out << schema.columns[c];
    }
    out << '\n';
    for (const CsvRow& row : rows) {
        if (row.size() != schema.columns.size())
            throw std::invalid_argument("emit_csv: row width does not match schema");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            append_value(out, row[c]);
        }
        out << '\n';
    }
}

std::string csv_to_string(const CsvSchema& schema, const std::vector<CsvRow>& rows) {
    std::ostringstream os;
    emit_csv(os, schema, rows);
    return os.str();
}

void write_csv_file(const std::string& path, const CsvSchema& schema,
                    const std::vector<CsvRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv_file: cannot open '" + path + "'");
    emit_csv(out, schema, rows);
    if (!out) throw std::runtime_error("write_csv_file: write failed for '" + path + "'");
}

std::vector<std::vector<std::string>> read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv_file: cannot open '" + path + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        rows.push_back(std::move(fields));
    }
    return rows;
}

} // namespace molelab
