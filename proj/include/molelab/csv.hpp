#pragma once
// Deterministic CSV output (and a small reader for ingestion formats).
// Doubles are printed with 12 significant digits, which round-trips to
// within one unit of the 12th digit; row order is whatever the caller
// supplies, so identical data yields byte-identical files.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace molelab {

using CsvValue = std::variant<std::int64_t, double, std::string>;
using CsvRow = std::vector<CsvValue>;

struct CsvSchema {
    std::vector<std::string> columns;
};

std::string format_double(double v);

/// Header row then one line per record. Throws when a row's width does not
/// match the schema.
void emit_csv(std::ostream& out, const CsvSchema& schema,
              const std::vector<CsvRow>& rows);

std::string csv_to_string(const CsvSchema& schema, const std::vector<CsvRow>& rows);

void write_csv_file(const std::string& path, const CsvSchema& schema,
                    const std::vector<CsvRow>& rows);

/// Minimal reader: comma-separated, no quoting, skips blank lines.
std::vector<std::vector<std::string>> read_csv_file(const std::string& path);

} // namespace molelab
