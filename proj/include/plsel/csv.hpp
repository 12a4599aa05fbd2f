#pragma once

// RFC-4180 CSV ingestion and emission of datasets.

#include <optional>
#include <string>
#include <vector>

#include "plsel/linmodel.hpp"

namespace plsel {

/// Raw table: header plus rows of fields, all rows as wide as the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Parses RFC-4180 text (quoted fields, doubled quotes, CRLF or LF). Throws
/// ParseError with 1-based line and column.
CsvTable parse_csv(const std::string& text);

struct CsvRoles {
  std::string y;
  std::string t;
  std::vector<std::string> x;  // empty: every column other than y and t
  bool rescale_t = false;      // map [min T, max T] affinely onto [0, 1]
};

struct TRescale {
  double min = 0.0;
  double max = 1.0;
};

struct LoadedCsv {
  Dataset data;
  std::optional<TRescale> rescale;
  std::vector<std::string> warnings;
};

LoadedCsv parse_dataset(const std::string& text, const CsvRoles& roles);

/// Reads the file and calls parse_dataset. Throws InvalidArgument when the
/// file cannot be opened.
LoadedCsv load_csv(const std::string& path, const CsvRoles& roles);

/// Header "t_name,y_name,x..." with every value printed as %.17g.
std::string format_csv(const Dataset& data);
void write_csv(const std::string& path, const Dataset& data);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(const std::string& field);

}  // namespace plsel
