#include "plsel/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "plsel/errors.hpp"

namespace plsel {

namespace {

double parse_number(const std::string& field, std::size_t line, std::size_t column) {
  std::size_t b = 0, e = field.size();
  while (b < e && (field[b] == ' ' || field[b] == '\t')) ++b;
  while (e > b && (field[e - 1] == ' ' || field[e - 1] == '\t')) --e;
  if (b < e && field[b] == '+') ++b;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data() + b, field.data() + e, v);
  if (b == e || ec != std::errc() || ptr != field.data() + e) {
    throw ParseError("not a number: '" + field + "'", line, column);
  }
  if (!std::isfinite(v)) throw ParseError("non-finite value: '" + field + "'", line, column);
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1, column = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool quoted = false;
  bool any = false;

  std::size_t i = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record_lines.push_back(record_line);
    record.clear();
    quoted = false;
    any = false;
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
        if (c == '\n') {
          ++line;
          column = 0;
        }
      }
    } else if (c == '"') {
      if (!field.empty() || quoted) throw ParseError("unexpected quote inside field", line, column);
      in_quotes = quoted = any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      quoted = false;
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) end_record();
      ++line;
      column = 0;
      record_line = line;
    } else {
      if (quoted) throw ParseError("characters after closing quote", line, column);
      field += c;
      any = true;
    }
    ++column;
  }
  if (in_quotes) throw ParseError("unterminated quoted field", line, column);
  if (any || !field.empty()) end_record();

  if (records.empty()) throw ParseError("empty file: header row required", 1, 1);
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(records[r].size()),
                       record_lines[r], 1);
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

LoadedCsv parse_dataset(const std::string& text, const CsvRoles& roles) {
  const CsvTable table = parse_csv(text);
  auto find = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw ParseError("column '" + name + "' not in header", 1, 1);
    return static_cast<std::size_t>(it - table.header.begin());
  };
  if (roles.y.empty() || roles.t.empty()) throw InvalidArgument("y and t columns are required");
  const std::size_t iy = find(roles.y);
  const std::size_t it = find(roles.t);
  if (iy == it) throw InvalidArgument("y and t must be different columns");
  std::vector<std::size_t> ix;
  std::vector<std::string> names;
  if (roles.x.empty()) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c != iy && c != it) {
        ix.push_back(c);
        names.push_back(table.header[c]);
      }
    }
  } else {
    for (const auto& name : roles.x) {
      const std::size_t c = find(name);
      if (c == iy || c == it) throw InvalidArgument("column '" + name + "' is already y or t");
      if (std::find(ix.begin(), ix.end(), c) != ix.end()) {
        throw InvalidArgument("column '" + name + "' listed twice");
      }
      ix.push_back(c);
      names.push_back(name);
    }
  }
  if (ix.empty()) throw InvalidArgument("at least one x column is required");

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto q = static_cast<Eigen::Index>(ix.size());
  Eigen::VectorXd y(n), t(n);
  Eigen::MatrixXd x(n, q);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    const auto line = static_cast<std::size_t>(r) + 2;
    y[r] = parse_number(row[iy], line, iy + 1);
    t[r] = parse_number(row[it], line, it + 1);
    for (Eigen::Index j = 0; j < q; ++j) {
      const std::size_t c = ix[static_cast<std::size_t>(j)];
      x(r, j) = parse_number(row[c], line, c + 1);
    }
  }

  LoadedCsv out;
  if (roles.rescale_t && n > 0) {
    const double lo = t.minCoeff(), hi = t.maxCoeff();
    if (!(hi > lo)) throw DomainError("cannot rescale a constant t column");
    t = ((t.array() - lo) / (hi - lo)).matrix();
    out.rescale = TRescale{lo, hi};
    std::ostringstream os;
    os << "t rescaled from [" << format_double(lo) << ", " << format_double(hi) << "] to [0, 1]";
    out.warnings.push_back(os.str());
  } else {
    for (Eigen::Index r = 0; r < n; ++r) {
      if (!(t[r] >= 0.0 && t[r] <= 1.0)) {
        throw DomainError("t = " + format_double(t[r]) + " outside [0, 1] at data row " +
                              std::to_string(r + 1) + " (line " + std::to_string(r + 2) +
                              "); use --rescale-t",
                          static_cast<std::size_t>(r));
      }
    }
  }
  out.data = Dataset(std::move(y), std::move(x), std::move(t), names, roles.y, roles.t);
  return out;
}

LoadedCsv load_csv(const std::string& path, const CsvRoles& roles) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), roles);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_csv(const Dataset& data) {
  std::string out = csv_escape(data.t_name()) + "," + csv_escape(data.y_name());
  for (const auto& name : data.x_names()) out += "," + csv_escape(name);
  out += "\n";
  for (int i = 0; i < data.n(); ++i) {
    out += format_double(data.t()[i]) + "," + format_double(data.y()[i]);
    for (int j = 0; j < data.q(); ++j) out += "," + format_double(data.x()(i, j));
    out += "\n";
  }
  return out;
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << format_csv(data);
}

}  // namespace plsel
