#include "lrcf/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace lrcf {

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, delimiter)) fields.push_back(field);
  if (!line.empty() && line.back() == delimiter) fields.emplace_back();
  return fields;
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool is_missing_token(const std::string& t) {
  if (t.empty()) return true;
  std::string lower(t);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "nan";
}

bool parse_number(const std::string& t, double& out) {
  const char* begin = t.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end != begin && *end == '\0';
}

} // namespace

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return static_cast<int>(c);
  }
  // Fall back to a numeric column index.
  double idx = 0;
  if (parse_number(name, idx) && idx >= 0 && idx < static_cast<double>(columns.size()) &&
      idx == static_cast<double>(static_cast<int>(idx))) {
    return static_cast<int>(idx);
  }
  throw invalid_argument("unknown column '" + name + "'");
}

CsvTable read_csv(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> row_masks;
  CsvTable table;
  std::size_t n_cols = 0;

  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trimmed(line).empty()) continue;
    std::vector<std::string> fields = split_line(line, delimiter);

    if (first) {
      first = false;
      n_cols = fields.size();
      bool numeric = true;
      for (const auto& f : fields) {
        double v;
        const std::string t = trimmed(f);
        if (!is_missing_token(t) && !parse_number(t, v)) {
          numeric = false;
          break;
        }
      }
      if (!numeric) {
        table.had_header = true;
        for (auto& f : fields) table.columns.push_back(trimmed(f));
        continue;
      }
    }

    if (fields.size() != n_cols) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected " << n_cols << " fields, found "
          << fields.size();
      throw data_error(msg.str());
    }
    std::vector<double> vals(n_cols);
    std::vector<bool> obs(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) {
      const std::string t = trimmed(fields[c]);
      if (is_missing_token(t)) {
        vals[c] = std::numeric_limits<double>::quiet_NaN();
        obs[c] = false;
        continue;
      }
      double v;
      if (!parse_number(t, v)) {
        std::ostringstream msg;
        msg << path << ":" << line_no << ": cannot parse '" << t << "' as a number";
        throw data_error(msg.str());
      }
      vals[c] = v;
      obs[c] = true;
    }
    rows.push_back(std::move(vals));
    row_masks.push_back(std::move(obs));
  }

  if (n_cols == 0 || rows.empty()) throw data_error("'" + path + "' contains no data rows");
  if (table.columns.empty()) {
    for (std::size_t c = 0; c < n_cols; ++c) table.columns.push_back("c" + std::to_string(c));
  }

  RMatrix values(static_cast<Index>(rows.size()), static_cast<Index>(n_cols));
  BoolArray mask(static_cast<Index>(rows.size()), static_cast<Index>(n_cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
      mask(static_cast<Index>(r), static_cast<Index>(c)) = row_masks[r][c];
    }
  }
  table.data = Dataset(std::move(values), std::move(mask));
  return table;
}

void write_csv(const std::string& path, const RMatrix& values,
               const std::vector<std::string>& columns, char delimiter) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write '" + path + "'");
  if (!columns.empty()) {
    if (static_cast<Index>(columns.size()) != values.cols()) {
      throw invalid_argument("write_csv: header size does not match column count");
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << delimiter;
      out << columns[c];
    }
    out << '\n';
  }
  char buf[40];
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      if (c) out << delimiter;
      std::snprintf(buf, sizeof(buf), "%.17g", values(r, c));
      out << buf;
    }
    out << '\n';
  }
}

} // namespace lrcf
