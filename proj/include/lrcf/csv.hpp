#pragma once

#include <string>
#include <vector>

#include "lrcf/dataset.hpp"

namespace lrcf {

struct CsvTable {
  std::vector<std::string> columns; // synthesized as c0, c1, ... when absent
  Dataset data;
  bool had_header = false;

  //! Column index by name; also accepts a plain 0-based index string.
  int column_index(const std::string& name) const;
};

//! Read a delimited numeric table. The first line is treated as a header
//! when any of its fields fails to parse as a number. Empty fields and the
//! literal NaN (any case) mark missing cells.
CsvTable read_csv(const std::string& path, char delimiter = ',');

//! Write a table with 17-significant-digit decimals (lossless for double).
void write_csv(const std::string& path, const RMatrix& values,
               const std::vector<std::string>& columns = {}, char delimiter = ',');

} // namespace lrcf
