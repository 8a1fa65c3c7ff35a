// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace twist {

/// Minimal CSV table: header + rows of string cells. Doubles are written with
/// 17 significant digits so values parse back bit-exactly.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
  std::size_t column(const std::string& name) const;
};

std::string csv_number(double v);
std::string csv_number(long long v);

CsvTable parse_csv(const std::string& text);
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace twist
