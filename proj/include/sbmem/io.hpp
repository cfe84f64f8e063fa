#pragma once

// CSV and JSON emission. Numbers are written in the shortest form that parses
// back to the same double, independent of the C locale.

#include <string>
#include <vector>

#include <json.hpp>

namespace sbmem {

std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Header line plus one line per row, each terminated by '\n'. Header fields
// containing ',', '"' or newlines are quoted. Throws std::runtime_error naming
// the path on I/O failure and ValidationError on ragged rows.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

CsvTable read_csv(const std::string& path);

void write_json(const std::string& path, const nlohmann::ordered_json& doc);

// Version string baked in at build time (git describe when available).
const char* version_string();

}  // namespace sbmem
