#include "adrsim/results.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace adrsim::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.preset << ',' << r.param << ',' << format_number(r.value) << ',' << r.rep << ','
       << r.seed << ',' << r.metric << ',' << format_number(r.metric_value) << '\n';
  }
}

void write_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing: " +
                             std::strerror(errno));
  }
  write_csv(rows, out);
  out.flush();
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

namespace {

double parse_number(const std::string& field, int line) {
  if (field == "nan") return std::nan("");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || field.empty()) {
    throw std::runtime_error("line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return v;
}

}  // namespace

std::vector<ResultRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw std::runtime_error("line 1: expected header '" + std::string(kCsvHeader) + "'");
  }
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected 7 fields");
    }
    ResultRow r;
    r.preset = f[0];
    r.param = f[1];
    r.value = parse_number(f[2], lineno);
    r.rep = static_cast<int>(parse_number(f[3], lineno));
    r.seed = std::stoull(f[4]);
    r.metric = f[5];
    r.metric_value = parse_number(f[6], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string() + ": " + std::strerror(errno));
  return read_csv(in);
}

}  // namespace adrsim::cli
