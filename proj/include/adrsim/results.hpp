// Result rows and the CSV format they are exchanged in.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace adrsim::cli {

struct ResultRow {
  std::string preset;
  std::string param;
  double value = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double metric_value = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr const char* kCsvHeader = "preset,param,value,rep,seed,metric,metric_value";

/// Six significant digits, "nan" for missing values.
std::string format_number(double v);

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os);
/// Throws std::runtime_error naming the path and the cause on I/O failure.
void write_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

std::vector<ResultRow> read_csv(std::istream& is);
std::vector<ResultRow> read_csv(const std::filesystem::path& path);

}  // namespace adrsim::cli
