#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace vpcli {

// 17 significant digits, C locale.
std::string num(double x);
std::string num(long x);
inline std::string num(int x) { return num(static_cast<long>(x)); }
// Integer vector as "a;b;c" (commas are taken by CSV).
std::string join(const std::vector<int>& v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

// Doubles serialized as exact round-trip numbers; keys sorted.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// Config echo, versions and wall time. The only output whose bytes vary between reruns.
void write_manifest(const std::filesystem::path& dir, const std::string& subcommand, const nlohmann::json& config,
                    const std::vector<std::string>& outputs, double wall_seconds);

}  // namespace vpcli
