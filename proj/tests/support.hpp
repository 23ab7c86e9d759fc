#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgewear::support {

inline std::filesystem::path data_dir() { return EDGEWEAR_TEST_DATA_DIR; }
inline std::filesystem::path golden_dir() { return EDGEWEAR_TEST_GOLDEN_DIR; }

/// Fresh scratch directory under the build tree, wiped on each call.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::path(EDGEWEAR_TEST_SCRATCH_DIR) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

template <class T>
std::vector<T> parse_numbers(const std::string& line) {
  std::istringstream in(line);
  std::vector<T> out;
  T v;
  while (in >> v) out.push_back(v);
  return out;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

}  // namespace edgewear::support
