#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testing {

inline std::filesystem::path tmp_dir(const std::string& leaf) {
  const char* env = std::getenv("SGDLAB_TEST_TMP");
  std::filesystem::path p = env && *env ? env : std::filesystem::temp_directory_path() / "sgdlab_tests";
  p /= leaf;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace testing
