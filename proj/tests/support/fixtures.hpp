#pragma once

#include <filesystem>
#include <string>

#ifndef POSTAG_TEST_DATA
#error "POSTAG_TEST_DATA must point at tests/data"
#endif

namespace fixture {

inline std::filesystem::path data(const std::string& name) { return std::filesystem::path(POSTAG_TEST_DATA) / name; }

inline std::filesystem::path temp(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "postag_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace fixture
