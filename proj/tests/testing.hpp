#pragma once
// Small helpers shared by the test binaries.

#include <filesystem>
#include <string>

#include "gazealign/error.hpp"
#include "gazealign/text_io.hpp"

namespace testing {

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(GAZEALIGN_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

template <class F>
gazealign::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const gazealign::Error& e) {
    return e.code();
  }
  return gazealign::ErrorCode::Internal;
}

}  // namespace testing

#define CHECK_ERROR(expr, error_code) CHECK(testing::error_code_of([&] { (void)(expr); }) == (error_code))
