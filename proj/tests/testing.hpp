#pragma once

// Tiny check-and-count harness shared by the test executables. Checks print
// their location on failure and keep going; main() returns nonzero if any
// check failed. Not using <cassert> so the checks survive NDEBUG builds.

#include <cmath>
#include <cstdio>

namespace testing_detail {
inline int g_failed = 0;
inline int g_total = 0;
}  // namespace testing_detail

#define CHECK(cond)                                                              \
  do {                                                                           \
    ++testing_detail::g_total;                                                   \
    if (!(cond)) {                                                               \
      ++testing_detail::g_failed;                                                \
      std::printf("  CHECK FAILED %s:%d: %s\n", __FILE__, __LINE__, #cond);      \
    }                                                                            \
  } while (0)

#define CHECK_NEAR(a, b, tol)                                                    \
  do {                                                                           \
    ++testing_detail::g_total;                                                   \
    const double va_ = (a);                                                      \
    const double vb_ = (b);                                                      \
    if (!(std::abs(va_ - vb_) <= (tol))) {                                       \
      ++testing_detail::g_failed;                                                \
      std::printf("  CHECK_NEAR FAILED %s:%d: %s = %.17g vs %s = %.17g (tol %g)\n", \
                  __FILE__, __LINE__, #a, va_, #b, vb_, (double)(tol));          \
    }                                                                            \
  } while (0)

#define CHECK_THROWS(stmt, ExType)                                               \
  do {                                                                           \
    ++testing_detail::g_total;                                                   \
    bool caught_ = false;                                                        \
    try {                                                                        \
      stmt;                                                                      \
    } catch (const ExType&) {                                                    \
      caught_ = true;                                                            \
    } catch (...) {                                                              \
    }                                                                            \
    if (!caught_) {                                                              \
      ++testing_detail::g_failed;                                                \
      std::printf("  CHECK_THROWS FAILED %s:%d: expected %s from %s\n", __FILE__, \
                  __LINE__, #ExType, #stmt);                                     \
    }                                                                            \
  } while (0)

inline int test_summary(const char* suite) {
  if (testing_detail::g_failed == 0) {
    std::printf("All %s tests passed (%d checks)\n", suite, testing_detail::g_total);
    return 0;
  }
  std::printf("%d of %d checks FAILED in %s\n", testing_detail::g_failed,
              testing_detail::g_total, suite);
  return 1;
}
