#pragma once

#include <exception>
#include <stdexcept>
#include <string>

namespace ou {

enum class ErrorKind {
  invalid_parameter,
  dimension_mismatch,
  data_error,
  singular_time,
  undefined_ratio,
  regime,
  precondition,
  io,
};

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

/// Runs f, parking the first exception in `slot`. Exceptions may not cross an
/// OpenMP region boundary; rethrow the slot after the loop.
template <typename F>
void capture_into(std::exception_ptr& slot, F&& f) {
  try {
    f();
  } catch (...) {
#pragma omp critical(ou_capture_into)
    if (!slot) slot = std::current_exception();
  }
}

inline void rethrow_if(const std::exception_ptr& slot) {
  if (slot) std::rethrow_exception(slot);
}

}  // namespace ou
