#ifndef LSM_ERROR_HPP
#define LSM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lsm {

// Error categories. The numeric values are mirrored by the lsm_status codes
// of the C interface (see lsm/lsm.h), so keep the two in sync.
enum class ErrorCode : int {
  InvalidArgument = 1,
  Configuration = 2,
  Domain = 3,
  Aliasing = 4,
  Coercivity = 5,
  Solver = 6,
  Singularity = 7,
  Accuracy = 8,
  Dimension = 9,
  Estimation = 10,
  Io = 11,
  Parse = 12,
  Internal = 99,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

} // namespace lsm

#endif
