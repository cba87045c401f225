#pragma once

#include <stdexcept>
#include <string>

namespace bh {

enum class ErrorCode : int {
  ok = 0,
  invalid_argument = 1,
  precondition = 2,
  near_singular = 3,
  divergent = 4,
  io = 5,
  parse = 6,
  unknown_key = 7,
  numeric = 8,
  internal = 9,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

} // namespace bh
