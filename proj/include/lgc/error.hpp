#pragma once

#include <stdexcept>
#include <string>

namespace lgc {

enum class Errc {
  kInvalidArgument,
  kDomain,
  kNotConverged,
  kRankDeficient,
  kDegenerate,
  kParse,
  kIo,
};

const char* to_string(Errc code);

// Single exception type for the library; `code()` distinguishes failure kinds.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace lgc
