#include "lgc/error.hpp"

namespace lgc {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "invalid argument";
    case Errc::kDomain: return "domain error";
    case Errc::kNotConverged: return "not converged";
    case Errc::kRankDeficient: return "rank deficient";
    case Errc::kDegenerate: return "degenerate configuration";
    case Errc::kParse: return "parse error";
    case Errc::kIo: return "i/o error";
  }
  return "unknown";
}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace lgc
