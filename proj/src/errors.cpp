#include "plsel/errors.hpp"

namespace plsel {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::GridEmpty: return "GridEmpty";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::MissingParameter: return "MissingParameter";
    case ErrorKind::AllCandidatesRankDeficient: return "AllCandidatesRankDeficient";
    case ErrorKind::DegenerateDoF: return "DegenerateDoF";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace plsel
