#pragma once

#include <stdexcept>
#include <string>

namespace ncpit {

enum class Errc {
  NotPrime,
  DivisionByZero,
  VarSetMismatch,
  CapExceeded,
  NotPatternProduct,
  NotHomogeneous,
  DimensionMismatch,
  InfeasibleProfile,
  UnsupportedEntryKinds,
  PathExplosion,
  DepthMismatch,
  EvenDepth,
  DegreeTooLarge,
  MissingDegreeHint,
  ParseError,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::NotPrime: return "NotPrime";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::VarSetMismatch: return "VarSetMismatch";
    case Errc::CapExceeded: return "CapExceeded";
    case Errc::NotPatternProduct: return "NotPatternProduct";
    case Errc::NotHomogeneous: return "NotHomogeneous";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InfeasibleProfile: return "InfeasibleProfile";
    case Errc::UnsupportedEntryKinds: return "UnsupportedEntryKinds";
    case Errc::PathExplosion: return "PathExplosion";
    case Errc::DepthMismatch: return "DepthMismatch";
    case Errc::EvenDepth: return "EvenDepth";
    case Errc::DegreeTooLarge: return "DegreeTooLarge";
    case Errc::MissingDegreeHint: return "MissingDegreeHint";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ncpit
