#pragma once

#include <stdexcept>
#include <string>

namespace sulab {

// Base class for every failure the library reports deliberately.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct BadResolution : Error {
  explicit BadResolution(const std::string& msg) : Error(msg) {}
};
struct BadRadii : Error {
  explicit BadRadii(const std::string& msg) : Error(msg) {}
};
struct AnnulusOutOfBounds : Error {
  explicit AnnulusOutOfBounds(const std::string& msg) : Error(msg) {}
};
struct PatchOutOfBounds : Error {
  explicit PatchOutOfBounds(const std::string& msg) : Error(msg) {}
};
struct BelowResolution : Error {
  explicit BelowResolution(const std::string& msg) : Error(msg) {}
};
struct RingNotOnGrid : Error {
  explicit RingNotOnGrid(const std::string& msg) : Error(msg) {}
};
struct RadiusOutOfRange : Error {
  explicit RadiusOutOfRange(const std::string& msg) : Error(msg) {}
};
struct BandOutOfRange : Error {
  explicit BandOutOfRange(const std::string& msg) : Error(msg) {}
};
struct BandTooNarrow : Error {
  explicit BandTooNarrow(const std::string& msg) : Error(msg) {}
};
struct NonFiniteValue : Error {
  explicit NonFiniteValue(const std::string& msg) : Error(msg) {}
};
struct DegenerateSpeed : Error {
  explicit DegenerateSpeed(const std::string& msg) : Error(msg) {}
};
struct DegreeAmbiguous : Error {
  explicit DegreeAmbiguous(const std::string& msg) : Error(msg) {}
};
struct IntegrationFailure : Error {
  explicit IntegrationFailure(const std::string& msg) : Error(msg) {}
};
struct NoConvergence : Error {
  explicit NoConvergence(const std::string& msg) : Error(msg) {}
};
struct NoNeck : Error {
  explicit NoNeck(const std::string& msg) : Error(msg) {}
};
struct InvalidBasePoint : Error {
  explicit InvalidBasePoint(const std::string& msg) : Error(msg) {}
};
struct PointOutsideTubularNeighborhood : Error {
  explicit PointOutsideTubularNeighborhood(const std::string& msg) : Error(msg) {}
};
struct ConfigInvalid : Error {
  // names the first failing field so the CLI can report it verbatim
  ConfigInvalid(const std::string& field, const std::string& msg)
      : Error("config field '" + field + "': " + msg), field(field) {}
  std::string field;
};

}  // namespace sulab
