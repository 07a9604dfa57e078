#pragma once

#include <stdexcept>
#include <string>

namespace posegeom {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateInput : public Error { public: using Error::Error; };
class DimensionMismatch : public Error { public: using Error::Error; };
class BehindCamera : public Error { public: using Error::Error; };
class DegenerateGeometry : public Error { public: using Error::Error; };
class InsufficientPoints : public Error { public: using Error::Error; };
class NoConvergence : public Error { public: using Error::Error; };
class ZeroNormRow : public Error { public: using Error::Error; };
class EmptySet : public Error { public: using Error::Error; };
class TooFewKeypoints : public Error { public: using Error::Error; };
class NoValidAnchors : public Error { public: using Error::Error; };
class NotNormalized : public Error { public: using Error::Error; };
class NonPositiveSigma : public Error { public: using Error::Error; };
class NonPositiveScale : public Error { public: using Error::Error; };
class NonPositiveSize : public Error { public: using Error::Error; };
class LengthMismatch : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };
class NothingVisible : public Error { public: using Error::Error; };
class SchemaError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class InvalidConfig : public Error { public: using Error::Error; };
class MissingModel : public Error { public: using Error::Error; };

}  // namespace posegeom
