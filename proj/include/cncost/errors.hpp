#pragma once

#include <stdexcept>
#include <string>

namespace cncost {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// mesh parsing / geometry
class TruncatedFile : public Error { public: using Error::Error; };
class MalformedToken : public Error { public: using Error::Error; };
class EmptyMesh : public Error { public: using Error::Error; };
class ResolutionTooSmall : public Error { public: using Error::Error; };
class ZeroSurfaceArea : public Error { public: using Error::Error; };

// dataset assembly
class DegenerateRange : public Error { public: using Error::Error; };
class WrongKind : public Error { public: using Error::Error; };
class NonPositiveInput : public Error { public: using Error::Error; };
class UnknownMaterial : public Error { public: using Error::Error; };
class TooFewExamples : public Error { public: using Error::Error; };
class InfeasibleSpec : public Error { public: using Error::Error; };

// pipeline failure attributed to one part (carries the part id in the message)
class PipelineError : public Error { public: using Error::Error; };

// nn engine
class ShapeMismatch : public Error { public: using Error::Error; };
class OddDimension : public Error { public: using Error::Error; };
class MsleDomain : public Error { public: using Error::Error; };
class ZeroTarget : public Error { public: using Error::Error; };
class EmptyDataset : public Error { public: using Error::Error; };
class SpecInvalid : public Error { public: using Error::Error; };

// explanation
class InvalidLayer : public Error { public: using Error::Error; };
class BadResolution : public Error { public: using Error::Error; };
class ResolutionMismatch : public Error { public: using Error::Error; };
class EmptyRegion : public Error { public: using Error::Error; };
class IoFailure : public Error { public: using Error::Error; };

} // namespace cncost
