#pragma once

#include <stdexcept>
#include <string>

namespace liquidsense {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- core ---------------------------------------------------------------
struct MalformedRegistry : Error { using Error::Error; };
struct NonPositiveViscosity : Error { using Error::Error; };

// -- dsp ----------------------------------------------------------------
struct CutoffAboveNyquist : Error { using Error::Error; };
struct DegenerateSignal : Error { using Error::Error; };
struct InsufficientPeaks : Error { using Error::Error; };
struct WrongStage : Error { using Error::Error; };

// -- render -------------------------------------------------------------
struct EmptySignal : Error { using Error::Error; };
struct MismatchedDimensions : Error { using Error::Error; };
struct BoxOutOfBounds : Error { using Error::Error; };
struct ImageDecodeError : Error { using Error::Error; };

// -- vision -------------------------------------------------------------
struct MalformedFixture : Error { using Error::Error; };
struct UnknownIndex : Error { using Error::Error; };
struct ProviderUnavailable : Error { using Error::Error; };
struct NoDetections : Error { using Error::Error; };

// -- perception ---------------------------------------------------------
struct BackendUnavailable : Error { using Error::Error; };
struct ReplayExhausted : Error { using Error::Error; };
struct MissingSideChannel : Error { using Error::Error; };
struct MalformedTemplate : Error { using Error::Error; };

// -- eval ---------------------------------------------------------------
struct AllInvalid : Error { using Error::Error; };

// -- config / io --------------------------------------------------------
struct MalformedConfig : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace liquidsense
