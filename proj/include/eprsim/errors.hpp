#pragma once

#include <stdexcept>
#include <string>

namespace eprsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimMismatchError : Error { using Error::Error; };
struct DimLimitError : Error { using Error::Error; };
struct NonUnitaryError : Error { using Error::Error; };
struct NonHermitianError : Error { using Error::Error; };
struct NotPositiveError : Error { using Error::Error; };
struct BadIndexError : Error { using Error::Error; };
struct OutOfRangeError : Error { using Error::Error; };
struct InsufficientDataError : Error { using Error::Error; };
struct UnknownDetectorError : Error { using Error::Error; };
struct InconclusiveError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace eprsim
