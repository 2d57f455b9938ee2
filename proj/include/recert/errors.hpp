#pragma once

#include <stdexcept>
#include <string>

namespace recert {

// Base class for all library failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numeric preconditions and algorithm failures.
class NonSymmetricError : public Error { public: using Error::Error; };
class NoConvergenceError : public Error { public: using Error::Error; };
class NotPsdError : public Error { public: using Error::Error; };
class DegenerateGError : public Error { public: using Error::Error; };
class ZeroVectorError : public Error { public: using Error::Error; };
class TooLargeError : public Error { public: using Error::Error; };
class TooManySupportsError : public Error { public: using Error::Error; };
class InfeasibleModeError : public Error { public: using Error::Error; };
class UnsupportedError : public Error { public: using Error::Error; };
class InfeasibleError : public Error { public: using Error::Error; };
class ReViolatedOnSampleError : public Error { public: using Error::Error; };

// Configuration / input-file problems (CLI exit code 1).
class ConfigError : public Error { public: using Error::Error; };

// Sparsifier ran out of attempts; carries the best error seen.
class AttemptsExhaustedError : public Error {
public:
    AttemptsExhaustedError(const std::string& what, double best_err)
        : Error(what), best_err(best_err) {}
    double best_err;
};

}  // namespace recert
