#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace finslab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed metric source. `offset()` is the 1-based column of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// An expression was evaluated outside the domain of one of its functions
/// (log/sqrt/fractional pow of a nonpositive base, division by zero).
class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InadmissibleSample : public Error {
public:
    using Error::Error;
};

/// The fundamental tensor failed the nondegeneracy threshold.
class SingularMetric : public Error {
public:
    using Error::Error;
};

/// An integration stage left the conic domain.
class DomainExit : public Error {
public:
    explicit DomainExit(double t)
        : Error("trajectory left the conic domain at t = " + std::to_string(t)), t_(t) {}
    double time() const noexcept { return t_; }

private:
    double t_;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class TransversalityFailure : public Error {
public:
    using Error::Error;
};

class NoTransversalVector : public Error {
public:
    using Error::Error;
};

class SamplingFailure : public Error {
public:
    using Error::Error;
};

class PositivityFailure : public Error {
public:
    using Error::Error;
};

class NotLightlike : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

/// The reparametrization ODE ran past the parameter range of the source curve.
class ReparametrizationRange : public Error {
public:
    ReparametrizationRange(double reachable_begin, double reachable_end)
        : Error("reparametrization leaves the curve's parameter range; reachable sub-interval ["
                + std::to_string(reachable_begin) + ", " + std::to_string(reachable_end) + "]"),
          begin_(reachable_begin), end_(reachable_end) {}
    double reachable_begin() const noexcept { return begin_; }
    double reachable_end() const noexcept { return end_; }

private:
    double begin_;
    double end_;
};

class InconsistentReparametrization : public Error {
public:
    using Error::Error;
};

/// Geometric precondition on a submanifold (orthogonality, nondegeneracy, rank) failed.
class PreconditionFailure : public Error {
public:
    using Error::Error;
};

} // namespace finslab
