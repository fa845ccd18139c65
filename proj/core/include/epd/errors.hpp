#pragma once

#include <stdexcept>
#include <string>

namespace epd {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidSpecError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// A field callable failed or returned a non-finite value at a grid node.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, double x, double y)
        : Error(what), x_(x), y_(y) {}
    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }

private:
    double x_;
    double y_;
};

/// Raised when a_n = a / t_n is requested at a non-positive time.
class SingularTimeError : public Error {
public:
    using Error::Error;
};

/// Relative error requested against an exact solution with zero norm.
class DegenerateNormError : public Error {
public:
    using Error::Error;
};

/// A Sylvester operator is (numerically) singular: some eigenvalue of the
/// left coefficient nearly cancels one of the right coefficient.
class NonSolvableError : public Error {
public:
    NonSolvableError(const std::string& what, double eigen_re, double eigen_im,
                     std::string branch = {})
        : Error(what), re_(eigen_re), im_(eigen_im), branch_(std::move(branch)) {}
    /// Eigenvalue mu of the right coefficient for which -mu is (nearly) an
    /// eigenvalue of the left coefficient.
    double eigenvalue_re() const noexcept { return re_; }
    double eigenvalue_im() const noexcept { return im_; }
    /// "sum" or "difference" for the decoupled branches of a coupled solve.
    const std::string& branch() const noexcept { return branch_; }

private:
    double re_;
    double im_;
    std::string branch_;
};

class SingularSystemError : public Error {
public:
    using Error::Error;
};

class SizeGuardError : public Error {
public:
    using Error::Error;
};

class EigenvalueError : public Error {
public:
    using Error::Error;
};

/// A Frobenius denominator vanished at coefficient index `index()`.
class ResonanceError : public Error {
public:
    ResonanceError(const std::string& what, int index) : Error(what), index_(index) {}
    int index() const noexcept { return index_; }

private:
    int index_;
};

class SingularPointError : public Error {
public:
    using Error::Error;
};

class InvalidBranchError : public Error {
public:
    using Error::Error;
};

class SeedingError : public Error {
public:
    using Error::Error;
};

/// An oracle certificate exceeded its tolerance.
class CertificateError : public Error {
public:
    using Error::Error;
};

/// The discrete solution exceeded the blow-up cap at step `step()`.
class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, int step) : Error(what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

/// Config text could not be parsed; `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line) : Error(what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace epd
