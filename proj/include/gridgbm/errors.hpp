#pragma once

#include <stdexcept>
#include <string>

namespace gridgbm {

/// Parameter outside the admissible set of a family, curve or model.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Evaluation point outside the open support of a density.
class SupportError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed or inconsistent user input (sample sets, meshes, paths).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested configuration is not covered by the called routine.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A target price lies outside the attainable open interval.
class BoundsError : public std::out_of_range {
public:
    BoundsError(const std::string& what, double lower, double upper)
        : std::out_of_range(what), lower_(lower), upper_(upper) {}

    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }

private:
    double lower_;
    double upper_;
};

/// Numerical procedure failed to reach its tolerance.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    /// Error estimate achieved when the procedure gave up.
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace gridgbm
