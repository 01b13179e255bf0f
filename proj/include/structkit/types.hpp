///
/// \file types.hpp
///
/// Scalar, vector and matrix aliases shared by every structkit module, and
/// the exception type used to report failures.
///
#ifndef STRUCTKIT_TYPES_HPP
#define STRUCTKIT_TYPES_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace structkit
{

using cplx          = std::complex<double>;
using Index         = Eigen::Index;
using ComplexVector = Eigen::VectorXcd;
using DenseMatrix   = Eigen::MatrixXcd;
using RealVector    = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846264338327950288;

///
/// Failure classes. The token of each class is what the CLI prints on the
/// diagnostic stream, so the spelling is part of the external interface.
///
enum class ErrorClass
{
    dimension,
    invalid_scalar,
    inconsistency,
    singular_matrix,
    singular_operator,
    knot_collision,
    not_separated,
    degenerate_center,
    partition_too_coarse,
    invalid_tolerance,
    ill_conditioned,
    magnitude_overflow,
    off_line_knot,
    off_circle_knot,
    conditioning_warning,
    class_mismatch,
    rank_overflow,
    invalid_argument,
};

constexpr std::string_view token(ErrorClass c) noexcept
{
    switch (c)
    {
        case ErrorClass::dimension:
            return "dimension";
        case ErrorClass::invalid_scalar:
            return "invalid-scalar";
        case ErrorClass::inconsistency:
            return "inconsistency";
        case ErrorClass::singular_matrix:
            return "singular-matrix";
        case ErrorClass::singular_operator:
            return "singular-operator";
        case ErrorClass::knot_collision:
            return "knot-collision";
        case ErrorClass::not_separated:
            return "not-separated";
        case ErrorClass::degenerate_center:
            return "degenerate-center";
        case ErrorClass::partition_too_coarse:
            return "partition-too-coarse";
        case ErrorClass::invalid_tolerance:
            return "invalid-tolerance";
        case ErrorClass::ill_conditioned:
            return "ill-conditioned";
        case ErrorClass::magnitude_overflow:
            return "magnitude-overflow";
        case ErrorClass::off_line_knot:
            return "off-line-knot";
        case ErrorClass::off_circle_knot:
            return "off-circle-knot";
        case ErrorClass::conditioning_warning:
            return "conditioning-warning";
        case ErrorClass::class_mismatch:
            return "class-mismatch";
        case ErrorClass::rank_overflow:
            return "rank-overflow";
        case ErrorClass::invalid_argument:
            return "invalid-argument";
    }
    return "unknown";
}

/// True for the failure classes that stem from the numbers rather than from
/// how the library was called.
constexpr bool is_numerical(ErrorClass c) noexcept
{
    switch (c)
    {
        case ErrorClass::singular_matrix:
        case ErrorClass::singular_operator:
        case ErrorClass::knot_collision:
        case ErrorClass::not_separated:
        case ErrorClass::degenerate_center:
        case ErrorClass::ill_conditioned:
        case ErrorClass::magnitude_overflow:
        case ErrorClass::conditioning_warning:
        case ErrorClass::rank_overflow:
            return true;
        default:
            return false;
    }
}

class Error : public std::runtime_error
{
public:
    Error(ErrorClass cls, const std::string& what)
        : std::runtime_error(std::string(token(cls)) + ": " + what), m_class(cls)
    {
    }

    ErrorClass error_class() const noexcept
    {
        return m_class;
    }

private:
    ErrorClass m_class;
};

[[noreturn]] inline void fail(ErrorClass cls, const std::string& what)
{
    throw Error(cls, what);
}

inline void require(bool cond, ErrorClass cls, const std::string& what)
{
    if (!cond)
    {
        fail(cls, what);
    }
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x)
{
    for (Index j = 0; j < x.cols(); ++j)
    {
        for (Index i = 0; i < x.rows(); ++i)
        {
            const cplx v = x(i, j);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            {
                return false;
            }
        }
    }
    return true;
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& x, const char* what)
{
    require(all_finite(x), ErrorClass::invalid_argument,
            std::string(what) + " has non-finite entries");
}

} // namespace structkit

#endif // STRUCTKIT_TYPES_HPP
