#ifndef STRUCTKIT_TESTS_HELPERS_HPP
#define STRUCTKIT_TESTS_HELPERS_HPP

#include <optional>

#include "structkit/types.hpp"

namespace test
{

// Class of the structkit::Error thrown by f, or nothing when f returns.
template <class F>
std::optional<structkit::ErrorClass> thrown_class(F&& f)
{
    try
    {
        f();
    }
    catch (const structkit::Error& e)
    {
        return e.error_class();
    }
    return std::nullopt;
}

inline double max_err(const structkit::ComplexVector& a, const structkit::ComplexVector& b)
{
    return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

inline double rel_err(const structkit::ComplexVector& a, const structkit::ComplexVector& b)
{
    return (a - b).norm() / b.norm();
}

} // namespace test

#endif
