#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "structkit/core_fft.hpp"

using namespace structkit;
using oracle::cplx;

namespace
{

ComplexVector vec(std::initializer_list<cplx> v)
{
    ComplexVector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (cplx x : v)
        out(i++) = x;
    return out;
}

double err(const ComplexVector& a, const ComplexVector& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("dft of unit vectors and constants")
{
    const cplx I(0.0, 1.0);
    CHECK(err(dft(vec({1, 0, 0, 0})), vec({1, 1, 1, 1})) < 1e-15);
    CHECK(err(dft(vec({1, 1, 1, 1})), vec({4, 0, 0, 0})) < 1e-14);
    CHECK(err(dft(vec({0, 1, 0, 0})), vec({1, I, -1.0, -I})) < 1e-15);
    CHECK(err(idft(vec({4, 0, 0, 0})), vec({1, 1, 1, 1})) < 1e-15);
    CHECK(err(idft(vec({1, 1, 1, 1})), vec({1, 0, 0, 0})) < 1e-15);
}

TEST_CASE("dft matches the dense transform for awkward lengths")
{
    std::mt19937_64 rng(3);
    for (long n : {1, 2, 3, 5, 8, 12, 17, 31, 64, 100})
    {
        const oracle::Vec v = oracle::random_vec(n, rng);
        CHECK(err(dft(v), oracle::dft(n) * v) < 1e-12 * n);
        CHECK(err(idft(v), oracle::dft(n).adjoint() * v / static_cast<double>(n)) < 1e-12 * n);
        CHECK(err(idft(dft(v)), v) < 1e-12);
    }
    CHECK_THROWS_AS(dft(ComplexVector(0)), Error);
}

TEST_CASE("f-circulant products")
{
    const ComplexVector u = vec({2, 3, 5});
    CHECK(err(f_circulant_matvec(1.0, vec({1, 0, 0}), u), u) < 1e-14);
    CHECK(err(f_circulant_matvec(1.0, vec({0, 1, 0}), u), vec({5, 2, 3})) < 1e-14);
    CHECK(test::thrown_class([&] { f_circulant_matvec(0.0, u, u); }) ==
          ErrorClass::invalid_scalar);

    std::mt19937_64 rng(5);
    for (cplx f : {cplx(1.0), cplx(0.7, 0.4), cplx(-1.3)})
    {
        const long n         = 16;
        const oracle::Vec v  = oracle::random_vec(n, rng);
        const oracle::Vec x  = oracle::random_vec(n, rng);
        const cplx fn        = std::pow(f, static_cast<double>(n));
        const oracle::Mat zc = oracle::circulant(fn, v);
        CHECK(err(f_circulant_matvec(f, v, x), zc * x) < 1e-12);
        CHECK(err(circulant_apply(fn, v, x), zc * x) < 1e-11);
        CHECK(err(circulant_apply_transposed(fn, v, x), zc.transpose() * x) < 1e-11);
    }
    // e = 0 is the lower triangular Toeplitz case
    const oracle::Vec v = oracle::random_vec(9, rng);
    const oracle::Vec x = oracle::random_vec(9, rng);
    CHECK(err(circulant_apply(0.0, v, x), oracle::circulant(0.0, v) * x) < 1e-12);
}

TEST_CASE("Toeplitz products")
{
    const ComplexVector e1 = vec({1, 0, 0});
    const ComplexVector u  = vec({2, 3, 5});
    CHECK(err(toeplitz_matvec(e1, e1, u), u) < 1e-14);
    CHECK(err(toeplitz_matvec(vec({0, 1, 0}), vec({0, 0, 0}), u), vec({0, 2, 3})) < 1e-14);
    CHECK(test::thrown_class([&] { toeplitz_matvec(vec({1, 0}), vec({2, 0}), vec({1, 1})); }) ==
          ErrorClass::inconsistency);
    std::mt19937_64 rng(7);
    for (long n : {1, 2, 7, 32, 33})
    {
        oracle::Vec c = oracle::random_vec(n, rng), r = oracle::random_vec(n, rng);
        r(0)                = c(0);
        const oracle::Vec x = oracle::random_vec(n, rng);
        CHECK(err(toeplitz_matvec(c, r, x), oracle::toeplitz(c, r) * x) < 1e-12);
    }
}

TEST_CASE("dense kernels")
{
    DenseMatrix m(2, 2);
    m << 1.0, 2.0, 3.0, 4.0;
    CHECK(err(dense_matvec(m, vec({1, 1})), vec({3, 7})) < 1e-15);
    CHECK(err(dense_matvec(DenseMatrix::Zero(2, 2), vec({1, 1})), vec({0, 0})) == 0.0);
    CHECK(err(dense_solve(DenseMatrix::Identity(3, 3), vec({1, 2, 3})).x, vec({1, 2, 3})) == 0.0);
    DenseMatrix d = DenseMatrix::Zero(2, 2);
    d(0, 0)       = 2.0;
    d(1, 1)       = 4.0;
    CHECK(err(dense_solve(d, vec({2, 4})).x, vec({1, 1})) < 1e-15);
    CHECK(test::thrown_class([&] { dense_solve(DenseMatrix::Ones(2, 2), vec({1, 1})); }) ==
          ErrorClass::singular_matrix);
}

TEST_CASE("unit roots are exact at large exponents")
{
    CHECK(std::abs(root_of_unity_pow(4, 1) - cplx(0.0, 1.0)) < 1e-16);
    CHECK(std::abs(root_of_unity_pow(8, 8000001) - root_of_unity(8)) < 1e-15);
    CHECK(std::abs(root_of_unity_pow(6, -1) - std::conj(root_of_unity(6))) < 1e-15);
}
