#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "structkit/core_fft.hpp"
#include "structkit/knots.hpp"
#include "structkit/text_io.hpp"

using namespace structkit;
using oracle::cplx;

TEST_CASE("knot sets reject exact duplicates")
{
    ComplexVector v(3);
    v << 1.0, cplx(0.0, 1.0), 1.0;
    CHECK(test::thrown_class([&] { KnotSet k(v); }) == ErrorClass::knot_collision);
    v(2) = -1.0;
    const KnotSet k(v);
    CHECK(k.size() == 3);
    CHECK(k.max_magnitude() == doctest::Approx(1.0));
    CHECK(k.angles()(1) == doctest::Approx(pi / 2));
    CHECK(!k.is_real());
}

TEST_CASE("grids are recognized")
{
    const cplx e = std::polar(1.3, 0.2);
    const KnotSet g = KnotSet::grid(e, 16);
    REQUIRE(g.grid_scalar().has_value());
    CHECK(std::abs(*g.grid_scalar() - e) < 1e-12);
    std::mt19937_64 rng(1);
    CHECK(!KnotSet(oracle::circle_knots(16, rng)).grid_scalar().has_value());
    // a permuted grid is not the grid
    CHECK(!g.permuted({1, 0, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}).grid_scalar());
}

TEST_CASE("disjointness")
{
    const KnotSet s = KnotSet::grid(1.0, 8);
    CHECK(test::thrown_class([&] { check_disjoint(s, KnotSet::grid(1.0, 4)); }) ==
          ErrorClass::knot_collision);
    const DisjointReport r = check_disjoint(s, KnotSet::grid(root_of_unity(16), 8));
    CHECK(r.min_distance == doctest::Approx(2.0 * std::sin(pi / 16)));
    CHECK(!r.near_coincidence);
    ComplexVector t(1);
    t << 1.0 + 1e-16;
    t(0) += cplx(0.0, 1e-17);
    CHECK(check_disjoint(s, KnotSet(t)).near_coincidence);
}

TEST_CASE("dense constructions and direct kernels")
{
    std::mt19937_64 rng(2);
    const oracle::Vec s = oracle::random_vec(12, rng);
    const oracle::Vec t = oracle::circle_knots(9, rng);
    const KnotSet ks(s), kt(t);
    CHECK((cauchy_matrix(ks, kt) - oracle::cauchy(s, t)).norm() < 1e-12);
    CHECK((vandermonde_matrix(ks) - oracle::vandermonde(s)).norm() < 1e-12);
    CHECK((vandermonde_matrix(ks, 5) - oracle::vandermonde(s, 5)).norm() < 1e-12);
    const oracle::Vec u = oracle::random_vec(9, rng);
    const oracle::Vec w = oracle::random_vec(12, rng);
    CHECK(test::max_err(cauchy_apply_direct(ks, kt, u), oracle::cauchy(s, t) * u) < 1e-12);
    CHECK(test::max_err(cauchy_transposed_apply_direct(ks, kt, w),
                        oracle::cauchy(s, t).transpose() * w) < 1e-12);
    CHECK(test::max_err(vandermonde_apply_direct(ks, w), oracle::vandermonde(s) * w) < 1e-12);
    CHECK(test::max_err(vandermonde_transposed_apply_direct(ks, w),
                        oracle::vandermonde(s).transpose() * w) < 1e-12);
    const ComplexVector p = knot_powers(ks, 13);
    for (Index i = 0; i < 12; ++i)
        CHECK(std::abs(p(i) - std::pow(s(i), 13)) < 1e-12 * std::max(1.0, std::abs(p(i))));
}

TEST_CASE("text vectors and matrices round trip")
{
    ComplexVector v(3);
    v << cplx(1.5, -2.0), cplx(0.1, 1e-300), cplx(-3e10, 7.25);
    std::stringstream ss;
    write_vector(ss, v);
    CHECK(read_vector(ss) == v);

    std::istringstream in("1 0\n0 1\n2.5 -1\n");
    const ComplexVector r = read_vector(in);
    REQUIRE(r.size() == 3);
    CHECK(r(1) == cplx(0.0, 1.0));

    DenseMatrix m(2, 3);
    m << 1.0, 2.0, cplx(0, 3), 4.0, 5.0, 6.0;
    std::stringstream sm;
    write_matrix(sm, m);
    CHECK(read_matrix(sm) == m);

    std::istringstream bad("1 0\n2 x\n");
    CHECK(test::thrown_class([&] { read_vector(bad); }).has_value());
}
