#include <doctest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "structkit/core_fft.hpp"
#include "structkit/hss.hpp"

using namespace structkit;
using oracle::cplx;

namespace
{

KnotSet single(cplx z)
{
    ComplexVector v(1);
    v << z;
    return KnotSet(v);
}

// Closed form of the rank bound, evaluated independently.
Index rank_oracle(double theta, double delta, double eps)
{
    const double r = std::log(4.0 / ((1.0 - theta) * delta * pi * eps)) / std::log(1.0 / theta);
    return r <= 0.0 ? 0 : static_cast<Index>(std::ceil(r));
}

} // namespace

TEST_CASE("separation certificates")
{
    const auto c = separation(single(2.0), single(0.5), 0.0);
    CHECK(c.theta == doctest::Approx(0.25));
    CHECK(c.delta == doctest::Approx(2.0));

    std::mt19937_64 rng(1);
    const auto c2 = separation(KnotSet(2.0 * oracle::circle_knots(10, rng)),
                               KnotSet(oracle::circle_knots(12, rng)), 0.0);
    CHECK(c2.theta == doctest::Approx(0.5));
    CHECK(c2.delta == doctest::Approx(2.0));
    CHECK(test::thrown_class([] { separation(single(0.0), single(1.0), 0.0); }) ==
          ErrorClass::degenerate_center);
}

TEST_CASE("Taylor low-rank factors")
{
    const auto b = taylor_low_rank(single(2.0), single(0.5), 0.0, 2);
    const cplx approx = (b.F * b.G.transpose())(0, 0);
    CHECK(std::abs(approx - 0.65625) < 1e-15);
    const double q = 0.25;
    CHECK(std::abs(1.0 / 1.5 - approx) == doctest::Approx(q * q * q / ((1 - q) * 2.0)));
    CHECK(b.error_bound == doctest::Approx(0.0625 / (0.75 * 2.0)));

    const auto exact = taylor_low_rank(single(2.0), single(0.0), 0.0, 0);
    CHECK(std::abs((exact.F * exact.G.transpose())(0, 0) - 0.5) == 0.0);

    CHECK(test::thrown_class([] { taylor_low_rank(single(1.0), single(2.0), 0.0, 3); }) ==
          ErrorClass::not_separated);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial)
    {
        oracle::Vec s = oracle::circle_knots(64, rng);
        oracle::Vec t = oracle::circle_knots(64, rng);
        for (Index i = 0; i < 64; ++i)
        {
            s(i) *= 3.0 + u(rng);
            t(i) *= u(rng);
        }
        const KnotSet ks(s), kt(t);
        const oracle::Mat C = oracle::cauchy(s, t);
        const auto cert     = separation(ks, kt, 0.0);
        REQUIRE(cert.theta <= 1.0 / 3.0);
        for (Index k = 1; k <= 20; ++k)
        {
            const auto lr = taylor_low_rank(ks, kt, 0.0, k);
            CHECK(oracle::max_abs(C - lr.F * lr.G.transpose()) <=
                  std::pow(cert.theta, static_cast<double>(k)) / ((1 - cert.theta) * cert.delta) *
                      (1 + 1e-12));
        }
    }
}

TEST_CASE("rank bound")
{
    CHECK(rank_bound(1.0 / 3.0, 0.01, 1e-8) == 22);
    CHECK(rank_oracle(1.0 / 3.0, 0.01, 1e-8) == 22);
    for (double eps : {1e-4, 1e-8, 1e-12})
        for (double delta : {0.001, 0.1, 2.0})
            for (double th : {0.1, 0.3, 0.5, 0.7})
                CHECK(rank_bound(th, delta, eps) == rank_oracle(th, delta, eps));
    CHECK(rank_bound(0.5, 1.0, 4.0 / (0.5 * pi)) == 0);
    Index prev = rank_bound(0.6, 0.1, 1e-8);
    for (double th : {0.5, 0.4, 0.3, 0.2, 0.1})
    {
        const Index r = rank_bound(th, 0.1, 1e-8);
        CHECK(r <= prev);
        prev = r;
    }
    CHECK(taylor_order(0.5, 1.0, 1e-3) == 11);
}

TEST_CASE("sector partitions")
{
    const KnotSet g8 = KnotSet::grid(1.0, 8);
    CHECK(test::thrown_class([&] { sector_partition(g8, g8, 4); }) ==
          ErrorClass::partition_too_coarse);
    const auto p = sector_partition(g8, g8, 4, 1.0, true);
    for (Index q = 0; q < 4; ++q)
    {
        CHECK(p.s_sectors[static_cast<size_t>(q)].size() == 2);
        CHECK(p.extended_rows(q).size() == 6);
        CHECK(p.admissible_rows(q).size() == 2);
        CHECK(p.t_sectors[static_cast<size_t>(q)].size() == 2);
    }
    const auto e = p.extended(0);
    CHECK(e[0] == 3);
    CHECK(e[1] == 0);
    CHECK(e[2] == 1);

    // all knots in one sector
    ComplexVector cl(5);
    for (Index i = 0; i < 5; ++i)
        cl(i) = std::polar(1.0, 0.01 * static_cast<double>(i + 1));
    const auto pc = sector_partition(KnotSet(cl), KnotSet::grid(root_of_unity(32), 16), 8);
    CHECK(pc.s_sectors[0].size() == 5);
    for (Index q = 2; q < 7; ++q)
        CHECK(pc.admissible_rows(q).size() == 5);

    const double mu = 0.5 * pi / 8, nu = 3 * pi / 8;
    CHECK(sector_theta(8) == doctest::Approx(2 * std::sin(mu) / std::sin(nu)));
    CHECK(sector_theta(8) < 1.0);
}

TEST_CASE("CV compression below the leaf threshold is exact")
{
    std::mt19937_64 rng(3);
    const oracle::Vec s = 1.5 * oracle::circle_knots(12, rng);
    const HssApprox h   = build_cv_hss(KnotSet(s), 1.0, 1e-8);
    CHECK(h.stats().admissible_blocks == 0);
    const oracle::Vec u = oracle::random_vec(12, rng);
    CHECK(test::max_err(h.apply(u), oracle::cauchy(s, oracle::grid(1.0, 12)) * u) < 1e-13);
}

TEST_CASE("CV compression certificates and accuracy")
{
    std::mt19937_64 rng(4);
    const Index n       = 256;
    const double eps    = 1e-8;
    const oracle::Vec s = 1.5 * oracle::circle_knots(n, rng);
    const HssApprox h   = build_cv_hss(KnotSet(s), 1.0, eps);
    const HssStats st   = h.stats();
    CHECK(st.admissible_blocks > 0);
    CHECK(st.max_bound <= eps);
    for (const HssBlock& b : h.blocks())
        if (b.low_rank)
            CHECK(b.bound <= eps);
    const oracle::Mat C = oracle::cauchy(s, oracle::grid(1.0, n));
    CHECK(oracle::max_abs(h.to_dense() - C) <= eps);
    const oracle::Vec u = oracle::random_vec(n, rng);
    CHECK(test::max_err(hss_matvec(h, u), C * u) <= n * eps * u.cwiseAbs().maxCoeff());
    CHECK(test::max_err(h.apply_transposed(u), C.transpose() * u) <=
          n * eps * u.cwiseAbs().maxCoeff());
    CHECK(test::max_err(h.apply(ComplexVector::Zero(n)), ComplexVector::Zero(n)) == 0.0);

    CHECK(test::thrown_class([&] { build_cv_hss(KnotSet(s), 1.0, 0.0); }) ==
          ErrorClass::invalid_tolerance);
    ComplexVector bad = s;
    bad(3)            = root_of_unity_pow(n, 5);
    CHECK(test::thrown_class([&] { build_cv_hss(KnotSet(bad), 1.0, eps); }) ==
          ErrorClass::knot_collision);
}

TEST_CASE("CV ranks grow slowly with n")
{
    std::mt19937_64 rng(5);
    Index r256 = 0, r4096 = 0;
    for (Index n : {256, 4096})
    {
        const HssApprox h = build_cv_hss(KnotSet(oracle::circle_knots(n, rng)), 1.0, 1e-8);
        (n == 256 ? r256 : r4096) = h.stats().max_rank;
    }
    CHECK(r4096 >= r256);
    // four doublings at no more than three per doubling
    CHECK(r4096 - r256 <= 12);
}

TEST_CASE("general geometries")
{
    std::mt19937_64 rng(6);
    const double eps = 1e-8;
    // real line: interleaved grids on [0, 1]
    const Index n = 256;
    oracle::Vec s(n), t(n);
    for (Index i = 0; i < n; ++i)
    {
        s(i) = (2.0 * i) / (2.0 * n);
        t(i) = (2.0 * i + 1) / (2.0 * n);
    }
    const HssApprox hr = real_line_hss(KnotSet(s), KnotSet(t), eps);
    CHECK(hr.stats().max_bound <= eps);
    CHECK(oracle::max_abs(hr.to_dense() - oracle::cauchy(s, t)) <= eps);
    for (const HssBlock& b : hr.blocks())
        if (b.low_rank)
            CHECK(b.k + 1 <= rank_bound(b.theta, b.delta, eps) + 1);

    // two separated intervals need one expansion
    oracle::Vec a(128), c(128);
    for (Index i = 0; i < 128; ++i)
    {
        a(i) = 10.0 + i / 128.0;
        c(i) = i / 128.0;
    }
    const HssApprox one = real_line_hss(KnotSet(a), KnotSet(c), eps);
    CHECK(one.stats().admissible_blocks == 1);
    CHECK(one.stats().dense_blocks == 0);

    // scattered knots in boxes
    oracle::Vec bs = oracle::random_vec(300, rng), bt = 3.0 + oracle::random_vec(200, rng).array();
    const HssApprox hb = HssApprox::build(KnotSet(bs), KnotSet(bt), eps);
    CHECK(oracle::max_abs(hb.to_dense() - oracle::cauchy(bs, bt)) <= eps);
}

TEST_CASE("compressed solves")
{
    std::mt19937_64 rng(7);
    const Index n       = 256;
    const oracle::Vec s = oracle::near_grid(n, rng);
    const auto h        = std::make_shared<const HssApprox>(build_cv_hss(KnotSet(s), 1.0, 1e-10));
    const oracle::Mat C = oracle::cauchy(s, oracle::grid(1.0, n));
    const oracle::Vec x = oracle::random_vec(n, rng);
    const oracle::Vec b = C * x;
    CHECK(test::rel_err(hss_solve(*h, b), x) <= 1e-5);

    // Cauchy-like with two terms
    const DenseMatrix F = oracle::random_mat(n, 2, rng), G = oracle::random_mat(n, 2, rng);
    const oracle::Mat M = F.col(0).asDiagonal() * C * G.col(0).asDiagonal() +
                          F.col(1).asDiagonal() * C * G.col(1).asDiagonal();
    const HssSolver sol(h, F, G, 1e-10);
    CHECK(test::rel_err(sol.solve(M * x), x) <= 1e-5);
    CHECK(test::rel_err(sol.solve_transposed(M.transpose() * x), x) <= 1e-5);
    CHECK(test::rel_err(sol.apply(x), M * x) <= 1e-8);
    const double kappa = M.norm() * M.inverse().norm();
    CHECK(sol.condition_estimate() <= kappa);
    CHECK(sol.condition_estimate() >= kappa / (10.0 * n));

    // small systems go through a dense factorization
    const oracle::Vec s8 = oracle::near_grid(8, rng);
    const HssApprox h8   = build_cv_hss(KnotSet(s8), 1.0, 1e-8);
    const oracle::Vec b8 = oracle::random_vec(8, rng);
    const oracle::Mat C8 = oracle::cauchy(s8, oracle::grid(1.0, 8));
    CHECK(test::max_err(hss_solve(h8, b8), C8.partialPivLu().solve(b8)) < 1e-10);

    // knots inside radius 0.3 make the CV matrix ill conditioned
    const oracle::Vec sin = 0.3 * oracle::circle_knots(64, rng).cwiseProduct(
                                      oracle::random_vec(64, rng).cwiseAbs().cast<cplx>());
    const oracle::Mat Cin = oracle::cauchy(sin, oracle::grid(1.0, 64));
    REQUIRE(Cin.norm() * Cin.inverse().norm() > 1.0 / (64 * 1e-8));
    const HssApprox hin = build_cv_hss(KnotSet(sin), 1.0, 1e-8);
    const auto cls      = test::thrown_class([&] { hss_solve(hin, oracle::random_vec(64, rng)); });
    CHECK((cls == ErrorClass::ill_conditioned || cls == ErrorClass::singular_matrix));
}
