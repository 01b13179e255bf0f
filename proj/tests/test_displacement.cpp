#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "structkit/core_fft.hpp"
#include "structkit/displacement.hpp"

using namespace structkit;
using oracle::cplx;

namespace
{

struct Pattern
{
    const char* name;
    OperatorDescriptor A, B;
};

// All nine operator pairs on random data; the scalars differ so recovery is possible.
std::vector<Pattern> patterns(Index n, std::mt19937_64& rng)
{
    const cplx e(0.8, 0.6), f(-1.0, 0.0);
    ComplexVector s = oracle::circle_knots(n, rng);
    ComplexVector t = 2.0 * oracle::circle_knots(n, rng);
    const auto Zs   = OperatorDescriptor::shift(n, e);
    const auto Zf   = OperatorDescriptor::shift(n, f);
    const auto ZsT  = OperatorDescriptor::shift_transposed(n, e);
    const auto ZfT  = OperatorDescriptor::shift_transposed(n, f);
    const auto Ds   = OperatorDescriptor::diagonal(KnotSet(s));
    const auto Dt   = OperatorDescriptor::diagonal(KnotSet(t));
    return {{"zz", Zs, Zf},   {"ztzt", ZsT, ZfT}, {"zzt", Zs, ZfT},
            {"ztz", ZsT, Zf}, {"dz", Ds, Zf},     {"ztd", ZsT, Dt},
            {"zd", Zs, Dt},   {"dzt", Ds, ZfT},   {"dd", Ds, Dt}};
}

double rel(const DenseMatrix& a, const DenseMatrix& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

} // namespace

TEST_CASE("displacement of basic matrices")
{
    std::mt19937_64 rng(11);
    const Index n      = 6;
    const oracle::Vec s = oracle::circle_knots(n, rng);
    const oracle::Vec t = 0.5 * oracle::circle_knots(n, rng);
    const auto Ds       = OperatorDescriptor::diagonal(KnotSet(s));
    const auto Dt       = OperatorDescriptor::diagonal(KnotSet(t));
    const DenseMatrix d = displacement_dense(oracle::cauchy(s, t), Ds, Dt);
    CHECK((d - DenseMatrix::Ones(n, n)).norm() < 1e-12);

    const DenseMatrix I = DenseMatrix::Identity(n, n);
    const auto Z1       = OperatorDescriptor::shift(n, 1.0);
    const auto Zm1      = OperatorDescriptor::shift(n, -1.0);
    CHECK(displacement_dense(I, Z1, Z1).norm() == 0.0);
    DenseMatrix expect = DenseMatrix::Zero(n, n);
    expect(0, n - 1)   = 2.0;
    CHECK((displacement_dense(I, Z1, Zm1) - expect).norm() < 1e-15);

    CHECK((Z1.dense() - oracle::shift(n, 1.0)).norm() == 0.0);
    CHECK((OperatorDescriptor::shift_transposed(n, 2.0).dense() -
           oracle::shift(n, 2.0).transpose())
              .norm() == 0.0);
}

TEST_CASE("generators from dense matrices")
{
    std::mt19937_64 rng(12);
    const Index n       = 10;
    const oracle::Vec s = oracle::circle_knots(n, rng);
    const oracle::Vec t = 0.5 * oracle::circle_knots(n, rng);
    const auto g        = generator_from_dense(oracle::cauchy(s, t),
                                               OperatorDescriptor::diagonal(KnotSet(s)),
                                               OperatorDescriptor::diagonal(KnotSet(t)));
    CHECK(g.length() == 1);
    // F G^T = e e^T, so F and G are constant vectors
    CHECK((g.F * g.G.transpose() - DenseMatrix::Ones(n, n)).norm() < 1e-10);
    CHECK(g.tag() == StructureTag::cauchy);

    const auto gi = generator_from_dense(DenseMatrix::Identity(n, n),
                                         OperatorDescriptor::shift(n, 1.0),
                                         OperatorDescriptor::shift(n, -1.0));
    CHECK(gi.length() == 1);
    const auto g0 = generator_from_dense(DenseMatrix::Zero(n, n), OperatorDescriptor::shift(n, 1.0),
                                         OperatorDescriptor::shift(n, -1.0));
    CHECK(g0.length() == 0);
}

TEST_CASE("displacement ranks of the basic classes")
{
    std::mt19937_64 rng(13);
    for (Index n : {8, 31, 64})
    {
        oracle::Vec c = oracle::random_vec(n, rng), r = oracle::random_vec(n, rng);
        r(0)               = c(0);
        const DenseMatrix T = oracle::toeplitz(c, r);
        CHECK(generator_from_dense(T, OperatorDescriptor::shift(n, 1.0),
                                   OperatorDescriptor::shift(n, -1.0))
                  .length() <= 2);
        CHECK(generator_from_dense(oracle::reversal(n) * T, OperatorDescriptor::shift(n, 1.0),
                                   OperatorDescriptor::shift_transposed(n, -1.0))
                  .length() <= 2);
        const oracle::Vec s = oracle::circle_knots(n, rng);
        CHECK(generator_from_dense(oracle::vandermonde(s), OperatorDescriptor::diagonal(KnotSet(s)),
                                   OperatorDescriptor::shift(n, cplx(0.0, 1.0)))
                  .length() <= 1);
        const oracle::Vec t = 0.5 * oracle::circle_knots(n, rng);
        CHECK(generator_from_dense(oracle::cauchy(s, t), OperatorDescriptor::diagonal(KnotSet(s)),
                                   OperatorDescriptor::diagonal(KnotSet(t)))
                  .length() == 1);
    }
}

TEST_CASE("recovery round trip for every operator pair")
{
    std::mt19937_64 rng(14);
    for (Index n : {1, 2, 5, 16, 40})
    {
        for (const Pattern& p : patterns(n, rng))
        {
            CAPTURE(p.name);
            CAPTURE(n);
            const DenseMatrix M = oracle::random_mat(n, n, rng);
            const auto g        = generator_from_dense(M, p.A, p.B, 0.0);
            CHECK(rel(recover_dense(g), M) < 1e-10);
            // fast products agree with the recovered matrix
            const oracle::Vec u = oracle::random_vec(n, rng);
            CHECK(test::max_err(generator_matvec(g, u), M * u) < 1e-9 * M.norm() * u.norm());
            CHECK(test::max_err(generator_matvec_transposed(g, u), M.transpose() * u) <
                  1e-9 * M.norm() * u.norm());
        }
    }
}

TEST_CASE("recovery examples")
{
    std::mt19937_64 rng(15);
    const Index n       = 7;
    const oracle::Vec s = oracle::circle_knots(n, rng);
    const oracle::Vec t = 0.3 * oracle::circle_knots(n, rng);
    DisplacementGenerator g;
    g.A = OperatorDescriptor::diagonal(KnotSet(s));
    g.B = OperatorDescriptor::diagonal(KnotSet(t));
    g.F = DenseMatrix::Ones(n, 1);
    g.G = DenseMatrix::Ones(n, 1);
    CHECK(rel(recover_dense(g), oracle::cauchy(s, t)) < 1e-14);
    CHECK(test::max_err(generator_matvec(g, ComplexVector::Zero(n)), ComplexVector::Zero(n)) == 0.0);

    const auto id = identity_generator(n, 1.0, -1.0);
    CHECK(id.F(0, 0) == cplx(2.0));
    CHECK(id.G(n - 1, 0) == cplx(1.0));
    CHECK(rel(recover_dense(id), DenseMatrix::Identity(n, n)) < 1e-14);
    const oracle::Vec u = oracle::random_vec(n, rng);
    CHECK(test::max_err(generator_matvec(id, u), u) < 1e-13);
}

TEST_CASE("fast product on a CV generator")
{
    std::mt19937_64 rng(16);
    const Index n = 128;
    DisplacementGenerator g;
    g.A = OperatorDescriptor::diagonal(KnotSet(1.4 * oracle::circle_knots(n, rng)));
    g.B = OperatorDescriptor::diagonal(KnotSet::grid(1.0, n));
    g.F = oracle::random_mat(n, 2, rng);
    g.G = oracle::random_mat(n, 2, rng);
    CHECK(g.tag() == StructureTag::fc);
    const oracle::Vec u = oracle::random_vec(n, rng);
    MatvecOptions o;
    o.direct_threshold = 16;
    o.epsilon          = 1e-12;
    CHECK(test::max_err(generator_matvec(g, u, o), recover_dense(g) * u) < 1e-9 * u.norm());
}

TEST_CASE("transpose, product and inverse")
{
    std::mt19937_64 rng(17);
    const Index n = 32;
    for (const Pattern& p : patterns(n, rng))
    {
        CAPTURE(p.name);
        const DenseMatrix M = oracle::random_mat(n, n, rng);
        const auto g        = generator_from_dense(M, p.A, p.B, 0.0);
        const auto gt       = generator_transpose(g);
        CHECK(gt.length() == g.length());
        CHECK(rel(recover_dense(gt), M.transpose()) < 1e-10);
        CHECK(rel(recover_dense(generator_transpose(gt)), M) < 1e-10);
    }

    // Cauchy transpose: C_{s,t}^T = -C_{t,s}
    const oracle::Vec s = oracle::circle_knots(9, rng);
    const oracle::Vec t = 0.5 * oracle::circle_knots(9, rng);
    DisplacementGenerator c;
    c.A = OperatorDescriptor::diagonal(KnotSet(s));
    c.B = OperatorDescriptor::diagonal(KnotSet(t));
    c.F = DenseMatrix::Ones(9, 1);
    c.G = DenseMatrix::Ones(9, 1);
    CHECK(rel(recover_dense(generator_transpose(c)), -oracle::cauchy(t, s)) < 1e-13);

    // product of a Toeplitz-like and a Vandermonde-like matrix through Z_{-1}
    const auto A  = OperatorDescriptor::shift(n, 1.0);
    const auto B  = OperatorDescriptor::shift(n, -1.0);
    const auto Ds = OperatorDescriptor::diagonal(KnotSet(oracle::circle_knots(n, rng)));
    const DenseMatrix M = oracle::random_mat(n, n, rng);
    const DenseMatrix N = oracle::random_mat(n, n, rng);
    const auto gm       = generator_from_dense(M, Ds, A, 0.0);
    const auto gn       = generator_from_dense(N, A, B, 0.0);
    const auto prod     = generator_product(gm, gn);
    CHECK(prod.length() == gm.length() + gn.length());
    CHECK(rel(recover_dense(prod), M * N) < 1e-9);
    // N = I as the zero-length generator
    CHECK(rel(recover_dense(generator_product(gm, scaled_identity(A))), M) < 1e-12);

    // inverse
    const auto gi  = generator_inverse(gn, dense_solver(gn));
    CHECK(gi.length() == gn.length());
    CHECK(rel(recover_dense(gi), N.inverse()) < 1e-8);
    CHECK(rel(recover_dense(generator_inverse(gi, dense_solver(gi))), N) < 1e-8);
    const auto id = identity_generator(n, 1.0, -1.0);
    CHECK(rel(recover_dense(generator_inverse(id, dense_solver(id))), DenseMatrix::Identity(n, n)) <
          1e-12);

    // interleaved knots keep the Cauchy matrix well conditioned
    const oracle::Vec s16 = oracle::grid(1.0, 16);
    const oracle::Vec t16 = oracle::grid(oracle::unit_root(32, 1), 16);
    DisplacementGenerator c16;
    c16.A = OperatorDescriptor::diagonal(KnotSet(s16));
    c16.B = OperatorDescriptor::diagonal(KnotSet(t16));
    c16.F = DenseMatrix::Ones(16, 1);
    c16.G = DenseMatrix::Ones(16, 1);
    const DenseMatrix ci = recover_dense(generator_inverse(c16, dense_solver(c16)));
    CHECK((oracle::cauchy(s16, t16) * ci - DenseMatrix::Identity(16, 16)).norm() < 1e-8);
}

TEST_CASE("shift adjustment")
{
    std::mt19937_64 rng(18);
    const Index n = 20;
    const auto g  = identity_generator(n, 1.0, -1.0);
    const auto same = operator_shift_adjust(g, -1.0);
    CHECK(same.length() == g.length());
    CHECK((same.F - g.F).norm() == 0.0);

    const auto from_zero = operator_shift_adjust(scaled_identity(OperatorDescriptor::shift(n, 1.0)), -1.0);
    REQUIRE(from_zero.length() == 1);
    CHECK(rel(from_zero.F * from_zero.G.transpose(), 2.0 * (DenseMatrix::Identity(n, n).col(0) *
                                                           DenseMatrix::Identity(n, n).row(n - 1))) <
          1e-14);

    oracle::Vec c = oracle::random_vec(n, rng), r = oracle::random_vec(n, rng);
    r(0)                = c(0);
    const DenseMatrix T = oracle::toeplitz(c, r);
    const auto gt       = generator_from_dense(T, OperatorDescriptor::shift(n, 1.0),
                                               OperatorDescriptor::shift(n, -1.0));
    REQUIRE(gt.length() == 2);
    for (Side side : {Side::right, Side::left})
    {
        const auto adj = operator_shift_adjust(gt, cplx(0.3, 0.7), side);
        CHECK(adj.length() <= 3);
        CHECK(rel(recover_dense(adj), T) < 1e-10);
    }
}

TEST_CASE("row permutations keep the structure")
{
    std::mt19937_64 rng(19);
    const Index n       = 24;
    const oracle::Vec s = oracle::circle_knots(n, rng);
    const DenseMatrix M = oracle::random_mat(n, n, rng);
    const auto g = generator_from_dense(M, OperatorDescriptor::diagonal(KnotSet(s)),
                                        OperatorDescriptor::shift(n, -1.0), 0.0);
    std::vector<Index> perm(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i)
        perm[static_cast<size_t>(i)] = (7 * i) % n;
    DisplacementGenerator p = g;
    p.A                     = OperatorDescriptor::diagonal(g.A.knots().permuted(perm));
    DenseMatrix PM(n, n);
    for (Index i = 0; i < n; ++i)
    {
        p.F.row(i) = g.F.row(perm[static_cast<size_t>(i)]);
        PM.row(i)  = M.row(perm[static_cast<size_t>(i)]);
    }
    CHECK(rel(recover_dense(p), PM) < 1e-10);
}

TEST_CASE("generator text form")
{
    std::mt19937_64 rng(20);
    for (const Pattern& p : patterns(6, rng))
    {
        const auto g = generator_from_dense(oracle::random_mat(6, 6, rng), p.A, p.B, 0.0);
        std::stringstream ss;
        write_generator(ss, g);
        const auto r = read_generator(ss);
        CHECK(r.A.same_as(g.A));
        CHECK(r.B.same_as(g.B));
        CHECK((r.F - g.F).norm() == 0.0);
        CHECK((r.G - g.G).norm() == 0.0);
    }
}

TEST_CASE("recompression drops negligible columns")
{
    std::mt19937_64 rng(21);
    DisplacementGenerator g = identity_generator(10, 1.0, -1.0);
    g.F.conservativeResize(10, 3);
    g.G.conservativeResize(10, 3);
    g.F.col(1) = g.F.col(0);
    g.G.col(1) = oracle::random_vec(10, rng);
    g.F.col(2) = g.F.col(0);
    g.G.col(2) = -g.G.col(1);
    const auto r = recompress(g, 1e-12);
    CHECK(r.length() == 1);
    CHECK(rel(recover_dense(r), DenseMatrix::Identity(10, 10)) < 1e-12);
}
