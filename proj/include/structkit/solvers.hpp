///
/// \file solvers.hpp
///
/// Approximate matrix-vector products and solves with Cauchy, Cauchy-like
/// and Vandermonde matrices, polynomial and rational evaluation and
/// interpolation, and the Toeplitz solve pipeline.
///
/// Accuracy arguments named eps are entrywise tolerances on the compressed
/// Cauchy kernels; the resulting error contracts are stated per function.
///
#ifndef STRUCTKIT_SOLVERS_HPP
#define STRUCTKIT_SOLVERS_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "structkit/displacement.hpp"
#include "structkit/hss.hpp"
#include "structkit/knots.hpp"
#include "structkit/types.hpp"

namespace structkit
{

// ---------------------------------------------------------------------------
// CV matrices C_{s,e} = (1 / (s_i - e w^j))

/// Cached compressed form of C_{s,e}; keyed by (knot hash, e, eps).
std::shared_ptr<const HssApprox> cv_approximation(const KnotSet& s, cplx e, double eps);
/// Drops all cached approximations.
void clear_cv_cache();
/// Number of cached approximations, for tests.
std::size_t cv_cache_size();

/// C u with |error| <= n eps ||u||_inf per entry.
ComplexVector cv_matvec(const KnotSet& s, cplx e, const ComplexVector& u, double eps);
ComplexVector cv_transposed_matvec(const KnotSet& s, cplx e, const ComplexVector& u,
                                   double eps);
ComplexVector cv_solve(const KnotSet& s, cplx e, const ComplexVector& b, double eps);
ComplexVector cv_transposed_solve(const KnotSet& s, cplx e, const ComplexVector& b,
                                  double eps);

// ---------------------------------------------------------------------------
// Cauchy kernels over arbitrary knots, compressed with a geometry picked from
// the knots (angular, interval or box clusters).

ComplexVector cauchy_matvec(const KnotSet& s, const KnotSet& t, const ComplexVector& u,
                            double eps);
ComplexVector cauchy_transposed_matvec(const KnotSet& s, const KnotSet& t,
                                       const ComplexVector& u, double eps);

///
/// M = sum_j diag(f_j) C_{s,t} diag(g_j), the Cauchy-like matrix of a
/// generator under (D_s, D_t).
///
struct CauchyLikeOperand
{
    KnotSet s;
    KnotSet t;
    DenseMatrix F;
    DenseMatrix G;
};

/// Unit generator F = G = ones, for plain Cauchy matrices.
CauchyLikeOperand cauchy_operand(const KnotSet& s, const KnotSet& t);

DenseMatrix cauchy_like_dense(const CauchyLikeOperand& m);

///
/// M u as d scaled Cauchy products. The entrywise kernel tolerance is set so
/// |Mu - approx|_inf <= eps * n * ||u||_inf * scale, with
/// scale = max|F| max|G| d; the returned bound reports that value.
///
struct ApproxResult
{
    ComplexVector value;
    /// Upper bound on the infinity-norm error of value.
    double error_bound = 0.0;
    /// Amplification factor estimate of the route, 1 when none applies.
    double amplification = 1.0;
    std::string route;
};

ApproxResult cauchy_like_matvec(const CauchyLikeOperand& m, const ComplexVector& u,
                                double eps);
ComplexVector cauchy_like_transposed_matvec(const CauchyLikeOperand& m, const ComplexVector& u,
                                            double eps);

///
/// Compressed solve with a square Cauchy-like matrix. The matrix is
/// represented in hierarchical form and solved with a recursive
/// low-rank-update elimination; ill-conditioned raises.
///
ComplexVector cauchy_like_solve(const CauchyLikeOperand& m, const ComplexVector& b, double eps);
ComplexVector cauchy_like_transposed_solve(const CauchyLikeOperand& m, const ComplexVector& b,
                                           double eps);

// ---------------------------------------------------------------------------
// Vandermonde V_s = (s_i^j)

/// Auxiliary scalar f with f^n on a 4n-point grid maximizing min |s_i^n - f^n|.
cplx vandermonde_auxiliary_scalar(const KnotSet& s);

ComplexVector vandermonde_matvec(const KnotSet& s, const ComplexVector& u, double eps);
ComplexVector vandermonde_transposed_matvec(const KnotSet& s, const ComplexVector& u,
                                            double eps);
ComplexVector vandermonde_solve(const KnotSet& s, const ComplexVector& b, double eps);
ComplexVector vandermonde_transposed_solve(const KnotSet& s, const ComplexVector& b,
                                           double eps);

// ---------------------------------------------------------------------------
// Moebius reductions

struct LineMap
{
    KnotSet real_knots;
    /// C_{s,t} = scale * C_{s',t'}.
    cplx scale;
};

/// s' = (s - c) / a for knots on the line c + a R, |a| = 1.
LineMap mobius_line_to_real(const KnotSet& knots, cplx c, cplx a);

struct CircleMap
{
    KnotSet real_knots;
    /// Per-knot factors: 1/(s - t) = u_i v_j / (s' - t') with u from the row
    /// set and v from the column set.
    ComplexVector row_factor;
    ComplexVector col_factor;
};

/// s' = i (s + a) / (s - a) for knots on the unit circle, |a| = 1.
CircleMap mobius_circle_to_real(const KnotSet& knots, cplx a);

/// Point of the unit circle farthest from all knots, over a fine grid.
cplx farthest_circle_point(const KnotSet& knots);

/// Line c + a R through the knots, when they are collinear within 1e-10.
struct LineFit
{
    cplx c;
    cplx a;
};
std::optional<LineFit> detect_line(const KnotSet& knots);
/// True when all knots lie on the unit circle within 1e-10.
bool on_unit_circle(const KnotSet& knots);

struct AnyKnotsOptions
{
    /// Amplification above this raises conditioning-warning.
    double max_amplification = 1e8;
};

///
/// Cauchy-like products and solves for knots on a line, on the unit circle,
/// or arbitrary. Line and circle knots are mapped to the real line; other
/// knots are re-knotted onto a unit-root grid, and the amplification
/// ||C|| ||C^{-1}|| of that step is reported.
///
ApproxResult cauchy_any_knots_matvec(const CauchyLikeOperand& m, const ComplexVector& u,
                                     double eps, const AnyKnotsOptions& opt = {});
ApproxResult cauchy_any_knots_solve(const CauchyLikeOperand& m, const ComplexVector& b,
                                    double eps, const AnyKnotsOptions& opt = {});

// ---------------------------------------------------------------------------
// Polynomials and rational functions

/// p(s_i) for coefficients p ascending.
ComplexVector poly_multipoint_eval(const ComplexVector& p, const KnotSet& s, double eps);
/// Coefficients of the degree < n polynomial with p(s_i) = v_i.
ComplexVector poly_interpolate(const KnotSet& s, const ComplexVector& v, double eps);

/// sum_j u_j / (s_i - t_j).
ComplexVector rational_eval(const KnotSet& s, const KnotSet& t, const ComplexVector& u,
                            double eps);
/// u with sum_j u_j / (s_i - t_j) = v_i.
ComplexVector rational_interpolate(const KnotSet& s, const KnotSet& t, const ComplexVector& v,
                                   double eps);

struct LogKernelResult
{
    /// prod_j (s_i - t_j).
    ComplexVector values;
    /// Coefficients of t(x) - x^n when the targets are unit roots, else empty.
    ComplexVector coefficients;
};

///
/// Values of t(x) = prod_j (x - t_j) at the targets through a compressed sum
/// of ln(s_i - t_j). The optional branch_shift adds 2 pi i k_ij to term
/// (i, j), for testing that the result does not depend on the branch.
///
LogKernelResult log_kernel_eval_from_roots(
    const KnotSet& roots, const KnotSet& targets, double eps,
    const std::function<long(Index, Index)>& branch_shift = nullptr);

// ---------------------------------------------------------------------------

/// Generator of the Toeplitz matrix under (Z_1, Z_{-1}); length 2.
DisplacementGenerator toeplitz_generator(const ComplexVector& first_col,
                                         const ComplexVector& first_row);

/// Solves M x = b for M given by a generator under (Z_1, Z_{-1}).
ComplexVector toeplitz_like_solve(const DisplacementGenerator& gen, const ComplexVector& b,
                                  double eps);

///
/// Solves T x = b for the Toeplitz matrix with the given first column and
/// row, through the Cauchy-like matrix Omega T D_0^H Omega^H.
///
ComplexVector toeplitz_solve(const ComplexVector& first_col, const ComplexVector& first_row,
                             const ComplexVector& b, double eps);

} // namespace structkit

#endif // STRUCTKIT_SOLVERS_HPP
