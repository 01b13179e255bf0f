#include "structkit/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "structkit/core_fft.hpp"
#include "structkit/solvers.hpp"

namespace structkit
{

namespace
{

// Sizes up to this use exact O(n^2) Vandermonde and Cauchy sums.
constexpr Index direct_cut = 2048;

DenseMatrix reverse_rows(const DenseMatrix& m)
{
    return m.colwise().reverse();
}

DenseMatrix v_mul(const KnotSet& s, const DenseMatrix& x, double eps)
{
    DenseMatrix out(s.size(), x.cols());
    for (Index j = 0; j < x.cols(); ++j)
    {
        out.col(j) = s.size() <= direct_cut ? vandermonde_apply_direct(s, x.col(j))
                                            : vandermonde_matvec(s, x.col(j), eps);
    }
    return out;
}

DenseMatrix vt_mul(const KnotSet& s, const DenseMatrix& x, double eps)
{
    DenseMatrix out(s.size(), x.cols());
    for (Index j = 0; j < x.cols(); ++j)
    {
        out.col(j) = s.size() <= direct_cut ? vandermonde_transposed_apply_direct(s, x.col(j))
                                            : vandermonde_transposed_matvec(s, x.col(j), eps);
    }
    return out;
}

// V_t^{-1} X or V_t^{-T} X. Grid knots f w^j give V_t = Omega diag(f^j).
DenseMatrix v_solve(const KnotSet& t, const DenseMatrix& x, bool transposed, double eps)
{
    const Index n = t.size();
    if (const auto f = t.grid_scalar())
    {
        ComplexVector finv(n);
        cplx p = 1.0;
        for (Index j = 0; j < n; ++j)
        {
            finv(j) = 1.0 / p;
            p *= *f;
        }
        if (!transposed)
        {
            return finv.asDiagonal() * idft_columns(x);
        }
        return idft_columns(finv.asDiagonal() * x);
    }
    if (n <= 512)
    {
        const DenseLU lu(vandermonde_matrix(t));
        return transposed ? lu.solve_transposed(x) : lu.solve(x);
    }
    DenseMatrix out(n, x.cols());
    for (Index j = 0; j < x.cols(); ++j)
    {
        out.col(j) = transposed ? vandermonde_transposed_solve(t, x.col(j), eps)
                                : vandermonde_solve(t, x.col(j), eps);
    }
    return out;
}

// Appends the column pair (f, g) unless f g^T is negligible next to F G^T.
void append(DisplacementGenerator& out, const DenseMatrix& f0, const DenseMatrix& g0,
            const ComplexVector& f, const ComplexVector& g)
{
    const double scale = std::max(1.0, f0.cwiseAbs().maxCoeff() * g0.cwiseAbs().maxCoeff());
    const double mag   = f.cwiseAbs().maxCoeff() * g.cwiseAbs().maxCoeff();
    const Index d      = f0.cols();
    const bool keep    = !(mag < 1e-14 * scale) || d == 0;
    out.F.resize(f0.rows(), d + (keep ? 1 : 0));
    out.G.resize(g0.rows(), d + (keep ? 1 : 0));
    out.F.leftCols(d) = f0;
    out.G.leftCols(d) = g0;
    if (keep)
    {
        out.F.col(d) = f;
        out.G.col(d) = g;
    }
}

// alpha I under (A, A) carries no displacement; move B off A first.
DisplacementGenerator regularize(const DisplacementGenerator& gen, const MatvecOptions& opt)
{
    if (!gen.identity_scale)
    {
        return gen;
    }
    require(gen.B.is_shift(), ErrorClass::class_mismatch,
            "a scaled identity under diagonal operators has no transformable generator");
    const cplx e = gen.B.scalar();
    return operator_shift_adjust(gen, e == 0.0 ? cplx(1.0) : -e, Side::right, opt);
}

bool plain_shift(const OperatorDescriptor& op)
{
    return op.kind() == OperatorKind::shift;
}

bool transposed_shift(const OperatorDescriptor& op)
{
    return op.kind() == OperatorKind::shift_transposed;
}

bool diag_op(const OperatorDescriptor& op)
{
    return op.kind() == OperatorKind::diagonal;
}

cplx nth_root(cplx z, Index n)
{
    return std::polar(std::pow(std::abs(z), 1.0 / static_cast<double>(n)),
                      std::arg(z) / static_cast<double>(n));
}

// A grid whose n-th powers avoid the scalar e.
KnotSet default_row_knots(Index n, cplx e)
{
    const cplx f = e == 0.0 ? cplx(1.0) : nth_root(-e / std::abs(e), n);
    return KnotSet::grid(f, n);
}

} // namespace

DisplacementGenerator toeplitz_hankel_swap(const DisplacementGenerator& in, Side side,
                                           const MatvecOptions& opt)
{
    const DisplacementGenerator gen = regularize(in, opt);
    gen.validate();
    DisplacementGenerator out = gen;
    if (side == Side::left)
    {
        require(gen.A.is_shift() && gen.B.is_shift(), ErrorClass::class_mismatch,
                "J M needs a Toeplitz or Hankel generator");
        out.A = gen.A.transposed();
        out.F = reverse_rows(gen.F);
    }
    else
    {
        require(gen.A.is_shift() && gen.B.is_shift(), ErrorClass::class_mismatch,
                "M J needs a Toeplitz or Hankel generator");
        out.B = gen.B.transposed();
        out.G = reverse_rows(gen.G);
    }
    return out;
}

DisplacementGenerator toeplitz_to_vandermonde(const DisplacementGenerator& in, const KnotSet& s,
                                              const MatvecOptions& opt)
{
    const DisplacementGenerator gen = regularize(in, opt);
    gen.validate();
    require(plain_shift(gen.A) && plain_shift(gen.B), ErrorClass::class_mismatch,
            "V M needs a generator under (Z_e, Z_f)");
    const Index n = gen.rows();
    require(s.size() == n, ErrorClass::dimension, "knot count differs from matrix size");
    const cplx e          = gen.A.scalar();
    const ComplexVector w = (knot_powers(s, n).array() - e).matrix();
    if (w.cwiseAbs().minCoeff() == 0.0)
    {
        fail(ErrorClass::singular_operator, "s_i^n = e for some knot");
    }
    DisplacementGenerator out;
    out.A = OperatorDescriptor::diagonal(s);
    out.B = gen.B;
    const ComplexVector last_row =
        generator_matvec_transposed(gen, ComplexVector::Unit(n, n - 1), opt);
    append(out, v_mul(s, gen.F, opt.epsilon), gen.G, w, last_row);
    return out;
}

DisplacementGenerator vandermonde_to_hankel(const DisplacementGenerator& gen, cplx e,
                                            const MatvecOptions& opt)
{
    gen.validate();
    require(diag_op(gen.A) && plain_shift(gen.B), ErrorClass::class_mismatch,
            "V^T M needs a generator under (D_s, Z_f)");
    const Index n    = gen.rows();
    const KnotSet& s = gen.A.knots();
    require(e != gen.B.scalar(), ErrorClass::singular_operator,
            "the new scalar must differ from the right shift scalar");
    const ComplexVector w = (e - knot_powers(s, n).array()).matrix();
    DisplacementGenerator out;
    out.A = OperatorDescriptor::shift_transposed(n, e);
    out.B = gen.B;
    append(out, vt_mul(s, gen.F, opt.epsilon), gen.G, ComplexVector::Unit(n, n - 1),
           generator_matvec_transposed(gen, w, opt));
    return out;
}

DisplacementGenerator vandermonde_to_cauchy(const DisplacementGenerator& gen, const KnotSet& t,
                                            VandermondeVariant variant, const MatvecOptions& opt)
{
    gen.validate();
    require(diag_op(gen.A) && plain_shift(gen.B), ErrorClass::class_mismatch,
            "the map to Cauchy needs a generator under (D_s, Z_e)");
    const Index n = gen.cols();
    require(t.size() == n, ErrorClass::dimension, "knot count differs from matrix size");
    check_disjoint(gen.A.knots(), t);
    const cplx e          = gen.B.scalar();
    const ComplexVector w = (e - knot_powers(t, n).array()).matrix();
    DisplacementGenerator out;
    out.A = gen.A;
    out.B = OperatorDescriptor::diagonal(t);
    if (variant == VandermondeVariant::jvt)
    {
        append(out, gen.F, v_mul(t, reverse_rows(gen.G), opt.epsilon),
               generator_matvec(gen, ComplexVector::Unit(n, 0), opt), w);
    }
    else
    {
        const ComplexVector y = v_solve(t, w, false, opt.epsilon);
        append(out, gen.F, v_solve(t, gen.G, true, opt.epsilon), generator_matvec(gen, y, opt),
               v_solve(t, ComplexVector::Unit(n, n - 1), true, opt.epsilon));
    }
    return out;
}

DisplacementGenerator cauchy_to_vandermonde(const DisplacementGenerator& gen, cplx e,
                                            const MatvecOptions& opt)
{
    gen.validate();
    require(diag_op(gen.A) && diag_op(gen.B) && !gen.identity_scale, ErrorClass::class_mismatch,
            "M V needs a generator under (D_s, D_t)");
    const Index n         = gen.cols();
    const KnotSet& t      = gen.B.knots();
    const ComplexVector w = (knot_powers(t, n).array() - e).matrix();
    DisplacementGenerator out;
    out.A = gen.A;
    out.B = OperatorDescriptor::shift(n, e);
    append(out, gen.F, vt_mul(t, gen.G, opt.epsilon), generator_matvec(gen, w, opt),
           ComplexVector::Unit(n, n - 1));
    return out;
}

DisplacementGenerator toeplitz_to_cauchy_dft(const DisplacementGenerator& gen)
{
    gen.validate();
    require(plain_shift(gen.A) && plain_shift(gen.B) && gen.A.scalar() == 1.0 &&
                gen.B.scalar() == -1.0,
            ErrorClass::class_mismatch, "the DFT map needs a generator under (Z_1, Z_-1)");
    const Index n = gen.rows();
    ComplexVector d0c(n);
    for (Index i = 0; i < n; ++i)
    {
        d0c(i) = std::conj(root_of_unity_pow(2 * n, i));
    }
    DisplacementGenerator out;
    out.A = OperatorDescriptor::diagonal(KnotSet::grid(1.0, n));
    out.B = OperatorDescriptor::diagonal(KnotSet::grid(root_of_unity(2 * n), n));
    out.F = dft_columns(gen.F);
    // conj(Omega) x = n idft(x)
    out.G = static_cast<double>(n) * idft_columns(d0c.asDiagonal() * gen.G);
    return out;
}

DisplacementGenerator cauchy_dft_to_toeplitz(const DisplacementGenerator& gen)
{
    gen.validate();
    require(diag_op(gen.A) && diag_op(gen.B), ErrorClass::class_mismatch,
            "the inverse DFT map needs a Cauchy generator");
    const Index n = gen.rows();
    const auto se = gen.A.knots().grid_scalar();
    const auto te = gen.B.knots().grid_scalar();
    require(se && te && std::abs(*se - 1.0) < 1e-12 &&
                std::abs(*te - root_of_unity(2 * n)) < 1e-12,
            ErrorClass::class_mismatch, "knots are not the grids of the DFT map");
    ComplexVector d0(n);
    for (Index i = 0; i < n; ++i)
    {
        d0(i) = root_of_unity_pow(2 * n, i);
    }
    DisplacementGenerator out;
    out.A = OperatorDescriptor::shift(n, 1.0);
    out.B = OperatorDescriptor::shift(n, -1.0);
    out.F = idft_columns(gen.F);
    out.G = d0.asDiagonal() * dft_columns(gen.G) / static_cast<double>(n);
    return out;
}

DisplacementGenerator cauchy_reknot(const DisplacementGenerator& gen, cplx e,
                                    const MatvecOptions& opt)
{
    gen.validate();
    require(diag_op(gen.B) && !gen.identity_scale, ErrorClass::class_mismatch,
            "re-knotting needs a diagonal right operator");
    const Index n    = gen.cols();
    const KnotSet& t = gen.B.knots();
    const KnotSet g  = KnotSet::grid(e, n);
    check_disjoint(t, g);
    // C_{t,g}^T G
    DenseMatrix ctg(n, gen.length());
    for (Index j = 0; j < gen.length(); ++j)
    {
        ctg.col(j) = n <= direct_cut ? cauchy_transposed_apply_direct(t, g, gen.G.col(j))
                                     : cauchy_transposed_matvec(t, g, gen.G.col(j), opt.epsilon);
    }
    DisplacementGenerator out;
    out.A                    = gen.A;
    out.B                    = OperatorDescriptor::diagonal(g);
    const ComplexVector ones = ComplexVector::Ones(n);
    append(out, gen.F, ctg, generator_matvec(gen, ones, opt), ones);
    return out;
}

const std::vector<std::string>& transform_names()
{
    static const std::vector<std::string> names = {"a", "b", "c", "d", "e", "f", "g",
                                                   "h", "i", "j", "k", "i2", "tc-dft"};
    return names;
}

namespace
{

std::vector<std::string> expand(const std::string& m)
{
    if (m == "d")
        return {"c", "b"};
    if (m == "f")
        return {"e", "c"};
    if (m == "i")
        return {"h", "e", "c"};
    if (m == "j")
        return {"h", "e"};
    if (m == "k")
        return {"b", "g"};
    if (m == "i2")
        return {"c", "b", "g"};
    if (m == "a" || m == "b" || m == "c" || m == "e" || m == "g" || m == "h" || m == "tc-dft")
        return {m};
    fail(ErrorClass::invalid_argument, "unknown transform '" + m + "'");
}

} // namespace

TransformResult compose_transform(const DisplacementGenerator& gen,
                                  const std::vector<TransformStep>& chain,
                                  const MatvecOptions& opt)
{
    TransformResult r;
    r.gen = regularize(gen, opt);
    for (const TransformStep& step : chain)
    {
        const std::vector<std::string> parts = expand(step.map);
        // an explicit scalar belongs to h when the step has one, else to e
        const bool has_h = std::find(parts.begin(), parts.end(), "h") != parts.end();
        for (const std::string& m : parts)
        {
            DisplacementGenerator& g = r.gen;
            const Index n            = g.rows();
            if (m == "a")
            {
                require(g.A.is_shift() && g.B.is_shift() &&
                            g.A.kind() == g.B.kind(),
                        ErrorClass::class_mismatch, "map a needs a Toeplitz generator");
                g = toeplitz_hankel_swap(g, Side::left, opt);
            }
            else if (m == "c")
            {
                require(g.A.is_shift() && g.B.is_shift() && g.A.kind() != g.B.kind(),
                        ErrorClass::class_mismatch, "map c needs a Hankel generator");
                // land on (Z_e, Z_f) so that b and e can follow
                g = toeplitz_hankel_swap(g, transposed_shift(g.B) ? Side::right : Side::left, opt);
            }
            else if (m == "b")
            {
                KnotSet s = step.s ? *step.s : default_row_knots(n, g.A.scalar());
                g         = toeplitz_to_vandermonde(g, s, opt);
            }
            else if (m == "e")
            {
                const cplx f = g.B.is_shift() ? g.B.scalar() : cplx(0.0);
                const cplx e =
                    step.scalar && !has_h ? *step.scalar : (f == 0.0 ? cplx(1.0) : -f);
                g            = vandermonde_to_hankel(g, e, opt);
            }
            else if (m == "g")
            {
                const KnotSet t =
                    step.t ? *step.t
                           : KnotSet::grid(vandermonde_auxiliary_scalar(g.A.knots()), n);
                g = vandermonde_to_cauchy(g, t, step.variant, opt);
            }
            else if (m == "h")
            {
                cplx e = 0.0;
                if (step.scalar)
                {
                    e = *step.scalar;
                }
                else
                {
                    e = std::pow(vandermonde_auxiliary_scalar(g.B.knots()),
                                 static_cast<double>(n));
                }
                g = cauchy_to_vandermonde(g, e, opt);
            }
            else
            {
                g = toeplitz_to_cauchy_dft(g);
            }
            r.applied.push_back(m);
        }
    }
    // budget: +1 per b, e, g, h
    r.length_budget = regularize(gen, opt).length();
    for (const std::string& m : r.applied)
    {
        if (m == "b" || m == "e" || m == "g" || m == "h")
        {
            ++r.length_budget;
        }
    }
    return r;
}

} // namespace structkit
