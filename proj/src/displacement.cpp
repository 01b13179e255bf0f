#include "structkit/displacement.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "structkit/core_fft.hpp"
#include "structkit/solvers.hpp"
#include "structkit/text_io.hpp"

namespace structkit
{

// ---------------------------------------------------------------------------
// OperatorDescriptor

OperatorDescriptor OperatorDescriptor::shift(Index n, cplx e)
{
    require(n >= 1, ErrorClass::dimension, "operator of order < 1");
    require(std::isfinite(e.real()) && std::isfinite(e.imag()), ErrorClass::invalid_scalar,
            "non-finite shift scalar");
    OperatorDescriptor op;
    op.m_kind = OperatorKind::shift;
    op.m_n    = n;
    op.m_e    = e;
    return op;
}

OperatorDescriptor OperatorDescriptor::shift_transposed(Index n, cplx e)
{
    OperatorDescriptor op = shift(n, e);
    op.m_kind             = OperatorKind::shift_transposed;
    return op;
}

OperatorDescriptor OperatorDescriptor::diagonal(KnotSet knots)
{
    require(knots.size() >= 1, ErrorClass::dimension, "operator of order < 1");
    OperatorDescriptor op;
    op.m_kind  = OperatorKind::diagonal;
    op.m_n     = knots.size();
    op.m_knots = std::move(knots);
    return op;
}

OperatorDescriptor OperatorDescriptor::transposed() const
{
    OperatorDescriptor op = *this;
    if (m_kind == OperatorKind::shift)
    {
        op.m_kind = OperatorKind::shift_transposed;
    }
    else if (m_kind == OperatorKind::shift_transposed)
    {
        op.m_kind = OperatorKind::shift;
    }
    return op;
}

OperatorDescriptor OperatorDescriptor::with_scalar(cplx e) const
{
    require(is_shift(), ErrorClass::class_mismatch, "scalar change of a diagonal operator");
    OperatorDescriptor op = *this;
    op.m_e                = e;
    return op;
}

DenseMatrix OperatorDescriptor::dense() const
{
    switch (m_kind)
    {
        case OperatorKind::shift:
            return shift_matrix(m_n, m_e);
        case OperatorKind::shift_transposed:
            return shift_matrix(m_n, m_e).transpose();
        case OperatorKind::diagonal:
            break;
    }
    return m_knots.knots().asDiagonal();
}

ComplexVector OperatorDescriptor::apply(const ComplexVector& u) const
{
    require(u.size() == m_n, ErrorClass::dimension, "operator size differs from vector");
    ComplexVector out(m_n);
    switch (m_kind)
    {
        case OperatorKind::shift:
            out(0) = m_e * u(m_n - 1);
            out.tail(m_n - 1) = u.head(m_n - 1);
            break;
        case OperatorKind::shift_transposed:
            out.head(m_n - 1) = u.tail(m_n - 1);
            out(m_n - 1)      = m_e * u(0);
            break;
        case OperatorKind::diagonal:
            out = m_knots.knots().cwiseProduct(u);
            break;
    }
    return out;
}

bool OperatorDescriptor::same_as(const OperatorDescriptor& other) const
{
    if (m_kind != other.m_kind || m_n != other.m_n)
    {
        return false;
    }
    if (m_kind == OperatorKind::diagonal)
    {
        return m_knots.knots() == other.m_knots.knots();
    }
    return m_e == other.m_e;
}

std::string OperatorDescriptor::describe() const
{
    std::ostringstream os;
    os.precision(17);
    switch (m_kind)
    {
        case OperatorKind::shift:
            os << "Z " << m_e.real() << ' ' << m_e.imag();
            break;
        case OperatorKind::shift_transposed:
            os << "ZT " << m_e.real() << ' ' << m_e.imag();
            break;
        case OperatorKind::diagonal:
            os << "D " << m_n;
            break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Tags and validation

std::string_view tag_name(StructureTag tag)
{
    switch (tag)
    {
        case StructureTag::toeplitz:
            return "T";
        case StructureTag::hankel:
            return "H";
        case StructureTag::vandermonde:
            return "V";
        case StructureTag::vandermonde_t:
            return "VT";
        case StructureTag::vandermonde_inv:
            return "Vinv";
        case StructureTag::vandermonde_inv_t:
            return "VinvT";
        case StructureTag::cauchy:
            return "C";
        case StructureTag::fv:
            return "FV";
        case StructureTag::fc:
            return "FC";
        case StructureTag::cf:
            return "CF";
        case StructureTag::fcf:
            return "FCF";
        case StructureTag::other:
            break;
    }
    return "other";
}

namespace
{

using K = OperatorKind;

enum class Pattern
{
    zz,    // (Z_e, Z_f)
    ztzt,  // (Z_e^T, Z_f^T)
    zzt,   // (Z_e, Z_f^T)
    ztz,   // (Z_e^T, Z_f)
    dz,    // (D_s, Z_e)
    ztd,   // (Z_e^T, D_s)
    zd,    // (Z_e, D_s)
    dzt,   // (D_s, Z_e^T)
    dd,    // (D_s, D_t)
};

Pattern pattern_of(const OperatorDescriptor& a, const OperatorDescriptor& b)
{
    const K ka = a.kind(), kb = b.kind();
    if (ka == K::shift && kb == K::shift)
        return Pattern::zz;
    if (ka == K::shift_transposed && kb == K::shift_transposed)
        return Pattern::ztzt;
    if (ka == K::shift && kb == K::shift_transposed)
        return Pattern::zzt;
    if (ka == K::shift_transposed && kb == K::shift)
        return Pattern::ztz;
    if (ka == K::diagonal && kb == K::shift)
        return Pattern::dz;
    if (ka == K::shift_transposed && kb == K::diagonal)
        return Pattern::ztd;
    if (ka == K::shift && kb == K::diagonal)
        return Pattern::zd;
    if (ka == K::diagonal && kb == K::shift_transposed)
        return Pattern::dzt;
    return Pattern::dd;
}

} // namespace

StructureTag DisplacementGenerator::tag() const
{
    switch (pattern_of(A, B))
    {
        case Pattern::zz:
        case Pattern::ztzt:
            return StructureTag::toeplitz;
        case Pattern::zzt:
        case Pattern::ztz:
            return StructureTag::hankel;
        case Pattern::dz:
            return A.knots().grid_scalar() ? StructureTag::fv : StructureTag::vandermonde;
        case Pattern::ztd:
            return StructureTag::vandermonde_t;
        case Pattern::zd:
            return StructureTag::vandermonde_inv;
        case Pattern::dzt:
            return StructureTag::vandermonde_inv_t;
        case Pattern::dd:
        {
            const bool sg = A.knots().grid_scalar().has_value();
            const bool tg = B.knots().grid_scalar().has_value();
            if (sg && tg)
                return StructureTag::fcf;
            if (tg)
                return StructureTag::fc;
            if (sg)
                return StructureTag::cf;
            return StructureTag::cauchy;
        }
    }
    return StructureTag::other;
}

void DisplacementGenerator::validate() const
{
    require(F.cols() == G.cols(), ErrorClass::dimension, "generator factors differ in length");
    require(F.rows() == rows() && G.rows() == cols(), ErrorClass::dimension,
            "generator factor rows differ from operator sizes");
    require(rows() >= 1 && cols() >= 1, ErrorClass::dimension, "empty generator");
    require_finite(F, "generator F");
    require_finite(G, "generator G");
    const bool square_pattern = pattern_of(A, B) != Pattern::dd;
    require(!square_pattern || rows() == cols(), ErrorClass::dimension,
            "shift patterns need square matrices");
    if (identity_scale)
    {
        require(A.same_as(B) && F.cols() == 0, ErrorClass::inconsistency,
                "identity marker needs equal operators and length 0");
    }
}

// ---------------------------------------------------------------------------
// Dense displacement and factorization

DenseMatrix displacement_dense(const DenseMatrix& m, const OperatorDescriptor& a,
                               const OperatorDescriptor& b)
{
    require(m.rows() == a.size() && m.cols() == b.size(), ErrorClass::dimension,
            "matrix size differs from operator sizes");
    return a.dense() * m - m * b.dense();
}

DisplacementGenerator generator_from_dense(const DenseMatrix& m, const OperatorDescriptor& a,
                                           const OperatorDescriptor& b, double tol)
{
    require_finite(m, "matrix");
    const DenseMatrix d = displacement_dense(m, a, b);
    DisplacementGenerator gen;
    gen.A = a;
    gen.B = b;
    Eigen::BDCSVD<DenseMatrix> svd(d, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double rel = tol < 0.0 ? 1e-10 : tol;
    Index r          = 0;
    if (sv.size() > 0 && sv(0) > 0.0)
    {
        while (r < sv.size() && sv(r) > rel * sv(0) && sv(r) > 0.0)
        {
            ++r;
        }
    }
    gen.F = svd.matrixU().leftCols(r) * sv.head(r).asDiagonal();
    gen.G = svd.matrixV().leftCols(r).conjugate();
    if (r == 0 && a.same_as(b) && m.isApprox(m(0, 0) * DenseMatrix::Identity(m.rows(), m.cols())))
    {
        gen.identity_scale = m(0, 0);
    }
    return gen;
}

// ---------------------------------------------------------------------------
// Recovery

namespace
{

void require_nonsingular(const DisplacementGenerator& gen)
{
    const Pattern p = pattern_of(gen.A, gen.B);
    const Index n   = gen.rows();
    switch (p)
    {
        case Pattern::zz:
        case Pattern::ztzt:
        case Pattern::zzt:
        case Pattern::ztz:
            if (gen.A.scalar() == gen.B.scalar())
            {
                fail(ErrorClass::singular_operator,
                     "shift pattern " + gen.A.describe() + " / " + gen.B.describe() +
                         " has equal scalars");
            }
            break;
        case Pattern::dz:
        case Pattern::dzt:
        case Pattern::ztd:
        case Pattern::zd:
        {
            const OperatorDescriptor& d = gen.A.kind() == K::diagonal ? gen.A : gen.B;
            const OperatorDescriptor& z = gen.A.kind() == K::diagonal ? gen.B : gen.A;
            const ComplexVector sn      = knot_powers(d.knots(), n);
            for (Index i = 0; i < n; ++i)
            {
                if (sn(i) == z.scalar())
                {
                    fail(ErrorClass::singular_operator,
                         "Vandermonde pattern with s_i^n equal to the shift scalar");
                }
            }
            break;
        }
        case Pattern::dd:
            check_disjoint(gen.A.knots(), gen.B.knots());
            break;
    }
}

ComplexVector rev(const ComplexVector& v)
{
    return v.reverse();
}

} // namespace

DenseMatrix recover_dense(const DisplacementGenerator& gen)
{
    gen.validate();
    const Index n = gen.rows();
    if (gen.identity_scale)
    {
        return *gen.identity_scale * DenseMatrix::Identity(n, n);
    }
    require_nonsingular(gen);
    const Pattern p = pattern_of(gen.A, gen.B);
    const Index d   = gen.length();
    DenseMatrix m   = DenseMatrix::Zero(gen.rows(), gen.cols());
    const DenseMatrix jn = reversal_matrix(n);

    auto circ = [](cplx e, const ComplexVector& v) { return circulant_matrix(e, v); };

    switch (p)
    {
        case Pattern::zz:
        {
            const cplx e = gen.A.scalar(), f = gen.B.scalar();
            for (Index j = 0; j < d; ++j)
                m += circ(e, gen.F.col(j)) * circ(f, rev(gen.G.col(j)));
            m /= (e - f);
            break;
        }
        case Pattern::ztzt:
        {
            const cplx e = gen.A.scalar(), f = gen.B.scalar();
            for (Index j = 0; j < d; ++j)
                m += circ(e, rev(gen.F.col(j))).transpose() * circ(f, gen.G.col(j)).transpose();
            m /= (e - f);
            break;
        }
        case Pattern::zzt:
        {
            const cplx e = gen.A.scalar(), f = gen.B.scalar();
            for (Index j = 0; j < d; ++j)
                m += circ(e, gen.F.col(j)) * circ(f, gen.G.col(j));
            m = m * jn / (e - f);
            break;
        }
        case Pattern::ztz:
        {
            const cplx e = gen.A.scalar(), f = gen.B.scalar();
            for (Index j = 0; j < d; ++j)
                m += circ(e, rev(gen.F.col(j))) * circ(f, rev(gen.G.col(j)));
            m = jn * m / (e - f);
            break;
        }
        case Pattern::dz:
        {
            const cplx e          = gen.B.scalar();
            const KnotSet& s      = gen.A.knots();
            const DenseMatrix v   = vandermonde_matrix(s);
            const ComplexVector w = (knot_powers(s, n).array() - e).inverse().matrix();
            for (Index j = 0; j < d; ++j)
                m += gen.F.col(j).asDiagonal() * v * circ(e, rev(gen.G.col(j)));
            m = w.asDiagonal() * m;
            break;
        }
        case Pattern::ztd:
        {
            const cplx e          = gen.A.scalar();
            const KnotSet& s      = gen.B.knots();
            const DenseMatrix vt  = vandermonde_matrix(s).transpose();
            const ComplexVector w = (e - knot_powers(s, n).array()).inverse().matrix();
            for (Index j = 0; j < d; ++j)
                m += circ(e, rev(gen.F.col(j))).transpose() * vt *
                     gen.G.col(j).cwiseProduct(w).asDiagonal();
            break;
        }
        case Pattern::zd:
        {
            const cplx e          = gen.A.scalar();
            const KnotSet& s      = gen.B.knots();
            const DenseMatrix jvt = jn * vandermonde_matrix(s).transpose();
            const ComplexVector w = (e - knot_powers(s, n).array()).inverse().matrix();
            for (Index j = 0; j < d; ++j)
                m += circ(e, gen.F.col(j)) * jvt * gen.G.col(j).cwiseProduct(w).asDiagonal();
            break;
        }
        case Pattern::dzt:
        {
            const cplx e          = gen.B.scalar();
            const KnotSet& s      = gen.A.knots();
            const DenseMatrix vj  = vandermonde_matrix(s) * jn;
            const ComplexVector w = (knot_powers(s, n).array() - e).inverse().matrix();
            for (Index j = 0; j < d; ++j)
                m += gen.F.col(j).cwiseProduct(w).asDiagonal() * vj *
                     circ(e, gen.G.col(j)).transpose();
            break;
        }
        case Pattern::dd:
        {
            const DenseMatrix c = cauchy_matrix(gen.A.knots(), gen.B.knots());
            for (Index j = 0; j < d; ++j)
                m += gen.F.col(j).asDiagonal() * c * gen.G.col(j).asDiagonal();
            break;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Matvec

namespace
{

struct Kernels
{
    const MatvecOptions& opt;

    bool direct(Index n) const
    {
        return n <= opt.direct_threshold;
    }

    ComplexVector v(const KnotSet& s, const ComplexVector& u) const
    {
        return direct(s.size()) ? vandermonde_apply_direct(s, u)
                                : vandermonde_matvec(s, u, opt.epsilon);
    }
    ComplexVector vt(const KnotSet& s, const ComplexVector& u) const
    {
        return direct(s.size()) ? vandermonde_transposed_apply_direct(s, u)
                                : vandermonde_transposed_matvec(s, u, opt.epsilon);
    }
    ComplexVector c(const KnotSet& s, const KnotSet& t, const ComplexVector& u) const
    {
        return direct(std::max(s.size(), t.size())) ? cauchy_apply_direct(s, t, u)
                                                    : cauchy_matvec(s, t, u, opt.epsilon);
    }
};

ComplexVector circ_t(cplx e, const ComplexVector& v, const ComplexVector& u)
{
    return circulant_apply_transposed(e, v, u);
}

} // namespace

ComplexVector generator_matvec(const DisplacementGenerator& gen, const ComplexVector& u,
                               const MatvecOptions& opt)
{
    gen.validate();
    require(u.size() == gen.cols(), ErrorClass::dimension, "vector size differs from matrix");
    require_finite(u, "vector");
    const Index n = gen.rows();
    if (gen.identity_scale)
    {
        return *gen.identity_scale * u;
    }
    require_nonsingular(gen);
    const Pattern p = pattern_of(gen.A, gen.B);
    const Index d   = gen.length();
    ComplexVector y = ComplexVector::Zero(gen.rows());
    const Kernels k{opt};

    switch (p)
    {
        case Pattern::zz:
        {
            const cplx e = gen.A.scalar(), f = gen.B.scalar();
            for (Index j = 0; j < d; ++j)
                y += circulant_apply(e, gen.F.col(j),
                                     circulant_apply(f, rev(gen.G.col(j)), u));
            y /= (e - f);
            break;
        }
        case Pattern::ztzt:
        {
            const cplx e = gen.A.scalar(), f = gen.B.scalar();
            for (Index j = 0; j < d; ++j)
                y += circ_t(e, rev(gen.F.col(j)), circ_t(f, gen.G.col(j), u));
            y /= (e - f);
            break;
        }
        case Pattern::zzt:
        {
            const cplx e = gen.A.scalar(), f = gen.B.scalar();
            const ComplexVector ju = rev(u);
            for (Index j = 0; j < d; ++j)
                y += circulant_apply(e, gen.F.col(j), circulant_apply(f, gen.G.col(j), ju));
            y /= (e - f);
            break;
        }
        case Pattern::ztz:
        {
            const cplx e = gen.A.scalar(), f = gen.B.scalar();
            for (Index j = 0; j < d; ++j)
                y += circulant_apply(e, rev(gen.F.col(j)),
                                     circulant_apply(f, rev(gen.G.col(j)), u));
            y = rev(y) / (e - f);
            break;
        }
        case Pattern::dz:
        {
            const cplx e     = gen.B.scalar();
            const KnotSet& s = gen.A.knots();
            for (Index j = 0; j < d; ++j)
                y += gen.F.col(j).cwiseProduct(k.v(s, circulant_apply(e, rev(gen.G.col(j)), u)));
            y = y.cwiseQuotient((knot_powers(s, n).array() - e).matrix());
            break;
        }
        case Pattern::ztd:
        {
            const cplx e          = gen.A.scalar();
            const KnotSet& s      = gen.B.knots();
            const ComplexVector w = u.cwiseQuotient((e - knot_powers(s, n).array()).matrix());
            for (Index j = 0; j < d; ++j)
                y += circ_t(e, rev(gen.F.col(j)), k.vt(s, gen.G.col(j).cwiseProduct(w)));
            break;
        }
        case Pattern::zd:
        {
            const cplx e          = gen.A.scalar();
            const KnotSet& s      = gen.B.knots();
            const ComplexVector w = u.cwiseQuotient((e - knot_powers(s, n).array()).matrix());
            for (Index j = 0; j < d; ++j)
                y += circulant_apply(e, gen.F.col(j), rev(k.vt(s, gen.G.col(j).cwiseProduct(w))));
            break;
        }
        case Pattern::dzt:
        {
            const cplx e     = gen.B.scalar();
            const KnotSet& s = gen.A.knots();
            for (Index j = 0; j < d; ++j)
                y += gen.F.col(j).cwiseProduct(k.v(s, rev(circ_t(e, gen.G.col(j), u))));
            y = y.cwiseQuotient((knot_powers(s, n).array() - e).matrix());
            break;
        }
        case Pattern::dd:
        {
            const KnotSet& s = gen.A.knots();
            const KnotSet& t = gen.B.knots();
            if (d == 0)
                break;
            if (k.direct(std::max(s.size(), t.size())))
            {
                for (Index j = 0; j < d; ++j)
                    y += gen.F.col(j).cwiseProduct(cauchy_apply_direct(s, t, gen.G.col(j).cwiseProduct(u)));
            }
            else
            {
                CauchyLikeOperand op{s, t, gen.F, gen.G};
                y = cauchy_like_matvec(op, u, opt.epsilon).value;
            }
            break;
        }
    }
    return y;
}

DisplacementGenerator generator_transpose(const DisplacementGenerator& gen)
{
    DisplacementGenerator out;
    out.A              = gen.B.transposed();
    out.B              = gen.A.transposed();
    out.F              = -gen.G;
    out.G              = gen.F;
    out.identity_scale = gen.identity_scale;
    return out;
}

ComplexVector generator_matvec_transposed(const DisplacementGenerator& gen,
                                          const ComplexVector& u, const MatvecOptions& opt)
{
    return generator_matvec(generator_transpose(gen), u, opt);
}

DenseMatrix generator_matmat(const DisplacementGenerator& gen, const DenseMatrix& x,
                             const MatvecOptions& opt)
{
    DenseMatrix out(gen.rows(), x.cols());
    for (Index j = 0; j < x.cols(); ++j)
    {
        out.col(j) = generator_matvec(gen, x.col(j), opt);
    }
    return out;
}

DenseMatrix generator_matmat_transposed(const DisplacementGenerator& gen, const DenseMatrix& x,
                                        const MatvecOptions& opt)
{
    return generator_matmat(generator_transpose(gen), x, opt);
}

// ---------------------------------------------------------------------------
// Algebra

DisplacementGenerator generator_product(const DisplacementGenerator& m,
                                        const DisplacementGenerator& n,
                                        const MatvecOptions& opt)
{
    m.validate();
    n.validate();
    require(m.B.same_as(n.A), ErrorClass::class_mismatch,
            "product operands do not share the middle operator");
    if (m.identity_scale && n.identity_scale)
    {
        DisplacementGenerator out = m;
        out.identity_scale        = *m.identity_scale * *n.identity_scale;
        return out;
    }
    DisplacementGenerator out;
    out.A = m.A;
    out.B = n.B;
    const Index dm = m.length(), dn = n.length();
    out.F.resize(m.rows(), dm + dn);
    out.G.resize(n.cols(), dm + dn);
    out.F.leftCols(dm)  = m.F;
    out.F.rightCols(dn) = generator_matmat(m, n.F, opt);
    out.G.leftCols(dm)  = generator_matmat_transposed(n, m.G, opt);
    out.G.rightCols(dn) = n.G;
    return out;
}

SolveCapability dense_solver(const DisplacementGenerator& gen)
{
    auto lu = std::make_shared<DenseLU>(recover_dense(gen));
    return {[lu](const DenseMatrix& b) { return lu->solve(b); },
            [lu](const DenseMatrix& b) { return lu->solve_transposed(b); }};
}

DisplacementGenerator generator_inverse(const DisplacementGenerator& gen,
                                        const SolveCapability& solver)
{
    gen.validate();
    require(gen.rows() == gen.cols(), ErrorClass::dimension, "inverse of a non-square matrix");
    DisplacementGenerator out;
    out.A = gen.B;
    out.B = gen.A;
    if (gen.identity_scale)
    {
        require(*gen.identity_scale != cplx(0.0), ErrorClass::singular_matrix,
                "inverse of the zero matrix");
        out.F              = gen.F;
        out.G              = gen.G;
        out.identity_scale = 1.0 / *gen.identity_scale;
        return out;
    }
    out.F = -solver.solve(gen.F);
    out.G = solver.solve_transposed(gen.G);
    require_finite(out.F, "inverse generator");
    require_finite(out.G, "inverse generator");
    return out;
}

DisplacementGenerator operator_shift_adjust(const DisplacementGenerator& gen, cplx new_e,
                                            Side side, const MatvecOptions& opt)
{
    gen.validate();
    const OperatorDescriptor& op = side == Side::right ? gen.B : gen.A;
    require(op.is_shift(), ErrorClass::class_mismatch, "scalar change of a diagonal operator");
    const cplx old_e = op.scalar();
    if (new_e == old_e)
    {
        return gen;
    }
    const Index n = side == Side::right ? gen.cols() : gen.rows();
    const Index d = gen.length();
    DisplacementGenerator out;
    out.A = gen.A;
    out.B = gen.B;
    out.F.resize(gen.rows(), d + 1);
    out.G.resize(gen.cols(), d + 1);
    out.F.leftCols(d) = gen.F;
    out.G.leftCols(d) = gen.G;
    const bool plain  = op.kind() == OperatorKind::shift;
    const Index first = 0, last = n - 1;
    if (side == Side::right)
    {
        out.B = gen.B.with_scalar(new_e);
        const ComplexVector unit = ComplexVector::Unit(n, plain ? first : last);
        out.F.col(d) = -(new_e - old_e) * generator_matvec(gen, unit, opt);
        out.G.col(d) = ComplexVector::Unit(n, plain ? last : first);
    }
    else
    {
        out.A        = gen.A.with_scalar(new_e);
        out.F.col(d) = (new_e - old_e) * ComplexVector::Unit(n, plain ? first : last);
        out.G.col(d) = generator_matvec_transposed(gen, ComplexVector::Unit(n, plain ? last : first), opt);
    }
    return out;
}

DisplacementGenerator recompress(const DisplacementGenerator& gen, double tol)
{
    gen.validate();
    if (gen.length() == 0)
    {
        return gen;
    }
    Eigen::HouseholderQR<DenseMatrix> qf(gen.F), qg(gen.G);
    const Index d  = gen.length();
    const Index rf = std::min(gen.rows(), d), rg = std::min(gen.cols(), d);
    const DenseMatrix q1 = qf.householderQ() * DenseMatrix::Identity(gen.rows(), rf);
    const DenseMatrix q2 = qg.householderQ() * DenseMatrix::Identity(gen.cols(), rg);
    const DenseMatrix r1 = qf.matrixQR().topRows(rf).template triangularView<Eigen::Upper>();
    const DenseMatrix r2 = qg.matrixQR().topRows(rg).template triangularView<Eigen::Upper>();
    const DenseMatrix core = r1 * r2.transpose();
    Eigen::JacobiSVD<DenseMatrix> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Index r        = 0;
    while (r < sv.size() && sv(r) > tol * sv(0) && sv(r) > 0.0)
    {
        ++r;
    }
    DisplacementGenerator out = gen;
    out.F = q1 * svd.matrixU().leftCols(r) * sv.head(r).asDiagonal();
    out.G = q2 * svd.matrixV().leftCols(r).conjugate();
    return out;
}

DisplacementGenerator identity_generator(Index n, cplx e, cplx f, cplx alpha)
{
    DisplacementGenerator gen;
    gen.A = OperatorDescriptor::shift(n, e);
    gen.B = OperatorDescriptor::shift(n, f);
    gen.F = DenseMatrix::Zero(n, 1);
    gen.G = DenseMatrix::Zero(n, 1);
    gen.F(0, 0)     = (e - f) * alpha;
    gen.G(n - 1, 0) = 1.0;
    return gen;
}

DisplacementGenerator scaled_identity(const OperatorDescriptor& a, cplx alpha)
{
    DisplacementGenerator gen;
    gen.A              = a;
    gen.B              = a;
    gen.F              = DenseMatrix::Zero(a.size(), 0);
    gen.G              = DenseMatrix::Zero(a.size(), 0);
    gen.identity_scale = alpha;
    return gen;
}

// ---------------------------------------------------------------------------
// Text form

namespace
{

struct OpHeader
{
    std::string kind;
    cplx e   = 0.0;
    Index m  = 0;
};

OpHeader read_op_header(std::istream& in)
{
    OpHeader h;
    require(static_cast<bool>(in >> h.kind), ErrorClass::invalid_argument,
            "generator header: missing operator kind");
    if (h.kind == "Z" || h.kind == "ZT")
    {
        double re = 0.0, im = 0.0;
        require(static_cast<bool>(in >> re >> im), ErrorClass::invalid_argument,
                "generator header: missing shift scalar");
        h.e = cplx(re, im);
    }
    else if (h.kind == "D")
    {
        require(static_cast<bool>(in >> h.m) && h.m >= 1, ErrorClass::invalid_argument,
                "generator header: missing knot count");
    }
    else
    {
        fail(ErrorClass::invalid_argument, "generator header: unknown operator kind " + h.kind);
    }
    return h;
}

OperatorDescriptor make_op(const OpHeader& h, Index n, std::istream& in)
{
    if (h.kind == "Z")
        return OperatorDescriptor::shift(n, h.e);
    if (h.kind == "ZT")
        return OperatorDescriptor::shift_transposed(n, h.e);
    return OperatorDescriptor::diagonal(KnotSet(read_entries(in, h.m)));
}

} // namespace

void write_generator(std::ostream& out, const DisplacementGenerator& gen)
{
    gen.validate();
    out << gen.rows() << ' ' << gen.length() << ' ' << gen.A.describe() << ' '
        << gen.B.describe();
    if (gen.identity_scale)
    {
        const auto old = out.precision(17);
        out << " I " << gen.identity_scale->real() << ' ' << gen.identity_scale->imag();
        out.precision(old);
    }
    out << '\n';
    if (gen.A.kind() == OperatorKind::diagonal)
        write_vector(out, gen.A.knots().knots());
    if (gen.B.kind() == OperatorKind::diagonal)
        write_vector(out, gen.B.knots().knots());
    const DenseMatrix f = gen.F;
    const DenseMatrix g = gen.G;
    for (Index i = 0; i < f.rows(); ++i)
        write_vector(out, f.row(i).transpose());
    for (Index i = 0; i < g.rows(); ++i)
        write_vector(out, g.row(i).transpose());
}

DisplacementGenerator read_generator(std::istream& in)
{
    std::string line;
    while (std::getline(in, line))
    {
        if (line.find_first_not_of(" \t\r") != std::string::npos && line[0] != '#')
            break;
    }
    std::istringstream hs(line);
    Index n = 0, d = 0;
    require(static_cast<bool>(hs >> n >> d) && n >= 1 && d >= 0, ErrorClass::invalid_argument,
            "generator header: bad size fields");
    const OpHeader ha = read_op_header(hs);
    const OpHeader hb = read_op_header(hs);
    DisplacementGenerator gen;
    std::string tag;
    if (hs >> tag)
    {
        double re = 0.0, im = 0.0;
        require(tag == "I" && static_cast<bool>(hs >> re >> im), ErrorClass::invalid_argument,
                "generator header: trailing text");
        gen.identity_scale = cplx(re, im);
    }
    require(ha.kind != "D" || ha.m == n, ErrorClass::dimension,
            "generator header: row knot count differs from n");
    gen.A = make_op(ha, n, in);
    const Index m = hb.kind == "D" ? hb.m : n;
    gen.B = make_op(hb, m, in);
    const ComplexVector fe = read_entries(in, n * d);
    const ComplexVector ge = read_entries(in, m * d);
    gen.F.resize(n, d);
    gen.G.resize(m, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j)
            gen.F(i, j) = fe(i * d + j);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < d; ++j)
            gen.G(i, j) = ge(i * d + j);
    gen.validate();
    return gen;
}

} // namespace structkit
