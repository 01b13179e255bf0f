#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "structkit/core_fft.hpp"
#include "structkit/hss.hpp"

namespace structkit
{

namespace
{

constexpr Index solver_leaf = 64;

struct LowRank
{
    DenseMatrix u;
    DenseMatrix v;
};

// Truncated form of U V^T keeping singular values above tol.
LowRank recompress_pair(const DenseMatrix& u, const DenseMatrix& v, double tol)
{
    const Index m = u.rows(), p = v.rows(), r = u.cols();
    LowRank out;
    if (r == 0 || m == 0 || p == 0)
    {
        out.u = DenseMatrix::Zero(m, 0);
        out.v = DenseMatrix::Zero(p, 0);
        return out;
    }
    DenseMatrix q1, q2, core;
    if (r >= std::min(m, p))
    {
        core = u * v.transpose();
        q1   = DenseMatrix::Identity(m, m);
        q2   = DenseMatrix::Identity(p, p);
    }
    else
    {
        Eigen::HouseholderQR<DenseMatrix> qu(u), qv(v);
        q1 = qu.householderQ() * DenseMatrix::Identity(m, r);
        q2 = qv.householderQ() * DenseMatrix::Identity(p, r);
        const DenseMatrix r1 = qu.matrixQR().topRows(r).triangularView<Eigen::Upper>();
        const DenseMatrix r2 = qv.matrixQR().topRows(r).triangularView<Eigen::Upper>();
        core = r1 * r2.transpose();
    }
    Eigen::BDCSVD<DenseMatrix> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Index k        = 0;
    while (k < sv.size() && sv(k) > tol)
        ++k;
    out.u = q1 * (svd.matrixU().leftCols(k) * sv.head(k).asDiagonal());
    out.v = q2 * svd.matrixV().leftCols(k).conjugate();
    return out;
}

void check_lu(const DenseLU& lu, double kappa_max, const char* what)
{
    if (1.0 / lu.rcond() > kappa_max)
    {
        fail(ErrorClass::ill_conditioned, std::string(what) + " condition estimate above threshold");
    }
}

} // namespace

struct HssSolver::Node
{
    Index begin = 0, end = 0;
    std::unique_ptr<Node> left, right;
    std::unique_ptr<DenseLU> lu;
    // A12 = u1 v2^T, A21 = u2 v1^T
    DenseMatrix u1, v2, u2, v1;
    DenseMatrix y1, y2, yt1, yt2;
    std::unique_ptr<DenseLU> k, kt;

    Index size() const
    {
        return end - begin;
    }
};

namespace
{

struct Builder
{
    const HssApprox& h;
    const DenseMatrix& fs; // sorted row weights
    const DenseMatrix& gs; // sorted column weights
    double tol;
    double kappa_max;

    DenseMatrix weighted_exact(Index r0, Index r1, Index c0, Index c1) const
    {
        const DenseMatrix c = h.exact_entries(r0, r1, c0, c1);
        DenseMatrix out     = DenseMatrix::Zero(r1 - r0, c1 - c0);
        for (Index l = 0; l < fs.cols(); ++l)
        {
            out += fs.col(l).segment(r0, r1 - r0).asDiagonal() * c *
                   gs.col(l).segment(c0, c1 - c0).asDiagonal();
        }
        return out;
    }

    // Low-rank form of the sorted block rows [r0, r1) x cols [c0, c1).
    LowRank gather(Index r0, Index r1, Index c0, Index c1) const
    {
        const Index m = r1 - r0, p = c1 - c0, d = fs.cols();
        struct Piece
        {
            Index ra, rb, ca, cb;
            DenseMatrix w, q;
        };
        std::vector<Piece> pieces;
        Index total = 0;
        for (const auto& b : h.blocks())
        {
            const Index ra = std::max(b.row_begin, r0), rb = std::min(b.row_end, r1);
            const Index ca = std::max(b.col_begin, c0), cb = std::min(b.col_end, c1);
            if (ra >= rb || ca >= cb)
                continue;
            Piece pc{ra, rb, ca, cb, {}, {}};
            if (b.low_rank)
            {
                DenseMatrix w, q;
                h.block_factors(b, ra, rb, ca, cb, w, q);
                const Index kk = w.cols();
                pc.w.resize(rb - ra, kk * d);
                pc.q.resize(cb - ca, kk * d);
                for (Index l = 0; l < d; ++l)
                {
                    pc.w.middleCols(l * kk, kk) = fs.col(l).segment(ra, rb - ra).asDiagonal() * w;
                    pc.q.middleCols(l * kk, kk) = gs.col(l).segment(ca, cb - ca).asDiagonal() * q;
                }
            }
            else
            {
                pc.w = weighted_exact(ra, rb, ca, cb);
                pc.q = DenseMatrix::Identity(cb - ca, cb - ca);
            }
            total += pc.w.cols();
            pieces.push_back(std::move(pc));
        }
        if (total >= std::min(m, p))
        {
            // cheaper to assemble the block and compress it directly
            DenseMatrix full = DenseMatrix::Zero(m, p);
            for (const auto& pc : pieces)
            {
                full.block(pc.ra - r0, pc.ca - c0, pc.rb - pc.ra, pc.cb - pc.ca) +=
                    pc.w * pc.q.transpose();
            }
            Eigen::BDCSVD<DenseMatrix> svd(full, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto& sv = svd.singularValues();
            Index k        = 0;
            while (k < sv.size() && sv(k) > tol)
                ++k;
            LowRank out;
            out.u = svd.matrixU().leftCols(k) * sv.head(k).asDiagonal();
            out.v = svd.matrixV().leftCols(k).conjugate();
            return out;
        }
        DenseMatrix u = DenseMatrix::Zero(m, total), v = DenseMatrix::Zero(p, total);
        Index col     = 0;
        for (const auto& pc : pieces)
        {
            const Index w = pc.w.cols();
            u.block(pc.ra - r0, col, pc.rb - pc.ra, w) = pc.w;
            v.block(pc.ca - c0, col, pc.cb - pc.ca, w) = pc.q;
            col += w;
        }
        return recompress_pair(u, v, tol);
    }

    std::unique_ptr<HssSolver::Node> build(Index begin, Index end) const
    {
        auto node   = std::make_unique<HssSolver::Node>();
        node->begin = begin;
        node->end   = end;
        if (end - begin <= solver_leaf)
        {
            try
            {
                node->lu = std::make_unique<DenseLU>(weighted_exact(begin, end, begin, end));
            }
            catch (const Error& e)
            {
                fail(ErrorClass::ill_conditioned, std::string("diagonal block: ") + e.what());
            }
            check_lu(*node->lu, kappa_max, "diagonal block");
            return node;
        }
        const Index mid = begin + (end - begin) / 2;
        node->left      = build(begin, mid);
        node->right     = build(mid, end);
        LowRank a12     = gather(begin, mid, mid, end);
        LowRank a21     = gather(mid, end, begin, mid);
        node->u1        = std::move(a12.u);
        node->v2        = std::move(a12.v);
        node->u2        = std::move(a21.u);
        node->v1        = std::move(a21.v);
        node->y1        = solve_node(*node->left, node->u1, false);
        node->y2        = solve_node(*node->right, node->u2, false);
        node->yt1       = solve_node(*node->left, node->v1, true);
        node->yt2       = solve_node(*node->right, node->v2, true);
        const Index r1 = node->u1.cols(), r2 = node->u2.cols();
        DenseMatrix k  = DenseMatrix::Identity(r1 + r2, r1 + r2);
        DenseMatrix kt = k;
        k.topRightCorner(r1, r2)     = node->v2.transpose() * node->y2;
        k.bottomLeftCorner(r2, r1)   = node->v1.transpose() * node->y1;
        kt.topRightCorner(r1, r2)    = node->u1.transpose() * node->yt1;
        kt.bottomLeftCorner(r2, r1)  = node->u2.transpose() * node->yt2;
        try
        {
            node->k  = std::make_unique<DenseLU>(k);
            node->kt = std::make_unique<DenseLU>(kt);
        }
        catch (const Error& e)
        {
            fail(ErrorClass::ill_conditioned, std::string("coupling block: ") + e.what());
        }
        check_lu(*node->k, kappa_max, "coupling block");
        check_lu(*node->kt, kappa_max, "coupling block");
        return node;
    }

    static DenseMatrix solve_node(const HssSolver::Node& nd, const DenseMatrix& b, bool transposed)
    {
        if (nd.lu)
        {
            return transposed ? nd.lu->solve_transposed(b) : nd.lu->solve(b);
        }
        const Index m1 = nd.left->size();
        const Index m2 = nd.right->size();
        const DenseMatrix z1 = solve_node(*nd.left, b.topRows(m1), transposed);
        const DenseMatrix z2 = solve_node(*nd.right, b.bottomRows(m2), transposed);
        const Index r1 = nd.u1.cols(), r2 = nd.u2.cols();
        DenseMatrix x(b.rows(), b.cols());
        if (!transposed)
        {
            DenseMatrix rhs(r1 + r2, b.cols());
            rhs.topRows(r1)    = nd.v2.transpose() * z2;
            rhs.bottomRows(r2) = nd.v1.transpose() * z1;
            const DenseMatrix w = nd.k->solve(rhs);
            x.topRows(m1)    = z1 - nd.y1 * w.topRows(r1);
            x.bottomRows(m2) = z2 - nd.y2 * w.bottomRows(r2);
        }
        else
        {
            DenseMatrix rhs(r1 + r2, b.cols());
            rhs.topRows(r1)    = nd.u1.transpose() * z1;
            rhs.bottomRows(r2) = nd.u2.transpose() * z2;
            const DenseMatrix w = nd.kt->solve(rhs);
            x.topRows(m1)    = z1 - nd.yt1 * w.bottomRows(r2);
            x.bottomRows(m2) = z2 - nd.yt2 * w.topRows(r1);
        }
        return x;
    }
};

Index max_rank(const HssSolver::Node* nd)
{
    if (!nd || nd->lu)
        return 0;
    return std::max({nd->u1.cols(), nd->u2.cols(), max_rank(nd->left.get()),
                     max_rank(nd->right.get())});
}

// Deterministic start vector for the power iterations.
ComplexVector start_vector(Index n)
{
    ComplexVector x(n);
    for (Index i = 0; i < n; ++i)
    {
        const double a = 0.7 * static_cast<double>(i) + 0.3;
        x(i)           = cplx(1.0 + 0.5 * std::sin(a), 0.5 * std::cos(1.3 * a));
    }
    return x / x.norm();
}

} // namespace

HssSolver::HssSolver(std::shared_ptr<const HssApprox> h, DenseMatrix f, DenseMatrix g,
                     double eps_rel)
    : m_h(std::move(h)), m_f(std::move(f)), m_g(std::move(g))
{
    require(m_h != nullptr, ErrorClass::invalid_argument, "missing approximation");
    require(eps_rel > 0.0 && std::isfinite(eps_rel), ErrorClass::invalid_tolerance,
            "tolerance must be positive");
    const Index n = m_h->rows();
    require(m_h->cols() == n, ErrorClass::dimension, "solve with a non-square matrix");
    require(m_f.rows() == n && m_g.rows() == n && m_f.cols() == m_g.cols() && m_f.cols() >= 1,
            ErrorClass::dimension, "weight sizes differ from the matrix");
    require_finite(m_f, "weights");
    require_finite(m_g, "weights");

    // weights in sorted order
    DenseMatrix fs(n, m_f.cols()), gs(n, m_g.cols());
    for (Index i = 0; i < n; ++i)
    {
        fs.row(i) = m_f.row(m_h->row_permutation()[i]);
        gs.row(i) = m_g.row(m_h->col_permutation()[i]);
    }

    // norm scale from exact sampled columns
    double colmax = 0.0;
    const Index samples = std::min<Index>(n, 32);
    for (Index q = 0; q < samples; ++q)
    {
        const Index j = (q * n) / samples;
        const DenseMatrix col = Builder{*m_h, fs, gs, 0.0, 0.0}.weighted_exact(0, n, j, j + 1);
        colmax = std::max(colmax, col.norm());
    }
    require(colmax > 0.0, ErrorClass::ill_conditioned, "matrix is zero");
    const double kappa_max = 1.0 / (static_cast<double>(n) * eps_rel);
    const Builder b{*m_h, fs, gs, 0.1 * eps_rel * colmax, kappa_max};
    m_root = b.build(0, n);

    // power iterations for ||A|| and ||A^{-1}||
    ComplexVector x = start_vector(n);
    double nrm      = 0.0;
    for (int it = 0; it < 8; ++it)
    {
        const ComplexVector y = apply(x);
        nrm                   = std::max(nrm, y.norm());
        ComplexVector z       = apply_transposed(y.conjugate()).conjugate();
        const double zn       = z.norm();
        if (!(zn > 0.0))
            break;
        x = z / zn;
    }
    x           = start_vector(n);
    double inrm = 0.0;
    for (int it = 0; it < 8; ++it)
    {
        const ComplexVector y = solve(x);
        require(all_finite(y), ErrorClass::ill_conditioned, "non-finite solution");
        inrm            = std::max(inrm, y.norm());
        ComplexVector z = solve_transposed(y.conjugate()).conjugate();
        const double zn = z.norm();
        require(std::isfinite(zn), ErrorClass::ill_conditioned, "non-finite solution");
        if (!(zn > 0.0))
            break;
        x = z / zn;
    }
    m_norm  = nrm;
    m_kappa = nrm * inrm;
    if (!(m_kappa <= kappa_max))
    {
        fail(ErrorClass::ill_conditioned,
             "condition estimate above 1 / (n eps)");
    }
}

HssSolver::~HssSolver() = default;
HssSolver::HssSolver(HssSolver&&) noexcept = default;
HssSolver& HssSolver::operator=(HssSolver&&) noexcept = default;

Index HssSolver::max_offdiag_rank() const
{
    return max_rank(m_root.get());
}

ComplexVector HssSolver::apply(const ComplexVector& u) const
{
    const Index n = m_h->rows();
    require(u.size() == n, ErrorClass::dimension, "vector size differs from matrix");
    ComplexVector y = ComplexVector::Zero(n);
    for (Index l = 0; l < m_f.cols(); ++l)
        y += m_f.col(l).cwiseProduct(m_h->apply(m_g.col(l).cwiseProduct(u)));
    return y;
}

ComplexVector HssSolver::apply_transposed(const ComplexVector& u) const
{
    const Index n = m_h->rows();
    require(u.size() == n, ErrorClass::dimension, "vector size differs from matrix");
    ComplexVector y = ComplexVector::Zero(n);
    for (Index l = 0; l < m_f.cols(); ++l)
        y += m_g.col(l).cwiseProduct(m_h->apply_transposed(m_f.col(l).cwiseProduct(u)));
    return y;
}

ComplexVector HssSolver::solve_sorted(const ComplexVector& b, bool transposed) const
{
    return Builder::solve_node(*m_root, b, transposed);
}

ComplexVector HssSolver::solve(const ComplexVector& b) const
{
    const Index n = m_h->rows();
    require(b.size() == n, ErrorClass::dimension, "right-hand side size differs");
    require_finite(b, "right-hand side");
    ComplexVector bs(n);
    for (Index i = 0; i < n; ++i)
        bs(i) = b(m_h->row_permutation()[i]);
    const ComplexVector xs = solve_sorted(bs, false);
    ComplexVector x(n);
    for (Index j = 0; j < n; ++j)
        x(m_h->col_permutation()[j]) = xs(j);
    return x;
}

ComplexVector HssSolver::solve_transposed(const ComplexVector& b) const
{
    const Index n = m_h->rows();
    require(b.size() == n, ErrorClass::dimension, "right-hand side size differs");
    require_finite(b, "right-hand side");
    ComplexVector bs(n);
    for (Index j = 0; j < n; ++j)
        bs(j) = b(m_h->col_permutation()[j]);
    const ComplexVector xs = solve_sorted(bs, true);
    ComplexVector x(n);
    for (Index i = 0; i < n; ++i)
        x(m_h->row_permutation()[i]) = xs(i);
    return x;
}

ComplexVector hss_solve(const HssApprox& h, const ComplexVector& b)
{
    auto hp = std::make_shared<const HssApprox>(h);
    const Index n = h.rows();
    HssSolver solver(hp, DenseMatrix::Ones(n, 1), DenseMatrix::Ones(n, 1), h.epsilon());
    return solver.solve(b);
}

} // namespace structkit
