///
/// \file hss.hpp
///
/// Compressed approximation of Cauchy matrices C_{s,t} = (1 / (s_i - t_j)).
///
/// The knots of both sets are clustered hierarchically (by angle around the
/// unit circle, by interval bisection on the real line, or by bounding-box
/// bisection elsewhere). Pairs of clusters that are separated are stored as
/// truncated Taylor expansions of the kernel; the rest are evaluated exactly.
/// Every stored expansion carries its own error certificate.
///
#ifndef STRUCTKIT_HSS_HPP
#define STRUCTKIT_HSS_HPP

#include <array>
#include <memory>
#include <vector>

#include "structkit/knots.hpp"
#include "structkit/types.hpp"

namespace structkit
{

struct SeparationCertificate
{
    /// max_t |t - c| / min_s |s - c|.
    double theta = 0.0;
    cplx center  = 0.0;
    /// min_s |s - c|.
    double delta = 0.0;
};

/// Exact theta and delta of the two sets about c; degenerate-center when some s_i = c.
SeparationCertificate separation(const KnotSet& s, const KnotSet& t, cplx c);

///
/// 1/(s_i - t_j) ~ sum_{h=0}^{k} (t_j - c)^h / (s_i - c)^{h+1} = (F G^T)_{ij}
/// with |error| <= theta^k / ((1 - theta) delta).
///
struct LowRankBlock
{
    KnotSet row_knots;
    KnotSet col_knots;
    DenseMatrix F;
    DenseMatrix G;
    SeparationCertificate cert;
    double error_bound = 0.0;
    Index k            = 0;
};

LowRankBlock taylor_low_rank(const KnotSet& s, const KnotSet& t, cplx c, Index k);

/// Smallest rho >= 0 with 4 theta^rho / ((1 - theta) delta pi) <= eps.
Index rank_bound(double theta, double delta, double eps);

/// Smallest k >= 0 with theta^k / ((1 - theta) delta) <= eps.
Index taylor_order(double theta, double delta, double eps);

/// 2 sin(pi / (2k)) / sin(3 pi / k), the separation ratio of k midpoint-centered sectors.
double sector_theta(Index k);

///
/// Sectors [arg e + 2 pi p / k, arg e + 2 pi (p + 1) / k) of the plane. The
/// extended diagonal of sector q is the union of sectors q - 1, q, q + 1
/// taken modulo k.
///
struct SectorPartition
{
    Index k = 0;
    /// Nominal knots per sector, ceil(n / k).
    Index h = 0;
    /// Rows of s sorted by angle: sorted position i holds knot permutation[i].
    std::vector<Index> permutation;
    std::vector<std::vector<Index>> s_sectors;
    std::vector<std::vector<Index>> t_sectors;
    std::vector<cplx> centers;

    std::array<Index, 3> extended(Index q) const;
    /// s indices of the extended diagonal of sector q.
    std::vector<Index> extended_rows(Index q) const;
    /// s indices outside the extended diagonal of sector q.
    std::vector<Index> admissible_rows(Index q) const;
};

/// Needs k >= 8 (below that the midpoint ratio exceeds 1) unless allow_coarse
/// is set, which only requires three distinct sectors.
SectorPartition sector_partition(const KnotSet& s, const KnotSet& t, Index k, cplx e = 1.0,
                                 bool allow_coarse = false);

enum class ClusterGeometry
{
    automatic,
    angular,
    interval,
    box,
};

struct HssOptions
{
    /// Blocks with a certificate theta above this are split further.
    double theta_max = 0.5;
    /// Largest Taylor order k + 1 stored; larger requests split the block.
    Index rank_cap = 128;
    /// Knots per leaf cluster; 0 picks it from the target accuracy.
    Index leaf_size = 0;
    ClusterGeometry geometry = ClusterGeometry::automatic;
    /// Angular reference direction; sectors start at arg(e).
    cplx reference = 1.0;
};

/// One stored block, with row and column ranges in the permuted orderings.
struct HssBlock
{
    Index row_begin = 0, row_end = 0;
    Index col_begin = 0, col_end = 0;
    bool low_rank   = false;
    /// Expansion about a column-cluster point (true) or row-cluster point.
    bool col_centered = true;
    cplx center       = 0.0;
    /// Expansion order; the factor width is k + 1.
    Index k      = 0;
    double theta = 0.0;
    double delta = 0.0;
    double bound = 0.0;
    /// Scale of the normalized powers.
    double radius = 1.0;
    int level     = 0;
    /// Index of the row cluster at its level, for reports.
    Index sector = 0;

    Index rows() const
    {
        return row_end - row_begin;
    }
    Index cols() const
    {
        return col_end - col_begin;
    }
};

struct HssStats
{
    Index levels            = 0;
    Index max_rank          = 0;
    Index admissible_blocks = 0;
    Index dense_blocks      = 0;
    Index dense_entries     = 0;
    Index rank_overflows    = 0;
    double max_bound        = 0.0;
};

class HssApprox
{
public:
    HssApprox() = default;

    /// Compressed C_{s,t} with every entry within eps.
    static HssApprox build(const KnotSet& s, const KnotSet& t, double eps,
                           const HssOptions& opt = {});

    Index rows() const
    {
        return m_s.size();
    }
    Index cols() const
    {
        return m_t.size();
    }
    double epsilon() const
    {
        return m_eps;
    }
    const KnotSet& row_knots() const
    {
        return m_s;
    }
    const KnotSet& col_knots() const
    {
        return m_t;
    }
    const std::vector<HssBlock>& blocks() const
    {
        return m_blocks;
    }
    /// Sorted position i holds original row row_permutation()[i].
    const std::vector<Index>& row_permutation() const
    {
        return m_row_perm;
    }
    const std::vector<Index>& col_permutation() const
    {
        return m_col_perm;
    }
    /// Knots in permuted order.
    const ComplexVector& sorted_rows() const
    {
        return m_sp;
    }
    const ComplexVector& sorted_cols() const
    {
        return m_tp;
    }
    HssStats stats() const;
    Index leaf_size() const
    {
        return m_leaf;
    }

    ComplexVector apply(const ComplexVector& u) const;
    ComplexVector apply_transposed(const ComplexVector& u) const;

    /// Products in the permuted orderings, without the index shuffles.
    ComplexVector apply_sorted(const ComplexVector& u) const;
    ComplexVector apply_transposed_sorted(const ComplexVector& u) const;

    /// The rows of the expansion factors of a low-rank block, restricted to
    /// sorted rows [r0, r1) and sorted columns [c0, c1): block ~ W P^T.
    void block_factors(const HssBlock& b, Index r0, Index r1, Index c0, Index c1,
                       DenseMatrix& w, DenseMatrix& p) const;
    /// Exact entries of C on sorted rows [r0, r1) and columns [c0, c1).
    DenseMatrix exact_entries(Index r0, Index r1, Index c0, Index c1) const;

    /// Dense form of the approximation in original order, for tests.
    DenseMatrix to_dense() const;

private:
    KnotSet m_s, m_t;
    ComplexVector m_sp, m_tp;
    std::vector<Index> m_row_perm, m_col_perm;
    std::vector<HssBlock> m_blocks;
    double m_eps = 0.0;
    Index m_leaf = 0;
    Index m_rank_overflows = 0;
};

/// Leaf size rule: clamp(2 rank_bound(1/3, 3 pi / n, eps), 16, 256).
Index default_leaf_size(Index n, double eps);

/// Compressed C_{s, e w^j} for the grid of size |s|.
HssApprox build_cv_hss(const KnotSet& s, cplx e, double eps, const HssOptions& opt = {});

/// Compressed C_{s,t} for real knots, with interval clusters.
HssApprox real_line_hss(const KnotSet& s, const KnotSet& t, double eps,
                        const HssOptions& opt = {});

ComplexVector hss_matvec(const HssApprox& h, const ComplexVector& u);

///
/// Factored solver for a square matrix sum_l diag(f_l) C diag(g_l) given
/// the compressed C. Off-diagonal blocks of a balanced binary partition of
/// the sorted orderings are recompressed and the matrix is inverted with
/// nested low-rank updates. A power-iteration condition estimate is
/// computed; ill-conditioned is raised above 1 / (n eps_rel).
///
class HssSolver
{
public:
    /// eps_rel is the relative accuracy target used for recompression and
    /// the condition threshold.
    HssSolver(std::shared_ptr<const HssApprox> h, DenseMatrix f, DenseMatrix g,
              double eps_rel);
    ~HssSolver();
    HssSolver(HssSolver&&) noexcept;
    HssSolver& operator=(HssSolver&&) noexcept;

    ComplexVector solve(const ComplexVector& b) const;
    ComplexVector solve_transposed(const ComplexVector& b) const;

    /// M u and M^T u through the compressed form.
    ComplexVector apply(const ComplexVector& u) const;
    ComplexVector apply_transposed(const ComplexVector& u) const;

    double condition_estimate() const
    {
        return m_kappa;
    }
    double norm_estimate() const
    {
        return m_norm;
    }
    /// Largest off-diagonal rank after recompression.
    Index max_offdiag_rank() const;

    struct Node;

private:
    std::shared_ptr<const HssApprox> m_h;
    DenseMatrix m_f, m_g;
    std::unique_ptr<Node> m_root;
    double m_kappa = 0.0;
    double m_norm  = 0.0;

    ComplexVector solve_sorted(const ComplexVector& b, bool transposed) const;
};

/// Solve with the plain Cauchy matrix of h; dense below the leaf threshold.
ComplexVector hss_solve(const HssApprox& h, const ComplexVector& b);

/// Size at or below which solves use a dense factorization.
inline constexpr Index hss_dense_threshold = 64;

} // namespace structkit

#endif // STRUCTKIT_HSS_HPP
