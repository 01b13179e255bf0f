#include "structkit/hss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "structkit/core_fft.hpp"

namespace structkit
{

// ---------------------------------------------------------------------------
// Certificates and expansions

SeparationCertificate separation(const KnotSet& s, const KnotSet& t, cplx c)
{
    require(s.size() >= 1, ErrorClass::dimension, "separation of an empty row set");
    SeparationCertificate cert;
    cert.center = c;
    double dmin = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < s.size(); ++i)
    {
        dmin = std::min(dmin, std::abs(s[i] - c));
    }
    if (dmin == 0.0)
    {
        fail(ErrorClass::degenerate_center, "a row knot coincides with the center");
    }
    double rmax = 0.0;
    for (Index j = 0; j < t.size(); ++j)
    {
        rmax = std::max(rmax, std::abs(t[j] - c));
    }
    cert.delta = dmin;
    cert.theta = rmax / dmin;
    return cert;
}

LowRankBlock taylor_low_rank(const KnotSet& s, const KnotSet& t, cplx c, Index k)
{
    require(k >= 0, ErrorClass::invalid_argument, "negative expansion order");
    LowRankBlock b;
    b.cert = separation(s, t, c);
    if (!(b.cert.theta < 1.0))
    {
        fail(ErrorClass::not_separated, "theta >= 1 at the given center");
    }
    b.row_knots = s;
    b.col_knots = t;
    b.k         = k;
    b.F.resize(s.size(), k + 1);
    b.G.resize(t.size(), k + 1);
    for (Index i = 0; i < s.size(); ++i)
    {
        const cplx w = 1.0 / (s[i] - c);
        cplx p       = w;
        for (Index h = 0; h <= k; ++h)
        {
            b.F(i, h) = p;
            p *= w;
        }
    }
    for (Index j = 0; j < t.size(); ++j)
    {
        const cplx q = t[j] - c;
        cplx p       = 1.0;
        for (Index h = 0; h <= k; ++h)
        {
            b.G(j, h) = p;
            p *= q;
        }
    }
    b.error_bound = std::pow(b.cert.theta, static_cast<double>(k)) /
                    ((1.0 - b.cert.theta) * b.cert.delta);
    return b;
}

Index rank_bound(double theta, double delta, double eps)
{
    require(theta > 0.0 && theta < 1.0 && delta > 0.0 && eps > 0.0, ErrorClass::invalid_argument,
            "rank bound needs 0 < theta < 1, delta > 0, eps > 0");
    const double x = std::log(4.0 / ((1.0 - theta) * delta * pi * eps)) / std::log(1.0 / theta);
    if (x <= 0.0)
    {
        return 0;
    }
    Index r = static_cast<Index>(std::ceil(x));
    // guard the rounding of the closed form
    auto ok = [&](Index q) {
        return 4.0 * std::pow(theta, static_cast<double>(q)) / ((1.0 - theta) * delta * pi) <= eps;
    };
    while (r > 0 && ok(r - 1))
    {
        --r;
    }
    while (!ok(r))
    {
        ++r;
    }
    return r;
}

Index taylor_order(double theta, double delta, double eps)
{
    const double b0 = 1.0 / ((1.0 - theta) * delta);
    if (b0 <= eps)
    {
        return 0;
    }
    if (theta == 0.0)
    {
        return 1;
    }
    Index k = static_cast<Index>(std::ceil(std::log(b0 / eps) / std::log(1.0 / theta)));
    k       = std::max<Index>(k, 0);
    auto ok = [&](Index q) { return std::pow(theta, static_cast<double>(q)) * b0 <= eps; };
    while (k > 0 && ok(k - 1))
    {
        --k;
    }
    while (!ok(k))
    {
        ++k;
    }
    return k;
}

double sector_theta(Index k)
{
    require(k >= 1, ErrorClass::invalid_argument, "sector count < 1");
    const double kk = static_cast<double>(k);
    return 2.0 * std::sin(pi / (2.0 * kk)) / std::sin(3.0 * pi / kk);
}

namespace
{

// Angle of z relative to the direction of ref, in [0, 2 pi).
double rel_angle(cplx z, cplx ref)
{
    double a = std::arg(z * std::conj(ref));
    if (a < 0.0)
    {
        a += 2.0 * pi;
    }
    if (a >= 2.0 * pi)
    {
        a = 0.0;
    }
    return a;
}

cplx unit_dir(cplx ref)
{
    const double r = std::abs(ref);
    return r > 0.0 ? ref / r : cplx(1.0);
}

} // namespace

std::array<Index, 3> SectorPartition::extended(Index q) const
{
    return {(q + k - 1) % k, q, (q + 1) % k};
}

std::vector<Index> SectorPartition::extended_rows(Index q) const
{
    std::vector<Index> rows;
    const auto ext = extended(q);
    for (Index p : ext)
    {
        // with k >= 3 the three sectors are distinct
        rows.insert(rows.end(), s_sectors[p].begin(), s_sectors[p].end());
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
}

std::vector<Index> SectorPartition::admissible_rows(Index q) const
{
    std::vector<Index> ext = extended_rows(q);
    std::vector<Index> rows;
    for (Index p = 0; p < k; ++p)
    {
        for (Index i : s_sectors[p])
        {
            if (!std::binary_search(ext.begin(), ext.end(), i))
            {
                rows.push_back(i);
            }
        }
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

SectorPartition sector_partition(const KnotSet& s, const KnotSet& t, Index k, cplx e,
                                 bool allow_coarse)
{
    require(k >= (allow_coarse ? 3 : 8), ErrorClass::partition_too_coarse,
            "too few sectors for separated far blocks");
    SectorPartition sp;
    sp.k = k;
    sp.h = (std::max(s.size(), t.size()) + k - 1) / k;
    const cplx dir = unit_dir(e);
    const double width = 2.0 * pi / static_cast<double>(k);
    auto sector_of = [&](cplx z) {
        Index p = static_cast<Index>(std::floor(rel_angle(z, dir) / width));
        return std::min<Index>(std::max<Index>(p, 0), k - 1);
    };
    sp.s_sectors.assign(k, {});
    sp.t_sectors.assign(k, {});
    std::vector<double> ang(s.size());
    for (Index i = 0; i < s.size(); ++i)
    {
        ang[i] = rel_angle(s[i], dir);
        sp.s_sectors[sector_of(s[i])].push_back(i);
    }
    for (Index j = 0; j < t.size(); ++j)
    {
        sp.t_sectors[sector_of(t[j])].push_back(j);
    }
    sp.permutation.resize(s.size());
    std::iota(sp.permutation.begin(), sp.permutation.end(), Index(0));
    std::stable_sort(sp.permutation.begin(), sp.permutation.end(),
                     [&](Index a, Index b) { return ang[a] < ang[b]; });
    sp.centers.resize(k);
    for (Index p = 0; p < k; ++p)
    {
        double phi = (2.0 * static_cast<double>(p) + 1.0) * pi / static_cast<double>(k);
        cplx c     = dir * std::polar(1.0, phi);
        // move the center along the arc when a knot sits on it
        const double shift = pi / (8.0 * static_cast<double>(k) *
                                   static_cast<double>(std::max<Index>(1, s.size() + t.size())));
        for (int attempt = 0; attempt < 8; ++attempt)
        {
            bool hit = false;
            for (Index i : sp.s_sectors[p])
                hit = hit || std::abs(s[i] - c) <= 1e-12;
            for (Index j : sp.t_sectors[p])
                hit = hit || std::abs(t[j] - c) <= 1e-12;
            if (!hit)
                break;
            phi += shift * (attempt + 1);
            c = dir * std::polar(1.0, phi);
        }
        sp.centers[p] = c;
    }
    return sp;
}

// ---------------------------------------------------------------------------
// Cluster trees

namespace
{

struct Cluster
{
    Index begin = 0, end = 0;
    cplx center = 0.0;
    int child[2] = {-1, -1};
    int level    = 0;
    // angular range, interval or box extents
    double a0 = 0.0, a1 = 0.0, b0 = 0.0, b1 = 0.0;

    Index size() const
    {
        return end - begin;
    }
    bool leaf() const
    {
        return child[0] < 0 && child[1] < 0;
    }
};

struct ClusterTree
{
    std::vector<Cluster> nodes;
    std::vector<Index> perm;
    ComplexVector pts;
};

struct TreeParams
{
    ClusterGeometry geometry;
    Index leaf;
    int min_depth;
    cplx dir;
    // common root extents
    double a0, a1, b0, b1;
};

constexpr int max_depth = 60;

void set_center(const TreeParams& tp, ClusterTree& tr, Cluster& c)
{
    const Index n = c.size();
    if (n == 0)
    {
        c.center = 0.0;
        return;
    }
    if (tp.geometry == ClusterGeometry::angular)
    {
        double r = 0.0;
        for (Index i = c.begin; i < c.end; ++i)
            r += std::abs(tr.pts(i));
        r /= static_cast<double>(n);
        double phi   = 0.5 * (c.a0 + c.a1);
        const double step = (c.a1 - c.a0) / (8.0 * static_cast<double>(n + 1));
        cplx cen     = tp.dir * std::polar(r, phi);
        for (int attempt = 0; attempt < 8; ++attempt)
        {
            bool hit = false;
            for (Index i = c.begin; i < c.end && !hit; ++i)
                hit = std::abs(tr.pts(i) - cen) <= 1e-12 * std::max(r, 1e-300);
            if (!hit)
                break;
            phi += step;
            cen = tp.dir * std::polar(r, phi);
        }
        c.center = cen;
        return;
    }
    double xl = std::numeric_limits<double>::infinity(), xh = -xl;
    double yl = xl, yh = -xl;
    for (Index i = c.begin; i < c.end; ++i)
    {
        xl = std::min(xl, tr.pts(i).real());
        xh = std::max(xh, tr.pts(i).real());
        yl = std::min(yl, tr.pts(i).imag());
        yh = std::max(yh, tr.pts(i).imag());
    }
    c.center = cplx(0.5 * (xl + xh), 0.5 * (yl + yh));
}

// Coordinates used for splitting: relative angle, real part, or both parts.
struct Coords
{
    std::vector<double> x, y;
};

void split(const TreeParams& tp, ClusterTree& tr, Coords& co, int id)
{
    for (;;)
    {
        const Cluster c = tr.nodes[id];
        const bool want = c.size() > 1 && c.level < max_depth &&
                          (c.level < tp.min_depth || c.size() > tp.leaf);
        if (!want)
            return;
        bool use_y = false;
        double mid = 0.5 * (c.a0 + c.a1);
        if (tp.geometry == ClusterGeometry::box && (c.b1 - c.b0) > (c.a1 - c.a0))
        {
            use_y = true;
            mid   = 0.5 * (c.b0 + c.b1);
        }
        const auto& key = use_y ? co.y : co.x;
        std::vector<Index> lo, hi;
        for (Index i = c.begin; i < c.end; ++i)
            (key[tr.perm[i]] < mid ? lo : hi).push_back(tr.perm[i]);

        if (lo.empty() || hi.empty())
        {
            Cluster half = c;
            if (use_y)
                (lo.empty() ? half.b0 : half.b1) = mid;
            else
                (lo.empty() ? half.a0 : half.a1) = mid;
            const double w0 = use_y ? c.b1 - c.b0 : c.a1 - c.a0;
            if (w0 <= 1e-15 * (1.0 + std::abs(mid)))
                return;
            if (c.level < tp.min_depth)
            {
                // keep the leaf depth uniform with a single child
                half.level    = c.level + 1;
                half.child[0] = half.child[1] = -1;
                tr.nodes.push_back(half);
                const int cid         = static_cast<int>(tr.nodes.size()) - 1;
                tr.nodes[id].child[0] = cid;
                split(tp, tr, co, cid);
                return;
            }
            tr.nodes[id] = half;
            continue;
        }

        Index pos = c.begin;
        for (Index i : lo)
            tr.perm[pos++] = i;
        for (Index i : hi)
            tr.perm[pos++] = i;
        Cluster left = c, right = c;
        left.child[0] = left.child[1] = right.child[0] = right.child[1] = -1;
        left.level = right.level = c.level + 1;
        left.end    = c.begin + static_cast<Index>(lo.size());
        right.begin = left.end;
        if (use_y)
        {
            left.b1  = mid;
            right.b0 = mid;
        }
        else
        {
            left.a1  = mid;
            right.a0 = mid;
        }
        tr.nodes.push_back(left);
        const int lid = static_cast<int>(tr.nodes.size()) - 1;
        tr.nodes.push_back(right);
        const int rid = static_cast<int>(tr.nodes.size()) - 1;
        tr.nodes[id].child[0] = lid;
        tr.nodes[id].child[1] = rid;
        split(tp, tr, co, lid);
        split(tp, tr, co, rid);
        return;
    }
}

ClusterTree build_tree(const KnotSet& k, const TreeParams& tp)
{
    ClusterTree tr;
    const Index n = k.size();
    tr.perm.resize(n);
    std::iota(tr.perm.begin(), tr.perm.end(), Index(0));
    Coords co;
    co.x.resize(n);
    co.y.resize(n);
    for (Index i = 0; i < n; ++i)
    {
        if (tp.geometry == ClusterGeometry::angular)
            co.x[i] = rel_angle(k[i], tp.dir);
        else
            co.x[i] = k[i].real();
        co.y[i] = k[i].imag();
    }
    // sort by the primary key first so leaves come out ordered
    std::stable_sort(tr.perm.begin(), tr.perm.end(),
                     [&](Index a, Index b) { return co.x[a] < co.x[b]; });
    tr.pts.resize(n);
    Cluster root;
    root.begin = 0;
    root.end   = n;
    root.a0    = tp.a0;
    root.a1    = tp.a1;
    root.b0    = tp.b0;
    root.b1    = tp.b1;
    tr.nodes.push_back(root);
    split(tp, tr, co, 0);
    for (Index i = 0; i < n; ++i)
        tr.pts(i) = k[tr.perm[i]];
    for (auto& c : tr.nodes)
        set_center(tp, tr, c);
    return tr;
}

// ---------------------------------------------------------------------------
// Block tree

struct BlockBuilder
{
    const ClusterTree& rt;
    const ClusterTree& ct;
    double eps;
    const HssOptions& opt;
    std::vector<HssBlock>& out;
    Index overflows = 0;
    std::vector<Index> level_counter;

    struct Candidate
    {
        bool ok = false;
        bool col_centered = true;
        cplx center;
        double theta = 0.0, delta = 0.0, radius = 1.0;
        Index k = 0;
    };

    Candidate test(const Cluster& r, const Cluster& c) const
    {
        Candidate best;
        auto eval = [&](bool colc) {
            Candidate cand;
            cand.col_centered = colc;
            const Cluster& own   = colc ? c : r;
            const Cluster& other = colc ? r : c;
            const ComplexVector& op = colc ? ct.pts : rt.pts;
            const ComplexVector& xp = colc ? rt.pts : ct.pts;
            cand.center = own.center;
            double rad  = 0.0;
            for (Index i = own.begin; i < own.end; ++i)
                rad = std::max(rad, std::abs(op(i) - cand.center));
            double dmin = std::numeric_limits<double>::infinity();
            for (Index i = other.begin; i < other.end; ++i)
                dmin = std::min(dmin, std::abs(xp(i) - cand.center));
            if (!(dmin > 0.0))
                return cand;
            cand.theta  = rad / dmin;
            cand.delta  = dmin;
            cand.radius = rad > 0.0 ? rad : 1.0;
            if (cand.theta > opt.theta_max)
                return cand;
            cand.k  = taylor_order(cand.theta, cand.delta, eps);
            cand.ok = true;
            return cand;
        };
        const Candidate a = eval(true);
        const Candidate b = eval(false);
        if (a.ok && b.ok)
            best = (b.k < a.k || (b.k == a.k && b.theta < a.theta)) ? b : a;
        else if (a.ok)
            best = a;
        else if (b.ok)
            best = b;
        return best;
    }

    void emit(const Cluster& r, const Cluster& c, int level, const Candidate* cand)
    {
        HssBlock b;
        b.row_begin = r.begin;
        b.row_end   = r.end;
        b.col_begin = c.begin;
        b.col_end   = c.end;
        b.level     = level;
        if (static_cast<Index>(level_counter.size()) <= level)
            level_counter.resize(level + 1, 0);
        b.sector = level_counter[level];
        if (cand)
        {
            b.low_rank     = true;
            b.col_centered = cand->col_centered;
            b.center       = cand->center;
            b.k            = cand->k;
            b.theta        = cand->theta;
            b.delta        = cand->delta;
            b.radius       = cand->radius;
            b.bound        = std::pow(cand->theta, static_cast<double>(cand->k)) /
                      ((1.0 - cand->theta) * cand->delta);
        }
        out.push_back(b);
    }

    void run(int ri, int ci, int level)
    {
        const Cluster& r = rt.nodes[ri];
        const Cluster& c = ct.nodes[ci];
        if (r.size() == 0 || c.size() == 0)
            return;
        const Candidate cand = test(r, c);
        const bool both_leaves = r.leaf() && c.leaf();
        if (cand.ok)
        {
            const Index width = cand.k + 1;
            if (width >= std::min(r.size(), c.size()))
            {
                emit(r, c, level, nullptr);
                return;
            }
            if (width <= opt.rank_cap)
            {
                emit(r, c, level, &cand);
                return;
            }
            ++overflows;
        }
        if (both_leaves)
        {
            emit(r, c, level, nullptr);
            return;
        }
        // split the larger non-leaf side, or both when comparable
        const bool split_r = !r.leaf() && (c.leaf() || r.size() * 2 >= c.size());
        const bool split_c = !c.leaf() && (r.leaf() || c.size() * 2 >= r.size());
        for (int a = 0; a < 2; ++a)
        {
            const int rr = split_r ? r.child[a] : (a == 0 ? ri : -1);
            if (rr < 0)
                continue;
            for (int b = 0; b < 2; ++b)
            {
                const int cc = split_c ? c.child[b] : (b == 0 ? ci : -1);
                if (cc < 0)
                    continue;
                run(rr, cc, level + 1);
            }
        }
    }
};

TreeParams root_params(ClusterGeometry g, const KnotSet& s, const KnotSet& t, Index leaf,
                       int min_depth, cplx ref)
{
    TreeParams tp;
    tp.geometry  = g;
    tp.leaf      = leaf;
    tp.min_depth = min_depth;
    tp.dir       = unit_dir(ref);
    if (g == ClusterGeometry::angular)
    {
        tp.a0 = 0.0;
        tp.a1 = 2.0 * pi;
        tp.b0 = tp.b1 = 0.0;
        return tp;
    }
    double xl = std::numeric_limits<double>::infinity(), xh = -xl, yl = xl, yh = -xl;
    for (const KnotSet* k : {&s, &t})
    {
        for (Index i = 0; i < k->size(); ++i)
        {
            xl = std::min(xl, (*k)[i].real());
            xh = std::max(xh, (*k)[i].real());
            yl = std::min(yl, (*k)[i].imag());
            yh = std::max(yh, (*k)[i].imag());
        }
    }
    // widen slightly so the top edge falls inside a half-open range
    const double pad = 1e-12 * (1.0 + std::max({std::abs(xl), std::abs(xh), std::abs(yl), std::abs(yh)}));
    tp.a0 = xl - pad;
    tp.a1 = xh + pad;
    tp.b0 = yl - pad;
    tp.b1 = yh + pad;
    if (g == ClusterGeometry::interval)
        tp.b0 = tp.b1 = 0.0;
    return tp;
}

ClusterGeometry pick_geometry(const KnotSet& s, const KnotSet& t)
{
    if (s.is_real() && t.is_real())
        return ClusterGeometry::interval;
    if (t.grid_scalar() || s.grid_scalar())
        return ClusterGeometry::angular;
    // knots in an annulus around the unit circle cluster well by angle
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const KnotSet* k : {&s, &t})
    {
        if (k->size() == 0)
            continue;
        rmin = std::min(rmin, k->magnitudes().minCoeff());
        rmax = std::max(rmax, k->magnitudes().maxCoeff());
    }
    if (rmin > 0.5 && rmax < 2.0)
        return ClusterGeometry::angular;
    return ClusterGeometry::box;
}

} // namespace

Index default_leaf_size(Index n, double eps)
{
    const double delta = 3.0 * pi / static_cast<double>(std::max<Index>(n, 1));
    const Index r      = rank_bound(1.0 / 3.0, delta, eps);
    return std::clamp<Index>(2 * r, 16, 256);
}

HssApprox HssApprox::build(const KnotSet& s, const KnotSet& t, double eps, const HssOptions& opt)
{
    require(eps > 0.0 && std::isfinite(eps), ErrorClass::invalid_tolerance,
            "tolerance must be positive");
    require(s.size() >= 1 && t.size() >= 1, ErrorClass::dimension, "empty knot set");
    const DisjointReport rep = check_disjoint(s, t);
    (void)rep;
    HssApprox h;
    h.m_s   = s;
    h.m_t   = t;
    h.m_eps = eps;
    const Index n = std::max(s.size(), t.size());
    h.m_leaf      = opt.leaf_size > 0 ? opt.leaf_size : default_leaf_size(n, eps);

    ClusterGeometry g = opt.geometry == ClusterGeometry::automatic ? pick_geometry(s, t) : opt.geometry;
    if (g == ClusterGeometry::interval)
    {
        require(s.is_real() && t.is_real(), ErrorClass::off_line_knot,
                "interval clusters need real knots");
    }
    int min_depth = 0;
    if (g == ClusterGeometry::angular)
    {
        // k0 = max(8, largest power of two <= n / h0) sectors at the leaf level
        Index k0 = 1;
        while (k0 * 2 <= n / h.m_leaf)
            k0 *= 2;
        k0 = std::max<Index>(k0, 8);
        while ((Index(1) << min_depth) < k0)
            ++min_depth;
    }
    const TreeParams tp = root_params(g, s, t, h.m_leaf, min_depth, opt.reference);
    const ClusterTree rt = build_tree(s, tp);
    const ClusterTree ct = build_tree(t, tp);
    h.m_row_perm = rt.perm;
    h.m_col_perm = ct.perm;
    h.m_sp       = rt.pts;
    h.m_tp       = ct.pts;

    if (n <= hss_dense_threshold)
    {
        HssBlock b;
        b.row_end = s.size();
        b.col_end = t.size();
        h.m_blocks.push_back(b);
        return h;
    }
    BlockBuilder bb{rt, ct, eps, opt, h.m_blocks, 0, {}};
    bb.run(0, 0, 0);
    h.m_rank_overflows = bb.overflows;
    return h;
}

HssStats HssApprox::stats() const
{
    HssStats st;
    st.rank_overflows = m_rank_overflows;
    for (const auto& b : m_blocks)
    {
        st.levels = std::max<Index>(st.levels, b.level + 1);
        if (b.low_rank)
        {
            ++st.admissible_blocks;
            st.max_rank  = std::max(st.max_rank, b.k + 1);
            st.max_bound = std::max(st.max_bound, b.bound);
        }
        else
        {
            ++st.dense_blocks;
            st.dense_entries += b.rows() * b.cols();
        }
    }
    return st;
}

// ---------------------------------------------------------------------------
// Products

namespace
{

void horner_block_apply(const HssBlock& b, const ComplexVector& sp, const ComplexVector& tp,
                        const ComplexVector& u, ComplexVector& y, std::vector<cplx>& mom)
{
    const Index k = b.k;
    const cplx c  = b.center;
    const double rho = b.radius;
    mom.assign(static_cast<size_t>(k + 1), cplx(0.0));
    if (b.col_centered)
    {
        // m_h = sum_j u_j ((t_j - c) / rho)^h
        for (Index j = b.col_begin; j < b.col_end; ++j)
        {
            const cplx q = (tp(j) - c) / rho;
            cplx p       = u(j);
            for (Index h = 0; h <= k; ++h)
            {
                mom[h] += p;
                p *= q;
            }
        }
        for (Index i = b.row_begin; i < b.row_end; ++i)
        {
            const cplx w = 1.0 / (sp(i) - c);
            const cplx z = rho * w;
            cplx acc     = mom[k];
            for (Index h = k - 1; h >= 0; --h)
                acc = acc * z + mom[h];
            y(i) += w * acc;
        }
    }
    else
    {
        // M_h = sum_j u_j v_j (rho v_j)^h, v_j = 1 / (t_j - c)
        for (Index j = b.col_begin; j < b.col_end; ++j)
        {
            const cplx v = 1.0 / (tp(j) - c);
            const cplx q = rho * v;
            cplx p       = u(j) * v;
            for (Index h = 0; h <= k; ++h)
            {
                mom[h] += p;
                p *= q;
            }
        }
        for (Index i = b.row_begin; i < b.row_end; ++i)
        {
            const cplx z = (sp(i) - c) / rho;
            cplx acc     = mom[k];
            for (Index h = k - 1; h >= 0; --h)
                acc = acc * z + mom[h];
            y(i) -= acc;
        }
    }
}

void horner_block_apply_t(const HssBlock& b, const ComplexVector& sp, const ComplexVector& tp,
                          const ComplexVector& u, ComplexVector& y, std::vector<cplx>& mom)
{
    const Index k = b.k;
    const cplx c  = b.center;
    const double rho = b.radius;
    mom.assign(static_cast<size_t>(k + 1), cplx(0.0));
    if (b.col_centered)
    {
        // q_h = sum_i u_i w_i (rho w_i)^h
        for (Index i = b.row_begin; i < b.row_end; ++i)
        {
            const cplx w = 1.0 / (sp(i) - c);
            const cplx z = rho * w;
            cplx p       = u(i) * w;
            for (Index h = 0; h <= k; ++h)
            {
                mom[h] += p;
                p *= z;
            }
        }
        for (Index j = b.col_begin; j < b.col_end; ++j)
        {
            const cplx q = (tp(j) - c) / rho;
            cplx acc     = mom[k];
            for (Index h = k - 1; h >= 0; --h)
                acc = acc * q + mom[h];
            y(j) += acc;
        }
    }
    else
    {
        // q_h = sum_i u_i ((s_i - c) / rho)^h
        for (Index i = b.row_begin; i < b.row_end; ++i)
        {
            const cplx z = (sp(i) - c) / rho;
            cplx p       = u(i);
            for (Index h = 0; h <= k; ++h)
            {
                mom[h] += p;
                p *= z;
            }
        }
        for (Index j = b.col_begin; j < b.col_end; ++j)
        {
            const cplx v = 1.0 / (tp(j) - c);
            const cplx q = rho * v;
            cplx acc     = mom[k];
            for (Index h = k - 1; h >= 0; --h)
                acc = acc * q + mom[h];
            y(j) -= v * acc;
        }
    }
}

} // namespace

ComplexVector HssApprox::apply_sorted(const ComplexVector& u) const
{
    require(u.size() == cols(), ErrorClass::dimension, "vector size differs from columns");
    ComplexVector y = ComplexVector::Zero(rows());
    std::vector<cplx> mom;
    for (const auto& b : m_blocks)
    {
        if (b.low_rank)
        {
            horner_block_apply(b, m_sp, m_tp, u, y, mom);
            continue;
        }
        for (Index i = b.row_begin; i < b.row_end; ++i)
        {
            const cplx si = m_sp(i);
            cplx acc      = 0.0;
            for (Index j = b.col_begin; j < b.col_end; ++j)
                acc += u(j) / (si - m_tp(j));
            y(i) += acc;
        }
    }
    return y;
}

ComplexVector HssApprox::apply_transposed_sorted(const ComplexVector& u) const
{
    require(u.size() == rows(), ErrorClass::dimension, "vector size differs from rows");
    ComplexVector y = ComplexVector::Zero(cols());
    std::vector<cplx> mom;
    for (const auto& b : m_blocks)
    {
        if (b.low_rank)
        {
            horner_block_apply_t(b, m_sp, m_tp, u, y, mom);
            continue;
        }
        for (Index j = b.col_begin; j < b.col_end; ++j)
        {
            const cplx tj = m_tp(j);
            cplx acc      = 0.0;
            for (Index i = b.row_begin; i < b.row_end; ++i)
                acc += u(i) / (m_sp(i) - tj);
            y(j) += acc;
        }
    }
    return y;
}

ComplexVector HssApprox::apply(const ComplexVector& u) const
{
    require(u.size() == cols(), ErrorClass::dimension, "vector size differs from columns");
    require_finite(u, "vector");
    ComplexVector up(cols());
    for (Index j = 0; j < cols(); ++j)
        up(j) = u(m_col_perm[j]);
    const ComplexVector yp = apply_sorted(up);
    ComplexVector y(rows());
    for (Index i = 0; i < rows(); ++i)
        y(m_row_perm[i]) = yp(i);
    return y;
}

ComplexVector HssApprox::apply_transposed(const ComplexVector& u) const
{
    require(u.size() == rows(), ErrorClass::dimension, "vector size differs from rows");
    require_finite(u, "vector");
    ComplexVector up(rows());
    for (Index i = 0; i < rows(); ++i)
        up(i) = u(m_row_perm[i]);
    const ComplexVector yp = apply_transposed_sorted(up);
    ComplexVector y(cols());
    for (Index j = 0; j < cols(); ++j)
        y(m_col_perm[j]) = yp(j);
    return y;
}

void HssApprox::block_factors(const HssBlock& b, Index r0, Index r1, Index c0, Index c1,
                              DenseMatrix& w, DenseMatrix& p) const
{
    const Index k = b.k;
    const cplx c  = b.center;
    const double rho = b.radius;
    w.resize(r1 - r0, k + 1);
    p.resize(c1 - c0, k + 1);
    for (Index i = r0; i < r1; ++i)
    {
        cplx z, a;
        if (b.col_centered)
        {
            const cplx wi = 1.0 / (m_sp(i) - c);
            z             = rho * wi;
            a             = wi;
        }
        else
        {
            z = (m_sp(i) - c) / rho;
            a = 1.0;
        }
        for (Index h = 0; h <= k; ++h)
        {
            w(i - r0, h) = a;
            a *= z;
        }
    }
    for (Index j = c0; j < c1; ++j)
    {
        cplx z, a;
        if (b.col_centered)
        {
            z = (m_tp(j) - c) / rho;
            a = 1.0;
        }
        else
        {
            const cplx v = 1.0 / (m_tp(j) - c);
            z            = rho * v;
            a            = -v;
        }
        for (Index h = 0; h <= k; ++h)
        {
            p(j - c0, h) = a;
            a *= z;
        }
    }
}

DenseMatrix HssApprox::exact_entries(Index r0, Index r1, Index c0, Index c1) const
{
    DenseMatrix m(r1 - r0, c1 - c0);
    for (Index i = r0; i < r1; ++i)
        for (Index j = c0; j < c1; ++j)
            m(i - r0, j - c0) = 1.0 / (m_sp(i) - m_tp(j));
    return m;
}

DenseMatrix HssApprox::to_dense() const
{
    DenseMatrix sorted(rows(), cols());
    for (const auto& b : m_blocks)
    {
        if (b.low_rank)
        {
            DenseMatrix w, p;
            block_factors(b, b.row_begin, b.row_end, b.col_begin, b.col_end, w, p);
            sorted.block(b.row_begin, b.col_begin, b.rows(), b.cols()) = w * p.transpose();
        }
        else
        {
            sorted.block(b.row_begin, b.col_begin, b.rows(), b.cols()) =
                exact_entries(b.row_begin, b.row_end, b.col_begin, b.col_end);
        }
    }
    DenseMatrix out(rows(), cols());
    for (Index i = 0; i < rows(); ++i)
        for (Index j = 0; j < cols(); ++j)
            out(m_row_perm[i], m_col_perm[j]) = sorted(i, j);
    return out;
}

HssApprox build_cv_hss(const KnotSet& s, cplx e, double eps, const HssOptions& opt)
{
    require(eps > 0.0 && std::isfinite(eps), ErrorClass::invalid_tolerance,
            "tolerance must be positive");
    require(e != cplx(0.0), ErrorClass::invalid_scalar, "grid scalar e = 0");
    const KnotSet t = KnotSet::grid(e, s.size());
    HssOptions o    = opt;
    o.geometry      = ClusterGeometry::angular;
    o.reference     = e;
    return HssApprox::build(s, t, eps, o);
}

HssApprox real_line_hss(const KnotSet& s, const KnotSet& t, double eps, const HssOptions& opt)
{
    require(s.is_real() && t.is_real(), ErrorClass::off_line_knot, "knots are not real");
    HssOptions o = opt;
    o.geometry   = ClusterGeometry::interval;
    return HssApprox::build(s, t, eps, o);
}

ComplexVector hss_matvec(const HssApprox& h, const ComplexVector& u)
{
    return h.apply(u);
}

} // namespace structkit
