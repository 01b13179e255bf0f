#include "structkit/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

#include "structkit/core_fft.hpp"
#include "structkit/displacement.hpp"
#include "structkit/transforms.hpp"

namespace structkit
{

// ---------------------------------------------------------------------------
// CV matrices

namespace
{

using CacheKey = std::tuple<std::uint64_t, Index, double, double, double>;

struct CvCache
{
    std::mutex mutex;
    std::map<CacheKey, std::shared_ptr<const HssApprox>> entries;
};

CvCache& cv_cache()
{
    static CvCache cache;
    return cache;
}

constexpr std::size_t cv_cache_limit = 64;

void require_square(const KnotSet& s, const ComplexVector& u, const char* what)
{
    require(u.size() == s.size(), ErrorClass::dimension, std::string(what) + " size differs");
    require_finite(u, what);
}

} // namespace

std::shared_ptr<const HssApprox> cv_approximation(const KnotSet& s, cplx e, double eps)
{
    require(eps > 0.0 && std::isfinite(eps), ErrorClass::invalid_tolerance,
            "tolerance must be positive");
    const CacheKey key{s.hash(), s.size(), e.real(), e.imag(), eps};
    CvCache& c = cv_cache();
    {
        std::lock_guard<std::mutex> lock(c.mutex);
        auto it = c.entries.find(key);
        if (it != c.entries.end())
        {
            return it->second;
        }
    }
    auto h = std::make_shared<const HssApprox>(build_cv_hss(s, e, eps));
    std::lock_guard<std::mutex> lock(c.mutex);
    if (c.entries.size() >= cv_cache_limit)
    {
        c.entries.clear();
    }
    return c.entries.emplace(key, std::move(h)).first->second;
}

void clear_cv_cache()
{
    CvCache& c = cv_cache();
    std::lock_guard<std::mutex> lock(c.mutex);
    c.entries.clear();
}

std::size_t cv_cache_size()
{
    CvCache& c = cv_cache();
    std::lock_guard<std::mutex> lock(c.mutex);
    return c.entries.size();
}

ComplexVector cv_matvec(const KnotSet& s, cplx e, const ComplexVector& u, double eps)
{
    require_square(s, u, "vector");
    return cv_approximation(s, e, eps)->apply(u);
}

ComplexVector cv_transposed_matvec(const KnotSet& s, cplx e, const ComplexVector& u,
                                   double eps)
{
    require_square(s, u, "vector");
    return cv_approximation(s, e, eps)->apply_transposed(u);
}

namespace
{

HssSolver unit_solver(std::shared_ptr<const HssApprox> h, double eps)
{
    const Index n = h->rows();
    return HssSolver(std::move(h), DenseMatrix::Ones(n, 1), DenseMatrix::Ones(n, 1), eps);
}

} // namespace

ComplexVector cv_solve(const KnotSet& s, cplx e, const ComplexVector& b, double eps)
{
    require_square(s, b, "right-hand side");
    return unit_solver(cv_approximation(s, e, eps), eps).solve(b);
}

ComplexVector cv_transposed_solve(const KnotSet& s, cplx e, const ComplexVector& b, double eps)
{
    require_square(s, b, "right-hand side");
    return unit_solver(cv_approximation(s, e, eps), eps).solve_transposed(b);
}

// ---------------------------------------------------------------------------
// Cauchy and Cauchy-like

namespace
{

// Compressed C_{s,t}, through the CV cache when t is a grid of the right size.
std::shared_ptr<const HssApprox> cauchy_approximation(const KnotSet& s, const KnotSet& t,
                                                      double eps)
{
    if (s.size() == t.size())
    {
        if (const auto e = t.grid_scalar())
        {
            return cv_approximation(s, *e, eps);
        }
    }
    return std::make_shared<const HssApprox>(HssApprox::build(s, t, eps));
}

double max_abs(const DenseMatrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double inf_norm(const ComplexVector& u)
{
    return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff();
}

void check_operand(const CauchyLikeOperand& m)
{
    require(m.F.rows() == m.s.size() && m.G.rows() == m.t.size() && m.F.cols() == m.G.cols(),
            ErrorClass::dimension, "generator sizes differ from the knot counts");
    require(m.F.cols() >= 1, ErrorClass::dimension, "empty generator");
    require_finite(m.F, "generator");
    require_finite(m.G, "generator");
}

} // namespace

ComplexVector cauchy_matvec(const KnotSet& s, const KnotSet& t, const ComplexVector& u,
                            double eps)
{
    require(u.size() == t.size(), ErrorClass::dimension, "vector size differs");
    require_finite(u, "vector");
    return cauchy_approximation(s, t, eps)->apply(u);
}

ComplexVector cauchy_transposed_matvec(const KnotSet& s, const KnotSet& t,
                                       const ComplexVector& u, double eps)
{
    require(u.size() == s.size(), ErrorClass::dimension, "vector size differs");
    require_finite(u, "vector");
    return cauchy_approximation(s, t, eps)->apply_transposed(u);
}

CauchyLikeOperand cauchy_operand(const KnotSet& s, const KnotSet& t)
{
    return {s, t, DenseMatrix::Ones(s.size(), 1), DenseMatrix::Ones(t.size(), 1)};
}

DenseMatrix cauchy_like_dense(const CauchyLikeOperand& m)
{
    check_operand(m);
    const DenseMatrix c = cauchy_matrix(m.s, m.t);
    DenseMatrix out     = DenseMatrix::Zero(m.s.size(), m.t.size());
    for (Index l = 0; l < m.F.cols(); ++l)
    {
        out += m.F.col(l).asDiagonal() * c * m.G.col(l).asDiagonal();
    }
    return out;
}

ApproxResult cauchy_like_matvec(const CauchyLikeOperand& m, const ComplexVector& u, double eps)
{
    check_operand(m);
    require(u.size() == m.t.size(), ErrorClass::dimension, "vector size differs");
    require_finite(u, "vector");
    const auto h = cauchy_approximation(m.s, m.t, eps);
    ApproxResult r;
    r.value = ComplexVector::Zero(m.s.size());
    for (Index l = 0; l < m.F.cols(); ++l)
    {
        r.value += m.F.col(l).cwiseProduct(h->apply(m.G.col(l).cwiseProduct(u)));
    }
    const double scale = max_abs(m.F) * max_abs(m.G) * static_cast<double>(m.F.cols());
    r.error_bound = eps * static_cast<double>(m.t.size()) * inf_norm(u) * scale;
    r.route       = m.t.grid_scalar() ? "cv" : "hss";
    return r;
}

ComplexVector cauchy_like_transposed_matvec(const CauchyLikeOperand& m, const ComplexVector& u,
                                            double eps)
{
    check_operand(m);
    require(u.size() == m.s.size(), ErrorClass::dimension, "vector size differs");
    require_finite(u, "vector");
    const auto h    = cauchy_approximation(m.s, m.t, eps);
    ComplexVector y = ComplexVector::Zero(m.t.size());
    for (Index l = 0; l < m.F.cols(); ++l)
    {
        y += m.G.col(l).cwiseProduct(h->apply_transposed(m.F.col(l).cwiseProduct(u)));
    }
    return y;
}

ComplexVector cauchy_like_solve(const CauchyLikeOperand& m, const ComplexVector& b, double eps)
{
    check_operand(m);
    require(m.s.size() == m.t.size(), ErrorClass::dimension, "solve with a non-square matrix");
    require_square(m.s, b, "right-hand side");
    return HssSolver(cauchy_approximation(m.s, m.t, eps), m.F, m.G, eps).solve(b);
}

ComplexVector cauchy_like_transposed_solve(const CauchyLikeOperand& m, const ComplexVector& b,
                                           double eps)
{
    check_operand(m);
    require(m.s.size() == m.t.size(), ErrorClass::dimension, "solve with a non-square matrix");
    require_square(m.t, b, "right-hand side");
    return HssSolver(cauchy_approximation(m.s, m.t, eps), m.F, m.G, eps).solve_transposed(b);
}

// ---------------------------------------------------------------------------
// Vandermonde

namespace
{

// s_i^n - f^n with an overflow guard.
ComplexVector power_gap(const KnotSet& s, cplx fn)
{
    const Index n = s.size();
    for (Index i = 0; i < n; ++i)
    {
        const double m = s.magnitudes()(i);
        if (m > 0.0 && static_cast<double>(n) * std::log(m) > 700.0)
        {
            fail(ErrorClass::magnitude_overflow,
                 "s_i^n overflows; scale the knots towards the unit circle");
        }
    }
    return (knot_powers(s, n).array() - fn).matrix();
}

struct VandermondeSetup
{
    Index n = 0;
    cplx f;
    cplx fn;
    ComplexVector gap;  // s_i^n - f^n
    ComplexVector fpow; // f^j
    ComplexVector wpow; // w_n^j
    double eps = 0.0;   // kernel tolerance
};

VandermondeSetup vandermonde_setup(const KnotSet& s, double eps)
{
    require(eps > 0.0 && std::isfinite(eps), ErrorClass::invalid_tolerance,
            "tolerance must be positive");
    VandermondeSetup v;
    v.n  = s.size();
    v.f  = vandermonde_auxiliary_scalar(s);
    v.fn = std::pow(v.f, static_cast<double>(v.n));
    v.gap = power_gap(s, v.fn);
    v.fpow.resize(v.n);
    v.wpow.resize(v.n);
    cplx p = 1.0;
    for (Index j = 0; j < v.n; ++j)
    {
        v.fpow(j) = p;
        p *= v.f;
        v.wpow(j) = root_of_unity_pow(v.n, j);
    }
    // the diagonal factor s^n - f^n scales the kernel error
    const double splus = s.max_magnitude();
    const double gmax  = std::max(inf_norm(v.gap), 1e-300);
    v.eps              = std::clamp(eps * (splus + 1.0) / gmax, 1e-15, eps);
    return v;
}

} // namespace

cplx vandermonde_auxiliary_scalar(const KnotSet& s)
{
    const Index n = s.size();
    require(n >= 1, ErrorClass::dimension, "empty knot set");
    const ComplexVector sn = [&] {
        for (Index i = 0; i < n; ++i)
        {
            const double m = s.magnitudes()(i);
            if (m > 0.0 && static_cast<double>(n) * std::log(m) > 700.0)
            {
                fail(ErrorClass::magnitude_overflow,
                     "s_i^n overflows; scale the knots towards the unit circle");
            }
        }
        return knot_powers(s, n);
    }();
    const Index cand = 4 * n;
    double best      = -1.0;
    Index best_k     = 0;
    for (Index k = 0; k < cand; ++k)
    {
        // candidate f^n = exp(2 pi i (k + 1/2) / (4n)), off the unit roots
        const cplx fn = std::polar(1.0, 2.0 * pi * (static_cast<double>(k) + 0.5) /
                                            static_cast<double>(cand));
        double dmin = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n; ++i)
        {
            dmin = std::min(dmin, std::abs(sn(i) - fn));
        }
        if (dmin > best)
        {
            best   = dmin;
            best_k = k;
        }
    }
    const double phi = 2.0 * pi * (static_cast<double>(best_k) + 0.5) /
                       (static_cast<double>(cand) * static_cast<double>(n));
    return std::polar(1.0, phi);
}

namespace
{

// V_s = Omega diag(e^j) when s is the grid e w^j.
std::optional<ComplexVector> grid_powers(const KnotSet& s)
{
    const auto e = s.grid_scalar();
    if (!e)
    {
        return std::nullopt;
    }
    ComplexVector p(s.size());
    cplx q = 1.0;
    for (Index j = 0; j < s.size(); ++j)
    {
        p(j) = q;
        q *= *e;
    }
    return p;
}

} // namespace

ComplexVector vandermonde_matvec(const KnotSet& s, const ComplexVector& u, double eps)
{
    require_square(s, u, "vector");
    if (const auto ep = grid_powers(s))
    {
        return dft(ep->cwiseProduct(u));
    }
    const VandermondeSetup v = vandermonde_setup(s, eps);
    const double n           = static_cast<double>(v.n);
    ComplexVector w          = dft(v.fpow.cwiseProduct(u)).cwiseProduct(v.wpow);
    ComplexVector y          = cv_matvec(s, v.f, w, v.eps);
    return (std::pow(v.f, 1.0 - n) / n) * v.gap.cwiseProduct(y);
}

ComplexVector vandermonde_transposed_matvec(const KnotSet& s, const ComplexVector& u,
                                            double eps)
{
    require_square(s, u, "vector");
    if (const auto ep = grid_powers(s))
    {
        return ep->cwiseProduct(dft(u));
    }
    const VandermondeSetup v = vandermonde_setup(s, eps);
    const double n           = static_cast<double>(v.n);
    const ComplexVector y    = cv_transposed_matvec(s, v.f, v.gap.cwiseProduct(u), v.eps);
    return (std::pow(v.f, 1.0 - n) / n) * v.fpow.cwiseProduct(dft(v.wpow.cwiseProduct(y)));
}

ComplexVector vandermonde_solve(const KnotSet& s, const ComplexVector& b, double eps)
{
    require_square(s, b, "right-hand side");
    if (const auto ep = grid_powers(s))
    {
        return idft(b).cwiseQuotient(*ep);
    }
    const VandermondeSetup v = vandermonde_setup(s, eps);
    const double n           = static_cast<double>(v.n);
    const ComplexVector y    = cv_solve(s, v.f, b.cwiseQuotient(v.gap), v.eps);
    // Omega^H x = n idft(x)
    const ComplexVector z = n * idft(y.cwiseQuotient(v.wpow));
    return std::pow(v.f, n - 1.0) * z.cwiseQuotient(v.fpow);
}

ComplexVector vandermonde_transposed_solve(const KnotSet& s, const ComplexVector& b, double eps)
{
    require_square(s, b, "right-hand side");
    if (const auto ep = grid_powers(s))
    {
        return idft(b.cwiseQuotient(*ep));
    }
    const VandermondeSetup v = vandermonde_setup(s, eps);
    const double n           = static_cast<double>(v.n);
    const ComplexVector z    = (n * idft(b.cwiseQuotient(v.fpow))).cwiseQuotient(v.wpow);
    const ComplexVector y    = cv_transposed_solve(s, v.f, z, v.eps);
    return std::pow(v.f, n - 1.0) * y.cwiseQuotient(v.gap);
}

// ---------------------------------------------------------------------------
// Moebius maps

namespace
{

constexpr double geometry_tol = 1e-10;

} // namespace

LineMap mobius_line_to_real(const KnotSet& knots, cplx c, cplx a)
{
    require(std::abs(std::abs(a) - 1.0) <= 1e-12, ErrorClass::invalid_argument,
            "line direction must have unit modulus");
    ComplexVector r(knots.size());
    for (Index i = 0; i < knots.size(); ++i)
    {
        const cplx z = (knots[i] - c) / a;
        if (std::abs(z.imag()) > geometry_tol * std::max(1.0, std::abs(z)))
        {
            fail(ErrorClass::off_line_knot, "knot off the stated line");
        }
        r(i) = z.real();
    }
    // 1/(s - t) = 1/(a (s' - t'))
    return {KnotSet(std::move(r)), 1.0 / a};
}

CircleMap mobius_circle_to_real(const KnotSet& knots, cplx a)
{
    require(std::abs(std::abs(a) - 1.0) <= 1e-12, ErrorClass::invalid_argument,
            "pole must lie on the unit circle");
    const cplx I(0.0, 1.0);
    const Index n = knots.size();
    ComplexVector r(n);
    CircleMap m;
    m.row_factor.resize(n);
    m.col_factor.resize(n);
    for (Index i = 0; i < n; ++i)
    {
        const cplx s = knots[i];
        if (std::abs(std::abs(s) - 1.0) > geometry_tol)
        {
            fail(ErrorClass::off_circle_knot, "knot off the unit circle");
        }
        if (s == a)
        {
            fail(ErrorClass::knot_collision, "knot at the pole of the map");
        }
        const cplx z = I * (s + a) / (s - a);
        if (std::abs(z.imag()) > geometry_tol * std::max(1.0, std::abs(z)))
        {
            fail(ErrorClass::off_circle_knot, "knot off the unit circle");
        }
        r(i) = z.real();
        // 1/(s - t) = u_s v_t / (s' - t')
        m.row_factor(i) = -2.0 * a * I / (s - a);
        m.col_factor(i) = 1.0 / (s - a);
    }
    m.real_knots = KnotSet(std::move(r));
    return m;
}

cplx farthest_circle_point(const KnotSet& knots)
{
    const Index n = knots.size();
    if (n == 0)
    {
        return 1.0;
    }
    std::vector<double> ang(knots.angles().data(), knots.angles().data() + n);
    std::sort(ang.begin(), ang.end());
    double best = ang.front() + 2.0 * pi - ang.back();
    double mid  = ang.back() + 0.5 * best;
    for (Index i = 1; i < n; ++i)
    {
        const double gap = ang[i] - ang[i - 1];
        if (gap > best)
        {
            best = gap;
            mid  = ang[i - 1] + 0.5 * gap;
        }
    }
    return std::polar(1.0, mid);
}

std::optional<LineFit> detect_line(const KnotSet& knots)
{
    const Index n = knots.size();
    if (n == 0)
    {
        return std::nullopt;
    }
    const cplx c = knots[0];
    Index far    = 0;
    for (Index i = 1; i < n; ++i)
    {
        if (std::abs(knots[i] - c) > std::abs(knots[far] - c))
        {
            far = i;
        }
    }
    if (far == 0)
    {
        return LineFit{c, 1.0};
    }
    cplx a = (knots[far] - c) / std::abs(knots[far] - c);
    if (a.real() < 0.0 || (a.real() == 0.0 && a.imag() < 0.0))
    {
        a = -a;
    }
    if (std::abs(a.imag()) <= 1e-15)
    {
        a = 1.0;
    }
    const double scale = std::max(1.0, std::abs(knots[far] - c));
    for (Index i = 0; i < n; ++i)
    {
        if (std::abs(((knots[i] - c) / a).imag()) > geometry_tol * scale)
        {
            return std::nullopt;
        }
    }
    return LineFit{c, a};
}

bool on_unit_circle(const KnotSet& knots)
{
    for (Index i = 0; i < knots.size(); ++i)
    {
        if (std::abs(knots.magnitudes()(i) - 1.0) > geometry_tol)
        {
            return false;
        }
    }
    return true;
}

namespace
{

KnotSet join(const KnotSet& a, const KnotSet& b)
{
    ComplexVector v(a.size() + b.size());
    v << a.knots(), b.knots();
    // the union may repeat a knot only when s and t collide, which check_disjoint rejects
    return KnotSet(std::move(v));
}

KnotSet subset(const KnotSet& k, const std::vector<Index>& idx)
{
    ComplexVector v(static_cast<Index>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i)
    {
        v(static_cast<Index>(i)) = k[idx[i]];
    }
    return KnotSet(std::move(v));
}

int arc_of(cplx z)
{
    double a = std::arg(z);
    if (a < 0.0)
        a += 2.0 * pi;
    const int h = static_cast<int>(std::floor(a / (2.0 * pi / 3.0)));
    return std::clamp(h, 0, 2);
}

// Weighted sum over the real-line images: sum_l f_l . C_{s,t} (g_l . u).
ComplexVector real_route_apply(const KnotSet& sr, const KnotSet& tr, const DenseMatrix& f,
                               const DenseMatrix& g, const ComplexVector& u, double eps)
{
    const HssApprox h = real_line_hss(sr, tr, eps);
    ComplexVector y   = ComplexVector::Zero(sr.size());
    for (Index l = 0; l < f.cols(); ++l)
    {
        y += f.col(l).cwiseProduct(h.apply(g.col(l).cwiseProduct(u)));
    }
    return y;
}

ApproxResult line_route(const CauchyLikeOperand& m, const LineFit& line, const ComplexVector& u,
                        double eps)
{
    const LineMap ms = mobius_line_to_real(m.s, line.c, line.a);
    const LineMap mt = mobius_line_to_real(m.t, line.c, line.a);
    ApproxResult r;
    r.value = ms.scale * real_route_apply(ms.real_knots, mt.real_knots, m.F, m.G, u, eps);
    r.error_bound = eps * static_cast<double>(m.t.size()) * inf_norm(u) * max_abs(m.F) *
                    max_abs(m.G) * static_cast<double>(m.F.cols());
    r.route = line.a == 1.0 && line.c.imag() == 0.0 ? "real-line" : "line";
    return r;
}

// Blocks of rows in arc p and columns in arc q go through the midpoint of an
// arc outside {p, q}, so every entry is counted once.
ApproxResult three_arc_route(const CauchyLikeOperand& m, const ComplexVector& u, double eps)
{
    std::array<std::vector<Index>, 3> rows, cols;
    for (Index i = 0; i < m.s.size(); ++i)
        rows[arc_of(m.s[i])].push_back(i);
    for (Index j = 0; j < m.t.size(); ++j)
        cols[arc_of(m.t[j])].push_back(j);
    ApproxResult r;
    r.value            = ComplexVector::Zero(m.s.size());
    double worst       = 0.0;
    const Index d      = m.F.cols();
    for (int p = 0; p < 3; ++p)
    {
        if (rows[p].empty())
            continue;
        for (int q = 0; q < 3; ++q)
        {
            if (cols[q].empty())
                continue;
            int h = 0;
            while (h == p || h == q)
                ++h;
            const cplx a     = std::polar(1.0, (2.0 * h + 1.0) * pi / 3.0);
            const KnotSet sb = subset(m.s, rows[p]);
            const KnotSet tb = subset(m.t, cols[q]);
            const CircleMap ms = mobius_circle_to_real(sb, a);
            const CircleMap mt = mobius_circle_to_real(tb, a);
            DenseMatrix f(sb.size(), d), g(tb.size(), d);
            ComplexVector ub(tb.size());
            for (size_t i = 0; i < rows[p].size(); ++i)
                f.row(static_cast<Index>(i)) = m.F.row(rows[p][i]) * ms.row_factor(static_cast<Index>(i));
            for (size_t j = 0; j < cols[q].size(); ++j)
            {
                g.row(static_cast<Index>(j)) = m.G.row(cols[q][j]) * mt.col_factor(static_cast<Index>(j));
                ub(static_cast<Index>(j))    = u(cols[q][j]);
            }
            const ComplexVector yb =
                real_route_apply(ms.real_knots, mt.real_knots, f, g, ub, eps);
            for (size_t i = 0; i < rows[p].size(); ++i)
                r.value(rows[p][i]) += yb(static_cast<Index>(i));
            worst = std::max(worst, inf_norm(ms.row_factor) * inf_norm(mt.col_factor));
        }
    }
    r.error_bound = eps * static_cast<double>(m.t.size()) * inf_norm(u) * max_abs(m.F) *
                    max_abs(m.G) * static_cast<double>(d) * worst;
    r.route = "three-arc";
    return r;
}

struct Reknot
{
    KnotSet grid;
    cplx e;
    double amplification;
};

// Grid on the unit circle away from the knots, and kappa(C_{t,grid}).
Reknot reknot_plan(const KnotSet& t, double eps, const AnyKnotsOptions& opt)
{
    const Index n = t.size();
    Reknot r;
    r.e    = vandermonde_auxiliary_scalar(t);
    r.grid = KnotSet::grid(r.e, n);
    try
    {
        // tight tolerance so the estimate itself is not the limiting factor
        const double inner = std::min(eps, 1.0 / (static_cast<double>(n) * opt.max_amplification));
        const HssSolver sol = unit_solver(cv_approximation(t, r.e, inner), inner);
        r.amplification     = sol.condition_estimate();
    }
    catch (const Error& err)
    {
        if (err.error_class() != ErrorClass::ill_conditioned &&
            err.error_class() != ErrorClass::singular_matrix)
            throw;
        fail(ErrorClass::conditioning_warning,
             "re-knotting multiplier is too ill conditioned: " + std::string(err.what()));
    }
    if (r.amplification > opt.max_amplification)
    {
        fail(ErrorClass::conditioning_warning,
             "re-knotting amplification " + std::to_string(r.amplification) +
                 " exceeds the threshold");
    }
    return r;
}

} // namespace

ApproxResult cauchy_any_knots_matvec(const CauchyLikeOperand& m, const ComplexVector& u,
                                     double eps, const AnyKnotsOptions& opt)
{
    (void)opt;
    check_operand(m);
    require(u.size() == m.t.size(), ErrorClass::dimension, "vector size differs");
    require_finite(u, "vector");
    check_disjoint(m.s, m.t);
    const KnotSet all = join(m.s, m.t);
    if (const auto line = detect_line(all))
    {
        return line_route(m, *line, u, eps);
    }
    if (on_unit_circle(all))
    {
        return three_arc_route(m, u, eps);
    }
    ApproxResult r = cauchy_like_matvec(m, u, eps);
    r.route        = "box";
    return r;
}

ApproxResult cauchy_any_knots_solve(const CauchyLikeOperand& m, const ComplexVector& b,
                                    double eps, const AnyKnotsOptions& opt)
{
    check_operand(m);
    require(m.s.size() == m.t.size(), ErrorClass::dimension, "solve with a non-square matrix");
    require_square(m.s, b, "right-hand side");
    check_disjoint(m.s, m.t);
    const Index n     = m.s.size();
    const KnotSet all = join(m.s, m.t);
    ApproxResult r;
    if (const auto line = detect_line(all))
    {
        const LineMap ms = mobius_line_to_real(m.s, line->c, line->a);
        const LineMap mt = mobius_line_to_real(m.t, line->c, line->a);
        auto h = std::make_shared<const HssApprox>(real_line_hss(ms.real_knots, mt.real_knots, eps));
        r.value = HssSolver(h, ms.scale * m.F, m.G, eps).solve(b);
        r.route = "line";
        return r;
    }
    if (on_unit_circle(all))
    {
        const cplx a       = farthest_circle_point(all);
        const CircleMap ms = mobius_circle_to_real(m.s, a);
        const CircleMap mt = mobius_circle_to_real(m.t, a);
        auto h = std::make_shared<const HssApprox>(real_line_hss(ms.real_knots, mt.real_knots, eps));
        r.value = HssSolver(h, ms.row_factor.asDiagonal() * m.F,
                            mt.col_factor.asDiagonal() * m.G, eps)
                      .solve(b);
        r.route = "circle";
        return r;
    }
    // M x = b with x = C_{t,g} y and P = M C_{t,g} Cauchy-like over (s, grid),
    // or the same through M^T with C_{s,g}; the smaller amplification wins
    std::optional<Reknot> rt, rs;
    std::optional<Error> last;
    try
    {
        rt = reknot_plan(m.t, eps, opt);
    }
    catch (const Error& e)
    {
        if (e.error_class() != ErrorClass::conditioning_warning)
            throw;
        last = e;
    }
    try
    {
        rs = reknot_plan(m.s, eps, opt);
    }
    catch (const Error& e)
    {
        if (e.error_class() != ErrorClass::conditioning_warning)
            throw;
        last = e;
    }
    if (!rt && !rs)
    {
        throw *last;
    }
    const bool use_t = rt && (!rs || rt->amplification <= rs->amplification);
    DisplacementGenerator gen;
    MatvecOptions mo;
    mo.epsilon = eps;
    if (use_t)
    {
        gen.A = OperatorDescriptor::diagonal(m.s);
        gen.B = OperatorDescriptor::diagonal(m.t);
        gen.F = m.F;
        gen.G = m.G;
        const DisplacementGenerator p = cauchy_reknot(gen, rt->e, mo);
        const CauchyLikeOperand po{m.s, rt->grid, p.F, p.G};
        const ComplexVector y = cauchy_like_solve(po, b, eps);
        r.value               = cv_matvec(m.t, rt->e, y, eps);
        r.amplification       = rt->amplification;
        r.route               = "reknot";
    }
    else
    {
        // M^T = sum diag(g) C_{t,s} diag(-f)
        gen.A = OperatorDescriptor::diagonal(m.t);
        gen.B = OperatorDescriptor::diagonal(m.s);
        gen.F = m.G;
        gen.G = -m.F;
        const DisplacementGenerator p = cauchy_reknot(gen, rs->e, mo);
        const CauchyLikeOperand po{m.t, rs->grid, p.F, p.G};
        // M = C_{s,g}^{-T} P^T, so x = P^{-T} C_{s,g}^T b
        const ComplexVector c = cv_transposed_matvec(m.s, rs->e, b, eps);
        r.value               = cauchy_like_transposed_solve(po, c, eps);
        r.amplification       = rs->amplification;
        r.route               = "reknot-transposed";
    }
    r.error_bound = eps * static_cast<double>(n) * r.amplification;
    return r;
}

// ---------------------------------------------------------------------------
// Polynomials and rational functions

namespace
{

constexpr Index poly_direct_cut = 16;

} // namespace

ComplexVector poly_multipoint_eval(const ComplexVector& p, const KnotSet& s, double eps)
{
    require_finite(p, "coefficients");
    const Index n = s.size();
    const Index m = p.size();
    if (n == 0)
    {
        return ComplexVector(0);
    }
    if (n <= poly_direct_cut || m == 0)
    {
        ComplexVector out = ComplexVector::Zero(n);
        for (Index i = 0; i < n; ++i)
        {
            cplx acc = 0.0;
            for (Index j = m - 1; j >= 0; --j)
                acc = acc * s[i] + p(j);
            out(i) = acc;
        }
        return out;
    }
    // p(x) = sum_k x^{kn} p_k(x) with deg p_k < n
    const ComplexVector sn = knot_powers(s, n);
    ComplexVector out      = ComplexVector::Zero(n);
    ComplexVector scale    = ComplexVector::Ones(n);
    for (Index k0 = 0; k0 < m; k0 += n)
    {
        ComplexVector chunk = ComplexVector::Zero(n);
        chunk.head(std::min(n, m - k0)) = p.segment(k0, std::min(n, m - k0));
        out += scale.cwiseProduct(vandermonde_matvec(s, chunk, eps));
        scale = scale.cwiseProduct(sn);
    }
    return out;
}

ComplexVector poly_interpolate(const KnotSet& s, const ComplexVector& v, double eps)
{
    require_square(s, v, "values");
    if (s.size() <= poly_direct_cut)
    {
        const DenseSolution sol = dense_solve(vandermonde_matrix(s), v);
        return sol.x;
    }
    return vandermonde_solve(s, v, eps);
}

ComplexVector rational_eval(const KnotSet& s, const KnotSet& t, const ComplexVector& u,
                            double eps)
{
    return cauchy_matvec(s, t, u, eps);
}

ComplexVector rational_interpolate(const KnotSet& s, const KnotSet& t, const ComplexVector& v,
                                   double eps)
{
    return cauchy_like_solve(cauchy_operand(s, t), v, eps);
}

LogKernelResult log_kernel_eval_from_roots(const KnotSet& roots, const KnotSet& targets,
                                           double eps,
                                           const std::function<long(Index, Index)>& branch_shift)
{
    require(eps > 0.0 && std::isfinite(eps), ErrorClass::invalid_tolerance,
            "tolerance must be positive");
    const Index m = targets.size();
    const Index n = roots.size();
    check_disjoint(targets, roots);
    ComplexVector sum = ComplexVector::Zero(m);
    if (n > 0 && m > 0)
    {
        // per-term tolerance so that the summed logarithm is accurate to eps
        const double eps_k = std::max(eps / static_cast<double>(std::max<Index>(n, 1)), 1e-15);
        const HssApprox h  = HssApprox::build(targets, roots, eps_k);
        const ComplexVector& sp = h.sorted_rows();
        const ComplexVector& tp = h.sorted_cols();
        ComplexVector ssum      = ComplexVector::Zero(m);
        for (const HssBlock& b : h.blocks())
        {
            if (!b.low_rank)
            {
                for (Index i = b.row_begin; i < b.row_end; ++i)
                    for (Index j = b.col_begin; j < b.col_end; ++j)
                        ssum(i) += std::log(sp(i) - tp(j));
                continue;
            }
            // ln(1 - q) = -sum_{h >= 1} q^h / h with |q| <= theta
            const double th = std::max(b.theta, 1e-300);
            Index order     = 1;
            while (std::pow(th, static_cast<double>(order + 1)) / (1.0 - th) > eps_k &&
                   order < 200)
                ++order;
            const cplx c = b.center;
            if (b.col_centered)
            {
                // ln(s - t) = ln(s - c) + ln(1 - (t - c)/(s - c))
                const double rho = b.radius;
                ComplexVector mom = ComplexVector::Zero(order + 1);
                for (Index j = b.col_begin; j < b.col_end; ++j)
                {
                    const cplx q = (tp(j) - c) / rho;
                    cplx p       = q;
                    for (Index k = 1; k <= order; ++k)
                    {
                        mom(k) += p;
                        p *= q;
                    }
                }
                const double cnt = static_cast<double>(b.cols());
                for (Index i = b.row_begin; i < b.row_end; ++i)
                {
                    const cplx w = rho / (sp(i) - c);
                    cplx acc     = 0.0;
                    cplx p       = w;
                    for (Index k = 1; k <= order; ++k)
                    {
                        acc += p * mom(k) / static_cast<double>(k);
                        p *= w;
                    }
                    ssum(i) += cnt * std::log(sp(i) - c) - acc;
                }
            }
            else
            {
                // ln(s - t) = ln(c - t) + ln(1 - (s - c)/(t - c))
                const double rho = b.radius;
                ComplexVector mom = ComplexVector::Zero(order + 1);
                cplx base         = 0.0;
                for (Index j = b.col_begin; j < b.col_end; ++j)
                {
                    base += std::log(c - tp(j));
                    const cplx w = rho / (tp(j) - c);
                    cplx p       = w;
                    for (Index k = 1; k <= order; ++k)
                    {
                        mom(k) += p;
                        p *= w;
                    }
                }
                for (Index i = b.row_begin; i < b.row_end; ++i)
                {
                    const cplx q = (sp(i) - c) / rho;
                    cplx acc     = 0.0;
                    cplx p       = q;
                    for (Index k = 1; k <= order; ++k)
                    {
                        acc += p * mom(k) / static_cast<double>(k);
                        p *= q;
                    }
                    ssum(i) += base - acc;
                }
            }
        }
        for (Index i = 0; i < m; ++i)
        {
            sum(h.row_permutation()[i]) = ssum(i);
        }
    }
    if (branch_shift)
    {
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < n; ++j)
                sum(i) += cplx(0.0, 2.0 * pi * static_cast<double>(branch_shift(i, j)));
    }
    LogKernelResult r;
    r.values = sum.array().exp().matrix();
    if (m >= n && m > 0)
    {
        if (const auto e = targets.grid_scalar(); e && std::abs(*e - 1.0) <= 1e-12)
        {
            // at unit roots x^m = 1, so idft gives t(x) - x^n when m = n and t(x) when m > n
            ComplexVector v = r.values;
            if (m == n)
                v.array() -= 1.0;
            r.coefficients = idft(v);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Toeplitz

DisplacementGenerator toeplitz_generator(const ComplexVector& first_col,
                                         const ComplexVector& first_row)
{
    const Index n = first_col.size();
    require(n >= 1 && first_row.size() == n, ErrorClass::dimension,
            "Toeplitz data sizes differ");
    require(first_col(0) == first_row(0), ErrorClass::inconsistency,
            "first column and row disagree at the corner");
    require_finite(first_col, "first column");
    require_finite(first_row, "first row");
    // Z_1 T - T Z_{-1} = e_1 r^T + c e_n^T
    DisplacementGenerator gen;
    gen.A = OperatorDescriptor::shift(n, 1.0);
    gen.B = OperatorDescriptor::shift(n, -1.0);
    gen.F = DenseMatrix::Zero(n, 2);
    gen.G = DenseMatrix::Zero(n, 2);
    gen.F(0, 0)     = 1.0;
    gen.G(n - 1, 1) = 1.0;
    for (Index j = 0; j + 1 < n; ++j)
        gen.G(j, 0) = first_col(n - 1 - j) - first_row(j + 1);
    gen.F(0, 1) = 2.0 * first_col(0);
    for (Index i = 1; i < n; ++i)
        gen.F(i, 1) = first_row(n - i) + first_col(i);
    return gen;
}

ComplexVector toeplitz_like_solve(const DisplacementGenerator& gen, const ComplexVector& b,
                                  double eps)
{
    gen.validate();
    const Index n = gen.rows();
    require(gen.A.kind() == OperatorKind::shift && gen.B.kind() == OperatorKind::shift &&
                gen.A.scalar() == 1.0 && gen.B.scalar() == -1.0,
            ErrorClass::class_mismatch, "expected a generator under (Z_1, Z_{-1})");
    require(b.size() == n, ErrorClass::dimension, "right-hand side size differs");
    require_finite(b, "right-hand side");
    require(eps > 0.0 && std::isfinite(eps), ErrorClass::invalid_tolerance,
            "tolerance must be positive");
    const DisplacementGenerator c = toeplitz_to_cauchy_dft(gen);
    const CauchyLikeOperand op{c.A.knots(), c.B.knots(), c.F, c.G};
    // M = Omega^{-1} C N^{-1} with N = D_0^H Omega^H
    const ComplexVector y = cauchy_like_solve(op, dft(b), eps);
    ComplexVector x       = static_cast<double>(n) * idft(y);
    for (Index i = 0; i < n; ++i)
        x(i) *= std::conj(root_of_unity_pow(2 * n, i));
    return x;
}

ComplexVector toeplitz_solve(const ComplexVector& first_col, const ComplexVector& first_row,
                             const ComplexVector& b, double eps)
{
    const Index n = first_col.size();
    require(n >= 1 && b.size() == n, ErrorClass::dimension, "Toeplitz data sizes differ");
    if (n == 1)
    {
        require_finite(b, "right-hand side");
        if (first_col(0) == 0.0)
            fail(ErrorClass::singular_matrix, "zero 1x1 Toeplitz matrix");
        return b / first_col(0);
    }
    return toeplitz_like_solve(toeplitz_generator(first_col, first_row), b, eps);
}

} // namespace structkit
