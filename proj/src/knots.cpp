#include "structkit/knots.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <vector>

#include "structkit/core_fft.hpp"

namespace structkit
{

KnotSet::KnotSet(ComplexVector knots) : m_knots(std::move(knots))
{
    require_finite(m_knots, "knot vector");
    const Index n = m_knots.size();
    m_angles.resize(n);
    m_magnitudes.resize(n);
    for (Index i = 0; i < n; ++i)
    {
        double a = std::arg(m_knots(i));
        if (a < 0.0)
        {
            a += 2.0 * pi;
        }
        if (a >= 2.0 * pi)
        {
            a = 0.0;
        }
        m_angles(i)     = a;
        m_magnitudes(i) = std::abs(m_knots(i));
    }
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index(0));
    auto less = [this](Index a, Index b) {
        const cplx x = m_knots(a), y = m_knots(b);
        return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
    };
    std::sort(order.begin(), order.end(), less);
    for (Index i = 1; i < n; ++i)
    {
        if (m_knots(order[i]) == m_knots(order[i - 1]))
        {
            fail(ErrorClass::knot_collision, "repeated knot in a knot set");
        }
    }
}

KnotSet KnotSet::grid(cplx e, Index n)
{
    ComplexVector t(n);
    for (Index j = 0; j < n; ++j)
    {
        t(j) = e * root_of_unity_pow(n, j);
    }
    return KnotSet(std::move(t));
}

double KnotSet::max_magnitude() const
{
    return size() == 0 ? 0.0 : m_magnitudes.maxCoeff();
}

std::optional<cplx> KnotSet::grid_scalar() const
{
    const Index n = size();
    if (n == 0)
    {
        return std::nullopt;
    }
    const cplx e   = m_knots(0);
    const double r = std::abs(e);
    if (r == 0.0)
    {
        return std::nullopt;
    }
    for (Index j = 1; j < n; ++j)
    {
        if (std::abs(m_knots(j) - e * root_of_unity_pow(n, j)) > 1e-12 * r)
        {
            return std::nullopt;
        }
    }
    return e;
}

bool KnotSet::is_real() const
{
    for (Index i = 0; i < size(); ++i)
    {
        if (m_knots(i).imag() != 0.0)
        {
            return false;
        }
    }
    return true;
}

KnotSet KnotSet::permuted(const std::vector<Index>& perm) const
{
    require(static_cast<Index>(perm.size()) == size(), ErrorClass::dimension,
            "permutation size differs from knot count");
    ComplexVector k(size());
    for (Index i = 0; i < size(); ++i)
    {
        k(i) = m_knots(perm[i]);
    }
    return KnotSet(std::move(k));
}

std::uint64_t KnotSet::hash() const
{
    // FNV-1a over the raw bytes
    std::uint64_t h = 1469598103934665603ull;
    const auto* p   = reinterpret_cast<const unsigned char*>(m_knots.data());
    const size_t nb = static_cast<size_t>(m_knots.size()) * sizeof(cplx);
    for (size_t i = 0; i < nb; ++i)
    {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    h ^= static_cast<std::uint64_t>(m_knots.size());
    return h;
}

DisjointReport check_disjoint(const KnotSet& s, const KnotSet& t)
{
    DisjointReport rep;
    if (s.size() == 0 || t.size() == 0)
    {
        rep.min_distance = std::numeric_limits<double>::infinity();
        return rep;
    }
    // sort t by real part and scan a window for each s; plain O(nm) below a size cut
    const double scale = std::max(s.max_magnitude(), t.max_magnitude());
    double dmin        = std::numeric_limits<double>::infinity();
    if (s.size() * t.size() <= 1 << 16)
    {
        for (Index i = 0; i < s.size(); ++i)
        {
            for (Index j = 0; j < t.size(); ++j)
            {
                dmin = std::min(dmin, std::abs(s[i] - t[j]));
            }
        }
    }
    else
    {
        std::vector<cplx> tv(t.knots().data(), t.knots().data() + t.size());
        auto by_re = [](cplx a, cplx b) { return a.real() < b.real(); };
        std::sort(tv.begin(), tv.end(), by_re);
        for (Index i = 0; i < s.size(); ++i)
        {
            const cplx x = s[i];
            auto it      = std::lower_bound(tv.begin(), tv.end(), x, by_re);
            for (auto r = it; r != tv.end() && r->real() - x.real() < dmin; ++r)
            {
                dmin = std::min(dmin, std::abs(x - *r));
            }
            for (auto l = it; l != tv.begin();)
            {
                --l;
                if (x.real() - l->real() >= dmin)
                {
                    break;
                }
                dmin = std::min(dmin, std::abs(x - *l));
            }
        }
    }
    if (dmin == 0.0)
    {
        fail(ErrorClass::knot_collision, "a knot of one set equals a knot of the other");
    }
    rep.min_distance     = dmin;
    rep.near_coincidence = dmin < 1e-14 * std::max(scale, 1e-300);
    return rep;
}

DenseMatrix cauchy_matrix(const KnotSet& s, const KnotSet& t)
{
    check_disjoint(s, t);
    DenseMatrix c(s.size(), t.size());
    for (Index i = 0; i < s.size(); ++i)
    {
        for (Index j = 0; j < t.size(); ++j)
        {
            c(i, j) = 1.0 / (s[i] - t[j]);
        }
    }
    return c;
}

DenseMatrix vandermonde_matrix(const KnotSet& s, Index cols)
{
    const Index n = s.size();
    const Index m = cols < 0 ? n : cols;
    DenseMatrix v(n, m);
    for (Index i = 0; i < n; ++i)
    {
        cplx p = 1.0;
        for (Index j = 0; j < m; ++j)
        {
            v(i, j) = p;
            p *= s[i];
        }
    }
    return v;
}

ComplexVector knot_powers(const KnotSet& s, Index n)
{
    ComplexVector out(s.size());
    for (Index i = 0; i < s.size(); ++i)
    {
        cplx base = s[i], acc = 1.0;
        Index e   = n;
        while (e > 0)
        {
            if (e & 1)
            {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        out(i) = acc;
    }
    return out;
}

ComplexVector vandermonde_apply_direct(const KnotSet& s, const ComplexVector& u)
{
    require(u.size() == s.size(), ErrorClass::dimension, "Vandermonde operand size differs");
    const Index n = u.size();
    ComplexVector out(s.size());
    for (Index i = 0; i < s.size(); ++i)
    {
        cplx acc = 0.0;
        for (Index j = n - 1; j >= 0; --j)
        {
            acc = acc * s[i] + u(j);
        }
        out(i) = acc;
    }
    return out;
}

ComplexVector vandermonde_transposed_apply_direct(const KnotSet& s, const ComplexVector& u)
{
    require(u.size() == s.size(), ErrorClass::dimension, "Vandermonde operand size differs");
    const Index n = s.size();
    ComplexVector out = ComplexVector::Zero(n);
    ComplexVector p   = u;
    for (Index j = 0; j < n; ++j)
    {
        out(j) = p.sum();
        p      = p.cwiseProduct(s.knots());
    }
    return out;
}

ComplexVector cauchy_apply_direct(const KnotSet& s, const KnotSet& t, const ComplexVector& u)
{
    require(u.size() == t.size(), ErrorClass::dimension, "Cauchy operand size differs");
    ComplexVector out(s.size());
    for (Index i = 0; i < s.size(); ++i)
    {
        cplx acc = 0.0;
        for (Index j = 0; j < t.size(); ++j)
        {
            acc += u(j) / (s[i] - t[j]);
        }
        out(i) = acc;
    }
    return out;
}

ComplexVector cauchy_transposed_apply_direct(const KnotSet& s, const KnotSet& t,
                                             const ComplexVector& u)
{
    require(u.size() == s.size(), ErrorClass::dimension, "Cauchy operand size differs");
    ComplexVector out(t.size());
    for (Index j = 0; j < t.size(); ++j)
    {
        cplx acc = 0.0;
        for (Index i = 0; i < s.size(); ++i)
        {
            acc += u(i) / (s[i] - t[j]);
        }
        out(j) = acc;
    }
    return out;
}

} // namespace structkit
