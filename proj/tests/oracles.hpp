// Dense reference constructions written from the definitions, independent of
// the library's own helpers.
#ifndef STRUCTKIT_TESTS_ORACLES_HPP
#define STRUCTKIT_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

namespace oracle
{

using cplx = std::complex<double>;
using Mat  = Eigen::MatrixXcd;
using Vec  = Eigen::VectorXcd;

inline const double two_pi = 6.283185307179586476925286766559;

inline cplx unit_root(long n, long k)
{
    return std::polar(1.0, two_pi * static_cast<double>(k % n) / static_cast<double>(n));
}

inline Mat dft(long n)
{
    Mat m(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
            m(i, j) = unit_root(n, (i * j) % n);
    return m;
}

// Z_e: ones on the subdiagonal, e in the top-right corner.
inline Mat shift(long n, cplx e)
{
    Mat z = Mat::Zero(n, n);
    for (long i = 1; i < n; ++i)
        z(i, i - 1) = 1.0;
    z(0, n - 1) = e;
    return z;
}

inline Mat reversal(long n)
{
    Mat j = Mat::Zero(n, n);
    for (long i = 0; i < n; ++i)
        j(i, n - 1 - i) = 1.0;
    return j;
}

inline Mat diag(const Vec& v)
{
    return v.asDiagonal();
}

// Z_e(v) = sum_k v_k Z_e^k.
inline Mat circulant(cplx e, const Vec& v)
{
    const long n = v.size();
    Mat z        = shift(n, e);
    Mat p        = Mat::Identity(n, n);
    Mat out      = Mat::Zero(n, n);
    for (long k = 0; k < n; ++k)
    {
        out += v(k) * p;
        p = z * p;
    }
    return out;
}

inline Mat cauchy(const Vec& s, const Vec& t)
{
    Mat c(s.size(), t.size());
    for (long i = 0; i < s.size(); ++i)
        for (long j = 0; j < t.size(); ++j)
            c(i, j) = 1.0 / (s(i) - t(j));
    return c;
}

inline Mat vandermonde(const Vec& s, long cols = -1)
{
    if (cols < 0)
        cols = s.size();
    Mat v(s.size(), cols);
    for (long i = 0; i < s.size(); ++i)
    {
        cplx p = 1.0;
        for (long j = 0; j < cols; ++j)
        {
            v(i, j) = p;
            p *= s(i);
        }
    }
    return v;
}

inline Mat toeplitz(const Vec& col, const Vec& row)
{
    const long n = col.size();
    Mat t(n, row.size());
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < row.size(); ++j)
            t(i, j) = i >= j ? col(i - j) : row(j - i);
    return t;
}

inline Vec grid(cplx e, long n)
{
    Vec g(n);
    for (long j = 0; j < n; ++j)
        g(j) = e * unit_root(n, j);
    return g;
}

inline Vec random_vec(long n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vec v(n);
    for (long i = 0; i < n; ++i)
    {
        const double re = d(rng);
        v(i)            = cplx(re, d(rng));
    }
    return v;
}

inline Mat random_mat(long r, long c, std::mt19937_64& rng)
{
    Mat m(r, c);
    for (long j = 0; j < c; ++j)
        m.col(j) = random_vec(r, rng);
    return m;
}

inline Vec circle_knots(long n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> d(0.0, two_pi);
    Vec v(n);
    for (long i = 0; i < n; ++i)
        v(i) = std::polar(1.0, d(rng));
    return v;
}

// Midpoints of the n-th roots of unity, jittered a little in modulus and
// angle. Cauchy matrices against the unit grid stay well conditioned.
inline Vec near_grid(long n, std::mt19937_64& rng, double jitter = 0.02)
{
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vec v(n);
    for (long i = 0; i < n; ++i)
    {
        const double r = 1.0 + jitter * d(rng);
        v(i) = std::polar(r, two_pi * (i + 0.5 + 10.0 * jitter * d(rng)) / static_cast<double>(n));
    }
    return v;
}

inline double max_abs(const Mat& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Direct polynomial evaluation by Horner's rule.
inline Vec horner(const Vec& p, const Vec& s)
{
    Vec out(s.size());
    for (long i = 0; i < s.size(); ++i)
    {
        cplx acc = 0.0;
        for (long j = p.size() - 1; j >= 0; --j)
            acc = acc * s(i) + p(j);
        out(i) = acc;
    }
    return out;
}

} // namespace oracle

#endif
