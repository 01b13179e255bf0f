#include "structkit/core_fft.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <vector>

namespace structkit
{

namespace
{

bool is_pow2(Index n)
{
    return n > 0 && (n & (n - 1)) == 0;
}

Index next_pow2(Index n)
{
    Index m = 1;
    while (m < n)
    {
        m <<= 1;
    }
    return m;
}

// Twiddles and bit reversal for one power-of-two length. tw[k] = exp(2 pi i k / n).
struct Radix2Plan
{
    Index n;
    std::vector<cplx> tw;
    std::vector<Index> rev;

    explicit Radix2Plan(Index n_) : n(n_), tw(static_cast<size_t>(n_ / 2 + 1)), rev(n_)
    {
        for (Index k = 0; k <= n / 2; ++k)
        {
            tw[k] = root_of_unity_pow(n, k);
        }
        Index bits = 0;
        while ((Index(1) << bits) < n)
        {
            ++bits;
        }
        for (Index i = 0; i < n; ++i)
        {
            Index r = 0;
            for (Index b = 0; b < bits; ++b)
            {
                if (i & (Index(1) << b))
                {
                    r |= Index(1) << (bits - 1 - b);
                }
            }
            rev[i] = r;
        }
    }

    // sign = +1 gives sum x_j w^{jk}, sign = -1 the conjugate kernel.
    void run(cplx* x, int sign) const
    {
        for (Index i = 0; i < n; ++i)
        {
            if (i < rev[i])
            {
                std::swap(x[i], x[rev[i]]);
            }
        }
        for (Index len = 2; len <= n; len <<= 1)
        {
            const Index half = len / 2;
            const Index step = n / len;
            for (Index start = 0; start < n; start += len)
            {
                for (Index k = 0; k < half; ++k)
                {
                    cplx w = tw[k * step];
                    if (sign < 0)
                    {
                        w = std::conj(w);
                    }
                    const cplx a = x[start + k];
                    const cplx b = w * x[start + k + half];
                    x[start + k]        = a + b;
                    x[start + k + half] = a - b;
                }
            }
        }
    }
};

// Chirp-z data for a length that is not a power of two.
struct BluesteinPlan
{
    Index n;
    Index m;
    std::vector<cplx> chirp;  // exp(pi i j^2 / n)
    std::vector<cplx> kernel; // transform of the conjugate chirp, forward sign
    std::shared_ptr<const Radix2Plan> inner;
};

std::mutex g_plan_mutex;
std::map<Index, std::shared_ptr<const Radix2Plan>> g_radix2;
std::map<Index, std::shared_ptr<const BluesteinPlan>> g_bluestein;

std::shared_ptr<const Radix2Plan> radix2_plan(Index n)
{
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        auto it = g_radix2.find(n);
        if (it != g_radix2.end())
        {
            return it->second;
        }
    }
    auto plan = std::make_shared<const Radix2Plan>(n);
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    return g_radix2.emplace(n, plan).first->second;
}

std::shared_ptr<const BluesteinPlan> bluestein_plan(Index n)
{
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        auto it = g_bluestein.find(n);
        if (it != g_bluestein.end())
        {
            return it->second;
        }
    }
    auto plan   = std::make_shared<BluesteinPlan>();
    plan->n     = n;
    plan->m     = next_pow2(2 * n - 1);
    plan->inner = radix2_plan(plan->m);
    plan->chirp.resize(n);
    for (Index j = 0; j < n; ++j)
    {
        // j^2 mod 2n keeps the phase argument small
        const Index q = (j * j) % (2 * n);
        const double a = pi * static_cast<double>(q) / static_cast<double>(n);
        plan->chirp[j] = cplx(std::cos(a), std::sin(a));
    }
    plan->kernel.assign(plan->m, cplx(0.0));
    plan->kernel[0] = std::conj(plan->chirp[0]);
    for (Index j = 1; j < n; ++j)
    {
        plan->kernel[j]           = std::conj(plan->chirp[j]);
        plan->kernel[plan->m - j] = std::conj(plan->chirp[j]);
    }
    plan->inner->run(plan->kernel.data(), +1);
    std::shared_ptr<const BluesteinPlan> cplan = plan;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    return g_bluestein.emplace(n, cplan).first->second;
}

// sum_j x_j exp(sign 2 pi i jk / n), in place.
void transform(cplx* x, Index n, int sign)
{
    if (n == 1)
    {
        return;
    }
    if (is_pow2(n))
    {
        radix2_plan(n)->run(x, sign);
        return;
    }
    if (sign < 0)
    {
        for (Index j = 0; j < n; ++j)
        {
            x[j] = std::conj(x[j]);
        }
        transform(x, n, +1);
        for (Index j = 0; j < n; ++j)
        {
            x[j] = std::conj(x[j]);
        }
        return;
    }
    const auto plan = bluestein_plan(n);
    std::vector<cplx> a(plan->m, cplx(0.0));
    for (Index j = 0; j < n; ++j)
    {
        a[j] = x[j] * plan->chirp[j];
    }
    plan->inner->run(a.data(), +1);
    for (Index j = 0; j < plan->m; ++j)
    {
        a[j] *= plan->kernel[j];
    }
    plan->inner->run(a.data(), -1);
    const double scale = 1.0 / static_cast<double>(plan->m);
    for (Index k = 0; k < n; ++k)
    {
        x[k] = a[k] * scale * plan->chirp[k];
    }
}

void check_nonempty(Index n)
{
    require(n >= 1, ErrorClass::dimension, "transform of an empty vector");
}

// Any f with f^n = e.
cplx nth_root(cplx e, Index n)
{
    return std::polar(std::pow(std::abs(e), 1.0 / static_cast<double>(n)),
                      std::arg(e) / static_cast<double>(n));
}

} // namespace

cplx root_of_unity(Index n)
{
    return root_of_unity_pow(n, 1);
}

cplx root_of_unity_pow(Index n, Index k)
{
    require(n >= 1, ErrorClass::dimension, "root of unity of order < 1");
    Index r = k % n;
    if (r < 0)
    {
        r += n;
    }
    // exact values on the axes
    if (r == 0)
    {
        return {1.0, 0.0};
    }
    if (2 * r == n)
    {
        return {-1.0, 0.0};
    }
    if (4 * r == n)
    {
        return {0.0, 1.0};
    }
    if (4 * r == 3 * n)
    {
        return {0.0, -1.0};
    }
    const double a = 2.0 * pi * static_cast<double>(r) / static_cast<double>(n);
    return {std::cos(a), std::sin(a)};
}

ComplexVector dft(const ComplexVector& v)
{
    check_nonempty(v.size());
    ComplexVector out = v;
    transform(out.data(), out.size(), +1);
    return out;
}

ComplexVector idft(const ComplexVector& v)
{
    check_nonempty(v.size());
    ComplexVector out = v;
    transform(out.data(), out.size(), -1);
    out /= static_cast<double>(out.size());
    return out;
}

DenseMatrix dft_columns(const DenseMatrix& m)
{
    check_nonempty(m.rows());
    DenseMatrix out = m;
    for (Index j = 0; j < out.cols(); ++j)
    {
        transform(out.col(j).data(), out.rows(), +1);
    }
    return out;
}

DenseMatrix idft_columns(const DenseMatrix& m)
{
    check_nonempty(m.rows());
    DenseMatrix out = m;
    for (Index j = 0; j < out.cols(); ++j)
    {
        transform(out.col(j).data(), out.rows(), -1);
    }
    out /= static_cast<double>(out.rows());
    return out;
}

DenseMatrix dft_matrix(Index n)
{
    DenseMatrix om(n, n);
    for (Index i = 0; i < n; ++i)
    {
        for (Index j = 0; j < n; ++j)
        {
            om(i, j) = root_of_unity_pow(n, i * j);
        }
    }
    return om;
}

ComplexVector f_circulant_matvec(cplx f, const ComplexVector& v, const ComplexVector& u)
{
    require(f != cplx(0.0), ErrorClass::invalid_scalar, "f-circulant with f = 0");
    require(v.size() == u.size(), ErrorClass::dimension, "f-circulant operand sizes differ");
    check_nonempty(v.size());
    const Index n = v.size();

    // V_f = Omega diag(f^j)
    ComplexVector fp(n);
    fp(0) = 1.0;
    for (Index j = 1; j < n; ++j)
    {
        fp(j) = fp(j - 1) * f;
    }
    ComplexVector a = v.cwiseProduct(fp);
    ComplexVector b = u.cwiseProduct(fp);
    transform(a.data(), n, +1);
    transform(b.data(), n, +1);
    ComplexVector c = a.cwiseProduct(b);
    transform(c.data(), n, -1);
    c /= static_cast<double>(n);
    return c.cwiseQuotient(fp);
}

ComplexVector circulant_apply(cplx e, const ComplexVector& v, const ComplexVector& u)
{
    require(v.size() == u.size(), ErrorClass::dimension, "circulant operand sizes differ");
    const Index n = v.size();
    if (n == 0)
    {
        return ComplexVector(0);
    }
    if (e == cplx(0.0))
    {
        return toeplitz_matvec(v, ComplexVector::Unit(n, 0) * v(0), u);
    }
    if (e == cplx(1.0))
    {
        return f_circulant_matvec(1.0, v, u);
    }
    if (e == cplx(-1.0))
    {
        return f_circulant_matvec(root_of_unity_pow(2 * n, 1), v, u);
    }
    // |f| far from 1 makes f^j badly scaled; the Toeplitz route stays stable.
    const double r = std::abs(e);
    if (r > 4.0 || r < 0.25)
    {
        ComplexVector row(n);
        row(0) = v(0);
        for (Index j = 1; j < n; ++j)
        {
            row(j) = e * v(n - j);
        }
        return toeplitz_matvec(v, row, u);
    }
    return f_circulant_matvec(nth_root(e, n), v, u);
}

ComplexVector circulant_apply_transposed(cplx e, const ComplexVector& v,
                                         const ComplexVector& u)
{
    // Z_e(v)^T = J Z_e(v) J
    return circulant_apply(e, v, u.reverse()).reverse();
}

ComplexVector toeplitz_matvec(const ComplexVector& first_col, const ComplexVector& first_row,
                              const ComplexVector& u)
{
    const Index n = first_col.size();
    require(first_row.size() == n && u.size() == n, ErrorClass::dimension,
            "Toeplitz operand sizes differ");
    check_nonempty(n);
    require(first_col(0) == first_row(0), ErrorClass::inconsistency,
            "Toeplitz first column and first row disagree at the corner");
    if (n == 1)
    {
        return first_col * u(0);
    }
    const Index m = next_pow2(2 * n - 1);
    std::vector<cplx> c(m, cplx(0.0)), x(m, cplx(0.0));
    for (Index i = 0; i < n; ++i)
    {
        c[i] = first_col(i);
        x[i] = u(i);
    }
    for (Index j = 1; j < n; ++j)
    {
        c[m - j] = first_row(j);
    }
    const auto plan = radix2_plan(m);
    plan->run(c.data(), +1);
    plan->run(x.data(), +1);
    for (Index k = 0; k < m; ++k)
    {
        c[k] *= x[k];
    }
    plan->run(c.data(), -1);
    ComplexVector out(n);
    const double scale = 1.0 / static_cast<double>(m);
    for (Index i = 0; i < n; ++i)
    {
        out(i) = c[i] * scale;
    }
    return out;
}

ComplexVector dense_matvec(const DenseMatrix& m, const ComplexVector& u)
{
    require(m.cols() == u.size(), ErrorClass::dimension, "matrix columns differ from vector size");
    return m * u;
}

DenseLU::DenseLU(const DenseMatrix& m)
{
    require(m.rows() == m.cols(), ErrorClass::dimension, "solve with a non-square matrix");
    const Index n = m.rows();
    if (n == 0)
    {
        m_rcond = 1.0;
        return;
    }
    require_finite(m, "matrix");
    m_lu = Eigen::PartialPivLU<DenseMatrix>(m);
    const double eps    = std::numeric_limits<double>::epsilon();
    const double amax   = m.cwiseAbs().maxCoeff();
    const double thresh = static_cast<double>(n) * eps * amax;
    const double pmin   = m_lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (amax == 0.0 || pmin <= thresh)
    {
        fail(ErrorClass::singular_matrix, "pivot below threshold");
    }
    m_rcond = m_lu.rcond();
    if (!(m_rcond >= eps))
    {
        fail(ErrorClass::singular_matrix, "reciprocal condition estimate below machine epsilon");
    }
}

DenseMatrix DenseLU::solve(const DenseMatrix& b) const
{
    require(b.rows() == size(), ErrorClass::dimension, "right-hand side size differs");
    if (size() == 0)
    {
        return b;
    }
    return m_lu.solve(b);
}

DenseMatrix DenseLU::solve_transposed(const DenseMatrix& b) const
{
    require(b.rows() == size(), ErrorClass::dimension, "right-hand side size differs");
    if (size() == 0)
    {
        return b;
    }
    return m_lu.transpose().solve(b);
}

DenseSolution dense_solve(const DenseMatrix& m, const ComplexVector& b)
{
    require(m.rows() == m.cols(), ErrorClass::dimension, "solve with a non-square matrix");
    require(b.size() == m.rows(), ErrorClass::dimension, "right-hand side size differs");
    DenseLU lu(m);
    return {lu.solve(b), lu.rcond()};
}

DenseMatrix shift_matrix(Index n, cplx e)
{
    DenseMatrix z = DenseMatrix::Zero(n, n);
    for (Index i = 1; i < n; ++i)
    {
        z(i, i - 1) = 1.0;
    }
    if (n > 0)
    {
        z(0, n - 1) += e;
    }
    return z;
}

DenseMatrix reversal_matrix(Index n)
{
    DenseMatrix j = DenseMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
    {
        j(i, n - 1 - i) = 1.0;
    }
    return j;
}

DenseMatrix circulant_matrix(cplx e, const ComplexVector& v)
{
    const Index n = v.size();
    DenseMatrix c(n, n);
    for (Index i = 0; i < n; ++i)
    {
        for (Index j = 0; j < n; ++j)
        {
            c(i, j) = i >= j ? v(i - j) : e * v(n + i - j);
        }
    }
    return c;
}

DenseMatrix toeplitz_matrix(const ComplexVector& first_col, const ComplexVector& first_row)
{
    const Index n = first_col.size();
    DenseMatrix t(n, first_row.size());
    for (Index i = 0; i < n; ++i)
    {
        for (Index j = 0; j < first_row.size(); ++j)
        {
            t(i, j) = i >= j ? first_col(i - j) : first_row(j - i);
        }
    }
    return t;
}

} // namespace structkit
