///
/// \file core_fft.hpp
///
/// Discrete Fourier transform, f-circulant and Toeplitz products, and small
/// dense kernels used as reference implementations.
///
/// The transform convention is Omega = (w^{ij}) with w = exp(+2 pi i / n), so
/// dft(v) = Omega v and idft(v) = Omega^H v / n.
///
#ifndef STRUCTKIT_CORE_FFT_HPP
#define STRUCTKIT_CORE_FFT_HPP

#include <memory>

#include <Eigen/LU>

#include "structkit/types.hpp"

namespace structkit
{

/// w_n = exp(2 pi i / n).
cplx root_of_unity(Index n);

/// w_n^k, reduced modulo n before evaluation so large exponents stay exact.
cplx root_of_unity_pow(Index n, Index k);

ComplexVector dft(const ComplexVector& v);
ComplexVector idft(const ComplexVector& v);

/// Column-wise transforms of a matrix.
DenseMatrix dft_columns(const DenseMatrix& m);
DenseMatrix idft_columns(const DenseMatrix& m);

/// Dense Omega_n, for tests and small problems.
DenseMatrix dft_matrix(Index n);

///
/// Z_{f^n}(v) u, the product of the f^n-circulant matrix with first column v
/// and the vector u, through three scaled transforms of length n.
///
ComplexVector f_circulant_matvec(cplx f, const ComplexVector& v, const ComplexVector& u);

///
/// Z_e(v) u for any scalar e. For e != 0 an n-th root of e is taken and the
/// f-circulant route is used; e = 0 falls back to the lower triangular
/// Toeplitz product.
///
ComplexVector circulant_apply(cplx e, const ComplexVector& v, const ComplexVector& u);

/// Z_e(v)^T u.
ComplexVector circulant_apply_transposed(cplx e, const ComplexVector& v,
                                         const ComplexVector& u);

///
/// T u for the Toeplitz matrix with given first column and first row. The
/// matrix is embedded into a circulant of power-of-two order >= 2n - 1.
///
ComplexVector toeplitz_matvec(const ComplexVector& first_col, const ComplexVector& first_row,
                              const ComplexVector& u);

ComplexVector dense_matvec(const DenseMatrix& m, const ComplexVector& u);

///
/// LU factorization with partial pivoting and a reciprocal condition
/// estimate. Construction throws singular-matrix when a pivot falls below
/// n * eps * max|a_ij| or the estimate drops below machine epsilon.
///
class DenseLU
{
public:
    explicit DenseLU(const DenseMatrix& m);

    Index size() const
    {
        return m_lu.rows();
    }

    /// Reciprocal 1-norm condition estimate.
    double rcond() const
    {
        return m_rcond;
    }

    DenseMatrix solve(const DenseMatrix& b) const;
    DenseMatrix solve_transposed(const DenseMatrix& b) const;

private:
    Eigen::PartialPivLU<DenseMatrix> m_lu;
    double m_rcond = 0.0;
};

struct DenseSolution
{
    ComplexVector x;
    double rcond;
};

DenseSolution dense_solve(const DenseMatrix& m, const ComplexVector& b);

/// Helpers for building reference matrices.
DenseMatrix shift_matrix(Index n, cplx e);
DenseMatrix reversal_matrix(Index n);
DenseMatrix circulant_matrix(cplx e, const ComplexVector& v);
DenseMatrix toeplitz_matrix(const ComplexVector& first_col, const ComplexVector& first_row);

} // namespace structkit

#endif // STRUCTKIT_CORE_FFT_HPP
