///
/// \file displacement.hpp
///
/// Sylvester displacement generators: A M - M B = F G^T.
///
/// The operator matrices are the unit e-circulant shift Z_e (ones on the
/// subdiagonal, e in the top right corner), its transpose, and diagonal
/// matrices D_s over a knot set.
///
#ifndef STRUCTKIT_DISPLACEMENT_HPP
#define STRUCTKIT_DISPLACEMENT_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "structkit/knots.hpp"
#include "structkit/types.hpp"

namespace structkit
{

enum class OperatorKind
{
    shift,
    shift_transposed,
    diagonal,
};

class OperatorDescriptor
{
public:
    OperatorDescriptor() = default;

    static OperatorDescriptor shift(Index n, cplx e);
    static OperatorDescriptor shift_transposed(Index n, cplx e);
    static OperatorDescriptor diagonal(KnotSet knots);

    OperatorKind kind() const
    {
        return m_kind;
    }
    Index size() const
    {
        return m_n;
    }
    /// The scalar e of a shift operator.
    cplx scalar() const
    {
        return m_e;
    }
    const KnotSet& knots() const
    {
        return m_knots;
    }
    bool is_shift() const
    {
        return m_kind != OperatorKind::diagonal;
    }

    /// Transposed operator; diagonal operators are symmetric.
    OperatorDescriptor transposed() const;
    /// The same kind with a different shift scalar.
    OperatorDescriptor with_scalar(cplx e) const;

    DenseMatrix dense() const;
    ComplexVector apply(const ComplexVector& u) const;

    /// Exact equality of kind, size, scalar and knots.
    bool same_as(const OperatorDescriptor& other) const;

    /// "Z e", "ZT e" or "D" for printing.
    std::string describe() const;

private:
    OperatorKind m_kind = OperatorKind::shift;
    Index m_n           = 0;
    cplx m_e            = 0.0;
    KnotSet m_knots;
};

enum class StructureTag
{
    toeplitz,         // (Z_e, Z_f) or (Z_e^T, Z_f^T)
    hankel,           // (Z_e, Z_f^T) or (Z_e^T, Z_f)
    vandermonde,      // (D_s, Z_f)
    vandermonde_t,    // (Z_e^T, D_s)
    vandermonde_inv,  // (Z_e, D_s)
    vandermonde_inv_t,// (D_s, Z_e^T)
    cauchy,           // (D_s, D_t)
    fv,               // vandermonde with s on a scaled unit-root grid
    fc,               // cauchy with t on a grid
    cf,               // cauchy with s on a grid
    fcf,              // cauchy with both on grids
    other,
};

std::string_view tag_name(StructureTag tag);

///
/// Generator of a matrix M with A M - M B = F G^T. When identity_scale is
/// set the generator stands for alpha * I under a pair with A = B, where the
/// displacement vanishes and recovery from F, G alone is impossible.
///
struct DisplacementGenerator
{
    OperatorDescriptor A;
    OperatorDescriptor B;
    DenseMatrix F;
    DenseMatrix G;
    std::optional<cplx> identity_scale;

    Index rows() const
    {
        return A.size();
    }
    Index cols() const
    {
        return B.size();
    }
    Index length() const
    {
        return F.cols();
    }
    StructureTag tag() const;

    /// Checks sizes and finiteness; throws dimension or invalid-argument.
    void validate() const;
};

/// A M - M B, formed densely.
DenseMatrix displacement_dense(const DenseMatrix& m, const OperatorDescriptor& a,
                               const OperatorDescriptor& b);

///
/// Generator from the SVD of A M - M B. Singular values above
/// tol * sigma_1 are kept; tol < 0 selects the default 1e-10, tol = 0 keeps
/// every nonzero value.
///
DisplacementGenerator generator_from_dense(const DenseMatrix& m, const OperatorDescriptor& a,
                                           const OperatorDescriptor& b, double tol = -1.0);

/// The unique M with A M - M B = F G^T; singular-operator when not unique.
DenseMatrix recover_dense(const DisplacementGenerator& gen);

struct MatvecOptions
{
    /// Accuracy target of the approximate kernels, relative to the data.
    double epsilon = 1e-13;
    /// Sizes at or below this use exact O(d n^2) kernel sums.
    Index direct_threshold = 256;
};

/// M u without forming M.
ComplexVector generator_matvec(const DisplacementGenerator& gen, const ComplexVector& u,
                               const MatvecOptions& opt = {});
/// M^T u without forming M.
ComplexVector generator_matvec_transposed(const DisplacementGenerator& gen,
                                          const ComplexVector& u, const MatvecOptions& opt = {});
/// Column-wise M X.
DenseMatrix generator_matmat(const DisplacementGenerator& gen, const DenseMatrix& x,
                             const MatvecOptions& opt = {});
DenseMatrix generator_matmat_transposed(const DisplacementGenerator& gen, const DenseMatrix& x,
                                        const MatvecOptions& opt = {});

/// Generator of M^T under (B^T, A^T): F' = -G, G' = F.
DisplacementGenerator generator_transpose(const DisplacementGenerator& gen);

/// Generator of M N under (A, C) with F = [F_M | M F_N], G = [N^T G_M | G_N].
DisplacementGenerator generator_product(const DisplacementGenerator& m,
                                        const DisplacementGenerator& n,
                                        const MatvecOptions& opt = {});

///
/// Linear solve capability for a fixed matrix: solve(B) returns M^{-1} B
/// and solve_transposed(B) returns M^{-T} B.
///
struct SolveCapability
{
    std::function<DenseMatrix(const DenseMatrix&)> solve;
    std::function<DenseMatrix(const DenseMatrix&)> solve_transposed;
};

/// Solve capability backed by a dense LU of the recovered matrix.
SolveCapability dense_solver(const DisplacementGenerator& gen);

/// Generator of M^{-1} under (B, A): F' = -M^{-1} F, G' = M^{-T} G.
DisplacementGenerator generator_inverse(const DisplacementGenerator& gen,
                                        const SolveCapability& solver);

/// Replaces the shift scalar of B (side = right) or A (side = left).
enum class Side
{
    left,
    right,
};
DisplacementGenerator operator_shift_adjust(const DisplacementGenerator& gen, cplx new_e,
                                            Side side = Side::right,
                                            const MatvecOptions& opt = {});

/// Truncated SVD recompression of F G^T at relative tolerance tol.
DisplacementGenerator recompress(const DisplacementGenerator& gen, double tol);

/// Generator of alpha I under (Z_e, Z_f), e != f: F = (e - f) alpha e_1, G = e_n.
DisplacementGenerator identity_generator(Index n, cplx e, cplx f, cplx alpha = 1.0);
/// Zero-length generator of alpha I under (A, A).
DisplacementGenerator scaled_identity(const OperatorDescriptor& a, cplx alpha = 1.0);

/// Text form: header "n d kindA paramsA kindB paramsB" then F and G.
void write_generator(std::ostream& out, const DisplacementGenerator& gen);
DisplacementGenerator read_generator(std::istream& in);

} // namespace structkit

#endif // STRUCTKIT_DISPLACEMENT_HPP
