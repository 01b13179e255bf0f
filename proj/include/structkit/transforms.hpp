///
/// \file transforms.hpp
///
/// Maps between the Toeplitz, Hankel, Vandermonde and Cauchy classes at the
/// generator level. Each map multiplies the matrix by canonical factors
/// (J, Vandermonde matrices, their transposes or inverses, DFT matrices or
/// Cauchy matrices) and returns a generator of the product without forming
/// it. Extra generator columns are computed with generator products.
///
/// Letters name the primitive maps:
///   a  T -> H   J M
///   b  T -> V   V_s M
///   c  H -> T   M J
///   e  V -> H   V_s^T M
///   g  V -> C   M J V_t^T  (or M V_t^{-1})
///   h  C -> V   M V_t
/// and the composites d = c,b; f = e,c; i = h,f; j = h,e; k = b,g; i2 = d,g.
///
#ifndef STRUCTKIT_TRANSFORMS_HPP
#define STRUCTKIT_TRANSFORMS_HPP

#include <optional>
#include <string>
#include <vector>

#include "structkit/displacement.hpp"

namespace structkit
{

/// J M (left) or M J (right); shifts on that side are transposed.
DisplacementGenerator toeplitz_hankel_swap(const DisplacementGenerator& gen, Side side,
                                           const MatvecOptions& opt = {});

/// V_s M for M under (Z_e, Z_f); the result is under (D_s, Z_f).
DisplacementGenerator toeplitz_to_vandermonde(const DisplacementGenerator& gen, const KnotSet& s,
                                              const MatvecOptions& opt = {});

/// V_s^T M for M under (D_s, Z_f); the result is under (Z_e^T, Z_f).
DisplacementGenerator vandermonde_to_hankel(const DisplacementGenerator& gen, cplx e,
                                            const MatvecOptions& opt = {});

enum class VandermondeVariant
{
    /// M J V_t^T
    jvt,
    /// M V_t^{-1}
    inverse,
};

/// M J V_t^T or M V_t^{-1} for M under (D_s, Z_e); the result is under (D_s, D_t).
DisplacementGenerator vandermonde_to_cauchy(const DisplacementGenerator& gen, const KnotSet& t,
                                            VandermondeVariant variant = VandermondeVariant::jvt,
                                            const MatvecOptions& opt = {});

/// M V_t for M under (D_s, D_t); the result is under (D_s, Z_e).
DisplacementGenerator cauchy_to_vandermonde(const DisplacementGenerator& gen, cplx e,
                                            const MatvecOptions& opt = {});

///
/// C = Omega M D_0^H Omega^H for M under (Z_1, Z_{-1}), D_0 = diag(w_{2n}^i).
/// The result is under (D_s, D_t) with s_i = w_n^i and t_j = w_{2n} w_n^j,
/// with F_C = Omega F and G_C = conj(Omega) conj(D_0) G.
///
DisplacementGenerator toeplitz_to_cauchy_dft(const DisplacementGenerator& gen);

/// Inverse of toeplitz_to_cauchy_dft: M = Omega^H C Omega D_0 / n^2, under (Z_1, Z_{-1}).
DisplacementGenerator cauchy_dft_to_toeplitz(const DisplacementGenerator& gen);

///
/// M C_{t, e w^j} for M under (A, D_t); the result is under (A, D_g) with g
/// the grid e w_n^j. Knot collisions between t and the grid raise.
///
DisplacementGenerator cauchy_reknot(const DisplacementGenerator& gen, cplx e,
                                    const MatvecOptions& opt = {});

/// One step of a transform chain.
struct TransformStep
{
    /// One of a b c d e f g h i j k i2 (and tc-dft).
    std::string map;
    /// Row knots for maps through b.
    std::optional<KnotSet> s;
    /// Column knots for maps through g.
    std::optional<KnotSet> t;
    /// New shift scalar for h, or for e when the step has no h; picked
    /// automatically when empty.
    std::optional<cplx> scalar;
    VandermondeVariant variant = VandermondeVariant::jvt;
};

struct TransformResult
{
    DisplacementGenerator gen;
    /// Input length plus the increments allowed for the applied maps.
    Index length_budget = 0;
    /// Primitive maps actually applied, in order.
    std::vector<std::string> applied;
};

/// Applies the steps left to right; class-mismatch when a step does not fit.
TransformResult compose_transform(const DisplacementGenerator& gen,
                                  const std::vector<TransformStep>& chain,
                                  const MatvecOptions& opt = {});

/// Letters accepted by compose_transform.
const std::vector<std::string>& transform_names();

} // namespace structkit

#endif // STRUCTKIT_TRANSFORMS_HPP
