///
/// \file knots.hpp
///
/// Ordered sets of distinct complex knots.
///
#ifndef STRUCTKIT_KNOTS_HPP
#define STRUCTKIT_KNOTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "structkit/types.hpp"

namespace structkit
{

///
/// Pairwise distinct complex knots with cached polar data. Exact duplicates
/// are rejected on construction.
///
class KnotSet
{
public:
    KnotSet() = default;
    explicit KnotSet(ComplexVector knots);

    /// t_j = e * w_n^j.
    static KnotSet grid(cplx e, Index n);

    Index size() const
    {
        return m_knots.size();
    }
    const ComplexVector& knots() const
    {
        return m_knots;
    }
    cplx operator[](Index i) const
    {
        return m_knots(i);
    }
    /// Polar angles in [0, 2 pi).
    const RealVector& angles() const
    {
        return m_angles;
    }
    const RealVector& magnitudes() const
    {
        return m_magnitudes;
    }
    /// max |s_i|, or 0 for the empty set.
    double max_magnitude() const;

    /// The scalar e when the knots are e * w_n^j to within 1e-12 relative.
    std::optional<cplx> grid_scalar() const;

    /// True when every knot has zero imaginary part.
    bool is_real() const;

    /// Knots reordered by the permutation, new[i] = old[perm[i]].
    KnotSet permuted(const std::vector<Index>& perm) const;

    std::uint64_t hash() const;

private:
    ComplexVector m_knots;
    RealVector m_angles;
    RealVector m_magnitudes;
};

struct DisjointReport
{
    double min_distance = 0.0;
    /// Set when some pair is closer than 1e-14 times the knot scale.
    bool near_coincidence = false;
};

///
/// Checks that no s_i equals a t_j. Exact equality raises knot-collision;
/// near coincidence is only reported.
///
DisjointReport check_disjoint(const KnotSet& s, const KnotSet& t);

/// Cauchy matrix (1 / (s_i - t_j)).
DenseMatrix cauchy_matrix(const KnotSet& s, const KnotSet& t);

/// Vandermonde matrix (s_i^j), square unless cols is given.
DenseMatrix vandermonde_matrix(const KnotSet& s, Index cols = -1);

/// Componentwise s_i^n by repeated squaring.
ComplexVector knot_powers(const KnotSet& s, Index n);

/// Exact O(nm) kernel sums, without forming the matrices.
ComplexVector vandermonde_apply_direct(const KnotSet& s, const ComplexVector& u);
ComplexVector vandermonde_transposed_apply_direct(const KnotSet& s, const ComplexVector& u);
ComplexVector cauchy_apply_direct(const KnotSet& s, const KnotSet& t, const ComplexVector& u);
ComplexVector cauchy_transposed_apply_direct(const KnotSet& s, const KnotSet& t,
                                             const ComplexVector& u);

} // namespace structkit

#endif // STRUCTKIT_KNOTS_HPP
