///
/// \file cli.hpp
///
/// Command-line driver and the seeded fixture recipes it shares with the
/// tests. Random numbers come from std::mt19937_64 seeded with --seed;
/// complex samples have real and imaginary parts uniform in [-1, 1).
///
/// Knot recipes for n knots:
///   circle     angles uniform in [0, 2 pi), modulus 1
///   annulus    angles uniform, modulus uniform in [0.9, 1.1)
///   clustered  uniform in the disc of radius 0.05 about 0.5
///   perturbed  n-th roots of unity, modulus off by up to 1%, angle by up
///              to a tenth of the grid step
///
#ifndef STRUCTKIT_CLI_HPP
#define STRUCTKIT_CLI_HPP

#include <iosfwd>
#include <random>
#include <string>

#include "structkit/knots.hpp"
#include "structkit/types.hpp"

namespace structkit
{

using Rng = std::mt19937_64;

cplx random_complex(Rng& rng);
ComplexVector random_vector(Index n, Rng& rng);
DenseMatrix random_matrix(Index rows, Index cols, Rng& rng);

/// One of circle, annulus, clustered, perturbed, or file:PATH (n is ignored for files).
KnotSet sample_knots(const std::string& recipe, Index n, Rng& rng);

struct ToeplitzFixture
{
    ComplexVector col;
    ComplexVector row;
};

/// Strictly diagonally dominant Toeplitz data with off-diagonals decaying like 1/k.
ToeplitzFixture dominant_toeplitz(Index n, Rng& rng);

///
/// Runs one command. Returns 0 on success, 1 on usage errors and 2 when a
/// numerical precondition fails; the error class token goes to err.
///
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Column order of the bench CSV.
inline constexpr const char* bench_csv_header = "op,n,trials,median_seconds,ratio,max_rank";

} // namespace structkit

#endif // STRUCTKIT_CLI_HPP
