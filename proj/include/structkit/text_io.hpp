///
/// \file text_io.hpp
///
/// Plain text vector and matrix formats. A vector is one "re im" pair per
/// line. A matrix starts with a "rows cols" line followed by its entries in
/// row-major order, one pair per line.
///
#ifndef STRUCTKIT_TEXT_IO_HPP
#define STRUCTKIT_TEXT_IO_HPP

#include <iosfwd>
#include <string>

#include "structkit/types.hpp"

namespace structkit
{

ComplexVector read_vector(std::istream& in);
void write_vector(std::ostream& out, const ComplexVector& v);

DenseMatrix read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const DenseMatrix& m);

ComplexVector read_vector_file(const std::string& path);
void write_vector_file(const std::string& path, const ComplexVector& v);

/// Reads exactly count entries, for formats where a header gives the size.
ComplexVector read_entries(std::istream& in, Index count);

} // namespace structkit

#endif // STRUCTKIT_TEXT_IO_HPP
