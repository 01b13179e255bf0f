#include "structkit/text_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace structkit
{

namespace
{

bool parse_pair(const std::string& line, cplx& z)
{
    std::istringstream ls(line);
    double re = 0.0, im = 0.0;
    if (!(ls >> re))
    {
        return false;
    }
    if (!(ls >> im))
    {
        im = 0.0;
        ls.clear();
    }
    std::string rest;
    if (ls >> rest)
    {
        fail(ErrorClass::invalid_argument, "trailing text in entry line: " + line);
    }
    z = cplx(re, im);
    return true;
}

bool blank(const std::string& line)
{
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

void put(std::ostream& out, cplx z)
{
    out << z.real() << ' ' << z.imag() << '\n';
}

} // namespace

ComplexVector read_vector(std::istream& in)
{
    std::vector<cplx> vals;
    std::string line;
    while (std::getline(in, line))
    {
        if (blank(line) || line[0] == '#')
        {
            continue;
        }
        cplx z;
        if (!parse_pair(line, z))
        {
            fail(ErrorClass::invalid_argument, "malformed entry line: " + line);
        }
        vals.push_back(z);
    }
    ComplexVector v(static_cast<Index>(vals.size()));
    for (Index i = 0; i < v.size(); ++i)
    {
        v(i) = vals[static_cast<size_t>(i)];
    }
    require_finite(v, "input vector");
    return v;
}

ComplexVector read_entries(std::istream& in, Index count)
{
    ComplexVector v(count);
    std::string line;
    Index k = 0;
    while (k < count && std::getline(in, line))
    {
        if (blank(line) || line[0] == '#')
        {
            continue;
        }
        cplx z;
        if (!parse_pair(line, z))
        {
            fail(ErrorClass::invalid_argument, "malformed entry line: " + line);
        }
        v(k++) = z;
    }
    require(k == count, ErrorClass::invalid_argument, "too few entries");
    require_finite(v, "input entries");
    return v;
}

void write_vector(std::ostream& out, const ComplexVector& v)
{
    const auto old = out.precision(17);
    for (Index i = 0; i < v.size(); ++i)
    {
        put(out, v(i));
    }
    out.precision(old);
}

DenseMatrix read_matrix(std::istream& in)
{
    std::string line;
    Index rows = -1, cols = -1;
    while (std::getline(in, line))
    {
        if (blank(line) || line[0] == '#')
        {
            continue;
        }
        std::istringstream ls(line);
        if (!(ls >> rows >> cols) || rows < 0 || cols < 0)
        {
            fail(ErrorClass::invalid_argument, "malformed matrix header: " + line);
        }
        break;
    }
    require(rows >= 0, ErrorClass::invalid_argument, "missing matrix header");
    const ComplexVector e = read_entries(in, rows * cols);
    DenseMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
    {
        for (Index j = 0; j < cols; ++j)
        {
            m(i, j) = e(i * cols + j);
        }
    }
    return m;
}

void write_matrix(std::ostream& out, const DenseMatrix& m)
{
    out << m.rows() << ' ' << m.cols() << '\n';
    const auto old = out.precision(17);
    for (Index i = 0; i < m.rows(); ++i)
    {
        for (Index j = 0; j < m.cols(); ++j)
        {
            put(out, m(i, j));
        }
    }
    out.precision(old);
}

ComplexVector read_vector_file(const std::string& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorClass::invalid_argument, "cannot open " + path);
    return read_vector(in);
}

void write_vector_file(const std::string& path, const ComplexVector& v)
{
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorClass::invalid_argument, "cannot write " + path);
    write_vector(out, v);
}

} // namespace structkit
