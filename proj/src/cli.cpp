#include "structkit/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "structkit/core_fft.hpp"
#include "structkit/displacement.hpp"
#include "structkit/hss.hpp"
#include "structkit/solvers.hpp"
#include "structkit/text_io.hpp"
#include "structkit/transforms.hpp"

namespace structkit
{

cplx random_complex(Rng& rng)
{
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const double re = d(rng);
    return {re, d(rng)};
}

ComplexVector random_vector(Index n, Rng& rng)
{
    ComplexVector v(n);
    for (Index i = 0; i < n; ++i)
        v(i) = random_complex(rng);
    return v;
}

DenseMatrix random_matrix(Index rows, Index cols, Rng& rng)
{
    DenseMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = random_complex(rng);
    return m;
}

KnotSet sample_knots(const std::string& recipe, Index n, Rng& rng)
{
    if (recipe.rfind("file:", 0) == 0)
    {
        return KnotSet(read_vector_file(recipe.substr(5)));
    }
    require(n >= 1, ErrorClass::invalid_argument, "knot count must be positive");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ComplexVector v(n);
    for (Index i = 0; i < n; ++i)
    {
        const double phi = 2.0 * pi * unit(rng);
        if (recipe == "circle")
            v(i) = std::polar(1.0, phi);
        else if (recipe == "annulus")
            v(i) = std::polar(0.9 + 0.2 * unit(rng), phi);
        else if (recipe == "clustered")
            v(i) = 0.5 + std::polar(0.05 * std::sqrt(unit(rng)), phi);
        else if (recipe == "perturbed")
        {
            const double r = 1.0 + 0.01 * (2.0 * unit(rng) - 1.0);
            v(i) = std::polar(r, 2.0 * pi * (i + 0.1 * (2.0 * unit(rng) - 1.0)) / double(n));
        }
        else
            fail(ErrorClass::invalid_argument, "unknown knot recipe: " + recipe);
    }
    return KnotSet(std::move(v));
}

ToeplitzFixture dominant_toeplitz(Index n, Rng& rng)
{
    ToeplitzFixture t;
    t.col = ComplexVector::Zero(n);
    t.row = ComplexVector::Zero(n);
    double off = 0.0;
    for (Index k = 1; k < n; ++k)
    {
        t.col(k) = random_complex(rng) / static_cast<double>(k);
        t.row(k) = random_complex(rng) / static_cast<double>(k);
        off += std::abs(t.col(k)) + std::abs(t.row(k));
    }
    t.col(0) = t.row(0) = 1.0 + off;
    return t;
}

namespace
{

struct Options
{
    Index n          = 256;
    double eps       = 1e-8;
    std::uint64_t seed = 1;
    std::string knots = "circle";
    bool oracle       = false;
    std::string out;
    std::string input;
    std::string gen_path;
    std::string cls  = "toeplitz";
    Index rank       = 2;
    std::string maps = "b,g";
    std::string sizes = "1024,2048,4096,8192";
    Index trials     = 3;
    std::string op   = "cvmatvec";
    double scalar_re = 1.0;
    double scalar_im = 0.0;
    std::string fixture = "dominant";
};

// Key-value report with a deterministic payload; wall time is the last line.
class Report
{
public:
    explicit Report(std::string command) : m_command(std::move(command)) {}

    void add(const std::string& key, const std::string& value)
    {
        m_lines.emplace_back(key, value);
    }
    void add(const std::string& key, double value)
    {
        std::ostringstream s;
        s << std::setprecision(6) << std::scientific << value;
        add(key, s.str());
    }
    void add_int(const std::string& key, Index value)
    {
        add(key, std::to_string(value));
    }

    void write(std::ostream& out, double seconds) const
    {
        out << "command " << m_command << '\n';
        for (const auto& [k, v] : m_lines)
            out << k << ' ' << v << '\n';
        out << "wall_time " << std::setprecision(3) << std::fixed << seconds << '\n';
        out.unsetf(std::ios::floatfield);
    }

private:
    std::string m_command;
    std::vector<std::pair<std::string, std::string>> m_lines;
};

double rel(double a, double b)
{
    return b > 0.0 ? a / b : a;
}

double max_norm(const ComplexVector& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep))
        if (!item.empty())
            out.push_back(item);
    return out;
}

class Driver
{
public:
    Driver(const Options& o, std::ostream& out) : m_o(o), m_out(out), m_rng(o.seed) {}

    void run(const std::string& verb)
    {
        static const std::map<std::string, void (Driver::*)(Report&)> verbs = {
            {"gen", &Driver::gen},
            {"matvec", &Driver::matvec},
            {"solve", &Driver::solve},
            {"transform", &Driver::transform},
            {"hss-report", &Driver::hss_report},
            {"bench", &Driver::bench},
            {"eval", &Driver::eval},
            {"interp", &Driver::interp},
            {"tsolve", &Driver::tsolve},
            {"logkernel", &Driver::logkernel},
            {"vmatvec", &Driver::vmatvec},
            {"vsolve", &Driver::vsolve},
            {"cvmatvec", &Driver::cvmatvec},
            {"cvsolve", &Driver::cvsolve},
        };
        require(m_o.eps > 0.0 && std::isfinite(m_o.eps), ErrorClass::invalid_tolerance,
                "--eps must be positive");
        require(m_o.n >= 1, ErrorClass::invalid_argument, "--n must be positive");
        Report r(verb);
        r.add_int("n", m_o.n);
        r.add("epsilon", m_o.eps);
        r.add("seed", std::to_string(m_o.seed));
        const auto t0 = std::chrono::steady_clock::now();
        (this->*verbs.at(verb))(r);
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (verb != "gen" && verb != "bench")
            r.write(m_out, dt);
        if (m_result)
            emit_vector(*m_result);
    }

private:
    const Options& m_o;
    std::ostream& m_out;
    Rng m_rng;
    std::optional<ComplexVector> m_result;

    KnotSet knots(Index n)
    {
        return sample_knots(m_o.knots, n, m_rng);
    }

    ComplexVector input(Index n)
    {
        if (m_o.input.empty())
            return random_vector(n, m_rng);
        ComplexVector v = read_vector_file(m_o.input);
        require(v.size() == n, ErrorClass::dimension, "input vector has the wrong length");
        return v;
    }

    void emit_vector(const ComplexVector& v)
    {
        if (m_o.out.empty())
        {
            m_out << "result " << v.size() << '\n';
            write_vector(m_out, v);
        }
        else
        {
            write_vector_file(m_o.out, v);
        }
    }

    DisplacementGenerator make_generator(Index n)
    {
        if (!m_o.gen_path.empty())
        {
            std::ifstream in(m_o.gen_path);
            require(static_cast<bool>(in), ErrorClass::invalid_argument,
                    "cannot open " + m_o.gen_path);
            return read_generator(in);
        }
        if (m_o.cls == "toeplitz" || m_o.cls == "hankel")
        {
            const ToeplitzFixture t = dominant_toeplitz(n, m_rng);
            DisplacementGenerator g = toeplitz_generator(t.col, t.row);
            return m_o.cls == "toeplitz" ? g : toeplitz_hankel_swap(g, Side::left);
        }
        if (m_o.cls == "vandermonde")
        {
            // D_s V - V Z_f = (s^n - f) e_n^T
            const KnotSet s = knots(n);
            const cplx f    = std::pow(vandermonde_auxiliary_scalar(s), static_cast<double>(n));
            DisplacementGenerator g;
            g.A = OperatorDescriptor::diagonal(s);
            g.B = OperatorDescriptor::shift(n, f);
            g.F = (knot_powers(s, n).array() - f).matrix();
            g.G = DenseMatrix::Zero(n, 1);
            g.G(n - 1, 0) = 1.0;
            return g;
        }
        if (m_o.cls == "cauchy")
        {
            const KnotSet s = knots(n);
            DisplacementGenerator g;
            g.A = OperatorDescriptor::diagonal(s);
            g.B = OperatorDescriptor::diagonal(KnotSet::grid(root_of_unity(2 * n), n));
            check_disjoint(g.A.knots(), g.B.knots());
            g.F = random_matrix(n, m_o.rank, m_rng);
            g.G = random_matrix(n, m_o.rank, m_rng);
            return g;
        }
        fail(ErrorClass::invalid_argument, "unknown --class " + m_o.cls);
    }

    void gen(Report&)
    {
        const DisplacementGenerator g = make_generator(m_o.n);
        if (m_o.out.empty())
        {
            write_generator(m_out, g);
        }
        else
        {
            std::ofstream f(m_o.out);
            require(static_cast<bool>(f), ErrorClass::invalid_argument, "cannot write " + m_o.out);
            write_generator(f, g);
        }
    }

    void matvec(Report& r)
    {
        const DisplacementGenerator g = make_generator(m_o.n);
        const ComplexVector u         = input(g.cols());
        MatvecOptions mo;
        mo.epsilon            = std::min(m_o.eps, 1e-13);
        const ComplexVector y = generator_matvec(g, u, mo);
        r.add("structure", std::string(tag_name(g.tag())));
        r.add_int("length", g.length());
        if (m_o.oracle)
        {
            const ComplexVector d = dense_matvec(recover_dense(g), u);
            r.add("relative_error", rel((y - d).norm(), d.norm()));
        }
        m_result = y;
    }

    void solve(Report& r)
    {
        const DisplacementGenerator g = make_generator(m_o.n);
        const ComplexVector b         = input(g.rows());
        ComplexVector x;
        if (g.A.kind() == OperatorKind::diagonal && g.B.kind() == OperatorKind::diagonal)
        {
            const ApproxResult a =
                cauchy_any_knots_solve({g.A.knots(), g.B.knots(), g.F, g.G}, b, m_o.eps);
            r.add("route", a.route);
            r.add("amplification", a.amplification);
            x = a.value;
        }
        else
        {
            x = toeplitz_like_solve(g, b, m_o.eps);
            r.add("route", "tc-dft");
        }
        MatvecOptions mo;
        mo.epsilon = 1e-13;
        r.add("relative_residual", rel((generator_matvec(g, x, mo) - b).norm(), b.norm()));
        if (m_o.oracle)
        {
            const DenseSolution d = dense_solve(recover_dense(g), b);
            r.add("relative_error", rel((x - d.x).norm(), d.x.norm()));
        }
        m_result = x;
    }

    void transform(Report& r)
    {
        const DisplacementGenerator g = make_generator(m_o.n);
        std::vector<TransformStep> chain;
        for (const std::string& m : split(m_o.maps, ','))
            chain.push_back(TransformStep{m, std::nullopt, std::nullopt, std::nullopt,
                                          VandermondeVariant::jvt});
        const TransformResult t = compose_transform(g, chain);
        std::string applied;
        for (const auto& a : t.applied)
            applied += (applied.empty() ? "" : ",") + a;
        r.add("maps", m_o.maps);
        r.add("applied", applied);
        r.add_int("input_length", g.length());
        r.add_int("output_length", t.gen.length());
        r.add_int("length_budget", t.length_budget);
        r.add("structure", std::string(tag_name(t.gen.tag())));
        if (m_o.oracle)
        {
            // the output must satisfy its own displacement equation
            const DenseMatrix m = recover_dense(t.gen);
            const DenseMatrix d = displacement_dense(m, t.gen.A, t.gen.B);
            const DenseMatrix fg = t.gen.F * t.gen.G.transpose();
            r.add("displacement_residual", rel((d - fg).norm(), fg.norm()));
        }
        if (!m_o.out.empty())
        {
            std::ofstream f(m_o.out);
            require(static_cast<bool>(f), ErrorClass::invalid_argument, "cannot write " + m_o.out);
            write_generator(f, t.gen);
        }
    }

    void hss_report(Report& r)
    {
        const KnotSet s = knots(m_o.n);
        const cplx e(m_o.scalar_re, m_o.scalar_im);
        const auto h    = cv_approximation(s, e, m_o.eps);
        const HssStats st = h->stats();
        r.add_int("levels", st.levels);
        r.add_int("max_rank", st.max_rank);
        r.add_int("admissible_blocks", st.admissible_blocks);
        r.add_int("dense_blocks", st.dense_blocks);
        r.add("max_bound", st.max_bound);
        std::vector<HssBlock> blocks;
        for (const HssBlock& b : h->blocks())
            if (b.low_rank)
                blocks.push_back(b);
        std::stable_sort(blocks.begin(), blocks.end(),
                         [](const HssBlock& a, const HssBlock& b) { return a.level < b.level; });
        std::map<int, Index> per_level;
        for (const HssBlock& b : blocks)
            per_level[b.level] = std::max(per_level[b.level], b.k + 1);
        for (const auto& [lvl, rk] : per_level)
            r.add("rank_level_" + std::to_string(lvl), std::to_string(rk));
        r.add("blocks", "level sector rows cols rank theta delta bound");
        for (const HssBlock& b : blocks)
        {
            std::ostringstream line;
            line << std::setprecision(4) << b.level << ' ' << b.sector << ' ' << b.rows() << ' '
                 << b.cols() << ' ' << (b.k + 1) << ' ' << b.theta << ' ' << b.delta << ' '
                 << b.bound;
            r.add("block", line.str());
        }
    }

    void bench(Report&)
    {
        std::vector<Index> sizes;
        for (const std::string& s : split(m_o.sizes, ','))
            sizes.push_back(std::stoll(s));
        require(!sizes.empty(), ErrorClass::invalid_argument, "--sizes is empty");
        for (size_t i = 0; i < sizes.size(); ++i)
        {
            const Index n = sizes[i];
            require(n >= 2 && (n & (n - 1)) == 0 && (i == 0 || n > sizes[i - 1]),
                    ErrorClass::invalid_argument, "--sizes must be ascending powers of two");
        }
        require(m_o.trials >= 1, ErrorClass::invalid_argument, "--trials must be positive");
        std::ostringstream csv;
        csv << bench_csv_header << '\n';
        double prev = 0.0;
        for (const Index n : sizes)
        {
            const KnotSet s       = knots(n);
            const ComplexVector u = random_vector(n, m_rng);
            const KnotSet grid    = KnotSet::grid(1.0, n);
            std::vector<double> times;
            Index rank = 0;
            for (Index k = 0; k < m_o.trials; ++k)
            {
                clear_cv_cache();
                const auto t0 = std::chrono::steady_clock::now();
                if (m_o.op == "cvmatvec")
                    (void)cv_matvec(s, 1.0, u, m_o.eps);
                else if (m_o.op == "vmatvec")
                    (void)vandermonde_matvec(s, u, m_o.eps);
                else if (m_o.op == "dense")
                    (void)cauchy_apply_direct(s, grid, u);
                else
                    fail(ErrorClass::invalid_argument, "unknown --op " + m_o.op);
                times.push_back(
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
                if (m_o.op == "cvmatvec" && k == 0)
                    rank = cv_approximation(s, 1.0, m_o.eps)->stats().max_rank;
            }
            std::sort(times.begin(), times.end());
            const double med = times[times.size() / 2];
            csv << m_o.op << ',' << n << ',' << m_o.trials << ',' << std::setprecision(6)
                << std::scientific << med << ',';
            if (prev > 0.0)
                csv << std::fixed << std::setprecision(3) << med / prev;
            csv << ',' << rank << '\n';
            csv.unsetf(std::ios::floatfield);
            prev = med;
        }
        if (m_o.out.empty())
        {
            m_out << csv.str();
        }
        else
        {
            std::ofstream f(m_o.out);
            require(static_cast<bool>(f), ErrorClass::invalid_argument, "cannot write " + m_o.out);
            f << csv.str();
        }
    }

    void eval(Report& r)
    {
        const KnotSet s       = knots(m_o.n);
        const ComplexVector p = input(s.size());
        const ComplexVector v = poly_multipoint_eval(p, s, m_o.eps);
        if (m_o.oracle)
        {
            const ComplexVector d = vandermonde_apply_direct(s, p);
            r.add("relative_error", rel((v - d).norm(), d.norm()));
        }
        m_result = v;
    }

    void interp(Report& r)
    {
        const KnotSet s       = knots(m_o.n);
        const ComplexVector v = input(s.size());
        const ComplexVector p = poly_interpolate(s, v, m_o.eps);
        if (m_o.oracle)
        {
            const ComplexVector d = vandermonde_apply_direct(s, p);
            r.add("relative_residual", rel((d - v).norm(), v.norm()));
        }
        m_result = p;
    }

    void tsolve(Report& r)
    {
        const Index n = m_o.n;
        ToeplitzFixture t;
        if (m_o.fixture == "dominant")
        {
            t = dominant_toeplitz(n, m_rng);
        }
        else if (m_o.fixture == "singular")
        {
            t.col = t.row = ComplexVector::Ones(n);
        }
        else
        {
            fail(ErrorClass::invalid_argument, "unknown --fixture " + m_o.fixture);
        }
        const ComplexVector planted = random_vector(n, m_rng);
        const ComplexVector b = m_o.input.empty() ? toeplitz_matvec(t.col, t.row, planted)
                                                  : input(n);
        const ComplexVector x = toeplitz_solve(t.col, t.row, b, m_o.eps);
        r.add("relative_residual",
              rel((toeplitz_matvec(t.col, t.row, x) - b).norm(), b.norm()));
        if (m_o.input.empty())
            r.add("relative_error", rel((x - planted).norm(), planted.norm()));
        if (m_o.oracle)
        {
            const DenseSolution d = dense_solve(toeplitz_matrix(t.col, t.row), b);
            r.add("oracle_relative_error", rel((x - d.x).norm(), d.x.norm()));
        }
        m_result = x;
    }

    void logkernel(Report& r)
    {
        const KnotSet roots   = knots(m_o.n);
        const KnotSet targets = KnotSet::grid(1.0, roots.size());
        const LogKernelResult lk = log_kernel_eval_from_roots(roots, targets, m_o.eps);
        if (m_o.oracle)
        {
            ComplexVector d = ComplexVector::Ones(targets.size());
            for (Index i = 0; i < targets.size(); ++i)
                for (Index j = 0; j < roots.size(); ++j)
                    d(i) *= targets[i] - roots[j];
            r.add("relative_error", rel(max_norm(lk.values - d), max_norm(d)));
        }
        m_result = lk.coefficients.size() > 0 ? lk.coefficients : lk.values;
        r.add("output", lk.coefficients.size() > 0 ? "coefficients" : "values");
    }

    void vmatvec(Report& r)
    {
        const KnotSet s       = knots(m_o.n);
        const ComplexVector u = input(s.size());
        const ComplexVector y = vandermonde_matvec(s, u, m_o.eps);
        if (m_o.oracle)
        {
            const ComplexVector d = vandermonde_apply_direct(s, u);
            r.add("relative_error", rel((y - d).norm(), d.norm()));
        }
        m_result = y;
    }

    void vsolve(Report& r)
    {
        const KnotSet s       = knots(m_o.n);
        const ComplexVector b = input(s.size());
        const ComplexVector x = vandermonde_solve(s, b, m_o.eps);
        r.add("relative_residual",
              rel((vandermonde_apply_direct(s, x) - b).norm(), b.norm()));
        m_result = x;
    }

    void cvmatvec(Report& r)
    {
        const KnotSet s       = knots(m_o.n);
        const cplx e(m_o.scalar_re, m_o.scalar_im);
        const ComplexVector u = input(s.size());
        const ComplexVector y = cv_matvec(s, e, u, m_o.eps);
        const HssStats st     = cv_approximation(s, e, m_o.eps)->stats();
        r.add_int("max_rank", st.max_rank);
        r.add("max_bound", st.max_bound);
        r.add("error_bound", static_cast<double>(s.size()) * m_o.eps * max_norm(u));
        if (m_o.oracle)
        {
            const ComplexVector d = cauchy_apply_direct(s, KnotSet::grid(e, s.size()), u);
            r.add("max_error", max_norm(y - d));
        }
        m_result = y;
    }

    void cvsolve(Report& r)
    {
        const KnotSet s       = knots(m_o.n);
        const cplx e(m_o.scalar_re, m_o.scalar_im);
        const ComplexVector b = input(s.size());
        const ComplexVector x = cv_solve(s, e, b, m_o.eps);
        const ComplexVector y = cauchy_apply_direct(s, KnotSet::grid(e, s.size()), x);
        r.add("relative_residual", rel((y - b).norm(), b.norm()));
        m_result = x;
    }
};

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Structured matrix toolkit"};
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--n", o.n, "problem size");
    app.add_option("--eps", o.eps, "accuracy target");
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--knots", o.knots, "circle | annulus | clustered | perturbed | file:PATH");
    app.add_flag("--oracle", o.oracle, "compare with a dense reference");
    app.add_option("--out", o.out, "output file");
    app.add_option("--input", o.input, "input vector file");
    app.add_option("--gen", o.gen_path, "generator file");
    app.add_option("--class", o.cls, "toeplitz | hankel | vandermonde | cauchy");
    app.add_option("--rank", o.rank, "generator length for random Cauchy-like matrices");
    app.add_option("--maps", o.maps, "comma separated transform letters");
    app.add_option("--sizes", o.sizes, "comma separated bench sizes");
    app.add_option("--trials", o.trials, "bench repetitions");
    app.add_option("--op", o.op, "cvmatvec | vmatvec | dense");
    app.add_option("--scalar-re", o.scalar_re, "real part of the grid scalar");
    app.add_option("--scalar-im", o.scalar_im, "imaginary part of the grid scalar");
    app.add_option("--fixture", o.fixture, "dominant | singular (tsolve)");
    const std::pair<const char*, const char*> verbs[] = {
        {"gen", "write a random generator of the chosen --class"},
        {"matvec", "multiply a generator by a vector"},
        {"solve", "solve with a Toeplitz-like or Cauchy-like generator"},
        {"transform", "apply the --maps chain to a generator"},
        {"hss-report", "block ranks and bounds of a CV compression"},
        {"bench", "median timings over --sizes as CSV"},
        {"eval", "multipoint polynomial evaluation"},
        {"interp", "polynomial interpolation"},
        {"tsolve", "Toeplitz solve on a seeded fixture"},
        {"logkernel", "product of (x - root) at roots of unity"},
        {"vmatvec", "Vandermonde product"},
        {"vsolve", "Vandermonde solve"},
        {"cvmatvec", "CV matrix product"},
        {"cvsolve", "CV matrix solve"}};
    for (const auto& [v, d] : verbs)
        app.add_subcommand(v, d);
    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    const std::string verb = app.get_subcommands().front()->get_name();
    try
    {
        Driver(o, out).run(verb);
        return 0;
    }
    catch (const Error& e)
    {
        err << "error: " << e.what() << '\n';
        return is_numerical(e.error_class()) ? 2 : 1;
    }
    catch (const std::exception& e)
    {
        err << "error: invalid-argument: " << e.what() << '\n';
        return 1;
    }
}

} // namespace structkit
