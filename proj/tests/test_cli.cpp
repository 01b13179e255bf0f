#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "structkit/cli.hpp"
#include "structkit/text_io.hpp"

using namespace structkit;

namespace
{

struct Run
{
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "structkit_cli");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

double field(const std::string& report, const std::string& key)
{
    std::istringstream in(report);
    std::string k;
    std::string v;
    while (in >> k)
    {
        std::getline(in, v);
        if (k == key)
            return std::stod(v);
    }
    FAIL("missing field " << key);
    return 0.0;
}

std::string without_time(const std::string& report)
{
    std::istringstream in(report);
    std::string line, out;
    while (std::getline(in, line))
        if (line.rfind("wall_time", 0) != 0)
            out += line + '\n';
    return out;
}

} // namespace

TEST_CASE("tsolve with oracle")
{
    const Run r = run({"tsolve", "--n", "512", "--seed", "7", "--eps", "1e-8", "--oracle"});
    CHECK(r.code == 0);
    CHECK(field(r.out, "relative_residual") <= 1e-5);
    CHECK(field(r.out, "relative_error") <= 1e-5);
    CHECK(field(r.out, "oracle_relative_error") <= 1e-5);
}

TEST_CASE("usage errors")
{
    CHECK(run({"tsolve", "--bogus"}).code == 1);
    CHECK(run({"nosuchverb"}).code == 1);
    CHECK(run({}).code == 1);
    const Run r = run({"cvmatvec", "--knots", "hexagon"});
    CHECK(r.code == 1);
    CHECK(r.err.find("invalid-argument") != std::string::npos);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("numerical failures exit with 2")
{
    const Run r = run({"cvsolve", "--knots", "clustered", "--n", "64", "--seed", "3"});
    CHECK(r.code == 2);
    CHECK(r.err.find("ill-conditioned") != std::string::npos);
    const Run t = run({"tsolve", "--fixture", "singular", "--n", "128"});
    CHECK(t.code == 2);
}

TEST_CASE("reports are reproducible")
{
    const Run a = run({"cvmatvec", "--n", "300", "--seed", "5", "--oracle"});
    const Run b = run({"cvmatvec", "--n", "300", "--seed", "5", "--oracle"});
    REQUIRE(a.code == 0);
    CHECK(without_time(a.out) == without_time(b.out));
    CHECK(field(a.out, "max_error") <= field(a.out, "error_bound"));
}

TEST_CASE("data verbs")
{
    for (const char* verb : {"eval", "vmatvec", "cvmatvec", "logkernel"})
    {
        CAPTURE(verb);
        const Run r = run({verb, "--n", "200", "--knots", "annulus", "--oracle"});
        CHECK(r.code == 0);
        CHECK(r.out.find("result 200") != std::string::npos);
    }
    for (const char* verb : {"interp", "vsolve", "cvsolve"})
    {
        CAPTURE(verb);
        const Run r = run({verb, "--n", "100", "--knots", "perturbed", "--eps", "1e-10", "--oracle"});
        CHECK(r.code == 0);
    }
    CHECK(field(run({"eval", "--n", "200", "--oracle"}).out, "relative_error") < 1e-8);

    // explicit input and output files
    const std::string in_path  = "cli_test_input.txt";
    const std::string out_path = "cli_test_output.txt";
    const std::string knots    = "cli_test_knots.txt";
    ComplexVector p(3), s(3);
    p << -1.0, 0.0, 1.0;
    s << 0.0, 1.0, 2.0;
    write_vector_file(in_path, p);
    write_vector_file(knots, s);
    const Run e = run({"eval", "--knots", "file:" + knots, "--input", in_path, "--out", out_path});
    CHECK(e.code == 0);
    const ComplexVector v = read_vector_file(out_path);
    REQUIRE(v.size() == 3);
    CHECK(std::abs(v(2) - 3.0) < 1e-14);
    std::remove(in_path.c_str());
    std::remove(out_path.c_str());
    std::remove(knots.c_str());
}

TEST_CASE("generator verbs")
{
    const std::string path = "cli_test_gen.txt";
    CHECK(run({"gen", "--class", "toeplitz", "--n", "40", "--out", path}).code == 0);
    const Run m = run({"matvec", "--gen", path, "--oracle"});
    CHECK(m.code == 0);
    CHECK(field(m.out, "relative_error") < 1e-10);
    const Run s = run({"solve", "--gen", path, "--oracle"});
    CHECK(s.code == 0);
    CHECK(field(s.out, "relative_residual") < 1e-6);
    std::remove(path.c_str());

    const Run c = run({"solve", "--class", "cauchy", "--n", "64", "--eps", "1e-10", "--oracle"});
    CHECK(c.code == 0);
    CHECK(field(c.out, "relative_error") < 1e-5);

    for (const char* maps : {"b,g", "a", "tc-dft", "k"})
    {
        CAPTURE(maps);
        const Run t = run({"transform", "--class", "toeplitz", "--n", "24", "--maps", maps, "--oracle"});
        CHECK(t.code == 0);
        CHECK(field(t.out, "output_length") <= field(t.out, "length_budget"));
        CHECK(field(t.out, "displacement_residual") < 1e-8);
    }
    CHECK(run({"transform", "--class", "toeplitz", "--maps", "e"}).code == 1);
}

TEST_CASE("hss report and bench")
{
    const Run h = run({"hss-report", "--n", "512"});
    CHECK(h.code == 0);
    CHECK(h.out.find("blocks level sector rows cols rank theta delta bound") != std::string::npos);
    CHECK(field(h.out, "max_bound") <= 1e-8);

    const Run one = run({"bench", "--sizes", "1024", "--trials", "1"});
    CHECK(one.code == 0);
    std::istringstream in(one.out);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line))
        lines.push_back(line);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == bench_csv_header);
    CHECK(lines[1].rfind("cvmatvec,1024,1,", 0) == 0);
    const Run three = run({"bench", "--sizes", "256,512", "--trials", "3", "--op", "dense"});
    CHECK(three.code == 0);
    CHECK(three.out.find("dense,512,3,") != std::string::npos);
    CHECK(run({"bench", "--sizes", "300"}).code == 1);
}
