#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "spectral_forge/cli.hpp"
#include "spectral_forge/io.hpp"

using namespace spectral_forge;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "spectral_forge_cli_tests" / name;
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("validate") {
    auto r = run({"validate", "--system", fixture("mu4.json")});
    CHECK(r.code == 0);
    CHECK(r.out.find("is_hadamard: true") != std::string::npos);
    r = run({"validate", "--system", fixture("mu4_bad.json")});
    CHECK(r.code == 1);
    CHECK(r.out.find("defect: 1") != std::string::npos);
    CHECK(run({"validate", "--system", fixture("missing.json")}).code == 2);
    CHECK(run({"validate", "--system", fixture("malformed.json")}).code == 2);
    CHECK(run({"validate"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"validate", "--system", fixture("separable.json")}).code == 0);
}

TEST_CASE("spectrum canonical matches the golden file") {
    const auto dir = scratch("canonical");
    const auto r = run({"spectrum", "--system", fixture("mu4.json"), "--levels", "3", "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(read_text(dir / "spectrum.csv") == read_text(fixture("golden/canonical_mu4_K3.csv")));
    CHECK(read_text(dir / "certificate.json").find("\"gram_max\": 0.0") != std::string::npos);
}

TEST_CASE("spectrum lacunary and checks on its output") {
    const auto dir = scratch("lacunary");
    auto r = run({"spectrum", "--system", fixture("mu4.json"), "--kind", "lacunary", "--b", "2", "--levels", "5", "--out",
                  dir.string()});
    CHECK(r.code == 0);
    CHECK(read_text(dir / "certificate.json").find("\"lacunary\": true") != std::string::npos);
    const auto loaded = load_spectrum_csv(dir / "spectrum.csv");
    CHECK(loaded.points.size() == 32);
    CHECK(loaded.levels.back() == 5);

    const auto csv = (dir / "spectrum.csv").string();
    CHECK(run({"check", "lacunary", "--spectrum", csv, "--b", "2", "--out", dir.string()}).code == 0);
    CHECK(run({"check", "lacunary", "--spectrum", csv, "--b", "1000"}).code == 1);
    CHECK(run({"check", "gram", "--system", fixture("mu4.json"), "--spectrum", csv, "--out", dir.string()}).code == 0);
    CHECK(run({"check", "delta", "--system", fixture("mu4.json"), "--spectrum", csv, "--out", dir.string()}).code == 0);
    r = run({"dim", "--spectrum", csv, "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(parse_csv(read_text(dir / "density.csv")).header.front() == "h");
}

TEST_CASE("spectrum product-sparse") {
    const auto dir = scratch("sparse");
    const auto r = run({"spectrum", "--system", fixture("separable.json"), "--kind", "product-sparse", "--fiber-levels",
                        "2", "--out", dir.string()});
    CHECK(r.code == 0);
    const auto cert = read_text(dir / "certificate.json");
    CHECK(cert.find("\"shell_checks_hold\": true") != std::string::npos);
    CHECK(run({"spectrum", "--system", fixture("mu4.json"), "--kind", "product-sparse", "--out", dir.string()}).code == 2);
}

TEST_CASE("check commands") {
    const auto dir = scratch("checks");
    const auto sys = fixture("mu4.json");
    auto r = run({"check", "jp", "--system", sys, "--levels", "12", "--xi", "0", "--xi", "1/2", "--exact-xi", "--out",
                  dir.string()});
    CHECK(r.code == 0);
    const auto jp = parse_csv(read_text(dir / "jp.csv"));
    CHECK(jp.rows.size() == 24);
    CHECK(std::stod(jp.rows[11][2]) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(run({"check", "nodecay", "--system", sys, "--k", "2", "--n-max", "8"}).code == 0);
    CHECK(run({"check", "zeroset", "--system", sys, "--xi", "1/2", "--radius", "100", "--eps", "1e-3"}).code == 0);
    CHECK(run({"check", "gram", "--system", sys, "--levels", "6"}).code == 0);
    CHECK(run({"check", "gram", "--system", sys, "--spectrum", fixture("missing.csv")}).code == 2);
    CHECK(run({"check", "jp", "--spectrum", fixture("missing.csv")}).code == 2);
    CHECK(run({"check", "zeroset", "--system", sys, "--xi", "1/2", "--tol", "2"}).code == 1);
}

TEST_CASE("dim degenerate input") {
    const auto dir = scratch("dim");
    write_text(dir / "one.csv", "lambda_1\n0\n");
    CHECK(run({"dim", "--spectrum", (dir / "one.csv").string()}).code == 1);
}

TEST_CASE("outputs do not depend on the thread count") {
    const auto a = scratch("threads1"), b = scratch("threads8");
    setenv("SPECTRAL_FORGE_THREADS", "1", 1);
    run({"check", "gram", "--system", fixture("mu4.json"), "--levels", "6", "--out", a.string()});
    run({"spectrum", "--system", fixture("mu4.json"), "--kind", "lacunary", "--levels", "4", "--out", a.string()});
    setenv("SPECTRAL_FORGE_THREADS", "8", 1);
    run({"check", "gram", "--system", fixture("mu4.json"), "--levels", "6", "--out", b.string()});
    run({"spectrum", "--system", fixture("mu4.json"), "--kind", "lacunary", "--levels", "4", "--out", b.string()});
    unsetenv("SPECTRAL_FORGE_THREADS");
    for (const char* f : {"gram.csv", "spectrum.csv", "certificate.json"}) CHECK(read_text(a / f) == read_text(b / f));
}
