// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>

#include "oracles.hpp"
#include "spectral_forge/analysis.hpp"
#include "spectral_forge/cli.hpp"
#include "spectral_forge/error.hpp"
#include "spectral_forge/io.hpp"

using namespace spectral_forge;
namespace fs = std::filesystem;

namespace {

constexpr double kFtTol = 1e-10;
constexpr double kOrthoTol = 1e-8;

IntVectorSet V(std::vector<std::int64_t> v) { return IntVectorSet::from_scalars(v); }
HadamardSystem mu4_sys() { return HadamardSystem(IntMatrix::scalar(4), V({0, 2}), V({0, 1})); }

PointSet ints(const std::vector<std::int64_t>& v) {
    PointSet out;
    for (auto x : v) out.push_back({BigInt(x)});
    return out;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

// Lacunary spectra are shared by several criteria.
struct Lacunary {
    BigRational b;
    SpectrumLevels spec;
    double seconds = 0;
};
std::vector<Lacunary> g_lacunary;

const std::vector<Lacunary>& lacunary_spectra() {
    if (g_lacunary.empty())
        for (int b : {2, 8}) {
            const auto t0 = std::chrono::steady_clock::now();
            auto spec = lacunary_spectrum(mu4_sys(), b, 5, {}, kFtTol);
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            g_lacunary.push_back({BigRational(b), std::move(spec), s});
        }
    return g_lacunary;
}

Outcome hadamard_validation() {
    Outcome o;
    const auto r = IntMatrix::scalar(4);
    const auto a = validate_hadamard(r, V({0, 2}), V({0, 1}));
    const auto b = validate_hadamard(r, V({0, 2}), V({0, 5}));
    const auto c = validate_hadamard(r, V({0, 2}), V({0, 2}));
    o.require(a.is_hadamard && a.defect < 1e-12, "(4,{0,2},{0,1})");
    o.require(b.is_hadamard && b.defect < 1e-12, "(4,{0,2},{0,5})");
    o.require(!c.is_hadamard && std::abs(c.defect - 1.0) <= 1e-12, "(4,{0,2},{0,2}) rejected with defect 1");
    o.note("defects " + fmt(a.defect) + ", " + fmt(b.defect) + ", " + fmt(c.defect));
    return o;
}

Outcome canonical_reproduction() {
    Outcome o;
    const auto s4 = canonical_spectrum(mu4_sys(), {1, 1, 1}, 3);
    o.require(s4.all() == ints({0, 1, 4, 5, 16, 17, 20, 21}), "level 3 equals {0,1,4,5,16,17,20,21}");
    const auto s5 = canonical_spectrum(HadamardSystem(IntMatrix::scalar(4), V({0, 2}), V({0, 5})), {1, 1, 1}, 3);
    for (unsigned k = 1; k <= 3; ++k) {
        auto scaled = s4.level(k);
        for (auto& p : scaled) p[0] *= 5;
        o.require(s5.level(k) == scaled, "L={0,5} level " + std::to_string(k) + " is 5x");
    }
    return o;
}

Outcome orthogonality() {
    Outcome o;
    const SelfAffineMeasure mu(mu4_sys());
    const auto spec = canonical_spectrum(mu4_sys(), std::vector<unsigned>(6, 1), 6);
    const double g0 = gram_max(mu, spec.all(), kFtTol);
    o.require(spec.all().size() == 64 && g0 < kOrthoTol, "canonical level 6");
    o.note("canonical " + fmt(g0));
    for (const auto& l : lacunary_spectra()) {
        const double g = gram_max(mu, l.spec.all(), kFtTol);
        o.require(g < kOrthoTol, "lacunary b=" + format_rational(l.b));
        o.note("b=" + format_rational(l.b) + " " + fmt(g));
    }
    return o;
}

Outcome jp_completeness() {
    Outcome o;
    const auto sys = mu4_sys();
    const SelfAffineMeasure mu(sys);
    const unsigned K = 12;
    const auto spec = canonical_spectrum(sys, std::vector<unsigned>(K, 1), K);
    const auto l0 = oracle::lambda0(K);
    double worst_final = 1.0, worst_oracle = 0.0;
    for (int j = 0; j < 9; ++j) {
        const Frequency xi(BigVec{BigInt(j)}, BigInt(9));
        const auto prof = jp_profile(mu, spec, xi, K, kFtTol);
        o.require(prof.nondecreasing, "nondecreasing at xi=" + xi.to_string());
        for (unsigned k = 0; k < K; ++k)
            o.require(prof.partial_sums[k] <= 1.0 + (k + 1) * kFtTol, "Bessel at xi=" + xi.to_string());
        if (j == 0)
            for (double s : prof.partial_sums) o.require(std::abs(s - 1.0) <= 1e-9, "S_K(0) = 1");
        o.require(prof.partial_sums.back() > 0.99, "S_12 > 0.99 at xi=" + xi.to_string());
        worst_final = std::min(worst_final, prof.partial_sums.back());
        long double ref = 0;
        for (auto l : l0) ref += std::norm(oracle::ft_mu4(static_cast<long double>(j) / 9 + l));
        worst_oracle = std::max(worst_oracle, std::abs(prof.partial_sums.back() - static_cast<double>(ref)));
    }
    o.require(worst_oracle < 1e-9, "agreement with the depth-200 product");
    o.note("min S_12 " + fmt(worst_final) + ", oracle gap " + fmt(worst_oracle));
    return o;
}

Outcome lacunary_construction() {
    Outcome o;
    const SelfAffineMeasure mu(mu4_sys());
    const double eps0 = estimate_eps0(mu, 16, 64, kFtTol).eps0;
    for (const auto& l : lacunary_spectra()) {
        const std::string tag = "b=" + format_rational(l.b);
        o.require(l.spec.points.size() == 32, tag + " has 32 points");
        o.require(verify_lacunary(sort_by_norm(l.spec.all()), l.b), tag + " verify_lacunary");
        o.require(l.spec.eps0 == eps0, tag + " eps0");
        double worst = 1.0;
        for (const auto& p : l.spec.points) {
            const unsigned m = l.spec.m_seq[p.level - 1];
            worst = std::min(worst, std::abs(ft_scaled(mu, Frequency(p.lambda), m, kFtTol).value));
        }
        o.require(worst >= eps0 / 2, tag + " certificates >= eps0/2");
        const double g = gram_max(mu, l.spec.all(), kFtTol);
        o.require(g < kOrthoTol, tag + " Gram");
        o.require(l.seconds < 120, tag + " runtime");
        o.note(tag + " min cert " + fmt(worst) + " (eps0/2 " + fmt(eps0 / 2) + "), " + fmt(l.seconds) + " s");
    }
    return o;
}

Outcome counting_bounds() {
    Outcome o;
    for (const auto& l : lacunary_spectra()) {
        const auto pts = l.spec.all();
        const auto windows = random_windows(pts, 1000, 1e6, 0);
        const auto rep = check_lacunary_bound(pts, l.b, 1, windows);
        o.require(rep.holds && rep.violations == 0 && rep.windows == 1000, "b=" + format_rational(l.b));
        o.note("b=" + format_rational(l.b) + " max count " + std::to_string(rep.max_count));
    }
    return o;
}

Outcome beurling_dimension() {
    Outcome o;
    const auto l0 = ints(oracle::lambda0(12));
    const double d0 = beurling_dimension_estimate(l0).estimate;
    o.require(d0 >= 0.4 && d0 <= 0.6, "Lambda_0 estimate in [0.4, 0.6]");
    o.note("Lambda_0 " + fmt(d0));
    const BigInt cutoff = boost::multiprecision::pow(BigInt(4), 12);
    for (const auto& l : lacunary_spectra()) {
        PointSet trunc;
        for (const auto& p : l.spec.all())
            if (abs(p[0]) <= cutoff) trunc.push_back(p);
        const auto est = beurling_dimension_estimate(trunc);
        o.require(est.estimate < 0.15, "b=" + format_rational(l.b) + " estimate < 0.15");
        o.note("b=" + format_rational(l.b) + " " + fmt(est.estimate) + " on " + std::to_string(trunc.size()) + " pts");
    }
    return o;
}

Outcome conjugation() {
    Outcome o;
    PointSet line, plane;
    for (int x = 0; x <= 100; ++x) line.push_back({BigInt(x)});
    for (int x = 0; x <= 20; ++x)
        for (int y = 0; y <= 20; ++y) plane.push_back({BigInt(x), BigInt(y)});
    std::size_t windows = 0;
    auto run = [&](const PointSet& pts, const IntMatrix& m, const std::string& tag) {
        const auto rep = conjugation_sandwich(pts, m, 1.0, {});
        o.require(rep.holds && rep.violations == 0, tag);
        windows += rep.windows;
    };
    run(line, IntMatrix::scalar(2), "2I on Z");
    run(plane, IntMatrix::from_rows({{2, 0}, {0, 2}}), "2I on Z^2");
    run(plane, IntMatrix::from_rows({{1, 1}, {0, 1}}), "shear on Z^2");
    o.note(std::to_string(windows) + " windows");
    return o;
}

Outcome no_decay() {
    Outcome o;
    const auto r = no_decay_check(SelfAffineMeasure(mu4_sys()), {2}, 8, kFtTol);
    o.require(r.values.size() == 9 && r.spread < 1e-8, "spread < 1e-8");
    o.note("value " + fmt(r.values.front()) + ", spread " + fmt(r.spread));
    return o;
}

QuasiProductSystem separable() {
    QuasiProductSystem q;
    q.R1 = IntMatrix::scalar(4);
    q.C0 = IntMatrix::scalar(0);
    q.G1 = IntMatrix::scalar(2);
    q.base_digits = V({0, 2});
    q.digit_table = {V({0, 1}), V({0, 1})};
    q.fiber_lattice = {{BigRational(1)}};
    return q;
}

Outcome sparse_product() {
    Outcome o;
    const auto q = separable();
    const auto res = sparse_product_spectrum(q, mu4_sys(), 4, 3, kFtTol);
    for (const auto& s : res.shells) {
        const std::string tag = "shell " + std::to_string(s.n);
        o.require(s.disjoint, tag + " disjoint");
        o.require(s.separation_exact, tag + " separation");
        if (s.n >= 1) o.require(s.min_separation == BigInt(1) << s.count, tag + " separation = 2^N");
    }
    const auto mu = assemble_measure(q);
    std::vector<Frequency> f;
    for (const auto& a : res.assembled) f.push_back(Frequency::from_rationals(a));
    double g = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = i + 1; j < f.size(); ++j) g = std::max(g, std::abs(ft(mu, f[i] - f[j], kFtTol).value));
    o.require(g < kOrthoTol, "Gram on the assembled set");
    PointSet pts;
    for (const auto& a : res.assembled) {
        BigVec p;
        for (const auto& c : a) p.push_back(floor_of(c));
        pts.push_back(std::move(p));
    }
    const double dim = beurling_dimension_estimate(pts).estimate;
    o.require(dim < 0.2, "dimension estimate < 0.2");
    o.note(std::to_string(res.points.size()) + " points, Gram " + fmt(g) + ", dimension " + fmt(dim));
    return o;
}

// Every CSV the CLI writes for the acceptance scenarios, keyed by file name.
std::map<std::string, std::string> cli_outputs(const fs::path& dir) {
    fs::remove_all(dir);
    const std::string fx = FIXTURE_DIR;
    const std::vector<std::vector<std::string>> runs = {
        {"spectrum", "--system", fx + "/mu4.json", "--levels", "6", "--out", (dir / "canonical").string()},
        {"spectrum", "--system", fx + "/mu4.json", "--kind", "lacunary", "--b", "2", "--levels", "5", "--out",
         (dir / "lac2").string()},
        {"spectrum", "--system", fx + "/mu4.json", "--kind", "lacunary", "--b", "8", "--levels", "5", "--out",
         (dir / "lac8").string()},
        {"spectrum", "--system", fx + "/separable.json", "--kind", "product-sparse", "--fiber-levels", "4",
         "--base-levels", "3", "--out", (dir / "sparse").string()},
        {"check", "gram", "--system", fx + "/mu4.json", "--levels", "6", "--out", (dir / "gram").string()},
        {"check", "jp", "--system", fx + "/mu4.json", "--levels", "12", "--exact-xi", "--xi", "0", "--xi", "1/9", "--xi",
         "2/9", "--xi", "1/3", "--xi", "4/9", "--xi", "5/9", "--xi", "2/3", "--xi", "7/9", "--xi", "8/9", "--out",
         (dir / "jp").string()},
        {"check", "lacunary", "--spectrum", (dir / "lac8/spectrum.csv").string(), "--b", "8", "--out",
         (dir / "lac8").string()},
        {"check", "nodecay", "--system", fx + "/mu4.json", "--k", "2", "--n-max", "8", "--out", (dir / "nodecay").string()},
        {"dim", "--spectrum", (dir / "sparse/spectrum.csv").string(), "--out", (dir / "sparse").string()},
    };
    for (const auto& args : runs) {
        std::ostringstream out, err;
        if (run_cli(args, out, err) != 0) throw std::runtime_error("CLI run failed: " + args[0] + " " + err.str());
    }
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_text(e.path());
    return files;
}

Outcome determinism() {
    Outcome o;
    const auto base = fs::temp_directory_path() / "spectral_forge_acceptance";
    setenv("SPECTRAL_FORGE_THREADS", "1", 1);
    const auto one = cli_outputs(base / "threads1");
    setenv("SPECTRAL_FORGE_THREADS", "8", 1);
    const auto eight = cli_outputs(base / "threads8");
    unsetenv("SPECTRAL_FORGE_THREADS");
    o.require(one.size() == eight.size() && !one.empty(), "same file set");
    for (const auto& [name, text] : one) {
        auto it = eight.find(name);
        o.require(it != eight.end() && it->second == text, name + " identical");
    }
    o.note(std::to_string(one.size()) + " files compared");
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        std::string name;
        std::function<Outcome()> run;
        double budget;  // seconds, 0 for none
    };
    const std::vector<Criterion> criteria = {
        {"hadamard validation", hadamard_validation, 1},
        {"canonical spectrum reproduction", canonical_reproduction, 1},
        {"orthogonality", orthogonality, 10},
        {"JP completeness evidence", jp_completeness, 60},
        {"lacunary construction", lacunary_construction, 120},
        {"counting bounds", counting_bounds, 0},
        {"Beurling dimension", beurling_dimension, 30},
        {"conjugation sandwich", conjugation, 0},
        {"no decay", no_decay, 0},
        {"sparse product spectrum", sparse_product, 300},
        {"determinism", determinism, 0},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criteria[i].budget > 0) o.require(s < criteria[i].budget, "runtime budget " + fmt(criteria[i].budget) + " s");
        failures += !o.pass;
        std::printf("%s %2zu %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name.c_str(),
                    o.detail.c_str(), s);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
