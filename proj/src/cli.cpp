#include "spectral_forge/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectral_forge/analysis.hpp"
#include "spectral_forge/error.hpp"
#include "spectral_forge/io.hpp"
#include "spectral_forge/parallel.hpp"

namespace spectral_forge {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Options {
    std::string system;
    std::string spectrum;
    std::string out;
    std::string kind = "canonical";
    std::string which;
    std::string b = "2";
    std::vector<std::string> xi;
    std::vector<unsigned> n_seq;
    std::string k = "2";
    double tol = 1e-10;
    double hadamard_tol = 1e-9;
    double threshold = 1e-8;
    double eps = 1e-6;
    double r = 0.0;
    double h_max = 1e6;
    unsigned levels = 3;
    unsigned n_max = 8;
    unsigned fiber_levels = 4;
    unsigned base_levels = 3;
    std::int64_t radius = 64;
    std::int64_t radius_step = 8;
    std::int64_t grid = 0;
    std::int64_t eps_radius = 64;
    std::size_t windows = 1000;
    std::uint64_t seed = 0;
    bool exact = false;
    bool exact_xi = false;
};

void check_tol(double t, const std::string& name) {
    if (!(t > 0.0 && t < 1.0)) fail(ErrorKind::Parameter, name + " must lie in (0,1)");
}

// Emits the table into --out/<name> or onto stdout. Verdicts go to stdout
// when the table is written to a file and to stderr otherwise.
class Sink {
public:
    Sink(const Options& o, std::ostream& out, std::ostream& err) : dir_(o.out), out_(out), err_(err) {}
    void table(const std::string& name, const std::string& text) {
        if (dir_.empty()) out_ << text;
        else write_text(fs::path(dir_) / name, text);
    }
    std::ostream& report() { return dir_.empty() ? err_ : out_; }
    std::ostream& out() { return out_; }
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::ostream& out_;
    std::ostream& err_;
};

HadamardSystem system_from(const SystemConfig& cfg, double tol) {
    if (auto* t = std::get_if<IntTriple>(&cfg)) return HadamardSystem(t->R, t->B, t->L, tol);
    const auto& q = std::get<QuasiProductConfig>(cfg);
    return HadamardSystem(q.qps.R1, q.qps.base_digits, q.base_L, tol);
}

Frequency parse_xi(const std::string& text, std::size_t d, bool exact) {
    std::vector<BigRational> coords;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, ',')) {
        BigRational v = parse_rational(cell);
        coords.push_back(exact ? v : exact_rational(to_double(v)));
    }
    if (coords.size() != d)
        fail(ErrorKind::Parse, "xi '" + text + "' has " + std::to_string(coords.size()) + " coordinates, expected " +
                                   std::to_string(d));
    return Frequency::from_rationals(coords);
}

IntVec parse_int_vector(const std::string& text, std::size_t d) {
    IntVec v;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stoll(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            fail(ErrorKind::Parse, "malformed integer vector '" + text + "'");
        }
    }
    if (v.size() != d) fail(ErrorKind::Parse, "vector '" + text + "' has the wrong dimension");
    return v;
}

LacunarySearch search_from(const Options& o) {
    LacunarySearch s;
    s.radius_step = o.radius_step;
    s.radius_max = o.radius;
    s.eps_grid = o.grid;
    s.eps_radius = o.eps_radius;
    s.n_seq = o.n_seq;
    return s;
}

ordered_json nullable(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

int cmd_validate(const Options& o, Sink& sink) {
    const SystemConfig cfg = load_system(o.system);
    check_tol(o.hadamard_tol, "--tol");
    IntTriple t;
    std::string label = "triple";
    if (auto* p = std::get_if<IntTriple>(&cfg)) {
        t = *p;
    } else {
        const auto& q = std::get<QuasiProductConfig>(cfg);
        t = {q.qps.R1, q.qps.base_digits, q.base_L};
        label = "quasi-product base";
    }
    const HadamardReport rep = validate_hadamard(t.R, t.B, t.L, o.hadamard_tol, o.exact);
    auto& os = sink.out();
    os << "system: " << label << "\n";
    os << "is_hadamard: " << (rep.is_hadamard ? "true" : "false") << "\n";
    os << "defect: " << format_double(rep.defect) << "\n";
    os << "q: " << rep.q << "\n";
    os << "det: " << rep.det.str() << "\n";
    os << "singular: " << (rep.singular ? "true" : "false") << "\n";
    os << "residue_distinct: " << (rep.residue_distinct ? "true" : "false") << "\n";
    if (rep.exact_orthogonal) os << "exact_orthogonal: " << (*rep.exact_orthogonal ? "true" : "false") << "\n";
    const bool pass = rep.is_hadamard && rep.exact_orthogonal.value_or(true);
    return pass ? kExitPass : kExitFail;
}

double assembled_gram(const SelfAffineMeasure& mu, const std::vector<std::vector<BigRational>>& pts, double tol) {
    const std::size_t n = pts.size();
    std::vector<double> row_max(n, 0.0);
    std::vector<Frequency> freqs;
    for (const auto& p : pts) freqs.push_back(Frequency::from_rationals(p));
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j)
            row_max[i] = std::max(row_max[i], std::abs(ft(mu, freqs[i] - freqs[j], tol).value));
    });
    return n < 2 ? 0.0 : *std::max_element(row_max.begin(), row_max.end());
}

int cmd_spectrum(const Options& o, Sink& sink) {
    check_tol(o.tol, "--tol");
    const SystemConfig cfg = load_system(o.system);
    ordered_json cert;
    cert["kind"] = o.kind;
    bool pass = true;
    if (o.kind == "product-sparse") {
        const auto* q = std::get_if<QuasiProductConfig>(&cfg);
        if (!q) fail(ErrorKind::Parse, "product-sparse needs a quasi-product system file");
        const HadamardSystem sys1 = system_from(cfg, o.hadamard_tol);
        SparseProductOptions opts;
        opts.search = search_from(o);
        const auto res = sparse_product_spectrum(q->qps, sys1, o.fiber_levels, o.base_levels, o.tol, opts);
        sink.table("spectrum.csv", to_csv(sparse_table(res)));
        cert["points"] = res.points.size();
        ordered_json shells = ordered_json::array();
        bool shell_checks = true;
        for (const auto& s : res.shells) {
            shell_checks = shell_checks && s.disjoint && s.separation_exact && s.template_gap_ok;
            shells.push_back({{"n", s.n},
                              {"count", s.count},
                              {"base", format_rational(s.base)},
                              {"disjoint", s.disjoint},
                              {"min_separation", s.min_separation.str()},
                              {"separation_exact", s.separation_exact},
                              {"template_min_gap", s.template_min_gap.str()},
                              {"template_gap_ok", s.template_gap_ok}});
        }
        cert["shells"] = shells;
        cert["shell_checks_hold"] = shell_checks;
        std::optional<double> gram;
        if (res.assembled.size() <= 4096) gram = assembled_gram(assemble_measure(q->qps), res.assembled, o.tol);
        cert["gram_max"] = nullable(gram);
        cert["orthogonal"] = gram ? ordered_json(*gram < o.threshold) : ordered_json(nullptr);
        pass = shell_checks && (!gram || *gram < o.threshold);
    } else {
        const HadamardSystem sys = system_from(cfg, o.hadamard_tol);
        SpectrumLevels spec;
        std::optional<BigRational> b;
        if (o.kind == "canonical") {
            std::vector<unsigned> n_seq = o.n_seq;
            n_seq.resize(std::max<std::size_t>(n_seq.size(), o.levels), 1);
            spec = canonical_spectrum(sys, n_seq, o.levels, o.tol);
        } else if (o.kind == "lacunary") {
            b = parse_rational(o.b);
            spec = lacunary_spectrum(sys, *b, o.levels, search_from(o), o.tol);
        } else {
            fail(ErrorKind::Parse, "unknown spectrum kind '" + o.kind + "'");
        }
        sink.table("spectrum.csv", to_csv(spectrum_table(spec)));
        const SelfAffineMeasure mu(sys);
        std::optional<double> gram = spec.gram;
        if (!gram && spec.points.size() <= 4096) gram = gram_max(mu, spec.all(), o.tol);
        const TailCertificate tail = tail_delta(mu, spec, o.tol);
        cert["levels"] = spec.levels();
        cert["points"] = spec.points.size();
        cert["m_seq"] = spec.m_seq;
        cert["gram_max"] = nullable(gram);
        cert["orthogonal"] = gram ? ordered_json(*gram < o.threshold) : ordered_json(nullptr);
        cert["tail_min"] = tail.min;
        cert["delta"] = tail.min * tail.min;
        if (b) {
            const bool lac = verify_lacunary(sort_by_norm(spec.all()), *b);
            cert["b"] = format_rational(*b);
            cert["eps0"] = spec.eps0;
            cert["lacunary"] = lac;
            pass = pass && lac;
        } else {
            cert["lacunary"] = nullptr;
        }
        pass = pass && (!gram || *gram < o.threshold) && tail.min > 0.0;
    }
    const std::string text = cert.dump(2) + "\n";
    if (sink.dir().empty()) sink.report() << text;
    else write_text(fs::path(sink.dir()) / "certificate.json", text);
    sink.report() << "verdict: " << (pass ? "pass" : "fail") << "\n";
    return pass ? kExitPass : kExitFail;
}

// Levels for jp and delta: from the spectrum CSV when given, else canonical.
SpectrumLevels levels_from(const Options& o, const HadamardSystem& sys) {
    if (o.spectrum.empty()) {
        std::vector<unsigned> n_seq = o.n_seq;
        n_seq.resize(std::max<std::size_t>(n_seq.size(), o.levels), 1);
        return canonical_spectrum(sys, n_seq, o.levels, o.tol);
    }
    const LoadedSpectrum loaded = load_spectrum_csv(o.spectrum);
    if (loaded.levels.empty() || loaded.m.empty()) fail(ErrorKind::Parse, "spectrum CSV lacks level and m columns");
    SpectrumLevels spec;
    spec.sys = sys;
    spec.kind = "loaded";
    unsigned top = *std::max_element(loaded.levels.begin(), loaded.levels.end());
    spec.m_seq.assign(top, 0);
    for (std::size_t i = 0; i < loaded.points.size(); ++i) {
        if (loaded.levels[i] == 0) fail(ErrorKind::Parse, "level numbers start at 1");
        spec.m_seq[loaded.levels[i] - 1] = loaded.m[i];
        SpectrumPoint p;
        p.lambda = loaded.points[i];
        p.level = loaded.levels[i];
        spec.points.push_back(std::move(p));
    }
    return spec;
}

PointSet points_from(const Options& o, const HadamardSystem& sys) {
    if (o.spectrum.empty()) return levels_from(o, sys).all();
    return load_spectrum_csv(o.spectrum).points;
}

int cmd_check(const Options& o, Sink& sink) {
    check_tol(o.tol, "--tol");
    const std::string& which = o.which;
    if (which == "lacunary") {
        if (o.spectrum.empty()) fail(ErrorKind::Parse, "check lacunary needs --spectrum");
        const PointSet pts = load_spectrum_csv(o.spectrum).points;
        const BigRational b = parse_rational(o.b);
        const std::size_t d = pts.empty() ? 1 : pts.front().size();
        const bool lac = verify_lacunary(sort_by_norm(pts), b);
        sink.report() << "lacunary: " << (lac ? "true" : "false") << "\n";
        if (!lac) return kExitFail;
        const auto windows = random_windows(pts, o.windows, o.h_max, o.seed);
        const auto rep = check_lacunary_bound(pts, b, d, windows);
        CsvTable t;
        t.header = numbered("x", d);
        for (const char* c : {"h", "count", "bound"}) t.header.push_back(c);
        for (const auto& w : windows) {
            std::vector<std::string> row;
            for (const auto& c : w.x) row.push_back(format_rational(c));
            row.push_back(format_double(to_double(w.h)));
            row.push_back(std::to_string(count_in_cube(pts, w.x, w.h)));
            row.push_back(format_double(lacunary_count_bound(b, d, to_double(w.h))));
            t.rows.push_back(std::move(row));
        }
        sink.table("lacunary.csv", to_csv(t));
        sink.report() << "windows: " << rep.windows << "\nviolations: " << rep.violations
                      << "\nmax_count: " << rep.max_count << "\n";
        return rep.holds ? kExitPass : kExitFail;
    }

    const HadamardSystem sys = system_from(load_system(o.system), o.hadamard_tol);
    const SelfAffineMeasure mu(sys);
    const std::size_t d = sys.dim();
    std::vector<Frequency> xis;
    for (const auto& x : o.xi) xis.push_back(parse_xi(x, d, o.exact_xi));

    if (which == "gram") {
        const PointSet pts = points_from(o, sys);
        const auto entries = gram_table(mu, pts, o.tol);
        double mx = 0.0;
        for (const auto& e : entries) mx = std::max(mx, e.modulus);
        sink.table("gram.csv", to_csv(gram_csv(pts, entries)));
        sink.report() << "gram_max: " << format_double(mx) << "\n";
        return mx < o.threshold ? kExitPass : kExitFail;
    }
    if (which == "jp") {
        const SpectrumLevels spec = levels_from(o, sys);
        if (xis.empty()) xis.push_back(Frequency(BigVec(d, BigInt(0))));
        std::vector<JPProfile> profs;
        bool pass = true;
        for (const auto& xi : xis) {
            profs.push_back(jp_profile(mu, spec, xi, spec.levels(), o.tol));
            pass = pass && profs.back().nondecreasing && profs.back().bessel;
            sink.report() << "xi " << xi.to_string() << ": S_K " << format_double(profs.back().partial_sums.back())
                          << "\n";
        }
        sink.table("jp.csv", to_csv(jp_table(profs)));
        return pass ? kExitPass : kExitFail;
    }
    if (which == "delta") {
        const SpectrumLevels spec = levels_from(o, sys);
        const TailCertificate tail = tail_delta(mu, spec, o.tol);
        CsvTable t{{"level", "tail_min", "delta"}, {}};
        for (const auto& l : tail.levels)
            t.rows.push_back({std::to_string(l.level), format_double(l.min), format_double(l.min * l.min)});
        sink.table("delta.csv", to_csv(t));
        sink.report() << "delta: " << format_double(tail.min * tail.min) << "\n";
        return tail.min > 0.0 ? kExitPass : kExitFail;
    }
    if (which == "nodecay") {
        const auto res = no_decay_check(mu, parse_int_vector(o.k, d), o.n_max, o.tol);
        CsvTable t{{"n", "abs_ft"}, {}};
        for (std::size_t n = 0; n < res.values.size(); ++n)
            t.rows.push_back({std::to_string(n), format_double(res.values[n])});
        sink.table("nodecay.csv", to_csv(t));
        sink.report() << "spread: " << format_double(res.spread) << "\n";
        return res.spread < o.threshold ? kExitPass : kExitFail;
    }
    if (which == "zeroset") {
        if (xis.size() != 1) fail(ErrorKind::Parse, "check zeroset needs exactly one --xi");
        const auto ev = K_set(mu, xis.front(), o.eps, o.radius, o.tol);
        CsvTable t;
        t.header = numbered("k", d);
        t.header.push_back("abs_ft");
        for (const auto& h : ev.hits) {
            std::vector<std::string> row;
            for (auto c : h.k) row.push_back(std::to_string(c));
            row.push_back(format_double(h.modulus));
            t.rows.push_back(std::move(row));
        }
        sink.table("zeroset.csv", to_csv(t));
        sink.report() << "hits: " << ev.hits.size() << "\n";
        return ev.hits.empty() ? kExitFail : kExitPass;
    }
    fail(ErrorKind::Parse, "unknown check '" + which + "'");
}

int cmd_dim(const Options& o, Sink& sink) {
    const PointSet pts = load_spectrum_csv(o.spectrum).points;
    if (pts.size() < 4) {
        sink.report() << "degenerate: fewer than 4 points\n";
        return kExitFail;
    }
    DimensionEstimate est = beurling_dimension_estimate(pts);
    if (o.r != 0.0) {
        const auto prof = beurling_profile(pts, o.r, est.profile.h_grid);
        est.profile.densities = prof.densities;
        est.profile.r = o.r;
    }
    sink.table("density.csv", to_csv(density_table(est, pts.front().size())));
    sink.report() << "estimate: " << format_double(est.estimate) << "\nresidual: " << format_double(est.residual)
                  << "\ndegenerate: " << (est.degenerate ? "true" : "false") << "\n";
    return est.degenerate ? kExitFail : kExitPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectra of self-affine measures: construction and certification"};
    app.name("spectral_forge");
    app.require_subcommand(1);
    Options o;

    auto* validate = app.add_subcommand("validate", "Check that a triple is Hadamard");
    validate->add_option("--system", o.system, "Triple or quasi-product JSON file")->required();
    validate->add_option("--tol", o.hadamard_tol, "Unitarity tolerance");
    validate->add_flag("--exact", o.exact, "Also decide orthogonality in the cyclotomic field");

    auto* spectrum = app.add_subcommand("spectrum", "Construct a spectrum and its certificate");
    spectrum->add_option("--system", o.system, "System JSON file")->required();
    spectrum->add_option("--kind", o.kind, "canonical, lacunary or product-sparse")
        ->check(CLI::IsMember({"canonical", "lacunary", "product-sparse"}));
    spectrum->add_option("--levels", o.levels, "Number of levels K")->check(CLI::PositiveNumber);
    spectrum->add_option("--n", o.n_seq, "Block lengths n_1 n_2 ... (default 1)");
    spectrum->add_option("--b", o.b, "Lacunarity base, integer or p/q");
    spectrum->add_option("--radius", o.radius, "Largest candidate search radius")->check(CLI::PositiveNumber);
    spectrum->add_option("--radius-step", o.radius_step, "Search radius increment")->check(CLI::PositiveNumber);
    spectrum->add_option("--grid", o.grid, "Grid resolution for the eps0 estimate (0: 16 per axis up to d = 2, else 8)")->check(CLI::NonNegativeNumber);
    spectrum->add_option("--eps-radius", o.eps_radius, "Translate radius for the eps0 estimate")
        ->check(CLI::PositiveNumber);
    spectrum->add_option("--fiber-levels", o.fiber_levels, "Fiber shells for product-sparse");
    spectrum->add_option("--base-levels", o.base_levels, "Template levels for product-sparse")
        ->check(CLI::PositiveNumber);
    spectrum->add_option("--tol", o.tol, "Fourier transform tolerance");
    spectrum->add_option("--threshold", o.threshold, "Orthogonality threshold for the Gram maximum");
    spectrum->add_option("--out", o.out, "Output directory")->required();

    auto* check = app.add_subcommand("check", "Run one analysis check");
    check->add_option("which", o.which, "gram, jp, delta, lacunary, nodecay or zeroset")
        ->required()
        ->check(CLI::IsMember({"gram", "jp", "delta", "lacunary", "nodecay", "zeroset"}));
    check->add_option("--system", o.system, "System JSON file");
    check->add_option("--spectrum", o.spectrum, "Spectrum CSV (default: canonical levels)");
    check->add_option("--levels", o.levels, "Canonical levels when no spectrum is given")->check(CLI::PositiveNumber);
    check->add_option("--n", o.n_seq, "Block lengths for the canonical levels");
    check->add_option("--xi", o.xi, "Frequency, comma separated coordinates (repeatable)");
    check->add_flag("--exact-xi", o.exact_xi, "Keep xi as an exact rational instead of rounding to double");
    check->add_option("--k", o.k, "Integer vector for nodecay");
    check->add_option("--n-max", o.n_max, "Largest power for nodecay");
    check->add_option("--eps", o.eps, "Modulus threshold for zeroset");
    check->add_option("--radius", o.radius, "Translate radius for zeroset")->check(CLI::PositiveNumber);
    check->add_option("--b", o.b, "Lacunarity base");
    check->add_option("--windows", o.windows, "Random windows for the lacunary bound");
    check->add_option("--h-max", o.h_max, "Largest random window half-width");
    check->add_option("--seed", o.seed, "Seed for random windows");
    check->add_option("--tol", o.tol, "Fourier transform tolerance");
    check->add_option("--threshold", o.threshold, "Pass threshold for gram and nodecay");
    check->add_option("--out", o.out, "Output directory (default: CSV on stdout)");

    auto* dim = app.add_subcommand("dim", "Density profile and dimension estimate");
    dim->add_option("--spectrum", o.spectrum, "Spectrum CSV")->required();
    dim->add_option("--r", o.r, "Exponent for the density column");
    dim->add_option("--out", o.out, "Output directory (default: CSV on stdout)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitPass : kExitUsage;
    }

    Sink sink(o, out, err);
    try {
        if (*validate) return cmd_validate(o, sink);
        if (*spectrum) return cmd_spectrum(o, sink);
        if (*check) {
            if (o.which != "lacunary" && o.system.empty()) fail(ErrorKind::Parse, "check " + o.which + " needs --system");
            return cmd_check(o, sink);
        }
        return cmd_dim(o, sink);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return e.kind() == ErrorKind::Parse ? kExitUsage : kExitFail;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFail;
    }
}

}  // namespace spectral_forge
