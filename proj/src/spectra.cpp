#include "spectral_forge/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spectral_forge/error.hpp"
#include "spectral_forge/parallel.hpp"

namespace spectral_forge {

namespace {

constexpr double kOrthoTol = 1e-8;
constexpr std::size_t kGramLimit = 1024;

BigVec apply_power(const IntMatrix& M, BigVec v, unsigned n) {
    for (unsigned i = 0; i < n; ++i) v = M.apply(std::span<const BigInt>(v));
    return v;
}

std::vector<unsigned> partial_sums(const std::vector<unsigned>& n_seq) {
    std::vector<unsigned> m;
    unsigned s = 0;
    for (unsigned n : n_seq) m.push_back(s += n);
    return m;
}

bool is_zero(const BigVec& v) {
    return std::all_of(v.begin(), v.end(), [](const BigInt& x) { return x == 0; });
}

bool norm_less(const BigVec& a, const BigVec& b) {
    const BigInt na = norm2(a), nb = norm2(b);
    if (na != nb) return na < nb;
    return a < b;
}

std::string vec_string(const BigVec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i].str();
    return s + ")";
}

}  // namespace

std::size_t SpectrumLevels::level_size(unsigned k) const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [k](const SpectrumPoint& p) { return p.level <= k; }));
}

std::vector<BigVec> SpectrumLevels::level(unsigned k) const {
    std::vector<BigVec> out;
    for (const auto& p : points)
        if (p.level <= k) out.push_back(p.lambda);
    std::sort(out.begin(), out.end());
    return out;
}

SpectrumLevels canonical_spectrum(const HadamardSystem& sys, const std::vector<unsigned>& n_seq, unsigned K, double tol) {
    if (K < 1) fail(ErrorKind::Parameter, "level count K must be at least 1");
    if (n_seq.size() < K) fail(ErrorKind::Parameter, "n_seq has fewer than K entries");
    if (std::any_of(n_seq.begin(), n_seq.begin() + K, [](unsigned n) { return n < 1; }))
        fail(ErrorKind::Parameter, "block lengths n_k must be positive");
    SpectrumLevels spec;
    spec.sys = sys;
    spec.kind = "canonical";
    spec.n_seq.assign(n_seq.begin(), n_seq.begin() + K);
    spec.m_seq = partial_sums(spec.n_seq);
    const IntMatrix& R = sys.R().matrix();
    const IntMatrix Rt = R.transpose();
    const std::size_t d = sys.dim();

    spec.points.push_back({BigVec(d, BigInt(0)), 1, BigVec(d, BigInt(0)), BigVec(d, BigInt(0)), std::nullopt});
    for (unsigned k = 1; k <= K; ++k) {
        const IntVectorSet Ln = product_freqs(R, sys.L(), spec.n_seq[k - 1]);
        const unsigned shift = k == 1 ? 0 : spec.m_seq[k - 2];
        const std::size_t parents = spec.points.size();
        for (std::size_t p = 0; p < parents; ++p)
            for (const auto& l : Ln.points()) {
                const BigVec lb = to_big(l);
                if (is_zero(lb)) continue;
                BigVec lambda = add(spec.points[p].lambda, apply_power(Rt, lb, shift));
                spec.points.push_back({std::move(lambda), k, lb, BigVec(d, BigInt(0)), std::nullopt});
            }
    }

    const BigInt expected = boost::multiprecision::pow(BigInt(sys.q()), spec.m_seq.back());
    std::vector<BigVec> all = spec.all();
    if (BigInt(all.size()) != expected || std::adjacent_find(all.begin(), all.end()) != all.end())
        fail(ErrorKind::Consistency, "canonical level has " + std::to_string(all.size()) + " distinct points, expected " +
                                         expected.str());

    // Orthogonality: each block (R^n, B_n, L_n) is Hadamard, and small levels get a full Gram check.
    std::set<unsigned> blocks(spec.n_seq.begin(), spec.n_seq.end());
    for (unsigned n : blocks) {
        if (std::pow(static_cast<double>(sys.q()), n) > 256.0) continue;
        const auto report = validate_hadamard(R.power(n), product_digits(R, sys.B(), n), product_freqs(R, sys.L(), n));
        if (!report.is_hadamard)
            fail(ErrorKind::Consistency, "block of length " + std::to_string(n) + " is not Hadamard (defect " +
                                             format_double(report.defect) + ")");
    }
    if (all.size() <= kGramLimit) {
        const SelfAffineMeasure mu(sys);
        spec.gram = gram_max(mu, all, tol);
        if (*spec.gram >= kOrthoTol)
            fail(ErrorKind::Consistency, "canonical spectrum is not orthogonal (Gram max " + format_double(*spec.gram) + ")");
    }
    return spec;
}

TailCertificate tail_delta(const SelfAffineMeasure& mu, const SpectrumLevels& spec, double tol) {
    if (spec.points.empty() || spec.m_seq.empty()) fail(ErrorKind::Parameter, "empty spectrum");
    TailCertificate cert;
    for (unsigned k = 1; k <= spec.levels(); ++k) {
        const auto pts = spec.level(k);
        LevelTail lt;
        lt.level = k;
        lt.values.resize(pts.size());
        const unsigned m = spec.m_seq[k - 1];
        parallel_for(pts.size(), [&](std::size_t i) {
            lt.values[i] = std::abs(ft_scaled(mu, Frequency(pts[i]), m, tol).value);
        });
        lt.min = *std::min_element(lt.values.begin(), lt.values.end());
        cert.min = std::min(cert.min, lt.min);
        cert.levels.push_back(std::move(lt));
    }
    return cert;
}

std::vector<BigVec> sort_by_norm(std::vector<BigVec> points) {
    std::sort(points.begin(), points.end(), norm_less);
    return points;
}

bool verify_lacunary(const std::vector<BigVec>& points, const BigRational& b) {
    if (points.empty()) return true;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (norm2(points[i]) < norm2(points[i - 1]))
            fail(ErrorKind::Ordering, "points are not sorted by norm at index " + std::to_string(i));
    if (!is_zero(points[0])) return false;
    const BigRational b2 = b * b;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const BigRational prev = i == 1 ? BigRational(1) : BigRational(norm2(points[i - 1]));
        if (BigRational(norm2(points[i])) < b2 * prev) return false;
    }
    return true;
}

namespace {

struct Candidate {
    BigVec lambda;
    BigVec translate;
    std::optional<double> known;
};

}  // namespace

SpectrumLevels lacunary_spectrum(const HadamardSystem& sys, const BigRational& b, unsigned K, const LacunarySearch& search,
                                 double tol) {
    if (b <= 1) fail(ErrorKind::Parameter, "lacunarity base must exceed 1");
    if (K < 1) fail(ErrorKind::Parameter, "level count K must be at least 1");
    if (search.radius_step < 1 || search.radius_max < search.radius_step)
        fail(ErrorKind::Parameter, "search needs 1 <= radius_step <= radius_max");
    const SelfAffineMeasure mu(sys);
    const std::size_t d = sys.dim();
    const IntMatrix& R = sys.R().matrix();
    const IntMatrix Rt = R.transpose();

    SpectrumLevels spec;
    spec.sys = sys;
    spec.kind = "lacunary";
    spec.base = b;
    try {
        spec.eps0 = estimate_eps0(mu, search.eps_grid > 0 ? search.eps_grid : (sys.dim() <= 2 ? 16 : 8), search.eps_radius, tol).eps0;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::RadiusExhausted) throw;
        fail(ErrorKind::Precondition, std::string("refusing lacunary construction without evidence of an empty periodic "
                                                  "zero set: ") + e.what());
    }
    const double threshold = spec.eps0 / 2.0;
    const IntVectorSet L = reduce_L_canonical(R, sys.L());

    spec.n_seq = search.n_seq;
    spec.n_seq.resize(std::max<std::size_t>(spec.n_seq.size(), K), 1);
    spec.n_seq.resize(K);
    if (std::any_of(spec.n_seq.begin(), spec.n_seq.end(), [](unsigned n) { return n < 1; }))
        fail(ErrorKind::Parameter, "block lengths n_k must be positive");
    spec.m_seq = partial_sums(spec.n_seq);

    // Integer frequencies t != 0 with |mu^(t)| >= eps0/2: the top digits of far-out translates.
    std::vector<IntVec> ladder_tops;
    for (const auto& hit : K_set(mu, Frequency(BigVec(d, BigInt(0))), threshold, search.radius_step, tol).hits)
        if (std::any_of(hit.k.begin(), hit.k.end(), [](std::int64_t c) { return c != 0; })) ladder_tops.push_back(hit.k);

    spec.points.push_back({BigVec(d, BigInt(0)), 1, BigVec(d, BigInt(0)), BigVec(d, BigInt(0)), 1.0});
    BigInt max_norm2 = 0;

    for (unsigned k = 1; k <= K; ++k) {
        const unsigned m_prev = k == 1 ? 0 : spec.m_seq[k - 2];
        const unsigned m_k = spec.m_seq[k - 1];
        const IntMatrix Pk = Rt.power(m_k);
        const LatticeSolver modulus(Pk);
        const IntVectorSet Ln = product_freqs(R, L, spec.n_seq[k - 1]);
        const std::size_t parents = spec.points.size();
        for (std::size_t p = 0; p < parents; ++p)
            for (const auto& l : Ln.points()) {
                const BigVec lb = to_big(l);
                if (is_zero(lb)) continue;
                const BigVec r = modulus.residue(add(spec.points[p].lambda, apply_power(Rt, lb, m_prev)));
                const Frequency f(modulus.adjugate_apply(r), modulus.det());
                const BigRational need = b * b * BigRational(max_norm2 == 0 ? BigInt(1) : max_norm2);
                auto lambda_of = [&](const BigVec& t) { return add(r, Pk.apply(std::span<const BigInt>(t))); };
                auto long_enough = [&](const BigVec& lam) { return BigRational(norm2(lam)) >= need; };

                std::vector<IntVec> window;
                std::vector<double> window_mod;
                std::optional<Candidate> chosen;
                double chosen_value = 0.0;
                for (std::int64_t radius = search.radius_step; radius <= search.radius_max && !chosen;
                     radius += search.radius_step) {
                    const std::int64_t first_shell =
                        window.empty() ? 0 : radius - search.radius_step + 1;
                    std::vector<IntVec> fresh;
                    for (std::int64_t s = first_shell; s <= radius; ++s)
                        for (auto& kk : cube_shell(d, s)) fresh.push_back(std::move(kk));
                    std::vector<double> fresh_mod(fresh.size());
                    parallel_for(fresh.size(), [&](std::size_t i) {
                        fresh_mod[i] = std::abs(ft(mu, f + to_big(fresh[i]), tol).value);
                    });
                    window.insert(window.end(), fresh.begin(), fresh.end());
                    window_mod.insert(window_mod.end(), fresh_mod.begin(), fresh_mod.end());

                    std::vector<Candidate> cands;
                    for (std::size_t i = 0; i < window.size(); ++i) {
                        const BigVec t = to_big(window[i]);
                        BigVec lam = lambda_of(t);
                        if (long_enough(lam)) cands.push_back({std::move(lam), t, window_mod[i]});
                        if (window_mod[i] < threshold) continue;
                        // k0 + (R^t)^n t0 keeps the low digits of k0 and the top digits of t0.
                        for (const auto& top : ladder_tops) {
                            BigVec shifted = to_big(top);
                            for (unsigned n = 1; n < 100000; ++n) {
                                shifted = Rt.apply(std::span<const BigInt>(shifted));
                                BigVec trans = add(t, shifted);
                                BigVec lam2 = lambda_of(trans);
                                if (long_enough(lam2)) {
                                    cands.push_back({std::move(lam2), std::move(trans), std::nullopt});
                                    BigVec next_trans = add(t, Rt.apply(std::span<const BigInt>(shifted)));
                                    cands.push_back({lambda_of(next_trans), std::move(next_trans), std::nullopt});
                                    break;
                                }
                            }
                        }
                    }
                    std::sort(cands.begin(), cands.end(),
                              [](const Candidate& a, const Candidate& c) { return norm_less(a.lambda, c.lambda); });
                    cands.erase(std::unique(cands.begin(), cands.end(),
                                            [](const Candidate& a, const Candidate& c) { return a.lambda == c.lambda; }),
                                cands.end());
                    for (auto& c : cands) {
                        const double v = c.known ? *c.known : std::abs(ft(mu, f + c.translate, tol).value);
                        if (v >= threshold) {
                            chosen = std::move(c);
                            chosen_value = v;
                            break;
                        }
                    }
                }
                if (!chosen)
                    fail(ErrorKind::SearchExhausted, "no translate within radius " + std::to_string(search.radius_max) +
                                                         " certifies the point at xi = " + f.to_string() +
                                                         "; raise the search radius");
                max_norm2 = norm2(chosen->lambda);
                spec.points.push_back({chosen->lambda, k, lb, chosen->translate, chosen_value});
            }
    }

    std::vector<BigVec> all = spec.all();
    if (!verify_lacunary(sort_by_norm(all), b))
        fail(ErrorKind::Consistency, "constructed spectrum failed the lacunarity check");
    if (all.size() <= kGramLimit) {
        spec.gram = gram_max(mu, all, tol);
        if (*spec.gram >= kOrthoTol)
            fail(ErrorKind::Consistency, "lacunary spectrum is not orthogonal (Gram max " + format_double(*spec.gram) + ")");
    }
    return spec;
}

std::vector<BigVec> product_spectrum(const std::map<BigVec, std::vector<BigVec>>& base_specs,
                                     const std::vector<BigVec>& gamma_points) {
    std::vector<BigVec> out;
    for (const auto& g : gamma_points) {
        const auto it = base_specs.find(g);
        if (it == base_specs.end()) fail(ErrorKind::Mapping, "no spectrum assigned to gamma = " + vec_string(g));
        for (const auto& lam : it->second) {
            BigVec p = lam;
            p.insert(p.end(), g.begin(), g.end());
            out.push_back(std::move(p));
        }
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        fail(ErrorKind::Consistency, "product spectrum has repeated points");
    return out;
}

IntMatrix QuasiProductSystem::assembled_R() const {
    const std::size_t r = R1.rows(), s = G1.rows();
    IntMatrix R(r + s, r + s);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) R(i, j) = R1(i, j);
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < r; ++j) R(r + i, j) = C0(i, j);
        for (std::size_t j = 0; j < s; ++j) R(r + i, r + j) = G1(i, j);
    }
    return R;
}

IntVectorSet QuasiProductSystem::assembled_B() const {
    std::vector<IntVec> pts;
    for (std::size_t i = 0; i < base_digits.size(); ++i)
        for (const auto& dj : digit_table.at(i).points()) {
            IntVec p = base_digits[i];
            p.insert(p.end(), dj.begin(), dj.end());
            pts.push_back(std::move(p));
        }
    return IntVectorSet(d(), std::move(pts));
}

void QuasiProductSystem::validate() const {
    const std::size_t r = R1.rows();
    if (!R1.is_square() || r == 0) fail(ErrorKind::Shape, "R1 must be square");
    if (!G1.is_square() || G1.rows() == 0) fail(ErrorKind::Shape, "G1 must be square");
    const std::size_t s = G1.rows();
    if (C0.rows() != s || C0.cols() != r) fail(ErrorKind::Shape, "C0 must be (d-r) x r");
    if (base_digits.dim() != r) fail(ErrorKind::Shape, "base digits must lie in Z^r");
    if (digit_table.size() != base_digits.size())
        fail(ErrorKind::Mapping, "digit table has " + std::to_string(digit_table.size()) + " entries for " +
                                     std::to_string(base_digits.size()) + " base digits");
    (void)ExpansiveIntMatrix(R1);
    (void)ExpansiveIntMatrix(G1);
    for (std::size_t i = 0; i < digit_table.size(); ++i) {
        if (digit_table[i].dim() != s) fail(ErrorKind::Shape, "fiber digits must lie in Z^(d-r)");
        if (!complete_residue_set(G1, digit_table[i]))
            fail(ErrorKind::Precondition, "fiber digits " + digit_table[i].to_string() + " for base digit " +
                                              IntVectorSet(r, {base_digits[i]}).to_string() +
                                              " are not a complete residue set modulo G1");
    }
    if (fiber_lattice.size() != s) fail(ErrorKind::Shape, "fiber lattice matrix must be (d-r) x (d-r)");
    std::vector<std::vector<BigRational>> a = fiber_lattice;
    for (const auto& row : a)
        if (row.size() != s) fail(ErrorKind::Shape, "fiber lattice matrix must be (d-r) x (d-r)");
    for (std::size_t c = 0; c < s; ++c) {
        std::size_t p = c;
        while (p < s && a[p][c] == 0) ++p;
        if (p == s) fail(ErrorKind::Precondition, "fiber lattice matrix is singular");
        std::swap(a[c], a[p]);
        for (std::size_t i = c + 1; i < s; ++i) {
            const BigRational factor = a[i][c] / a[c][c];
            for (std::size_t j = c; j < s; ++j) a[i][j] -= factor * a[c][j];
        }
    }
}

SelfAffineMeasure assemble_measure(const QuasiProductSystem& qps) {
    qps.validate();
    return SelfAffineMeasure(qps.assembled_R(), qps.assembled_B());
}

std::vector<IntVec> norm_shell(std::size_t dim, unsigned n) {
    if (dim == 0) fail(ErrorKind::Shape, "shell of dimension 0");
    if (n == 0) return {IntVec(dim, 0)};
    if (n > 30) fail(ErrorKind::Parameter, "shell index too large");
    const std::int64_t hi = std::int64_t{1} << n;
    const std::int64_t lo2 = std::int64_t{1} << (2 * (n - 1));
    const std::int64_t hi2 = hi * hi;
    std::vector<IntVec> out;
    for (std::int64_t s = 0; s <= hi; ++s)
        for (auto& m : cube_shell(dim, s)) {
            std::int64_t n2 = 0;
            for (auto c : m) n2 += c * c;
            if (n2 >= lo2 && n2 < hi2) out.push_back(std::move(m));
        }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

BigInt min_sq_distance(const std::vector<BigVec>& pts) {
    BigInt best = -1;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const BigInt d2 = norm2(sub(pts[i], pts[j]));
            if (best < 0 || d2 < best) best = d2;
        }
    return best;
}

}  // namespace

SparseProductResult sparse_product_spectrum(const QuasiProductSystem& qps, const HadamardSystem& sys1, unsigned K_fiber,
                                            unsigned K_base, double tol, const SparseProductOptions& options) {
    qps.validate();
    if (!(sys1.R().matrix() == qps.R1)) fail(ErrorKind::Parameter, "base system R differs from R1 of the quasi-product system");
    const std::size_t r = qps.r();
    const std::size_t s = qps.G1.rows();
    SparseProductResult result;
    for (unsigned n = 0; n <= K_fiber; ++n) {
        const std::vector<IntVec> shell = norm_shell(s, n);
        ShellReport rep;
        rep.n = n;
        rep.count = n == 0 ? 0 : shell.size();
        rep.fibers = shell;
        rep.base = options.base ? *options.base
                                : BigRational(boost::multiprecision::pow(BigInt(8), static_cast<unsigned>(rep.count + 1)));
        SpectrumLevels tpl = lacunary_spectrum(sys1, rep.base, K_base, options.search, tol);
        const std::vector<BigVec> base_pts = tpl.all();

        const BigInt gap2 = base_pts.size() < 2 ? BigInt(-1) : min_sq_distance(base_pts);
        const BigInt need_gap = boost::multiprecision::pow(BigInt(4), static_cast<unsigned>(rep.count + 1));
        rep.template_min_gap = gap2 < 0 ? BigInt(0) : BigInt(boost::multiprecision::sqrt(gap2));
        rep.template_gap_ok = gap2 < 0 || gap2 >= need_gap * need_gap;

        std::vector<std::vector<BigVec>> copies;
        if (n == 0) {
            copies.push_back(base_pts);
        } else {
            const BigInt step = BigInt(1) << rep.count;
            for (std::size_t j = 1; j <= rep.count; ++j) {
                std::vector<BigVec> c = base_pts;
                for (auto& p : c) p[0] += step * j;
                copies.push_back(std::move(c));
            }
        }
        std::vector<BigVec> uni;
        for (const auto& c : copies) uni.insert(uni.end(), c.begin(), c.end());
        std::sort(uni.begin(), uni.end());
        rep.disjoint = std::adjacent_find(uni.begin(), uni.end()) == uni.end();
        if (n == 0) {
            rep.min_separation = rep.template_min_gap;
            rep.separation_exact = true;
        } else {
            const BigInt sep2 = min_sq_distance(uni);
            rep.min_separation = sep2 < 0 ? BigInt(0) : BigInt(boost::multiprecision::sqrt(sep2));
            const BigInt want = BigInt(1) << rep.count;
            rep.separation_exact = sep2 == want * want;
        }
        if (!rep.disjoint || !rep.separation_exact || !rep.template_gap_ok)
            fail(ErrorKind::Construction,
                 "shell n=" + std::to_string(n) + ": disjoint=" + (rep.disjoint ? "true" : "false") +
                     ", min separation " + rep.min_separation.str() + " (expected 2^" + std::to_string(rep.count) +
                     "), template gap " + rep.template_min_gap.str() + "; the lacunarity base is too small");
        for (std::size_t j = 0; j < copies.size(); ++j) {
            const IntVec& m = shell[j];
            for (const auto& lam : copies[j]) {
                BigVec p = lam;
                for (auto c : m) p.push_back(BigInt(c));
                result.points.push_back({std::move(p), n, n == 0 ? 0 : j + 1});
            }
        }
        result.shells.push_back(std::move(rep));
        result.templates.push_back(std::move(tpl));
    }
    std::sort(result.points.begin(), result.points.end(),
              [](const SparsePoint& a, const SparsePoint& b) { return a.point < b.point; });
    for (std::size_t i = 1; i < result.points.size(); ++i)
        if (result.points[i].point == result.points[i - 1].point)
            fail(ErrorKind::Construction, "sparse product spectrum has a repeated point");
    for (const auto& sp : result.points) {
        std::vector<BigRational> x(sp.point.begin(), sp.point.begin() + static_cast<std::ptrdiff_t>(r));
        for (std::size_t i = 0; i < s; ++i) {
            BigRational acc = 0;
            for (std::size_t j = 0; j < s; ++j) acc += qps.fiber_lattice[i][j] * BigRational(sp.point[r + j]);
            x.push_back(acc);
        }
        result.assembled.push_back(std::move(x));
    }
    return result;
}

}  // namespace spectral_forge
