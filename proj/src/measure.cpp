#include "spectral_forge/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spectral_forge/error.hpp"
#include "spectral_forge/parallel.hpp"

namespace spectral_forge {

// Data for splitting (R^t)^{-1} a into integer and fractional parts.
struct PeelData {
    std::size_t d = 0;
    LatticeSolver solver;
    std::int64_t det = 0;
    std::vector<std::int64_t> adj;  // adj(R^t), row-major
    std::vector<std::int64_t> rt;   // R^t, row-major
    std::vector<std::vector<double>> digits;

    explicit PeelData(const IntMatrix& rt_matrix) : d(rt_matrix.rows()), solver(rt_matrix) {
        det = solver.det().convert_to<std::int64_t>();
        adj.resize(d * d);
        rt.resize(d * d);
        for (std::size_t j = 0; j < d; ++j) {
            BigVec e(d, BigInt(0));
            e[j] = 1;
            const BigVec col = solver.adjugate_apply(e);
            for (std::size_t i = 0; i < d; ++i) {
                adj[i * d + j] = col[i].convert_to<std::int64_t>();
                rt[i * d + j] = rt_matrix(i, j);
            }
        }
    }
};

namespace {

using i128 = __int128;

constexpr std::int64_t kSmallLimit = std::int64_t{1} << 60;

i128 floor_div128(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// State of the walk y_n = (R^t)^{-n} xi written as a_n + h_n with a_n integer.
struct Walk {
    bool small = true;
    IntVec a_small;
    BigVec a_big;
    RealVec h;

    void normalize() {
        if (small) return;
        if (fits_int64(a_big)) {
            bool ok = std::all_of(a_big.begin(), a_big.end(),
                                  [](const BigInt& x) { return x > -kSmallLimit && x < kSmallLimit; });
            if (ok) {
                a_small = to_int(a_big);
                small = true;
            }
        }
    }

    double norm() const {
        double s = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double ai = small ? static_cast<double>(a_small[i]) : to_double(a_big[i]);
            const double c = ai + h[i];
            s += c * c;
        }
        return std::sqrt(s);
    }
};

Walk start_walk(const Frequency& xi) {
    Walk w;
    const BigVec fl = xi.floor();
    w.h = xi.fractional();
    w.small = std::all_of(fl.begin(), fl.end(), [](const BigInt& x) { return x > -kSmallLimit && x < kSmallLimit; });
    if (w.small) w.a_small = to_int(fl);
    else w.a_big = fl;
    return w;
}

// a = r + R^t a', h <- (R^t)^{-1}(h + r).
void peel_step(const PeelData& p, Walk& w) {
    const std::size_t d = p.d;
    RealVec r(d);
    bool done = false;
    if (w.small) {
        i128 x[8];
        IntVec next(d);
        bool fits = d <= 8;
        for (std::size_t i = 0; fits && i < d; ++i) {
            i128 s = 0;
            for (std::size_t k = 0; k < d; ++k) s += static_cast<i128>(p.adj[i * d + k]) * w.a_small[k];
            x[i] = floor_div128(s, p.det);
            if (x[i] <= -kSmallLimit || x[i] >= kSmallLimit) fits = false;
        }
        if (fits) {
            for (std::size_t i = 0; i < d; ++i) next[i] = static_cast<std::int64_t>(x[i]);
            for (std::size_t i = 0; i < d; ++i) {
                i128 s = w.a_small[i];
                for (std::size_t k = 0; k < d; ++k) s -= static_cast<i128>(p.rt[i * d + k]) * next[k];
                r[i] = static_cast<double>(s);
            }
            w.a_small = std::move(next);
            done = true;
        } else {
            w.a_big = to_big(w.a_small);
            w.small = false;
        }
    }
    if (!done) {
        BigVec next = p.solver.floor_solve(w.a_big);
        const BigVec rem = sub(w.a_big, p.solver.apply(next));
        for (std::size_t i = 0; i < d; ++i) r[i] = rem[i].convert_to<double>();
        w.a_big = std::move(next);
        w.normalize();
    }
    RealVec v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = w.h[i] + r[i];
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += static_cast<double>(p.adj[i * d + k]) * v[k];
        w.h[i] = s / static_cast<double>(p.det);
    }
}

Complex mask_at(const SelfAffineMeasure& mu, std::span<const double> h) {
    Complex s = 0.0;
    for (const auto& b : mu.B().points()) {
        double t = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) t += static_cast<double>(b[i]) * h[i];
        s += cis_turns(-t);
    }
    return s / static_cast<double>(mu.q());
}

void check_tol(double tol) {
    if (!(tol > 0.0 && tol < 1.0)) fail(ErrorKind::Parameter, "tolerance must lie in (0,1), got " + format_double(tol));
}

FTValue evaluate(const SelfAffineMeasure& mu, const Frequency& xi, unsigned skip, double tol) {
    check_tol(tol);
    if (xi.dim() != mu.dim()) fail(ErrorKind::Shape, "frequency dimension differs from measure dimension");
    const PeelData& p = mu.peel();
    const auto& [C, rho] = mu.contraction();
    const double lipschitz = 2.0 * std::numbers::pi * mu.b_max() * C;
    const double xi_norm = norm(xi.numerator()) / to_double(xi.denominator());

    Walk w = start_walk(xi);
    for (unsigned s = 0; s < skip; ++s) peel_step(p, w);

    // Two certified bounds on |prod_{n>N} M_B(y_n) - 1|; both use |M_B(y) - 1| <= 2 pi b_max |y|.
    auto tail_bound = [&](int depth) {
        const double from_current = std::expm1(lipschitz * rho / (1.0 - rho) * w.norm());
        const double steps = static_cast<double>(skip) + depth + 1.0;
        const double from_start = std::expm1(lipschitz * std::pow(rho, steps) / (1.0 - rho) * xi_norm);
        return std::isfinite(from_start) ? std::min(from_current, from_start) : from_current;
    };

    constexpr int kMaxDepth = 1'000'000;
    Complex product = 1.0;
    for (int depth = 0; depth <= kMaxDepth; ++depth) {
        if (depth > 0) {
            peel_step(p, w);
            const Complex factor = mask_at(mu, w.h);
            if (factor == 0.0) return {0.0, depth, 0.0};
            product *= factor;
        }
        const double bound = tail_bound(depth);
        if (bound <= tol) return {product, depth, bound};
    }
    fail(ErrorKind::Consistency, "Fourier transform did not converge at " + xi.to_string());
}

Frequency exact_frequency(std::span<const double> xi) {
    std::vector<BigRational> coords;
    coords.reserve(xi.size());
    for (double x : xi) coords.push_back(exact_rational(x));
    return Frequency::from_rationals(coords);
}

}  // namespace

SelfAffineMeasure::SelfAffineMeasure(const IntMatrix& R, const IntVectorSet& B) : R_(R) {
    if (B.dim() != R.rows()) fail(ErrorKind::Shape, "digit dimension differs from R");
    if (B.empty()) fail(ErrorKind::Cardinality, "empty digit set");
    const IntVec zero(R.rows(), 0);
    digit_shift_ = B.contains(zero) ? zero : B[0];
    IntVec neg(zero.size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -digit_shift_[i];
    B_ = B.translated(neg);
    if (!residue_distinct(R, B_)) fail(ErrorKind::Precondition, "digits " + B.to_string() + " are not distinct modulo R");
    singular_ = BigInt(B_.size()) < abs(R_.det());
    for (const auto& b : B_.points()) b_max_ = std::max(b_max_, norm(to_big(b)));
    if (abs(R_.det()) > BigInt(std::int64_t{1} << 40)) fail(ErrorKind::Overflow, "|det R| too large");
    peel_ = std::make_shared<const PeelData>(R.transpose());
}

SelfAffineMeasure::SelfAffineMeasure(const HadamardSystem& sys) : SelfAffineMeasure(sys.R().matrix(), sys.B()) {}

Complex mask(const SelfAffineMeasure& mu, std::span<const double> xi) {
    if (xi.size() != mu.dim()) fail(ErrorKind::Shape, "frequency dimension differs from measure dimension");
    return mask_at(mu, xi);
}

Complex mask(const SelfAffineMeasure& mu, const Frequency& xi) {
    if (xi.dim() != mu.dim()) fail(ErrorKind::Shape, "frequency dimension differs from measure dimension");
    // <b, xi> mod 1 reduced exactly before rounding.
    Complex s = 0.0;
    const BigInt& den = xi.denominator();
    for (const auto& b : mu.B().points()) {
        BigInt t = 0;
        for (std::size_t i = 0; i < b.size(); ++i) t += b[i] * xi.numerator()[i];
        BigInt rem = t % den;
        if (rem < 0) rem += den;
        s += cis_turns(-to_double(make_rational(rem, den)));
    }
    return s / static_cast<double>(mu.q());
}

FTValue ft(const SelfAffineMeasure& mu, const Frequency& xi, double tol) { return evaluate(mu, xi, 0, tol); }

FTValue ft(const SelfAffineMeasure& mu, std::span<const double> xi, double tol) {
    return evaluate(mu, exact_frequency(xi), 0, tol);
}

FTValue ft_scaled(const SelfAffineMeasure& mu, const Frequency& xi, unsigned skip, double tol) {
    return evaluate(mu, xi, skip, tol);
}

std::vector<FTValue> ft_grid(const SelfAffineMeasure& mu, const std::vector<Frequency>& points, double tol) {
    check_tol(tol);
    std::vector<FTValue> out(points.size());
    parallel_for(points.size(), [&](std::size_t i) { out[i] = ft(mu, points[i], tol); });
    return out;
}

std::vector<RealVec> sample_attractor(const SelfAffineMeasure& mu, unsigned depth, const SampleMode& mode) {
    if (depth < 1) fail(ErrorKind::Parameter, "sampling depth must be at least 1");
    const std::size_t d = mu.dim();
    const std::size_t q = mu.q();
    const LatticeSolver solver(mu.R().matrix());
    const double det = to_double(solver.det());
    std::vector<double> inv(d * d);
    for (std::size_t j = 0; j < d; ++j) {
        BigVec e(d, BigInt(0));
        e[j] = 1;
        const BigVec col = solver.adjugate_apply(e);
        for (std::size_t i = 0; i < d; ++i) inv[i * d + j] = to_double(col[i]);
    }
    // x <- R^{-1}(x + b), innermost digit first.
    auto point_from_digits = [&](const std::vector<std::size_t>& digits) {
        RealVec x(d, 0.0), v(d);
        for (std::size_t k = digits.size(); k-- > 0;) {
            const IntVec& b = mu.B()[digits[k]];
            for (std::size_t i = 0; i < d; ++i) v[i] = x[i] + static_cast<double>(b[i]);
            for (std::size_t i = 0; i < d; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) s += inv[i * d + j] * v[j];
                x[i] = s / det;
            }
        }
        return x;
    };

    std::vector<RealVec> out;
    if (mode.exhaustive) {
        double total = 1.0;
        for (unsigned i = 0; i < depth; ++i) total *= static_cast<double>(q);
        if (total > 1e6)
            fail(ErrorKind::Budget, "exhaustive sampling needs q^depth <= 1e6, got " + format_double(total));
        const std::size_t count = static_cast<std::size_t>(total);
        out.resize(count);
        parallel_for(count, [&](std::size_t idx) {
            std::vector<std::size_t> digits(depth);
            std::size_t rest = idx;
            for (unsigned k = 0; k < depth; ++k) {
                digits[k] = rest % q;
                rest /= q;
            }
            out[idx] = point_from_digits(digits);
        });
        std::sort(out.begin(), out.end());
    } else {
        std::mt19937_64 rng(mode.seed);
        out.reserve(mode.count);
        std::vector<std::size_t> digits(depth);
        for (std::size_t n = 0; n < mode.count; ++n) {
            for (auto& dg : digits) dg = static_cast<std::size_t>(rng() % q);
            out.push_back(point_from_digits(digits));
        }
    }
    return out;
}

ZeroSetEvidence K_set(const SelfAffineMeasure& mu, const Frequency& xi, double epsilon, std::int64_t radius, double tol) {
    check_tol(tol);
    if (!(epsilon > 0.0 && epsilon <= 1.0)) fail(ErrorKind::Parameter, "epsilon must lie in (0,1]");
    if (radius < 1) fail(ErrorKind::Parameter, "radius must be at least 1");
    if (xi.dim() != mu.dim()) fail(ErrorKind::Shape, "frequency dimension differs from measure dimension");
    ZeroSetEvidence ev{xi, radius, epsilon, {}};
    for (std::int64_t s = 0; s <= radius; ++s) {
        const auto shell = cube_shell(mu.dim(), s);
        std::vector<double> mod(shell.size());
        parallel_for(shell.size(), [&](std::size_t i) { mod[i] = std::abs(ft(mu, xi + to_big(shell[i]), tol).value); });
        for (std::size_t i = 0; i < shell.size(); ++i)
            if (mod[i] >= epsilon) ev.hits.push_back({shell[i], mod[i]});
    }
    auto norm2_of = [](const IntVec& k) {
        i128 s = 0;
        for (auto c : k) s += static_cast<i128>(c) * c;
        return s;
    };
    std::stable_sort(ev.hits.begin(), ev.hits.end(), [&](const ZeroSetHit& a, const ZeroSetHit& b) {
        const i128 na = norm2_of(a.k), nb = norm2_of(b.k);
        if (na != nb) return na < nb;
        return a.k < b.k;
    });
    return ev;
}

Eps0Estimate estimate_eps0(const SelfAffineMeasure& mu, std::int64_t grid_res, std::int64_t radius, double tol) {
    check_tol(tol);
    if (grid_res < 1) fail(ErrorKind::Parameter, "grid resolution must be at least 1");
    if (radius < 1) fail(ErrorKind::Parameter, "radius must be at least 1");
    const std::size_t d = mu.dim();
    // Grid points j/grid_res in lexicographic order.
    std::vector<Frequency> grid;
    {
        IntVec j(d, 0);
        for (;;) {
            grid.emplace_back(to_big(j), BigInt(grid_res));
            std::size_t i = d;
            bool done = true;
            while (i-- > 0) {
                if (++j[i] < grid_res) {
                    done = false;
                    break;
                }
                j[i] = 0;
            }
            if (done) break;
        }
    }
    std::vector<IntVec> translates;
    for (std::int64_t s = 0; s <= radius; ++s)
        for (auto& k : cube_shell(d, s)) translates.push_back(std::move(k));

    Eps0Estimate est;
    est.table.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t g) {
        const Frequency& xi = grid[g];
        Eps0Entry entry{xi, IntVec(d, 0), 0.0};
        const bool origin = std::all_of(xi.numerator().begin(), xi.numerator().end(), [](const BigInt& x) { return x == 0; });
        if (origin) {
            entry.modulus = std::abs(ft(mu, xi, tol).value);
        } else {
            for (const auto& k : translates) {
                const double m = std::abs(ft(mu, xi + to_big(k), tol).value);
                if (m > entry.modulus) {
                    entry.modulus = m;
                    entry.k = k;
                }
            }
        }
        est.table[g] = std::move(entry);
    });
    est.eps0 = 1.0;
    for (const auto& e : est.table) {
        if (e.modulus < tol)
            fail(ErrorKind::RadiusExhausted, "no translate within radius " + std::to_string(radius) +
                                                 " keeps the Fourier transform away from zero at xi = " + e.xi.to_string());
        est.eps0 = std::min(est.eps0, e.modulus);
    }
    return est;
}

NoDecayResult no_decay_check(const SelfAffineMeasure& mu, const IntVec& k, unsigned n_max, double tol) {
    check_tol(tol);
    if (k.size() != mu.dim()) fail(ErrorKind::Shape, "k dimension differs from measure dimension");
    const IntMatrix rt = mu.R().matrix().transpose();
    std::vector<Frequency> points;
    BigVec v = to_big(k);
    for (unsigned n = 0; n <= n_max; ++n) {
        points.emplace_back(v);
        v = rt.apply(std::span<const BigInt>(v));
    }
    const auto values = ft_grid(mu, points, tol);
    NoDecayResult out;
    for (const auto& fv : values) out.values.push_back(std::abs(fv.value));
    const auto [lo, hi] = std::minmax_element(out.values.begin(), out.values.end());
    out.spread = *hi - *lo;
    return out;
}

double gram_max(const SelfAffineMeasure& mu, const std::vector<BigVec>& points, double tol) {
    check_tol(tol);
    const std::size_t n = points.size();
    if (n < 2) return 0.0;
    std::vector<double> row_max(n, 0.0);
    parallel_for(n - 1, [&](std::size_t i) {
        double m = 0.0;
        for (std::size_t j = i + 1; j < n; ++j)
            m = std::max(m, std::abs(ft(mu, Frequency(sub(points[i], points[j])), tol).value));
        row_max[i] = m;
    });
    return *std::max_element(row_max.begin(), row_max.end());
}

}  // namespace spectral_forge
