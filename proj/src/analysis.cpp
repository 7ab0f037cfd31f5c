#include "spectral_forge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spectral_forge/error.hpp"
#include "spectral_forge/parallel.hpp"

namespace spectral_forge {

namespace {

namespace mp = boost::multiprecision;

BigInt den_of(const BigRational& x) { return mp::denominator(x); }
BigInt num_of(const BigRational& x) { return mp::numerator(x); }

BigInt scaled(const BigRational& x, const BigInt& scale) { return num_of(x) * (scale / den_of(x)); }

// Closed-cube counting on points scaled by a common denominator so that all
// comparisons are between integers. Points are sorted by first coordinate.
class ScaledCounter {
public:
    ScaledCounter(const PointSet& points, BigInt scale) : scale_(std::move(scale)) {
        pts_.reserve(points.size());
        for (const auto& p : points) {
            BigVec q = p;
            for (auto& c : q) c *= scale_;
            pts_.push_back(std::move(q));
        }
        std::sort(pts_.begin(), pts_.end());
    }

    std::size_t count(const RationalVec& x, const BigRational& h) const {
        if (pts_.empty()) return 0;
        if (x.size() != pts_.front().size()) fail(ErrorKind::Shape, "center dimension differs from point dimension");
        BigVec c(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) c[i] = scaled(x[i], scale_);
        const BigInt hs = scaled(h, scale_);
        const BigInt lo = c[0] - hs, hi = c[0] + hs;
        auto first = std::lower_bound(pts_.begin(), pts_.end(), lo,
                                      [](const BigVec& p, const BigInt& v) { return p[0] < v; });
        auto last = std::upper_bound(pts_.begin(), pts_.end(), hi,
                                     [](const BigInt& v, const BigVec& p) { return v < p[0]; });
        if (c.size() == 1) return static_cast<std::size_t>(last - first);
        std::size_t n = 0;
        for (auto it = first; it != last; ++it) {
            bool inside = true;
            for (std::size_t i = 1; i < c.size() && inside; ++i) inside = abs((*it)[i] - c[i]) <= hs;
            n += inside;
        }
        return n;
    }

private:
    BigInt scale_;
    PointSet pts_;
};

struct Query {
    RationalVec x;
    BigRational h;
};

std::vector<std::size_t> count_many(const PointSet& points, const std::vector<Query>& queries) {
    BigInt scale = 1;
    for (const auto& q : queries) {
        scale = mp::lcm(scale, den_of(q.h));
        for (const auto& c : q.x) scale = mp::lcm(scale, den_of(c));
    }
    const ScaledCounter counter(points, scale);
    std::vector<std::size_t> out(queries.size());
    parallel_for(queries.size(), [&](std::size_t i) { out[i] = counter.count(queries[i].x, queries[i].h); });
    return out;
}

RationalVec to_rational(const BigVec& v) { return RationalVec(v.begin(), v.end()); }

void check_points(const PointSet& points) {
    if (points.empty()) fail(ErrorKind::Parameter, "empty point set");
    const std::size_t d = points.front().size();
    for (const auto& p : points)
        if (p.size() != d) fail(ErrorKind::Shape, "points of mixed dimension");
}

double log_rational(const BigRational& x) { return log_big(x); }

}  // namespace

std::size_t count_in_cube(const PointSet& points, const RationalVec& x, const BigRational& h) {
    if (h <= 0) fail(ErrorKind::Parameter, "cube half-width must be positive");
    std::size_t n = 0;
    for (const auto& p : points) {
        if (p.size() != x.size()) fail(ErrorKind::Shape, "center dimension differs from point dimension");
        bool inside = true;
        for (std::size_t i = 0; i < p.size() && inside; ++i) inside = abs(BigRational(p[i]) - x[i]) <= h;
        n += inside;
    }
    return n;
}

std::size_t count_in_cube(const PointSet& points, std::span<const double> x, double h) {
    RationalVec xr;
    for (double c : x) xr.push_back(exact_rational(c));
    return count_in_cube(points, xr, exact_rational(h));
}

std::vector<RationalVec> default_centers(const PointSet& points) {
    check_points(points);
    std::vector<RationalVec> centers;
    for (const auto& p : points) centers.push_back(to_rational(p));
    const std::size_t d = points.front().size();
    for (std::size_t axis = 0; axis < d; ++axis) {
        std::vector<const BigVec*> order;
        for (const auto& p : points) order.push_back(&p);
        std::stable_sort(order.begin(), order.end(), [axis](const BigVec* a, const BigVec* b) {
            if ((*a)[axis] != (*b)[axis]) return (*a)[axis] < (*b)[axis];
            return *a < *b;
        });
        for (std::size_t i = 1; i < order.size(); ++i) {
            RationalVec mid(d);
            for (std::size_t j = 0; j < d; ++j) mid[j] = BigRational((*order[i - 1])[j] + (*order[i])[j]) / 2;
            centers.push_back(std::move(mid));
        }
    }
    std::sort(centers.begin(), centers.end());
    centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
    return centers;
}

std::vector<BigRational> default_h_grid(const PointSet& points) {
    check_points(points);
    BigInt extent = 0;
    for (std::size_t axis = 0; axis < points.front().size(); ++axis) {
        const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                                  [axis](const BigVec& a, const BigVec& b) { return a[axis] < b[axis]; });
        extent = std::max(extent, BigInt((*hi)[axis] - (*lo)[axis]));
    }
    std::vector<BigRational> grid{BigRational(1)};
    BigInt h = 2;
    while (2 * h <= extent) {
        grid.push_back(BigRational(h));
        h *= 2;
    }
    return grid;
}

DensityProfile beurling_profile(const PointSet& points, double r, const std::vector<BigRational>& h_grid,
                                const std::vector<RationalVec>& centers) {
    check_points(points);
    if (h_grid.empty()) fail(ErrorKind::Parameter, "empty h grid");
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
        if (h_grid[i] <= 0) fail(ErrorKind::Parameter, "h grid values must be positive");
        if (i && h_grid[i] <= h_grid[i - 1]) fail(ErrorKind::Parameter, "h grid must be increasing");
    }
    if (centers.empty()) fail(ErrorKind::Parameter, "empty center family");
    DensityProfile prof;
    prof.r = r;
    prof.h_grid = h_grid;
    for (const auto& h : h_grid) {
        std::vector<Query> qs;
        qs.reserve(centers.size());
        for (const auto& c : centers) qs.push_back({c, h});
        const auto counts = count_many(points, qs);
        std::size_t best = 0;
        for (std::size_t i = 1; i < counts.size(); ++i)
            if (counts[i] > counts[best]) best = i;
        prof.sup_counts.push_back(counts[best]);
        prof.centers.push_back(centers[best]);
        prof.densities.push_back(counts[best] == 0 ? 0.0
                                                   : std::exp(std::log(static_cast<double>(counts[best])) -
                                                              r * log_rational(h)));
    }
    return prof;
}

DensityProfile beurling_profile(const PointSet& points, double r, const std::vector<BigRational>& h_grid) {
    return beurling_profile(points, r, h_grid, default_centers(points));
}

DimensionEstimate beurling_dimension_estimate(const PointSet& points, const std::vector<BigRational>& h_grid) {
    if (points.size() < 4) fail(ErrorKind::Parameter, "dimension estimate needs at least 4 points");
    DimensionEstimate est;
    est.profile = beurling_profile(points, 0.0, h_grid.empty() ? default_h_grid(points) : h_grid);
    const std::size_t n = est.profile.h_grid.size();
    std::vector<double> xs, ys;
    for (std::size_t i = n / 2; i < n; ++i) {
        xs.push_back(log_rational(est.profile.h_grid[i]));
        ys.push_back(std::log(static_cast<double>(std::max<std::size_t>(est.profile.sup_counts[i], 1))));
    }
    const bool flat = std::all_of(ys.begin(), ys.end(), [&](double y) { return y == ys.front(); });
    if (xs.size() < 2 || flat) {
        est.degenerate = true;
        return est;
    }
    const double m = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    est.estimate = sxy / sxx;
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (my + est.estimate * (xs[i] - mx));
        ss += e * e;
    }
    est.residual = std::sqrt(ss / m);
    return est;
}

double lacunary_count_bound(double b, std::size_t d, double h) {
    if (!(b > 1.0)) fail(ErrorKind::Parameter, "lacunarity base must exceed 1");
    if (!(h > 1.0)) fail(ErrorKind::Parameter, "window half-width must exceed 1");
    if (d == 0) fail(ErrorKind::Parameter, "dimension must be positive");
    return std::log(4.0 * std::sqrt(static_cast<double>(d)) * h) / std::log(b) + 2.0;
}

double lacunary_count_bound(const BigRational& b, std::size_t d, double h) {
    if (b <= 1) fail(ErrorKind::Parameter, "lacunarity base must exceed 1");
    if (!(h > 1.0)) fail(ErrorKind::Parameter, "window half-width must exceed 1");
    if (d == 0) fail(ErrorKind::Parameter, "dimension must be positive");
    return std::log(4.0 * std::sqrt(static_cast<double>(d)) * h) / log_big(b) + 2.0;
}

std::vector<Window> random_windows(const PointSet& points, std::size_t count, double h_max, std::uint64_t seed) {
    check_points(points);
    if (!(h_max > 1.0)) fail(ErrorKind::Parameter, "h_max must exceed 1");
    std::mt19937_64 rng(seed);
    std::vector<Window> out;
    out.reserve(count);
    const double log_max = std::log(h_max);
    for (std::size_t n = 0; n < count; ++n) {
        const BigVec& anchor = points[rng() % points.size()];
        // 53 random bits -> u in (0,1]
        const double u = (static_cast<double>(rng() >> 11) + 1.0) / 9007199254740992.0;
        const double h = std::exp(u * log_max);
        const auto hi = static_cast<std::int64_t>(std::floor(h));
        RationalVec x;
        for (const auto& c : anchor) {
            const auto span = static_cast<std::uint64_t>(2 * hi + 1);
            const std::int64_t off = static_cast<std::int64_t>(rng() % span) - hi;
            x.push_back(BigRational(c + off));
        }
        out.push_back({std::move(x), exact_rational(std::max(h, std::nextafter(1.0, 2.0)))});
    }
    return out;
}

LacunaryBoundReport check_lacunary_bound(const PointSet& points, const BigRational& b, std::size_t d,
                                         const std::vector<Window>& windows) {
    if (!verify_lacunary(sort_by_norm(points), b))
        fail(ErrorKind::Precondition, "point set is not " + format_rational(b) + "-lacunary");
    LacunaryBoundReport rep;
    rep.windows = windows.size();
    std::vector<Query> qs;
    for (const auto& w : windows) qs.push_back({w.x, w.h});
    const auto counts = count_many(points, qs);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const double bound = lacunary_count_bound(b, d, to_double(windows[i].h));
        rep.max_count = std::max(rep.max_count, counts[i]);
        // The bound is evaluated in floating point; allow for its rounding only.
        if (static_cast<double>(counts[i]) > bound + 1e-9) {
            ++rep.violations;
            rep.holds = false;
        }
    }
    return rep;
}

SandwichReport conjugation_sandwich(const PointSet& points, const IntMatrix& M, double r,
                                    const std::vector<BigRational>& h_grid) {
    check_points(points);
    const std::size_t d = points.front().size();
    if (!M.is_square() || M.rows() != d) fail(ErrorKind::Shape, "matrix dimension differs from point dimension");
    const LatticeSolver solver(M);
    const BigInt det = solver.det();
    std::vector<std::vector<BigRational>> inv(d, std::vector<BigRational>(d));
    for (std::size_t j = 0; j < d; ++j) {
        BigVec e(d, BigInt(0));
        e[j] = 1;
        const BigVec col = solver.adjugate_apply(e);
        for (std::size_t i = 0; i < d; ++i) inv[i][j] = make_rational(col[i], det);
    }
    SandwichReport rep;
    BigRational inv_norm = 0, norm_m = 0;
    for (std::size_t i = 0; i < d; ++i) {
        BigRational a = 0, b = 0;
        for (std::size_t j = 0; j < d; ++j) {
            a += abs(inv[i][j]);
            b += BigRational(std::abs(M(i, j)));
        }
        inv_norm = std::max(inv_norm, a);
        norm_m = std::max(norm_m, b);
    }
    rep.c1 = inv_norm;
    rep.c2 = BigRational(1) / norm_m;
    rep.lower_factor = std::pow(to_double(rep.c2), r);
    rep.upper_factor = std::pow(to_double(rep.c1), r);

    PointSet image;
    for (const auto& p : points) image.push_back(M.apply(std::span<const BigInt>(p)));
    const auto centers = default_centers(image);
    const auto grid = h_grid.empty() ? default_h_grid(image) : h_grid;

    std::vector<Query> mid, lower, upper;
    for (const auto& h : grid)
        for (const auto& x : centers) {
            RationalVec y(d, BigRational(0));
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) y[i] += inv[i][j] * x[j];
            mid.push_back({x, h});
            lower.push_back({y, rep.c2 * h});
            upper.push_back({y, rep.c1 * h});
        }
    const auto cm = count_many(image, mid);
    const auto cl = count_many(points, lower);
    const auto cu = count_many(points, upper);
    rep.windows = mid.size();
    for (std::size_t i = 0; i < mid.size(); ++i) {
        if (cl[i] > cm[i] || cm[i] > cu[i]) {
            ++rep.violations;
            rep.holds = false;
        }
        if (cl[i] != cm[i] || cu[i] != cm[i]) rep.equality = false;
    }
    return rep;
}

JPProfile jp_profile(const SelfAffineMeasure& mu, const SpectrumLevels& spec, const Frequency& xi, unsigned K_max,
                     double tol) {
    if (K_max < 1 || K_max > spec.levels())
        fail(ErrorKind::Parameter, "K_max must lie in 1.." + std::to_string(spec.levels()));
    JPProfile prof;
    prof.xi = xi;
    prof.tol = tol;
    double running = 0.0;
    for (unsigned k = 1; k <= K_max; ++k) {
        std::vector<BigVec> fresh;
        for (const auto& p : spec.points)
            if (p.level == k) fresh.push_back(p.lambda);
        std::sort(fresh.begin(), fresh.end());
        std::vector<Frequency> pts;
        for (const auto& lam : fresh) pts.push_back(xi + lam);
        const auto values = ft_grid(mu, pts, tol);
        std::vector<double> sq;
        for (const auto& v : values) sq.push_back(std::norm(v.value));
        // Adding only the new level keeps the partial sums monotone bit for bit.
        const double next = running + pairwise_sum(sq);
        if (next < running) prof.nondecreasing = false;
        running = next;
        prof.partial_sums.push_back(running);
        if (running > 1.0 + k * tol) prof.bessel = false;
    }
    return prof;
}

GramReport gram_check(const SelfAffineMeasure& mu, const PointSet& points, double tol, double ortho_tol) {
    GramReport rep;
    rep.max = gram_max(mu, points, tol);
    rep.orthogonal = rep.max < ortho_tol;
    return rep;
}

std::vector<GramEntry> gram_table(const SelfAffineMeasure& mu, const PointSet& points, double tol) {
    const std::size_t n = points.size();
    std::vector<std::vector<GramEntry>> rows(n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j)
            rows[i].push_back({i, j, std::abs(ft(mu, Frequency(sub(points[i], points[j])), tol).value)});
    });
    std::vector<GramEntry> out;
    for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::optional<RationalVec> find_empty_cube(const PointSet& points, const BigRational& h, bool extended) {
    check_points(points);
    if (h <= 0) fail(ErrorKind::Parameter, "cube half-width must be positive");
    const std::size_t d = points.front().size();
    RationalVec box_mid(d);
    std::vector<BigInt> lo(d), hi(d);
    for (std::size_t j = 0; j < d; ++j) {
        lo[j] = hi[j] = points.front()[j];
        for (const auto& p : points) {
            lo[j] = std::min(lo[j], p[j]);
            hi[j] = std::max(hi[j], p[j]);
        }
        box_mid[j] = BigRational(lo[j] + hi[j]) / 2;
    }
    for (std::size_t axis = 0; axis < d; ++axis) {
        std::vector<BigInt> vals;
        for (const auto& p : points) vals.push_back(p[axis]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t i = 1; i < vals.size(); ++i)
            if (BigRational(vals[i] - vals[i - 1]) > 2 * h) {
                RationalVec c = box_mid;
                c[axis] = BigRational(vals[i - 1] + vals[i]) / 2;
                return c;
            }
    }
    if (extended) {
        RationalVec c = box_mid;
        c[0] = BigRational(hi[0]) + 2 * h;
        return c;
    }
    return std::nullopt;
}

DecayProbe decay_density_probe(const SelfAffineMeasure& mu, const PointSet& points, double gamma, unsigned annulus_count,
                               double tol) {
    if (!(gamma > 0.0)) fail(ErrorKind::Parameter, "decay exponent gamma must be positive");
    if (annulus_count < 1) fail(ErrorKind::Parameter, "annulus count must be at least 1");
    check_points(points);
    if (points.front().size() != mu.dim()) fail(ErrorKind::Shape, "point dimension differs from measure dimension");
    DecayProbe probe;
    probe.gamma = gamma;
    const auto grid = default_h_grid(points);
    for (unsigned k = 0; k < grid.size(); ++k) {
        const BigRational h = grid[k];
        auto c = find_empty_cube(points, h, false);
        if (!c) c = find_empty_cube(points, h, true);
        probe.base_exponents.push_back(k);
        probe.centers.push_back(*c);
    }
    std::vector<Query> qs;
    for (const auto& c : probe.centers)
        for (unsigned j = 0; j <= annulus_count; ++j) {
            const unsigned e = static_cast<unsigned>(&c - probe.centers.data()) + j;
            qs.push_back({c, BigRational(BigInt(1) << e)});
        }
    const auto counts = count_many(points, qs);
    for (std::size_t idx = 0; idx < probe.centers.size(); ++idx) {
        double sum = 0.0;
        for (unsigned j = 0; j < annulus_count; ++j) {
            const std::size_t inner = counts[idx * (annulus_count + 1) + j];
            const std::size_t outer = counts[idx * (annulus_count + 1) + j + 1];
            const double e = static_cast<double>(idx + j);
            sum += static_cast<double>(outer - inner) * std::exp2(-e * gamma);
        }
        probe.annular_sums.push_back(sum);

        const Frequency center = Frequency::from_rationals(probe.centers[idx]);
        std::vector<Frequency> pts;
        for (const auto& p : points) pts.push_back(center - Frequency(p));
        const auto values = ft_grid(mu, pts, tol);
        std::vector<double> sq;
        for (const auto& v : values) sq.push_back(std::norm(v.value));
        probe.frame_sums.push_back(pairwise_sum(sq));
    }
    probe.shrinking = probe.annular_sums.size() >= 2 && probe.annular_sums.back() < probe.annular_sums.front();
    if (points.size() >= 4) probe.dimension = beurling_dimension_estimate(points).estimate;
    probe.inequality = gamma <= probe.dimension;
    return probe;
}

}  // namespace spectral_forge
