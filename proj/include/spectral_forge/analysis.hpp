#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spectral_forge/measure.hpp"
#include "spectral_forge/spectra.hpp"

namespace spectral_forge {

using PointSet = std::vector<BigVec>;
using RationalVec = std::vector<BigRational>;

/// #{lambda : ‖lambda - x‖_inf <= h} (closed cube).
std::size_t count_in_cube(const PointSet& points, const RationalVec& x, const BigRational& h);
std::size_t count_in_cube(const PointSet& points, std::span<const double> x, double h);

struct DensityProfile {
    double r = 0.0;
    std::vector<BigRational> h_grid;
    std::vector<std::size_t> sup_counts;
    /// Center attaining the supremum (first in family order on ties).
    std::vector<RationalVec> centers;
    /// sup_count / h^r.
    std::vector<double> densities;
};

/// Points of the set plus midpoints of neighbours in each coordinate ordering.
std::vector<RationalVec> default_centers(const PointSet& points);
/// 1, 2, 4, ... up to half the largest coordinate extent.
std::vector<BigRational> default_h_grid(const PointSet& points);

DensityProfile beurling_profile(const PointSet& points, double r, const std::vector<BigRational>& h_grid,
                                const std::vector<RationalVec>& centers);
DensityProfile beurling_profile(const PointSet& points, double r, const std::vector<BigRational>& h_grid);

struct DimensionEstimate {
    double estimate = 0.0;
    /// Root-mean-square residual of the fit.
    double residual = 0.0;
    bool degenerate = false;
    DensityProfile profile;
};

/// Least-squares slope of log(sup count) against log h on the upper half of the grid.
DimensionEstimate beurling_dimension_estimate(const PointSet& points, const std::vector<BigRational>& h_grid = {});

/// log_b(4 sqrt(d) h) + 2.
double lacunary_count_bound(double b, std::size_t d, double h);
double lacunary_count_bound(const BigRational& b, std::size_t d, double h);

struct Window {
    RationalVec x;
    BigRational h;
};

/// Reproducible windows: centers at points of the set shifted by a random integer
/// offset in [-h, h]^d, half-widths log-uniform in (1, h_max].
std::vector<Window> random_windows(const PointSet& points, std::size_t count, double h_max, std::uint64_t seed);

struct LacunaryBoundReport {
    bool holds = true;
    std::size_t windows = 0;
    std::size_t violations = 0;
    std::size_t max_count = 0;
};

LacunaryBoundReport check_lacunary_bound(const PointSet& points, const BigRational& b, std::size_t d,
                                         const std::vector<Window>& windows);

struct SandwichReport {
    bool holds = true;
    /// Lower and upper counts coincide with the middle one everywhere.
    bool equality = true;
    std::size_t windows = 0;
    std::size_t violations = 0;
    BigRational c1;
    BigRational c2;
    /// c2^r and c1^r, the resulting density factors.
    double lower_factor = 0.0;
    double upper_factor = 0.0;
};

/// #(Λ ∩ Q_{c2 h}(M^{-1}x)) <= #(MΛ ∩ Q_h(x)) <= #(Λ ∩ Q_{c1 h}(M^{-1}x)) with
/// c1 = ‖M^{-1}‖_inf and c2 = 1/‖M‖_inf, over centers of MΛ and the h grid.
SandwichReport conjugation_sandwich(const PointSet& points, const IntMatrix& M, double r,
                                    const std::vector<BigRational>& h_grid);

struct JPProfile {
    Frequency xi;
    std::vector<double> partial_sums;
    double tol = 0.0;
    bool nondecreasing = true;
    /// Every S_K <= 1 + K tol.
    bool bessel = true;
};

/// S_K(xi) = sum over Lambda_K of |mu^(xi + lambda)|^2 for K = 1..K_max.
JPProfile jp_profile(const SelfAffineMeasure& mu, const SpectrumLevels& spec, const Frequency& xi, unsigned K_max,
                     double tol);

struct GramReport {
    double max = 0.0;
    bool orthogonal = true;
};

GramReport gram_check(const SelfAffineMeasure& mu, const PointSet& points, double tol, double ortho_tol = 1e-8);

struct GramEntry {
    std::size_t i = 0;
    std::size_t j = 0;
    double modulus = 0.0;
};

/// All pairs i < j with |mu^(p_i - p_j)|.
std::vector<GramEntry> gram_table(const SelfAffineMeasure& mu, const PointSet& points, double tol);

/// Center of a cube of half-width h missing every point, from gaps in the
/// coordinate projections. With `extended` the box may grow by 2h on each side.
std::optional<RationalVec> find_empty_cube(const PointSet& points, const BigRational& h, bool extended = false);

struct DecayProbe {
    double gamma = 0.0;
    std::vector<unsigned> base_exponents;
    std::vector<RationalVec> centers;
    /// sum_j #(Λ ∩ (Q_{2^{j+1}} \ Q_{2^j})) 2^{-j gamma} about each empty-cube center.
    std::vector<double> annular_sums;
    /// sum over Λ of |mu^(xi_k - lambda)|^2 at the same centers.
    std::vector<double> frame_sums;
    bool shrinking = false;
    double dimension = 0.0;
    /// gamma <= dimension estimate.
    bool inequality = false;
};

DecayProbe decay_density_probe(const SelfAffineMeasure& mu, const PointSet& points, double gamma,
                               unsigned annulus_count = 8, double tol = 1e-10);

}  // namespace spectral_forge
