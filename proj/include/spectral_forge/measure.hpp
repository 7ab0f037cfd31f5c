#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "spectral_forge/hadamard.hpp"
#include "spectral_forge/intlat.hpp"
#include "spectral_forge/numeric.hpp"

namespace spectral_forge {

struct PeelData;

/// Equal-weight self-affine measure mu(R, B), translated so that 0 is a digit.
class SelfAffineMeasure {
public:
    SelfAffineMeasure() = default;
    SelfAffineMeasure(const IntMatrix& R, const IntVectorSet& B);
    explicit SelfAffineMeasure(const HadamardSystem& sys);

    std::size_t dim() const { return R_.dim(); }
    const ExpansiveIntMatrix& R() const { return R_; }
    const IntVectorSet& B() const { return B_; }
    std::size_t q() const { return B_.size(); }
    double b_max() const { return b_max_; }
    /// Envelope ‖(R^t)^{-n}‖ <= C rho^n.
    const Contraction& contraction() const { return R_.contraction(); }
    bool singular() const { return singular_; }
    const IntVec& digit_shift() const { return digit_shift_; }
    const PeelData& peel() const { return *peel_; }

private:
    ExpansiveIntMatrix R_;
    IntVectorSet B_;
    double b_max_ = 0.0;
    bool singular_ = false;
    IntVec digit_shift_;
    std::shared_ptr<const PeelData> peel_;
};

/// (1/q) sum_b exp(-2 pi i <b, xi>).
Complex mask(const SelfAffineMeasure& mu, std::span<const double> xi);
Complex mask(const SelfAffineMeasure& mu, const Frequency& xi);

struct FTValue {
    Complex value;
    /// Number of mask factors multiplied.
    int trunc_depth = 0;
    /// Certified bound on the relative error of the omitted tail.
    double tail_bound = 0.0;
};

/// mu^(xi) = prod_{n>=1} M_B((R^t)^{-n} xi), truncated at the first depth whose
/// certified tail bound is <= tol.
FTValue ft(const SelfAffineMeasure& mu, const Frequency& xi, double tol);
FTValue ft(const SelfAffineMeasure& mu, std::span<const double> xi, double tol);
/// mu^((R^t)^{-skip} xi) for integer or rational xi: the product with the first
/// `skip` factors left out.
FTValue ft_scaled(const SelfAffineMeasure& mu, const Frequency& xi, unsigned skip, double tol);
/// Element-wise ft, evaluated in parallel. Results do not depend on the thread count.
std::vector<FTValue> ft_grid(const SelfAffineMeasure& mu, const std::vector<Frequency>& points, double tol);

struct SampleMode {
    bool exhaustive = true;
    std::uint64_t seed = 0;
    /// Number of random digit strings when not exhaustive.
    std::size_t count = 1000;
};

/// Points sum_{k=1}^{depth} R^{-k} b_k. Exhaustive output is sorted lexicographically.
std::vector<RealVec> sample_attractor(const SelfAffineMeasure& mu, unsigned depth, const SampleMode& mode);

struct ZeroSetHit {
    IntVec k;
    double modulus = 0.0;
};

struct ZeroSetEvidence {
    Frequency xi;
    std::int64_t radius = 0;
    double epsilon = 0.0;
    /// Sorted by Euclidean |k|, then lexicographically.
    std::vector<ZeroSetHit> hits;
};

/// All k in [-radius, radius]^d with |mu^(xi + k)| >= epsilon, scanned shell by shell.
ZeroSetEvidence K_set(const SelfAffineMeasure& mu, const Frequency& xi, double epsilon, std::int64_t radius, double tol);

struct Eps0Entry {
    Frequency xi;
    IntVec k;
    double modulus = 0.0;
};

struct Eps0Estimate {
    double eps0 = 0.0;
    std::vector<Eps0Entry> table;
};

/// Over the grid (Z/grid_res)^d ∩ [0,1)^d picks for each xi the translate k with the
/// largest |mu^(xi + k)| within the radius; eps0 is the smallest of these maxima.
/// A grid point where every value is below tol raises a radius-exhausted error.
Eps0Estimate estimate_eps0(const SelfAffineMeasure& mu, std::int64_t grid_res, std::int64_t radius, double tol);

struct NoDecayResult {
    std::vector<double> values;
    double spread = 0.0;
};

/// |mu^((R^t)^n k)| for n = 0..n_max.
NoDecayResult no_decay_check(const SelfAffineMeasure& mu, const IntVec& k, unsigned n_max, double tol);

/// max over pairs i < j of |mu^(p_i - p_j)|; 0 for fewer than two points.
double gram_max(const SelfAffineMeasure& mu, const std::vector<BigVec>& points, double tol);

}  // namespace spectral_forge
