#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spectral_forge/hadamard.hpp"
#include "spectral_forge/measure.hpp"

namespace spectral_forge {

struct SpectrumPoint {
    BigVec lambda;
    /// First level containing the point.
    unsigned level = 1;
    /// Digit of L_{n_level} labelling the point.
    BigVec source;
    /// Integer translate k with lambda = residue + (R^t)^{m_level} k (zero for canonical spectra).
    BigVec translate;
    /// |mu^((R^t)^{-m_level} lambda)| when the constructor certified it.
    std::optional<double> certificate;
};

/// Nested finite sets Lambda_1 ⊂ Lambda_2 ⊂ ... stored as one list in
/// construction order; level k is the prefix of points with level <= k.
struct SpectrumLevels {
    HadamardSystem sys;
    std::string kind;
    std::vector<unsigned> n_seq;
    std::vector<unsigned> m_seq;
    std::vector<SpectrumPoint> points;
    /// Lacunary construction only.
    double eps0 = 0.0;
    std::optional<BigRational> base;
    /// Gram maximum computed during construction (small spectra only).
    std::optional<double> gram;

    unsigned levels() const { return static_cast<unsigned>(m_seq.size()); }
    std::size_t level_size(unsigned k) const;
    /// Level k in lexicographic order.
    std::vector<BigVec> level(unsigned k) const;
    std::vector<BigVec> all() const { return level(levels()); }
};

/// Lambda_k = L_{n_1} + (R^t)^{m_1} L_{n_2} + ... + (R^t)^{m_{k-1}} L_{n_k}.
SpectrumLevels canonical_spectrum(const HadamardSystem& sys, const std::vector<unsigned>& n_seq, unsigned K,
                                  double tol = 1e-10);

struct LevelTail {
    unsigned level = 0;
    /// |mu^((R^t)^{-m_k} lambda)| for lambda in Lambda_k (lexicographic order).
    std::vector<double> values;
    double min = 1.0;
};

struct TailCertificate {
    std::vector<LevelTail> levels;
    double min = 1.0;
};

TailCertificate tail_delta(const SelfAffineMeasure& mu, const SpectrumLevels& spec, double tol);

struct LacunarySearch {
    std::int64_t radius_step = 8;
    std::int64_t radius_max = 64;
    /// Grid and radius handed to estimate_eps0; grid 0 picks 16 per axis for d <= 2, 8 otherwise.
    std::int64_t eps_grid = 0;
    std::int64_t eps_radius = 64;
    /// Block lengths n_k; missing entries default to 1.
    std::vector<unsigned> n_seq;
};

/// b-lacunary spectrum: each new point lambda is congruent to its label modulo
/// (R^t)^{m_k} and is the smallest candidate with |lambda| >= b * (current max)
/// whose tail value |mu^((R^t)^{-m_k} lambda)| is at least eps0/2.
SpectrumLevels lacunary_spectrum(const HadamardSystem& sys, const BigRational& b, unsigned K,
                                 const LacunarySearch& search = {}, double tol = 1e-10);

/// Sorted by Euclidean norm with lexicographic tie-break.
std::vector<BigVec> sort_by_norm(std::vector<BigVec> points);

/// lambda_0 = 0, |lambda_1| >= b and |lambda_{n+1}| >= b |lambda_n|. The input must
/// be sorted by norm.
bool verify_lacunary(const std::vector<BigVec>& points, const BigRational& b);

/// Union of Lambda_gamma x {gamma} over the window, lexicographic order.
std::vector<BigVec> product_spectrum(const std::map<BigVec, std::vector<BigVec>>& base_specs,
                                     const std::vector<BigVec>& gamma_points);

/// Block lower-triangular system R = [[R1, 0], [C0, G1]] with digits (u_i, d_j(u_i))
/// and fiber lattice A Z^{d-r}.
struct QuasiProductSystem {
    IntMatrix R1;
    IntMatrix C0;
    IntMatrix G1;
    IntVectorSet base_digits;
    /// Fiber digits for each base digit, aligned with base_digits.
    std::vector<IntVectorSet> digit_table;
    std::vector<std::vector<BigRational>> fiber_lattice;

    std::size_t r() const { return R1.rows(); }
    std::size_t d() const { return R1.rows() + G1.rows(); }
    IntMatrix assembled_R() const;
    IntVectorSet assembled_B() const;
    /// Throws when a block has the wrong shape, a block is not expansive, a digit
    /// table entry is not a complete residue set modulo G1, or A is singular.
    void validate() const;
};

SelfAffineMeasure assemble_measure(const QuasiProductSystem& qps);

/// #{m in Z^dim : 2^{n-1} <= |m| < 2^n} in lexicographic order (n >= 1); {0} for n = 0.
std::vector<IntVec> norm_shell(std::size_t dim, unsigned n);

struct ShellReport {
    unsigned n = 0;
    std::size_t count = 0;
    BigRational base;
    std::vector<IntVec> fibers;
    bool disjoint = false;
    BigInt min_separation;
    bool separation_exact = false;
    BigInt template_min_gap;
    bool template_gap_ok = false;
};

struct SparsePoint {
    BigVec point;  // (lambda, m) in Lambda'
    unsigned shell = 0;
    std::size_t copy = 0;
};

struct SparseProductResult {
    std::vector<SparsePoint> points;
    /// diag(I_r, A) applied to Lambda'.
    std::vector<std::vector<BigRational>> assembled;
    std::vector<ShellReport> shells;
    std::vector<SpectrumLevels> templates;
};

struct SparseProductOptions {
    LacunarySearch search;
    /// Overrides the default base 8^{N+1} for every shell.
    std::optional<BigRational> base;
};

SparseProductResult sparse_product_spectrum(const QuasiProductSystem& qps, const HadamardSystem& sys1,
                                            unsigned K_fiber, unsigned K_base, double tol = 1e-10,
                                            const SparseProductOptions& options = {});

}  // namespace spectral_forge
