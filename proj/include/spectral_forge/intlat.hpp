#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectral_forge/numeric.hpp"

namespace spectral_forge {

/// Dense row-major integer matrix. Arithmetic is overflow-checked.
class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols);
    static IntMatrix from_rows(const std::vector<IntVec>& rows);
    static IntMatrix identity(std::size_t d);
    static IntMatrix scalar(std::int64_t value) { return from_rows({{value}}); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }
    std::int64_t operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    std::int64_t& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }

    IntMatrix transpose() const;
    IntMatrix operator*(const IntMatrix& other) const;
    IntVec apply(std::span<const std::int64_t> v) const;
    BigVec apply(std::span<const BigInt> v) const;
    IntMatrix power(unsigned n) const;
    BigInt det() const;
    std::vector<IntVec> to_rows() const;
    std::string to_string() const;

    bool operator==(const IntMatrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::int64_t> a_;
};

/// Exact solver for M x = v over the rationals, used for residue classes of
/// the lattice M·Z^d.
class LatticeSolver {
public:
    explicit LatticeSolver(const IntMatrix& m);

    std::size_t dim() const { return dim_; }
    const BigInt& det() const { return det_; }
    /// Componentwise floor of M^{-1} v.
    BigVec floor_solve(std::span<const BigInt> v) const;
    /// Representative of v + M Z^d lying in M [0,1)^d.
    BigVec residue(std::span<const BigInt> v) const;
    bool in_lattice(std::span<const BigInt> v) const;
    /// M^{-1} v when it is an integer vector.
    std::optional<BigVec> solve_integer(std::span<const BigInt> v) const;
    /// adj(M) v; M^{-1} v = adj(M) v / det.
    BigVec adjugate_apply(std::span<const BigInt> v) const;
    BigVec apply(std::span<const BigInt> v) const;

private:
    std::size_t dim_;
    std::vector<BigInt> m_;
    std::vector<BigInt> adj_;
    BigInt det_;
};

struct ExpansivenessCheck {
    bool expansive = false;
    double spectral_floor = 0.0;
};

/// True iff every eigenvalue modulus exceeds 1 + 1e-9.
ExpansivenessCheck is_expansive(const IntMatrix& m);

struct Contraction {
    double C = 1.0;
    double rho = 0.0;
};

/// Square integer matrix whose eigenvalues all have modulus > 1, with cached
/// determinant, spectral floor and contraction envelope of its inverse powers.
class ExpansiveIntMatrix {
public:
    ExpansiveIntMatrix() = default;
    explicit ExpansiveIntMatrix(IntMatrix m);

    std::size_t dim() const { return m_.rows(); }
    const IntMatrix& matrix() const { return m_; }
    const BigInt& det() const { return det_; }
    double spectral_floor() const { return floor_; }
    const Contraction& contraction() const { return contraction_; }
    ExpansiveIntMatrix transpose() const;

private:
    IntMatrix m_;
    BigInt det_;
    double floor_ = 0.0;
    Contraction contraction_;
};

/// ‖M^{-n}‖ <= C rho^n for every n >= 1. rho sits just above 1/spectral_floor;
/// C is fitted on n = 1..30 and extended to all n by submultiplicativity.
Contraction contraction_rate(const IntMatrix& m);

/// Finite set of distinct integer vectors in lexicographic order.
class IntVectorSet {
public:
    IntVectorSet() = default;
    IntVectorSet(std::size_t dim, std::vector<IntVec> points);
    static IntVectorSet from_scalars(const std::vector<std::int64_t>& values);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    const std::vector<IntVec>& points() const { return points_; }
    const IntVec& operator[](std::size_t i) const { return points_[i]; }
    bool contains(const IntVec& v) const;
    IntVectorSet translated(const IntVec& shift) const;
    std::string to_string() const;

    bool operator==(const IntVectorSet& other) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<IntVec> points_;
};

struct IntTriple {
    IntMatrix R;
    IntVectorSet B;
    IntVectorSet L;
};

/// No two points of S are congruent modulo R Z^d.
bool residue_distinct(const IntMatrix& R, const IntVectorSet& S);
/// S is a full set of representatives of Z^d / R Z^d.
bool complete_residue_set(const IntMatrix& R, const IntVectorSet& S);
/// (M R M^{-1}, M B, (M^t)^{-1} L) for unimodular M.
IntTriple conjugate_triple(const IntMatrix& M, const IntTriple& sys);
/// Representatives of L modulo R^t Z^d inside R^t [0,1)^d.
IntVectorSet reduce_L_canonical(const IntMatrix& R, const IntVectorSet& L);
/// gcd of a one-dimensional digit set.
std::int64_t gcd_digits(const IntVectorSet& B);

/// Points k of Z^d with max_i |k_i| = radius, in lexicographic order.
std::vector<IntVec> cube_shell(std::size_t d, std::int64_t radius);

std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);

}  // namespace spectral_forge
