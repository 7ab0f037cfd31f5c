#pragma once

#include <optional>

#include "spectral_forge/intlat.hpp"

namespace spectral_forge {

struct HadamardReport {
    bool is_hadamard = false;
    /// max |H*H - I| over all entries.
    double defect = 0.0;
    std::size_t q = 0;
    BigInt det;
    /// #B < |det R|: the measure is singular.
    bool singular = false;
    bool residue_distinct = false;
    /// Filled in exact mode: every off-diagonal character sum vanishes as an
    /// element of the cyclotomic field.
    std::optional<bool> exact_orthogonal;
};

/// Unitarity check of (1/sqrt q)[exp(-2 pi i <R^{-1} b, l>)].
HadamardReport validate_hadamard(const IntMatrix& R, const IntVectorSet& B, const IntVectorSet& L, double tol = 1e-9,
                                 bool exact = false);

/// A validated Hadamard triple, translated so that 0 lies in both B and L.
class HadamardSystem {
public:
    HadamardSystem() = default;
    HadamardSystem(const IntMatrix& R, const IntVectorSet& B, const IntVectorSet& L, double tol = 1e-9);

    std::size_t dim() const { return R_.dim(); }
    const ExpansiveIntMatrix& R() const { return R_; }
    const IntVectorSet& B() const { return B_; }
    const IntVectorSet& L() const { return L_; }
    std::size_t q() const { return B_.size(); }
    double defect() const { return defect_; }
    bool singular() const { return singular_; }
    /// Translations applied at construction (input = stored + shift).
    const IntVec& digit_shift() const { return digit_shift_; }
    const IntVec& freq_shift() const { return freq_shift_; }
    IntTriple triple() const { return {R_.matrix(), B_, L_}; }

private:
    ExpansiveIntMatrix R_;
    IntVectorSet B_;
    IntVectorSet L_;
    double defect_ = 0.0;
    bool singular_ = false;
    IntVec digit_shift_;
    IntVec freq_shift_;
};

/// B + R B + ... + R^{n-1} B.
IntVectorSet product_digits(const IntMatrix& R, const IntVectorSet& B, unsigned n);
/// L + R^t L + ... + (R^t)^{n-1} L.
IntVectorSet product_freqs(const IntMatrix& R, const IntVectorSet& L, unsigned n);
/// (R^n, B_n, L_n), revalidated.
HadamardSystem hadamard_power(const HadamardSystem& sys, unsigned n);

}  // namespace spectral_forge
