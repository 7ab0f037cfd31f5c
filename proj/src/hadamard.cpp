#include "spectral_forge/hadamard.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spectral_forge/error.hpp"

namespace spectral_forge {

namespace {

using Poly = std::vector<BigInt>;  // coefficients, lowest degree first

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

// Remainder of p modulo a monic polynomial m.
Poly poly_mod(Poly p, const Poly& m) {
    trim(p);
    const std::size_t dm = m.size() - 1;
    while (p.size() > dm) {
        const BigInt lead = p.back();
        const std::size_t shift = p.size() - 1 - dm;
        for (std::size_t i = 0; i <= dm; ++i) p[shift + i] -= lead * m[i];
        trim(p);
    }
    return p;
}

Poly poly_div_exact(Poly p, const Poly& m) {
    trim(p);
    const std::size_t dm = m.size() - 1;
    if (p.size() <= dm) return {};
    Poly q(p.size() - dm, BigInt(0));
    while (p.size() > dm) {
        const BigInt lead = p.back();
        const std::size_t shift = p.size() - 1 - dm;
        q[shift] = lead;
        for (std::size_t i = 0; i <= dm; ++i) p[shift + i] -= lead * m[i];
        trim(p);
    }
    return q;
}

Poly cyclotomic(std::uint64_t n, std::map<std::uint64_t, Poly>& cache) {
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    Poly p(n + 1, BigInt(0));
    p[0] = -1;
    p[n] = 1;
    for (std::uint64_t d = 1; d < n; ++d)
        if (n % d == 0) p = poly_div_exact(p, cyclotomic(d, cache));
    cache[n] = p;
    return p;
}

// Exponents k with <R^{-1} b, l> = k / |det R| mod 1.
std::int64_t phase_numerator(const LatticeSolver& solver, const IntVec& b, const IntVec& l, const BigInt& modulus) {
    const BigVec x = solver.adjugate_apply(to_big(b));  // R^{-1} b = x / det
    BigInt s = 0;
    for (std::size_t i = 0; i < l.size(); ++i) s += x[i] * l[i];
    if (solver.det() < 0) s = -s;
    BigInt r = s % modulus;
    if (r < 0) r += modulus;
    return r.convert_to<std::int64_t>();
}

}  // namespace

HadamardReport validate_hadamard(const IntMatrix& R, const IntVectorSet& B, const IntVectorSet& L, double tol, bool exact) {
    if (!R.is_square()) fail(ErrorKind::Shape, "R must be square");
    if (B.dim() != R.rows() || L.dim() != R.rows()) fail(ErrorKind::Shape, "digit or frequency dimension differs from R");
    if (B.size() != L.size())
        fail(ErrorKind::Cardinality,
             "#B = " + std::to_string(B.size()) + " but #L = " + std::to_string(L.size()));
    if (B.empty()) fail(ErrorKind::Cardinality, "empty digit set");
    HadamardReport report;
    report.q = B.size();
    report.det = R.det();
    if (report.det == 0) fail(ErrorKind::Precondition, "R is singular");
    const BigInt modulus = abs(report.det);
    if (modulus > BigInt(std::int64_t{1} << 40)) fail(ErrorKind::Overflow, "|det R| too large for phase arithmetic");
    report.singular = BigInt(B.size()) < modulus;
    report.residue_distinct = residue_distinct(R, B);

    const LatticeSolver solver(R);
    const std::size_t q = B.size();
    const std::int64_t D = modulus.convert_to<std::int64_t>();
    std::vector<std::int64_t> phase(q * q);
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j) phase[i * q + j] = phase_numerator(solver, B[i], L[j], modulus);

    // (H*H)_{jk} = (1/q) sum_b exp(-2 pi i <R^{-1} b, l_k - l_j>); the exponent
    // difference is reduced exactly before it is turned into a float.
    double defect = 0.0;
    bool exact_ok = true;
    std::map<std::uint64_t, Poly> cache;
    const Poly phi = exact ? cyclotomic(static_cast<std::uint64_t>(D), cache) : Poly{};
    for (std::size_t j = 0; j < q; ++j)
        for (std::size_t k = 0; k < q; ++k) {
            Complex s = 0.0;
            Poly char_sum;
            if (exact && j != k) char_sum.assign(static_cast<std::size_t>(D), BigInt(0));
            for (std::size_t i = 0; i < q; ++i) {
                std::int64_t e = (phase[i * q + k] - phase[i * q + j]) % D;
                if (e < 0) e += D;
                s += cis_turns(-static_cast<double>(e) / static_cast<double>(D));
                if (exact && j != k) char_sum[static_cast<std::size_t>((D - e) % D)] += 1;
            }
            s /= static_cast<double>(q);
            const double target = j == k ? 1.0 : 0.0;
            defect = std::max(defect, std::abs(s - target));
            if (exact && j != k && !poly_mod(char_sum, phi).empty()) exact_ok = false;
        }
    report.defect = defect;
    report.is_hadamard = defect < tol;
    if (exact) report.exact_orthogonal = exact_ok;
    return report;
}

HadamardSystem::HadamardSystem(const IntMatrix& R, const IntVectorSet& B, const IntVectorSet& L, double tol)
    : R_(R) {
    if (B.size() != L.size())
        fail(ErrorKind::Cardinality,
             "#B = " + std::to_string(B.size()) + " but #L = " + std::to_string(L.size()));
    if (B.empty()) fail(ErrorKind::Cardinality, "empty digit set");
    const IntVec zero(R.rows(), 0);
    digit_shift_ = B.contains(zero) ? zero : B[0];
    freq_shift_ = L.contains(zero) ? zero : L[0];
    IntVec neg_b(zero.size()), neg_l(zero.size());
    for (std::size_t i = 0; i < zero.size(); ++i) {
        neg_b[i] = -digit_shift_[i];
        neg_l[i] = -freq_shift_[i];
    }
    B_ = B.translated(neg_b);
    L_ = L.translated(neg_l);
    const auto report = validate_hadamard(R, B_, L_, tol);
    if (!report.residue_distinct) fail(ErrorKind::Precondition, "digits " + B.to_string() + " are not distinct modulo R");
    if (!report.is_hadamard)
        fail(ErrorKind::Precondition, "not a Hadamard triple (defect " + format_double(report.defect) + ")");
    defect_ = report.defect;
    singular_ = report.singular;
}

namespace {

IntVectorSet iterate_sums(const IntMatrix& M, const IntVectorSet& S, unsigned n, const char* what) {
    if (n < 1) fail(ErrorKind::Parameter, "level count must be at least 1");
    if (M.rows() != S.dim()) fail(ErrorKind::Shape, "matrix and vector set dimensions differ");
    std::vector<IntVec> current = S.points();
    for (unsigned level = 1; level < n; ++level) {
        std::vector<IntVec> next;
        next.reserve(current.size() * S.size());
        for (const auto& s : S.points())
            for (const auto& c : current) {
                IntVec v = M.apply(c);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] = checked_add(v[i], s[i]);
                next.push_back(std::move(v));
            }
        current = std::move(next);
    }
    std::sort(current.begin(), current.end());
    if (std::adjacent_find(current.begin(), current.end()) != current.end())
        fail(ErrorKind::Consistency, std::string(what) + " sums collide; the set is not distinct modulo the matrix");
    return IntVectorSet(S.dim(), std::move(current));
}

}  // namespace

IntVectorSet product_digits(const IntMatrix& R, const IntVectorSet& B, unsigned n) {
    return iterate_sums(R, B, n, "digit");
}

IntVectorSet product_freqs(const IntMatrix& R, const IntVectorSet& L, unsigned n) {
    return iterate_sums(R.transpose(), L, n, "frequency");
}

HadamardSystem hadamard_power(const HadamardSystem& sys, unsigned n) {
    if (n == 1) return sys;
    const IntMatrix Rn = sys.R().matrix().power(n);
    const IntVectorSet Bn = product_digits(sys.R().matrix(), sys.B(), n);
    const IntVectorSet Ln = product_freqs(sys.R().matrix(), sys.L(), n);
    const auto report = validate_hadamard(Rn, Bn, Ln);
    if (!report.is_hadamard)
        fail(ErrorKind::Consistency, "iterated triple failed revalidation (defect " + format_double(report.defect) + ")");
    return HadamardSystem(Rn, Bn, Ln);
}

}  // namespace spectral_forge
