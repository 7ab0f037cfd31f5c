#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace spectral_forge {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

using IntVec = std::vector<std::int64_t>;
using BigVec = std::vector<BigInt>;
using RealVec = std::vector<double>;
using Complex = std::complex<double>;

BigVec to_big(std::span<const std::int64_t> v);
/// Throws an Overflow error when a coordinate does not fit in 64 bits.
IntVec to_int(std::span<const BigInt> v);
bool fits_int64(std::span<const BigInt> v);

BigVec add(std::span<const BigInt> a, std::span<const BigInt> b);
BigVec sub(std::span<const BigInt> a, std::span<const BigInt> b);
BigInt norm2(std::span<const BigInt> v);
double norm(std::span<const BigInt> v);
double to_double(const BigInt& x);
double to_double(const BigRational& x);
/// Natural logarithm of a positive big integer; accurate far beyond the double range.
double log_big(const BigInt& x);
double log_big(const BigRational& x);

BigRational make_rational(const BigInt& num, const BigInt& den);
/// Exact rational value of a finite double.
BigRational exact_rational(double x);
/// Parses "p/q", an integer, or a decimal such as "0.125" into an exact rational.
BigRational parse_rational(const std::string& text);
std::string format_rational(const BigRational& x);

BigInt floor_div(const BigInt& a, const BigInt& b);
BigInt floor_of(const BigRational& x);
BigInt ceil_of(const BigRational& x);

/// e^{2 pi i t}. Quarter turns come out exact, so character sums that cancel at
/// dyadic points cancel to 0.0 rather than to rounding noise.
Complex cis_turns(double t);

/// Round-trip formatting for CSV output ("%.17g").
std::string format_double(double x);

/// Exact rational frequency vector numerator/denominator.
class Frequency {
public:
    Frequency() = default;
    explicit Frequency(BigVec numerator, BigInt denominator = 1);
    static Frequency from_int(std::span<const std::int64_t> v);
    static Frequency from_rationals(std::span<const BigRational> v);

    std::size_t dim() const { return num_.size(); }
    const BigVec& numerator() const { return num_; }
    const BigInt& denominator() const { return den_; }
    BigRational coord(std::size_t i) const;
    std::vector<BigRational> coords() const;

    /// Componentwise floor and the remaining fractional part in [0,1)^d.
    BigVec floor() const;
    RealVec fractional() const;
    RealVec approx() const;

    Frequency operator+(const Frequency& other) const;
    Frequency operator-(const Frequency& other) const;
    Frequency operator+(std::span<const BigInt> v) const;

    std::string to_string() const;
    bool operator==(const Frequency& other) const = default;

private:
    void normalize();
    BigVec num_;
    BigInt den_{1};
};

/// Deterministic pairwise sum; the tree shape depends only on the length.
double pairwise_sum(std::span<const double> values);

}  // namespace spectral_forge
