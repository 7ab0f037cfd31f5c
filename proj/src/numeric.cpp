#include "spectral_forge/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "spectral_forge/error.hpp"

namespace spectral_forge {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Shape: return "shape";
        case ErrorKind::Dimension: return "dimension";
        case ErrorKind::Unimodularity: return "unimodularity";
        case ErrorKind::Cardinality: return "cardinality";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::Parameter: return "parameter";
        case ErrorKind::Overflow: return "overflow";
        case ErrorKind::Consistency: return "consistency";
        case ErrorKind::RadiusExhausted: return "radius-exhausted";
        case ErrorKind::SearchExhausted: return "search-exhausted";
        case ErrorKind::Ordering: return "ordering";
        case ErrorKind::Mapping: return "mapping";
        case ErrorKind::Construction: return "construction";
        case ErrorKind::Budget: return "budget";
        case ErrorKind::Parse: return "parse";
    }
    return "unknown";
}

BigVec to_big(std::span<const std::int64_t> v) { return BigVec(v.begin(), v.end()); }

bool fits_int64(std::span<const BigInt> v) {
    static const BigInt lo = std::numeric_limits<std::int64_t>::min();
    static const BigInt hi = std::numeric_limits<std::int64_t>::max();
    return std::all_of(v.begin(), v.end(), [](const BigInt& x) { return x >= lo && x <= hi; });
}

IntVec to_int(std::span<const BigInt> v) {
    if (!fits_int64(v)) fail(ErrorKind::Overflow, "integer vector does not fit in 64 bits");
    IntVec out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(x.convert_to<std::int64_t>());
    return out;
}

BigVec add(std::span<const BigInt> a, std::span<const BigInt> b) {
    if (a.size() != b.size()) fail(ErrorKind::Shape, "vector dimensions differ");
    BigVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

BigVec sub(std::span<const BigInt> a, std::span<const BigInt> b) {
    if (a.size() != b.size()) fail(ErrorKind::Shape, "vector dimensions differ");
    BigVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

BigInt norm2(std::span<const BigInt> v) {
    BigInt s = 0;
    for (const auto& x : v) s += x * x;
    return s;
}

double to_double(const BigInt& x) { return x.convert_to<double>(); }

double to_double(const BigRational& x) {
    const BigInt num = boost::multiprecision::numerator(x);
    const BigInt den = boost::multiprecision::denominator(x);
    if (num == 0) return 0.0;
    const BigInt a = abs(num);
    // Scale so the integer quotient carries ~64 significant bits; dyadic values stay exact.
    const long shift = 64 - (static_cast<long>(boost::multiprecision::msb(a)) - static_cast<long>(boost::multiprecision::msb(den)));
    const BigInt q = shift >= 0 ? BigInt((a << shift) / den) : BigInt((a >> -shift) / den);
    const double mag = std::ldexp(q.convert_to<double>(), static_cast<int>(-shift));
    return num < 0 ? -mag : mag;
}

double log_big(const BigInt& x) {
    if (x <= 0) fail(ErrorKind::Parameter, "logarithm of a non-positive integer");
    const auto bits = boost::multiprecision::msb(x);
    if (bits < 1000) return std::log(x.convert_to<double>());
    const auto shift = bits - 60;
    const BigInt top = x >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::numbers::ln2;
}

double log_big(const BigRational& x) {
    return log_big(BigInt(boost::multiprecision::numerator(x))) -
           log_big(BigInt(boost::multiprecision::denominator(x)));
}

double norm(std::span<const BigInt> v) {
    const BigInt n2 = norm2(v);
    if (n2 == 0) return 0.0;
    return std::exp(0.5 * log_big(n2));
}

BigRational make_rational(const BigInt& num, const BigInt& den) {
    if (den == 0) fail(ErrorKind::Parameter, "zero denominator");
    return BigRational(num) / BigRational(den);
}

BigRational exact_rational(double x) {
    if (!std::isfinite(x)) fail(ErrorKind::Parameter, "non-finite value");
    if (x == 0.0) return BigRational(0);
    int exp = 0;
    const double mant = std::frexp(x, &exp);
    // mant * 2^53 is an integer for every finite double.
    const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
    exp -= 53;
    BigRational r(scaled);
    if (exp >= 0) {
        r *= BigRational(BigInt(1) << exp);
    } else {
        r /= BigRational(BigInt(1) << (-exp));
    }
    return r;
}

BigRational parse_rational(const std::string& raw) {
    std::string text;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
    if (text.empty()) fail(ErrorKind::Parse, "empty rational");
    try {
        if (auto slash = text.find('/'); slash != std::string::npos) {
            const BigInt p(text.substr(0, slash));
            const BigInt q(text.substr(slash + 1));
            if (q == 0) fail(ErrorKind::Parse, "zero denominator in '" + raw + "'");
            return make_rational(p, q);
        }
        std::string mantissa = text;
        long exponent = 0;
        if (auto e = text.find_first_of("eE"); e != std::string::npos) {
            mantissa = text.substr(0, e);
            exponent = std::stol(text.substr(e + 1));
        }
        bool negative = false;
        if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
            negative = mantissa[0] == '-';
            mantissa.erase(0, 1);
        }
        std::string digits;
        long frac_digits = 0;
        if (auto dot = mantissa.find('.'); dot != std::string::npos) {
            digits = mantissa.substr(0, dot) + mantissa.substr(dot + 1);
            frac_digits = static_cast<long>(mantissa.size() - dot - 1);
        } else {
            digits = mantissa;
        }
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            fail(ErrorKind::Parse, "malformed number '" + raw + "'");
        BigRational value{BigInt(digits)};
        const long shift = exponent - frac_digits;
        const BigInt ten_pow = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(shift)));
        if (shift >= 0) value *= BigRational(ten_pow);
        else value /= BigRational(ten_pow);
        return negative ? BigRational(-value) : value;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail(ErrorKind::Parse, "malformed number '" + raw + "'");
    }
}

std::string format_rational(const BigRational& x) {
    const BigInt num = boost::multiprecision::numerator(x);
    const BigInt den = boost::multiprecision::denominator(x);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
    if (b == 0) fail(ErrorKind::Parameter, "division by zero");
    BigInt q, r;
    boost::multiprecision::divide_qr(a, b, q, r);
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

BigInt floor_of(const BigRational& x) {
    return floor_div(BigInt(boost::multiprecision::numerator(x)), BigInt(boost::multiprecision::denominator(x)));
}

BigInt ceil_of(const BigRational& x) { return -floor_of(BigRational(-x)); }

Complex cis_turns(double t) {
    double r = t - std::nearbyint(t);  // r in [-1/2, 1/2]
    if (r == 0.0) return {1.0, 0.0};
    if (r == 0.5 || r == -0.5) return {-1.0, 0.0};
    if (r == 0.25) return {0.0, 1.0};
    if (r == -0.25) return {0.0, -1.0};
    const double angle = 2.0 * std::numbers::pi * r;
    return {std::cos(angle), std::sin(angle)};
}

std::string format_double(double x) {
    if (x == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Frequency::Frequency(BigVec numerator, BigInt denominator) : num_(std::move(numerator)), den_(std::move(denominator)) {
    if (den_ == 0) fail(ErrorKind::Parameter, "zero denominator");
    normalize();
}

Frequency Frequency::from_int(std::span<const std::int64_t> v) { return Frequency(to_big(v), 1); }

Frequency Frequency::from_rationals(std::span<const BigRational> v) {
    BigInt den = 1;
    for (const auto& x : v) den = boost::multiprecision::lcm(den, BigInt(boost::multiprecision::denominator(x)));
    BigVec num;
    num.reserve(v.size());
    for (const auto& x : v)
        num.push_back(BigInt(boost::multiprecision::numerator(x)) * (den / BigInt(boost::multiprecision::denominator(x))));
    return Frequency(std::move(num), den);
}

void Frequency::normalize() {
    if (den_ < 0) {
        den_ = -den_;
        for (auto& x : num_) x = -x;
    }
    BigInt g = den_;
    for (const auto& x : num_) {
        if (g == 1) break;
        g = boost::multiprecision::gcd(g, x);
    }
    if (g > 1) {
        den_ /= g;
        for (auto& x : num_) x /= g;
    }
}

BigRational Frequency::coord(std::size_t i) const { return make_rational(num_.at(i), den_); }

std::vector<BigRational> Frequency::coords() const {
    std::vector<BigRational> out;
    out.reserve(num_.size());
    for (std::size_t i = 0; i < num_.size(); ++i) out.push_back(coord(i));
    return out;
}

BigVec Frequency::floor() const {
    BigVec out;
    out.reserve(num_.size());
    for (const auto& x : num_) out.push_back(floor_div(x, den_));
    return out;
}

RealVec Frequency::fractional() const {
    RealVec out;
    out.reserve(num_.size());
    for (const auto& x : num_) {
        const BigInt rem = x - floor_div(x, den_) * den_;
        out.push_back(to_double(make_rational(rem, den_)));
    }
    return out;
}

RealVec Frequency::approx() const {
    RealVec out;
    out.reserve(num_.size());
    for (std::size_t i = 0; i < num_.size(); ++i) out.push_back(to_double(coord(i)));
    return out;
}

Frequency Frequency::operator+(const Frequency& other) const {
    if (dim() != other.dim()) fail(ErrorKind::Shape, "frequency dimensions differ");
    const BigInt den = boost::multiprecision::lcm(den_, other.den_);
    BigVec num(dim());
    for (std::size_t i = 0; i < dim(); ++i) num[i] = num_[i] * (den / den_) + other.num_[i] * (den / other.den_);
    return Frequency(std::move(num), den);
}

Frequency Frequency::operator-(const Frequency& other) const {
    Frequency neg = other;
    for (auto& x : neg.num_) x = -x;
    return *this + neg;
}

Frequency Frequency::operator+(std::span<const BigInt> v) const {
    if (dim() != v.size()) fail(ErrorKind::Shape, "frequency dimensions differ");
    BigVec num = num_;
    for (std::size_t i = 0; i < dim(); ++i) num[i] += v[i] * den_;
    return Frequency(std::move(num), den_);
}

std::string Frequency::to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < dim(); ++i) {
        if (i) out += ", ";
        out += format_rational(coord(i));
    }
    return out + ")";
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace spectral_forge
