#include <doctest.h>

#include <cstdlib>

#include "oracles.hpp"
#include "spectral_forge/error.hpp"
#include "spectral_forge/measure.hpp"

using namespace spectral_forge;

namespace {

SelfAffineMeasure mu4() { return SelfAffineMeasure(IntMatrix::scalar(4), IntVectorSet::from_scalars({0, 2})); }

Frequency rat(long p, long q = 1) { return Frequency(BigVec{BigInt(p)}, BigInt(q)); }

SelfAffineMeasure zero_product() {
    return SelfAffineMeasure(IntMatrix::from_rows({{4, 0}, {0, 2}}),
                             IntVectorSet(2, {{0, 0}, {0, 3}, {2, 0}, {2, 3}}));
}

}  // namespace

TEST_CASE("mask closed forms") {
    const auto mu = mu4();
    CHECK(mask(mu, rat(0)) == Complex(1, 0));
    CHECK(std::abs(mask(mu, rat(1, 4))) == 0.0);
    const Complex m = mask(mu, rat(1, 8));
    CHECK(m.real() == doctest::Approx(0.5));
    CHECK(m.imag() == doctest::Approx(-0.5));
    CHECK(std::abs(m) == doctest::Approx(std::sqrt(0.5)));
    const double x = 0.125;
    CHECK(std::abs(mask(mu, std::span<const double>(&x, 1)) - m) < 1e-15);
}

TEST_CASE("ft against the depth-200 product") {
    const auto mu = mu4();
    CHECK(ft(mu, rat(0), 1e-10).value == Complex(1, 0));
    for (long k : {1, 3, 5, -3}) CHECK(std::abs(ft(mu, rat(k), 1e-10).value) == 0.0);
    const auto v = ft(mu, rat(2), 1e-10);
    const auto o = oracle::ft_mu4(2.0L);
    CHECK(std::abs(std::abs(v.value) - static_cast<double>(std::abs(o))) < 1e-9);
    CHECK(std::abs(v.value - Complex(static_cast<double>(o.real()), static_cast<double>(o.imag()))) < 1e-9);
    CHECK(v.tail_bound <= 1e-10);
    CHECK(v.trunc_depth > 0);
    for (auto [p, q] : {std::pair{1L, 2L}, {1L, 3L}, {7L, 9L}, {-13L, 5L}, {1000001L, 7L}}) {
        const auto w = ft(mu, rat(p, q), 1e-12);
        const auto ow = oracle::ft_mu4(static_cast<long double>(p) / q);
        CHECK(std::abs(w.value - Complex(static_cast<double>(ow.real()), static_cast<double>(ow.imag()))) < 1e-9);
    }
    CHECK_THROWS_AS(ft(mu, rat(1), 0.0), Error);
    CHECK_THROWS_AS(ft(mu, rat(1), 1.0), Error);
}

TEST_CASE("ft in two dimensions") {
    const auto mu = zero_product();
    for (auto [x, y] : {std::pair{1.0 / 3, 0.25}, {2.5, -1.75}, {0.1, 0.7}}) {
        const double xi[2] = {x, y};
        const auto v = ft(mu, std::span<const double>(xi, 2), 1e-12).value;
        const auto o = oracle::ft_diag(4.0L, {0.0L, 2.0L}, 2.0L, {0.0L, 3.0L}, x, y);
        CHECK(std::abs(v - Complex(static_cast<double>(o.real()), static_cast<double>(o.imag()))) < 1e-9);
    }
    // Second factor is the uniform measure on [0,3]; it vanishes on 1/3 + Z.
    CHECK(std::abs(ft(mu, Frequency(BigVec{BigInt(0), BigInt(1)}, BigInt(3)), 1e-10).value) < 1e-12);
}

TEST_CASE("ft_scaled drops leading factors") {
    const auto mu = mu4();
    const auto direct = ft(mu, rat(21, 64), 1e-12).value;
    CHECK(std::abs(ft_scaled(mu, rat(21), 3, 1e-12).value - direct) < 1e-13);
    CHECK(ft_scaled(mu, rat(0), 5, 1e-10).value == Complex(1, 0));
}

TEST_CASE("ft_grid matches sequential evaluation bit for bit") {
    const auto mu = mu4();
    CHECK(ft_grid(mu, {}, 1e-10).empty());
    const auto two = ft_grid(mu, {rat(0), rat(1)}, 1e-10);
    CHECK(two[0].value == Complex(1, 0));
    CHECK(std::abs(two[1].value) == 0.0);
    std::vector<Frequency> pts;
    for (long i = 0; i < 1000; ++i) pts.push_back(rat(i * 37 - 5000, 17));
    const auto grid = ft_grid(mu, pts, 1e-10);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto s = ft(mu, pts[i], 1e-10);
        CHECK(grid[i].value == s.value);
        CHECK(grid[i].trunc_depth == s.trunc_depth);
    }
}

TEST_CASE("sample_attractor") {
    const auto mu = mu4();
    CHECK(sample_attractor(mu, 1, {}) == std::vector<RealVec>{{0.0}, {0.5}});
    CHECK(sample_attractor(mu, 2, {}) == std::vector<RealVec>{{0.0}, {0.125}, {0.5}, {0.625}});
    SampleMode random{false, 7, 50};
    CHECK(sample_attractor(mu, 10, random) == sample_attractor(mu, 10, random));
    CHECK_THROWS_AS(sample_attractor(mu, 40, {}), Error);
}

TEST_CASE("K_set") {
    const auto mu = mu4();
    auto ev = K_set(mu, rat(0), 0.5, 10, 1e-10);
    REQUIRE_FALSE(ev.hits.empty());
    CHECK(ev.hits.front().k == IntVec{0});
    CHECK(ev.hits.front().modulus == 1.0);
    ev = K_set(mu, rat(0), 0.1, 100, 1e-10);
    CHECK(ev.hits.size() >= 3);
    // Brute-force oracle over the same window.
    std::size_t expected = 0;
    for (long k = -100; k <= 100; ++k) expected += std::abs(oracle::ft_mu4(k)) >= 0.1L;
    CHECK(ev.hits.size() == expected);
    CHECK_FALSE(K_set(mu, rat(1, 2), 1e-3, 100, 1e-10).hits.empty());
}

TEST_CASE("estimate_eps0") {
    const auto mu = mu4();
    const auto e = estimate_eps0(mu, 16, 40, 1e-10);
    CHECK(e.eps0 > 0.0);
    CHECK(e.table.size() == 16);
    CHECK(estimate_eps0(mu, 1, 10, 1e-10).eps0 == 1.0);
    try {
        (void)estimate_eps0(zero_product(), 3, 10, 1e-10);
        FAIL("periodic zero not detected");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::RadiusExhausted);
        CHECK(std::string(err.what()).find("/3") != std::string::npos);
    }
}

TEST_CASE("no_decay_check") {
    const auto mu = mu4();
    const auto r = no_decay_check(mu, {2}, 8, 1e-10);
    CHECK(r.values.size() == 9);
    CHECK(r.spread < 1e-8);
    CHECK(r.values.front() == doctest::Approx(0.69262891269944549).epsilon(1e-9));
    for (double v : no_decay_check(mu, {0}, 5, 1e-10).values) CHECK(v == 1.0);
    for (double v : no_decay_check(mu, {1}, 5, 1e-10).values) CHECK(v == 0.0);
}

TEST_CASE("thread count does not change results") {
    const auto mu = mu4();
    std::vector<Frequency> pts;
    for (long i = 0; i < 300; ++i) pts.push_back(rat(i * 11 + 3, 7));
    setenv("SPECTRAL_FORGE_THREADS", "1", 1);
    const auto a = ft_grid(mu, pts, 1e-10);
    setenv("SPECTRAL_FORGE_THREADS", "8", 1);
    const auto b = ft_grid(mu, pts, 1e-10);
    unsetenv("SPECTRAL_FORGE_THREADS");
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(a[i].value == b[i].value);
}
