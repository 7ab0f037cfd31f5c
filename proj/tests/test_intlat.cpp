#include <doctest.h>

#include <cmath>

#include "spectral_forge/error.hpp"
#include "spectral_forge/intlat.hpp"

using namespace spectral_forge;

namespace {

IntMatrix M(std::vector<IntVec> rows) { return IntMatrix::from_rows(rows); }
IntVectorSet S(std::size_t d, std::vector<IntVec> pts) { return IntVectorSet(d, std::move(pts)); }

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::Parse;
}

// Largest singular value of a 2x2 real matrix, closed form.
double op_norm2(double a, double b, double c, double d) {
    const double s = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    return std::sqrt((s + std::sqrt(std::max(0.0, s * s - 4 * det * det))) / 2);
}

}  // namespace

TEST_CASE("matrix arithmetic") {
    const auto a = M({{0, -2}, {1, 0}});
    CHECK(a.det() == 2);
    CHECK(a.power(2) == M({{-2, 0}, {0, -2}}));
    CHECK(a.transpose() == M({{0, 1}, {-2, 0}}));
    CHECK(M({{4}}).power(3) == M({{64}}));
    CHECK(M({{2, 1}, {0, 2}}).power(0) == IntMatrix::identity(2));
    CHECK(kind_of([] { (void)IntMatrix::scalar(1LL << 40).power(2); }) == ErrorKind::Overflow);
    CHECK(M({{1, 2, 3}, {4, 5, 6}, {7, 8, 10}}).det() == -3);
}

TEST_CASE("lattice residues") {
    const LatticeSolver s(M({{2, 1}, {0, 2}}));
    CHECK(s.det() == 4);
    const BigVec v{BigInt(5), BigInt(-3)};
    const BigVec r = s.residue(v);
    CHECK(s.in_lattice(sub(v, r)));
    CHECK(s.residue(r) == r);
    CHECK(s.solve_integer(BigVec{BigInt(3), BigInt(2)}) == BigVec{BigInt(1), BigInt(1)});
    CHECK_FALSE(s.solve_integer(BigVec{BigInt(1), BigInt(0)}));
}

TEST_CASE("is_expansive") {
    auto e = is_expansive(M({{4}}));
    CHECK(e.expansive);
    CHECK(e.spectral_floor == doctest::Approx(4.0));
    CHECK_FALSE(is_expansive(M({{1, 1}, {0, 2}})).expansive);
    e = is_expansive(M({{0, -2}, {1, 0}}));
    CHECK(e.expansive);
    CHECK(e.spectral_floor == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(kind_of([] { (void)is_expansive(M({{1, 2}})); }) == ErrorKind::Shape);
}

TEST_CASE("residue_distinct and complete_residue_set") {
    CHECK(residue_distinct(M({{4}}), IntVectorSet::from_scalars({0, 2})));
    CHECK_FALSE(residue_distinct(M({{4}}), IntVectorSet::from_scalars({0, 4})));
    CHECK(residue_distinct(M({{2, 0}, {0, 2}}), S(2, {{0, 0}, {1, 1}})));
    CHECK(complete_residue_set(M({{2}}), IntVectorSet::from_scalars({0, 1})));
    CHECK_FALSE(complete_residue_set(M({{4}}), IntVectorSet::from_scalars({0, 2})));
    CHECK(complete_residue_set(M({{2, 0}, {0, 2}}), S(2, {{0, 0}, {1, 0}, {0, 1}, {1, 1}})));
    CHECK_FALSE(complete_residue_set(M({{2, 0}, {0, 2}}), S(2, {{0, 0}, {2, 0}, {0, 1}, {1, 1}})));
}

TEST_CASE("conjugate_triple") {
    const IntTriple t{M({{4, 0}, {0, 2}}), S(2, {{0, 0}, {2, 0}}), S(2, {{0, 0}, {1, 0}})};
    const auto same = conjugate_triple(IntMatrix::identity(2), t);
    CHECK(same.R == t.R);
    CHECK(same.B == t.B);
    CHECK(same.L == t.L);
    const auto c = conjugate_triple(M({{1, 0}, {1, 1}}), t);
    CHECK(c.R == M({{4, 0}, {2, 2}}));
    CHECK(c.B == S(2, {{0, 0}, {2, 2}}));
    // (M^t)^{-1} = [[1,-1],[0,1]]
    CHECK(c.L == S(2, {{0, 0}, {1, 0}}));
    CHECK(kind_of([&] { (void)conjugate_triple(M({{2, 0}, {0, 1}}), t); }) == ErrorKind::Unimodularity);
}

TEST_CASE("reduce_L_canonical and gcd_digits") {
    CHECK(reduce_L_canonical(M({{4}}), IntVectorSet::from_scalars({0, 5})) == IntVectorSet::from_scalars({0, 1}));
    CHECK(reduce_L_canonical(M({{4}}), IntVectorSet::from_scalars({0, -1})) == IntVectorSet::from_scalars({0, 3}));
    CHECK(reduce_L_canonical(M({{2, 0}, {0, 2}}), S(2, {{0, 0}, {3, 1}})) == S(2, {{0, 0}, {1, 1}}));
    CHECK(kind_of([] { (void)reduce_L_canonical(M({{4}}), IntVectorSet::from_scalars({0, 4})); }) ==
          ErrorKind::Consistency);
    CHECK(gcd_digits(IntVectorSet::from_scalars({0, 2})) == 2);
    CHECK(gcd_digits(IntVectorSet::from_scalars({0, 2, 3})) == 1);
    CHECK(gcd_digits(IntVectorSet::from_scalars({0})) == 0);
    CHECK(kind_of([] { (void)gcd_digits(S(2, {{0, 0}})); }) == ErrorKind::Dimension);
}

TEST_CASE("contraction envelope") {
    const auto c4 = contraction_rate(M({{4}}));
    CHECK(c4.C == doctest::Approx(1.0));
    CHECK(c4.rho == doctest::Approx(0.25 * (1 + 1e-3)));
    CHECK(contraction_rate(M({{2, 0}, {0, 2}})).C == doctest::Approx(1.0));
    CHECK(kind_of([] { (void)contraction_rate(M({{1, 0}, {0, 3}})); }) == ErrorKind::Precondition);

    // Independent sweep: exact inverse powers, closed-form 2x2 operator norm.
    for (const auto& m : {M({{0, -2}, {1, 0}}), M({{2, 1}, {0, 2}}), M({{1, 1}, {-1, 2}})}) {
        const auto env = contraction_rate(m);
        IntMatrix p = IntMatrix::identity(2);
        for (unsigned n = 1; n <= 30; ++n) {
            p = p * m;
            const double det = static_cast<double>(p.det().convert_to<long double>());
            const double nrm = op_norm2(p(1, 1) / det, -p(0, 1) / det, -p(1, 0) / det, p(0, 0) / det);
            CHECK(nrm <= env.C * std::pow(env.rho, n) + 1e-12);
        }
    }
}

TEST_CASE("vector sets and shells") {
    CHECK(kind_of([] { (void)IntVectorSet::from_scalars({1, 1}); }) == ErrorKind::Parameter);
    const auto s = IntVectorSet::from_scalars({3, -1, 2});
    CHECK(s[0] == IntVec{-1});
    CHECK(s.contains({2}));
    CHECK(s.translated({1}) == IntVectorSet::from_scalars({0, 3, 4}));
    CHECK(cube_shell(1, 0).size() == 1);
    CHECK(cube_shell(2, 3).size() == 7 * 7 - 5 * 5);
    CHECK(cube_shell(3, 2).size() == 125 - 27);
    const auto sh = cube_shell(2, 1);
    CHECK(std::is_sorted(sh.begin(), sh.end()));
}
