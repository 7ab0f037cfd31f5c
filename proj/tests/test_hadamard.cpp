#include <doctest.h>

#include "spectral_forge/error.hpp"
#include "spectral_forge/hadamard.hpp"

using namespace spectral_forge;

namespace {
IntVectorSet V(std::vector<std::int64_t> v) { return IntVectorSet::from_scalars(v); }
const IntMatrix R4 = IntMatrix::scalar(4);
}  // namespace

TEST_CASE("validate_hadamard on one-dimensional triples") {
    auto r = validate_hadamard(R4, V({0, 2}), V({0, 1}));
    CHECK(r.is_hadamard);
    CHECK(r.defect < 1e-12);
    CHECK(r.q == 2);
    CHECK(r.det == 4);
    CHECK(r.singular);
    CHECK(validate_hadamard(R4, V({0, 2}), V({0, 5})).defect < 1e-12);
    r = validate_hadamard(R4, V({0, 2}), V({0, 2}), 1e-9, true);
    CHECK_FALSE(r.is_hadamard);
    CHECK(r.defect == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.exact_orthogonal == false);
    CHECK(validate_hadamard(R4, V({0, 2}), V({0, 1}), 1e-9, true).exact_orthogonal == true);
    CHECK_THROWS_AS(validate_hadamard(R4, V({0, 2}), V({0, 1, 2})), Error);
}

TEST_CASE("validate_hadamard in two dimensions and with cube roots") {
    const auto R = IntMatrix::from_rows({{4, 0}, {0, 2}});
    const IntVectorSet B(2, {{0, 0}, {0, 3}, {2, 0}, {2, 3}});
    const IntVectorSet L(2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    CHECK(validate_hadamard(R, B, L, 1e-9, true).is_hadamard);
    // (3, {0,1,2}, {0,1,2}) is the 3x3 Fourier matrix.
    const auto r = validate_hadamard(IntMatrix::scalar(3), V({0, 1, 2}), V({0, 1, 2}), 1e-9, true);
    CHECK(r.is_hadamard);
    CHECK(r.exact_orthogonal == true);
    CHECK_FALSE(r.singular);
}

TEST_CASE("HadamardSystem normalizes to contain zero") {
    const HadamardSystem sys(R4, V({2, 4}), V({1, 2}));
    CHECK(sys.B() == V({0, 2}));
    CHECK(sys.L() == V({0, 1}));
    CHECK(sys.digit_shift() == IntVec{2});
    CHECK(sys.freq_shift() == IntVec{1});
    try {
        HadamardSystem bad(R4, V({0, 2}), V({0, 2}));
        FAIL("accepted a non-Hadamard triple");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Precondition);
    }
}

TEST_CASE("product digit and frequency sets") {
    CHECK(product_digits(R4, V({0, 2}), 1) == V({0, 2}));
    CHECK(product_digits(R4, V({0, 2}), 2) == V({0, 2, 8, 10}));
    const auto b3 = product_digits(R4, V({0, 2}), 3);
    CHECK(b3.size() == 8);
    CHECK(b3.points().back() == IntVec{42});
    CHECK(product_freqs(R4, V({0, 1}), 1) == V({0, 1}));
    CHECK(product_freqs(R4, V({0, 1}), 2) == V({0, 1, 4, 5}));
    CHECK(product_freqs(R4, V({0, 1}), 3) == V({0, 1, 4, 5, 16, 17, 20, 21}));
}

TEST_CASE("hadamard_power") {
    const HadamardSystem sys(R4, V({0, 2}), V({0, 1}));
    const auto p2 = hadamard_power(sys, 2);
    CHECK(p2.R().matrix() == IntMatrix::scalar(16));
    CHECK(p2.B() == V({0, 2, 8, 10}));
    CHECK(p2.L() == V({0, 1, 4, 5}));
    CHECK(p2.defect() < 1e-12);
    const auto p1 = hadamard_power(sys, 1);
    CHECK(p1.B() == sys.B());
    CHECK(p1.L() == sys.L());
    const auto q2 = hadamard_power(HadamardSystem(R4, V({0, 2}), V({0, 5})), 2);
    CHECK(q2.L() == V({0, 5, 20, 25}));
}
