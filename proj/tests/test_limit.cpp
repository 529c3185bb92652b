#include <catch_amalgamated.hpp>

#include "oracle.hpp"

#include <qlimit/limit.hpp>
#include <qlimit/random.hpp>

#include <cmath>
#include <vector>

using namespace qlimit;
using namespace qlimit::limit;
using algebra::standard_structure;
using algebra::squeezed_structure;
using algebra::symplectic_space;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

vec v2(double a, double b) {
    vec F(2);
    F << a, b;
    return F;
}

oracle::q to_oracle(kind k) {
    switch (k) {
    case kind::weyl_gen: return oracle::q::weyl;
    case kind::field: return oracle::q::field;
    case kind::annihilator: return oracle::q::annihilator;
    case kind::creator: return oracle::q::creator;
    case kind::number: return oracle::q::number;
    }
    return oracle::q::field;
}

quantity make(kind k, const vec& F, const algebra::complex_structure& J0) {
    switch (k) {
    case kind::weyl_gen: return quantity::weyl(F);
    case kind::field: return quantity::field(F);
    case kind::annihilator: return quantity::annihilator(F, J0);
    case kind::creator: return quantity::creator(F, J0);
    case kind::number: return quantity::number(F, J0);
    }
    return quantity::field(F);
}

const std::vector<kind> all_kinds{kind::weyl_gen, kind::field, kind::annihilator, kind::creator, kind::number};

} // namespace

TEST_CASE("commutator of a field with a field power", "[identity]") {
    const auto s = symplectic_space::standard(1);
    CHECK(commutator_fields(s, 0.7, v2(1, 2), v2(1, 2), 1).scalar == cplx(0.0));
    const auto c1 = commutator_fields(s, 0.5, v2(1, 0), v2(0, 1), 1);
    CHECK(c1.scalar == cplx(0.0, 0.5));
    CHECK(c1.power == 0);
    const auto c3 = commutator_fields(s, 0.5, v2(1, 0), v2(0, 1), 3);
    CHECK_THAT(c3.scalar.imag(), WithinRel(1.5, 1e-15));
    CHECK(c3.power == 2);
    CHECK_THROWS_AS(commutator_fields(s, 0.5, v2(1, 0), v2(0, 1), 0), qlimit::error);
}

TEST_CASE("commutator with a cube in the representation", "[identity][rep]") {
    const auto g = rep::grid::make(256, 10.0);
    const double h = 0.5;
    const auto V = rep::test_subspace(g, h, 6);
    const vec F = v2(0.4, 0.9), G = v2(-0.7, 0.3);
    const auto s = symplectic_space::standard(1);
    const rep::cmat PF = rep::field_operator(g, h, {F[0]}, {F[1]}).matrix;
    const rep::cmat PG = rep::field_operator(g, h, {G[0]}, {G[1]}).matrix;
    const rep::cmat G2V = PG * (PG * V);
    const rep::cmat lhs = PF * (PG * G2V) - PG * (PG * (PG * (PF * V)));
    const auto form = commutator_fields(s, h, F, G, 3);
    const double scale = G2V.norm();
    CHECK((lhs - form.scalar * G2V).norm() / scale < 1e-8);
}

TEST_CASE("quantized field square shift", "[identity]") {
    const auto s = symplectic_space::standard(1);
    const auto J = standard_structure();
    CHECK(quantize_field_square_shift(s, J, 0.0, v2(2, 3)) == 0.0);
    CHECK_THAT(quantize_field_square_shift(s, J, 1.0, v2(1, 0)), WithinRel(0.5, 1e-15));
    rng r(4);
    for (int i = 0; i < 20; ++i) {
        const vec F = r.normal_vector(2);
        CHECK_THAT(quantize_field_square_shift(s, J, 0.3, 2.0 * F),
                   WithinRel(4.0 * quantize_field_square_shift(s, J, 0.3, F), 1e-14));
    }
}

TEST_CASE("number quantization residual", "[number]") {
    const auto s = symplectic_space::standard(1);
    const auto J = standard_structure();
    CHECK(number_quantization_residual(s, J, J, 0.0, v2(1, 0)) == 0.0);
    CHECK_THAT(number_quantization_residual(s, J, J, 1.0, v2(1, 0)), WithinRel(1.0, 1e-15));
    const auto J0 = squeezed_structure(2.0);
    const double base = number_quantization_residual(s, J, J0, 0.1, v2(0.3, -1.2));
    for (double h : {0.2, 0.5, 1.0})
        CHECK_THAT(number_quantization_residual(s, J, J0, h, v2(0.3, -1.2)), WithinRel(base * h / 0.1, 1e-14));
}

TEST_CASE("residual examples", "[residual]") {
    const auto s = symplectic_space::standard(1);
    const auto J = standard_structure();
    // sigma(G,F) = 1 and alpha(G,G) = 1
    const vec F = v2(0, 1), G = v2(1, 0);
    const auto r = residual(s, quantity::field(F), quantity::weyl(G), condition::dirac, J, 0.2);
    CHECK_THAT(r.value, WithinRel(1.0 - std::exp(-0.05), 1e-14));
    CHECK_THAT(r.value, WithinAbs(0.048771, 1e-6));

    // sigma(F,G) = 0 so the product residual is hbar/2 |sigma(F,JG)|
    const vec X = v2(1, 0), Y = v2(2, 0);
    for (double h : {0.1, 0.01}) {
        const double v = residual_value(s, quantity::field(X), quantity::field(Y), condition::von_neumann, J, h);
        CHECK_THAT(v, WithinRel(h / 2.0 * 2.0, 1e-14));
    }
    for (kind a : all_kinds)
        for (kind b : all_kinds)
            for (auto c : {condition::dirac, condition::von_neumann})
                if (supported(a, b, c)) {
                    const auto J0 = squeezed_structure(1.5);
                    CHECK(residual_value(s, make(a, X, J0), make(b, v2(0.3, 0.8), J0), c, J, 0.0) == 0.0);
                }
}

TEST_CASE("supported table", "[residual]") {
    const auto s = symplectic_space::standard(1);
    const auto J = standard_structure();
    const auto J0 = standard_structure();
    CHECK_FALSE(supported(kind::number, kind::number, condition::von_neumann));
    CHECK_FALSE(supported(kind::number, kind::weyl_gen, condition::von_neumann));
    CHECK_FALSE(supported(kind::weyl_gen, kind::field, condition::dirac));
    CHECK(supported(kind::number, kind::number, condition::dirac));
    CHECK(supported(kind::creator, kind::annihilator, condition::von_neumann));
    try {
        residual_value(s, quantity::number(v2(1, 0), J0), quantity::number(v2(0, 1), J0), condition::von_neumann, J,
                       0.5);
        FAIL("expected a rejection");
    } catch (const qlimit::error& e) {
        CHECK(e.code() == errc::unsupported_pair);
    }
    // J0 must be present exactly for creation, annihilation and number quantities
    quantity bad = quantity::field(v2(1, 0));
    bad.J0 = J0;
    CHECK_THROWS_AS(residual_value(s, bad, quantity::weyl(v2(0, 1)), condition::dirac, J, 0.5), qlimit::error);
}

TEST_CASE("every supported residual matches the hand-derived oracle", "[residual][property]") {
    rng r(17);
    for (int n : {1, 2}) {
        const auto s = symplectic_space::standard(n);
        const auto J = standard_structure();
        for (int trial = 0; trial < 10; ++trial) {
            const vec F = r.normal_vector(2 * n), G = r.normal_vector(2 * n);
            const double l = r.uniform(0.5, 2.0);
            const auto J0 = squeezed_structure(l);
            const oracle::setting st{oracle::omega(n), oracle::squeeze_matrix(n, 1.0), oracle::squeeze_matrix(n, l)};
            for (kind a : all_kinds)
                for (kind b : all_kinds)
                    for (auto c : {condition::dirac, condition::von_neumann}) {
                        if (!supported(a, b, c)) continue;
                        for (double h : {1.0, 0.5, 1e-3}) {
                            const double got = residual_value(s, make(a, F, J0), make(b, G, J0), c, J, h);
                            const double want =
                                oracle::residual(st, to_oracle(a), F, to_oracle(b), G, c == condition::dirac, h);
                            CHECK(got >= 0.0);
                            CHECK_THAT(got, WithinAbs(want, 1e-12 * std::max(1.0, want)));
                        }
                    }
        }
    }
}

TEST_CASE("residual scans", "[scan]") {
    const auto s = symplectic_space::standard(1);
    const auto J = standard_structure();
    const vec F = v2(0.6, -1.1), G = v2(1.3, 0.4);
    const std::vector<pair_spec> one{{quantity::field(F), quantity::weyl(G), condition::dirac}};
    const auto t = residual_scan(s, one, {1.0, 0.1, 0.01}, J);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.slopes.empty());
    CHECK(t.rows[0].value > t.rows[1].value);
    CHECK(t.rows[1].value > t.rows[2].value);

    CHECK(residual_scan(s, {}, {1.0, 0.1}, J).rows.empty());
    CHECK_THROWS_AS(residual_scan(s, one, {0.1, 1.0}, J), qlimit::error);
    CHECK_THROWS_AS(residual_scan(s, one, {1.0, 0.0}, J), qlimit::error);

    const std::vector<pair_spec> basic{{quantity::field(F), quantity::weyl(G), condition::dirac},
                                       {quantity::field(F), quantity::weyl(G), condition::von_neumann},
                                       {quantity::field(F), quantity::field(G), condition::dirac},
                                       {quantity::field(F), quantity::field(G), condition::von_neumann}};
    const auto half = residual_scan(s, basic, {0.5}, J);
    REQUIRE(half.rows.size() == 4);
    const oracle::setting st{oracle::omega(1), oracle::squeeze_matrix(1, 1.0), oracle::squeeze_matrix(1, 1.0)};
    CHECK_THAT(half.rows[0].value, WithinRel(oracle::residual(st, oracle::q::field, F, oracle::q::weyl, G, true, 0.5), 1e-13));
    CHECK_THAT(half.rows[1].value,
               WithinRel(oracle::residual(st, oracle::q::field, F, oracle::q::weyl, G, false, 0.5), 1e-13));
    CHECK(half.rows[2].value == 0.0);
    CHECK_THAT(half.rows[3].value,
               WithinRel(oracle::residual(st, oracle::q::field, F, oracle::q::field, G, false, 0.5), 1e-13));

    std::vector<double> hb;
    for (int i = 0; i < 5; ++i) hb.push_back(std::pow(10.0, -1.0 - 0.5 * i));
    const auto full = residual_scan(s, basic, hb, J);
    REQUIRE(full.slopes.size() == 4);
    for (const auto& f : full.slopes) {
        if (f.identically_zero) {
            CHECK(f.pair_index == 2);
            continue;
        }
        REQUIRE(f.defined);
        CHECK(f.slope >= 0.95);
        CHECK(f.slope <= 1.05);
    }
}

TEST_CASE("quantizing a field through its generator limit reproduces the field", "[identity][rep]") {
    const auto g = rep::grid::make(256, 10.0);
    const auto s = symplectic_space::standard(1);
    const auto J = standard_structure();
    for (double h : {1.0, 0.5, 0.1}) {
        const auto V = rep::test_subspace(g, h, 8);
        const vec F = v2(0.5, -0.8);
        std::vector<rep::cmat> levels;
        for (double t : rep::limit_steps) {
            const rep::cmat W = rep::rep_weyl(g, h, {t * F[0]}, {t * F[1]}).matrix * V;
            const double c = algebra::quantization_factor(s, J, h, vec(t * F));
            levels.push_back(cplx(0.0, -1.0) * (c * W - V) / t);
        }
        const auto ex = rep::richardson(levels);
        const rep::cmat direct = rep::field_operator(g, h, {F[0]}, {F[1]}).matrix * V;
        CHECK((ex.value - direct).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("represented residuals agree with the closed forms", "[residual][rep][property]") {
    const auto g = rep::grid::make(256, 10.0);
    const auto s = symplectic_space::standard(1);
    const auto J = standard_structure();
    const auto J0 = squeezed_structure(1.3);
    const vec F = v2(0.7, -0.4), G = v2(-0.5, 0.9);
    for (double h : {1.0, 0.5, 0.1}) {
        const auto V = rep::test_subspace(g, h, 8);
        const double bound = rep::discretization_bound(g, h, V);
        for (kind a : all_kinds)
            for (kind b : all_kinds)
                for (auto c : {condition::dirac, condition::von_neumann}) {
                    if (!supported(a, b, c)) continue;
                    const auto A = make(a, F, J0), B = make(b, G, J0);
                    const double sym = residual_value(s, A, B, c, J, h);
                    const auto rep = represented_residual(s, g, A, B, c, J, h, V);
                    INFO(kind_name(a) << "-" << kind_name(b) << " " << condition_name(c) << " hbar " << h);
                    CHECK(std::abs(rep.value - sym) <= bound + rep.extrapolation + 1e-12);
                }
    }
}

TEST_CASE("number-number Dirac residual cancels exactly", "[limit]") {
    const auto J = standard_structure();
    rng r(31);
    for (int n : {1, 2, 3})
        for (int i = 0; i < 50; ++i) {
            const auto s = symplectic_space::standard(n);
            const auto J0 = squeezed_structure(r.uniform(0.5, 2.0));
            const vec F = r.normal_vector(2 * n), G = r.normal_vector(2 * n);
            const auto A = quantity::number(F, J0), B = quantity::number(G, J0);
            CHECK(residual_value(s, A, B, condition::dirac, J, 1e-3) == 0.0);
            CHECK(residual_value(s, A, B, condition::dirac, J, 1.0) == 0.0);
        }
    CHECK(settle(1e-3, 1.0) == 1e-3);
    CHECK(settle(1e-17, 1.0) == 0.0);
}
