// Vector-field layer tests: bracket properties on random point fields,
// prolongation goldens and linearity, symmetry residuals for the classical
// heat equation, agreement of the reduced determining identity with the
// prolongation route on fully generic data, and jet-monomial splitting.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <lieheat/fields.hpp>

#include <random>

using namespace lieheat;

namespace {

/// Random polynomial in (t, x, u) with small integer coefficients: safe as a
/// point-field component (no denominators that could vanish identically).
ExprPtr random_component(const SymbolTable& tab, std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 4);
    switch (pick(rng)) {
    case 0: return num(std::uniform_int_distribution<long>(-4, 4)(rng));
    case 1: {
        const char* names[] = {"t", "x", "u"};
        return sym(tab, names[std::uniform_int_distribution<int>(0, 2)(rng)]);
    }
    case 2: return random_component(tab, rng, depth - 1) + random_component(tab, rng, depth - 1);
    case 3: return random_component(tab, rng, depth - 1) * random_component(tab, rng, depth - 1);
    default: return pow(random_component(tab, rng, depth - 1), 2);
    }
}

VectorField random_field(const SymbolTable& tab, std::mt19937_64& rng) {
    return {random_component(tab, rng, 2), random_component(tab, rng, 2),
            random_component(tab, rng, 2)};
}

SymbolTable plain_table() {
    SymbolTable tab;
    declare_heat_vars(tab);
    tab.freeze();
    return tab;
}

} // namespace

TEST_CASE("bracket: antisymmetry and Jacobi on random point fields") {
    SymbolTable tab = plain_table();
    std::mt19937_64 rng(101);
    for (int i = 0; i < 200; ++i) {
        VectorField P = random_field(tab, rng);
        VectorField Q = random_field(tab, rng);
        VectorField pq = commutator(P, Q, tab);
        VectorField qp = commutator(Q, P, tab);
        CHECK(field_is_zero(field_add(pq, qp), tab));
    }
    for (int i = 0; i < 60; ++i) {
        VectorField P = random_field(tab, rng);
        VectorField Q = random_field(tab, rng);
        VectorField R = random_field(tab, rng);
        VectorField j = field_add(
            commutator(P, commutator(Q, R, tab), tab),
            field_add(commutator(Q, commutator(R, P, tab), tab),
                      commutator(R, commutator(P, Q, tab), tab)));
        CHECK(field_is_zero(j, tab));
    }
}

TEST_CASE("bracket goldens") {
    SymbolTable tab = plain_table();
    ExprPtr t = sym(tab, "t"), x = sym(tab, "x");
    VectorField ddx{num(0), num(1), num(0)};
    VectorField xddx{num(0), x, num(0)};
    VectorField scale{num(2) * t, x, num(0)};
    VectorField galilei{num(0), t, num(0)};

    VectorField c1 = commutator(ddx, xddx, tab);
    CHECK(is_zero(c1.xi - num(1), tab));
    CHECK(is_zero(c1.tau, tab));
    CHECK(is_zero(c1.eta, tab));

    VectorField c2 = commutator(scale, galilei, tab);
    CHECK(is_zero(c2.xi - t, tab));
    CHECK(is_zero(c2.tau, tab));

    // jets in components are rejected
    VectorField bad{sym(tab, "u_x"), num(0), num(0)};
    CHECK_THROWS_AS(commutator(bad, ddx, tab), KernelError);
}

TEST_CASE("prolongation coefficients: goldens and linearity") {
    SymbolTable tab = plain_table();
    ExprPtr t = sym(tab, "t"), x = sym(tab, "x");
    ExprPtr u_t = sym(tab, "u_t"), u_x = sym(tab, "u_x"), u_xx = sym(tab, "u_xx");

    Prolongation pr = prolong2(VectorField{num(2) * t, x, num(0)}, tab);
    CHECK(is_zero(pr.phi_t + num(2) * u_t, tab));
    CHECK(is_zero(pr.phi_x + u_x, tab));
    CHECK(is_zero(pr.phi_xx + num(2) * u_xx, tab));

    // eta = u gives the identity scaling of all jets
    Prolongation pu = prolong2(VectorField{num(0), num(0), sym(tab, "u")}, tab);
    CHECK(is_zero(pu.phi_t - u_t, tab));
    CHECK(is_zero(pu.phi_x - u_x, tab));
    CHECK(is_zero(pu.phi_xx - u_xx, tab));

    std::mt19937_64 rng(103);
    for (int i = 0; i < 100; ++i) {
        VectorField P = random_field(tab, rng);
        VectorField Q = random_field(tab, rng);
        Prolongation pp = prolong2(P, tab), pq = prolong2(Q, tab),
                     ps = prolong2(field_add(P, Q), tab);
        CHECK(is_zero(ps.phi_t - pp.phi_t - pq.phi_t, tab));
        CHECK(is_zero(ps.phi_x - pp.phi_x - pq.phi_x, tab));
        CHECK(is_zero(ps.phi_xx - pp.phi_xx - pq.phi_xx, tab));
    }
}

TEST_CASE("classical heat equation: its point symmetries pass, others fail") {
    SymbolTable tab;
    declare_heat_vars(tab);
    tab.declare_atom("g", 2);
    {
        // the superposition carrier g solves the equation itself: g_t = g_xx
        ExprPtr t = sym(tab.id("t")), x = sym(tab.id("x"));
        tab.add_rule({"g", {1, 0}, atom("g", {t, x}, {0, 2}), {tab.id("t"), tab.id("x")}});
    }
    tab.freeze();
    ExprPtr t = sym(tab, "t"), x = sym(tab, "x"), u = sym(tab, "u");
    ExprPtr F = num(0);

    std::vector<VectorField> symmetries = {
        {num(1), num(0), num(0)},                                        // time shift
        {num(0), num(1), num(0)},                                        // space shift
        {num(0), num(0), u},                                             // linearity scaling
        {num(2) * t, x, num(0)},                                         // dilation
        {num(0), num(2) * t, -x * u},                                    // Galilei boost
        {num(4) * t * t, num(4) * t * x, -(x * x + num(2) * t) * u},     // projective
        {num(0), num(0), atom("g", {t, x})},                             // superposition
    };
    for (const VectorField& q : symmetries) {
        INFO("field: ", to_string(q.tau, tab), " | ", to_string(q.xi, tab), " | ",
             to_string(q.eta, tab));
        CHECK(is_zero(invariance_residual(q, F, tab), tab));
    }

    CHECK_FALSE(is_zero(invariance_residual(VectorField{x, num(0), num(0)}, F, tab), tab));
    CHECK_FALSE(is_zero(invariance_residual(VectorField{num(0), num(0), u * u}, F, tab), tab));
    // dropping the side condition on g breaks superposition: u itself works
    // as eta only because u_t = u_xx on solutions
    CHECK_FALSE(is_zero(invariance_residual(VectorField{num(0), num(0), t * x}, F, tab), tab));
}

TEST_CASE("reduced determining identity agrees with the prolongation route on generic data") {
    SymbolTable tab;
    declare_heat_vars(tab);
    tab.declare_atom("a", 1);
    tab.declare_atom("b", 1);
    tab.declare_atom("f", 3);
    tab.declare_atom("F0", 4);
    tab.freeze();
    ExprPtr t = sym(tab, "t"), x = sym(tab, "x"), u = sym(tab, "u"), u_x = sym(tab, "u_x");

    ExprPtr a = atom("a", {t});
    ExprPtr b = atom("b", {t});
    ExprPtr f = atom("f", {t, x, u});
    ExprPtr F = atom("F0", {t, x, u, u_x});

    VectorField q{num(2) * a, atom("a", {t}, {1}) * x + b, f};
    ExprPtr via_prolongation = invariance_residual(q, F, tab);
    ExprPtr via_identity = determining_residual(a, b, f, F, tab);

    // the two routes are coded independently; they must agree identically
    CHECK(is_zero(via_prolongation - via_identity, tab));
    // and neither contains third-order jets for fields of this class
    CHECK(is_zero(diff(via_prolongation, tab.id("u_xxx"), tab), tab));
    CHECK(is_zero(diff(via_identity, tab.id("u_xxx"), tab), tab));
}

TEST_CASE("generic ansatz: the residual pins the time coefficient to t alone") {
    SymbolTable tab;
    declare_heat_vars(tab);
    tab.declare_atom("tau", 3);
    tab.declare_atom("xi", 3);
    tab.declare_atom("eta", 3);
    tab.declare_atom("F0", 4);
    tab.freeze();
    ExprPtr t = sym(tab, "t"), x = sym(tab, "x"), u = sym(tab, "u"), u_x = sym(tab, "u_x");

    VectorField q{atom("tau", {t, x, u}), atom("xi", {t, x, u}), atom("eta", {t, x, u})};
    ExprPtr F = atom("F0", {t, x, u, u_x});
    ExprPtr R = invariance_residual(q, F, tab);

    // Coefficient of u_xxx is 2*D_x(tau) = 2*(tau_x + u_x tau_u): the
    // top-order part of the determining system forces tau_x = tau_u = 0.
    ExprPtr c3 = diff(R, tab.id("u_xxx"), tab);
    ExprPtr tau_x = atom("tau", {t, x, u}, {0, 1, 0});
    ExprPtr tau_u = atom("tau", {t, x, u}, {0, 0, 1});
    CHECK(is_zero(c3 - num(2) * (tau_x + u_x * tau_u), tab));

    auto split = split_by_jet_monomials(R, tab);
    ExprPtr key_uxxx = sym(tab, "u_xxx");
    ExprPtr key_uxxx_ux = normalize(sym(tab, "u_xxx") * u_x, tab);
    REQUIRE(split.count(key_uxxx));
    REQUIRE(split.count(key_uxxx_ux));
    CHECK(is_zero(split.at(key_uxxx) - num(2) * tau_x, tab));
    CHECK(is_zero(split.at(key_uxxx_ux) - num(2) * tau_u, tab));
}

TEST_CASE("splitting by jet monomials reconstructs and separates shapes") {
    SymbolTable tab;
    declare_heat_vars(tab);
    tab.declare_atom("A", 2);
    tab.declare_atom("B", 2);
    tab.declare_atom("C", 2);
    tab.freeze();
    ExprPtr t = sym(tab, "t"), x = sym(tab, "x"), u = sym(tab, "u"), u_x = sym(tab, "u_x");
    ExprPtr A = atom("A", {t, x}), B = atom("B", {t, x}), C = atom("C", {t, x});

    ExprPtr e = A * pow(u_x, 2) + B * sym(tab, "u_xx") + C;
    auto split = split_by_jet_monomials(e, tab);
    REQUIRE(split.size() == 3);
    CHECK(is_zero(split.at(normalize(pow(u_x, 2), tab)) - A, tab));
    CHECK(is_zero(split.at(sym(tab, "u_xx")) - B, tab));
    CHECK(is_zero(split.at(num(1)) - C, tab));

    // u-dependent order-zero factors count as keys only on request
    ExprPtr eu = atom("exp", {u});
    ExprPtr shaped = eu * pow(u_x, 2) * A + eu * u_x * B + eu * C;
    auto plain = split_by_jet_monomials(shaped, tab);
    auto with_u = split_by_jet_monomials(shaped, tab, /*include_u_dependent=*/true);
    CHECK(plain.size() == 3);
    CHECK(with_u.size() == 3);
    CHECK(is_zero(with_u.at(normalize(eu * pow(u_x, 2), tab)) - A, tab));
    CHECK(is_zero(with_u.at(normalize(eu * u_x, tab)) - B, tab));
    CHECK(is_zero(with_u.at(normalize(eu, tab)) - C, tab));
    // without the flag the exponential stays in the coefficients
    CHECK(is_zero(plain.at(normalize(pow(u_x, 2), tab)) - eu * A, tab));

    // reconstruction: sum(key * coeff) == numerator of the reduced form
    std::mt19937_64 rng(107);
    for (int i = 0; i < 100; ++i) {
        ExprPtr r = random_component(tab, rng, 2) * pow(u_x, 2) +
                    random_component(tab, rng, 2) * sym(tab, "u_t") +
                    random_component(tab, rng, 2) * u_x * sym(tab, "u_xx") +
                    random_component(tab, rng, 2);
        auto parts = split_by_jet_monomials(r, tab, i % 2 == 0);
        ExprPtr sum = num(0);
        for (const auto& [key, coeff] : parts) sum = sum + key * coeff;
        CHECK(is_zero(sum - r, tab));
    }
}

TEST_CASE("determining residual basics for simple sources") {
    SymbolTable tab;
    declare_heat_vars(tab);
    tab.freeze();
    ExprPtr u_x = sym(tab, "u_x"), t = sym(tab, "t"), x = sym(tab, "x");

    // time shift (a = 1/2, b = 0, f = 0) works whenever F is t-independent
    CHECK(is_zero(determining_residual(num(1, 2), num(0), num(0), pow(u_x, 2), tab), tab));
    // space shift works whenever F is x-independent
    CHECK(is_zero(determining_residual(num(0), num(1), num(0), pow(u_x, 2), tab), tab));
    // ... and fails when it is not
    CHECK_FALSE(is_zero(determining_residual(num(0), num(1), num(0), x * pow(u_x, 2), tab), tab));
    // time shift fails on a t-dependent source
    CHECK_FALSE(is_zero(determining_residual(num(1, 2), num(0), num(0), t * pow(u_x, 2), tab), tab));
}
