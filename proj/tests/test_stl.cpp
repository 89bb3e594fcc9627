#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gsmpc/stl.hpp"
#include "random_gen.hpp"

using namespace gsmpc;
using namespace gsmpc::stl;

namespace {

Trace make_trace(double t_s, std::vector<double> y, const std::string& name = "y") {
    Trace tr(t_s);
    tr.add_channel(name, std::move(y));
    return tr;
}

// A dip of `len` seconds to -0.6 Hz starting at 1 s, sampled at 0.05 s over 6 s.
Trace dip(double len) {
    std::vector<double> x;
    for (int k = 0; k <= 120; ++k) {
        const double t = k * 0.05;
        x.push_back(t >= 1.0 - 1e-9 && t < 1.0 + len - 1e-9 ? -0.6 : -0.1);
    }
    return make_trace(0.05, x, "x1");
}

// Direct reading of the recovery requirement: every sample at or beyond c is
// followed, within t_a, by a point from which |x| stays within c to the end.
bool recovers(const std::vector<double>& x, double c, double t_a, double t_s) {
    const std::size_t n = x.size();
    const auto w = static_cast<std::size_t>(std::floor(t_a / t_s + 1e-9));
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(x[k]) < c) continue;
        bool ok = false;
        for (std::size_t j = k; j <= k + w && j < n && !ok; ++j) {
            bool stays = true;
            for (std::size_t i = j; i < n; ++i) stays = stays && std::abs(x[i]) <= c;
            ok = stays;
        }
        if (!ok) return false;
    }
    return true;
}

}  // namespace

TEST(Builders, RejectBadIntervals) {
    const auto p = predicate("y", Rel::le, 1.0);
    EXPECT_THROW(always({2.0, 1.0}, p), DomainError);
    EXPECT_THROW(eventually({-1.0, 1.0}, p), DomainError);
}

TEST(Boolean, AlwaysViolated) {
    const auto f = always({0, inf}, predicate("y", Rel::le, 0.5));
    EXPECT_FALSE(evaluate_bool(f, make_trace(1.0, {0.1, 0.3, 0.6})));
}

TEST(Boolean, EventuallyWindowEndpointIncluded) {
    const auto f = eventually({0, 1}, predicate("y", Rel::ge, 0.5));
    EXPECT_TRUE(evaluate_bool(f, make_trace(0.5, {0.0, 0.2, 0.7}), 0));
}

TEST(Boolean, RecoverySpecOnDips) {
    const auto phi = recovery_spec("x1", 0.45, 1.0);
    const Trace long_dip = dip(1.5), short_dip = dip(0.8);
    EXPECT_FALSE(recovers(long_dip.channel("x1"), 0.45, 1.0, 0.05));
    EXPECT_TRUE(recovers(short_dip.channel("x1"), 0.45, 1.0, 0.05));
    EXPECT_FALSE(evaluate_bool(phi, long_dip));
    EXPECT_TRUE(evaluate_bool(phi, short_dip));
}

TEST(Boolean, RecoverySpecAgreesWithDirectReading) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    const auto phi = recovery_spec("x1", 0.45, 1.0);
    for (int r = 0; r < 300; ++r) {
        std::vector<double> x(40);
        for (auto& v : x) v = r % 3 ? u(rng) * 0.75 : u(rng);
        const Trace tr = make_trace(0.1, x, "x1");
        ASSERT_EQ(evaluate_bool(phi, tr), recovers(x, 0.45, 1.0, 0.1)) << r;
    }
}

TEST(Boolean, UnknownVariable) {
    const auto f = predicate("q", Rel::le, 0.0);
    EXPECT_THROW(evaluate_bool(f, make_trace(1.0, {0.0})), UnknownVariableError);
    EXPECT_THROW(evaluate_bool(predicate("y", Rel::le, 0.0), make_trace(1.0, {0.0}), 3), DomainError);
}

TEST(Robustness, AlwaysMinMargin) {
    const auto f = always({0, inf}, predicate("y", Rel::le, 0.5));
    EXPECT_NEAR(robustness(f, make_trace(1.0, {0.1, 0.3, 0.6})), -0.1, 1e-12);
}

TEST(Robustness, Boundary) {
    EXPECT_EQ(robustness(predicate("y", Rel::ge, 0.0), make_trace(1.0, {0.0})), 0.0);
}

TEST(Robustness, SignMatchesBooleanOnRandomPairs) {
    std::mt19937_64 rng(5);
    for (int r = 0; r < 500; ++r) {
        const auto f = testgen::random_formula(rng, 3, 0.1);
        const Trace tr = testgen::random_trace(rng, 15, 0.1);
        const double rho = robustness(f, tr);
        if (std::abs(rho) <= 1e-9) continue;
        ASSERT_EQ(rho > 0, evaluate_bool(f, tr)) << to_string(f);
    }
}

TEST(Robustness, DesugarPreservesSemantics) {
    std::mt19937_64 rng(6);
    for (int r = 0; r < 200; ++r) {
        const auto f = testgen::random_formula(rng, 3, 0.1);
        const Trace tr = testgen::random_trace(rng, 12, 0.1);
        ASSERT_EQ(robustness(f, tr), robustness(desugar(f), tr));
    }
}

TEST(Tighten, ZeroIsIdentity) {
    const auto f = recovery_spec("x1", 0.45, 1.0);
    EXPECT_TRUE(equal(tighten(f, 0.0), f));
}

TEST(Tighten, RobustFactorOnAlways) {
    const auto f = always({0, inf}, predicate("y", Rel::le, 0.45));
    EXPECT_TRUE(equal(tighten(f, -0.015), always({0, inf}, predicate("y", Rel::le, 0.435))));
}

TEST(Tighten, ShiftsRobustnessByEps) {
    // Single-occurrence linear predicates: robustness moves by exactly eps.
    std::mt19937_64 rng(8);
    for (int r = 0; r < 200; ++r) {
        const auto f = testgen::random_formula(rng, 3, 0.1);
        const Trace tr = testgen::random_trace(rng, 12, 0.1);
        const double rho = robustness(f, tr), rt = robustness(tighten(f, -0.05), tr);
        if (std::isinf(rho)) continue;
        ASSERT_NEAR(rt, rho - 0.05, 1e-12) << to_string(f);
    }
}

TEST(Horizon, Values) {
    const auto p = predicate("y", Rel::le, 0.0);
    EXPECT_EQ(horizon(p), 0.0);
    EXPECT_EQ(horizon(eventually({0, 1}, always({0, inf}, p))), inf);
    EXPECT_EQ(horizon(eventually({0, 1}, always({0, 2}, p))), 3.0);
}

TEST(Parser, RoundTripRandom) {
    std::mt19937_64 rng(9);
    for (int r = 0; r < 200; ++r) {
        const auto f = testgen::random_formula(rng, 4, 0.1);
        ASSERT_TRUE(equal(parse(to_string(f)), f)) << to_string(f);
    }
}

TEST(Parser, RecoverySpecText) {
    const auto f = parse("G[0,inf] ((abs(x1) >= 0.45) -> F[0,1] G[0,inf] (abs(x1) <= 0.45))");
    EXPECT_TRUE(equal(f, recovery_spec("x1", 0.45, 1.0)));
}

TEST(Parser, ErrorPosition) {
    try {
        parse("G[0,1] (x <= ");
        FAIL() << "no error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1);
        EXPECT_GE(e.column(), 13);
    }
    EXPECT_THROW(parse("F[2,1] (x >= 0)"), InputError);
}
