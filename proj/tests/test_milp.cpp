#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gsmpc/afr.hpp"
#include "gsmpc/encode.hpp"
#include "gsmpc/lp_solver.hpp"
#include "gsmpc/milp_model.hpp"
#include "gsmpc/milp_solver.hpp"
#include "random_gen.hpp"

using namespace gsmpc;

namespace {

// min c'x over {A x <= b, x >= 0} by visiting every basic solution: each
// choice of n tight hyperplanes out of the m rows and n sign constraints.
double vertex_oracle(const Matrix& A, const Vector& b, const Vector& c) {
    const auto m = A.rows(), n = A.cols();
    Matrix H(m + n, n);
    H << A, -Matrix::Identity(n, n);
    Vector h(m + n);
    h << b, Vector::Zero(n);
    std::vector<int> pick(static_cast<std::size_t>(m + n), 0);
    std::fill(pick.end() - n, pick.end(), 1);
    double best = INFINITY;
    Eigen::MatrixXd S(n, n);
    Eigen::VectorXd s(n);
    do {
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < m + n; ++i)
            if (pick[static_cast<std::size_t>(i)]) {
                S.row(r) = H.row(i);
                s[r++] = h[i];
            }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
        if (std::abs(lu.determinant()) < 1e-10) continue;
        const Vector x = lu.solve(s);
        if (((H * x - h).array() <= 1e-9).all()) best = std::min(best, c.dot(x));
    } while (std::next_permutation(pick.begin(), pick.end()));
    return best;
}

MilpModel lp_from(const Matrix& A, const Vector& b, const Vector& c) {
    MilpModel m;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        m.add_continuous("x" + std::to_string(j), 0.0, MilpModel::inf);
        m.set_objective(static_cast<int>(j), c[j]);
    }
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        std::vector<std::pair<int, double>> t;
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            if (A(i, j) != 0) t.emplace_back(static_cast<int>(j), A(i, j));
        m.add_constraint(t, Sense::le, b[i]);
    }
    return m;
}

// Pure enumeration without any LP: every 0/1 point checked against the rows.
double brute_binary(const MilpModel& m) {
    const int n = m.num_vars();
    double best = INFINITY;
    std::vector<double> x(static_cast<std::size_t>(n));
    for (long mask = 0; mask < (1L << n); ++mask) {
        for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(j)] = static_cast<double>((mask >> j) & 1L);
        if (m.max_violation(x) <= 1e-9) best = std::min(best, m.objective_value(x));
    }
    return best;
}

MpcProblem desk_problem(bool with_phi) {
    const ReducedWtg w = ReducedWtg::injected(-0.2771, 2.5741, 0.2550, -2.3343);
    MpcProblem p;
    p.afr = discretize_afr(assemble_afr({}, w, w, {}), 0.05);
    p.block = 0.2;
    if (with_phi) p.phi = stl::recovery_spec("x1", 0.45, 1.0);
    return p;
}

}  // namespace

// ------------------------------------------------------------------- LP

TEST(Lp, Geometry) {
    MilpModel m;
    const int x = m.add_continuous("x", -MilpModel::inf, 1.0), y = m.add_continuous("y", -MilpModel::inf, 1.0);
    m.add_constraint({{x, 1}, {y, 1}}, Sense::le, 1.5);
    m.set_objective(x, -1);
    m.set_objective(y, -1);
    const LpResult r = solve_lp(m);
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.objective, -1.5, 1e-9);
}

TEST(Lp, InfeasiblePair) {
    MilpModel m;
    const int x = m.add_continuous("x", -MilpModel::inf, MilpModel::inf);
    m.add_constraint({{x, 1}}, Sense::ge, 1.0);
    m.add_constraint({{x, 1}}, Sense::le, 0.0);
    EXPECT_EQ(solve_lp(m).status, LpStatus::infeasible);
}

TEST(Lp, Unbounded) {
    MilpModel m;
    const int x = m.add_continuous("x", 0, MilpModel::inf);
    m.set_objective(x, -1);
    EXPECT_EQ(solve_lp(m).status, LpStatus::unbounded);
}

TEST(Lp, RandomAgainstVertexEnumeration) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int inst = 0; inst < 100; ++inst) {
        // Non-negative rows with positive right-hand sides keep the polytope bounded.
        Matrix A(10, 10);
        Vector b(10), c(10);
        for (Eigen::Index i = 0; i < 10; ++i) {
            for (Eigen::Index j = 0; j < 10; ++j) A(i, j) = u(rng) < 0.6 ? std::round(u(rng) * 100) / 10 : 0.0;
            A(i, i) += 0.5;
            b[i] = 1.0 + std::round(u(rng) * 90) / 10;
            c[i] = std::round((u(rng) - 0.8) * 100) / 10;
        }
        const LpResult r = solve_lp(lp_from(A, b, c));
        ASSERT_EQ(r.status, LpStatus::optimal) << inst;
        ASSERT_NEAR(r.objective, vertex_oracle(A, b, c), 1e-6) << inst;
    }
}

// ----------------------------------------------------------------- MILP

TEST(Milp, BinaryGeometry) {
    MilpModel m;
    const int x = m.add_binary("x"), y = m.add_binary("y");
    m.add_constraint({{x, 1}, {y, 1}}, Sense::le, 1.5);
    m.set_objective(x, -1);
    m.set_objective(y, -1);
    const MilpSolution s = solve_milp(m);
    ASSERT_EQ(s.status, MilpStatus::optimal);
    EXPECT_NEAR(s.objective, -1.0, 1e-9);
}

TEST(Milp, NoBinariesMatchesLp) {
    std::mt19937_64 rng(3);
    for (int inst = 0; inst < 20; ++inst) {
        const MilpModel m = testgen::random_milp(rng, 0);
        const LpResult lp = solve_lp(m);
        const MilpSolution s = solve_milp(m);
        ASSERT_EQ(s.status == MilpStatus::optimal, lp.status == LpStatus::optimal) << inst;
        if (lp.status == LpStatus::optimal) ASSERT_NEAR(s.objective, lp.objective, 1e-9);
        const MilpSolution o = enumerate_oracle(m);
        ASSERT_EQ(o.status, s.status);
    }
}

TEST(Milp, OneBinaryInfeasibleBothWays) {
    MilpModel m;
    const int b = m.add_binary("b");
    m.add_constraint({{b, 1}}, Sense::ge, 0.3);
    m.add_constraint({{b, 1}}, Sense::le, 0.7);
    EXPECT_EQ(solve_milp(m).status, MilpStatus::infeasible);
    EXPECT_EQ(enumerate_oracle(m).status, MilpStatus::infeasible);
}

TEST(Milp, PureBinaryAgainstBruteForce) {
    std::mt19937_64 rng(4);
    for (int inst = 0; inst < 50; ++inst) {
        MilpModel m;
        for (int j = 0; j < 10; ++j) m.add_binary("b" + std::to_string(j));
        const MilpModel r = testgen::random_milp(rng, 10);
        // Keep only the binary columns of the random instance.
        for (int j = 0; j < 10; ++j) m.set_objective(j, r.objective()[static_cast<std::size_t>(j)]);
        for (const auto& c : r.constraints()) {
            std::vector<std::pair<int, double>> t;
            for (const auto& [j, a] : c.coefs)
                if (j < 10) t.emplace_back(j, a);
            m.add_constraint(t, c.sense, std::round(c.rhs * 2) / 2);
        }
        const double want = brute_binary(m);
        const MilpSolution s = solve_milp(m);
        if (std::isinf(want)) {
            ASSERT_EQ(s.status, MilpStatus::infeasible) << inst;
        } else {
            ASSERT_EQ(s.status, MilpStatus::optimal) << inst;
            ASSERT_NEAR(s.objective, want, 1e-6) << inst;
            ASSERT_LE(m.max_violation(s.x), 1e-6);
        }
    }
}

TEST(Milp, MixedAgainstOracleBothBranchRules) {
    std::mt19937_64 rng(7);
    for (int inst = 0; inst < 50; ++inst) {
        const MilpModel m = testgen::random_milp(rng, 8);
        const MilpSolution o = enumerate_oracle(m);
        for (BranchRule rule : {BranchRule::reliability, BranchRule::most_fractional}) {
            MilpOptions opt;
            opt.branching = rule;
            const MilpSolution s = solve_milp(m, opt);
            ASSERT_EQ(s.status, o.status) << inst;
            if (o.status == MilpStatus::optimal) ASSERT_NEAR(s.objective, o.objective, 1e-6) << inst;
        }
        const LpResult relax = solve_lp(m.relaxed());
        if (o.status == MilpStatus::optimal && relax.status == LpStatus::optimal)
            ASSERT_LE(relax.objective, o.objective + 1e-9) << inst;
    }
}

TEST(Milp, NodeLimitReturnsIncumbentWithGap) {
    const MpcEncoding e = encode_mpc(desk_problem(true));
    MilpOptions opt;
    opt.node_limit = 3;
    const MilpSolution s = solve_milp(e.model, opt);
    EXPECT_EQ(s.status, MilpStatus::limit);
    EXPECT_LE(s.nodes, 3);
    if (s.has_incumbent()) EXPECT_GE(s.gap, 0.0);
}

// ----------------------------------------------------------- LP format

TEST(LpFormat, EmptyModel) {
    EXPECT_EQ(export_lp(MilpModel{}),
              "\\ MILP model: 0 variables, 0 constraints\nMinimize\n obj:\nSubject To\nBounds\nEnd\n");
}

TEST(LpFormat, ToyGolden) {
    MilpModel m;
    const int x = m.add_continuous("x", 0, 4), b = m.add_binary("b");
    m.set_objective(x, 1.5);
    m.set_objective(b, -2);
    m.add_constraint({{x, 1}, {b, -3}}, Sense::ge, 0.25, "", "r1");
    EXPECT_EQ(export_lp(m),
              "\\ MILP model: 2 variables, 1 constraints\n"
              "Minimize\n obj: + 1.5 x - 2 b\n"
              "Subject To\n r1: + 1 x - 3 b >= 0.25\n"
              "Bounds\n 0 <= x <= 4\n 0 <= b <= 1\n"
              "Binary\n b\nEnd\n");
}

TEST(LpFormat, ExportImportFixpoint) {
    const MpcEncoding e = encode_mpc(desk_problem(true));
    const std::string text = export_lp(e.model);
    EXPECT_EQ(export_lp(import_lp(text)), text);
    EXPECT_EQ(export_lp(encode_mpc(desk_problem(true)).model), text);  // deterministic construction
}

TEST(LpFormat, ImportErrors) {
    EXPECT_THROW(import_lp("Minimize\n obj: + 1 x\nSubject To\n c: + 1 x <=\nEnd\n"), InputError);
    EXPECT_THROW(import_lp("Maximize\n obj: + 1 x\nEnd\n"), InputError);
}

// --------------------------------------------------------------- encoder

TEST(Dynamics, CountsForOneStep) {
    MilpModel m;
    const MpcProblem p = desk_problem(false);
    encode_dynamics(m, p.afr.sys, 1, Vector::Zero(5));
    EXPECT_EQ(m.num_constraints(), 10);
    int fix = 0;
    for (const auto& c : m.constraints()) {
        EXPECT_EQ(c.sense, Sense::eq);
        fix += c.family == "initial";
    }
    EXPECT_EQ(fix, 5);
}

TEST(Dynamics, ZeroInputReproducesSimulation) {
    const MpcProblem p = desk_problem(false);
    MilpModel m;
    const DynamicsVars v = encode_dynamics(m, p.afr.sys, 40, Vector::Zero(5), p.afr.Bd * 0.7);
    for (const auto& uk : v.u)
        for (int j : uk) m.set_bounds(j, 0, 0);
    const LpResult r = solve_lp(m);
    ASSERT_EQ(r.status, LpStatus::optimal);
    const Trace tr = uncontrolled_response(p.afr, 0.7, 40);
    for (int k = 0; k <= 40; ++k)
        for (int i = 0; i < 5; ++i)
            ASSERT_NEAR(r.x[static_cast<std::size_t>(v.x[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)])],
                        tr.channel(AfrModel::state_names()[static_cast<std::size_t>(i)])[static_cast<std::size_t>(k)],
                        1e-7);
}

TEST(Dynamics, IdentityHoldsInitialState) {
    LtiSystem s;
    s.A = Matrix::Identity(2, 2);
    s.B = Matrix::Zero(2, 1);
    s.C = Matrix::Identity(2, 2);
    s.D = Matrix::Zero(2, 1);
    s.state_names = {"p", "q"};
    s.input_names = {"u"};
    s.output_names = {"yp", "yq"};
    s.sample_time = 1.0;
    MilpModel m;
    Vector x0(2);
    x0 << 0.3, -1.2;
    const DynamicsVars v = encode_dynamics(m, s, 5, x0);
    const LpResult r = solve_lp(m);
    ASSERT_EQ(r.status, LpStatus::optimal);
    for (const auto& xk : v.x) {
        EXPECT_NEAR(r.x[static_cast<std::size_t>(xk[0])], 0.3, 1e-12);
        EXPECT_NEAR(r.x[static_cast<std::size_t>(xk[1])], -1.2, 1e-12);
    }
}

TEST(Costs, OnTimeAndStartups) {
    EXPECT_EQ(control_effort({0, 1, 1, 0, 1}), 3);
    EXPECT_EQ(startup_count({0, 1, 0, 1, 0}), 2);
}

TEST(Mpc, NoLimitNoFormulaIsIdle) {
    MpcProblem p = desk_problem(false);
    p.f_d_lim = INFINITY;
    const MpcEncoding e = encode_mpc(p);
    const MilpSolution s = solve_milp(e.model);
    ASSERT_EQ(s.status, MilpStatus::optimal);
    EXPECT_EQ(s.objective, 0.0);
}

TEST(Mpc, InconsistentBlocking) {
    MpcProblem p = desk_problem(false);
    p.block = 0.07;
    EXPECT_THROW(encode_mpc(p), DomainError);
}

TEST(Mpc, ObjectiveMatchesCostDefinition) {
    const MpcProblem p = desk_problem(false);
    const MpcEncoding e = encode_mpc(p);
    const MilpSolution s = solve_milp(e.model);
    ASSERT_EQ(s.status, MilpStatus::optimal);
    const auto b = extract_schedule(e, s.x);
    double cost = 0;
    for (const auto& bi : b) cost += p.w1 * control_effort(bi) + p.w2 * startup_count(bi);
    EXPECT_NEAR(s.objective, cost, 1e-6);
}

TEST(Stl, AlwaysBoundStructure) {
    MilpModel m;
    std::vector<int> x;
    for (int k = 0; k < 3; ++k) x.push_back(m.add_continuous("x1_" + std::to_string(k), -1, 1));
    m.set_objective(x[1], -1);  // push one sample to its limit
    const ChannelMap map = [&](const std::string& n, int k) -> std::optional<AffineTerm> {
        if (n != "x1" || k < 0 || k >= 3) return std::nullopt;
        return AffineTerm{{{x[static_cast<std::size_t>(k)], 1.0}}, 0.0};
    };
    const StlEncoding enc = encode_stl(m, stl::always({0, stl::inf}, stl::predicate("x1", stl::Rel::le, 0.5)), map,
                                       3, 1.0, {{"x1", 1.0}});
    EXPECT_GE(enc.root, 0);
    const MilpSolution s = solve_milp(m);
    ASSERT_EQ(s.status, MilpStatus::optimal);
    for (int v : x) EXPECT_LE(s.x[static_cast<std::size_t>(v)], 0.5 + 1e-6);
}

TEST(Stl, UnknownChannel) {
    MilpModel m;
    const ChannelMap map = [](const std::string&, int) -> std::optional<AffineTerm> { return std::nullopt; };
    EXPECT_THROW(encode_stl(m, stl::predicate("q", stl::Rel::le, 0), map, 3, 1.0, {}), UnknownVariableError);
}

// Every trace of a 4-sample, two-channel grid against random formulas: the
// encoding with the trace fixed is feasible exactly when the monitor accepts.
TEST(Stl, ExhaustiveSmallInstances) {
    std::mt19937_64 rng(12);
    int checked = 0;
    for (int f = 0; f < 15; ++f) {
        const auto phi = testgen::random_formula(rng, 3, 1.0);
        for (int mask = 0; mask < 256; ++mask) {
            std::vector<double> a(4), b(4);
            for (int k = 0; k < 4; ++k) {
                a[static_cast<std::size_t>(k)] = (mask >> k) & 1 ? 1.0 : -1.0;
                b[static_cast<std::size_t>(k)] = (mask >> (k + 4)) & 1 ? 1.0 : -1.0;
            }
            Trace tr(1.0);
            tr.add_channel("a", a);
            tr.add_channel("b", b);
            MilpModel m;
            std::vector<int> va, vb;
            for (int k = 0; k < 4; ++k) {
                va.push_back(m.add_continuous("a" + std::to_string(k), a[static_cast<std::size_t>(k)], a[static_cast<std::size_t>(k)]));
                vb.push_back(m.add_continuous("b" + std::to_string(k), b[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(k)]));
            }
            const ChannelMap map = [&](const std::string& n, int k) -> std::optional<AffineTerm> {
                if (k < 0 || k >= 4) return std::nullopt;
                if (n == "a") return AffineTerm{{{va[static_cast<std::size_t>(k)], 1.0}}, 0.0};
                if (n == "b") return AffineTerm{{{vb[static_cast<std::size_t>(k)], 1.0}}, 0.0};
                return std::nullopt;
            };
            encode_stl(m, phi, map, 4, 1.0, {{"a", 1.0}, {"b", 1.0}});
            const MilpSolution s = solve_milp(m);
            ASSERT_NE(s.status, MilpStatus::limit);
            ASSERT_EQ(s.status == MilpStatus::optimal, stl::evaluate_bool(phi, tr))
                << stl::to_string(phi) << " mask " << mask;
            ++checked;
        }
    }
    EXPECT_EQ(checked, 15 * 256);
}

TEST(Stl, UniformBigMAgreesWithTight) {
    MpcProblem p = desk_problem(true);
    p.horizon = 2.0;
    const MilpSolution tight = solve_milp(encode_mpc(p).model);
    p.stl_options.big_m = BigM::uniform;
    const MilpSolution uni = solve_milp(encode_mpc(p).model);
    ASSERT_EQ(tight.status, MilpStatus::optimal);
    ASSERT_EQ(uni.status, MilpStatus::optimal);
    EXPECT_NEAR(tight.objective, uni.objective, 1e-6);
}
