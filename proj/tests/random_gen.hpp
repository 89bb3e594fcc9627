#pragma once

// Random formulas, traces and small MILPs shared by the unit and acceptance tests.

#include <random>
#include <string>
#include <vector>

#include "gsmpc/milp_model.hpp"
#include "gsmpc/stl.hpp"
#include "gsmpc/trace.hpp"

namespace gsmpc::testgen {

inline stl::FormulaPtr random_predicate(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 2);
    std::normal_distribution<double> g(0.0, 1.0);
    stl::LinearExpr e;
    switch (pick(rng)) {
        case 0: e.terms = {{"a", 1.0}}; break;
        case 1: e.terms = {{"b", 1.0}}; break;
        default: e.terms = {{"a", g(rng)}, {"b", g(rng)}}; break;
    }
    return stl::predicate(e, pick(rng) % 2 ? stl::Rel::le : stl::Rel::ge, g(rng) * 0.5);
}

inline stl::Interval random_interval(std::mt19937_64& rng, double t_s) {
    std::uniform_int_distribution<int> lo(0, 3), len(0, 4);
    const int a = lo(rng);
    if (len(rng) == 0) return {a * t_s, stl::inf};
    return {a * t_s, (a + len(rng)) * t_s};
}

inline stl::FormulaPtr random_formula(std::mt19937_64& rng, int depth, double t_s) {
    std::uniform_int_distribution<int> op(0, depth <= 0 ? 0 : 7);
    switch (op(rng)) {
        case 0: return random_predicate(rng);
        case 1: return stl::negation(random_formula(rng, depth - 1, t_s));
        case 2: return stl::conjunction({random_formula(rng, depth - 1, t_s), random_formula(rng, depth - 1, t_s)});
        case 3: return stl::disjunction({random_formula(rng, depth - 1, t_s), random_formula(rng, depth - 1, t_s)});
        case 4: return stl::implication(random_formula(rng, depth - 1, t_s), random_formula(rng, depth - 1, t_s));
        case 5: return stl::always(random_interval(rng, t_s), random_formula(rng, depth - 1, t_s));
        case 6: return stl::eventually(random_interval(rng, t_s), random_formula(rng, depth - 1, t_s));
        default:
            return stl::until(random_interval(rng, t_s), random_formula(rng, depth - 1, t_s),
                              random_formula(rng, depth - 1, t_s));
    }
}

inline Trace random_trace(std::mt19937_64& rng, std::size_t n, double t_s) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = g(rng);
        b[k] = g(rng);
    }
    Trace tr(t_s);
    tr.add_channel("a", std::move(a));
    tr.add_channel("b", std::move(b));
    return tr;
}

/// Minimization MILP with `bins` binaries, a few bounded continuous columns and
/// mixed-sense rows. Rows are built around a random point so most instances are
/// feasible; some are not.
inline MilpModel random_milp(std::mt19937_64& rng, int bins) {
    std::uniform_int_distribution<int> ncont(0, 3), nrows(2, 7), sense(0, 2), coin(0, 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
    MilpModel m;
    std::vector<double> x0;
    for (int j = 0; j < bins; ++j) {
        m.add_binary("b" + std::to_string(j));
        x0.push_back(coin(rng));
    }
    const int nc = ncont(rng);
    for (int j = 0; j < nc; ++j) {
        const double lo = std::round(u(rng) * 200) / 100, hi = lo + std::round(pos(rng) * 300) / 100;
        m.add_continuous("c" + std::to_string(j), lo, hi);
        x0.push_back(lo + (hi - lo) * pos(rng));
    }
    for (int j = 0; j < m.num_vars(); ++j) m.set_objective(j, std::round(u(rng) * 1000) / 100);
    const int rows = nrows(rng);
    for (int i = 0; i < rows; ++i) {
        std::vector<std::pair<int, double>> t;
        double act = 0;
        for (int j = 0; j < m.num_vars(); ++j) {
            if (pos(rng) < 0.4) continue;
            const double c = std::round(u(rng) * 500) / 100;
            t.emplace_back(j, c);
            act += c * x0[static_cast<std::size_t>(j)];
        }
        const int s = sense(rng);
        const double slack = std::round(pos(rng) * 100) / 100 - (pos(rng) < 0.1 ? 2.0 : 0.0);
        if (s == 0) m.add_constraint(t, Sense::le, act + slack);
        else if (s == 1) m.add_constraint(t, Sense::ge, act - slack);
        else m.add_constraint(t, Sense::eq, act);
    }
    return m;
}

}  // namespace gsmpc::testgen
