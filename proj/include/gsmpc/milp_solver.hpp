#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gsmpc/errors.hpp"
#include "gsmpc/lp_solver.hpp"
#include "gsmpc/milp_model.hpp"

namespace gsmpc {

enum class MilpStatus { optimal, infeasible, unbounded, limit };

inline const char* to_string(MilpStatus s) {
    switch (s) {
        case MilpStatus::optimal: return "optimal";
        case MilpStatus::infeasible: return "infeasible";
        case MilpStatus::unbounded: return "unbounded";
        case MilpStatus::limit: return "limit-reached";
    }
    return "?";
}

enum class BranchRule {
    most_fractional,  // closest to 1/2, lowest index on ties
    reliability       // pseudocosts, strong branching until they are reliable
};

struct MilpProgress {
    long nodes = 0;
    std::size_t open = 0;
    double incumbent = std::numeric_limits<double>::infinity();
    double bound = -std::numeric_limits<double>::infinity();
    double elapsed_s = 0;
};

struct MilpOptions {
    double time_limit_s = 600.0;
    long node_limit = 5'000'000;
    double gap = 0.0;  // relative gap at which the search stops
    double integrality_tol = 1e-6;
    BranchRule branching = BranchRule::reliability;
    int reliability = 4;        // observations per direction before pseudocosts are trusted
    int lookahead = 8;          // strong-branching candidates without improvement before stopping
    int max_strong = 40;        // strong-branching candidates per node
    long strong_iterations = 0; // per child; 0 picks twice the mean node iterations (at least 20)
    double plunge_quotient = 0.25;
    std::function<void(const MilpProgress&)> progress;
    double progress_interval_s = 5.0;
    LpOptions lp;
};

struct MilpSolution {
    MilpStatus status = MilpStatus::limit;
    double objective = std::numeric_limits<double>::infinity();
    double bound = -std::numeric_limits<double>::infinity();
    std::vector<double> x;  // empty when no incumbent exists
    long nodes = 0;
    long lp_iterations = 0;
    long strong_branches = 0;
    double root_bound = -std::numeric_limits<double>::infinity();
    double wall_time_s = 0.0;
    double gap = std::numeric_limits<double>::infinity();

    bool has_incumbent() const { return !x.empty(); }
};

namespace milp_detail {

struct BoundChange {
    int pos;  // position in the binary list
    double lo, hi;
};

struct Node {
    double bound;  // lower bound inherited from the parent
    long id;
    int depth;
    std::vector<BoundChange> changes;
    // Branching that created the node, for pseudocost updates.
    int branch_pos = -1;
    bool up = false;
    double distance = 0;  // how far the LP value had to move
    double parent_obj = 0;
};

/// True when every feasible point has an integral objective value: only
/// binaries carry cost and all their costs are integers.
inline bool integral_objective(const MilpModel& m) {
    for (int j = 0; j < m.num_vars(); ++j) {
        const double c = m.objective()[static_cast<std::size_t>(j)];
        if (c == 0.0) continue;
        if (m.variable(j).kind != VarKind::binary || c != std::round(c)) return false;
    }
    return true;
}

inline bool lex_less(const std::vector<double>& a, const std::vector<double>& b, const std::vector<int>& bins) {
    for (int j : bins) {
        const double x = std::round(a[static_cast<std::size_t>(j)]), y = std::round(b[static_cast<std::size_t>(j)]);
        if (x != y) return x < y;
    }
    return false;
}

inline double rel_gap(double incumbent, double bound) {
    if (!std::isfinite(incumbent)) return std::numeric_limits<double>::infinity();
    return std::max(0.0, incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

/// Per-variable average objective gain per unit of change, by direction.
class Pseudocosts {
public:
    explicit Pseudocosts(std::size_t n) : sum_(2 * n, 0.0), count_(2 * n, 0) {}

    void record(int pos, bool up, double gain_per_unit) {
        const auto k = index(pos, up);
        sum_[k] += std::max(0.0, gain_per_unit);
        ++count_[k];
        total_[up] += std::max(0.0, gain_per_unit);
        ++total_count_[up];
    }

    int count(int pos, bool up) const { return count_[index(pos, up)]; }

    double value(int pos, bool up) const {
        const auto k = index(pos, up);
        if (count_[k] > 0) return sum_[k] / count_[k];
        return total_count_[up] > 0 ? total_[up] / static_cast<double>(total_count_[up]) : 1.0;
    }

private:
    std::size_t index(int pos, bool up) const { return 2 * static_cast<std::size_t>(pos) + (up ? 1 : 0); }
    std::vector<double> sum_;
    std::vector<int> count_;
    double total_[2] = {0, 0};
    long total_count_[2] = {0, 0};
};

inline double product_score(double down, double up) { return std::max(down, 1e-6) * std::max(up, 1e-6); }

}  // namespace milp_detail

/// Branch and bound over the binaries of `model` (minimization).
///
/// Node order: depth first until an incumbent exists, then best bound with
/// ties to the older node. After branching the search plunges into a child
/// while its bound stays within `plunge_quotient` of the gap above the best
/// open bound. Variables are chosen by `options.branching`; with reliability
/// branching, candidates whose pseudocosts have fewer than `reliability`
/// observations are strong-branched on a saved basis. Reduced-cost fixing
/// tightens subtrees once an incumbent exists. With an integral objective,
/// nodes whose bound rounds up to the incumbent value are pruned.
///
/// Every rule is deterministic, so a model always yields the same tree.
inline MilpSolution solve_milp(const MilpModel& model, const MilpOptions& options = {},
                               const std::vector<double>* initial_incumbent = nullptr) {
    using namespace milp_detail;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    MilpSolution sol;
    std::vector<int> bins;
    for (int j = 0; j < model.num_vars(); ++j)
        if (model.variable(j).kind == VarKind::binary) bins.push_back(j);
    const auto nb = bins.size();
    const bool int_obj = integral_objective(model) && nb > 0;
    const double itol = options.integrality_tol;

    LpEngine eng(model, options.lp);
    std::vector<double> root_lo(nb), root_hi(nb), cur_lo(nb), cur_hi(nb);
    for (std::size_t k = 0; k < nb; ++k) {
        root_lo[k] = cur_lo[k] = model.variable(bins[k]).lower;
        root_hi[k] = cur_hi[k] = model.variable(bins[k]).upper;
    }
    Pseudocosts pc(nb);

    auto accept_incumbent = [&](const std::vector<double>& x, double obj) {
        const bool better = obj < sol.objective - 1e-9;
        const bool tie = std::abs(obj - sol.objective) <= 1e-9 && lex_less(x, sol.x, bins);
        if (better || tie || !sol.has_incumbent()) {
            sol.x = x;
            sol.objective = obj;
        }
    };

    if (initial_incumbent) {
        const auto& x = *initial_incumbent;
        if (static_cast<int>(x.size()) != model.num_vars())
            throw DomainError("initial incumbent has the wrong length");
        bool integral = true;
        for (int j : bins)
            integral = integral && std::abs(x[static_cast<std::size_t>(j)] - std::round(x[static_cast<std::size_t>(j)])) <= itol;
        if (integral && model.max_violation(x) <= 1e-6) accept_incumbent(x, model.objective_value(x));
    }

    auto cutoff = [&]() -> double {
        if (!sol.has_incumbent()) return LpEngine::inf;
        if (int_obj) return sol.objective - 1.0 + 1e-6;
        return sol.objective - options.gap * std::max(1.0, std::abs(sol.objective)) - 1e-9;
    };
    auto prunable = [&](double bound) { return sol.has_incumbent() && bound > cutoff(); };

    auto set_bin = [&](std::size_t k, double lo, double hi) {
        if (cur_lo[k] == lo && cur_hi[k] == hi) return;
        cur_lo[k] = lo;
        cur_hi[k] = hi;
        eng.set_bounds(bins[k], lo, hi);
    };
    auto apply = [&](const std::vector<BoundChange>& changes) {
        std::vector<double> lo = root_lo, hi = root_hi;
        for (const auto& c : changes) {
            lo[static_cast<std::size_t>(c.pos)] = c.lo;
            hi[static_cast<std::size_t>(c.pos)] = c.hi;
        }
        for (std::size_t k = 0; k < nb; ++k) set_bin(k, lo[k], hi[k]);
    };

    // Re-solves with all binaries fixed at their rounded values so that the
    // continuous part of an incumbent is exactly consistent. Restores the
    // node bounds and basis afterwards.
    auto polish = [&](const std::vector<double>& x) -> std::optional<std::pair<std::vector<double>, double>> {
        const auto basis = eng.save_basis();
        const auto lo = cur_lo, hi = cur_hi;
        for (std::size_t k = 0; k < nb; ++k) {
            const double v = std::round(x[static_cast<std::size_t>(bins[k])]);
            set_bin(k, v, v);
        }
        const LpResult r = eng.solve();
        for (std::size_t k = 0; k < nb; ++k) set_bin(k, lo[k], hi[k]);
        eng.restore_basis(basis);
        if (r.status != LpStatus::optimal) return std::nullopt;
        std::vector<double> y = r.x;
        for (int j : bins) y[static_cast<std::size_t>(j)] = std::round(y[static_cast<std::size_t>(j)]);
        return std::make_pair(y, model.objective_value(y));
    };

    long node_iterations = 0, lp_solves = 0;
    auto strong_limit = [&]() -> long {
        if (options.strong_iterations > 0) return options.strong_iterations;
        const long mean = lp_solves > 0 ? node_iterations / lp_solves : 20;
        return std::max<long>(20, 2 * mean);
    };

    struct Outcome {
        enum Kind { pruned, infeasible, integral, branched, unbounded, failed } kind = failed;
        double obj = 0;
        std::optional<Node> down, up;
    };

    // Strong branching on one candidate: returns the child bounds (inf when
    // the child is infeasible or cut off).
    auto strong_branch = [&](std::size_t k, const LpEngine::Basis& basis) {
        double res[2];
        const double lo = cur_lo[k], hi = cur_hi[k];
        for (int dir = 0; dir < 2; ++dir) {
            if (dir == 0) set_bin(k, lo, 0.0);
            else set_bin(k, 1.0, hi);
            const LpResult r = eng.solve(cutoff(), strong_limit());
            ++sol.strong_branches;
            if (r.status == LpStatus::infeasible || r.status == LpStatus::cutoff) res[dir] = LpEngine::inf;
            else if (r.status == LpStatus::optimal || r.bound_valid) res[dir] = r.objective;
            else res[dir] = -LpEngine::inf;
            set_bin(k, lo, hi);
            eng.restore_basis(basis);
        }
        return std::make_pair(res[0], res[1]);
    };

    long next_id = 0;
    auto process = [&](Node node) -> Outcome {
        Outcome out;
        apply(node.changes);
        for (int restart = 0;; ++restart) {
            const LpResult r = eng.solve(cutoff());
            ++lp_solves;
            node_iterations += r.iterations;
            if (r.status == LpStatus::infeasible || r.status == LpStatus::cutoff) {
                out.kind = r.status == LpStatus::infeasible ? Outcome::infeasible : Outcome::pruned;
                return out;
            }
            if (r.status == LpStatus::unbounded) {
                out.kind = Outcome::unbounded;
                return out;
            }
            if (r.status != LpStatus::optimal) return out;
            out.obj = r.objective;
            if (restart == 0 && node.branch_pos >= 0 && node.distance > 0)
                pc.record(node.branch_pos, node.up, (r.objective - node.parent_obj) / node.distance);
            if (prunable(out.obj)) {
                out.kind = Outcome::pruned;
                return out;
            }

            // Reduced-cost fixing for the subtree.
            if (sol.has_incumbent() && !r.reduced_cost.empty()) {
                const double room = cutoff() - r.objective;
                for (std::size_t k = 0; k < nb; ++k) {
                    if (cur_lo[k] == cur_hi[k]) continue;
                    const double v = r.x[static_cast<std::size_t>(bins[k])];
                    const double d = r.reduced_cost[static_cast<std::size_t>(bins[k])];
                    if (v <= itol && d > room) {
                        node.changes.push_back({static_cast<int>(k), cur_lo[k], 0.0});
                        set_bin(k, cur_lo[k], 0.0);
                    } else if (v >= 1 - itol && -d > room) {
                        node.changes.push_back({static_cast<int>(k), 1.0, cur_hi[k]});
                        set_bin(k, 1.0, cur_hi[k]);
                    }
                }
            }

            std::vector<std::size_t> cand;
            for (std::size_t k = 0; k < nb; ++k) {
                const double v = r.x[static_cast<std::size_t>(bins[k])];
                if (std::min(v - std::floor(v), std::ceil(v) - v) > itol) cand.push_back(k);
            }
            if (cand.empty()) {
                out.kind = Outcome::integral;
                if (auto p = polish(r.x)) accept_incumbent(p->first, p->second);
                else accept_incumbent(r.x, r.objective);
                return out;
            }

            auto frac = [&](std::size_t k) {
                const double v = r.x[static_cast<std::size_t>(bins[k])];
                return v - std::floor(v);
            };
            std::size_t best = cand.front();
            double best_down = out.obj, best_up = out.obj;
            bool fixed_something = false;
            if (options.branching == BranchRule::most_fractional) {
                double best_score = -1;
                for (std::size_t k : cand) {
                    const double f = frac(k), score = std::min(f, 1.0 - f);
                    if (score > best_score + 1e-12) {
                        best_score = score;
                        best = k;
                    }
                }
            } else {
                // Candidates by pseudocost score, most fractional then index on ties.
                std::vector<std::pair<double, std::size_t>> order;
                for (std::size_t k : cand) {
                    const double f = frac(k);
                    order.emplace_back(product_score(pc.value(static_cast<int>(k), false) * f,
                                                     pc.value(static_cast<int>(k), true) * (1 - f)),
                                       k);
                }
                std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
                    if (a.first != b.first) return a.first > b.first;
                    const double fa = std::min(frac(a.second), 1 - frac(a.second));
                    const double fb = std::min(frac(b.second), 1 - frac(b.second));
                    if (fa != fb) return fa > fb;
                    return a.second < b.second;
                });
                double best_score = -1;
                int since_improved = 0, strong = 0;
                std::optional<LpEngine::Basis> basis;
                for (const auto& [est, k] : order) {
                    const int pos = static_cast<int>(k);
                    const bool reliable = std::min(pc.count(pos, false), pc.count(pos, true)) >= options.reliability;
                    double score = est, down = out.obj, up = out.obj;
                    if (!reliable && strong < options.max_strong) {
                        if (!basis) basis = eng.save_basis();
                        ++strong;
                        const auto [bd, bu] = strong_branch(k, *basis);
                        const double f = frac(k);
                        if (std::isfinite(bd) && bd > -LpEngine::inf) pc.record(pos, false, (bd - out.obj) / f);
                        if (std::isfinite(bu) && bu > -LpEngine::inf) pc.record(pos, true, (bu - out.obj) / (1 - f));
                        const bool dead_down = bd == LpEngine::inf || prunable(bd);
                        const bool dead_up = bu == LpEngine::inf || prunable(bu);
                        if (dead_down && dead_up) {
                            out.kind = Outcome::pruned;
                            return out;
                        }
                        if (dead_down || dead_up) {
                            // One side is hopeless: fix the other and re-solve.
                            const double v = dead_down ? 1.0 : 0.0;
                            node.changes.push_back({pos, v, v});
                            set_bin(k, v, v);
                            fixed_something = true;
                            break;
                        }
                        down = std::max(bd, out.obj);
                        up = std::max(bu, out.obj);
                        score = product_score(down - out.obj, up - out.obj);
                    }
                    if (score > best_score * (1 + 1e-9)) {
                        best_score = score;
                        best = k;
                        best_down = down;
                        best_up = up;
                        since_improved = 0;
                    } else if (++since_improved >= options.lookahead) {
                        break;
                    }
                }
                if (basis && !fixed_something) eng.restore_basis(*basis);
            }
            if (fixed_something && restart < 50) continue;

            const double f = frac(best);
            const double v = r.x[static_cast<std::size_t>(bins[best])];
            Node down{std::max(out.obj, best_down), next_id++, node.depth + 1, node.changes};
            down.changes.push_back({static_cast<int>(best), cur_lo[best], std::floor(v)});
            down.branch_pos = static_cast<int>(best);
            down.up = false;
            down.distance = f;
            down.parent_obj = out.obj;
            Node up{std::max(out.obj, best_up), next_id++, node.depth + 1, node.changes};
            up.changes.push_back({static_cast<int>(best), std::ceil(v), cur_hi[best]});
            up.branch_pos = static_cast<int>(best);
            up.up = true;
            up.distance = 1 - f;
            up.parent_obj = out.obj;
            out.kind = Outcome::branched;
            out.down = std::move(down);
            out.up = std::move(up);
            return out;
        }
    };

    auto finish = [&](MilpStatus st) {
        sol.status = st;
        sol.lp_iterations = eng.total_iterations();
        sol.wall_time_s = elapsed();
        if (sol.has_incumbent()) sol.gap = rel_gap(sol.objective, sol.bound);
        return sol;
    };

    // Open nodes: a heap ordered depth-first before the first incumbent and
    // best-bound afterwards.
    std::vector<Node> open;
    bool best_first = false;
    auto cmp = [&](const Node& a, const Node& b) {
        if (!best_first) {
            if (a.depth != b.depth) return a.depth < b.depth;
            return a.id < b.id;  // newest first among equals
        }
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    };
    auto push = [&](Node n) {
        open.push_back(std::move(n));
        std::push_heap(open.begin(), open.end(), cmp);
    };
    auto pop = [&] {
        std::pop_heap(open.begin(), open.end(), cmp);
        Node n = std::move(open.back());
        open.pop_back();
        return n;
    };
    auto open_bound = [&] {
        double b = LpEngine::inf;
        for (const auto& n : open) b = std::min(b, n.bound);
        return b;
    };

    double last_report = 0;
    auto report = [&](double bound) {
        if (!options.progress) return;
        const double t = elapsed();
        if (t - last_report < options.progress_interval_s) return;
        last_report = t;
        options.progress({sol.nodes, open.size(), sol.objective, bound, t});
    };

    // Root.
    Node root{-LpEngine::inf, next_id++, 0, {}};
    Outcome ro = process(root);
    ++sol.nodes;
    switch (ro.kind) {
        case Outcome::unbounded: return finish(MilpStatus::unbounded);
        case Outcome::failed: return finish(MilpStatus::limit);
        case Outcome::infeasible:
            if (sol.has_incumbent()) throw NumericalError("root LP infeasible although an incumbent was supplied");
            return finish(MilpStatus::infeasible);
        case Outcome::pruned:
            if (!sol.has_incumbent()) return finish(MilpStatus::infeasible);
            sol.bound = sol.root_bound = sol.objective;
            return finish(MilpStatus::optimal);
        case Outcome::integral:
            sol.root_bound = ro.obj;
            sol.bound = sol.objective;
            return finish(MilpStatus::optimal);
        case Outcome::branched:
            break;
    }
    sol.root_bound = sol.bound = ro.obj;
    if (sol.has_incumbent()) best_first = true;

    std::optional<Node> current;
    auto stash_children = [&](Outcome& o) {
        // Plunge into the child with the lower bound (the nearer side on ties).
        Node& a = *o.down;
        Node& b = *o.up;
        const bool up_first = b.bound < a.bound || (b.bound == a.bound && b.distance <= a.distance);
        Node first = up_first ? std::move(b) : std::move(a);
        Node second = up_first ? std::move(a) : std::move(b);
        const double best_open = std::min(open_bound(), second.bound);
        const bool plunge = !sol.has_incumbent() ||
                            first.bound <= best_open + options.plunge_quotient * (cutoff() - best_open);
        push(std::move(second));
        if (plunge) current = std::move(first);
        else push(std::move(first));
    };
    stash_children(ro);

    long failures = 0;
    for (;;) {
        if (!current) {
            if (open.empty()) break;
            if (!best_first && sol.has_incumbent()) {
                best_first = true;
                std::make_heap(open.begin(), open.end(), cmp);
            }
            if (best_first) {
                const double b = open.front().bound;
                sol.bound = std::max(sol.bound, std::min(b, sol.objective));
                if (prunable(b)) {
                    open.clear();
                    break;
                }
                if (options.gap > 0 && rel_gap(sol.objective, b) <= options.gap) break;
            }
            current = pop();
        }
        if (sol.nodes >= options.node_limit || elapsed() > options.time_limit_s) {
            push(std::move(*current));
            current.reset();
            sol.bound = std::max(sol.bound, std::min(open_bound(), sol.objective));
            return finish(MilpStatus::limit);
        }
        Node node = std::move(*current);
        current.reset();
        if (prunable(node.bound)) continue;
        report(best_first && !open.empty() ? std::min(open.front().bound, node.bound) : sol.bound);
        Outcome o = process(node);
        ++sol.nodes;
        switch (o.kind) {
            case Outcome::unbounded:
                return finish(MilpStatus::unbounded);
            case Outcome::failed:
                // Retry once from a clean basis, then give up on proving optimality.
                if (++failures > 3) {
                    sol.bound = std::max(sol.bound, std::min(open_bound(), sol.objective));
                    return finish(MilpStatus::limit);
                }
                eng.reset_basis();
                push(std::move(node));
                break;
            case Outcome::branched:
                stash_children(o);
                break;
            default:
                break;
        }
    }
    if (!sol.has_incumbent()) return finish(MilpStatus::infeasible);
    sol.bound = sol.objective;
    return finish(MilpStatus::optimal);
}

/// Exhaustive oracle: solves the LP of every binary assignment. Ties keep the
/// lexicographically smallest assignment.
inline MilpSolution enumerate_oracle(const MilpModel& model, LpOptions lp_opt = {}) {
    std::vector<int> bins;
    for (int j = 0; j < model.num_vars(); ++j)
        if (model.variable(j).kind == VarKind::binary) bins.push_back(j);
    if (bins.size() > 20) throw DomainError("enumerate_oracle: more than 20 binaries");
    const auto t0 = std::chrono::steady_clock::now();
    MilpSolution sol;
    LpEngine eng(model, lp_opt);
    const auto nb = static_cast<int>(bins.size());
    bool unbounded = false, found = false;
    for (long mask = 0; mask < (1L << nb); ++mask) {
        bool skip = false;
        for (int k = 0; k < nb; ++k) {
            // bins[0] is the most significant bit, so masks run in lexicographic order.
            const double v = static_cast<double>((mask >> (nb - 1 - k)) & 1L);
            const auto& var = model.variable(bins[static_cast<std::size_t>(k)]);
            if (v < var.lower || v > var.upper) skip = true;
            else eng.set_bounds(bins[static_cast<std::size_t>(k)], v, v);
        }
        if (skip) continue;
        const LpResult r = eng.solve();
        ++sol.nodes;
        if (r.status == LpStatus::unbounded) unbounded = true;
        if (r.status != LpStatus::optimal) continue;
        if (r.objective < sol.objective - 1e-9) {
            found = true;
            sol.objective = r.objective;
            sol.x = r.x;
            for (int j : bins) sol.x[static_cast<std::size_t>(j)] = std::round(sol.x[static_cast<std::size_t>(j)]);
        }
    }
    sol.lp_iterations = eng.total_iterations();
    sol.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (unbounded) sol.status = MilpStatus::unbounded;
    else if (found) {
        sol.status = MilpStatus::optimal;
        sol.bound = sol.objective;
        sol.gap = 0.0;
    } else {
        sol.status = MilpStatus::infeasible;
    }
    return sol;
}

}  // namespace gsmpc
