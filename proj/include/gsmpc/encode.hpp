#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsmpc/afr.hpp"
#include "gsmpc/errors.hpp"
#include "gsmpc/lti.hpp"
#include "gsmpc/milp_model.hpp"
#include "gsmpc/stl.hpp"

namespace gsmpc {

using Terms = std::vector<std::pair<int, double>>;

// ------------------------------------------------------------------ dynamics

/// Variable indices created by encode_dynamics: x[k][i] for k = 0..N and
/// u[k][j] for k = 0..N-1.
struct DynamicsVars {
    std::vector<std::vector<int>> x;
    std::vector<std::vector<int>> u;
};

/// Adds x(k+1) = A x(k) + B u(k) + w for k = 0..N-1 and fixes x(0) = x0, where
/// w is the constant disturbance column (may be empty for none). Controls are
/// free continuous variables; callers restrict them.
inline DynamicsVars encode_dynamics(MilpModel& m, const LtiSystem& dsys, int N, const Vector& x0,
                                    const Vector& w = Vector()) {
    if (N < 1) throw DomainError("encode_dynamics: N must be at least 1");
    if (!dsys.is_discrete()) throw DomainError("encode_dynamics: system must be discrete");
    const auto n = dsys.states(), p = dsys.inputs();
    if (x0.size() != n) throw DomainError("encode_dynamics: x0 has the wrong length");
    if (w.size() != 0 && w.size() != n) throw DomainError("encode_dynamics: disturbance column has the wrong length");
    const double inf = MilpModel::inf;
    DynamicsVars v;
    v.x.resize(static_cast<std::size_t>(N) + 1);
    v.u.resize(static_cast<std::size_t>(N));
    for (int k = 0; k <= N; ++k)
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::string& q = dsys.state_names[static_cast<std::size_t>(i)];
            v.x[static_cast<std::size_t>(k)].push_back(m.add_continuous(q + "_" + std::to_string(k), -inf, inf, {q, k}));
        }
    for (int k = 0; k < N; ++k)
        for (Eigen::Index j = 0; j < p; ++j) {
            const std::string& q = dsys.input_names[static_cast<std::size_t>(j)];
            v.u[static_cast<std::size_t>(k)].push_back(m.add_continuous(q + "_" + std::to_string(k), -inf, inf, {q, k}));
        }
    for (Eigen::Index i = 0; i < n; ++i)
        m.add_constraint({{v.x[0][static_cast<std::size_t>(i)], 1.0}}, Sense::eq, x0[i], "initial",
                         "init_" + dsys.state_names[static_cast<std::size_t>(i)]);
    for (int k = 0; k < N; ++k) {
        const auto& xk = v.x[static_cast<std::size_t>(k)];
        const auto& xn = v.x[static_cast<std::size_t>(k) + 1];
        const auto& uk = v.u[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < n; ++i) {
            Terms t{{xn[static_cast<std::size_t>(i)], 1.0}};
            for (Eigen::Index j = 0; j < n; ++j)
                if (dsys.A(i, j) != 0.0) t.emplace_back(xk[static_cast<std::size_t>(j)], -dsys.A(i, j));
            for (Eigen::Index j = 0; j < p; ++j)
                if (dsys.B(i, j) != 0.0) t.emplace_back(uk[static_cast<std::size_t>(j)], -dsys.B(i, j));
            m.add_constraint(std::move(t), Sense::eq, w.size() ? w[i] : 0.0, "dynamics",
                             "dyn_" + dsys.state_names[static_cast<std::size_t>(i)] + "_" + std::to_string(k));
        }
    }
    return v;
}

// ----------------------------------------------------------------------- STL

/// A channel sample as an affine function of model variables.
struct AffineTerm {
    Terms coefs;
    double constant = 0.0;
};

/// Resolves (channel, step) to model variables; nullopt when the channel is
/// unknown.
using ChannelMap = std::function<std::optional<AffineTerm>(const std::string&, int)>;

enum class BigM {
    tight,   // per row: max of the predicate margin over the channel box
    uniform  // 2 (sum |a_i| bound_i + |c|)
};

struct StlEncodeOptions {
    double delta_strict = 1e-6;
    BigM big_m = BigM::tight;
    std::string prefix = "p";  // indicator name prefix
};

struct StlEncoding {
    int root = -1;              // root indicator variable, -1 when the root folded to a constant
    bool root_constant = true;  // value of the folded root (only meaningful when root < 0)
    int indicators = 0;
    int rows = 0;
};

namespace stl_detail {

/// An indicator: a binary variable, or a constant when the window folded.
struct Lit {
    int var = -1;
    bool value = false;
    bool is_const() const { return var < 0; }
    static Lit constant(bool b) { return {-1, b}; }
};

/// Negation normal form node. Predicates carry a strict flag for the negated
/// forms (expr < c, expr > c).
struct Nnf {
    stl::Op op;
    stl::LinearExpr expr;
    stl::Rel rel = stl::Rel::le;
    double threshold = 0;
    bool strict = false;
    bool release = false;  // until node standing for its negation
    stl::Interval interval;
    std::vector<std::shared_ptr<const Nnf>> children;
};
using NnfPtr = std::shared_ptr<const Nnf>;

inline NnfPtr to_nnf(const stl::FormulaPtr& f, bool neg) {
    using stl::Op;
    auto n = std::make_shared<Nnf>();
    switch (f->op) {
        case Op::predicate:
            n->op = Op::predicate;
            n->expr = f->expr;
            n->threshold = f->threshold;
            n->rel = neg ? (f->rel == stl::Rel::le ? stl::Rel::ge : stl::Rel::le) : f->rel;
            n->strict = neg;
            return n;
        case Op::negation:
            return to_nnf(f->children[0], !neg);
        case Op::implication:
            n->op = neg ? Op::conjunction : Op::disjunction;
            n->children = {to_nnf(f->children[0], !neg), to_nnf(f->children[1], neg)};
            return n;
        case Op::conjunction:
        case Op::disjunction: {
            const bool conj = (f->op == Op::conjunction) != neg;
            n->op = conj ? Op::conjunction : Op::disjunction;
            for (const auto& c : f->children) n->children.push_back(to_nnf(c, neg));
            return n;
        }
        case Op::always:
        case Op::eventually: {
            const bool all = (f->op == Op::always) != neg;
            n->op = all ? Op::always : Op::eventually;
            n->interval = f->interval;
            n->children = {to_nnf(f->children[0], neg)};
            return n;
        }
        case Op::until:
            // not (l U r): every r-candidate in the window is false or preceded by a false l.
            n->op = Op::until;
            n->release = neg;
            n->interval = f->interval;
            n->children = {to_nnf(f->children[0], neg), to_nnf(f->children[1], neg)};
            return n;
    }
    return n;
}

/// One-sided big-M encoding: an indicator equal to 1 forces its subformula to
/// hold. Only positive occurrences remain after NNF, so this direction is all
/// that satisfaction needs, and every satisfying trace admits a feasible
/// indicator assignment (its truth values).
class Encoder {
public:
    Encoder(MilpModel& m, const ChannelMap& map, int samples, double t_s, const std::map<std::string, double>& bounds,
            const StlEncodeOptions& opt)
        : m_(m), map_(map), n_(samples), t_s_(t_s), bounds_(bounds), opt_(opt) {}

    Lit at(const NnfPtr& f, int k) {
        auto key = std::make_pair(f.get(), k);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        const Lit l = build(f, k);
        memo_.emplace(key, l);
        return l;
    }

    int indicators = 0;
    int rows = 0;

private:
    MilpModel& m_;
    const ChannelMap& map_;
    int n_;
    double t_s_;
    const std::map<std::string, double>& bounds_;
    StlEncodeOptions opt_;
    std::map<std::pair<const Nnf*, int>, Lit> memo_;
    std::map<std::pair<const Nnf*, int>, Lit> suffix_;  // unbounded always/eventually chains

    int new_indicator(int k) {
        ++indicators;
        return m_.add_binary(opt_.prefix + std::to_string(indicators) + "_" + std::to_string(k), {"stl", k});
    }

    void row(Terms t, Sense s, double rhs) {
        ++rows;
        m_.add_constraint(std::move(t), s, rhs, "stl", "stl" + std::to_string(rows));
    }

    std::pair<int, int> span(const stl::Interval& iv, int k) const {
        const stl::Window w = stl::window(iv, t_s_);
        const long first = static_cast<long>(k) + static_cast<long>(w.lo);
        long last = n_ - 1;
        if (w.hi != std::numeric_limits<std::size_t>::max())
            last = std::min<long>(last, static_cast<long>(k) + static_cast<long>(w.hi));
        return {static_cast<int>(std::min<long>(first, n_)), static_cast<int>(last)};
    }

    Lit predicate(const Nnf& f, int k) {
        AffineTerm a{{}, 0.0};
        double range = 0;
        for (const auto& [name, coef] : f.expr.terms) {
            const auto r = map_(name, k);
            if (!r) throw UnknownVariableError(name);
            auto b = bounds_.find(name);
            if (b == bounds_.end() || !(b->second >= 0) || !std::isfinite(b->second))
                throw DomainError("encode_stl: no big-M bound for channel '" + name + "'");
            for (const auto& [j, c] : r->coefs) a.coefs.emplace_back(j, coef * c);
            a.constant += coef * r->constant;
            range += std::abs(coef) * b->second;
        }
        const double delta = f.strict ? opt_.delta_strict : 0.0;
        // Largest violation of expr <= c - delta (or expr >= c + delta) on the box.
        const double worst = f.rel == stl::Rel::le ? range + a.constant - f.threshold + delta
                                                   : range - a.constant + f.threshold + delta;
        const double M = opt_.big_m == BigM::uniform ? 2.0 * (range + std::abs(f.threshold)) : std::max(0.0, worst);
        const int p = new_indicator(k);
        Terms t = a.coefs;
        if (f.rel == stl::Rel::le) {
            // p = 1  =>  expr <= c - delta
            t.emplace_back(p, M);
            row(std::move(t), Sense::le, f.threshold - delta - a.constant + M);
        } else {
            // p = 1  =>  expr >= c + delta
            t.emplace_back(p, -M);
            row(std::move(t), Sense::ge, f.threshold + delta - a.constant - M);
        }
        return {p, false};
    }

    /// p <= each child (conjunction) or p <= sum of children (disjunction).
    Lit combine(bool conj, const std::vector<Lit>& kids, int k) {
        std::vector<int> vars;
        for (const Lit& l : kids) {
            if (l.is_const()) {
                if (conj && !l.value) return Lit::constant(false);
                if (!conj && l.value) return Lit::constant(true);
                continue;
            }
            vars.push_back(l.var);
        }
        if (vars.empty()) return Lit::constant(conj);
        if (vars.size() == 1) return {vars[0], false};
        const int p = new_indicator(k);
        if (conj) {
            for (int v : vars) row({{p, 1.0}, {v, -1.0}}, Sense::le, 0.0);
        } else {
            Terms t{{p, 1.0}};
            for (int v : vars) t.emplace_back(v, -1.0);
            row(std::move(t), Sense::le, 0.0);
        }
        return {p, false};
    }

    /// Indicator for "child holds at every (some) sample j >= k".
    Lit suffix(const NnfPtr& child, bool all, int k) {
        if (k >= n_) return Lit::constant(all);
        auto key = std::make_pair(child.get(), all ? k : -1 - k);
        if (auto it = suffix_.find(key); it != suffix_.end()) return it->second;
        // Build from the end so the chain is created iteratively.
        Lit next = Lit::constant(all);
        for (int j = n_ - 1; j >= k; --j) {
            auto kj = std::make_pair(child.get(), all ? j : -1 - j);
            if (auto it = suffix_.find(kj); it != suffix_.end()) {
                next = it->second;
                continue;
            }
            next = combine(all, {at(child, j), next}, j);
            suffix_.emplace(kj, next);
        }
        return next;
    }

    Lit build(const NnfPtr& fp, int k) {
        using stl::Op;
        const Nnf& f = *fp;
        switch (f.op) {
            case Op::predicate:
                return predicate(f, k);
            case Op::conjunction:
            case Op::disjunction: {
                std::vector<Lit> kids;
                for (const auto& c : f.children) kids.push_back(at(c, k));
                return combine(f.op == Op::conjunction, kids, k);
            }
            case Op::always:
            case Op::eventually: {
                const bool all = f.op == Op::always;
                const auto [a, b] = span(f.interval, k);
                // F[a,b] G[a',inf) psi: suffixes only grow, so the latest start
                // in the window decides. G[a,b] F[a',inf) is the dual.
                const Nnf& c = *f.children[0];
                if (a <= b && (c.op == Op::always || c.op == Op::eventually) && c.op != f.op &&
                    !std::isfinite(c.interval.b)) {
                    const auto [ca, cb] = span(c.interval, b);
                    (void)cb;
                    return suffix(c.children[0], c.op == Op::always, ca);
                }
                if (!std::isfinite(f.interval.b)) return suffix(f.children[0], all, a);
                std::vector<Lit> kids;
                for (int j = a; j <= b; ++j) kids.push_back(at(f.children[0], j));
                return combine(all, kids, k);
            }
            case Op::until: {
                const auto [a, b] = span(f.interval, k);
                const bool rel = f.release;
                std::vector<Lit> options;
                for (int j = a; j <= b; ++j) {
                    std::vector<Lit> inner{at(f.children[1], j)};
                    for (int i = k; i < j; ++i) inner.push_back(at(f.children[0], i));
                    options.push_back(combine(!rel, inner, k));
                }
                return combine(rel, options, k);
            }
            default:
                break;
        }
        throw DomainError("encode_stl: unexpected operator after normalization");
    }
};

}  // namespace stl_detail

/// Encodes satisfaction of `phi` at sample 0 of a trace with `samples`
/// samples (k = 0..samples-1) spaced `t_s` apart. `bounds` gives |channel|
/// bounds used for the big-M constants; the model must keep every channel
/// inside its bound or satisfying traces may be cut off.
///
/// The root indicator is fixed to 1. When the root folds to constant false
/// the model gets an infeasible row in family "stl".
inline StlEncoding encode_stl(MilpModel& m, const stl::FormulaPtr& phi, const ChannelMap& map, int samples,
                              double t_s, const std::map<std::string, double>& bounds,
                              const StlEncodeOptions& opt = {}) {
    if (samples < 1) throw DomainError("encode_stl: need at least one sample");
    if (!(t_s > 0)) throw DomainError("encode_stl: t_s must be positive");
    for (const auto& v : stl::variables(phi))
        if (!map(v, 0)) throw UnknownVariableError(v);
    const auto nnf = stl_detail::to_nnf(phi, false);
    stl_detail::Encoder enc(m, map, samples, t_s, bounds, opt);
    const stl_detail::Lit root = enc.at(nnf, 0);
    StlEncoding out;
    if (root.is_const()) {
        out.root_constant = root.value;
        if (!root.value) {
            // 0 >= 1 on an empty row keeps the infeasibility visible in exports.
            m.add_constraint({}, Sense::ge, 1.0, "stl", "stl_root_false");
            ++enc.rows;
        }
    } else {
        out.root = root.var;
        m.add_constraint({{root.var, 1.0}}, Sense::eq, 1.0, "stl", "stl_root");
        ++enc.rows;
    }
    out.indicators = enc.indicators;
    out.rows = enc.rows;
    return out;
}

// ----------------------------------------------------------------------- MPC

/// The scheduling problem in the units of the AFR model.
struct MpcProblem {
    DiscreteAfr afr;            // discretized at t_s
    double horizon = 4.0;       // T (s)
    double block = 0.1;         // control interval (s)
    double dP_d = 0.7;          // worst-case contingency (MW)
    double u_C = -0.05;         // fixed input magnitude (pu)
    double w1 = 1.0;            // weight on total on-time
    double w2 = 10.0;           // weight on start-ups
    double f_d_lim = 0.5;       // |x1| limit (Hz)
    double f_w_lim = 2.0;       // |x4|, |x5| limit
    stl::FormulaPtr phi;        // null when the TLS is removed
    double freeze_until = 0.0;  // blocks starting before this time are held at 0 (s)
    Vector x0 = Vector::Zero(5);
    double freq_bound = 10.0;   // default |channel| bound for Hz channels
    double pu_bound = 1.0;      // default |channel| bound for pu channels
    StlEncodeOptions stl_options;

    double t_s() const {
        if (!afr.sys.sample_time) throw DomainError("MpcProblem: AFR model is not discrete");
        return *afr.sys.sample_time;
    }
};

/// Integral quotient a / b, or an error naming both.
inline int integral_ratio(double a, double b, const char* what) {
    const double r = a / b;
    const double n = std::round(r);
    if (!(n >= 1) || std::abs(r - n) > 1e-9 * std::max(1.0, r))
        throw DomainError(std::string("inconsistent horizon/blocking: ") + what + " = " + std::to_string(r) +
                          " is not a positive integer");
    return static_cast<int>(n);
}

struct MpcEncoding {
    MilpModel model;
    DynamicsVars dyn;
    std::vector<std::vector<int>> b;  // b[i][j]: WTG i, block j
    std::vector<std::vector<int>> z;  // z[i][j], -1 outside the start-up range
    StlEncoding stl;
    int steps = 0;         // N
    int blocks = 0;        // number of control intervals
    int steps_per_block = 0;
    int frozen_blocks = 0;
    std::map<std::string, double> channel_bounds;

    int block_of(int k) const { return std::min(k / steps_per_block, blocks - 1); }
};

/// Maps AFR channel names (states and outputs) at step k onto the encoding's
/// variables. Outputs at the last sample reuse the last control.
inline ChannelMap afr_channel_map(const LtiSystem& sys, const DynamicsVars& dyn) {
    return [&sys, &dyn](const std::string& name, int k) -> std::optional<AffineTerm> {
        if (k < 0 || k >= static_cast<int>(dyn.x.size())) return std::nullopt;
        const auto& xk = dyn.x[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < sys.state_names.size(); ++i)
            if (sys.state_names[i] == name) return AffineTerm{{{xk[i], 1.0}}, 0.0};
        for (std::size_t r = 0; r < sys.output_names.size(); ++r) {
            if (sys.output_names[r] != name) continue;
            AffineTerm t;
            const auto ri = static_cast<Eigen::Index>(r);
            for (Eigen::Index i = 0; i < sys.states(); ++i)
                if (sys.C(ri, i) != 0.0) t.coefs.emplace_back(xk[static_cast<std::size_t>(i)], sys.C(ri, i));
            const auto& uk = dyn.u[static_cast<std::size_t>(std::min<int>(k, static_cast<int>(dyn.u.size()) - 1))];
            for (Eigen::Index j = 0; j < sys.inputs(); ++j)
                if (sys.D(ri, j) != 0.0) t.coefs.emplace_back(uk[static_cast<std::size_t>(j)], sys.D(ri, j));
            return t;
        }
        return std::nullopt;
    };
}

/// Builds the scheduling MILP.
///
/// Rows, with N steps, n_b blocks and n_phi STL rows:
///   5 (initial) + 5N (dynamics) + 2N (input link) + 2N (|x1| limit)
///   + 4N (|x4|, |x5| limits) + 3*2*(n_b - 2) (start-up) + n_phi.
/// Objective: w1 sum b + w2 sum_{j=1}^{n_b-2} (b(j) - z(j)).
inline MpcEncoding encode_mpc(const MpcProblem& p) {
    const double t_s = p.t_s();
    const auto& sys = p.afr.sys;
    if (sys.states() != 5 || sys.inputs() != 2) throw DomainError("encode_mpc: expected the 5-state, 2-input AFR");
    if (!std::isfinite(p.u_C)) throw DomainError("encode_mpc: u_C must be finite");
    if (!(p.f_d_lim > 0) || !(p.f_w_lim > 0)) throw DomainError("encode_mpc: limits must be positive");
    if (!(p.w1 >= 0) || !(p.w2 >= 0)) throw DomainError("encode_mpc: weights must be non-negative");

    MpcEncoding e;
    e.steps = integral_ratio(p.horizon, t_s, "T/t_s");
    e.blocks = integral_ratio(p.horizon, p.block, "T/dt_u");
    e.steps_per_block = integral_ratio(p.block, t_s, "dt_u/t_s");
    const int N = e.steps, nb = e.blocks;
    MilpModel& m = e.model;

    const Vector w = p.afr.Bd * p.dP_d;
    e.dyn = encode_dynamics(m, sys, N, p.x0, w);

    // Boolean inputs and their link to the continuous controls.
    e.b.assign(2, {});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < nb; ++j)
            e.b[static_cast<std::size_t>(i)].push_back(
                m.add_binary("b" + std::to_string(i + 1) + "_" + std::to_string(j), {"b" + std::to_string(i + 1), j}));
    for (int j = 0; j < nb; ++j) {
        if (static_cast<double>(j) * p.block < p.freeze_until - 1e-12) {
            e.frozen_blocks = j + 1;
            for (int i = 0; i < 2; ++i) m.set_bounds(e.b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 0, 0);
        }
    }
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < 2; ++i)
            m.add_constraint({{e.dyn.u[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)], 1.0},
                              {e.b[static_cast<std::size_t>(i)][static_cast<std::size_t>(e.block_of(k))], -p.u_C}},
                             Sense::eq, 0.0, "input_link", "link" + std::to_string(i + 1) + "_" + std::to_string(k));

    // Magnitude limits as paired inequalities.
    auto limit = [&](int state, double lim, const char* family) {
        for (int k = 1; k <= N; ++k) {
            const int v = e.dyn.x[static_cast<std::size_t>(k)][static_cast<std::size_t>(state)];
            const std::string tag = sys.state_names[static_cast<std::size_t>(state)] + "_" + std::to_string(k);
            if (std::isfinite(lim)) {
                m.add_constraint({{v, 1.0}}, Sense::le, lim, family, "ub_" + tag);
                m.add_constraint({{v, 1.0}}, Sense::ge, -lim, family, "lb_" + tag);
            }
        }
    };
    limit(0, p.f_d_lim, "freq_limit");
    limit(3, p.f_w_lim, "speed_limit");
    limit(4, p.f_w_lim, "speed_limit");

    // Start-up cost: z(j) = b(j) b(j-1) for j = 1..nb-2.
    e.z.assign(2, std::vector<int>(static_cast<std::size_t>(nb), -1));
    for (int i = 0; i < 2; ++i) {
        const auto& bi = e.b[static_cast<std::size_t>(i)];
        for (int j = 0; j < nb; ++j) m.add_objective(bi[static_cast<std::size_t>(j)], p.w1);
        for (int j = 1; j <= nb - 2; ++j) {
            const std::string nm = "z" + std::to_string(i + 1) + "_" + std::to_string(j);
            const int z = m.add_binary(nm, {"z" + std::to_string(i + 1), j});
            e.z[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = z;
            const int b1 = bi[static_cast<std::size_t>(j)], b0 = bi[static_cast<std::size_t>(j) - 1];
            m.add_constraint({{z, 1.0}, {b1, -1.0}}, Sense::le, 0.0, "startup", nm + "_a");
            m.add_constraint({{z, 1.0}, {b0, -1.0}}, Sense::le, 0.0, "startup", nm + "_b");
            m.add_constraint({{z, 1.0}, {b1, -1.0}, {b0, -1.0}}, Sense::ge, -1.0, "startup", nm + "_c");
            m.add_objective(b1, p.w2);
            m.add_objective(z, -p.w2);
        }
    }

    // Big-M bounds: the tighter of the channel default and its limit.
    for (std::size_t i = 0; i < sys.state_names.size(); ++i) {
        double bound = i == 0 ? p.freq_bound : p.pu_bound;
        if (i == 0) bound = std::min(bound, p.f_d_lim);
        if (i == 3 || i == 4) bound = std::min(bound, p.f_w_lim);
        e.channel_bounds[sys.state_names[i]] = bound;
    }
    for (const auto& o : sys.output_names) e.channel_bounds[o] = p.pu_bound;

    if (p.phi) {
        const ChannelMap map = afr_channel_map(sys, e.dyn);
        e.stl = encode_stl(m, p.phi, map, N + 1, t_s, e.channel_bounds, p.stl_options);
    }
    return e;
}

/// Per-WTG Boolean sequences of a solution.
inline std::vector<std::vector<int>> extract_schedule(const MpcEncoding& e, const std::vector<double>& x) {
    std::vector<std::vector<int>> out(e.b.size());
    for (std::size_t i = 0; i < e.b.size(); ++i)
        for (int v : e.b[i]) out[i].push_back(static_cast<int>(std::lround(x[static_cast<std::size_t>(v)])));
    return out;
}

/// Total on-time C_U: the number of active intervals.
inline int control_effort(const std::vector<int>& b) {
    int s = 0;
    for (int v : b) s += v;
    return s;
}

/// Start-up count: sum of b(k)(1 - b(k-1)) over k = 1..T-2 (0-indexed).
inline int startup_count(const std::vector<int>& b) {
    int s = 0;
    for (std::size_t k = 1; k + 1 < b.size(); ++k) s += b[k] * (1 - b[k - 1]);
    return s;
}

}  // namespace gsmpc
