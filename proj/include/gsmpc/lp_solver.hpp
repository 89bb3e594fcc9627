#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gsmpc/errors.hpp"
#include "gsmpc/milp_model.hpp"

namespace gsmpc {

enum class LpStatus { optimal, infeasible, unbounded, cutoff, limit };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::cutoff: return "cutoff";
        case LpStatus::limit: return "limit-reached";
    }
    return "?";
}

struct LpOptions {
    double feasibility_tol = 1e-7;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-9;
    int refactor_interval = 200;
    long max_iterations = 200000;
    int degenerate_switch = 50;  // consecutive degenerate pivots before Bland's rule
};

struct LpResult {
    LpStatus status = LpStatus::limit;
    double objective = 0.0;
    std::vector<double> x;             // structural values
    std::vector<double> reduced_cost;  // structural reduced costs (optimal only)
    long iterations = 0;
    bool bound_valid = false;  // objective is a valid lower bound (always for optimal)
    std::string diagnostics;
};

/// Bounded-variable revised simplex on rows lo <= a'x <= hi.
///
/// Every row i gets a logical variable s_i = a_i'x carrying the row bounds, so
/// the working system is [A  -I] (x; s) = 0 with bounds on all columns. The
/// basis is held as a sparse LU factorization plus a product-form eta file
/// that is refactored every `refactor_interval` updates.
///
/// The engine is warm: bounds of structural columns can be changed between
/// solves and the next solve restarts from the previous basis with the dual
/// simplex, which is what branch and bound needs.
class LpEngine {
public:
    static constexpr double inf = std::numeric_limits<double>::infinity();

    explicit LpEngine(const MilpModel& m, LpOptions opt = {}) : opt_(opt) {
        n_ = m.num_vars();
        m_ = m.num_constraints();
        const int total = n_ + m_;
        lo_.resize(static_cast<std::size_t>(total));
        hi_.resize(static_cast<std::size_t>(total));
        cost_.assign(static_cast<std::size_t>(total), 0.0);
        for (int j = 0; j < n_; ++j) {
            lo_[static_cast<std::size_t>(j)] = m.variable(j).lower;
            hi_[static_cast<std::size_t>(j)] = m.variable(j).upper;
            cost_[static_cast<std::size_t>(j)] = m.objective()[static_cast<std::size_t>(j)];
        }
        std::vector<std::vector<std::pair<int, double>>> cols(static_cast<std::size_t>(n_));
        for (int i = 0; i < m_; ++i) {
            const auto& c = m.constraints()[static_cast<std::size_t>(i)];
            for (const auto& [j, v] : c.coefs)
                if (v != 0.0) cols[static_cast<std::size_t>(j)].emplace_back(i, v);
            const auto li = static_cast<std::size_t>(n_ + i);
            lo_[li] = c.sense == Sense::le ? -inf : c.rhs;
            hi_[li] = c.sense == Sense::ge ? inf : c.rhs;
        }
        col_start_.push_back(0);
        for (auto& col : cols) {
            // Merge duplicate entries of one variable in a row.
            std::sort(col.begin(), col.end());
            for (std::size_t k = 0; k < col.size(); ++k) {
                if (k > 0 && col[k].first == col[k - 1].first) {
                    val_.back() += col[k].second;
                    continue;
                }
                row_idx_.push_back(col[k].first);
                val_.push_back(col[k].second);
            }
            col_start_.push_back(static_cast<int>(row_idx_.size()));
        }
        orig_lo_ = lo_;
        orig_hi_ = hi_;
        reset_basis();
    }

    int num_structural() const { return n_; }
    int num_rows() const { return m_; }

    double lower(int j) const { return lo_[static_cast<std::size_t>(j)]; }
    double upper(int j) const { return hi_[static_cast<std::size_t>(j)]; }

    /// Changes the bounds of structural column j for subsequent solves.
    void set_bounds(int j, double lo, double hi) {
        if (j < 0 || j >= n_) throw DomainError("LpEngine::set_bounds: column out of range");
        if (!(lo <= hi)) throw DomainError("LpEngine::set_bounds: lower > upper");
        const auto u = static_cast<std::size_t>(j);
        if (lo_[u] == lo && hi_[u] == hi) return;
        lo_[u] = orig_lo_[u] = lo;
        hi_[u] = orig_hi_[u] = hi;
        if (status_[u] != Status::basic) {
            place_nonbasic(j);
            xb_dirty_ = true;
        }
    }

    /// Discards the current basis and starts from the all-logical one.
    void reset_basis() {
        const int total = n_ + m_;
        status_.assign(static_cast<std::size_t>(total), Status::at_lower);
        x_.assign(static_cast<std::size_t>(total), 0.0);
        d_.assign(static_cast<std::size_t>(total), 0.0);
        head_.resize(static_cast<std::size_t>(m_));
        weight_.assign(static_cast<std::size_t>(m_), 1.0);
        for (int i = 0; i < m_; ++i) {
            head_[static_cast<std::size_t>(i)] = n_ + i;
            status_[static_cast<std::size_t>(n_ + i)] = Status::basic;
        }
        for (int j = 0; j < n_; ++j) {
            d_[static_cast<std::size_t>(j)] = cost_[static_cast<std::size_t>(j)];
            place_nonbasic(j);
        }
        need_refactor_ = true;
        xb_dirty_ = true;
    }

    /// Solves from the current basis. `cutoff` stops the dual simplex once the
    /// objective bound exceeds it (status cutoff); `iteration_limit` caps this
    /// call (negative: the engine-wide limit).
    LpResult solve(double cutoff = inf, long iteration_limit = -1) {
        const long limit = iteration_limit < 0 ? opt_.max_iterations : iteration_limit;
        LpResult res;
        try {
            res = solve_impl(cutoff, limit);
        } catch (const NumericalError& e) {
            // One retry from a clean basis before giving up.
            reset_basis();
            try {
                res = solve_impl(cutoff, limit);
                res.diagnostics = std::string("recovered after: ") + e.what();
            } catch (const NumericalError& e2) {
                res = LpResult{};
                res.status = LpStatus::limit;
                res.diagnostics = e2.what();
            }
        }
        total_iterations_ += res.iterations;
        return res;
    }

    /// Opaque copy of the basis, for temporary excursions such as strong
    /// branching.
    struct Basis {
        std::vector<unsigned char> status;
        std::vector<int> head;
        std::vector<double> weight;
    };

    Basis save_basis() const {
        Basis b;
        b.status.reserve(status_.size());
        for (Status s : status_) b.status.push_back(static_cast<unsigned char>(s));
        b.head = head_;
        b.weight = weight_;
        return b;
    }

    /// Reinstates a saved basis; nonbasic columns are re-placed on the current
    /// bounds.
    void restore_basis(const Basis& b) {
        if (b.status.size() != status_.size() || b.head.size() != head_.size())
            throw DomainError("LpEngine::restore_basis: basis from a different model");
        for (std::size_t j = 0; j < status_.size(); ++j) status_[j] = static_cast<Status>(b.status[j]);
        head_ = b.head;
        weight_ = b.weight;
        for (int j = 0; j < n_ + m_; ++j) {
            const Status s = status_[u(j)];
            if (s == Status::basic) continue;
            const double lo = lo_[u(j)], hi = hi_[u(j)];
            if (lo == hi) {
                status_[u(j)] = Status::fixed;
                x_[u(j)] = lo;
            } else if (s == Status::at_upper && std::isfinite(hi)) {
                x_[u(j)] = hi;
            } else if (s != Status::free_nonbasic && std::isfinite(lo)) {
                status_[u(j)] = Status::at_lower;
                x_[u(j)] = lo;
            } else if (std::isfinite(hi)) {
                status_[u(j)] = Status::at_upper;
                x_[u(j)] = hi;
            } else {
                status_[u(j)] = Status::free_nonbasic;
                x_[u(j)] = 0.0;
            }
        }
        need_refactor_ = true;
        xb_dirty_ = true;
    }

    long total_iterations() const { return total_iterations_; }

private:
    enum class Status : unsigned char { basic, at_lower, at_upper, free_nonbasic, fixed };

    struct Eta {
        int r;
        double pivot;
        std::vector<std::pair<int, double>> col;  // off-pivot entries of the entering column
    };

    LpOptions opt_;
    int n_ = 0, m_ = 0;
    std::vector<int> col_start_, row_idx_;
    std::vector<double> val_;
    std::vector<double> lo_, hi_, orig_lo_, orig_hi_, cost_;
    std::vector<Status> status_;
    std::vector<double> x_, d_;
    std::vector<int> head_;
    std::vector<double> weight_;  // dual steepest-edge weights by basis position
    std::vector<char> boxed_;
    bool any_boxed_ = false;
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;
    bool need_refactor_ = true;
    bool xb_dirty_ = true;
    long total_iterations_ = 0;

    static constexpr double box_bound = 1e6;

    // ------------------------------------------------------------ helpers

    std::size_t u(int j) const { return static_cast<std::size_t>(j); }

    /// Puts a nonbasic column on the bound its reduced cost prefers.
    void place_nonbasic(int j) {
        const double lo = lo_[u(j)], hi = hi_[u(j)], d = d_[u(j)];
        Status s;
        double v;
        if (lo == hi) {
            s = Status::fixed;
            v = lo;
        } else if (std::isfinite(lo) && std::isfinite(hi)) {
            const bool up = d < 0;
            s = up ? Status::at_upper : Status::at_lower;
            v = up ? hi : lo;
        } else if (std::isfinite(lo)) {
            s = Status::at_lower;
            v = lo;
        } else if (std::isfinite(hi)) {
            s = Status::at_upper;
            v = hi;
        } else {
            s = Status::free_nonbasic;
            v = 0.0;
        }
        status_[u(j)] = s;
        x_[u(j)] = v;
    }

    template <typename F>
    void for_column(int j, F&& f) const {
        if (j < n_) {
            for (int k = col_start_[u(j)]; k < col_start_[u(j + 1)]; ++k) f(row_idx_[u(k)], val_[u(k)]);
        } else {
            f(j - n_, -1.0);
        }
    }

    void refactor() {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(m_) * 3);
        for (int i = 0; i < m_; ++i)
            for_column(head_[u(i)], [&](int r, double v) { trip.emplace_back(r, i, v); });
        Eigen::SparseMatrix<double> B(m_, m_);
        B.setFromTriplets(trip.begin(), trip.end());
        B.makeCompressed();
        if (m_ > 0) {
            lu_.analyzePattern(B);
            lu_.factorize(B);
            if (lu_.info() != Eigen::Success) throw NumericalError("singular basis matrix");
        }
        etas_.clear();
        need_refactor_ = false;
    }

    Eigen::VectorXd ftran(Eigen::VectorXd v) const {
        if (m_ == 0) return v;
        v = lu_.solve(v);
        for (const auto& e : etas_) {
            const double vr = v[e.r] / e.pivot;
            v[e.r] = vr;
            if (vr != 0.0)
                for (const auto& [i, a] : e.col) v[i] -= a * vr;
        }
        return v;
    }

    Eigen::VectorXd btran(Eigen::VectorXd v) const {
        if (m_ == 0) return v;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = v[it->r];
            for (const auto& [i, a] : it->col) s -= a * v[i];
            v[it->r] = s / it->pivot;
        }
        Eigen::VectorXd out = lu_.transpose().solve(v);
        return out;
    }

    Eigen::VectorXd column(int j) const {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(m_);
        for_column(j, [&](int r, double v) { c[r] += v; });
        return c;
    }

    double dot_column(const Eigen::VectorXd& y, int j) const {
        double s = 0;
        for_column(j, [&](int r, double v) { s += y[r] * v; });
        return s;
    }

    void compute_primal() {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
        for (int j = 0; j < n_ + m_; ++j) {
            if (status_[u(j)] == Status::basic) continue;
            const double v = x_[u(j)];
            if (v != 0.0) for_column(j, [&](int r, double a) { rhs[r] -= a * v; });
        }
        const Eigen::VectorXd xb = ftran(rhs);
        for (int i = 0; i < m_; ++i) x_[u(head_[u(i)])] = xb[i];
        xb_dirty_ = false;
    }

    void compute_duals() {
        Eigen::VectorXd cb(m_);
        for (int i = 0; i < m_; ++i) cb[i] = cost_[u(head_[u(i)])];
        const Eigen::VectorXd y = btran(cb);
        for (int j = 0; j < n_ + m_; ++j)
            d_[u(j)] = status_[u(j)] == Status::basic ? 0.0 : cost_[u(j)] - dot_column(y, j);
    }

    void refresh() {
        refactor();
        compute_primal();
        compute_duals();
    }

    double objective() const {
        double s = 0;
        for (int j = 0; j < n_; ++j) s += cost_[u(j)] * x_[u(j)];
        return s;
    }

    bool dual_infeasible(int j) const {
        const double d = d_[u(j)], tol = opt_.optimality_tol;
        switch (status_[u(j)]) {
            case Status::at_lower: return d < -tol;
            case Status::at_upper: return d > tol;
            case Status::free_nonbasic: return std::abs(d) > tol;
            default: return false;
        }
    }

    /// Gives dual-infeasible columns with an infinite bound a temporary box so
    /// that the dual simplex can start.
    void install_boxes() {
        boxed_.assign(u(n_ + m_), 0);
        any_boxed_ = false;
        for (int j = 0; j < n_ + m_; ++j) {
            const Status s = status_[u(j)];
            if (s == Status::basic || s == Status::fixed) continue;
            if (!dual_infeasible(j)) continue;
            const double d = d_[u(j)];
            if (std::isfinite(lo_[u(j)]) && std::isfinite(hi_[u(j)])) {
                place_nonbasic(j);  // finite box: just switch sides
                xb_dirty_ = true;
                continue;
            }
            if (d > 0 && !std::isfinite(lo_[u(j)])) lo_[u(j)] = -box_bound;
            if (d < 0 && !std::isfinite(hi_[u(j)])) hi_[u(j)] = box_bound;
            boxed_[u(j)] = 1;
            any_boxed_ = true;
            place_nonbasic(j);
            xb_dirty_ = true;
        }
    }

    /// Restores true bounds; returns true if a column still sits on a fake bound.
    bool remove_boxes() {
        bool on_fake = false;
        for (int j = 0; j < n_ + m_; ++j) {
            if (!boxed_.empty() && boxed_[u(j)]) {
                const double v = x_[u(j)];
                lo_[u(j)] = orig_lo_[u(j)];
                hi_[u(j)] = orig_hi_[u(j)];
                if (status_[u(j)] != Status::basic) {
                    if (v == lo_[u(j)]) status_[u(j)] = Status::at_lower;
                    else if (v == hi_[u(j)]) status_[u(j)] = Status::at_upper;
                    else {
                        status_[u(j)] = Status::free_nonbasic;
                        on_fake = true;
                    }
                }
            }
        }
        boxed_.clear();
        any_boxed_ = false;
        return on_fake;
    }

    double infeasibility(int j) const {
        const double v = x_[u(j)];
        const double lo = lo_[u(j)], hi = hi_[u(j)];
        const double tol = opt_.feasibility_tol * std::max(1.0, std::min(std::abs(v), 1e3));
        if (v < lo - tol) return lo - v;
        if (v > hi + tol) return v - hi;
        return 0.0;
    }

    void push_eta(int r, const Eigen::VectorXd& alpha) {
        Eta e;
        e.r = r;
        e.pivot = alpha[r];
        for (int i = 0; i < m_; ++i)
            if (i != r && alpha[i] != 0.0) e.col.emplace_back(i, alpha[i]);
        etas_.push_back(std::move(e));
    }

    /// Basis change: column q enters at position r; the leaving column moves to
    /// `leave_status` with value `leave_value`.
    void pivot(int r, int q, const Eigen::VectorXd& alpha_q, Status leave_status, double leave_value) {
        const int p = head_[u(r)];
        head_[u(r)] = q;
        status_[u(q)] = Status::basic;
        status_[u(p)] = leave_status;
        x_[u(p)] = leave_value;
        d_[u(q)] = 0.0;
        push_eta(r, alpha_q);
        if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) need_refactor_ = true;
    }

    // ------------------------------------------------------ dual simplex

    /// Returns optimal, infeasible, cutoff or limit. Assumes dual feasibility.
    ///
    /// Leaving rows are priced by dual steepest edge (infeasibility squared over
    /// the row norm of B^-1); weights start at 1 and are updated exactly.
    LpStatus dual_simplex(long& iterations, double cutoff, long limit) {
        std::vector<double> alpha_row(u(n_ + m_));
        int degenerate = 0;
        for (;;) {
            if (need_refactor_) refresh();
            if (xb_dirty_) compute_primal();
            if (iterations >= limit) return LpStatus::limit;
            const bool bland = degenerate > opt_.degenerate_switch;

            int r = -1;
            double best = 0;
            for (int i = 0; i < m_; ++i) {
                const double inf_i = infeasibility(head_[u(i)]);
                if (inf_i <= 0) continue;
                if (bland) {
                    if (r < 0 || head_[u(i)] < head_[u(r)]) r = i;
                    continue;
                }
                const double score = inf_i * inf_i / weight_[u(i)];
                if (score > best) {
                    best = score;
                    r = i;
                }
            }
            if (r < 0) return LpStatus::optimal;
            if (std::isfinite(cutoff) && !any_boxed_ &&
                objective() > cutoff + 1e-9 * std::max(1.0, std::abs(cutoff)))
                return LpStatus::cutoff;

            const int p = head_[u(r)];
            const bool below = x_[u(p)] < lo_[u(p)];
            Eigen::VectorXd er = Eigen::VectorXd::Zero(m_);
            er[r] = 1.0;
            const Eigen::VectorXd rho = btran(er);

            // Pivot row and ratio test: Harris two-pass normally, the plain
            // minimum ratio with lowest-index ties under Bland's rule.
            double theta_max = inf;
            for (int j = 0; j < n_ + m_; ++j) {
                const Status s = status_[u(j)];
                if (s == Status::basic || s == Status::fixed) continue;
                const double a = dot_column(rho, j);
                alpha_row[u(j)] = a;
                if (std::abs(a) <= opt_.pivot_tol) continue;
                if (!dual_candidate(s, a, below)) continue;
                const double slack = bland ? 0.0 : opt_.optimality_tol;
                theta_max = std::min(theta_max, (std::abs(d_[u(j)]) + slack) / std::abs(a));
            }
            if (!std::isfinite(theta_max)) return LpStatus::infeasible;
            int q = -1;
            double best_a = 0;
            for (int j = 0; j < n_ + m_; ++j) {
                const Status s = status_[u(j)];
                if (s == Status::basic || s == Status::fixed) continue;
                const double a = alpha_row[u(j)];
                if (std::abs(a) <= opt_.pivot_tol || !dual_candidate(s, a, below)) continue;
                const double ratio = std::abs(d_[u(j)]) / std::abs(a);
                if (bland) {
                    if (ratio <= theta_max * (1 + 1e-12) + 1e-15) {
                        q = j;
                        break;
                    }
                } else if (ratio <= theta_max && std::abs(a) > best_a) {
                    best_a = std::abs(a);
                    q = j;
                }
            }
            if (q < 0) return LpStatus::infeasible;

            Eigen::VectorXd alpha_q = ftran(column(q));
            const double arq = alpha_q[r];
            if (std::abs(arq - alpha_row[u(q)]) > 1e-7 * std::max(1.0, std::abs(arq))) {
                if (!etas_.empty()) {
                    need_refactor_ = true;
                    continue;
                }
                throw NumericalError("dual simplex: pivot mismatch after refactorization");
            }

            // Steepest-edge weights: w_i += -2 (a_i/a_r) tau_i + (a_i/a_r)^2 w_r.
            {
                const Eigen::VectorXd tau = ftran(rho);
                const double wr = std::max(rho.squaredNorm(), 1e-12);
                for (int i = 0; i < m_; ++i) {
                    if (i == r || alpha_q[i] == 0.0) continue;
                    const double ratio = alpha_q[i] / arq;
                    weight_[u(i)] = std::max(weight_[u(i)] + ratio * (ratio * wr - 2.0 * tau[i]), 1e-4);
                }
                weight_[u(r)] = std::max(wr / (arq * arq), 1e-4);
            }

            // Dual step.
            const double theta_d = d_[u(q)] / arq;
            for (int j = 0; j < n_ + m_; ++j) {
                const Status s = status_[u(j)];
                if (s == Status::basic || s == Status::fixed || j == q) continue;
                const double a = alpha_row[u(j)];
                if (a != 0.0) d_[u(j)] -= theta_d * a;
            }
            // Primal step.
            const double target = below ? lo_[u(p)] : hi_[u(p)];
            const double t = (x_[u(p)] - target) / arq;
            for (int i = 0; i < m_; ++i)
                if (alpha_q[i] != 0.0) x_[u(head_[u(i)])] -= t * alpha_q[i];
            x_[u(q)] += t;
            pivot(r, q, alpha_q, below ? Status::at_lower : Status::at_upper, target);
            d_[u(p)] = -theta_d;
            degenerate = std::abs(theta_d) <= 1e-12 ? degenerate + 1 : 0;
            ++iterations;
        }
    }

    static bool dual_candidate(Status s, double a, bool below) {
        // below: the leaving value must rise, so x_j must move so that -a*dx > 0.
        if (s == Status::free_nonbasic) return true;
        if (below) return (s == Status::at_lower && a < 0) || (s == Status::at_upper && a > 0);
        return (s == Status::at_lower && a > 0) || (s == Status::at_upper && a < 0);
    }

    // ----------------------------------------------------- primal simplex

    /// Returns optimal, unbounded or limit. Assumes primal feasibility.
    LpStatus primal_simplex(long& iterations, long limit) {
        int degenerate = 0;
        for (;;) {
            if (need_refactor_) refresh();
            if (xb_dirty_) compute_primal();
            if (iterations >= limit) return LpStatus::limit;

            int q = -1;
            double best = 0;
            for (int j = 0; j < n_ + m_; ++j) {
                if (!dual_infeasible(j)) continue;
                if (degenerate > opt_.degenerate_switch) {
                    q = j;  // Bland: lowest eligible index
                    break;
                }
                if (std::abs(d_[u(j)]) > best) {
                    best = std::abs(d_[u(j)]);
                    q = j;
                }
            }
            if (q < 0) return LpStatus::optimal;
            const double dir = d_[u(q)] < 0 ? 1.0 : -1.0;
            const Eigen::VectorXd alpha_q = ftran(column(q));

            // Harris two-pass ratio test over basic columns.
            const double tol = opt_.feasibility_tol;
            double t_max = inf;
            for (int i = 0; i < m_; ++i) {
                const double rate = -dir * alpha_q[i];
                if (std::abs(rate) <= opt_.pivot_tol) continue;
                const int b = head_[u(i)];
                if (rate < 0 && std::isfinite(lo_[u(b)]))
                    t_max = std::min(t_max, (x_[u(b)] - lo_[u(b)] + tol) / -rate);
                else if (rate > 0 && std::isfinite(hi_[u(b)]))
                    t_max = std::min(t_max, (hi_[u(b)] - x_[u(b)] + tol) / rate);
            }
            const double flip = hi_[u(q)] - lo_[u(q)];
            if (!std::isfinite(t_max) && !std::isfinite(flip)) return LpStatus::unbounded;

            int r = -1;
            double best_rate = 0, t = 0;
            for (int i = 0; i < m_; ++i) {
                const double rate = -dir * alpha_q[i];
                if (std::abs(rate) <= opt_.pivot_tol) continue;
                const int b = head_[u(i)];
                double ti;
                if (rate < 0 && std::isfinite(lo_[u(b)])) ti = (x_[u(b)] - lo_[u(b)]) / -rate;
                else if (rate > 0 && std::isfinite(hi_[u(b)])) ti = (hi_[u(b)] - x_[u(b)]) / rate;
                else continue;
                if (ti <= t_max && std::abs(rate) > best_rate) {
                    best_rate = std::abs(rate);
                    r = i;
                    t = std::max(ti, 0.0);
                }
            }
            if (std::isfinite(flip) && (r < 0 || flip <= t)) {
                // Bound flip of the entering column, no basis change.
                for (int i = 0; i < m_; ++i)
                    if (alpha_q[i] != 0.0) x_[u(head_[u(i)])] -= dir * flip * alpha_q[i];
                x_[u(q)] += dir * flip;
                status_[u(q)] = status_[u(q)] == Status::at_lower ? Status::at_upper : Status::at_lower;
                ++iterations;
                degenerate = 0;
                continue;
            }
            if (r < 0) return LpStatus::unbounded;

            const int p = head_[u(r)];
            const double rate_r = -dir * alpha_q[r];
            const bool to_lower = rate_r < 0;
            const double leave_value = to_lower ? lo_[u(p)] : hi_[u(p)];
            for (int i = 0; i < m_; ++i)
                if (alpha_q[i] != 0.0) x_[u(head_[u(i)])] -= dir * t * alpha_q[i];
            x_[u(q)] += dir * t;

            // Reduced-cost update through the pivot row.
            Eigen::VectorXd er = Eigen::VectorXd::Zero(m_);
            er[r] = 1.0;
            const Eigen::VectorXd rho = btran(er);
            const double theta_d = d_[u(q)] / alpha_q[r];
            for (int j = 0; j < n_ + m_; ++j) {
                if (status_[u(j)] == Status::basic || j == q) continue;
                const double a = dot_column(rho, j);
                if (a != 0.0) d_[u(j)] -= theta_d * a;
            }
            pivot(r, q, alpha_q, to_lower ? Status::at_lower : Status::at_upper, leave_value);
            d_[u(p)] = -theta_d;
            degenerate = t <= 1e-12 ? degenerate + 1 : 0;
            ++iterations;
        }
    }

    // ---------------------------------------------------------------- driver

    bool primal_feasible() const {
        for (int i = 0; i < m_; ++i)
            if (infeasibility(head_[u(i)]) > 0) return false;
        return true;
    }

    LpResult stop(LpStatus st, long it, bool bound_valid) {
        LpResult res;
        res.status = st;
        res.iterations = it;
        res.objective = objective();
        res.bound_valid = bound_valid;
        return res;
    }

    LpResult solve_impl(double cutoff, long limit) {
        long it = 0;
        if (need_refactor_) refresh();
        else compute_duals();
        // Columns whose reduced cost has the wrong sign for their bound are
        // moved to the other bound (or boxed when the bound is infinite).
        for (int j = 0; j < n_ + m_; ++j) {
            const Status s = status_[u(j)];
            if (s == Status::basic || s == Status::fixed) continue;
            if (dual_infeasible(j) && std::isfinite(lo_[u(j)]) && std::isfinite(hi_[u(j)])) {
                place_nonbasic(j);
                xb_dirty_ = true;
            }
        }
        install_boxes();
        if (xb_dirty_) compute_primal();

        LpStatus st = dual_simplex(it, cutoff, limit);
        const bool had_boxes = any_boxed_;
        remove_boxes();
        if (st != LpStatus::optimal) return stop(st, it, !had_boxes);

        // Clean-up: release columns left on fake bounds and repair anything the
        // tolerances let through.
        if (had_boxes) {
            refresh();
        } else {
            compute_primal();
            compute_duals();
        }
        if (!primal_feasible()) {
            st = dual_simplex(it, cutoff, limit);
            if (st != LpStatus::optimal) return stop(st, it, false);
        }
        const long before = it;
        st = primal_simplex(it, limit);
        if (st == LpStatus::optimal && it > before) {
            refresh();
            if (!primal_feasible()) {
                st = dual_simplex(it, cutoff, limit);
                if (st == LpStatus::optimal) st = primal_simplex(it, limit);
            }
        }
        LpResult res = stop(st, it, false);
        if (st == LpStatus::optimal) {
            res.bound_valid = true;
            res.x.assign(x_.begin(), x_.begin() + n_);
            res.reduced_cost.assign(d_.begin(), d_.begin() + n_);
        }
        return res;
    }
};

/// One-shot LP solve of the continuous relaxation of `m`.
inline LpResult solve_lp(const MilpModel& m, LpOptions opt = {}) {
    LpEngine eng(m, opt);
    return eng.solve();
}

}  // namespace gsmpc
