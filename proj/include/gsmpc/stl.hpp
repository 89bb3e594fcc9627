#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gsmpc/errors.hpp"
#include "gsmpc/trace.hpp"

namespace gsmpc::stl {

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// Affine expression sum(coef * variable) + constant over trace channels.
struct LinearExpr {
    std::vector<std::pair<std::string, double>> terms;
    double constant = 0.0;

    double evaluate(const Trace& tr, std::size_t k) const {
        double v = constant;
        for (const auto& [name, c] : terms) v += c * tr.channel(name)[k];
        return v;
    }

    LinearExpr negated() const {
        LinearExpr e = *this;
        for (auto& t : e.terms) t.second = -t.second;
        e.constant = -e.constant;
        return e;
    }

    bool operator==(const LinearExpr&) const = default;
};

enum class Rel { le, ge };

enum class Op { predicate, negation, conjunction, disjunction, implication, always, eventually, until };

struct Interval {
    double a = 0.0;
    double b = inf;
    bool operator==(const Interval&) const = default;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable formula node. Predicates read `expr rel threshold`.
struct Formula {
    Op op = Op::predicate;
    LinearExpr expr;
    Rel rel = Rel::le;
    double threshold = 0.0;
    Interval interval;
    std::vector<FormulaPtr> children;
};

// ---------------------------------------------------------------- builders

inline void check_interval(const Interval& i) {
    if (!(i.a >= 0) || !(i.b >= i.a) || std::isnan(i.b)) throw DomainError("interval must satisfy 0 <= a <= b");
}

inline FormulaPtr predicate(LinearExpr e, Rel rel, double threshold) {
    // Constants always live in the threshold.
    threshold -= e.constant;
    e.constant = 0.0;
    auto f = std::make_shared<Formula>();
    f->op = Op::predicate;
    f->expr = std::move(e);
    f->rel = rel;
    f->threshold = threshold;
    return f;
}

/// Single-variable predicate `name rel threshold`.
inline FormulaPtr predicate(const std::string& name, Rel rel, double threshold) {
    return predicate(LinearExpr{{{name, 1.0}}, 0.0}, rel, threshold);
}

inline FormulaPtr negation(FormulaPtr a) {
    auto f = std::make_shared<Formula>();
    f->op = Op::negation;
    f->children = {std::move(a)};
    return f;
}

inline FormulaPtr conjunction(std::vector<FormulaPtr> cs) {
    if (cs.empty()) throw DomainError("conjunction needs at least one operand");
    auto f = std::make_shared<Formula>();
    f->op = Op::conjunction;
    f->children = std::move(cs);
    return f;
}

inline FormulaPtr disjunction(std::vector<FormulaPtr> cs) {
    if (cs.empty()) throw DomainError("disjunction needs at least one operand");
    auto f = std::make_shared<Formula>();
    f->op = Op::disjunction;
    f->children = std::move(cs);
    return f;
}

inline FormulaPtr implication(FormulaPtr l, FormulaPtr r) {
    auto f = std::make_shared<Formula>();
    f->op = Op::implication;
    f->children = {std::move(l), std::move(r)};
    return f;
}

inline FormulaPtr always(Interval i, FormulaPtr a) {
    check_interval(i);
    auto f = std::make_shared<Formula>();
    f->op = Op::always;
    f->interval = i;
    f->children = {std::move(a)};
    return f;
}

inline FormulaPtr eventually(Interval i, FormulaPtr a) {
    check_interval(i);
    auto f = std::make_shared<Formula>();
    f->op = Op::eventually;
    f->interval = i;
    f->children = {std::move(a)};
    return f;
}

inline FormulaPtr until(Interval i, FormulaPtr l, FormulaPtr r) {
    check_interval(i);
    auto f = std::make_shared<Formula>();
    f->op = Op::until;
    f->interval = i;
    f->children = {std::move(l), std::move(r)};
    return f;
}

/// |e| <= c as a conjunction, |e| >= c as a disjunction.
inline FormulaPtr abs_predicate(LinearExpr e, Rel rel, double c) {
    const double c0 = e.constant;
    e.constant = 0.0;
    if (rel == Rel::le)
        return conjunction({predicate(e, Rel::le, c - c0), predicate(e.negated(), Rel::le, c + c0)});
    return disjunction({predicate(e, Rel::ge, c - c0), predicate(e.negated(), Rel::ge, c + c0)});
}

/// G((|x| >= c) -> F[0,t_a] G(|x| <= c)): once the deviation reaches c it must
/// come back within t_a seconds and stay back.
inline FormulaPtr recovery_spec(const std::string& channel, double c, double t_a) {
    const LinearExpr x{{{channel, 1.0}}, 0.0};
    return always({0, inf}, implication(abs_predicate(x, Rel::ge, c),
                                        eventually({0, t_a}, always({0, inf}, abs_predicate(x, Rel::le, c)))));
}

// --------------------------------------------------------------- structure

inline bool equal(const FormulaPtr& x, const FormulaPtr& y) {
    if (x == y) return true;
    if (!x || !y) return false;
    if (x->op != y->op || x->children.size() != y->children.size()) return false;
    if (x->op == Op::predicate)
        return x->expr == y->expr && x->rel == y->rel && x->threshold == y->threshold;
    if ((x->op == Op::always || x->op == Op::eventually || x->op == Op::until) && !(x->interval == y->interval))
        return false;
    for (std::size_t i = 0; i < x->children.size(); ++i)
        if (!equal(x->children[i], y->children[i])) return false;
    return true;
}

/// Sum of nested interval upper bounds; infinite if any bound is.
inline double horizon(const FormulaPtr& f) {
    switch (f->op) {
        case Op::predicate:
            return 0.0;
        case Op::negation:
            return horizon(f->children[0]);
        case Op::conjunction:
        case Op::disjunction:
        case Op::implication: {
            double h = 0;
            for (const auto& c : f->children) h = std::max(h, horizon(c));
            return h;
        }
        case Op::always:
        case Op::eventually:
            return f->interval.b + horizon(f->children[0]);
        case Op::until:
            return f->interval.b + std::max(horizon(f->children[0]), horizon(f->children[1]));
    }
    return 0.0;
}

inline void collect_variables(const FormulaPtr& f, std::set<std::string>& out) {
    if (f->op == Op::predicate)
        for (const auto& t : f->expr.terms) out.insert(t.first);
    for (const auto& c : f->children) collect_variables(c, out);
}

inline std::set<std::string> variables(const FormulaPtr& f) {
    std::set<std::string> s;
    collect_variables(f, s);
    return s;
}

/// Rewrites implications as (not l) or r. Nodes without implications below
/// them are shared, not copied.
inline FormulaPtr desugar(const FormulaPtr& f) {
    if (f->op == Op::predicate) return f;
    std::vector<FormulaPtr> kids;
    bool changed = false;
    for (const auto& c : f->children) {
        kids.push_back(desugar(c));
        changed = changed || kids.back() != c;
    }
    if (f->op == Op::implication) return disjunction({negation(kids[0]), kids[1]});
    if (!changed) return f;
    auto g = std::make_shared<Formula>(*f);
    g->children = std::move(kids);
    return g;
}

/// Shifts every predicate so the robustness of the whole formula moves by eps.
///
/// A predicate reached through an odd number of negations (including the left
/// side of an implication) is shifted the opposite way, so for eps < 0 every
/// requirement gets stricter and every trigger fires earlier.
inline FormulaPtr tighten(const FormulaPtr& f, double eps, bool positive = true) {
    if (eps == 0.0) return f;
    if (f->op == Op::predicate) {
        // margin = threshold - expr for <=, expr - threshold for >=
        const double shift = positive ? eps : -eps;
        return predicate(f->expr, f->rel, f->rel == Rel::le ? f->threshold + shift : f->threshold - shift);
    }
    auto g = std::make_shared<Formula>(*f);
    for (std::size_t i = 0; i < g->children.size(); ++i) {
        const bool flip = f->op == Op::negation || (f->op == Op::implication && i == 0);
        g->children[i] = tighten(f->children[i], eps, flip ? !positive : positive);
    }
    return g;
}

// ---------------------------------------------------------------- printing

namespace detail {

inline std::string number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Prefer the shortest representation that round-trips.
    for (int prec = 1; prec <= 17; ++prec) {
        char s[40];
        std::snprintf(s, sizeof s, "%.*g", prec, v);
        if (std::strtod(s, nullptr) == v) return s;
    }
    return buf;
}

inline std::string expr_string(const LinearExpr& e) {
    std::string s;
    for (const auto& [name, c] : e.terms) {
        if (s.empty()) {
            if (c == 1.0) s = name;
            else if (c == -1.0) s = "-" + name;
            else s = number(c) + "*" + name;
        } else {
            if (c == 1.0) s += " + " + name;
            else if (c == -1.0) s += " - " + name;
            else if (c < 0) s += " - " + number(-c) + "*" + name;
            else s += " + " + number(c) + "*" + name;
        }
    }
    if (e.constant != 0.0 || s.empty()) {
        if (s.empty()) s = number(e.constant);
        else if (e.constant < 0) s += " - " + number(-e.constant);
        else s += " + " + number(e.constant);
    }
    return s;
}

inline std::string interval_string(const Interval& i) {
    return "[" + number(i.a) + "," + number(i.b) + "]";
}

}  // namespace detail

/// Canonical text form; parse(to_string(f)) is structurally equal to f.
inline std::string to_string(const FormulaPtr& f) {
    switch (f->op) {
        case Op::predicate:
            return "(" + detail::expr_string(f->expr) + (f->rel == Rel::le ? " <= " : " >= ") +
                   detail::number(f->threshold) + ")";
        case Op::negation:
            return "!" + to_string(f->children[0]);
        case Op::conjunction:
        case Op::disjunction: {
            std::string s = "(";
            for (std::size_t i = 0; i < f->children.size(); ++i) {
                if (i) s += f->op == Op::conjunction ? " & " : " | ";
                s += to_string(f->children[i]);
            }
            return s + ")";
        }
        case Op::implication:
            return "(" + to_string(f->children[0]) + " -> " + to_string(f->children[1]) + ")";
        case Op::always:
            return "G" + detail::interval_string(f->interval) + " " + to_string(f->children[0]);
        case Op::eventually:
            return "F" + detail::interval_string(f->interval) + " " + to_string(f->children[0]);
        case Op::until:
            return "(" + to_string(f->children[0]) + " U" + detail::interval_string(f->interval) + " " +
                   to_string(f->children[1]) + ")";
    }
    return {};
}

// ----------------------------------------------------------------- parsing

namespace detail {

/// Recursive-descent parser. Grammar (lowest precedence first):
///
///   formula     := disjunction ( "->" formula )?
///   disjunction := conjunction ( ("|" | "||" | "or") conjunction )*
///   conjunction := until ( ("&" | "&&" | "and") until )*
///   until       := unary ( "U" interval? unary )?
///   unary       := ("!" | "not") unary | ("G" | "F") interval? unary
///                | "(" formula ")" | predicate
///   predicate   := side ("<=" | ">=") side
///   side        := "abs" "(" linear ")" | linear
///   linear      := ["-"] term (("+" | "-") term)*
///   term        := number ["*" identifier] | identifier
///   interval    := "[" number "," (number | "inf") "]"
class Parser {
public:
    explicit Parser(std::string_view src) : s_(src) {}

    FormulaPtr parse() {
        auto f = formula();
        skip();
        if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return f;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }

    [[noreturn]] void fail_at(std::size_t at, const std::string& what) const {
        int line = 1, col = 1;
        for (std::size_t i = 0; i < at && i < s_.size(); ++i) {
            if (s_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(what, line, col);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool peek(std::string_view tok) {
        skip();
        return s_.substr(pos_, tok.size()) == tok;
    }

    bool accept(std::string_view tok) {
        if (!peek(tok)) return false;
        pos_ += tok.size();
        return true;
    }

    void expect(std::string_view tok) {
        if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
    }

    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    /// Reads an identifier without consuming it.
    std::string peek_word() {
        skip();
        std::size_t e = pos_;
        if (e < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[e])) || s_[e] == '_'))
            while (e < s_.size() && ident_char(s_[e])) ++e;
        return std::string(s_.substr(pos_, e - pos_));
    }

    bool accept_word(std::string_view w) {
        if (peek_word() != w) return false;
        pos_ += w.size();
        return true;
    }

    static bool is_keyword(const std::string& w) {
        return w == "G" || w == "F" || w == "U" || w == "abs" || w == "and" || w == "or" || w == "not" || w == "inf";
    }

    double number() {
        skip();
        if (accept_word("inf")) return inf;
        const char* begin = s_.data() + pos_;
        // Bounded copy: string_view is not null-terminated in general.
        std::size_t e = pos_;
        while (e < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[e])) || s_[e] == '.' || s_[e] == 'e' ||
                                 s_[e] == 'E' || ((s_[e] == '+' || s_[e] == '-') && e > pos_ &&
                                                  (s_[e - 1] == 'e' || s_[e - 1] == 'E'))))
            ++e;
        const std::string text(begin, e - pos_);
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (text.empty() || end != text.c_str() + text.size()) fail("expected a number");
        pos_ = e;
        return v;
    }

    Interval interval() {
        const std::size_t at = pos_;
        expect("[");
        Interval i;
        i.a = number();
        expect(",");
        i.b = number();
        expect("]");
        if (!(i.a >= 0) || !(i.b >= i.a)) fail_at(at, "interval must satisfy 0 <= a <= b");
        return i;
    }

    Interval optional_interval() {
        skip();
        if (peek("[")) return interval();
        return {};
    }

    FormulaPtr formula() {
        auto l = disjunction();
        if (accept("->")) return implication(l, formula());
        return l;
    }

    FormulaPtr disjunction() {
        std::vector<FormulaPtr> parts{conjunction()};
        while (accept("||") || accept("|") || accept_word("or")) parts.push_back(conjunction());
        return parts.size() == 1 ? parts[0] : gsmpc::stl::disjunction(std::move(parts));
    }

    FormulaPtr conjunction() {
        std::vector<FormulaPtr> parts{until_expr()};
        while (accept("&&") || accept("&") || accept_word("and")) parts.push_back(until_expr());
        return parts.size() == 1 ? parts[0] : gsmpc::stl::conjunction(std::move(parts));
    }

    FormulaPtr until_expr() {
        auto l = unary();
        if (accept_word("U")) {
            const Interval i = optional_interval();
            return until(i, l, unary());
        }
        return l;
    }

    FormulaPtr unary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of formula");
        if (accept("!") || accept_word("not")) return negation(unary());
        if (accept_word("G")) {
            const Interval i = optional_interval();
            return always(i, unary());
        }
        if (accept_word("F")) {
            const Interval i = optional_interval();
            return eventually(i, unary());
        }
        if (accept("(")) {
            auto f = formula();
            expect(")");
            return f;
        }
        return predicate_expr();
    }

    struct Side {
        LinearExpr e;
        bool is_abs = false;
    };

    Side side() {
        Side sd;
        if (accept_word("abs")) {
            expect("(");
            sd.e = linear();
            expect(")");
            sd.is_abs = true;
        } else {
            sd.e = linear();
        }
        return sd;
    }

    LinearExpr linear() {
        LinearExpr e;
        double sign = 1.0;
        if (accept("-")) sign = -1.0;
        else accept("+");
        term(e, sign);
        while (true) {
            if (accept("+")) term(e, 1.0);
            else if (peek("-") && !peek("->")) {
                ++pos_;
                term(e, -1.0);
            } else {
                break;
            }
        }
        return e;
    }

    void add_term(LinearExpr& e, const std::string& name, double c) {
        for (auto& t : e.terms)
            if (t.first == name) {
                t.second += c;
                return;
            }
        e.terms.emplace_back(name, c);
    }

    void term(LinearExpr& e, double sign) {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const double v = number();
            if (accept("*")) {
                const std::size_t at = pos_;
                const std::string w = peek_word();
                if (w.empty() || is_keyword(w)) fail_at(at, "expected a variable name after '*'");
                pos_ += w.size();
                add_term(e, w, sign * v);
            } else {
                e.constant += sign * v;
            }
            return;
        }
        const std::string w = peek_word();
        if (w.empty()) fail("expected a variable or number");
        if (is_keyword(w)) fail("unexpected keyword '" + w + "'");
        pos_ += w.size();
        add_term(e, w, sign);
    }

    FormulaPtr predicate_expr() {
        const std::size_t at = pos_;
        const Side l = side();
        Rel rel;
        if (accept("<=")) rel = Rel::le;
        else if (accept(">=")) rel = Rel::ge;
        else if (peek("<") || peek(">")) fail("strict relations are not supported; use <= or >=");
        else fail("expected '<=' or '>='");
        const Side r = side();
        if (l.is_abs && r.is_abs) fail_at(at, "abs() may appear on one side only");
        if (l.is_abs || r.is_abs) {
            const Side& a = l.is_abs ? l : r;
            const Side& k = l.is_abs ? r : l;
            if (!k.e.terms.empty()) fail_at(at, "abs() must be compared against a constant");
            // abs(e) <= c, or c <= abs(e) which is abs(e) >= c
            const Rel eff = l.is_abs ? rel : (rel == Rel::le ? Rel::ge : Rel::le);
            return abs_predicate(a.e, eff, k.e.constant);
        }
        // l rel r  =>  (l - r) rel 0, constants moved to the threshold
        LinearExpr e = l.e;
        for (const auto& [name, c] : r.e.terms) add_term(e, name, -c);
        e.constant -= r.e.constant;
        e.terms.erase(std::remove_if(e.terms.begin(), e.terms.end(), [](const auto& t) { return t.second == 0.0; }),
                      e.terms.end());
        return gsmpc::stl::predicate(std::move(e), rel, 0.0);
    }
};

}  // namespace detail

inline FormulaPtr parse(std::string_view text) { return detail::Parser(text).parse(); }

// --------------------------------------------------------------- semantics

/// Sample-offset window [lo, hi] of an interval; hi is clipped by the caller.
struct Window {
    std::size_t lo;
    std::size_t hi;  // SIZE_MAX for unbounded
};

inline Window window(const Interval& i, double t_s) {
    const double lo = std::ceil(i.a / t_s - 1e-9);
    Window w{static_cast<std::size_t>(std::max(0.0, lo)), std::numeric_limits<std::size_t>::max()};
    if (std::isfinite(i.b)) {
        const double hi = std::floor(i.b / t_s + 1e-9);
        w.hi = hi < 0 ? 0 : static_cast<std::size_t>(hi);
    }
    return w;
}

namespace detail {

inline void check_variables(const FormulaPtr& f, const Trace& tr) {
    for (const auto& v : variables(f))
        if (!tr.has_channel(v)) throw UnknownVariableError(v);
}

/// Absolute sample range [first, last] covered by a window at k; empty when
/// first > last.
inline std::pair<std::size_t, std::size_t> span(const Interval& i, double t_s, std::size_t k, std::size_t n) {
    const Window w = window(i, t_s);
    const std::size_t first = k + w.lo;
    const std::size_t last = w.hi == std::numeric_limits<std::size_t>::max() || k + w.hi >= n ? n - 1 : k + w.hi;
    return {first, last};
}

inline bool bool_at(const FormulaPtr& f, const Trace& tr, std::size_t k) {
    const std::size_t n = tr.size();
    switch (f->op) {
        case Op::predicate: {
            const double v = f->expr.evaluate(tr, k);
            return f->rel == Rel::le ? v <= f->threshold : v >= f->threshold;
        }
        case Op::negation:
            return !bool_at(f->children[0], tr, k);
        case Op::conjunction:
            for (const auto& c : f->children)
                if (!bool_at(c, tr, k)) return false;
            return true;
        case Op::disjunction:
            for (const auto& c : f->children)
                if (bool_at(c, tr, k)) return true;
            return false;
        case Op::implication:
            return !bool_at(f->children[0], tr, k) || bool_at(f->children[1], tr, k);
        case Op::always: {
            const auto [a, b] = span(f->interval, tr.sample_time(), k, n);
            for (std::size_t j = a; j <= b && j < n; ++j)
                if (!bool_at(f->children[0], tr, j)) return false;
            return true;
        }
        case Op::eventually: {
            const auto [a, b] = span(f->interval, tr.sample_time(), k, n);
            for (std::size_t j = a; j <= b && j < n; ++j)
                if (bool_at(f->children[0], tr, j)) return true;
            return false;
        }
        case Op::until: {
            const auto [a, b] = span(f->interval, tr.sample_time(), k, n);
            for (std::size_t j = a; j <= b && j < n; ++j) {
                if (!bool_at(f->children[1], tr, j)) continue;
                bool held = true;
                for (std::size_t i = k; i < j && held; ++i) held = bool_at(f->children[0], tr, i);
                if (held) return true;
            }
            return false;
        }
    }
    return false;
}

/// Robustness at every sample, computed bottom-up.
inline std::vector<double> robustness_signal(const FormulaPtr& f, const Trace& tr) {
    const std::size_t n = tr.size();
    std::vector<double> out(n);
    switch (f->op) {
        case Op::predicate:
            for (std::size_t k = 0; k < n; ++k) {
                const double v = f->expr.evaluate(tr, k);
                out[k] = f->rel == Rel::le ? f->threshold - v : v - f->threshold;
            }
            return out;
        case Op::negation: {
            out = robustness_signal(f->children[0], tr);
            for (auto& v : out) v = -v;
            return out;
        }
        case Op::conjunction:
        case Op::disjunction: {
            const bool conj = f->op == Op::conjunction;
            std::fill(out.begin(), out.end(), conj ? inf : -inf);
            for (const auto& c : f->children) {
                const auto r = robustness_signal(c, tr);
                for (std::size_t k = 0; k < n; ++k) out[k] = conj ? std::min(out[k], r[k]) : std::max(out[k], r[k]);
            }
            return out;
        }
        case Op::implication: {
            const auto l = robustness_signal(f->children[0], tr);
            const auto r = robustness_signal(f->children[1], tr);
            for (std::size_t k = 0; k < n; ++k) out[k] = std::max(-l[k], r[k]);
            return out;
        }
        case Op::always:
        case Op::eventually: {
            const bool all = f->op == Op::always;
            const auto r = robustness_signal(f->children[0], tr);
            for (std::size_t k = 0; k < n; ++k) {
                const auto [a, b] = span(f->interval, tr.sample_time(), k, n);
                double v = all ? inf : -inf;
                for (std::size_t j = a; j <= b && j < n; ++j) v = all ? std::min(v, r[j]) : std::max(v, r[j]);
                out[k] = v;
            }
            return out;
        }
        case Op::until: {
            const auto l = robustness_signal(f->children[0], tr);
            const auto r = robustness_signal(f->children[1], tr);
            for (std::size_t k = 0; k < n; ++k) {
                const auto [a, b] = span(f->interval, tr.sample_time(), k, n);
                double best = -inf;
                double prefix = inf;  // min of l over [k, j)
                for (std::size_t j = k; j <= b && j < n; ++j) {
                    if (j >= a) best = std::max(best, std::min(r[j], prefix));
                    prefix = std::min(prefix, l[j]);
                }
                out[k] = best;
            }
            return out;
        }
    }
    return out;
}

}  // namespace detail

/// Finite-trace Boolean satisfaction at sample k.
inline bool evaluate_bool(const FormulaPtr& f, const Trace& tr, std::size_t k = 0) {
    if (k >= tr.size()) throw DomainError("evaluate_bool: sample index out of range");
    detail::check_variables(f, tr);
    return detail::bool_at(f, tr, k);
}

/// Quantitative semantics: positive means satisfied with that margin.
inline double robustness(const FormulaPtr& f, const Trace& tr, std::size_t k = 0) {
    if (k >= tr.size()) throw DomainError("robustness: sample index out of range");
    detail::check_variables(f, tr);
    return detail::robustness_signal(f, tr)[k];
}

}  // namespace gsmpc::stl
