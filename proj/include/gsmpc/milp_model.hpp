#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gsmpc/errors.hpp"

namespace gsmpc {

enum class VarKind { continuous, binary };
enum class Sense { le, eq, ge };

struct Variable {
    std::string name;
    VarKind kind = VarKind::continuous;
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
};

struct Constraint {
    std::string name;
    std::vector<std::pair<int, double>> coefs;  // (variable index, coefficient)
    Sense sense = Sense::le;
    double rhs = 0.0;
    std::string family;  // e.g. "dynamics", "freq_limit"; used in reports
};

/// Where a variable came from: a named quantity at a sample step.
struct VarTag {
    std::string quantity;
    int step = -1;
};

/// Mixed-integer linear program: minimize c'x subject to linear rows and bounds.
class MilpModel {
public:
    static constexpr double inf = std::numeric_limits<double>::infinity();

    int add_variable(std::string name, VarKind kind, double lower, double upper, VarTag tag = {}) {
        if (index_.count(name)) throw DomainError("duplicate variable '" + name + "'");
        if (kind == VarKind::binary) {
            if (lower < 0 || upper > 1 || lower > upper)
                throw DomainError("binary variable '" + name + "' must have bounds within {0, 1}");
        } else if (!(lower <= upper) || std::isnan(lower) || std::isnan(upper)) {
            throw DomainError("variable '" + name + "' has inconsistent bounds");
        }
        const int id = static_cast<int>(vars_.size());
        index_.emplace(name, id);
        vars_.push_back({std::move(name), kind, lower, upper});
        tags_.push_back(std::move(tag));
        objective_.push_back(0.0);
        return id;
    }

    int add_continuous(std::string name, double lower, double upper, VarTag tag = {}) {
        return add_variable(std::move(name), VarKind::continuous, lower, upper, std::move(tag));
    }

    int add_binary(std::string name, VarTag tag = {}) {
        return add_variable(std::move(name), VarKind::binary, 0.0, 1.0, std::move(tag));
    }

    int add_constraint(std::vector<std::pair<int, double>> coefs, Sense sense, double rhs, std::string family = {},
                       std::string name = {}) {
        for (const auto& [j, c] : coefs) {
            if (j < 0 || j >= num_vars()) throw DomainError("constraint references an undeclared variable");
            if (!std::isfinite(c)) throw DomainError("constraint coefficient is not finite");
        }
        if (std::isnan(rhs)) throw DomainError("constraint right-hand side is NaN");
        if (name.empty()) name = "c" + std::to_string(cons_.size());
        cons_.push_back({std::move(name), std::move(coefs), sense, rhs, std::move(family)});
        return static_cast<int>(cons_.size()) - 1;
    }

    void set_objective(int var, double coef) { objective_.at(static_cast<std::size_t>(var)) = coef; }
    void add_objective(int var, double coef) { objective_.at(static_cast<std::size_t>(var)) += coef; }

    void set_bounds(int var, double lower, double upper) {
        auto& v = vars_.at(static_cast<std::size_t>(var));
        if (!(lower <= upper)) throw DomainError("set_bounds: lower > upper for '" + v.name + "'");
        v.lower = lower;
        v.upper = upper;
    }

    int num_vars() const { return static_cast<int>(vars_.size()); }
    int num_constraints() const { return static_cast<int>(cons_.size()); }
    int num_binaries() const {
        int n = 0;
        for (const auto& v : vars_) n += v.kind == VarKind::binary;
        return n;
    }

    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Constraint>& constraints() const { return cons_; }
    const std::vector<double>& objective() const { return objective_; }
    const std::vector<VarTag>& tags() const { return tags_; }
    const Variable& variable(int j) const { return vars_.at(static_cast<std::size_t>(j)); }

    int find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? -1 : it->second;
    }

    int index_of(const std::string& name) const {
        const int j = find(name);
        if (j < 0) throw DomainError("unknown model variable '" + name + "'");
        return j;
    }

    /// Same model with every binary relaxed to a continuous [0, 1] variable.
    MilpModel relaxed() const {
        MilpModel m = *this;
        for (auto& v : m.vars_) v.kind = VarKind::continuous;
        return m;
    }

    double objective_value(const std::vector<double>& x) const {
        double s = 0;
        for (std::size_t j = 0; j < objective_.size(); ++j) s += objective_[j] * x[j];
        return s;
    }

    double row_activity(int i, const std::vector<double>& x) const {
        double s = 0;
        for (const auto& [j, c] : cons_.at(static_cast<std::size_t>(i)).coefs) s += c * x[static_cast<std::size_t>(j)];
        return s;
    }

    /// Largest bound or row violation of a point (0 when feasible).
    double max_violation(const std::vector<double>& x) const {
        double worst = 0;
        for (std::size_t j = 0; j < vars_.size(); ++j) {
            worst = std::max(worst, vars_[j].lower - x[j]);
            worst = std::max(worst, x[j] - vars_[j].upper);
        }
        for (int i = 0; i < num_constraints(); ++i) {
            const double a = row_activity(i, x);
            const auto& c = cons_[static_cast<std::size_t>(i)];
            if (c.sense != Sense::ge) worst = std::max(worst, a - c.rhs);
            if (c.sense != Sense::le) worst = std::max(worst, c.rhs - a);
        }
        return worst;
    }

private:
    std::vector<Variable> vars_;
    std::vector<Constraint> cons_;
    std::vector<double> objective_;
    std::vector<VarTag> tags_;
    std::unordered_map<std::string, int> index_;
};

// ---------------------------------------------------------------- LP format

namespace lp_detail {

inline std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_terms(std::ostringstream& os, const std::vector<std::pair<int, double>>& terms,
                        const std::vector<Variable>& vars) {
    int on_line = 0;
    for (const auto& [j, c] : terms) {
        if (on_line == 6) {
            os << "\n   ";
            on_line = 0;
        }
        os << (c < 0 || (c == 0 && std::signbit(c)) ? " - " : " + ") << num(std::abs(c)) << ' '
           << vars[static_cast<std::size_t>(j)].name;
        ++on_line;
    }
}

}  // namespace lp_detail

/// CPLEX-LP text. Every variable appears in the objective (zero coefficients
/// included) so that the import recovers the declaration order exactly.
inline std::string export_lp(const MilpModel& m) {
    std::ostringstream os;
    const auto& vars = m.variables();
    os << "\\ MILP model: " << m.num_vars() << " variables, " << m.num_constraints() << " constraints\n";
    os << "Minimize\n obj:";
    std::vector<std::pair<int, double>> obj;
    for (int j = 0; j < m.num_vars(); ++j) obj.emplace_back(j, m.objective()[static_cast<std::size_t>(j)]);
    lp_detail::write_terms(os, obj, vars);
    os << "\nSubject To\n";
    for (const auto& c : m.constraints()) {
        os << ' ' << c.name << ':';
        lp_detail::write_terms(os, c.coefs, vars);
        if (c.coefs.empty()) {
            if (vars.empty()) throw DomainError("export_lp: cannot write an empty row without variables");
            os << " + 0 " << vars[0].name;
        }
        os << (c.sense == Sense::le ? " <= " : c.sense == Sense::ge ? " >= " : " = ") << lp_detail::num(c.rhs)
           << '\n';
    }
    os << "Bounds\n";
    for (const auto& v : vars) {
        if (std::isinf(v.lower) && v.lower < 0 && std::isinf(v.upper) && v.upper > 0)
            os << ' ' << v.name << " free\n";
        else
            os << ' ' << lp_detail::num(v.lower) << " <= " << v.name << " <= " << lp_detail::num(v.upper) << '\n';
    }
    bool any_binary = false;
    for (const auto& v : vars) any_binary = any_binary || v.kind == VarKind::binary;
    if (any_binary) {
        os << "Binary\n";
        for (const auto& v : vars)
            if (v.kind == VarKind::binary) os << ' ' << v.name << '\n';
    }
    os << "End\n";
    return os.str();
}

namespace lp_detail {

class Reader {
public:
    explicit Reader(std::string_view text) {
        // Strip comments, then split into tokens while remembering line numbers.
        int line = 1;
        std::size_t i = 0;
        while (i < text.size()) {
            const char c = text[i];
            if (c == '\\') {
                while (i < text.size() && text[i] != '\n') ++i;
                continue;
            }
            if (c == '\n') {
                ++line;
                ++i;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            if (c == '<' || c == '>' || c == '=') {
                std::string t(1, c);
                ++i;
                if (i < text.size() && text[i] == '=') {
                    t += '=';
                    ++i;
                }
                if (t == "=<") t = "<=";
                if (t == "=>") t = ">=";
                if (t == "<") t = "<=";
                if (t == ">") t = ">=";
                toks_.push_back({t, line});
                continue;
            }
            if (c == '+' || c == '-') {
                // Signed infinities are single tokens.
                std::size_t e = i + 1;
                while (e < text.size() && std::isalpha(static_cast<unsigned char>(text[e]))) ++e;
                std::string word(text.substr(i + 1, e - i - 1));
                for (auto& ch : word) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
                if (word == "inf" || word == "infinity") {
                    toks_.push_back({std::string(1, c) + "inf", line});
                    i = e;
                    continue;
                }
                toks_.push_back({std::string(1, c), line});
                ++i;
                continue;
            }
            std::size_t e = i;
            while (e < text.size() && !std::isspace(static_cast<unsigned char>(text[e])) && text[e] != '<' &&
                   text[e] != '>' && text[e] != '=' && text[e] != ':' && text[e] != '\\')
                ++e;
            // Inside a number, + and - belong to an exponent.
            std::string t(text.substr(i, e - i));
            if (e < text.size() && text[e] == ':') {
                t += ':';
                ++e;
            }
            toks_.push_back({t, line});
            i = e;
        }
    }

    MilpModel read() {
        MilpModel m;
        expect_section({"minimize", "minimise", "min"});
        // Objective
        if (pos_ < toks_.size() && toks_[pos_].text.back() == ':') ++pos_;
        std::vector<std::pair<std::string, double>> obj;
        while (pos_ < toks_.size() && !is_section(toks_[pos_].text)) obj.push_back(read_term());
        for (const auto& [name, c] : obj) m.add_objective(var(m, name), c);

        expect_section({"subject to", "st", "s.t.", "such that"});
        while (pos_ < toks_.size() && !is_section(toks_[pos_].text)) read_constraint(m);

        if (pos_ < toks_.size() && lower(toks_[pos_].text) == "bounds") {
            ++pos_;
            while (pos_ < toks_.size() && !is_section(toks_[pos_].text)) read_bound(m);
        }
        if (pos_ < toks_.size() && (lower(toks_[pos_].text) == "binary" || lower(toks_[pos_].text) == "binaries" ||
                                    lower(toks_[pos_].text) == "bin")) {
            ++pos_;
            while (pos_ < toks_.size() && !is_section(toks_[pos_].text)) {
                const int j = var(m, toks_[pos_].text);
                const auto& v = m.variable(j);
                // Binary implies [0, 1] unless a tighter box was given.
                const double lo = std::max(0.0, v.lower), hi = std::min(1.0, v.upper);
                m.set_bounds(j, lo, hi);
                set_binary(j);
                ++pos_;
            }
        }
        if (pos_ >= toks_.size() || lower(toks_[pos_].text) != "end") fail("expected 'End'");
        ++pos_;
        return finish(std::move(m));
    }

private:
    struct Tok {
        std::string text;
        int line;
    };
    std::vector<Tok> toks_;
    std::size_t pos_ = 0;
    std::map<int, bool> pending_binary_;
    std::map<std::string, double> default_lower_;

    static std::string lower(std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    }

    bool is_section(const std::string& t) const {
        const std::string l = lower(t);
        if (l == "subject" && pos_ + 1 < toks_.size() && lower(toks_[pos_ + 1].text) == "to") return true;
        return l == "st" || l == "s.t." || l == "bounds" || l == "binary" || l == "binaries" || l == "bin" ||
               l == "end" || l == "general" || l == "generals" || l == "such";
    }

    [[noreturn]] void fail(const std::string& what) const {
        const int line = pos_ < toks_.size() ? toks_[pos_].line : (toks_.empty() ? 1 : toks_.back().line);
        throw InputError("LP import, line " + std::to_string(line) + ": " + what);
    }

    void expect_section(std::initializer_list<std::string_view> names) {
        if (pos_ >= toks_.size()) fail("unexpected end of file");
        std::string t = lower(toks_[pos_].text);
        if ((t == "subject" || t == "such") && pos_ + 1 < toks_.size()) {
            t += " " + lower(toks_[pos_ + 1].text);
            for (auto n : names)
                if (t == n) {
                    pos_ += 2;
                    return;
                }
        }
        for (auto n : names)
            if (t == n) {
                ++pos_;
                return;
            }
        fail("expected section '" + std::string(*names.begin()) + "'");
    }

    int var(MilpModel& m, const std::string& name) {
        const int j = m.find(name);
        if (j >= 0) return j;
        if (name.empty() || std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == '.')
            fail("invalid variable name '" + name + "'");
        return m.add_continuous(name, 0.0, MilpModel::inf);  // LP-format default bounds
    }

    static bool parse_number(const std::string& t, double& out) {
        if (t == "+inf") {
            out = MilpModel::inf;
            return true;
        }
        if (t == "-inf") {
            out = -MilpModel::inf;
            return true;
        }
        char* end = nullptr;
        out = std::strtod(t.c_str(), &end);
        return !t.empty() && end == t.c_str() + t.size() &&
               (std::isdigit(static_cast<unsigned char>(t[0])) || t[0] == '.');
    }

    std::pair<std::string, double> read_term() {
        double sign = 1.0;
        while (pos_ < toks_.size() && (toks_[pos_].text == "+" || toks_[pos_].text == "-")) {
            if (toks_[pos_].text == "-") sign = -sign;
            ++pos_;
        }
        if (pos_ >= toks_.size()) fail("unexpected end of file in expression");
        double c = 1.0;
        if (parse_number(toks_[pos_].text, c)) {
            ++pos_;
            if (pos_ >= toks_.size()) fail("coefficient without variable");
        } else {
            c = 1.0;
        }
        const std::string name = toks_[pos_].text;
        if (name == "<=" || name == ">=" || name == "=") fail("coefficient without variable");
        ++pos_;
        return {name, sign * c};
    }

    void read_constraint(MilpModel& m) {
        std::string name;
        if (toks_[pos_].text.back() == ':') {
            name = toks_[pos_].text.substr(0, toks_[pos_].text.size() - 1);
            ++pos_;
        }
        std::vector<std::pair<int, double>> coefs;
        while (pos_ < toks_.size() && toks_[pos_].text != "<=" && toks_[pos_].text != ">=" && toks_[pos_].text != "=") {
            auto [v, c] = read_term();
            coefs.emplace_back(var(m, v), c);
        }
        if (pos_ >= toks_.size()) fail("constraint without relation");
        const std::string rel = toks_[pos_++].text;
        double sign = 1.0;
        if (pos_ < toks_.size() && (toks_[pos_].text == "-" || toks_[pos_].text == "+")) {
            sign = toks_[pos_].text == "-" ? -1.0 : 1.0;
            ++pos_;
        }
        double rhs = 0;
        if (pos_ >= toks_.size() || !parse_number(toks_[pos_].text, rhs)) fail("expected right-hand side");
        ++pos_;
        const Sense s = rel == "<=" ? Sense::le : rel == ">=" ? Sense::ge : Sense::eq;
        // A single "0 x" term is the placeholder written for an empty row.
        if (coefs.size() == 1 && coefs[0].second == 0.0) coefs.clear();
        m.add_constraint(std::move(coefs), s, sign * rhs, {}, name);
    }

    void read_bound(MilpModel& m) {
        // Forms: "x free", "lo <= x <= hi", "x >= lo", "x <= hi", "x = v", "lo <= x".
        double a = 0;
        std::string t = toks_[pos_].text;
        auto signed_num = [&](double& out) {
            double sign = 1.0;
            if (toks_[pos_].text == "-" || toks_[pos_].text == "+") {
                sign = toks_[pos_].text == "-" ? -1.0 : 1.0;
                ++pos_;
            }
            if (pos_ >= toks_.size() || !parse_number(toks_[pos_].text, out)) return false;
            out *= sign;
            ++pos_;
            return true;
        };
        const std::size_t save = pos_;
        if (signed_num(a)) {
            if (pos_ >= toks_.size()) fail("incomplete bound");
            const std::string rel = toks_[pos_++].text;
            const int j = var(m, toks_[pos_++].text);
            const auto& v = m.variable(j);
            double lo = v.lower, hi = v.upper;
            if (rel == "<=") lo = a;
            else if (rel == ">=") hi = a;
            else fail("unsupported bound relation");
            if (pos_ < toks_.size() && (toks_[pos_].text == "<=" || toks_[pos_].text == ">=")) {
                const std::string rel2 = toks_[pos_++].text;
                double b = 0;
                if (!signed_num(b)) fail("expected bound value");
                if (rel2 == "<=") hi = b;
                else lo = b;
            }
            m.set_bounds(j, lo, hi);
            return;
        }
        pos_ = save;
        const int j = var(m, toks_[pos_++].text);
        if (pos_ < toks_.size() && lower(toks_[pos_].text) == "free") {
            ++pos_;
            m.set_bounds(j, -MilpModel::inf, MilpModel::inf);
            return;
        }
        if (pos_ >= toks_.size()) fail("incomplete bound");
        const std::string rel = toks_[pos_++].text;
        double b = 0;
        if (!signed_num(b)) fail("expected bound value");
        const auto& v = m.variable(j);
        if (rel == "<=") m.set_bounds(j, b < v.lower ? -MilpModel::inf : v.lower, b);
        else if (rel == ">=") m.set_bounds(j, b, v.upper);
        else m.set_bounds(j, b, b);
    }

    void set_binary(int j) { pending_binary_[j] = true; }

    MilpModel finish(MilpModel&& m) {
        if (pending_binary_.empty()) return std::move(m);
        // Rebuild with the binary kinds applied, preserving order and rows.
        MilpModel out;
        for (int j = 0; j < m.num_vars(); ++j) {
            const auto& v = m.variable(j);
            const bool bin = pending_binary_.count(j) > 0;
            out.add_variable(v.name, bin ? VarKind::binary : VarKind::continuous, v.lower, v.upper,
                             m.tags()[static_cast<std::size_t>(j)]);
            out.set_objective(j, m.objective()[static_cast<std::size_t>(j)]);
        }
        for (const auto& c : m.constraints()) out.add_constraint(c.coefs, c.sense, c.rhs, c.family, c.name);
        return out;
    }
};

}  // namespace lp_detail

/// Parses the CPLEX-LP subset written by export_lp (Minimize, Subject To,
/// Bounds, Binary, End). Variables default to [0, +inf) as in the format.
inline MilpModel import_lp(std::string_view text) { return lp_detail::Reader(text).read(); }

}  // namespace gsmpc
