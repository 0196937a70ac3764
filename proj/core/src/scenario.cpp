#include "kslab/scenario.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
    fail(errc::parse_error, "line " + std::to_string(line) + ": " + what);
}

double to_double(const std::string& v, int line) {
    double out = 0.0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc{} || res.ptr != last)
        parse_fail(line, "expected a number, got '" + v + "'");
    return out;
}

long long to_ll(const std::string& v, int line) {
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        parse_fail(line, "expected an integer, got '" + v + "'");
    return out;
}

int to_int(const std::string& v, int line) {
    const long long x = to_ll(v, line);
    if (x < -2147483648LL || x > 2147483647LL) parse_fail(line, "integer out of range: " + v);
    return static_cast<int>(x);
}

bool to_bool(const std::string& v, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    parse_fail(line, "expected true/false, got '" + v + "'");
}

Rational to_rational(const std::string& v, int line) {
    const auto r = Rational::parse(v);
    if (!r) parse_fail(line, "expected a rational (like 2, 0.5 or 3/2), got '" + v + "'");
    return *r;
}

std::vector<std::string> split_list(const std::string& v, int line) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) parse_fail(line, "empty entry in list '" + v + "'");
        out.push_back(item);
    }
    if (out.empty()) parse_fail(line, "expected a nonempty list");
    return out;
}

std::vector<double> to_double_list(const std::string& v, int line) {
    std::vector<double> out;
    for (const auto& item : split_list(v, line)) out.push_back(to_double(item, line));
    return out;
}

std::vector<Rational> to_rational_list(const std::string& v, int line) {
    std::vector<Rational> out;
    for (const auto& item : split_list(v, line)) out.push_back(to_rational(item, line));
    return out;
}

[[noreturn]] void invalid(const std::string& what) { fail(errc::validation_error, what); }

std::string join_doubles(const std::vector<double>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(xs[i]);
    }
    return out;
}

std::string join_rationals(const std::vector<Rational>& xs) {
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += xs[i].str();
    }
    return out;
}

} // namespace

const char* run_mode_name(RunMode m) noexcept {
    return m == RunMode::Plain ? "plain" : "regularized";
}

Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    bool theta_set = false, beta_set = false;
    bool an_alpha_set = false, an_theta_set = false, an_beta_set = false;

    using Handler = std::function<void(const std::string&, int)>;
    const std::map<std::string, Handler> handlers = {
        {"model.n", [&](const std::string& v, int l) { sc.model.n = to_int(v, l); }},
        {"model.R", [&](const std::string& v, int l) { sc.model.R = to_double(v, l); }},
        {"model.m", [&](const std::string& v, int l) { sc.model.m = to_rational(v, l); }},
        {"model.q", [&](const std::string& v, int l) { sc.model.q = to_rational(v, l); }},
        {"model.p", [&](const std::string& v, int l) { sc.model.p_mass = to_rational(v, l); }},
        {"model.theta",
         [&](const std::string& v, int l) {
             sc.model.theta = to_rational(v, l);
             theta_set = true;
         }},
        {"model.beta",
         [&](const std::string& v, int l) {
             sc.model.beta = to_rational(v, l);
             beta_set = true;
         }},
        {"model.M", [&](const std::string& v, int l) { sc.model.M = to_double(v, l); }},
        {"model.L", [&](const std::string& v, int l) { sc.model.L = to_double(v, l); }},
        {"model.eta", [&](const std::string& v, int l) { sc.model.eta = to_double(v, l); }},
        {"grid.cells", [&](const std::string& v, int l) { sc.grid_cells = to_int(v, l); }},
        {"grid.grading", [&](const std::string& v, int l) { sc.grid_grading = to_double(v, l); }},
        {"init.mass", [&](const std::string& v, int l) { sc.init_mass = to_double(v, l); }},
        {"init.width", [&](const std::string& v, int l) { sc.init_width = to_double(v, l); }},
        {"init.v0", [&](const std::string& v, int l) { sc.init_v0 = to_double(v, l); }},
        {"init.floor", [&](const std::string& v, int l) { sc.init_floor = to_double(v, l); }},
        {"mode",
         [&](const std::string& v, int l) {
             if (v == "plain") sc.mode = RunMode::Plain;
             else if (v == "regularized") sc.mode = RunMode::Regularized;
             else parse_fail(l, "mode must be plain or regularized, got '" + v + "'");
         }},
        {"reg.epsilon", [&](const std::string& v, int l) { sc.reg_epsilon = to_double(v, l); }},
        {"solver.dt_init", [&](const std::string& v, int l) { sc.solver.dt_init = to_double(v, l); }},
        {"solver.dt_min", [&](const std::string& v, int l) { sc.solver.dt_min = to_double(v, l); }},
        {"solver.dt_max", [&](const std::string& v, int l) { sc.solver.dt_max = to_double(v, l); }},
        {"solver.cfl_safety",
         [&](const std::string& v, int l) { sc.solver.cfl_safety = to_double(v, l); }},
        {"solver.blowup_threshold",
         [&](const std::string& v, int l) { sc.solver.blowup_threshold = to_double(v, l); }},
        {"solver.t_end", [&](const std::string& v, int l) { sc.solver.t_end = to_double(v, l); }},
        {"solver.linear_tol",
         [&](const std::string& v, int l) { sc.solver.linear_tol = to_double(v, l); }},
        {"solver.positivity_budget_rel",
         [&](const std::string& v, int l) { sc.solver.positivity_budget_rel = to_double(v, l); }},
        {"solver.growth_cap",
         [&](const std::string& v, int l) { sc.solver.growth_cap = to_double(v, l); }},
        {"solver.record_every",
         [&](const std::string& v, int l) { sc.solver.record_every = to_int(v, l); }},
        {"solver.picard_iters",
         [&](const std::string& v, int l) { sc.solver.picard_iters = to_int(v, l); }},
        {"solver.snapshot_factor",
         [&](const std::string& v, int l) { sc.solver.snapshot_factor = to_double(v, l); }},
        {"solver.max_steps", [&](const std::string& v, int l) { sc.solver.max_steps = to_ll(v, l); }},
        {"analysis.alpha",
         [&](const std::string& v, int l) {
             sc.analysis.alphas = to_double_list(v, l);
             an_alpha_set = true;
         }},
        {"analysis.theta",
         [&](const std::string& v, int l) {
             sc.analysis.theta = to_double(v, l);
             an_theta_set = true;
         }},
        {"analysis.beta",
         [&](const std::string& v, int l) {
             sc.analysis.beta = to_double(v, l);
             an_beta_set = true;
         }},
        {"analysis.annulus_in",
         [&](const std::string& v, int l) { sc.analysis.annulus_in = to_double(v, l); }},
        {"analysis.annulus_out",
         [&](const std::string& v, int l) { sc.analysis.annulus_out = to_double(v, l); }},
        {"analysis.profile_rcut",
         [&](const std::string& v, int l) { sc.analysis.profile_rcut = to_double(v, l); }},
        {"analysis.profile_tol",
         [&](const std::string& v, int l) { sc.analysis.profile_tol = to_double(v, l); }},
        {"analysis.margin",
         [&](const std::string& v, int l) { sc.analysis.margin = to_double(v, l); }},
        {"analysis.check_bounds",
         [&](const std::string& v, int l) { sc.analysis.check_bounds = to_bool(v, l); }},
        {"twin.delta", [&](const std::string& v, int l) { sc.twin_delta = to_double(v, l); }},
        {"twin.dt", [&](const std::string& v, int l) { sc.twin_dt = to_double(v, l); }},
        {"twin.t_end", [&](const std::string& v, int l) { sc.twin_t_end = to_double(v, l); }},
        {"twin.record_every",
         [&](const std::string& v, int l) { sc.twin_record_every = to_int(v, l); }},
        {"sweep.mass", [&](const std::string& v, int l) { sc.sweep_mass = to_double_list(v, l); }},
        {"sweep.width", [&](const std::string& v, int l) { sc.sweep_width = to_double_list(v, l); }},
        {"sweep.m", [&](const std::string& v, int l) { sc.sweep_m = to_rational_list(v, l); }},
        {"sweep.q", [&](const std::string& v, int l) { sc.sweep_q = to_rational_list(v, l); }},
        {"exponents.alpha",
         [&](const std::string& v, int l) { sc.derive.alpha = to_double(v, l); }},
        {"ehrling.s", [&](const std::string& v, int l) { sc.derive.ehrling_s = to_double(v, l); }},
        {"ehrling.r", [&](const std::string& v, int l) { sc.derive.ehrling_r = to_double(v, l); }},
        {"moser.p_tilde",
         [&](const std::string& v, int l) { sc.derive.moser_p_tilde = to_double(v, l); }},
        {"moser.s", [&](const std::string& v, int l) { sc.derive.moser_s = to_double(v, l); }},
        {"moser.levels", [&](const std::string& v, int l) { sc.derive.moser_J = to_int(v, l); }},
    };

    std::set<std::string> seen;
    std::istringstream lines(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(lines, raw)) {
        ++lineno;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) parse_fail(lineno, "expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) parse_fail(lineno, "empty key");
        if (value.empty()) parse_fail(lineno, "empty value for key '" + key + "'");
        const auto it = handlers.find(key);
        if (it == handlers.end()) parse_fail(lineno, "unknown key '" + key + "'");
        if (!seen.insert(key).second) parse_fail(lineno, "duplicate key '" + key + "'");
        it->second(value, lineno);
    }

    // Dimension-dependent defaults.
    if (!theta_set) sc.model.theta = Rational(4LL * sc.model.n);
    if (!beta_set) sc.model.beta = Rational(2LL * sc.model.n - 1, 2);
    sc.model.validate();
    if (!an_theta_set) sc.analysis.theta = sc.model.theta.value();
    if (!an_beta_set) sc.analysis.beta = sc.model.beta.value();

    const Rational crit_den = (sc.model.m - sc.model.q) * Rational(sc.model.n) + Rational(1);
    if (!an_alpha_set) {
        if (!crit_den.positive())
            invalid("analysis.alpha must be given explicitly when the critical exponent "
                    "is undefined ((m-q)n + 1 <= 0)");
        sc.analysis.alphas = {critical_alpha(sc.model) + 0.5};
    }

    if (sc.grid_cells < 4) invalid("grid.cells must be at least 4");
    if (!(sc.grid_grading >= 1.0) || !(sc.grid_grading <= 1.2))
        invalid("grid.grading must lie in [1, 1.2]");
    if (!(sc.init_mass > 0.0)) invalid("init.mass must be positive");
    if (!(sc.init_width > 0.0) || !(sc.init_width <= sc.model.R))
        invalid("init.width must lie in (0, R]");
    if (sc.init_v0 < 0.0) invalid("init.v0 must be nonnegative");
    if (sc.init_floor < 0.0) invalid("init.floor must be nonnegative");
    if (sc.mode == RunMode::Regularized && !(sc.reg_epsilon > 0.0 && sc.reg_epsilon < 1.0))
        invalid("regularized mode needs reg.epsilon in (0,1)");

    sc.solver.validate(0.0);

    if (sc.analysis.alphas.empty()) invalid("analysis.alpha list must be nonempty");
    for (double a : sc.analysis.alphas)
        if (!(a >= 0.0) || !std::isfinite(a)) invalid("analysis.alpha entries must be finite and >= 0");
    if (!(sc.analysis.theta > 1.0)) invalid("analysis.theta must exceed 1");
    if (!(sc.analysis.beta > 0.0)) invalid("analysis.beta must be positive");
    if (!(sc.analysis.annulus_in > 0.0) || !(sc.analysis.annulus_out > sc.analysis.annulus_in) ||
        !(sc.analysis.annulus_out <= 1.0))
        invalid("need 0 < analysis.annulus_in < analysis.annulus_out <= 1");
    if (!(sc.analysis.profile_rcut > 0.0) || !(sc.analysis.profile_rcut < 1.0))
        invalid("analysis.profile_rcut must lie in (0,1)");
    if (!(sc.analysis.profile_tol > 0.0)) invalid("analysis.profile_tol must be positive");
    if (!(sc.analysis.margin >= 0.0)) invalid("analysis.margin must be nonnegative");
    if (sc.analysis.check_bounds) {
        if (!crit_den.positive())
            invalid("bound checks need a defined critical exponent ((m-q)n + 1 > 0)");
        const double crit = critical_alpha(sc.model);
        for (double a : sc.analysis.alphas)
            if (!(a > crit))
                invalid("bound checks need every analysis.alpha above the critical exponent " +
                        fmt_double(crit) + ", got " + fmt_double(a));
    }

    if (!(sc.twin_delta >= 0.0) || !(sc.twin_delta < 1.0)) invalid("twin.delta must lie in [0,1)");
    if (!(sc.twin_dt > 0.0)) invalid("twin.dt must be positive");
    if (!(sc.twin_t_end > 0.0)) invalid("twin.t_end must be positive");
    if (sc.twin_record_every < 1) invalid("twin.record_every must be >= 1");

    for (double x : sc.sweep_mass)
        if (!(x > 0.0)) invalid("sweep.mass entries must be positive");
    for (double x : sc.sweep_width)
        if (!(x > 0.0) || !(x <= sc.model.R)) invalid("sweep.width entries must lie in (0, R]");

    if (sc.derive.alpha && !(*sc.derive.alpha > 0.0)) invalid("exponents.alpha must be positive");
    if (!(sc.derive.ehrling_s > 0.0) || !(sc.derive.ehrling_r > sc.derive.ehrling_s))
        invalid("need 0 < ehrling.s < ehrling.r");
    if (!(sc.derive.moser_p_tilde > 1.0)) invalid("moser.p_tilde must exceed 1");
    if (sc.derive.moser_s && !(*sc.derive.moser_s > 0.0)) invalid("moser.s must be positive");
    if (sc.derive.moser_J < 1) invalid("moser.levels must be >= 1");

    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(read_text_file(path));
}

void Scenario::echo(KeyValueDoc& doc) const {
    doc.add("model.n", model.n);
    doc.add("model.R", model.R);
    doc.add("model.m", model.m.str());
    doc.add("model.q", model.q.str());
    doc.add("model.p", model.p_mass.str());
    doc.add("model.theta", model.theta.str());
    doc.add("model.beta", model.beta.str());
    doc.add("model.M", model.M);
    doc.add("model.L", model.L);
    doc.add("model.eta", model.eta);
    doc.add("grid.cells", grid_cells);
    doc.add("grid.grading", grid_grading);
    doc.add("init.mass", init_mass);
    doc.add("init.width", init_width);
    doc.add("init.v0", init_v0);
    doc.add("init.floor", init_floor);
    doc.add("mode", run_mode_name(mode));
    doc.add("reg.epsilon", reg_epsilon);
    doc.add("solver.dt_init", solver.dt_init);
    doc.add("solver.dt_min", solver.dt_min);
    doc.add("solver.dt_max", solver.dt_max);
    doc.add("solver.cfl_safety", solver.cfl_safety);
    doc.add("solver.blowup_threshold", solver.blowup_threshold);
    doc.add("solver.t_end", solver.t_end);
    doc.add("solver.linear_tol", solver.linear_tol);
    doc.add("solver.positivity_budget_rel", solver.positivity_budget_rel);
    doc.add("solver.growth_cap", solver.growth_cap);
    doc.add("solver.record_every", solver.record_every);
    doc.add("solver.picard_iters", solver.picard_iters);
    doc.add("solver.snapshot_factor", solver.snapshot_factor);
    doc.add("solver.max_steps", static_cast<long long>(solver.max_steps));
    doc.add("analysis.alpha", join_doubles(analysis.alphas));
    doc.add("analysis.theta", analysis.theta);
    doc.add("analysis.beta", analysis.beta);
    doc.add("analysis.annulus_in", analysis.annulus_in);
    doc.add("analysis.annulus_out", analysis.annulus_out);
    doc.add("analysis.profile_rcut", analysis.profile_rcut);
    doc.add("analysis.profile_tol", analysis.profile_tol);
    doc.add("analysis.margin", analysis.margin);
    doc.add("analysis.check_bounds", analysis.check_bounds);
    doc.add("twin.delta", twin_delta);
    doc.add("twin.dt", twin_dt);
    doc.add("twin.t_end", twin_t_end);
    doc.add("twin.record_every", twin_record_every);
    doc.add("sweep.mass", sweep_mass.empty() ? fmt_double(init_mass) : join_doubles(sweep_mass));
    doc.add("sweep.width", sweep_width.empty() ? fmt_double(init_width) : join_doubles(sweep_width));
    doc.add("sweep.m", sweep_m.empty() ? model.m.str() : join_rationals(sweep_m));
    doc.add("sweep.q", sweep_q.empty() ? model.q.str() : join_rationals(sweep_q));
    doc.add("exponents.alpha", derive.alpha ? fmt_double(*derive.alpha) : std::string("auto"));
    doc.add("ehrling.s", derive.ehrling_s);
    doc.add("ehrling.r", derive.ehrling_r);
    doc.add("moser.p_tilde", derive.moser_p_tilde);
    doc.add("moser.s", derive.moser_s ? fmt_double(*derive.moser_s) : std::string("auto"));
    doc.add("moser.levels", derive.moser_J);
}

} // namespace kslab
