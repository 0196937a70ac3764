#include "kslab/acceptance.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <utility>

#include "kslab/errors.hpp"
#include "kslab/exponents.hpp"
#include "kslab/grid.hpp"
#include "kslab/kinetics.hpp"
#include "kslab/profile.hpp"
#include "kslab/solver.hpp"

namespace kslab {

namespace {

std::uint64_t criterion_seed(std::uint64_t seed, int id) {
    return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(id));
}

// Uniform in [0, 1), built from the raw engine word so the stream is
// byte-stable across standard library implementations.
double unit_draw(std::mt19937_64& rng) {
    return std::ldexp(static_cast<double>(rng() >> 11), -53);
}

long pick(std::mt19937_64& rng, long lo, long hi) {
    return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    const size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    return xs[mid];
}

template <typename Fn>
CriterionResult guarded(int id, const char* name, Fn&& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = e.what();
    }
    return r;
}

CriterionResult criterion_exponent_reproduction() {
    return guarded(1, "critical decay exponents reproduce exactly", [](CriterionResult& r) {
        int cases = 0;
        bool ok = true;
        auto expect = [&](int n, const Rational& m, double want) {
            ModelParams mp;
            mp.n = n;
            mp.m = m;
            mp.q = Rational(1);
            ++cases;
            if (critical_alpha(mp) != want) {
                ok = false;
                if (r.detail.empty())
                    r.detail = "n=" + std::to_string(n) + " m=" + m.str() + ": got " +
                               fmt_double(critical_alpha(mp)) + ", want " + fmt_double(want);
            }
        };
        expect(3, Rational(1), 6.0);
        for (int n = 2; n <= 6; ++n) expect(n, Rational(1), static_cast<double>(n * (n - 1)));
        // m - q right at the window edge (n-2)/n collapses the exponent to n.
        for (int n = 2; n <= 6; ++n) expect(n, Rational(2 * n - 2, n), static_cast<double>(n));
        r.metrics.add("cases", cases);
        r.pass = ok;
    });
}

CriterionResult criterion_lemma_ranges(std::uint64_t seed) {
    return guarded(2, "iteration exponents stay in their admissible ranges",
                   [seed](CriterionResult& r) {
        std::mt19937_64 rng(seed);
        const int trials = 10000;
        int violations = 0;
        std::string first;
        for (int t = 0; t < trials; ++t) {
            const int n = static_cast<int>(pick(rng, 2, 5));
            const Rational p(pick(rng, 16, 48), 16);              // [1, 3]
            const Rational theta = Rational(n) + Rational(pick(rng, 1, 8 * (50 - n)), 8);
            const Rational beta(16 + pick(rng, 0, 80), 16);       // [1, 6]
            const Rational m(pick(rng, 16, 64), 16);              // [1, 4]
            const Rational lo = p / theta - p / Rational(n);
            const Rational hi = p / theta + (beta - Rational(1)) * p / Rational(n);
            const Rational d = lo + Rational(pick(rng, 1, 128), 128) * (hi - lo);
            ModelParams mp;
            mp.n = n;
            mp.m = m;
            mp.q = m - d;
            mp.p_mass = p;
            mp.theta = theta;
            mp.beta = beta;

            auto flag = [&](const std::string& what) {
                ++violations;
                if (first.empty())
                    first = what + " at n=" + std::to_string(n) + " p=" + p.str() +
                            " theta=" + theta.str() + " beta=" + beta.str() + " d=" + d.str();
            };
            if (!admissible_scalar(mp)) {
                flag("window membership");
                continue;
            }
            const double threshold = scalar_alpha_threshold(mp);
            const double alpha = threshold * (1.001 + (10.0 - 1.001) * unit_draw(rng));
            const IterationExponents it = iteration_exponents(mp, alpha);
            const double sob = sobolev_limit(n);
            for (int i = 0; i < 3; ++i) {
                const double lam = it.lambda[i];
                if (!(lam > 1.0) || !std::isfinite(lam)) {
                    flag("lambda_" + std::to_string(i + 1) + "=" + fmt_double(lam));
                    continue;
                }
                const double combo = 2.0 * it.kappa[i] * lam / (lam - 1.0);
                if (!(combo < sob)) flag("2*kappa*lambda/(lambda-1)=" + fmt_double(combo));
            }
        }
        r.metrics.add("trials", trials);
        r.metrics.add("violations", violations);
        r.pass = violations == 0;
        r.detail = first;
    });
}

CriterionResult criterion_moser_ladder() {
    return guarded(3, "bootstrap exponent ladder recursion and growth bounds",
                   [](CriterionResult& r) {
        const std::array<std::pair<double, double>, 4> cases = {
            {{1.0, 0.5}, {2.0, 0.5}, {3.0, 0.25}, {0.5, 0.5}}};
        const int J = 40;
        long checks = 0;
        bool ok = true;
        for (const auto& [m, s] : cases) {
            const MoserSchedule ms = moser_schedule(m, s, 2.0, J, 2);
            if (ms.p.size() != static_cast<size_t>(J) + 1) {
                ok = false;
                r.detail = "schedule length mismatch";
                continue;
            }
            const int k = s == 0.5 ? 2 : 3;  // log2(2/s), exact for dyadic s
            for (int j = 1; j <= J; ++j) {
                const double expect = (ms.p[j - 1] + 1.0 - (m - 1.0) * s) / s;
                ++checks;
                if (ms.p[j] != expect) {
                    ok = false;
                    if (r.detail.empty())
                        r.detail = "recursion mismatch at m=" + fmt_double(m) +
                                   " j=" + std::to_string(j);
                }
            }
            for (int j = 0; j <= J; ++j) {
                const double floor = std::ldexp(ms.p0, j);
                const double ceil = std::ldexp(ms.p0, k * j);
                ++checks;
                if (!(ms.p[j] >= floor) || !(ms.p[j] <= ceil)) {
                    ok = false;
                    if (r.detail.empty())
                        r.detail = "growth bound violated at m=" + fmt_double(m) +
                                   " j=" + std::to_string(j);
                }
            }
        }
        r.metrics.add("schedules", static_cast<int>(cases.size()));
        r.metrics.add("rungs", J);
        r.metrics.add("checks", checks);
        r.pass = ok;
    });
}

CriterionResult criterion_ehrling(std::uint64_t seed) {
    return guarded(4, "interpolation exponent lands strictly inside (0,1)",
                   [seed](CriterionResult& r) {
        std::mt19937_64 rng(seed);
        const int trials = 1000;
        bool ok = true;
        for (int t = 0; t < trials; ++t) {
            const int n = static_cast<int>(pick(rng, 2, 6));
            const double cap = n == 2 ? 50.0 : sobolev_limit(n);
            double a = unit_draw(rng), b = unit_draw(rng);
            if (a > b) std::swap(a, b);
            const double s = cap * (0.001 + 0.997 * a);
            const double rr = cap * (0.002 + 0.997 * b);
            const double e = ehrling_exponent(n, s, rr);
            if (!(e > 0.0) || !(e < 1.0)) {
                ok = false;
                if (r.detail.empty())
                    r.detail = "a=" + fmt_double(e) + " at n=" + std::to_string(n) +
                               " s=" + fmt_double(s) + " r=" + fmt_double(rr);
            }
        }
        const double pinned = ehrling_exponent(2, 1.0, 2.0);
        if (pinned != 0.5) {
            ok = false;
            r.detail = "a(2,1,2)=" + fmt_double(pinned) + ", want 0.5";
        }
        r.metrics.add("trials", trials);
        r.metrics.add("a_2_1_2", pinned);
        r.pass = ok;
    });
}

CriterionResult criterion_laplacian_order() {
    return guarded(5, "radial Laplacian converges at second order", [](CriterionResult& r) {
        const double pi = std::acos(-1.0);
        std::vector<double> errs;
        for (int N : {64, 128, 256, 512}) {
            const RadialGrid g = build_graded_grid(3, 1.0, N, 1.0);
            std::vector<double> v(g.centers.size());
            for (size_t k = 0; k < v.size(); ++k) v[k] = std::cos(pi * g.centers[k]);
            const std::vector<double> lap = radial_laplacian(g, v);
            double err = 0.0;
            for (size_t k = 0; k < v.size(); ++k) {
                const double rr = g.centers[k];
                const double exact = -pi * pi * std::cos(pi * rr) - 2.0 * pi / rr * std::sin(pi * rr);
                err = std::max(err, std::abs(lap[k] - exact));
            }
            errs.push_back(err);
            r.metrics.add("err_" + std::to_string(N), err);
        }
        bool ok = true;
        double worst = kInf;
        for (size_t i = 0; i + 1 < errs.size(); ++i) {
            const double order = std::log2(errs[i] / errs[i + 1]);
            worst = std::min(worst, order);
            r.metrics.add("order_" + std::to_string(i), order);
            if (!(order >= 1.9)) ok = false;
        }
        if (!ok) r.detail = "observed order " + fmt_double(worst) + " below 1.9";
        r.pass = ok;
    });
}

CriterionResult criterion_relaxation() {
    return guarded(6, "decoupled signal relaxation matches the exact exponential",
                   [](CriterionResult& r) {
        const RadialGrid g = build_graded_grid(3, 1.0, 128, 1.0);
        KineticFunctions kin;
        kin.m = 1.0;
        kin.q = 1.0;
        kin.D = [](double, double) { return 1.0; };
        kin.S = [](double, double) { return 0.0; };
        kin.g = [](double u) { return u; };
        kin.mobility = [](double, double) { return 0.0; };
        kin.K_S = 0.0;
        validate_kinetics(kin);

        FieldState st;
        st.u.assign(g.centers.size(), 1.0);
        st.v.assign(g.centers.size(), 1.01);
        const SolverConfig cfg;
        const double dt = 1e-4;
        double max_err = 0.0;
        for (int k = 1; k <= 10000; ++k) {
            st = step(g, kin, nullptr, st, dt, cfg);
            const double exact = 1.0 + 0.01 * std::exp(-st.t);
            for (double v : st.v) max_err = std::max(max_err, std::abs(v - exact));
        }
        r.metrics.add("steps", 10000);
        r.metrics.add("dt", dt);
        r.metrics.add("max_err", max_err);
        r.pass = max_err < 1e-6;
        if (!r.pass) r.detail = "max deviation " + fmt_double(max_err);
    });
}

// Criteria 7 and 10 interrogate the same expensive aggregation run.
struct BlowupBundle {
    RadialGrid grid;
    ModelParams mp;
    AnalysisSpec spec;
    RunReport rep;
    std::string error;
};

BlowupBundle make_blowup_bundle() {
    BlowupBundle b;
    b.mp.n = 3;
    b.mp.m = Rational(1);
    b.mp.q = Rational(1);
    b.spec.alphas = {6.5};
    b.spec.annulus_in = 0.05;
    b.spec.annulus_out = 0.3;
    b.spec.profile_rcut = 0.2;
    b.spec.profile_tol = 1e-3;
    try {
        b.grid = build_graded_grid(3, 1.0, 512, 1.02);
        const KineticFunctions kin = prototype_kinetics(1.0, 1.0, 1e-12);
        const FieldState init = make_bump_initial(b.grid, 2.0, 0.1, 0.0, 0.0);
        SolverConfig cfg;
        cfg.dt_init = 1e-6;
        cfg.dt_min = 1e-15;
        cfg.dt_max = 1e-4;
        cfg.blowup_threshold = 1e10;
        cfg.t_end = 1.0;
        cfg.record_every = 1;
        cfg.snapshot_factor = 2.0;
        b.rep = run(b.grid, kin, nullptr, init, cfg, b.spec);
    } catch (const std::exception& e) {
        b.error = e.what();
    }
    return b;
}

CriterionResult criterion_conservation(const BlowupBundle& b) {
    return guarded(7, "mass conservation and positivity through blow-up",
                   [&b](CriterionResult& r) {
        if (!b.error.empty()) {
            r.detail = b.error;
            return;
        }
        const RunReport& rep = b.rep;
        const double clipped_rel = rep.clipped_mass_total / rep.mass_initial;
        r.metrics.add("verdict", verdict_name(rep.verdict));
        r.metrics.add("t_final", rep.t_final);
        r.metrics.add("sup_final", rep.sup_final);
        r.metrics.add("max_mass_drift_rel", rep.max_mass_drift_rel);
        r.metrics.add("clipped_mass_rel", clipped_rel);
        r.metrics.add("min_u_seen", rep.min_u_seen);
        r.metrics.add("min_v_seen", rep.min_v_seen);
        r.pass = rep.verdict == Verdict::BlownUp && rep.max_mass_drift_rel < 1e-10 &&
                 rep.min_u_seen >= 0.0 && rep.min_v_seen >= 0.0 && clipped_rel < 1e-8;
        if (!r.pass)
            r.detail = rep.verdict != Verdict::BlownUp
                           ? "expected a blown-up run, got " + std::string(verdict_name(rep.verdict)) +
                                 " (" + rep.reason + ")"
                           : "conservation or positivity bound violated";
    });
}

CriterionResult criterion_agreement() {
    return guarded(8, "cutoff regularization leaves sub-threshold runs unchanged",
                   [](CriterionResult& r) {
        const RadialGrid g = build_graded_grid(3, 1.0, 128, 1.0);
        const KineticFunctions kin = prototype_kinetics(2.0, 1.0, 1e-12);
        const FieldState init = make_bump_initial(g, 1.0, 0.2, 0.0, 0.0);
        SolverConfig cfg;
        cfg.dt_init = 1e-6;
        cfg.dt_min = 1e-12;
        cfg.dt_max = 1e-4;
        cfg.t_end = 0.05;
        cfg.record_every = 1;
        AnalysisSpec spec;
        spec.alphas = {1.5};

        const RunReport plain = run(g, kin, nullptr, init, cfg, spec);
        double max_sup = 0.0;
        for (const auto& e : plain.series) max_sup = std::max(max_sup, e.sup_u);
        if (!(max_sup > 0.5)) {
            r.detail = "plain run stayed below sup 0.5, cutoff scale undefined";
            return;
        }
        const RegularizationParams reg{1.0 / (2.0 * max_sup)};
        const RunReport regd = run(g, kin, &reg, init, cfg, spec);
        const AgreementSummary agr = compare_runs(regd, plain, 2.0 * max_sup);

        r.metrics.add("max_sup", max_sup);
        r.metrics.add("epsilon", reg.epsilon);
        r.metrics.add("t_eps", agr.t_eps);
        r.metrics.add("points", agr.points);
        r.metrics.add("max_deviation", agr.max_deviation);
        r.metrics.add("plain_verdict", verdict_name(plain.verdict));
        r.metrics.add("regularized_verdict", verdict_name(regd.verdict));
        r.pass = plain.verdict == Verdict::Completed && regd.verdict == Verdict::Completed &&
                 agr.points > 0 && agr.max_deviation < 1e-8;
        if (!r.pass) r.detail = "deviation " + fmt_double(agr.max_deviation);
    });
}

CriterionResult criterion_twin(std::uint64_t seed) {
    return guarded(9, "twin perturbations halve with delta and share one growth rate",
                   [seed](CriterionResult& r) {
        const RadialGrid g = build_graded_grid(3, 1.0, 128, 1.0);
        const KineticFunctions kin = prototype_kinetics(1.0, 1.0, 1e-12);
        const FieldState init = make_bump_initial(g, 0.5, 0.2, 0.0, 0.0);
        const SolverConfig cfg;
        const TwinReport tw = run_twin(g, kin, init, 1e-3, 2e-5, 0.03, 25, seed, cfg);
        const double gap = std::abs(tw.c_hat_delta - tw.c_hat_half) /
                           std::max({std::abs(tw.c_hat_delta), std::abs(tw.c_hat_half), 1e-300});
        r.metrics.add("records", static_cast<long long>(tw.series.size()));
        r.metrics.add("c_hat_delta", tw.c_hat_delta);
        r.metrics.add("c_hat_half", tw.c_hat_half);
        r.metrics.add("c_hat_rel_gap", gap);
        r.metrics.add("ratio_min", tw.ratio_min);
        r.metrics.add("ratio_max", tw.ratio_max);
        r.metrics.add("min_cfl_margin", tw.min_cfl_margin);
        r.pass = gap <= 0.2 && tw.ratio_min >= 0.4 && tw.ratio_max <= 0.6;
        if (!r.pass)
            r.detail = "rate gap " + fmt_double(gap) + ", ratio range [" +
                       fmt_double(tw.ratio_min) + ", " + fmt_double(tw.ratio_max) + "]";
    });
}

CriterionResult criterion_profile(const BlowupBundle& b) {
    return guarded(10, "limiting profile obeys the decay window", [&b](CriterionResult& r) {
        if (!b.error.empty()) {
            r.detail = b.error;
            return;
        }
        const RunReport& rep = b.rep;
        if (rep.verdict != Verdict::BlownUp) {
            r.detail = "expected a blown-up run, got " + std::string(verdict_name(rep.verdict));
            return;
        }
        std::vector<double> sups, wsups;
        sups.reserve(rep.series.size());
        wsups.reserve(rep.series.size());
        for (const auto& e : rep.series) {
            sups.push_back(e.sup_u);
            if (!e.wsup.empty()) wsups.push_back(e.wsup[0]);
        }
        const double sup_ratio = rep.series.back().sup_u / median_of(sups);
        const double wsup_ratio =
            wsups.empty() ? kInf : rep.series.back().wsup[0] / median_of(wsups);
        r.metrics.add("sup_final_over_median", sup_ratio);
        r.metrics.add("wsup_final_over_median", wsup_ratio);

        const ProfilePair pp =
            extract_profile(b.grid, rep, b.spec.profile_rcut * b.grid.R, b.spec.profile_tol);
        const ProfileFit fit =
            fit_decay_exponent(b.grid, pp.u, b.spec.annulus_in * b.grid.R,
                               b.spec.annulus_out * b.grid.R, b.spec.alphas[0]);
        const ProfileBounds pb = check_profile_bounds(fit, b.mp, 0.5);
        r.metrics.add("cauchy_rel", pp.cauchy_rel);
        r.metrics.add("t_profile", pp.t_profile);
        r.metrics.add("p_star", fit.p_star);
        r.metrics.add("c_alpha", fit.c_alpha);
        r.metrics.add("decay_floor", pb.decay_floor);
        r.metrics.add("decay_cap", pb.decay_cap);
        r.metrics.add("lower_ok", pb.lower_ok);
        r.metrics.add("upper_ok", pb.upper_ok);
        r.pass = wsup_ratio < 1e2 && sup_ratio > 1e6 && pb.lower_ok;
        if (!r.pass)
            r.detail = "wsup ratio " + fmt_double(wsup_ratio) + ", sup ratio " +
                       fmt_double(sup_ratio) + ", p_star " + fmt_double(fit.p_star);
    });
}

} // namespace

std::vector<CriterionResult> run_acceptance(std::uint64_t seed, std::ostream* progress) {
    std::vector<CriterionResult> out;
    auto mark = std::chrono::steady_clock::now();
    auto push = [&](CriterionResult r) {
        if (progress) {
            const auto now = std::chrono::steady_clock::now();
            const double secs = std::chrono::duration<double>(now - mark).count();
            mark = now;
            char timing[32];
            std::snprintf(timing, sizeof timing, "%.1fs", secs);
            *progress << "criterion " << r.id << " [" << r.name
                      << "]: " << (r.pass ? "pass" : "FAIL");
            if (!r.pass && !r.detail.empty()) *progress << " (" << r.detail << ")";
            *progress << " in " << timing << "\n";
        }
        out.push_back(std::move(r));
    };

    push(criterion_exponent_reproduction());
    push(criterion_lemma_ranges(criterion_seed(seed, 2)));
    push(criterion_moser_ladder());
    push(criterion_ehrling(criterion_seed(seed, 4)));
    push(criterion_laplacian_order());
    push(criterion_relaxation());
    if (progress) *progress << "running the shared aggregation case (n=3, 512 cells)...\n";
    const BlowupBundle bundle = make_blowup_bundle();
    push(criterion_conservation(bundle));
    push(criterion_agreement());
    push(criterion_twin(criterion_seed(seed, 9)));
    push(criterion_profile(bundle));
    return out;
}

int cmd_verify(const CmdOptions& opt, std::ostream& log) {
    const std::vector<CriterionResult> results = run_acceptance(opt.seed, &log);
    KeyValueDoc doc;
    doc.add("seed", static_cast<long long>(opt.seed));
    bool all = true;
    for (const auto& r : results) {
        const std::string prefix = "criterion_" + std::to_string(r.id);
        doc.add(prefix, r.pass ? "pass" : "fail");
        doc.add(prefix + ".name", r.name);
        if (!r.detail.empty()) doc.add(prefix + ".detail", r.detail);
        for (const auto& [k, v] : r.metrics.rows()) doc.add(prefix + "." + k, v);
        all = all && r.pass;
    }
    doc.add("overall", all ? "pass" : "fail");
    doc.write(opt.out_dir / "report.txt");
    log << "overall: " << (all ? "pass" : "FAIL") << "\n";
    return all ? 0 : kExitFailure;
}

} // namespace kslab
