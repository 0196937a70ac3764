#include "kslab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "kslab/errors.hpp"
#include "kslab/grid.hpp"
#include "kslab/kinetics.hpp"
#include "kslab/profile.hpp"

namespace kslab {

namespace {

struct Setup {
    RadialGrid grid;
    KineticFunctions kin;
    FieldState initial;
};

Setup make_setup(const Scenario& sc) {
    Setup s;
    s.grid = build_graded_grid(sc.model.n, sc.model.R, sc.grid_cells, sc.grid_grading);
    s.kin = prototype_kinetics(sc.model.m.value(), sc.model.q.value(), sc.model.eta);
    validate_kinetics(s.kin);
    s.initial = make_bump_initial(s.grid, sc.init_mass, sc.init_width, sc.init_v0, sc.init_floor);
    return s;
}

void write_series_csv(const std::filesystem::path& path, const RunReport& rep) {
    std::vector<std::string> header = {"t", "dt", "sup_u", "mass_u", "grad_norm", "vgrad_sup"};
    for (double a : rep.alphas) header.push_back("wsup_" + fmt_double(a));
    std::vector<std::vector<double>> rows;
    rows.reserve(rep.series.size());
    for (const auto& e : rep.series) {
        std::vector<double> row = {e.t, e.dt, e.sup_u, e.mass_u, e.grad_norm, e.vgrad_sup};
        row.insert(row.end(), e.wsup.begin(), e.wsup.end());
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void write_snapshots(const std::filesystem::path& dir, const RadialGrid& g, const RunReport& rep) {
    std::vector<std::vector<double>> index_rows;
    for (const auto& sn : rep.snapshots) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%03ld.csv", sn.index);
        std::vector<std::vector<double>> rows;
        rows.reserve(sn.u.size());
        for (size_t k = 0; k < sn.u.size(); ++k)
            rows.push_back({g.centers[k], sn.u[k], sn.v[k]});
        write_csv(dir / "snapshots" / name, {"r", "u", "v"}, rows);
        index_rows.push_back({static_cast<double>(sn.index), sn.t});
    }
    write_csv(dir / "snapshots" / "index.csv", {"index", "t"}, index_rows);
}

void add_run_keys(KeyValueDoc& doc, const RunReport& rep) {
    doc.add("verdict", verdict_name(rep.verdict));
    doc.add("reason", rep.reason);
    doc.add("t_final", rep.t_final);
    doc.add("sup_final", rep.sup_final);
    doc.add("steps_accepted", rep.steps_accepted);
    doc.add("steps_rejected", rep.steps_rejected);
    doc.add("mass_initial", rep.mass_initial);
    doc.add("mass_final", rep.mass_final);
    doc.add("max_mass_drift_rel", rep.max_mass_drift_rel);
    doc.add("clipped_mass_total", rep.clipped_mass_total);
    doc.add("min_u_seen", rep.min_u_seen);
    doc.add("min_v_seen", rep.min_v_seen);
    doc.add("max_grad_norm", rep.max_grad_norm);
    doc.add("series_entries", static_cast<long long>(rep.series.size()));
    doc.add("snapshot_count", static_cast<long long>(rep.snapshots.size()));
    if (rep.verdict == Verdict::BlownUp) {
        doc.add("t_low", rep.t_low);
        doc.add("t_high", rep.t_high);
    }
}

// profile.csv, fit.txt, and the same fit keys into the main report under a
// "fit." prefix. Fit problems are recorded, not fatal: the run itself stands.
void write_profile_artifacts(const std::filesystem::path& dir, const Scenario& sc,
                             const RadialGrid& g, const RunReport& rep, KeyValueDoc& doc) {
    const Snapshot& last = rep.snapshots.back();
    std::vector<std::vector<double>> rows;
    rows.reserve(last.u.size());
    for (size_t k = 0; k < last.u.size(); ++k)
        rows.push_back({g.centers[k], last.u[k], last.v[k]});
    write_csv(dir / "profile.csv", {"r", "U", "V"}, rows);

    KeyValueDoc fit_doc;
    fit_doc.add("t_profile", last.t);
    const double gap = profile_tail_gap(g, rep, sc.analysis.profile_rcut * g.R);
    const bool cauchy_ok = rep.snapshots.size() >= 3 && gap <= sc.analysis.profile_tol;
    fit_doc.add("cauchy_rel", gap);
    fit_doc.add("cauchy_ok", cauchy_ok);
    try {
        const ProfileFit fit =
            fit_decay_exponent(g, last.u, sc.analysis.annulus_in * g.R,
                               sc.analysis.annulus_out * g.R, sc.analysis.alphas.front());
        fit_doc.add("p_star", fit.p_star);
        fit_doc.add("log_c", fit.log_c);
        fit_doc.add("max_residual", fit.max_residual);
        fit_doc.add("cells_used", fit.cells_used);
        fit_doc.add("alpha", fit.alpha);
        fit_doc.add("c_alpha", fit.c_alpha);
        try {
            const ProfileBounds pb = check_profile_bounds(fit, sc.model, sc.analysis.margin);
            fit_doc.add("decay_cap", pb.decay_cap);
            fit_doc.add("decay_floor", pb.decay_floor);
            fit_doc.add("margin", pb.margin);
            fit_doc.add("upper_ok", pb.upper_ok);
            fit_doc.add("lower_ok", pb.lower_ok);
        } catch (const Error& e) {
            fit_doc.add("bounds_error", errc_name(e.code()));
        }
    } catch (const Error& e) {
        fit_doc.add("fit_error", errc_name(e.code()));
    }
    fit_doc.write(dir / "fit.txt");
    for (const auto& [k, v] : fit_doc.rows()) doc.add("fit." + k, v);
}

double fit_log_slope(const std::vector<TwinSeriesEntry>& series,
                     double TwinSeriesEntry::*field, double* amp) {
    std::vector<double> ts, ys;
    for (const auto& e : series) {
        const double val = e.*field;
        if (val > 0.0) {
            ts.push_back(e.t);
            ys.push_back(std::log(val));
        }
    }
    if (ts.size() < 2) {
        *amp = ts.empty() ? 0.0 : std::exp(ys.front());
        return 0.0;
    }
    double mt = 0.0, my = 0.0;
    for (size_t i = 0; i < ts.size(); ++i) {
        mt += ts[i];
        my += ys[i];
    }
    mt /= static_cast<double>(ts.size());
    my /= static_cast<double>(ts.size());
    double stt = 0.0, sty = 0.0;
    for (size_t i = 0; i < ts.size(); ++i) {
        stt += (ts[i] - mt) * (ts[i] - mt);
        sty += (ts[i] - mt) * (ys[i] - my);
    }
    if (!(stt > 0.0)) {
        *amp = std::exp(ys.front());
        return 0.0;
    }
    const double slope = sty / stt;
    *amp = std::exp(my - slope * mt);
    return slope;
}

std::string csv_join(const std::vector<std::string>& cells) {
    std::string out;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

struct SweepCell {
    double mass = 0.0, width = 0.0;
    Rational m, q;
};

std::vector<std::string> run_sweep_cell(const Scenario& base, const SweepCell& cell, size_t idx) {
    std::vector<std::string> row(13, "");
    row[0] = std::to_string(idx);
    row[1] = fmt_double(cell.mass);
    row[2] = fmt_double(cell.width);
    row[3] = cell.m.str();
    row[4] = cell.q.str();
    row[5] = "Error";
    row[6] = row[7] = row[8] = "nan";
    row[9] = row[10] = "na";
    row[11] = "nan";
    try {
        Scenario sc = base;
        sc.init_mass = cell.mass;
        sc.init_width = cell.width;
        sc.model.m = cell.m;
        sc.model.q = cell.q;
        const Setup st = make_setup(sc);
        const RunReport rep = run(st.grid, st.kin, nullptr, st.initial, sc.solver, sc.analysis);
        row[5] = verdict_name(rep.verdict);
        row[11] = fmt_double(rep.sup_final);
        if (rep.verdict == Verdict::BlownUp) {
            row[6] = fmt_double(rep.t_low);
            row[7] = fmt_double(rep.t_high);
            try {
                const ProfileFit fit = fit_decay_exponent(
                    st.grid, rep.snapshots.back().u, sc.analysis.annulus_in * st.grid.R,
                    sc.analysis.annulus_out * st.grid.R, sc.analysis.alphas.front());
                row[8] = fmt_double(fit.p_star);
                const ProfileBounds pb = check_profile_bounds(fit, sc.model, sc.analysis.margin);
                row[9] = fmt_bool(pb.upper_ok);
                row[10] = fmt_bool(pb.lower_ok);
            } catch (const Error& e) {
                row[12] = errc_name(e.code());
            }
        }
    } catch (const Error& e) {
        row[12] = errc_name(e.code());
    } catch (const std::exception&) {
        row[12] = "exception";
    }
    return row;
}

} // namespace

std::vector<double> smooth_noise(int n, std::uint64_t seed) {
    if (n < 1) fail(errc::validation_error, "noise needs at least one cell");
    std::mt19937_64 rng(seed);
    std::vector<double> x(n);
    for (auto& v : x)
        v = std::ldexp(static_cast<double>(rng() >> 11), -52) - 1.0;  // [-1, 1)
    for (int pass = 0; pass < 3; ++pass) {
        std::vector<double> y(n);
        for (int k = 0; k < n; ++k) {
            const double l = x[k > 0 ? k - 1 : 0];
            const double r = x[k + 1 < n ? k + 1 : n - 1];
            y[k] = 0.25 * l + 0.5 * x[k] + 0.25 * r;
        }
        x.swap(y);
    }
    double amp = 0.0;
    for (double v : x) amp = std::max(amp, std::abs(v));
    if (amp > 0.0)
        for (auto& v : x) v /= amp;
    return x;
}

TwinReport run_twin(const RadialGrid& g, const KineticFunctions& kin, const FieldState& base,
                    double delta, double dt, double t_end, int record_every, std::uint64_t seed,
                    const SolverConfig& cfg) {
    validate_state(g, base);
    if (!(delta >= 0.0) || !(delta < 1.0))
        fail(errc::validation_error, "twin delta must lie in [0,1)");
    if (!(dt > 0.0) || !(t_end >= dt))
        fail(errc::validation_error, "twin needs 0 < dt <= t_end");
    if (record_every < 1) fail(errc::validation_error, "twin record cadence must be >= 1");

    const int N = g.cells();
    const auto xi = smooth_noise(N, seed);
    FieldState b = base, d = base, h = base;
    for (int k = 0; k < N; ++k) {
        d.u[k] = base.u[k] * (1.0 + delta * xi[k]);
        h.u[k] = base.u[k] * (1.0 + 0.5 * delta * xi[k]);
    }

    TwinReport out;
    out.delta = delta;
    out.dt = dt;
    out.steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    out.min_cfl_margin = kInf;

    auto l2w = [&](const std::vector<double>& a, const std::vector<double>& bb) {
        double s = 0.0;
        for (int k = 0; k < N; ++k) {
            const double e = a[k] - bb[k];
            s += g.volumes[k] * e * e;
        }
        return std::sqrt(s);
    };
    auto record = [&](double t) {
        TwinSeriesEntry e;
        e.t = t;
        e.du_delta = l2w(d.u, b.u);
        e.du_half = l2w(h.u, b.u);
        e.ratio_u = e.du_delta > 0.0 ? e.du_half / e.du_delta : 0.0;
        e.dv_delta = l2w(d.v, b.v);
        e.dv_half = l2w(h.v, b.v);
        out.series.push_back(e);
    };
    record(0.0);

    for (long s = 1; s <= out.steps; ++s) {
        StepStats s1, s2, s3;
        b = step(g, kin, nullptr, b, dt, cfg, &s1);
        d = step(g, kin, nullptr, d, dt, cfg, &s2);
        h = step(g, kin, nullptr, h, dt, cfg, &s3);
        const double bound = std::min({s1.cfl_dt, s2.cfl_dt, s3.cfl_dt});
        const double margin = cfg.cfl_safety * bound / dt;
        out.min_cfl_margin = std::min(out.min_cfl_margin, margin);
        if (margin < 1.0)
            fail(errc::validation_error,
                 "twin dt " + std::to_string(dt) + " breaches the drift stability bound " +
                     std::to_string(cfg.cfl_safety * bound) + "; lower twin.dt");
        if (s % record_every == 0 || s == out.steps) record(static_cast<double>(s) * dt);
    }

    out.c_hat_delta = fit_log_slope(out.series, &TwinSeriesEntry::du_delta, &out.amp_delta);
    out.c_hat_half = fit_log_slope(out.series, &TwinSeriesEntry::du_half, &out.amp_half);
    bool first = true;
    for (const auto& e : out.series) {
        if (!(e.du_delta > 0.0)) continue;
        if (first) {
            out.ratio_min = out.ratio_max = e.ratio_u;
            first = false;
        } else {
            out.ratio_min = std::min(out.ratio_min, e.ratio_u);
            out.ratio_max = std::max(out.ratio_max, e.ratio_u);
        }
    }
    return out;
}

int cmd_exponents(const Scenario& sc, const CmdOptions& opt, std::ostream& log) {
    const DerivedExponents d = derive_exponents(sc.model, sc.derive);
    KeyValueDoc doc;
    sc.echo(doc);
    doc.add("critical_alpha",
            d.critical_alpha ? fmt_double(*d.critical_alpha) : std::string("undefined"));
    doc.add("lower_bound_alpha", d.lower_bound_alpha);
    doc.add("admissible_ks", d.admissible_ks);
    doc.add("admissible_scalar", d.admissible_scalar);
    doc.add("scalar_alpha_threshold",
            d.threshold ? fmt_double(*d.threshold) : std::string("undefined"));
    doc.add("sobolev_limit", sobolev_limit(sc.model.n));
    if (d.iter) {
        doc.add("alpha", d.iter->alpha);
        doc.add("beta_effective", d.iter->beta_effective);
        for (int i = 0; i < 3; ++i) {
            const std::string suffix = "_" + std::to_string(i + 1);
            doc.add("mu" + suffix, d.iter->mu[i]);
            doc.add("gamma" + suffix, d.iter->gamma[i]);
            doc.add("kappa" + suffix, d.iter->kappa[i]);
            doc.add("lambda" + suffix, d.iter->lambda[i]);
        }
    }
    doc.add("moser_s", d.moser.s);
    doc.add("moser_s0", d.moser.s0);
    doc.add("moser_p0", d.moser.p0);
    {
        std::string ps;
        for (size_t j = 0; j < d.moser.p.size(); ++j) {
            if (j) ps += ',';
            ps += fmt_double(d.moser.p[j]);
        }
        doc.add("moser_p", ps);
    }
    doc.add("ehrling_a", d.moser.a.value());
    doc.add("ehrling_nu", d.moser.nu.value());
    doc.write(opt.out_dir / "report.txt");
    log << doc.str();
    return d.admissible_ks ? 0 : kExitFailure;
}

int cmd_simulate(const Scenario& sc, const CmdOptions& opt, std::ostream& log) {
    const Setup st = make_setup(sc);
    RunReport rep, plain;
    AgreementSummary agr;
    if (sc.mode == RunMode::Regularized) {
        const RegularizationParams reg{sc.reg_epsilon};
        rep = run(st.grid, st.kin, &reg, st.initial, sc.solver, sc.analysis);
        plain = run(st.grid, st.kin, nullptr, st.initial, sc.solver, sc.analysis);
        agr = compare_runs(rep, plain, 1.0 / sc.reg_epsilon);
    } else {
        rep = run(st.grid, st.kin, nullptr, st.initial, sc.solver, sc.analysis);
    }

    write_series_csv(opt.out_dir / "series.csv", rep);
    write_snapshots(opt.out_dir, st.grid, rep);
    KeyValueDoc doc;
    sc.echo(doc);
    add_run_keys(doc, rep);
    if (rep.verdict == Verdict::BlownUp) write_profile_artifacts(opt.out_dir, sc, st.grid, rep, doc);
    if (sc.mode == RunMode::Regularized) {
        doc.add("agreement.t_eps", agr.t_eps);
        doc.add("agreement.max_deviation", agr.max_deviation);
        doc.add("agreement.points", agr.points);
        doc.add("agreement.plain_verdict", verdict_name(plain.verdict));
    }
    doc.write(opt.out_dir / "report.txt");

    log << "verdict=" << verdict_name(rep.verdict) << " t_final=" << fmt_double(rep.t_final)
        << " sup_final=" << fmt_double(rep.sup_final) << "\n";
    if (rep.verdict == Verdict::BlownUp)
        log << "blow-up bracket [" << fmt_double(rep.t_low) << ", " << fmt_double(rep.t_high)
            << "]\n";
    if (rep.verdict == Verdict::Failed) {
        log << "run failed: " << rep.reason << "\n";
        return kExitSolver;
    }
    return 0;
}

int cmd_twin(const Scenario& sc, const CmdOptions& opt, std::ostream& log) {
    const Setup st = make_setup(sc);
    const TwinReport tw = run_twin(st.grid, st.kin, st.initial, sc.twin_delta, sc.twin_dt,
                                   sc.twin_t_end, sc.twin_record_every, opt.seed, sc.solver);

    std::vector<std::vector<double>> rows;
    rows.reserve(tw.series.size());
    for (const auto& e : tw.series)
        rows.push_back({e.t, e.du_delta, e.du_half, e.ratio_u, e.dv_delta, e.dv_half});
    write_csv(opt.out_dir / "twin.csv",
              {"t", "du_delta", "du_half", "ratio_u", "dv_delta", "dv_half"}, rows);

    const double gap = std::abs(tw.c_hat_delta - tw.c_hat_half) /
                       std::max({std::abs(tw.c_hat_delta), std::abs(tw.c_hat_half), 1e-300});
    KeyValueDoc doc;
    sc.echo(doc);
    doc.add("seed", static_cast<long long>(opt.seed));
    doc.add("delta", tw.delta);
    doc.add("dt", tw.dt);
    doc.add("steps", tw.steps);
    doc.add("c_hat_delta", tw.c_hat_delta);
    doc.add("c_hat_half", tw.c_hat_half);
    doc.add("c_hat_rel_gap", gap);
    doc.add("amp_delta", tw.amp_delta);
    doc.add("amp_half", tw.amp_half);
    doc.add("ratio_min", tw.ratio_min);
    doc.add("ratio_max", tw.ratio_max);
    doc.add("min_cfl_margin", tw.min_cfl_margin);
    doc.add("du_delta_final", tw.series.back().du_delta);
    doc.add("du_half_final", tw.series.back().du_half);
    doc.write(opt.out_dir / "report.txt");

    log << "twin: c_hat_delta=" << fmt_double(tw.c_hat_delta)
        << " c_hat_half=" << fmt_double(tw.c_hat_half) << " rel_gap=" << fmt_double(gap)
        << " ratio in [" << fmt_double(tw.ratio_min) << ", " << fmt_double(tw.ratio_max) << "]\n";
    return 0;
}

int cmd_sweep(const Scenario& sc, const CmdOptions& opt, std::ostream& log) {
    const std::vector<double> masses =
        sc.sweep_mass.empty() ? std::vector<double>{sc.init_mass} : sc.sweep_mass;
    const std::vector<double> widths =
        sc.sweep_width.empty() ? std::vector<double>{sc.init_width} : sc.sweep_width;
    const std::vector<Rational> ms =
        sc.sweep_m.empty() ? std::vector<Rational>{sc.model.m} : sc.sweep_m;
    const std::vector<Rational> qs =
        sc.sweep_q.empty() ? std::vector<Rational>{sc.model.q} : sc.sweep_q;

    std::vector<SweepCell> cells;
    for (double mass : masses)
        for (double width : widths)
            for (const Rational& m : ms)
                for (const Rational& q : qs) cells.push_back({mass, width, m, q});

    const std::vector<std::string> header = {"index", "mass",  "width",    "m",
                                             "q",     "verdict", "t_low",   "t_high",
                                             "p_star", "upper_ok", "lower_ok", "sup_final",
                                             "error"};
    std::filesystem::create_directories(opt.out_dir);
    std::ofstream csv(opt.out_dir / "sweep.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write " + (opt.out_dir / "sweep.csv").string());
    csv << csv_join(header) << '\n';

    const size_t jobs = static_cast<size_t>(std::max(1, opt.jobs));
    std::vector<std::vector<std::string>> rows(cells.size());
    for (size_t start = 0; start < cells.size(); start += jobs) {
        const size_t stop = std::min(cells.size(), start + jobs);
        std::vector<std::thread> pool;
        for (size_t i = start; i < stop; ++i)
            pool.emplace_back([&rows, &sc, &cells, i] { rows[i] = run_sweep_cell(sc, cells[i], i); });
        for (auto& th : pool) th.join();
        for (size_t i = start; i < stop; ++i) {
            csv << csv_join(rows[i]) << '\n';
            log << "cell " << i << ": mass=" << rows[i][1] << " width=" << rows[i][2]
                << " m=" << rows[i][3] << " q=" << rows[i][4] << " -> " << rows[i][5] << "\n";
        }
        csv.flush();
    }

    long blown = 0, completed = 0, failed = 0, errored = 0;
    for (const auto& row : rows) {
        if (row[5] == "BlownUp") ++blown;
        else if (row[5] == "Completed") ++completed;
        else if (row[5] == "Failed") ++failed;
        else ++errored;
    }
    KeyValueDoc doc;
    sc.echo(doc);
    doc.add("cells", static_cast<long long>(cells.size()));
    doc.add("blownup", blown);
    doc.add("completed", completed);
    doc.add("failed", failed);
    doc.add("errored", errored);
    doc.write(opt.out_dir / "report.txt");
    log << "sweep: " << cells.size() << " cells, " << blown << " blown up, " << completed
        << " completed, " << failed << " failed, " << errored << " errored\n";
    return 0;
}

} // namespace kslab
