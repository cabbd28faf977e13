#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "etsim/adversary.hpp"
#include "etsim/bounds.hpp"
#include "etsim/config.hpp"
#include "etsim/csv.hpp"
#include "etsim/engine.hpp"
#include "etsim/modal.hpp"

namespace fs = std::filesystem;
using namespace etsim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitZeno = 3;

std::string fmt(Real v) { return csv::Writer::format(v); }

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
}

void write_scalar_trajectory(const engine::RunResult& r, bool complex_mode, const fs::path& dir) {
    std::vector<std::string> head{"t"};
    auto add = [&](const std::string& base) {
        head.push_back(base);
        if (complex_mode) head.push_back(base + "_im");
    };
    add("x");
    add("xhat");
    add("z");
    add("u");
    add("w");
    csv::Writer w(head);
    for (std::size_t i = 0; i < r.traj.size(); ++i) {
        std::vector<Real> row{r.traj.t[i]};
        auto push = [&](Complex v) {
            row.push_back(v.real());
            if (complex_mode) row.push_back(v.imag());
        };
        push(r.traj.x[i]);
        push(r.traj.xhat[i]);
        push(r.traj.z[i]);
        push(r.traj.u[i]);
        push(r.traj.w[i]);
        w.row(row);
    }
    w.save((dir / "trajectory.csv").string());
}

void write_events(const engine::EventLog& ev, const fs::path& dir) {
    csv::Writer w({"k", "t_s", "t_c", "delay", "g_bits", "z_post_jump", "packet"});
    for (std::size_t k = 0; k < ev.count(); ++k) {
        const bool rx = k < ev.tc.size();
        w.raw_row({std::to_string(k + 1), fmt(ev.ts[k]), rx ? fmt(ev.tc[k]) : "nan",
                   rx ? fmt(ev.delay[k]) : "nan", std::to_string(ev.g_bits[k]),
                   k < ev.z_post_jump.size() ? fmt(ev.z_post_jump[k]) : "nan",
                   ev.packets_hex[k]});
    }
    w.save((dir / "events.csv").string());
}

int cmd_simulate(const config::ExperimentConfig& cfg, const fs::path& out_dir) {
    if (cfg.mode == config::Mode::ScalarReal || cfg.mode == config::Mode::ScalarComplex) {
        const bool cm = cfg.mode == config::Mode::ScalarComplex;
        const auto violations = validate_config(
            cfg.run.plant, cfg.run.trig,
            cm ? ValidationMode::SufficientComplex : ValidationMode::SufficientReal);
        if (!violations.empty()) {
            for (const auto& v : violations) std::cerr << "config violation: " << v << "\n";
            return kExitConfig;
        }
        engine::RunResult r;
        try {
            r = cm ? engine::run_complex(cfg.run) : engine::run_real(cfg.run);
        } catch (const std::exception& e) {
            std::cerr << "simulate: " << e.what() << "\n";
            return kExitConfig;
        }
        if (r.zeno_aborted) {
            std::cerr << "simulate: " << r.error << "\n";
            return kExitZeno;
        }
        if (!r.error.empty()) {
            std::cerr << "simulate: " << r.error << "\n";
            return kExitConfig;
        }
        write_scalar_trajectory(r, cm, out_dir);
        write_events(r.events, out_dir);
        const auto inv = engine::check_invariants(r, cfg.run);
        std::ostringstream s;
        s << "events=" << r.events.count() << "\n"
          << "packet_bits=" << r.packet_bits << "\n"
          << "realized_rate=" << fmt(r.realized_rate) << "\n"
          << "realized_trigger_rate=" << fmt(r.realized_trigger_rate) << "\n"
          << "max_abs_z=" << fmt(r.sup_abs_z) << "\n"
          << "max_abs_x=" << fmt(r.sup_abs_x) << "\n"
          << "w_sup_realized=" << fmt(r.w_sup_realized) << "\n"
          << "jump_contract_ok=" << (inv.jump_contract_ok ? 1 : 0) << "\n"
          << "jump_radius_ok=" << (inv.jump_radius_ok ? 1 : 0) << "\n"
          << "error_envelope_ok=" << (inv.error_envelope_ok ? 1 : 0) << "\n"
          << "min_interval_ok=" << (inv.min_interval_ok ? 1 : 0) << "\n"
          << "rate_ok=" << (inv.rate_ok ? 1 : 0) << "\n"
          << "state_bound_ok=" << (inv.state_bound_ok ? 1 : 0) << "\n"
          << "all_invariants_ok=" << (inv.all_ok() ? 1 : 0) << "\n";
        write_file(out_dir / "summary.txt", s.str());
        return 0;
    }

    // pendulum / custom-vector
    modal::ModalRunResult run;
    modal::PendulumResult pres;
    int packet_bits = 0;
    if (cfg.mode == config::Mode::Pendulum) {
        if (cfg.pendulum.gamma < 2.0 * cfg.pendulum.dt) {
            std::cerr << "config violation: gamma must be at least two sampling times ("
                      << fmt(2.0 * cfg.pendulum.dt) << " s)\n";
            return kExitConfig;
        }
        pres = modal::run_pendulum(cfg.pendulum);
        run = std::move(pres.run);
        packet_bits = pres.packet_bits;
    } else {
        modal::ModalRunOptions mo;
        mo.gamma = cfg.run.trig.gamma;
        mo.rho0 = cfg.run.trig.rho0;
        mo.b = cfg.run.trig.b;
        mo.lambda = cfg.run.trig.lambda;
        mo.J_offset = cfg.run.trig.J;  // additive margin on each mode radius
        mo.dt = cfg.run.dt;
        mo.T = cfg.run.T;
        mo.seed = cfg.run.seed;
        mo.channel = cfg.run.channel.kind;
        mo.disturbance = cfg.run.disturbance.kind;
        if (cfg.run.packet_policy == engine::PacketPolicy::Fixed) mo.fixed_bits = cfg.run.fixed_bits;
        const auto& vp = *cfg.vector_plant;
        modal::ModalDecomposition dec;
        try {
            dec = modal::decompose(vp);
        } catch (const std::exception& e) {
            std::cerr << "config violation: " << e.what() << "\n";
            return kExitConfig;
        }
        Eigen::VectorXd s0 = cfg.vector_s0 ? *cfg.vector_s0 : Eigen::VectorXd::Zero(vp.A.rows());
        Eigen::VectorXd sh0 =
            cfg.vector_shat0 ? *cfg.vector_shat0 : Eigen::VectorXd::Zero(vp.A.rows());
        run = modal::run_modal(vp, dec, mo, s0, sh0);
        if (!run.triggered.empty()) packet_bits = run.triggered.front().packet_bits;
    }
    if (!run.error.empty()) {
        std::cerr << "config violation: " << run.error << "\n";
        return kExitConfig;
    }

    // trajectory: physical states, estimates, triggered-mode error magnitudes
    {
        std::vector<std::string> head{"t"};
        const auto n = run.s.empty() ? 0 : run.s.front().size();
        for (Eigen::Index i = 0; i < n; ++i) head.push_back("s" + std::to_string(i + 1));
        for (Eigen::Index i = 0; i < n; ++i) head.push_back("shat" + std::to_string(i + 1));
        for (std::size_t m = 0; m < run.triggered.size(); ++m)
            head.push_back("abs_z_mode" + std::to_string(run.triggered[m].mode.column + 1));
        csv::Writer w(head);
        for (std::size_t r = 0; r < run.t.size(); ++r) {
            std::vector<Real> row{run.t[r]};
            for (Eigen::Index i = 0; i < n; ++i) row.push_back(run.s[r][i]);
            for (Eigen::Index i = 0; i < n; ++i) row.push_back(run.s_hat[r][i]);
            for (const auto& tm : run.triggered) row.push_back(tm.z_series[r]);
            w.row(row);
        }
        w.save((out_dir / "trajectory.csv").string());
    }
    if (!run.triggered.empty()) write_events(run.triggered.front().events, out_dir);

    std::ostringstream s;
    s << "max_abs_state=" << fmt(run.sup_abs_state) << "\n"
      << "realized_rate=" << fmt(run.realized_rate) << "\n"
      << "triggered_modes=" << run.triggered.size() << "\n";
    bool all_env = true;
    for (const auto& tm : run.triggered) {
        const auto tag = "mode" + std::to_string(tm.mode.column + 1);
        s << tag << "_eigenvalue=" << fmt(tm.mode.eigenvalue.real());
        if (tm.mode.conjugate_pair) s << "+" << fmt(tm.mode.eigenvalue.imag()) << "i";
        s << "\n"
          << tag << "_J=" << fmt(tm.J) << "\n"
          << tag << "_M_transformed=" << fmt(tm.mode.M_t) << "\n"
          << tag << "_packet_bits=" << tm.packet_bits << "\n"
          << tag << "_events=" << tm.events.count() << "\n"
          << tag << "_max_abs_z=" << fmt(tm.sup_abs_z) << "\n"
          << tag << "_envelope_bound=" << fmt(tm.envelope_bound) << "\n"
          << tag << "_envelope_ok=" << (tm.envelope_ok ? 1 : 0) << "\n";
        all_env = all_env && tm.envelope_ok;
    }
    if (cfg.mode == config::Mode::Pendulum) {
        s << "reference_packet_bits=4\n"
          << "computed_packet_bits=" << packet_bits << "\n"
          << "sufficient_bits=" << fmt(pres.rates.sufficient_bits) << "\n";
    }
    s << "all_invariants_ok=" << (all_env ? 1 : 0) << "\n";
    write_file(out_dir / "summary.txt", s.str());
    return 0;
}

int cmd_bounds(const config::ExperimentConfig& cfg, const fs::path& out_dir,
               const std::optional<config::Sweep>& sweep_flag) {
    const auto sweep = sweep_flag ? sweep_flag : cfg.sweep;
    std::vector<Real> gammas;
    if (sweep) {
        for (int i = 0; i < sweep->points; ++i)
            gammas.push_back(sweep->points == 1
                                 ? sweep->lo
                                 : sweep->lo + (sweep->hi - sweep->lo) * static_cast<Real>(i) /
                                       static_cast<Real>(sweep->points - 1));
    } else {
        gammas.push_back(cfg.run.trig.gamma);
    }

    const auto& p = cfg.run.plant;
    const auto& t = cfg.run.trig;
    csv::Writer w({"gamma", "suff_bits", "practical_bits", "suff_rate", "nec_bits",
                   "nec_rate_general", "nec_rate_restricted", "trig_upper",
                   "trig_lower_restricted", "beta", "datarate"});
    bool any_warning = false;
    for (Real g : gammas) {
        bounds::RateReport r;
        if (cfg.mode == config::Mode::ScalarComplex) {
            const Real J = t.J_follows_gamma
                               ? (p.M / (p.a() * t.chi)) * std::expm1(p.a() * g) + t.J
                               : t.J;
            // lambda <= 0 requests the smallest feasible phase-bit count
            int lambda = t.lambda;
            if (lambda <= 0) {
                try {
                    lambda = bounds::min_phase_bits(p.A, g, t.chi, t.chi_prime);
                } catch (const std::exception& e) {
                    std::cerr << "warning: gamma=" << fmt(g) << ": " << e.what() << "\n";
                    lambda = 1;
                }
            }
            r = bounds::rate_report_complex(p.A, g, p.M, J, t.rho0, t.b, lambda, t.chi,
                                            t.chi_prime);
        } else {
            const Real J = t.J_follows_gamma
                               ? (p.M / (p.a() * t.rho0)) * std::expm1(p.a() * g) + t.J
                               : t.J;
            r = bounds::rate_report_real(p.a(), g, p.M, J, t.rho0, t.b);
        }
        for (const auto& msg : r.warnings) {
            std::cerr << "warning: gamma=" << fmt(g) << ": " << msg << "\n";
            any_warning = true;
        }
        w.row({r.gamma, r.sufficient_bits, static_cast<Real>(r.practical_bits),
               r.sufficient_rate, r.necessary_bits, r.necessary_rate_general,
               r.necessary_rate_restricted, r.trig_rate_upper, r.trig_rate_lower_restricted,
               r.beta, r.datarate_baseline});
    }
    (void)any_warning;  // warnings do not abort a sweep
    w.save((out_dir / "rates.csv").string());
    return 0;
}

int cmd_adversary(const config::ExperimentConfig& cfg, const fs::path& out_dir) {
    const auto& p = cfg.run.plant;
    const auto& t = cfg.run.trig;
    const Real A = p.a();
    Real beta;
    try {
        beta = bounds::beta(A, p.M, t.J);
        if (beta > t.gamma) {
            std::cerr << "config violation: beta=" << fmt(beta) << " exceeds gamma="
                      << fmt(t.gamma) << "\n";
            return kExitConfig;
        }
    } catch (const std::exception& e) {
        std::cerr << "config violation: " << e.what() << "\n";
        return kExitConfig;
    }

    adversary::WorstCaseRealization wcr;
    try {
        wcr = adversary::worst_case_realization(A, t.gamma, p.M, t.J,
                                                adversary::RealizationTarget::HalfRadiusResidual,
                                                cfg.run.dt, cfg.run.T);
    } catch (const std::exception& e) {
        std::cerr << "config violation: " << e.what() << "\n";
        return kExitConfig;
    }

    {
        csv::Writer w({"k", "delay", "disturbance"});
        for (std::size_t k = 0; k < wcr.delays.size(); ++k)
            w.row({static_cast<Real>(k + 1), wcr.delays[k], wcr.disturbance_value});
        w.save((out_dir / "scripts.csv").string());
    }

    auto rcfg = adversary::replay_config(A, t.gamma, p.M, t.J, wcr, cfg.run.dt, cfg.run.T);
    const auto run = engine::run_real(rcfg);
    write_events(run.events, out_dir);

    Real min_ratio = kInf;
    for (Real zp : run.events.z_post_jump) min_ratio = std::min(min_ratio, zp / t.J);
    const Real restricted = A / std::log((1.0 + 2.0 * A * t.J / (A * t.J + p.M)) *
                                         (t.J * A + p.M) / (0.5 * t.J * A + p.M));

    std::ostringstream s;
    s << "beta=" << fmt(beta) << "\n"
      << "events=" << run.events.count() << "\n"
      << "receptions=" << run.events.z_post_jump.size() << "\n"
      << "min_z_post_over_J=" << fmt(min_ratio) << "\n"
      << "realized_trigger_rate=" << fmt(run.realized_trigger_rate) << "\n"
      << "required_trigger_rate=" << fmt(restricted) << "\n"
      << "trigger_rate_ok="
      << ((std::isnan(run.realized_trigger_rate) || run.realized_trigger_rate >= restricted -
           1.0 / cfg.run.T)
              ? 1
              : 0)
      << "\n";
    write_file(out_dir / "adversary_summary.txt", s.str());
    return 0;
}

int cmd_pendulum(config::ExperimentConfig cfg, const fs::path& out_dir,
                 const std::optional<config::Sweep>& sweep_flag) {
    const auto sweep = sweep_flag ? sweep_flag : cfg.sweep;
    if (!sweep) {
        cfg.mode = config::Mode::Pendulum;
        return cmd_simulate(cfg, out_dir);
    }
    if (cfg.pendulum.gamma < 2.0 * cfg.pendulum.dt) {
        std::cerr << "config violation: gamma must be at least two sampling times\n";
        return kExitConfig;
    }
    // rate-vs-delay sweep: independent seeded runs, executed concurrently
    std::vector<Real> gammas;
    for (int i = 0; i < sweep->points; ++i)
        gammas.push_back(sweep->points == 1
                             ? sweep->lo
                             : sweep->lo + (sweep->hi - sweep->lo) * static_cast<Real>(i) /
                                   static_cast<Real>(sweep->points - 1));

    struct Point {
        Real gamma, rate, J;
        int bits;
        Real datarate;
        std::string error;
    };
    std::vector<Point> points(gammas.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= gammas.size()) return;
            modal::PendulumOptions po = cfg.pendulum;
            po.gamma = gammas[i];
            po.seed = cfg.pendulum.seed + 7919 * i;
            po.record_trajectory = false;
            const auto res = modal::run_pendulum(po);
            Point pt{gammas[i], res.run.realized_rate, res.J, res.packet_bits,
                     bounds::datarate_baseline(res.lambda_unstable), res.run.error};
            points[i] = pt;
        }
    };
    {
        std::vector<std::thread> pool;
        const unsigned n = std::max(1u, std::thread::hardware_concurrency());
        for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& pt : points)
        if (!pt.error.empty()) {
            std::cerr << "config violation at gamma=" << fmt(pt.gamma) << ": " << pt.error << "\n";
            return kExitConfig;
        }
    csv::Writer w({"gamma", "realized_rate", "packet_bits", "J", "datarate"});
    for (const auto& pt : points)
        w.row({pt.gamma, pt.rate, static_cast<Real>(pt.bits), pt.J, pt.datarate});
    w.save((out_dir / "rate_sweep.csv").string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"event-triggered stabilization over a finite-rate delayed channel"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_flag;
    std::string sweep_text;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        auto* o = cmd->add_option("--config", config_path, "JSON experiment description");
        if (config_required) o->required();
        cmd->add_option("--out-dir", out_dir, "output directory (created if missing)");
        cmd->add_option("--seed", seed_flag, "override the config seed");
        cmd->add_option("--sweep", sweep_text, "gamma:lo:hi:n sweep grid");
    };

    auto* sim = app.add_subcommand("simulate", "closed-loop run, trajectory + event CSVs");
    add_common(sim, true);
    auto* bnd = app.add_subcommand("bounds", "rate/packet-size formulas at a point or sweep");
    add_common(bnd, true);
    auto* adv = app.add_subcommand("adversary", "worst-case realization scripts and replay");
    add_common(adv, true);
    auto* pen = app.add_subcommand("pendulum", "cart-pendulum case study (built-in preset)");
    add_common(pen, false);

    CLI11_PARSE(app, argc, argv);

    try {
        config::ExperimentConfig cfg;
        if (!config_path.empty()) {
            cfg = config::load_file(config_path);
        } else {
            cfg.mode = config::Mode::Pendulum;
        }
        if (seed_flag) {
            cfg.run.seed = *seed_flag;
            cfg.pendulum.seed = *seed_flag;
        }
        std::optional<config::Sweep> sweep;
        if (!sweep_text.empty()) sweep = config::parse_sweep_flag(sweep_text);

        fs::create_directories(out_dir);
        if (sim->parsed()) return cmd_simulate(cfg, out_dir);
        if (bnd->parsed()) return cmd_bounds(cfg, out_dir, sweep);
        if (adv->parsed()) return cmd_adversary(cfg, out_dir);
        if (pen->parsed()) return cmd_pendulum(cfg, out_dir, sweep);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return 0;
}
