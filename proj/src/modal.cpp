#include "etsim/modal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace etsim::modal {

namespace {

constexpr Real kConditionLimit = 1e8;
constexpr Real kPairTol = 1e-9;

Real l1_row_norm(const Eigen::MatrixXcd& m, Eigen::Index row) {
    Real s = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += std::abs(m(row, j));
    return s;
}

}  // namespace

ModalDecomposition decompose(const VectorPlant& plant) {
    const Eigen::Index n = plant.A.rows();
    if (plant.A.cols() != n || plant.B.size() != n || plant.K.size() != n)
        throw std::invalid_argument("decompose: inconsistent dimensions");

    Eigen::EigenSolver<Eigen::MatrixXd> solver(plant.A);
    if (solver.info() != Eigen::Success)
        throw std::invalid_argument("decompose: eigensolver failed");

    Eigen::VectorXcd vals = solver.eigenvalues();
    Eigen::MatrixXcd vecs = solver.eigenvectors();

    // descending real part; conjugate partners adjacent, +Im first
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (vals[a].real() != vals[b].real()) return vals[a].real() > vals[b].real();
        return vals[a].imag() > vals[b].imag();
    });

    ModalDecomposition dec;
    dec.eigenvalues.resize(n);
    dec.P.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dec.eigenvalues[i] = vals[order[static_cast<std::size_t>(i)]];
        dec.P.col(i) = vecs.col(order[static_cast<std::size_t>(i)]);
    }

    const Real scale = std::max(1.0, dec.eigenvalues.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const Real gap = std::abs(dec.eigenvalues[i] - dec.eigenvalues[i + 1]);
        if (gap < 1e-9 * scale)
            throw std::invalid_argument("decompose: repeated eigenvalues (defective plant)");
    }

    // canonical column scaling: the largest-modulus component becomes 1;
    // the -Im member of each pair is the exact conjugate of its partner
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i > 0 && dec.eigenvalues[i].imag() < 0.0 &&
            std::abs(dec.eigenvalues[i] - std::conj(dec.eigenvalues[i - 1])) < kPairTol * scale) {
            dec.P.col(i) = dec.P.col(i - 1).conjugate();
            continue;
        }
        Eigen::Index piv = 0;
        dec.P.col(i).cwiseAbs().maxCoeff(&piv);
        dec.P.col(i) /= dec.P(piv, i);
    }

    dec.P_inv = dec.P.inverse();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dec.P);
    dec.condition_number =
        svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    if (!(dec.condition_number < kConditionLimit))
        throw std::invalid_argument("decompose: eigenvector matrix too ill-conditioned");

    const Eigen::VectorXcd B_t = dec.P_inv * plant.B;
    const Eigen::RowVectorXcd K_t = plant.K * dec.P;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex ev = dec.eigenvalues[i];
        if (ev.imag() < -kPairTol * scale) continue;  // folded into its partner
        Mode m;
        m.eigenvalue = ev;
        m.B_t = B_t[i];
        m.K_t = K_t[i];
        m.M_t = l1_row_norm(dec.P_inv, i) * plant.M;
        m.stable = ev.real() <= 0.0;
        m.conjugate_pair = std::abs(ev.imag()) > kPairTol * scale;
        m.column = static_cast<int>(i);
        dec.modes.push_back(m);
    }
    return dec;
}

ModalRunResult run_modal(const VectorPlant& plant, const ModalDecomposition& dec,
                         const ModalRunOptions& opt, const Eigen::VectorXd& s0,
                         const Eigen::VectorXd& shat0) {
    ModalRunResult res;
    const Eigen::Index n = plant.A.rows();
    if (s0.size() != n || shat0.size() != n) {
        res.error = "initial conditions must match the plant dimension";
        return res;
    }
    if (opt.gamma < 2.0 * opt.dt) {
        res.error = "gamma must be at least two sampling times";
        return res;
    }

    struct Link {
        const Mode* mode;
        std::unique_ptr<engine::TriggerChannel> chan;
        Real J;
        int partner;  // conjugate column, -1 when real
        Real sup_abs_z = 0.0;
        Real w_sup = 0.0;
        std::vector<Real> z_series;
    };
    std::vector<Link> links;
    for (const auto& m : dec.modes) {
        if (m.stable) continue;
        const Real a = m.eigenvalue.real();
        Link link;
        link.mode = &m;
        link.J = (m.M_t / (a * opt.rho0)) * std::expm1(a * opt.gamma) + opt.J_offset;
        link.partner = m.conjugate_pair ? m.column + 1 : -1;

        TriggerConfig trig;
        trig.J = link.J;
        trig.rho0 = opt.rho0;
        trig.gamma = opt.gamma;
        trig.b = opt.b;
        trig.lambda = opt.lambda;
        ChannelModel channel;
        channel.kind = opt.channel;

        int g = opt.fixed_bits;
        if (g <= 0) {
            try {
                g = m.conjugate_pair
                        ? bounds::practical_bits_complex(m.eigenvalue, opt.gamma, m.M_t, link.J,
                                                         opt.rho0, opt.b, opt.lambda)
                        : bounds::practical_bits_real(a, opt.gamma, m.M_t, link.J, opt.rho0,
                                                      opt.b);
            } catch (const std::exception& e) {
                res.error = std::string("packet sizing failed: ") + e.what();
                return res;
            }
        }
        link.chan = std::make_unique<engine::TriggerChannel>(trig, channel,
                                                             engine::ReceptionPolicy::Codec,
                                                             engine::QuantizerSpec{}, g,
                                                             m.conjugate_pair, opt.dt);
        link.chan->set_plant_gain(m.eigenvalue);
        links.push_back(std::move(link));
    }

    Eigen::VectorXcd st = dec.P_inv * s0.cast<Complex>();
    Eigen::VectorXcd sht = dec.P_inv * shat0.cast<Complex>();
    std::vector<engine::HoldFactors> hold(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        hold[static_cast<std::size_t>(i)] = engine::HoldFactors::make(dec.eigenvalues[i], opt.dt);
    const Eigen::VectorXcd B_t = dec.P_inv * plant.B.cast<Complex>();
    const Eigen::RowVectorXcd K_t = plant.K.cast<Complex>() * dec.P;

    DisturbanceModel dist;
    dist.kind = opt.disturbance;
    dist.freq = opt.sinusoid_freq;

    Rng rng(opt.seed);
    const long n_steps = opt.T > 0.0 ? std::lround(opt.T / opt.dt) : 0;
    Complex u = -(K_t * sht)(0);

    res.z0_mode.resize(static_cast<std::size_t>(n));
    res.sup_abs_z_mode.assign(static_cast<std::size_t>(n), 0.0);
    res.w_sup_mode.assign(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index j = 0; j < n; ++j)
        res.z0_mode[static_cast<std::size_t>(j)] = std::abs(st[j] - sht[j]);

    auto record = [&](Real t) {
        const Eigen::VectorXcd s_phys = dec.P * st;
        res.sup_abs_state = std::max(res.sup_abs_state, s_phys.cwiseAbs().maxCoeff());
        for (Eigen::Index j = 0; j < n; ++j) {
            auto& sup = res.sup_abs_z_mode[static_cast<std::size_t>(j)];
            sup = std::max(sup, std::abs(st[j] - sht[j]));
        }
        for (auto& link : links) {
            const auto c = link.mode->column;
            const Real zt = std::abs(st[c] - sht[c]);
            link.sup_abs_z = std::max(link.sup_abs_z, zt);
            if (opt.record_trajectory) link.z_series.push_back(zt);
        }
        if (!opt.record_trajectory) return;
        res.t.push_back(t);
        res.s.push_back(s_phys.real());
        res.s_hat.push_back((dec.P * sht).real());
    };

    auto apply_jump = [&](Link& link, Complex zbar) {
        sht[link.mode->column] += zbar;
        if (link.partner >= 0) sht[link.partner] += std::conj(zbar);
    };

    record(0.0);
    for (long i = 0; i < n_steps; ++i) {
        const Real t = static_cast<Real>(i) * opt.dt;
        Eigen::VectorXcd w_phys(n);
        for (Eigen::Index j = 0; j < n; ++j)
            w_phys[j] = Complex{dist.sample_real(rng,
                                                 static_cast<std::size_t>(i) *
                                                         static_cast<std::size_t>(n) +
                                                     static_cast<std::size_t>(j),
                                                 t, plant.M),
                                0.0};
        const Eigen::VectorXcd w_t = dec.P_inv * w_phys;
        for (Eigen::Index j = 0; j < n; ++j) {
            auto& ws = res.w_sup_mode[static_cast<std::size_t>(j)];
            ws = std::max(ws, std::abs(w_t[j]));
        }

        for (Eigen::Index j = 0; j < n; ++j)
            engine::hold_step(st[j], sht[j], u, w_t[j], B_t[j],
                              hold[static_cast<std::size_t>(j)]);
        const Real t_next = static_cast<Real>(i + 1) * opt.dt;

        for (auto& link : links) {
            const auto c = link.mode->column;
            link.w_sup = std::max(link.w_sup, std::abs(w_t[c]));
            if (auto zbar = link.chan->try_receive(i + 1, t_next, st[c] - sht[c]))
                apply_jump(link, *zbar);
        }
        u = -(K_t * sht)(0);
        for (auto& link : links) {
            const auto c = link.mode->column;
            if (!link.chan->idle()) continue;
            if (auto zbar = link.chan->maybe_trigger(i + 1, t_next, st[c] - sht[c], rng)) {
                apply_jump(link, *zbar);
                u = -(K_t * sht)(0);
            }
        }
        record(t_next);
    }

    long total_bits = 0;
    for (auto& link : links) {
        TriggeredModeResult tm;
        tm.mode = *link.mode;
        tm.J = link.J;
        tm.packet_bits = link.chan->packet_bits();
        tm.events = std::move(link.chan->log());
        tm.sup_abs_z = link.sup_abs_z;
        tm.w_sup = link.w_sup;
        const Real a = link.mode->eigenvalue.real();
        const Real slack = std::exp(a * opt.gamma) * (link.J + link.mode->M_t / a) *
                           step_growth_slack(a, opt.dt);
        tm.envelope_bound = link.J * std::exp(a * opt.gamma) +
                            (link.w_sup / a) * std::expm1(a * opt.gamma) + slack;
        tm.envelope_ok = link.sup_abs_z <= tm.envelope_bound;
        tm.z_series = std::move(link.z_series);
        for (int gb : tm.events.g_bits) total_bits += gb;
        res.triggered.push_back(std::move(tm));
    }
    res.realized_rate = opt.T > 0.0 ? static_cast<Real>(total_bits) / opt.T : 0.0;
    return res;
}

VectorPlant pendulum_plant(Real M) {
    VectorPlant p;
    p.A.resize(4, 4);
    p.A << 0.0, 1.0, 0.0, 0.0,
           0.0, -0.1818, 2.6730, 0.0,
           0.0, 0.0, 0.0, 1.0,
           0.0, -0.4545, 31.1800, 0.0;
    p.B.resize(4);
    p.B << 0.0, 1.8180, 0.0, 4.5450;
    p.K.resize(4);
    p.K << -1.00, -2.04, 20.36, 3.93;
    p.M = M;
    return p;
}

ModalDecomposition pendulum_decomposition(Real M) {
    const auto plant = pendulum_plant(M);
    auto dec = decompose(plant);
    // benchmark modal input vector in descending-eigenvalue order
    Eigen::Vector4cd target;
    target << Complex{2.2513, 0.0}, Complex{10.0000, 0.0}, Complex{10.0979, 0.0},
        Complex{-2.3865, 0.0};
    const Eigen::VectorXcd current = dec.P_inv * plant.B;
    for (Eigen::Index i = 0; i < 4; ++i) {
        const Complex c = current[i] / target[i];
        dec.P_inv.row(i) /= c;
        dec.P.col(i) *= c;
    }
    const Eigen::VectorXcd B_t = dec.P_inv * plant.B;
    const Eigen::RowVectorXcd K_t = plant.K * dec.P;
    for (auto& m : dec.modes) {
        m.B_t = B_t[m.column];
        m.K_t = K_t[m.column];
        m.M_t = l1_row_norm(dec.P_inv, m.column) * plant.M;
    }
    return dec;
}

PendulumResult run_pendulum(const PendulumOptions& opt) {
    PendulumResult out;
    const auto plant = pendulum_plant(opt.M);
    const auto dec = pendulum_decomposition(opt.M);

    ModalRunOptions mo;
    mo.gamma = opt.gamma;
    mo.rho0 = opt.rho0;
    mo.b = opt.b;
    mo.dt = opt.dt;
    mo.T = opt.T;
    mo.seed = opt.seed;
    mo.channel = opt.channel;
    mo.disturbance = opt.disturbance;
    mo.fixed_bits = opt.fixed_bits;
    mo.record_trajectory = opt.record_trajectory;
    mo.J_offset = 0.005;

    Eigen::VectorXd s0(4), sh0(4);
    s0 << 0.0, 0.0, 0.0, 0.1001;
    sh0 << 0.0, 0.0, 0.0, 0.10;
    out.run = run_modal(plant, dec, mo, s0, sh0);
    if (!out.run.error.empty()) return out;
    if (out.run.triggered.size() != 1) {
        out.run.error = "pendulum should have exactly one unstable mode";
        return out;
    }
    const auto& tm = out.run.triggered.front();
    out.J = tm.J;
    out.M_t_unstable = tm.mode.M_t;
    out.lambda_unstable = tm.mode.eigenvalue.real();
    out.packet_bits = tm.packet_bits;
    out.rates = bounds::rate_report_real(out.lambda_unstable, opt.gamma, out.M_t_unstable, out.J,
                                         opt.rho0, opt.b);
    return out;
}

}  // namespace etsim::modal
