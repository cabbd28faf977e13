#include <doctest.h>

#include <cmath>

#include "etsim/modal.hpp"

using namespace etsim;
namespace md = etsim::modal;

TEST_SUITE_BEGIN("modal");

TEST_CASE("pendulum eigenvalues match the case-study set") {
    auto dec = md::decompose(md::pendulum_plant(0.05));
    REQUIRE(dec.eigenvalues.size() == 4);
    CHECK(dec.eigenvalues[0].real() == doctest::Approx(5.5651).epsilon(1e-4));
    CHECK(dec.eigenvalues[1].real() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(dec.eigenvalues[2].real() == doctest::Approx(-0.1428).epsilon(1e-3));
    CHECK(dec.eigenvalues[3].real() == doctest::Approx(-5.6041).epsilon(1e-4));
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(dec.eigenvalues[i].imag() == 0.0);

    int unstable = 0;
    for (const auto& m : dec.modes) unstable += m.stable ? 0 : 1;
    CHECK(unstable == 1);
}

TEST_CASE("pendulum frame matches the benchmark modal input vector") {
    auto dec = md::pendulum_decomposition(0.05);
    const Eigen::VectorXcd bt = dec.P_inv * md::pendulum_plant(0.05).B;
    CHECK(bt[0].real() == doctest::Approx(2.2513).epsilon(1e-9));
    CHECK(bt[1].real() == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(bt[2].real() == doctest::Approx(10.0979).epsilon(1e-9));
    CHECK(bt[3].real() == doctest::Approx(-2.3865).epsilon(1e-9));
    // the transformed disturbance bound that reproduces the benchmark
    // 4-bit packets
    const auto& um = dec.modes.front();
    CHECK_FALSE(um.stable);
    CHECK(um.M_t == doctest::Approx(0.1699).epsilon(1e-3));
}

TEST_CASE("already-diagonal plants decompose to the identity frame") {
    md::VectorPlant p;
    p.A = Eigen::Vector3d{2.0, -1.0, -3.0}.asDiagonal();
    p.B = Eigen::Vector3d{1.0, 1.0, 1.0};
    p.K = Eigen::RowVector3d{4.0, 0.0, 0.0};
    p.M = 0.3;
    auto dec = md::decompose(p);
    CHECK((dec.P - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    for (const auto& m : dec.modes) CHECK(m.M_t == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("random plants with a complex pair reconstruct and fold") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        // build a 4x4 with eigenvalues {a+bi, a-bi, r1, r2} by similarity
        const Real a = rng.uniform(-1.0, 1.0), bb = rng.uniform(0.5, 2.0);
        const Real r1 = rng.uniform(1.0, 2.0), r2 = -rng.uniform(1.0, 2.0);
        Eigen::Matrix4d blocks = Eigen::Matrix4d::Zero();
        blocks(0, 0) = a;
        blocks(0, 1) = bb;
        blocks(1, 0) = -bb;
        blocks(1, 1) = a;
        blocks(2, 2) = r1;
        blocks(3, 3) = r2;
        Eigen::Matrix4d S;
        do {
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) S(i, j) = rng.uniform(-1.0, 1.0);
        } while (std::abs(S.determinant()) < 0.1);
        md::VectorPlant p;
        p.A = S * blocks * S.inverse();
        p.B = Eigen::Vector4d{1.0, 0.0, 0.0, 1.0};
        p.K = Eigen::RowVector4d{0.0, 0.0, 0.0, 0.0};
        p.M = 0.1;

        auto dec = md::decompose(p);
        // two real modes plus one folded conjugate pair
        CHECK(dec.modes.size() == 3);
        int pairs = 0;
        for (const auto& m : dec.modes) pairs += m.conjugate_pair ? 1 : 0;
        CHECK(pairs == 1);

        const Eigen::MatrixXcd rebuilt =
            dec.P * dec.eigenvalues.asDiagonal() * dec.P_inv;
        const Real resid =
            (rebuilt - p.A.cast<Complex>()).cwiseAbs().maxCoeff() / p.A.cwiseAbs().maxCoeff();
        CHECK(resid < 1e-9);
    }
}

TEST_CASE("repeated eigenvalues are rejected") {
    md::VectorPlant p;
    p.A = Eigen::Matrix2d::Zero();
    p.A(0, 1) = 1.0;  // double eigenvalue at 0, defective
    p.B = Eigen::Vector2d{0.0, 1.0};
    p.K = Eigen::RowVector2d{1.0, 1.0};
    CHECK_THROWS((void)md::decompose(p));
}

TEST_CASE("modal trajectory equals an independent physical-space loop") {
    // Oracle: the same closed loop simulated entirely in physical
    // coordinates with dense Runge-Kutta steps -- no modal holds, no
    // eigen frame beyond the trigger readout. Disturbance-free constant
    // delay keeps both sides deterministic.
    md::PendulumOptions opt;
    opt.disturbance = DisturbanceKind::Zero;
    opt.channel = ChannelKind::AdversarialMax;  // deterministic gamma/dt steps
    opt.T = 5.0;
    auto pres = md::run_pendulum(opt);
    REQUIRE(pres.run.error.empty());
    const auto& run = pres.run;

    const auto plant = md::pendulum_plant(opt.M);
    const auto dec = md::pendulum_decomposition(opt.M);
    const int col = run.triggered.front().mode.column;
    const Real lam = run.triggered.front().mode.eigenvalue.real();
    const Real J = pres.J;
    const int g = pres.packet_bits;

    Eigen::Vector4d s{0.0, 0.0, 0.0, 0.1001};
    Eigen::Vector4d sh{0.0, 0.0, 0.0, 0.10};
    const Eigen::RowVector4d row = dec.P_inv.row(col).real();
    const Eigen::Vector4d jump_dir = dec.P.col(col).real();

    const long n_steps = std::lround(opt.T / opt.dt);
    const int fine = 50;
    long rx_step = -1;
    codec::Packet packet;
    Real max_err = 0.0;
    Real pre_event_err = 0.0;
    std::vector<Real> oracle_triggers;
    for (long i = 0; i < n_steps; ++i) {
        const Real u = -(plant.K * sh)(0);
        const Real h = opt.dt / fine;
        auto advance = [&](Eigen::Vector4d& y) {
            auto f = [&](const Eigen::Vector4d& v) -> Eigen::Vector4d {
                return plant.A * v + plant.B * u;
            };
            for (int k = 0; k < fine; ++k) {
                const Eigen::Vector4d k1 = f(y);
                const Eigen::Vector4d k2 = f(y + 0.5 * h * k1);
                const Eigen::Vector4d k3 = f(y + 0.5 * h * k2);
                const Eigen::Vector4d k4 = f(y + h * k3);
                y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
        };
        advance(s);
        advance(sh);
        const Real t_next = static_cast<Real>(i + 1) * opt.dt;
        if (rx_step == i + 1) {
            const auto d = codec::decode_real(packet, t_next, opt.gamma, opt.b);
            sh += jump_dir * codec::reconstruct_zbar_real(d, t_next, lam, J);
            rx_step = -1;
        }
        const Real zt = (row * (s - sh))(0);
        if (rx_step < 0 && std::abs(zt) >= J) {
            packet = codec::encode_real(t_next, zt >= 0.0 ? 1 : -1, g, opt.gamma, opt.b);
            rx_step = i + 1 + std::lround(opt.gamma / opt.dt);  // max-delay channel
            oracle_triggers.push_back(t_next);
        }
        const Real err = (s - run.s[static_cast<std::size_t>(i + 1)]).cwiseAbs().maxCoeff();
        max_err = std::max(max_err, err);
        if (oracle_triggers.empty()) pre_event_err = std::max(pre_event_err, err);
    }
    // both loops fire the same events at the same grid instants
    const auto& ev = run.triggered.front().events;
    REQUIRE(ev.count() >= 3);
    REQUIRE(oracle_triggers.size() == ev.count());
    for (std::size_t k = 0; k < ev.count(); ++k) CHECK(oracle_triggers[k] == ev.ts[k]);
    // open-loop agreement before the first event is at machine precision;
    // past it, the unstable mode amplifies round-off of the two
    // arithmetic routes by up to e^{lambda (T - t)}, so the full-horizon
    // tolerance carries that factor
    CHECK(pre_event_err < 1e-9);
    CHECK(max_err < 2e-4);
}

TEST_CASE("stable modes stay bounded with no transmissions") {
    md::PendulumOptions opt;
    opt.disturbance = DisturbanceKind::Uniform;
    opt.seed = 9;
    auto pres = md::run_pendulum(opt);
    REQUIRE(pres.run.error.empty());
    CHECK(pres.run.triggered.size() == 1);  // only the unstable coordinate transmits
    CHECK(pres.run.sup_abs_state < 10.0);

    // per-mode ISS sup bound from the realized modal disturbance
    const auto dec = md::pendulum_decomposition(opt.M);
    const auto& run = pres.run;
    for (Eigen::Index j = 0; j < 4; ++j) {
        const Real lam = dec.eigenvalues[j].real();
        if (lam > 0.0) continue;
        const Real z0 = run.z0_mode[static_cast<std::size_t>(j)];
        const Real ws = run.w_sup_mode[static_cast<std::size_t>(j)];
        const Real bound = lam < 0.0 ? std::max(z0, ws / -lam) : z0 + ws * opt.T;
        CHECK(run.sup_abs_z_mode[static_cast<std::size_t>(j)] <= bound * (1.0 + 1e-12));
    }
}

TEST_CASE("pendulum packet sizing reproduces the benchmark four bits") {
    md::PendulumOptions opt;  // gamma 0.1, M 0.05, rho0 0.9, b 1.0001
    auto pres = md::run_pendulum(opt);
    REQUIRE(pres.run.error.empty());
    CHECK(pres.packet_bits == 4);
    CHECK(pres.rates.sufficient_bits > 3.0);
    CHECK(pres.rates.sufficient_bits <= 4.0);
    CHECK(pres.J == doctest::Approx(0.03026).epsilon(1e-3));
}

TEST_CASE("unstable-mode error respects the envelope across seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        md::PendulumOptions opt;
        opt.seed = seed;
        opt.record_trajectory = false;
        auto pres = md::run_pendulum(opt);
        REQUIRE(pres.run.error.empty());
        const auto& tm = pres.run.triggered.front();
        CHECK(tm.envelope_ok);
        CHECK(pres.run.sup_abs_state < 10.0);
    }
}

TEST_CASE("two-sampling-times floor on the delay bound") {
    md::PendulumOptions opt;
    opt.gamma = 0.009;  // below 2 * 0.005
    auto pres = md::run_pendulum(opt);
    CHECK_FALSE(pres.run.error.empty());
}

TEST_SUITE_END();
