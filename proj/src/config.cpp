#include "etsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace etsim::config {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

Complex read_scalar(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<Real>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<Real>(), v[1].get<Real>()};
    throw std::runtime_error("config: " + where + " must be a number or [re, im]");
}

ChannelKind channel_kind(const std::string& s) {
    if (s == "constant") return ChannelKind::Constant;
    if (s == "uniform-on-grid") return ChannelKind::UniformOnGrid;
    if (s == "adversarial-max") return ChannelKind::AdversarialMax;
    if (s == "scripted") return ChannelKind::Scripted;
    throw std::runtime_error("config: unknown channel kind '" + s + "'");
}

DisturbanceKind disturbance_kind(const std::string& s) {
    if (s == "zero") return DisturbanceKind::Zero;
    if (s == "constant-max") return DisturbanceKind::ConstantMax;
    if (s == "uniform") return DisturbanceKind::Uniform;
    if (s == "sinusoid") return DisturbanceKind::Sinusoid;
    if (s == "scripted") return DisturbanceKind::Scripted;
    throw std::runtime_error("config: unknown disturbance kind '" + s + "'");
}

void parse_plant(const json& j, PlantConfig& p) {
    reject_unknown(j, {"A", "B", "K", "M"}, "plant");
    if (j.contains("A")) p.A = read_scalar(j["A"], "plant.A");
    if (j.contains("B")) p.B = read_scalar(j["B"], "plant.B");
    if (j.contains("K")) p.K = read_scalar(j["K"], "plant.K");
    if (j.contains("M")) p.M = j["M"].get<Real>();
}

void parse_trigger(const json& j, TriggerConfig& t) {
    reject_unknown(j, {"J", "rho0", "gamma", "b", "lambda", "chi", "chi_prime",
                       "J_follows_gamma"},
                   "trigger");
    if (j.contains("J_follows_gamma")) t.J_follows_gamma = j["J_follows_gamma"].get<bool>();
    if (j.contains("J")) t.J = j["J"].get<Real>();
    if (j.contains("rho0")) t.rho0 = j["rho0"].get<Real>();
    if (j.contains("gamma")) t.gamma = j["gamma"].get<Real>();
    if (j.contains("b")) t.b = j["b"].get<Real>();
    if (j.contains("lambda")) t.lambda = j["lambda"].get<int>();
    if (j.contains("chi")) t.chi = j["chi"].get<Real>();
    if (j.contains("chi_prime")) t.chi_prime = j["chi_prime"].get<Real>();
}

void parse_channel(const json& j, ChannelModel& c) {
    reject_unknown(j, {"kind", "delay", "script"}, "channel");
    if (j.contains("kind")) c.kind = channel_kind(j["kind"].get<std::string>());
    if (j.contains("delay")) c.constant_delay = j["delay"].get<Real>();
    if (j.contains("script")) c.script = j["script"].get<std::vector<Real>>();
}

void parse_disturbance(const json& j, DisturbanceModel& d) {
    reject_unknown(j, {"kind", "freq", "phase", "script"}, "disturbance");
    if (j.contains("kind")) d.kind = disturbance_kind(j["kind"].get<std::string>());
    if (j.contains("freq")) d.freq = j["freq"].get<Real>();
    if (j.contains("phase")) d.phase = j["phase"].get<Real>();
    if (j.contains("script")) d.script = j["script"].get<std::vector<Real>>();
}

void parse_packet(const json& j, engine::RunConfig& r) {
    reject_unknown(j, {"policy", "bits"}, "packet");
    if (j.contains("policy")) {
        const auto s = j["policy"].get<std::string>();
        if (s == "practical") r.packet_policy = engine::PacketPolicy::Practical;
        else if (s == "fixed") r.packet_policy = engine::PacketPolicy::Fixed;
        else throw std::runtime_error("config: unknown packet policy '" + s + "'");
    }
    if (j.contains("bits")) r.fixed_bits = j["bits"].get<int>();
}

void parse_sim(const json& j, engine::RunConfig& r, modal::PendulumOptions& p) {
    reject_unknown(j, {"dt", "T", "seed", "x0", "xhat0"}, "sim");
    if (j.contains("dt")) { r.dt = j["dt"].get<Real>(); p.dt = r.dt; }
    if (j.contains("T")) { r.T = j["T"].get<Real>(); p.T = r.T; }
    if (j.contains("seed")) { r.seed = j["seed"].get<std::uint64_t>(); p.seed = r.seed; }
    if (j.contains("x0")) r.x0 = read_scalar(j["x0"], "sim.x0");
    if (j.contains("xhat0")) r.xhat0 = read_scalar(j["xhat0"], "sim.xhat0");
}

Sweep parse_sweep(const json& j) {
    reject_unknown(j, {"param", "lo", "hi", "points"}, "sweep");
    Sweep s;
    if (j.contains("param")) s.param = j["param"].get<std::string>();
    if (s.param != "gamma") throw std::runtime_error("config: only gamma sweeps are supported");
    s.lo = j.at("lo").get<Real>();
    s.hi = j.at("hi").get<Real>();
    s.points = j.at("points").get<int>();
    if (s.points < 1 || !(s.hi >= s.lo)) throw std::runtime_error("config: bad sweep range");
    return s;
}

void parse_vector(const json& j, ExperimentConfig& cfg) {
    reject_unknown(j, {"A", "B", "K", "M", "s0", "shat0"}, "vector");
    modal::VectorPlant vp;
    const auto rows = j.at("A").get<std::vector<std::vector<Real>>>();
    const auto n = static_cast<Eigen::Index>(rows.size());
    vp.A.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != n)
            throw std::runtime_error("config: vector.A must be square");
        for (Eigen::Index c = 0; c < n; ++c)
            vp.A(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    const auto bv = j.at("B").get<std::vector<Real>>();
    const auto kv = j.at("K").get<std::vector<Real>>();
    if (static_cast<Eigen::Index>(bv.size()) != n || static_cast<Eigen::Index>(kv.size()) != n)
        throw std::runtime_error("config: vector.B / vector.K length mismatch");
    vp.B = Eigen::Map<const Eigen::VectorXd>(bv.data(), n);
    vp.K = Eigen::Map<const Eigen::RowVectorXd>(kv.data(), n);
    vp.M = j.at("M").get<Real>();
    cfg.vector_plant = vp;
    if (j.contains("s0")) {
        const auto v = j["s0"].get<std::vector<Real>>();
        cfg.vector_s0 = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (j.contains("shat0")) {
        const auto v = j["shat0"].get<std::vector<Real>>();
        cfg.vector_shat0 =
            Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
}

}  // namespace

ExperimentConfig parse_text(const std::string& text) {
    json j = json::parse(text);
    reject_unknown(j, {"mode", "plant", "trigger", "channel", "disturbance", "packet", "sim",
                       "sweep", "vector"},
                   "top level");
    ExperimentConfig cfg;
    const auto mode = j.value("mode", std::string("scalar-real"));
    if (mode == "scalar-real") cfg.mode = Mode::ScalarReal;
    else if (mode == "scalar-complex") cfg.mode = Mode::ScalarComplex;
    else if (mode == "pendulum") cfg.mode = Mode::Pendulum;
    else if (mode == "custom-vector") cfg.mode = Mode::CustomVector;
    else throw std::runtime_error("config: unknown mode '" + mode + "'");

    cfg.run.plant.complex_mode = (cfg.mode == Mode::ScalarComplex);
    if (j.contains("plant")) parse_plant(j["plant"], cfg.run.plant);
    if (j.contains("trigger")) parse_trigger(j["trigger"], cfg.run.trig);
    if (j.contains("channel")) parse_channel(j["channel"], cfg.run.channel);
    if (j.contains("disturbance")) parse_disturbance(j["disturbance"], cfg.run.disturbance);
    if (j.contains("packet")) parse_packet(j["packet"], cfg.run);
    if (j.contains("sim")) parse_sim(j["sim"], cfg.run, cfg.pendulum);
    if (j.contains("sweep")) cfg.sweep = parse_sweep(j["sweep"]);
    if (j.contains("vector")) parse_vector(j["vector"], cfg);

    if (cfg.mode == Mode::Pendulum) {
        cfg.pendulum.gamma = cfg.run.trig.gamma;
        cfg.pendulum.M = cfg.run.plant.M;
        cfg.pendulum.rho0 = cfg.run.trig.rho0;
        cfg.pendulum.b = cfg.run.trig.b;
        cfg.pendulum.channel = cfg.run.channel.kind;
        cfg.pendulum.disturbance = cfg.run.disturbance.kind;
        if (cfg.run.packet_policy == engine::PacketPolicy::Fixed)
            cfg.pendulum.fixed_bits = cfg.run.fixed_bits;
    }
    if (cfg.mode == Mode::CustomVector && !cfg.vector_plant)
        throw std::runtime_error("config: custom-vector mode requires a vector block");
    return cfg;
}

ExperimentConfig load_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("config: cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_text(ss.str());
}

Sweep parse_sweep_flag(const std::string& text) {
    Sweep s;
    std::istringstream in(text);
    std::string param, lo, hi, n;
    if (!std::getline(in, param, ':') || !std::getline(in, lo, ':') ||
        !std::getline(in, hi, ':') || !std::getline(in, n, ':'))
        throw std::runtime_error("sweep flag: expected param:lo:hi:n");
    if (param != "gamma") throw std::runtime_error("sweep flag: only gamma is supported");
    s.param = param;
    s.lo = std::stod(lo);
    s.hi = std::stod(hi);
    s.points = std::stoi(n);
    if (s.points < 1 || !(s.hi >= s.lo)) throw std::runtime_error("sweep flag: bad range");
    return s;
}

}  // namespace etsim::config
