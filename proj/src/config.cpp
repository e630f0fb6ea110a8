#include "molfield/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace molfield {
namespace core {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw config_error(msg); }

double require_number(const json& j, const char* section, const char* key) {
    if (!j.contains(key)) fail(std::string(section) + "." + key + " is missing");
    if (!j[key].is_number()) fail(std::string(section) + "." + key + " must be a number");
    return j[key].get<double>();
}

}  // namespace

const char* to_string(ReceiverKind kind) {
    return kind == ReceiverKind::Absorbing ? "absorbing" : "passive";
}

const char* to_string(DetectorMode mode) { return mode == DetectorMode::Fixed ? "fixed" : "dfd"; }

const Config& validate(const Config& config) {
    const Medium& m = config.medium;
    if (!(m.D > 0.0) || !std::isfinite(m.D)) fail("medium.D must be positive and finite");
    if (m.k_d < 0.0 || !std::isfinite(m.k_d)) fail("medium.k_d must be non-negative and finite");

    const ReceiverSpec& rx = config.receiver;
    if (!(rx.r_r > 0.0) || !std::isfinite(rx.r_r)) fail("receiver.r_r must be positive and finite");

    const Deployment& dep = config.deployment;
    if (!(dep.lambda_a > 0.0) || !std::isfinite(dep.lambda_a))
        fail("deployment.lambda_a must be positive and finite");
    if (!(dep.R_max > rx.r_r))
        fail("deployment.R_max must exceed the receiver radius");

    const EmissionProtocol& p = config.protocol;
    if (!(p.N_tx > 0.0) || !std::isfinite(p.N_tx)) fail("protocol.N_tx must be positive and finite");
    if (!(p.T_b > 0.0) || !std::isfinite(p.T_b)) fail("protocol.T_b must be positive and finite");
    if (!(p.T_ss > 0.0) || !std::isfinite(p.T_ss)) fail("protocol.T_ss must be positive and finite");
    if (p.T_ss > p.T_b) fail("protocol.T_ss: sampling interval exceeds bit interval");
    if (p.source == BitSource::Explicit) {
        if (p.bits.empty()) fail("protocol.bits must be non-empty for an explicit bit pattern");
        for (int b : p.bits)
            if (b != 0 && b != 1) fail("protocol.bits entries must be 0 or 1");
    } else {
        if (!(p.P1 >= 0.0 && p.P1 <= 1.0)) fail("protocol.P1 must lie in [0, 1]");
        if (p.n_bits < 1) fail("protocol.n_bits must be at least 1");
    }

    const DetectorSpec& det = config.detector;
    if (det.mode == DetectorMode::Fixed && det.N_th < 1)
        fail("detector.N_th must be at least 1 for the fixed-threshold detector");

    return config;
}

Config parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }

    Config c;

    if (!j.contains("medium")) fail("medium section is missing");
    {
        const json& m = j["medium"];
        const bool um = m.contains("D_um2_per_s");
        const bool si = m.contains("D_m2_per_s");
        if (um && si) fail("medium: give D_um2_per_s or D_m2_per_s, not both");
        if (!um && !si) fail("medium.D_um2_per_s is missing");
        c.medium.D = um ? require_number(m, "medium", "D_um2_per_s")
                        : require_number(m, "medium", "D_m2_per_s") * 1e12;
        c.medium.k_d = m.contains("k_d_per_s") ? require_number(m, "medium", "k_d_per_s") : 0.0;
    }

    if (!j.contains("receiver")) fail("receiver section is missing");
    {
        const json& r = j["receiver"];
        if (!r.contains("kind") || !r["kind"].is_string()) fail("receiver.kind is missing");
        const std::string kind = r["kind"].get<std::string>();
        if (kind == "absorbing")
            c.receiver.kind = ReceiverKind::Absorbing;
        else if (kind == "passive")
            c.receiver.kind = ReceiverKind::Passive;
        else
            fail("receiver.kind must be \"absorbing\" or \"passive\"");
        c.receiver.r_r = require_number(r, "receiver", "r_r_um");
    }

    if (!j.contains("deployment")) fail("deployment section is missing");
    {
        const json& d = j["deployment"];
        c.deployment.lambda_a = require_number(d, "deployment", "lambda_per_um3");
        c.deployment.R_max = require_number(d, "deployment", "R_max_um");
    }

    if (!j.contains("protocol")) fail("protocol section is missing");
    {
        const json& p = j["protocol"];
        c.protocol.N_tx = require_number(p, "protocol", "N_tx");
        c.protocol.T_b = require_number(p, "protocol", "T_b_s");
        c.protocol.T_ss = require_number(p, "protocol", "T_ss_s");
        const bool has_bits = p.contains("bits");
        const bool has_p1 = p.contains("P1");
        if (has_bits && has_p1) fail("protocol: give bits or P1, not both");
        if (has_bits) {
            if (!p["bits"].is_array()) fail("protocol.bits must be an array");
            c.protocol.source = BitSource::Explicit;
            for (const auto& b : p["bits"]) {
                if (!b.is_number_integer()) fail("protocol.bits entries must be 0 or 1");
                c.protocol.bits.push_back(b.get<int>());
            }
        } else {
            c.protocol.source = BitSource::Iid;
            c.protocol.P1 = has_p1 ? require_number(p, "protocol", "P1") : 0.5;
            if (p.contains("n_bits")) {
                if (!p["n_bits"].is_number_integer()) fail("protocol.n_bits must be an integer");
                c.protocol.n_bits = p["n_bits"].get<int>();
            }
        }
    }

    if (j.contains("detector")) {
        const json& d = j["detector"];
        if (d.contains("mode")) {
            if (!d["mode"].is_string()) fail("detector.mode must be a string");
            const std::string mode = d["mode"].get<std::string>();
            if (mode == "fixed")
                c.detector.mode = DetectorMode::Fixed;
            else if (mode == "dfd")
                c.detector.mode = DetectorMode::Dfd;
            else
                fail("detector.mode must be \"fixed\" or \"dfd\"");
        }
        if (d.contains("N_th")) {
            if (!d["N_th"].is_number_integer()) fail("detector.N_th must be an integer");
            c.detector.N_th = d["N_th"].get<long long>();
        }
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            fail("seed must be a non-negative integer");
        const long long s = j["seed"].get<long long>();
        if (s < 0) fail("seed must be a non-negative integer");
        c.seed = static_cast<std::uint64_t>(s);
    }

    validate(c);
    return c;
}

Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string to_json(const Config& config) {
    json j;
    j["medium"] = {{"D_um2_per_s", config.medium.D}, {"k_d_per_s", config.medium.k_d}};
    j["receiver"] = {{"kind", to_string(config.receiver.kind)}, {"r_r_um", config.receiver.r_r}};
    j["deployment"] = {{"lambda_per_um3", config.deployment.lambda_a},
                       {"R_max_um", config.deployment.R_max}};
    json p = {{"N_tx", config.protocol.N_tx},
              {"T_b_s", config.protocol.T_b},
              {"T_ss_s", config.protocol.T_ss}};
    if (config.protocol.source == BitSource::Explicit) {
        p["bits"] = config.protocol.bits;
    } else {
        p["P1"] = config.protocol.P1;
        p["n_bits"] = config.protocol.n_bits;
    }
    j["protocol"] = p;
    j["detector"] = {{"mode", to_string(config.detector.mode)},
                     {"N_th", config.detector.N_th}};
    j["seed"] = config.seed;
    return j.dump(2);
}

std::string metadata_line(const Config& config) {
    std::ostringstream os;
    os.precision(17);
    os << "# kind=" << to_string(config.receiver.kind) << " r_r_um=" << config.receiver.r_r
       << " D_um2_per_s=" << config.medium.D << " k_d_per_s=" << config.medium.k_d
       << " lambda_per_um3=" << config.deployment.lambda_a
       << " R_max_um=" << config.deployment.R_max << " N_tx=" << config.protocol.N_tx
       << " T_b_s=" << config.protocol.T_b << " T_ss_s=" << config.protocol.T_ss;
    if (config.protocol.source == BitSource::Explicit) {
        os << " bits=";
        for (std::size_t i = 0; i < config.protocol.bits.size(); ++i) os << config.protocol.bits[i];
    } else {
        os << " P1=" << config.protocol.P1 << " n_bits=" << config.protocol.n_bits;
    }
    os << " detector=" << to_string(config.detector.mode) << " N_th=" << config.detector.N_th
       << " seed=" << config.seed;
    return os.str();
}

}  // namespace core
}  // namespace molfield
