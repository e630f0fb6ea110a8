#ifndef MOLFIELD_CONFIG_HPP
#define MOLFIELD_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

// Scenario description and validation. Everything downstream of this header
// works in internal units: micrometers, seconds, molecules, um^-3. SI values
// are converted at the parsing boundary and never afterwards.
namespace molfield {
namespace core {

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Fluid the molecules diffuse in.
struct Medium {
    double D = 0.0;    // diffusion coefficient, um^2/s
    double k_d = 0.0;  // first-order degradation rate, 1/s (0 = stable molecule)

    // Time for half of a free population to degrade; +inf when stable.
    double half_life() const {
        return k_d > 0.0 ? std::log(2.0) / k_d : std::numeric_limits<double>::infinity();
    }
};

enum class ReceiverKind { Absorbing, Passive };

struct ReceiverSpec {
    ReceiverKind kind = ReceiverKind::Absorbing;
    double r_r = 0.0;  // receiver radius, um

    double volume() const { return (4.0 / 3.0) * M_PI * r_r * r_r * r_r; }
};

// Homogeneous Poisson field of point transmitters in the spherical shell
// r_r < r <= R_max around the receiver. R_max bounds simulation domains;
// analytic expectations integrate to infinity regardless.
struct Deployment {
    double lambda_a = 0.0;  // transmitter density, um^-3
    double R_max = 0.0;     // sampling truncation radius, um
};

enum class BitSource { Explicit, Iid };

struct EmissionProtocol {
    double N_tx = 0.0;  // molecules released per bit-1 per transmitter
    double T_b = 0.0;   // bit interval, s
    double T_ss = 0.0;  // sampling interval, s
    BitSource source = BitSource::Iid;
    std::vector<int> bits;  // explicit common bit pattern (source == Explicit)
    double P1 = 0.5;        // P(bit = 1) when bits are drawn iid
    int n_bits = 5;         // sequence length when bits are drawn iid
};

enum class DetectorMode { Fixed, Dfd };

struct DetectorSpec {
    DetectorMode mode = DetectorMode::Fixed;
    long long N_th = 1;  // decision threshold (counts; differences for Dfd)
};

struct Config {
    Medium medium;
    ReceiverSpec receiver;
    Deployment deployment;
    EmissionProtocol protocol;
    DetectorSpec detector;
    std::uint64_t seed = 1;
};

// Checks every field, throws config_error naming the offending field.
// Returns its argument so call sites can chain: auto c = validate(parse_config(...)).
const Config& validate(const Config& config);

// Reads a JSON scenario file. The diffusion coefficient may be given either
// in internal units ("D_um2_per_s") or SI ("D_m2_per_s", converted here).
// The result is already validated.
Config parse_config(const std::string& path);
Config parse_config_text(const std::string& text);

std::string to_json(const Config& config);

// Single-line "# key=value ..." summary embedded at the top of CSV output so
// a result file identifies the scenario that produced it.
std::string metadata_line(const Config& config);

const char* to_string(ReceiverKind kind);
const char* to_string(DetectorMode mode);

}  // namespace core
}  // namespace molfield

#endif
