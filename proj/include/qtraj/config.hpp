// config.hpp: run configuration in flat `key = value` form, with `#`
// comments. Frequencies are nu in MHz, exactly as (...)/2pi = ... MHz tables
// quote them.

#pragma once

#include "qtraj/model.hpp"
#include "qtraj/protocol.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qtraj {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ProtocolKind { one, two };
enum class SweepAxis { none, alpha, gamma };
enum class SpectatorMode { random, fixed };

std::string to_string(ProtocolKind p);
std::string to_string(SweepAxis a);
std::string to_string(SpectatorMode m);

struct RunConfig {
    PhysicalParams params;
    ProtocolKind protocol = ProtocolKind::one;
    ModelLevel model = ModelLevel::full;
    long n_trajectories = 1000;
    std::uint64_t seed = 1;
    std::optional<double> dt;  // us
    double t_wait_multiple = 8.0;
    SweepAxis sweep_axis = SweepAxis::none;
    std::vector<double> sweep_grid;
    std::string output = "out";
    // protocol two only
    SpectatorMode spectators = SpectatorMode::random;
    int n0_a = 0;
    int n0_b = 0;
    int designated_atom = 0;

    // Throws ConfigError.
    void validate() const;
    ProtocolOptions protocol_options() const;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

// Every key, one per line, doubles with 17 significant digits so that
// parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& c);

std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);

}  // namespace qtraj
