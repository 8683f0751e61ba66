#include "qtraj/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace qtraj {

std::string to_string(ProtocolKind p) { return p == ProtocolKind::one ? "one" : "two"; }

std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::none: return "none";
        case SweepAxis::alpha: return "alpha";
        case SweepAxis::gamma: return "gamma";
    }
    return "none";
}

std::string to_string(SpectatorMode m) { return m == SpectatorMode::random ? "random" : "fixed"; }

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    }
    return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
    Int out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    }
    return out;
}

std::vector<double> to_grid(const std::string& key, const std::string& v) {
    std::vector<double> grid;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) grid.push_back(to_double(key, item));
    }
    return grid;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void RunConfig::validate() const {
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (n_trajectories < 1) throw ConfigError("config: n_trajectories must be >= 1");
    if (dt && !(*dt > 0.0)) throw ConfigError("config: dt must be > 0");
    if (!(t_wait_multiple > 0.0)) throw ConfigError("config: t_wait_multiple must be > 0");
    if (protocol == ProtocolKind::one && params.atoms_per_cavity != 1) {
        throw ConfigError("config: protocol one needs atoms_per_cavity = 1");
    }
    if (protocol == ProtocolKind::one &&
        (params.omega != params.g || params.delta != params.delta_prime)) {
        throw ConfigError("config: protocol one needs omega = g and delta = delta_prime");
    }
    if (designated_atom < 0 || designated_atom >= params.atoms_per_cavity) {
        throw ConfigError("config: designated_atom out of range");
    }
    const int spectators = params.atoms_per_cavity - 1;
    if (n0_a < 0 || n0_a > spectators || n0_b < 0 || n0_b > spectators) {
        throw ConfigError("config: n0_a / n0_b must lie in [0, atoms_per_cavity - 1]");
    }
    if (sweep_axis != SweepAxis::none) {
        if (sweep_grid.empty()) throw ConfigError("config: sweep_grid is empty");
        for (std::size_t i = 1; i < sweep_grid.size(); ++i) {
            if (!(sweep_grid[i] > sweep_grid[i - 1])) {
                throw ConfigError("config: sweep_grid must be strictly increasing");
            }
        }
        if (sweep_grid.front() < 0.0) throw ConfigError("config: sweep values must be >= 0");
    }
    if (!(params.kappa > 0.0) && sweep_axis != SweepAxis::alpha) {
        throw ConfigError("config: kappa must be > 0");
    }
}

ProtocolOptions RunConfig::protocol_options() const {
    return {t_wait_multiple, dt.value_or(0.0)};
}

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::map<std::string, std::string> seen;
    std::stringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (seen.contains(key)) throw ConfigError("config: duplicate key '" + key + "'");
        seen[key] = value;

        PhysicalParams& p = c.params;
        if (key == "delta") p.delta = to_double(key, value);
        else if (key == "delta_prime") p.delta_prime = to_double(key, value);
        else if (key == "omega") p.omega = to_double(key, value);
        else if (key == "g") p.g = to_double(key, value);
        else if (key == "kappa") p.kappa = to_double(key, value);
        else if (key == "gamma") p.gamma = to_double(key, value);
        else if (key == "atoms_per_cavity") p.atoms_per_cavity = to_int<int>(key, value);
        else if (key == "photon_cutoff") p.photon_cutoff = to_int<int>(key, value);
        else if (key == "protocol") {
            if (value == "one") c.protocol = ProtocolKind::one;
            else if (value == "two") c.protocol = ProtocolKind::two;
            else throw ConfigError("config: protocol must be one|two");
        } else if (key == "model") {
            try {
                c.model = parse_model_level(value);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config: ") + e.what());
            }
        } else if (key == "n_trajectories") c.n_trajectories = to_int<long>(key, value);
        else if (key == "seed") c.seed = to_int<std::uint64_t>(key, value);
        else if (key == "dt") {
            if (value.empty() || value == "auto") c.dt.reset();
            else c.dt = to_double(key, value);
        } else if (key == "t_wait_multiple") c.t_wait_multiple = to_double(key, value);
        else if (key == "sweep_axis") {
            if (value == "none") c.sweep_axis = SweepAxis::none;
            else if (value == "alpha") c.sweep_axis = SweepAxis::alpha;
            else if (value == "gamma") c.sweep_axis = SweepAxis::gamma;
            else throw ConfigError("config: sweep_axis must be none|alpha|gamma");
        } else if (key == "sweep_grid") c.sweep_grid = to_grid(key, value);
        else if (key == "output") c.output = value;
        else if (key == "spectators") {
            if (value == "random") c.spectators = SpectatorMode::random;
            else if (value == "fixed") c.spectators = SpectatorMode::fixed;
            else throw ConfigError("config: spectators must be random|fixed");
        } else if (key == "n0_a") c.n0_a = to_int<int>(key, value);
        else if (key == "n0_b") c.n0_b = to_int<int>(key, value);
        else if (key == "designated_atom") c.designated_atom = to_int<int>(key, value);
        else throw ConfigError("config: unknown key '" + key + "'");
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot read '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string render_config(const RunConfig& c) {
    std::ostringstream o;
    const PhysicalParams& p = c.params;
    o << "delta = " << fmt17(p.delta) << "\n"
      << "delta_prime = " << fmt17(p.delta_prime) << "\n"
      << "omega = " << fmt17(p.omega) << "\n"
      << "g = " << fmt17(p.g) << "\n"
      << "kappa = " << fmt17(p.kappa) << "\n"
      << "gamma = " << fmt17(p.gamma) << "\n"
      << "atoms_per_cavity = " << p.atoms_per_cavity << "\n"
      << "photon_cutoff = " << p.photon_cutoff << "\n"
      << "protocol = " << to_string(c.protocol) << "\n"
      << "model = " << to_string(c.model) << "\n"
      << "n_trajectories = " << c.n_trajectories << "\n"
      << "seed = " << c.seed << "\n"
      << "dt = " << (c.dt ? fmt17(*c.dt) : std::string("auto")) << "\n"
      << "t_wait_multiple = " << fmt17(c.t_wait_multiple) << "\n"
      << "sweep_axis = " << to_string(c.sweep_axis) << "\n"
      << "sweep_grid = ";
    for (std::size_t i = 0; i < c.sweep_grid.size(); ++i) {
        o << (i ? "," : "") << fmt17(c.sweep_grid[i]);
    }
    o << "\n"
      << "output = " << c.output << "\n"
      << "spectators = " << to_string(c.spectators) << "\n"
      << "n0_a = " << c.n0_a << "\n"
      << "n0_b = " << c.n0_b << "\n"
      << "designated_atom = " << c.designated_atom << "\n";
    return o.str();
}

// ---------------------------------- Presets ----------------------------------

namespace {

PhysicalParams single_atom_params(double kappa, double gamma) {
    PhysicalParams p;
    p.delta = 300.0;
    p.delta_prime = 300.0;
    p.omega = 25.0;
    p.g = 25.0;
    p.kappa = kappa;
    p.gamma = gamma;
    return p;
}

PhysicalParams multi_atom_params() {
    PhysicalParams p;
    p.delta = 1000.0;
    p.delta_prime = 1000.9;
    p.omega = 30.0;
    p.g = 0.7;
    p.kappa = 0.001;
    p.gamma = 0.1;
    p.atoms_per_cavity = 3;
    return p;
}

struct PresetSpec {
    const char* name;
    RunConfig (*make)();
};

RunConfig fig3() {
    RunConfig c;
    c.params = single_atom_params(0.05, 0.0);
    c.model = ModelLevel::effective;
    c.n_trajectories = 20000;
    c.sweep_axis = SweepAxis::alpha;
    c.sweep_grid = {0.01, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2};
    c.output = "out/fig3";
    return c;
}

RunConfig fig3_point() {
    RunConfig c;
    c.params = single_atom_params(0.05, 0.0);
    c.model = ModelLevel::effective;
    c.n_trajectories = 20000;
    c.output = "out/fig3-point";
    return c;
}

RunConfig gamma_sweep(const char* out) {
    RunConfig c;
    c.params = single_atom_params(0.05, 0.0);
    c.model = ModelLevel::full;
    c.n_trajectories = 20000;
    c.sweep_axis = SweepAxis::gamma;
    c.sweep_grid = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    c.output = out;
    return c;
}

RunConfig fig4() { return gamma_sweep("out/fig4"); }
RunConfig fig5() { return gamma_sweep("out/fig5"); }

RunConfig paper_single() {
    RunConfig c;
    c.params = single_atom_params(0.05, 0.1);
    c.model = ModelLevel::full;
    c.n_trajectories = 20000;
    c.output = "out/paper-single";
    return c;
}

RunConfig paper_multi() {
    RunConfig c;
    c.params = multi_atom_params();
    c.protocol = ProtocolKind::two;
    c.model = ModelLevel::full;
    c.n_trajectories = 1000;
    c.output = "out/paper-multi";
    return c;
}

constexpr PresetSpec kPresets[] = {
    {"fig3", fig3},
    {"fig3-point", fig3_point},
    {"fig4", fig4},
    {"fig5", fig5},
    {"paper-single", paper_single},
    {"paper-multi", paper_multi},
};

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& p : kPresets) {
        names.emplace_back(p.name);
        names.emplace_back(std::string(p.name) + "-desk");
    }
    return names;
}

RunConfig preset(const std::string& name) {
    const bool desk = name.size() > 5 && name.ends_with("-desk");
    const std::string base = desk ? name.substr(0, name.size() - 5) : name;
    for (const auto& p : kPresets) {
        if (base != p.name) continue;
        RunConfig c = p.make();
        if (desk) {
            c.n_trajectories = std::max(1L, c.n_trajectories / 10);
            c.output += "-desk";
        }
        return c;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace qtraj
