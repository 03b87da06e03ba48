#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "osaq/params.hpp"

namespace osaq {

// Evaluation back-ends selectable per scenario.
enum class Method {
    Sim,           // slot simulation, infinite buffers
    SimTruncated,  // slot simulation with the Qs_max buffer limit
    ExactMc,       // per-node occupancy chain, truncated buffers
    CombinedExact, // combined chain, exact reservation-period recursion
    CombinedDist,  // combined chain, per-g geometric mixture
    CombinedAvg,   // combined chain, single average-g geometric
    Pawelczak,     // reduced busy-count chain (buffering only)
    ClosedFormN1,  // closed form, single node only
};

std::string to_string(Method m);
Method method_from_string(const std::string& s);

enum class SweepParam { None, Lambda, P, Q, Pc, DataChannels };

std::string to_string(SweepParam s);
SweepParam sweep_param_from_string(const std::string& s);

// One experiment: a parameter point (or sweep) evaluated by a set of
// methods. Parsed from a flat INI-style config file.
struct Scenario {
    std::string name;
    RawParams raw;
    std::vector<Method> methods;
    SweepParam sweep = SweepParam::None;
    std::vector<double> sweep_values; // strictly increasing when non-empty
    long horizon = 350'000;
    int replications = 10;
    std::uint64_t base_seed = 1;
    // hold psi and chi fixed across a p_c sweep by rescaling eta and eta_c
    bool psi_profile = false;

    // Parameters at one sweep point; validates the result.
    SystemParams params_at(double value) const;
};

// Config format: one or more [scenario] sections of `key = value` lines.
// '#' starts a comment. Throws validation_error with the offending key.
std::vector<Scenario> parse_config(std::istream& in);
std::vector<Scenario> parse_config_file(const std::string& path);

} // namespace osaq
