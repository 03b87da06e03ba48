#include "osaq/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "osaq/combined.hpp"
#include "osaq/errors.hpp"
#include "osaq/occupancy.hpp"
#include "osaq/sim.hpp"

namespace osaq {

std::string to_string(Method m) {
    switch (m) {
        case Method::Sim: return "sim";
        case Method::SimTruncated: return "sim-truncated";
        case Method::ExactMc: return "exact-mc";
        case Method::CombinedExact: return "combined-exact";
        case Method::CombinedDist: return "combined-dist";
        case Method::CombinedAvg: return "combined-avg";
        case Method::Pawelczak: return "pawelczak";
        case Method::ClosedFormN1: return "closed-form-n1";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    for (Method m : {Method::Sim, Method::SimTruncated, Method::ExactMc,
                     Method::CombinedExact, Method::CombinedDist,
                     Method::CombinedAvg, Method::Pawelczak,
                     Method::ClosedFormN1}) {
        if (to_string(m) == s) return m;
    }
    throw validation_error("methods", "unknown method '" + s + "'");
}

std::string to_string(SweepParam s) {
    switch (s) {
        case SweepParam::None: return "none";
        case SweepParam::Lambda: return "lambda";
        case SweepParam::P: return "p";
        case SweepParam::Q: return "q";
        case SweepParam::Pc: return "p_c";
        case SweepParam::DataChannels: return "data_channels";
    }
    return "?";
}

SweepParam sweep_param_from_string(const std::string& s) {
    for (SweepParam sp : {SweepParam::None, SweepParam::Lambda, SweepParam::P,
                          SweepParam::Q, SweepParam::Pc,
                          SweepParam::DataChannels}) {
        if (to_string(sp) == s) return sp;
    }
    throw validation_error("sweep", "unknown sweep parameter '" + s + "'");
}

SystemParams Scenario::params_at(double value) const {
    RawParams r = raw;
    switch (sweep) {
        case SweepParam::None: break;
        case SweepParam::Lambda: r.lambda = value; break;
        case SweepParam::P: r.p = value; break;
        case SweepParam::Q: r.q = value; break;
        case SweepParam::Pc: r.p_c = value; break;
        case SweepParam::DataChannels:
            r.n_data_channels = static_cast<int>(std::lround(value));
            break;
    }
    if (psi_profile) {
        if (sweep != SweepParam::Pc) {
            throw validation_error("psi_profile",
                                   "only meaningful for a p_c sweep");
        }
        const double keep = 1.0 - r.p_c;
        if (keep <= 0.0) {
            throw validation_error("psi_profile", "p_c must stay below 1");
        }
        const double psi0 = (1.0 - raw.p_c) * raw.eta;
        const double chi0 = (1.0 - raw.p_c) * raw.eta_c;
        r.eta = psi0 / keep;
        r.eta_c = chi0 / keep;
        if (r.eta > 1.0 || r.eta_c > 1.0) {
            throw validation_error(
                "psi_profile", "rescaled capture probability exceeds 1");
        }
    }
    return SystemParams::derive(r);
}

// --- config parsing -------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw validation_error(key, "not a number: '" + v + "'");
    }
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw validation_error(key, "not an integer: '" + v + "'");
    }
}

void apply_key(Scenario& sc, const std::string& key, const std::string& value) {
    if (key == "name") {
        sc.name = value;
    } else if (key == "protocol") {
        sc.raw.protocol = protocol_from_string(value);
    } else if (key == "nodes") {
        sc.raw.n_nodes = static_cast<int>(parse_long(key, value));
    } else if (key == "data_channels") {
        sc.raw.n_data_channels = static_cast<int>(parse_long(key, value));
    } else if (key == "p_c") {
        sc.raw.p_c = parse_double(key, value);
    } else if (key == "eta") {
        sc.raw.eta = parse_double(key, value);
    } else if (key == "eta_c") {
        sc.raw.eta_c = parse_double(key, value);
    } else if (key == "lambda") {
        sc.raw.lambda = parse_double(key, value);
    } else if (key == "q") {
        sc.raw.q = parse_double(key, value);
    } else if (key == "p") {
        sc.raw.p = parse_double(key, value);
    } else if (key == "qs_max") {
        sc.raw.qs_max = static_cast<int>(parse_long(key, value));
    } else if (key == "methods") {
        sc.methods.clear();
        for (const std::string& m : split(value, ',')) {
            if (!m.empty()) sc.methods.push_back(method_from_string(m));
        }
    } else if (key == "sweep") {
        sc.sweep = sweep_param_from_string(value);
    } else if (key == "sweep_values") {
        sc.sweep_values.clear();
        for (const std::string& v : split(value, ',')) {
            if (!v.empty()) sc.sweep_values.push_back(parse_double(key, v));
        }
    } else if (key == "horizon") {
        sc.horizon = parse_long(key, value);
    } else if (key == "replications") {
        sc.replications = static_cast<int>(parse_long(key, value));
    } else if (key == "seed") {
        sc.base_seed = static_cast<std::uint64_t>(parse_long(key, value));
    } else if (key == "psi_profile") {
        if (value == "true" || value == "1") {
            sc.psi_profile = true;
        } else if (value == "false" || value == "0") {
            sc.psi_profile = false;
        } else {
            throw validation_error(key, "expected true/false");
        }
    } else {
        throw validation_error(key, "unknown configuration key");
    }
}

void finalize(Scenario& sc, std::size_t ordinal) {
    if (sc.name.empty()) {
        sc.name = "scenario-" + std::to_string(ordinal);
    }
    if (sc.methods.empty()) {
        throw validation_error("methods",
                               "scenario '" + sc.name + "' lists no methods");
    }
    if (sc.sweep == SweepParam::None) {
        if (!sc.sweep_values.empty()) {
            throw validation_error(
                "sweep_values", "given without a sweep parameter in '" +
                                    sc.name + "'");
        }
    } else {
        if (sc.sweep_values.empty()) {
            throw validation_error("sweep_values",
                                   "sweep without values in '" + sc.name + "'");
        }
        for (std::size_t i = 1; i < sc.sweep_values.size(); ++i) {
            if (sc.sweep_values[i] <= sc.sweep_values[i - 1]) {
                throw validation_error(
                    "sweep_values",
                    "must be strictly increasing in '" + sc.name + "'");
            }
        }
    }
    // validate the parameter set at every point up front
    if (sc.sweep == SweepParam::None) {
        (void)sc.params_at(0.0);
    } else {
        for (double v : sc.sweep_values) (void)sc.params_at(v);
    }
}

} // namespace

std::vector<Scenario> parse_config(std::istream& in) {
    std::vector<Scenario> scenarios;
    bool in_section = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line != "[scenario]") {
                throw validation_error("config", "unknown section " + line);
            }
            if (in_section) finalize(scenarios.back(), scenarios.size());
            scenarios.emplace_back();
            in_section = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || !in_section) {
            throw validation_error(
                "config", "line " + std::to_string(lineno) +
                              ": expected 'key = value' inside [scenario]");
        }
        apply_key(scenarios.back(), trim(line.substr(0, eq)),
                  trim(line.substr(eq + 1)));
    }
    if (in_section) finalize(scenarios.back(), scenarios.size());
    if (scenarios.empty()) {
        throw validation_error("config", "no [scenario] section found");
    }
    return scenarios;
}

std::vector<Scenario> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw validation_error("config", "cannot open '" + path + "'");
    }
    return parse_config(in);
}

// --- evaluation -----------------------------------------------------------

namespace {

XrMethod xr_method_of(Method m) {
    switch (m) {
        case Method::CombinedExact: return XrMethod::ExactRecursion;
        case Method::CombinedDist: return XrMethod::Mixture;
        case Method::CombinedAvg: return XrMethod::Average;
        case Method::Pawelczak: return XrMethod::Reduced;
        default: throw numeric_error("not a combined-chain method");
    }
}

void eval_method(ResultRow& row, Method m, const SystemParams& params,
                 const Scenario& sc) {
    switch (m) {
        case Method::Sim:
        case Method::SimTruncated: {
            const SimStats st =
                run_batch(params, sc.horizon, sc.replications, sc.base_seed,
                          m == Method::SimTruncated);
            if (st.undefined) {
                row.error = "no completed packets";
                return;
            }
            row.mean_system_time = st.mean_system_time;
            row.ci95 = st.ci95_halfwidth;
            row.stable = !st.unstable;
            return;
        }
        case Method::ExactMc: {
            const auto states = enumerate_states(params);
            const TransitionMatrix P = build_occupancy_matrix(states, params);
            const std::vector<double> pi = steady_state(P);
            const OccupancyDelay d = delay_from_pi(pi, states, params);
            row.mean_system_time = d.mean_system_time;
            row.stable = true; // finite-buffer chain, always positive recurrent
            return;
        }
        case Method::ClosedFormN1: {
            if (params.n_nodes() != 1) {
                throw validation_error("nodes",
                                       "closed-form-n1 requires a single node");
            }
            const double rate =
                params.protocol() == Protocol::Buffering
                    ? params.p() * params.chi()
                    : params.p() * params.chi() * (1.0 - params.p_c());
            if (rate <= 0.0) throw numeric_error("zero access rate");
            const Moments xr{1.0 / rate, (2.0 - rate) / (rate * rate)};
            const ServiceMoments sm =
                service_moments(params.protocol(), xr, params);
            row.rho = params.lambda() * sm.x1;
            if (row.rho >= 1.0) {
                row.stable = false;
                return;
            }
            row.mean_system_time = geom_g1_delay(params.lambda(), sm);
            row.stable = true;
            return;
        }
        default: {
            const CombinedSolution sol =
                solve_combined(params.protocol(), params, xr_method_of(m));
            row.rho = sol.fixed_point.rho;
            row.stable = sol.stable;
            if (sol.stable) row.mean_system_time = sol.mean_system_time;
            return;
        }
    }
}

std::string sanitize(std::string msg) {
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return msg;
}

std::vector<ResultRow> run_points(const Scenario& sc,
                                  const std::string& name_override) {
    std::vector<double> points = sc.sweep_values;
    if (sc.sweep == SweepParam::None) points = {0.0};

    std::vector<ResultRow> rows;
    for (double v : points) {
        for (Method m : sc.methods) {
            ResultRow row;
            row.scenario = name_override.empty() ? sc.name : name_override;
            row.method = to_string(m);
            row.sweep_param = to_string(sc.sweep);
            row.sweep_value = v;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                eval_method(row, m, sc.params_at(v), sc);
            } catch (const std::exception& e) {
                row.error = sanitize(e.what());
                row.mean_system_time = 0.0;
                row.stable = false;
            }
            row.runtime_ms =
                std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace

std::vector<ResultRow> run_scenario(const Scenario& s) {
    return run_points(s, "");
}

std::vector<ResultRow> run_cluster(const Scenario& s, int clusters) {
    if (clusters < 1) {
        throw validation_error("clusters", "must be >= 1");
    }
    const int total_channels = s.raw.n_data_channels + 1;
    if (s.raw.n_nodes % clusters != 0) {
        throw validation_error("clusters",
                               "node count not divisible by cluster count");
    }
    if (total_channels % clusters != 0) {
        throw validation_error("clusters",
                               "channel count not divisible by cluster count");
    }
    Scenario sub = s;
    sub.raw.n_nodes = s.raw.n_nodes / clusters;
    sub.raw.n_data_channels = total_channels / clusters - 1;
    if (sub.raw.n_data_channels < 1) {
        throw validation_error("clusters", "a cluster needs a data channel");
    }
    if (sub.sweep == SweepParam::None) {
        (void)sub.params_at(0.0);
    } else {
        for (double v : sub.sweep_values) (void)sub.params_at(v);
    }
    return run_points(sub, s.name + "-c" + std::to_string(clusters));
}

// --- CSV ------------------------------------------------------------------

namespace {

constexpr const char* kHeader =
    "scenario,method,sweep_param,sweep_value,mean_system_time_slots,ci95,rho,"
    "stable,runtime_ms,error";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << kHeader << '\n';
    for (const ResultRow& r : rows) {
        os << r.scenario << ',' << r.method << ',' << r.sweep_param << ','
           << fmt(r.sweep_value) << ',' << fmt(r.mean_system_time) << ','
           << fmt(r.ci95) << ',' << fmt(r.rho) << ',' << (r.stable ? 1 : 0)
           << ',' << fmt(r.runtime_ms) << ',' << r.error << '\n';
    }
}

std::vector<ResultRow> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != kHeader) {
        throw validation_error("csv", "missing or unexpected header");
    }
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (line.back() == ',') f.push_back("");
        if (f.size() != 10) {
            throw validation_error("csv", "line " + std::to_string(lineno) +
                                              ": expected 10 fields");
        }
        ResultRow r;
        r.scenario = f[0];
        r.method = f[1];
        r.sweep_param = f[2];
        r.sweep_value = parse_double("sweep_value", f[3]);
        r.mean_system_time = parse_double("mean_system_time_slots", f[4]);
        r.ci95 = parse_double("ci95", f[5]);
        r.rho = parse_double("rho", f[6]);
        r.stable = f[7] == "1";
        r.runtime_ms = parse_double("runtime_ms", f[8]);
        r.error = f[9];
        rows.push_back(std::move(r));
    }
    return rows;
}

// --- comparison -----------------------------------------------------------

CompareReport compare_rows(const std::vector<ResultRow>& rows,
                           const std::string& baseline, double tolerance) {
    // baseline value per (scenario, sweep point)
    std::map<std::pair<std::string, double>, const ResultRow*> base;
    for (const ResultRow& r : rows) {
        if (r.method == baseline && r.error.empty() && r.stable) {
            base[{r.scenario, r.sweep_value}] = &r;
        }
    }
    if (base.empty()) {
        throw validation_error("baseline", "no usable '" + baseline + "' rows");
    }

    std::map<std::pair<std::string, std::string>, CompareEntry> entries;
    for (const ResultRow& r : rows) {
        if (r.method == baseline) continue;
        auto& e = entries[{r.scenario, r.method}];
        e.scenario = r.scenario;
        e.method = r.method;
        const auto it = base.find({r.scenario, r.sweep_value});
        if (it == base.end() || !r.error.empty() || !r.stable) continue;
        const double ref = it->second->mean_system_time;
        if (ref <= 0.0) continue;
        e.max_rel_error = std::max(e.max_rel_error,
                                   std::abs(r.mean_system_time - ref) / ref);
        ++e.points;
    }

    CompareReport report;
    for (auto& [key, e] : entries) {
        e.pass = e.points > 0 && e.max_rel_error <= tolerance;
        report.all_pass = report.all_pass && e.pass;
        report.entries.push_back(e);
    }
    if (report.entries.empty()) {
        throw validation_error("compare", "no methods to compare");
    }
    return report;
}

void write_compare_report(std::ostream& os, const CompareReport& report,
                          double tolerance) {
    os << "tolerance " << fmt(tolerance) << '\n';
    for (const CompareEntry& e : report.entries) {
        os << (e.pass ? "PASS" : "FAIL") << ' ' << e.scenario << ' ' << e.method
           << " max_rel_error=" << fmt(e.max_rel_error)
           << " points=" << e.points << '\n';
    }
    os << (report.all_pass ? "ALL PASS" : "FAILURES PRESENT") << '\n';
}

std::string gnuplot_script(const std::vector<ResultRow>& rows,
                           const std::string& csv_name) {
    std::vector<std::pair<std::string, std::string>> series;
    for (const ResultRow& r : rows) {
        const auto key = std::make_pair(r.scenario, r.method);
        if (std::find(series.begin(), series.end(), key) == series.end()) {
            series.push_back(key);
        }
    }
    std::ostringstream os;
    os << "set datafile separator ','\n"
       << "set key outside\n"
       << "set xlabel 'sweep value'\n"
       << "set ylabel 'mean system time [slots]'\n"
       << "plot ";
    bool first = true;
    for (const auto& [scenario, method] : series) {
        if (!first) os << ", \\\n     ";
        first = false;
        os << "'" << csv_name << "' using 4:(strcol(1) eq '" << scenario
           << "' && strcol(2) eq '" << method
           << "' && $8 == 1 ? $5 : 1/0) with linespoints title '" << scenario
           << " " << method << "'";
    }
    os << '\n';
    return os.str();
}

} // namespace osaq
