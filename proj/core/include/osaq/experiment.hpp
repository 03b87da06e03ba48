#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "osaq/scenario.hpp"

namespace osaq {

// One (scenario, method, sweep point) outcome. A failed evaluation keeps
// its row with the message in `error` so a sweep never loses points.
struct ResultRow {
    std::string scenario;
    std::string method;
    std::string sweep_param;
    double sweep_value = 0.0;
    double mean_system_time = 0.0; // slots; 0 when unstable or failed
    double ci95 = 0.0;             // simulation half-width, 0 for analytics
    double rho = 0.0;              // offered load, 0 when not computed
    bool stable = false;
    double runtime_ms = 0.0;
    std::string error;
};

// Evaluates every (method, sweep point) pair. Deterministic for a fixed
// scenario and seed, apart from runtime_ms.
std::vector<ResultRow> run_scenario(const Scenario& s);

// Splits a network of N nodes and M_C + 1 channels into `clusters` equal,
// independent sub-networks, each with its own control channel. Requires
// N and M_C + 1 divisible by `clusters`. Per-node delay is identical
// across sub-networks, so one is evaluated.
std::vector<ResultRow> run_cluster(const Scenario& s, int clusters);

// CSV round trip. Header:
// scenario,method,sweep_param,sweep_value,mean_system_time_slots,ci95,rho,stable,runtime_ms,error
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& is);

struct CompareEntry {
    std::string scenario;
    std::string method;
    double max_rel_error = 0.0; // over points where both are stable
    int points = 0;             // compared points
    bool pass = false;
};

struct CompareReport {
    std::vector<CompareEntry> entries;
    bool all_pass = true;
};

// Relative error of every non-baseline method against the baseline method,
// per scenario, over sweep points where both rows are stable and
// error-free. A method with no comparable points fails.
CompareReport compare_rows(const std::vector<ResultRow>& rows,
                           const std::string& baseline, double tolerance);

void write_compare_report(std::ostream& os, const CompareReport& report,
                          double tolerance);

// gnuplot script plotting mean system time vs the sweep value for every
// (scenario, method) series in `csv_name`.
std::string gnuplot_script(const std::vector<ResultRow>& rows,
                           const std::string& csv_name);

} // namespace osaq
