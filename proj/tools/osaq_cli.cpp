// Command-line front end: evaluate scenario configs, cluster variants, and
// compare method outputs against a baseline.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "osaq/errors.hpp"
#include "osaq/experiment.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct CommonOpts {
    std::string config;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> methods;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config, "scenario config file")->required();
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "override the base seed")
        ->each([&](const std::string&) { o.seed_set = true; });
    cmd->add_option("--methods", o.methods,
                    "restrict to these methods (comma separated)")
        ->delimiter(',');
}

std::vector<osaq::Scenario> load_scenarios(const CommonOpts& o) {
    std::vector<osaq::Scenario> scenarios = osaq::parse_config_file(o.config);
    for (osaq::Scenario& sc : scenarios) {
        if (o.seed_set) sc.base_seed = o.seed;
        if (!o.methods.empty()) {
            std::vector<osaq::Method> keep;
            for (const std::string& m : o.methods) {
                keep.push_back(osaq::method_from_string(m));
            }
            sc.methods = keep;
        }
    }
    return scenarios;
}

void write_outputs(const CommonOpts& o, const std::vector<osaq::ResultRow>& rows) {
    std::filesystem::create_directories(o.out_dir);
    const std::filesystem::path csv_path =
        std::filesystem::path(o.out_dir) / "results.csv";
    std::ofstream csv(csv_path);
    if (!csv) {
        throw osaq::validation_error("out", "cannot write " + csv_path.string());
    }
    osaq::write_csv(csv, rows);
    std::ofstream plot(std::filesystem::path(o.out_dir) / "plot.gp");
    plot << osaq::gnuplot_script(rows, "results.csv");
    std::cout << "wrote " << rows.size() << " rows to " << csv_path.string()
              << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"opportunistic-spectrum-access queueing toolkit"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "evaluate every scenario");
    add_common(run, run_opts);
    CLI::App* sweep =
        app.add_subcommand("sweep", "alias of run for sweep configs");
    CommonOpts sweep_opts;
    add_common(sweep, sweep_opts);

    CommonOpts cluster_opts;
    int clusters = 1;
    CLI::App* cluster = app.add_subcommand(
        "cluster", "evaluate scenarios split into equal sub-networks");
    add_common(cluster, cluster_opts);
    cluster->add_option("--clusters", clusters, "number of sub-networks")
        ->required();

    std::string cmp_in, cmp_baseline = "sim";
    double cmp_tolerance = 0.05;
    CLI::App* compare = app.add_subcommand(
        "compare", "compare methods in a results CSV against a baseline");
    compare->add_option("--in", cmp_in, "results CSV")->required();
    compare->add_option("--baseline", cmp_baseline, "baseline method name");
    compare->add_option("--tolerance", cmp_tolerance,
                        "maximum relative error to pass");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed() || sweep->parsed()) {
            const CommonOpts& o = run->parsed() ? run_opts : sweep_opts;
            std::vector<osaq::ResultRow> rows;
            for (const osaq::Scenario& sc : load_scenarios(o)) {
                for (osaq::ResultRow& r : osaq::run_scenario(sc)) {
                    rows.push_back(std::move(r));
                }
            }
            write_outputs(o, rows);
        } else if (cluster->parsed()) {
            std::vector<osaq::ResultRow> rows;
            for (const osaq::Scenario& sc : load_scenarios(cluster_opts)) {
                for (osaq::ResultRow& r : osaq::run_cluster(sc, clusters)) {
                    rows.push_back(std::move(r));
                }
            }
            write_outputs(cluster_opts, rows);
        } else if (compare->parsed()) {
            std::ifstream in(cmp_in);
            if (!in) {
                throw osaq::validation_error("in", "cannot open " + cmp_in);
            }
            const std::vector<osaq::ResultRow> rows = osaq::read_csv(in);
            const osaq::CompareReport report =
                osaq::compare_rows(rows, cmp_baseline, cmp_tolerance);
            osaq::write_compare_report(std::cout, report, cmp_tolerance);
            return report.all_pass ? 0 : 1;
        }
    } catch (const osaq::validation_error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const osaq::instability_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const osaq::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
