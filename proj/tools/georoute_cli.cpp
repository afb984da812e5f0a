// Experiment runner: writes one CSV row per (parameter point, metric).

#include "georoute/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <numbers>

using namespace georoute;

int main(int argc, char** argv) {
    CLI::App app{"Greedy geographic routing with reactive deflection: experiment runner"};

    std::string scenario_name = "udg_density_sweep";
    std::size_t nodes = 1000;
    std::vector<double> densities;
    std::vector<int> ks;
    std::vector<std::string> policy_names;
    std::size_t replications = 20;
    std::size_t flows = 1000;
    std::size_t packets_per_flow = 10;
    double delta_d = 0.0;
    double guard_deg = 0.0;
    std::uint64_t seed = 1;
    double std_fraction = 0.25;
    unsigned threads = 0;
    std::string out_path;
    std::string dump_dir;
    bool strict_connectivity = false;

    app.add_option("--scenario", scenario_name, "udg_density_sweep | proxigraph_void | k_sweep")
        ->check(CLI::IsMember({"udg_density_sweep", "proxigraph_void", "k_sweep"}));
    app.add_option("--nodes", nodes, "Nodes per topology");
    app.add_option("--density", densities, "Mean neighbors per node (comma list)")->delimiter(',');
    app.add_option("--k", ks, "Hello flooding scope in hops (comma list)")->delimiter(',');
    app.add_option("--policy", policy_names, "greedy, deflection, deflection_optimized (comma list)")
        ->delimiter(',');
    app.add_option("--replications", replications, "Topologies per parameter point");
    app.add_option("--flows", flows, "Flows per topology");
    app.add_option("--packets-per-flow", packets_per_flow, "Packets per flow");
    app.add_option("--delta-d", delta_d, "Sector merge tolerance on minimum distance (disk radius = 1)");
    app.add_option("--guard-angle", guard_deg, "Forbidden-sector guard angle, degrees")->check(CLI::Range(0.0, 45.0));
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--std-fraction", std_fraction, "Proxi-graph radio-range spread (fraction of the mean)");
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    app.add_option("--out", out_path, "CSV output path (default: stdout)");
    app.add_option("--dump-topologies", dump_dir, "Write every generated topology into this directory");
    app.add_flag("--strict-connectivity", strict_connectivity,
                 "Fail a parameter point instead of keeping the largest component");

    CLI11_PARSE(app, argc, argv);

    try {
        ScenarioConfig cfg = ScenarioConfig::defaults(parse_scenario(scenario_name));
        cfg.n_nodes = nodes;
        if (!densities.empty())
            cfg.densities = densities;
        if (!ks.empty())
            cfg.ks = ks;
        if (!policy_names.empty()) {
            cfg.policies.clear();
            for (const auto& p : policy_names)
                cfg.policies.push_back(parse_policy(p));
        }
        cfg.replications = replications;
        cfg.n_flows = flows;
        cfg.packets_per_flow = packets_per_flow;
        cfg.delta_d = delta_d;
        cfg.guard_angle = guard_deg * std::numbers::pi / 180.0;
        cfg.seed = seed;
        cfg.std_fraction = std_fraction;
        cfg.threads = threads;
        cfg.largest_component_fallback = !strict_connectivity;
        if (!dump_dir.empty())
            cfg.dump_topologies = dump_dir;
        cfg.validate();

        const auto records = run_scenario(cfg);
        if (out_path.empty()) {
            write_csv(std::cout, records);
        } else {
            std::ofstream os(out_path);
            if (!os) {
                std::cerr << "error: cannot open " << out_path << " for writing\n";
                return 2;
            }
            write_csv(os, records);
            if (!os) {
                std::cerr << "error: write to " << out_path << " failed\n";
                return 2;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
