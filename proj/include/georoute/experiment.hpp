#pragma once

// Experiment matrix runner: replicated topologies per parameter point, all
// policies on the same topology and flow list, mean and 95% CI per metric.

#include "georoute/routing.hpp"
#include "georoute/simulator.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace georoute {

enum class Scenario { kUdgDensitySweep, kProxigraphVoid, kKSweep };

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& name);

struct ScenarioConfig {
    Scenario scenario = Scenario::kUdgDensitySweep;
    std::size_t n_nodes = 1000;
    std::vector<double> densities;
    std::vector<int> ks;
    std::vector<Policy> policies;
    std::size_t replications = 20;
    std::size_t n_flows = 1000;
    std::size_t packets_per_flow = 10;
    double delta_d = 0.0;
    double guard_angle = 0.0;
    std::uint64_t seed = 1;
    /// Relative radio-range spread of proxi-graph nodes.
    double std_fraction = 0.25;
    /// Keep the largest component when no connected sample is found.
    bool largest_component_fallback = true;
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;
    std::optional<std::string> dump_topologies;

    /// Defaults for a scenario: density grid {4,6,8,10,12,15,20} (k-sweep:
    /// density 8, k 1..5), all three policies, 20 replications, 1000 flows
    /// of 10 packets.
    static ScenarioConfig defaults(Scenario s);

    void validate() const;
};

struct MetricStat {
    std::optional<double> mean;
    std::optional<double> ci95;
    std::size_t n = 0;
};

struct MetricsRecord {
    Scenario scenario = Scenario::kUdgDensitySweep;
    Policy policy = Policy::kDeflection;
    double density = 0.0;
    int k = 0;
    bool failed = false;
    std::size_t replications = 0;
    MetricStat loss;
    MetricStat route_length;
    MetricStat stretch;
    MetricStat transmissions;
    std::size_t safety_cap_aborts = 0;
    std::size_t duplicate_forwards = 0;
};

struct Aggregate {
    double mean = 0.0;
    std::optional<double> ci95;
};

/// Arithmetic mean and Student-t 95% half-width (absent for one sample).
Aggregate aggregate(std::span<const double> samples);

std::vector<MetricsRecord> run_scenario(const ScenarioConfig& cfg);

/// Columns: scenario,policy,density,k,metric,mean,ci95,n
void write_csv(std::ostream& os, std::span<const MetricsRecord> records);

/// Looks up the record for a parameter point.
const MetricsRecord* find_record(std::span<const MetricsRecord> records, Policy policy, double density, int k);

} // namespace georoute
