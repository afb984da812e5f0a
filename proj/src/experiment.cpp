#include "georoute/experiment.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace georoute {

std::string to_string(Scenario s) {
    switch (s) {
    case Scenario::kUdgDensitySweep:
        return "udg_density_sweep";
    case Scenario::kProxigraphVoid:
        return "proxigraph_void";
    case Scenario::kKSweep:
        return "k_sweep";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    if (name == "udg_density_sweep")
        return Scenario::kUdgDensitySweep;
    if (name == "proxigraph_void")
        return Scenario::kProxigraphVoid;
    if (name == "k_sweep")
        return Scenario::kKSweep;
    throw std::invalid_argument("unknown scenario: " + name);
}

ScenarioConfig ScenarioConfig::defaults(Scenario s) {
    ScenarioConfig cfg;
    cfg.scenario = s;
    cfg.policies = {Policy::kGreedy, Policy::kDeflection, Policy::kDeflectionOptimized};
    if (s == Scenario::kKSweep) {
        cfg.densities = {8};
        cfg.ks = {1, 2, 3, 4, 5};
    } else {
        cfg.densities = {4, 6, 8, 10, 12, 15, 20};
        cfg.ks = {3};
    }
    return cfg;
}

void ScenarioConfig::validate() const {
    if (n_nodes < 2)
        throw std::invalid_argument("scenario: need at least 2 nodes");
    if (densities.empty() || ks.empty() || policies.empty())
        throw std::invalid_argument("scenario: densities, k values and policies must be non-empty");
    if (replications == 0 || n_flows == 0 || packets_per_flow == 0)
        throw std::invalid_argument("scenario: counts must be positive");
    for (double d : densities) {
        if (!(d > 0.0))
            throw std::invalid_argument("scenario: densities must be positive");
        analytic_radius_for_density(n_nodes, d); // throws when infeasible
    }
    RoutingConfig probe;
    probe.delta_d = delta_d;
    probe.guard_angle = guard_angle;
    for (int k : ks) {
        probe.k = k;
        probe.validate();
    }
    if (!(std_fraction >= 0.0 && std_fraction < 1.0))
        throw std::invalid_argument("scenario: std fraction must lie in [0, 1)");
}

Aggregate aggregate(std::span<const double> samples) {
    if (samples.empty())
        throw std::invalid_argument("aggregate: no samples");
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double v : samples)
        sum += v;
    Aggregate a;
    a.mean = sum / n;
    if (samples.size() < 2)
        return a;
    double ss = 0.0;
    for (double v : samples)
        ss += (v - a.mean) * (v - a.mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t dist(n - 1.0);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
    a.ci95 = t * sd / std::sqrt(n);
    return a;
}

namespace {

struct Combo {
    Policy policy;
    int k;
};

struct ReplicationResult {
    bool ok = false;
    std::vector<RunMetrics> per_combo;
};

MetricStat summarize(const std::vector<double>& samples) {
    MetricStat s;
    s.n = samples.size();
    if (samples.empty())
        return s;
    const Aggregate a = aggregate(samples);
    s.mean = a.mean;
    s.ci95 = a.ci95;
    return s;
}

std::string format_number(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    pool.clear();
    if (error)
        std::rethrow_exception(error);
}

} // namespace

std::vector<MetricsRecord> run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    std::vector<Combo> combos;
    for (Policy p : cfg.policies)
        for (int k : cfg.ks)
            combos.push_back({p, k});

    const bool with_void = cfg.scenario == Scenario::kProxigraphVoid;
    const double std_fraction = with_void ? cfg.std_fraction : 0.0;
    const std::optional<VoidRegion> void_region =
        with_void ? std::optional(VoidRegion::central_square(1.0)) : std::nullopt;

    std::vector<double> ranges;
    for (double density : cfg.densities)
        ranges.push_back(radius_for_density(cfg.n_nodes, density, 1.0, void_region, std_fraction));

    const std::size_t n_points = cfg.densities.size();
    std::vector<ReplicationResult> results(n_points * cfg.replications);

    if (cfg.dump_topologies)
        std::filesystem::create_directories(*cfg.dump_topologies);

    parallel_for(results.size(), cfg.threads, [&](std::size_t task) {
        const std::size_t point = task / cfg.replications;
        const std::size_t rep = task % cfg.replications;
        const std::uint64_t topo_seed = derive_seed(derive_seed(cfg.seed, point), rep);

        GenerationOptions gen;
        gen.fallback_to_largest_component = cfg.largest_component_fallback;
        Topology topo;
        try {
            topo = with_void ? generate_proxigraph(cfg.n_nodes, ranges[point], std_fraction, void_region,
                                                   RngSeed{topo_seed}, gen)
                             : generate_udg(cfg.n_nodes, ranges[point], std::nullopt, RngSeed{topo_seed}, gen);
        } catch (const GenerationError&) {
            return;
        }
        if (topo.size() < 2)
            return;
        if (cfg.dump_topologies) {
            const auto file = std::filesystem::path(*cfg.dump_topologies) /
                              (to_string(cfg.scenario) + "_d" + format_number(cfg.densities[point]) + "_r" +
                               std::to_string(rep) + ".topo");
            std::ofstream os(file);
            if (!os)
                throw std::runtime_error("cannot write " + file.string());
            write_topology(os, topo);
        }

        const auto flows = generate_flows(topo, cfg.n_flows, RngSeed{derive_seed(topo_seed, 1)});
        ReplicationResult& res = results[task];
        res.per_combo.resize(combos.size());
        for (std::size_t c = 0; c < combos.size(); ++c) {
            // only the forbidden-sector policy reads k-hop knowledge; the
            // others give identical runs for every k
            if (combos[c].policy != Policy::kDeflectionOptimized && c > 0 &&
                combos[c - 1].policy == combos[c].policy) {
                res.per_combo[c] = res.per_combo[c - 1];
                continue;
            }
            RoutingConfig rc;
            rc.policy = combos[c].policy;
            rc.k = combos[c].k;
            rc.delta_d = cfg.delta_d;
            rc.guard_angle = cfg.guard_angle;
            const SimulationRun run = run_simulation(topo, rc, flows, cfg.packets_per_flow, RngSeed{topo_seed});
            res.per_combo[c] = collect_metrics(run);
        }
        res.ok = true;
    });

    std::vector<MetricsRecord> records;
    for (std::size_t point = 0; point < n_points; ++point)
        for (std::size_t c = 0; c < combos.size(); ++c) {
            MetricsRecord r;
            r.scenario = cfg.scenario;
            r.policy = combos[c].policy;
            r.density = cfg.densities[point];
            r.k = combos[c].k;
            std::vector<double> loss, length, stretch, tx;
            for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
                const ReplicationResult& res = results[point * cfg.replications + rep];
                if (!res.ok)
                    continue;
                const RunMetrics& m = res.per_combo[c];
                ++r.replications;
                loss.push_back(m.loss);
                tx.push_back(m.transmissions);
                if (m.route_length)
                    length.push_back(*m.route_length);
                if (m.stretch)
                    stretch.push_back(*m.stretch);
                r.safety_cap_aborts += m.safety_cap_aborts;
                r.duplicate_forwards += m.duplicate_forwards;
            }
            r.failed = r.replications == 0;
            r.loss = summarize(loss);
            r.route_length = summarize(length);
            r.stretch = summarize(stretch);
            r.transmissions = summarize(tx);
            records.push_back(r);
        }
    return records;
}

void write_csv(std::ostream& os, std::span<const MetricsRecord> records) {
    os << "scenario,policy,density,k,metric,mean,ci95,n\n";
    for (const MetricsRecord& r : records) {
        const std::string prefix =
            to_string(r.scenario) + ',' + to_string(r.policy) + ',' + format_number(r.density) + ',' +
            std::to_string(r.k) + ',';
        if (r.failed) {
            os << prefix << "generation_failed,,,0\n";
            continue;
        }
        auto row = [&](const char* name, const MetricStat& s) {
            os << prefix << name << ',' << (s.mean ? format_number(*s.mean) : "") << ','
               << (s.ci95 ? format_number(*s.ci95) : "") << ',' << s.n << '\n';
        };
        row("loss", r.loss);
        row("route_length", r.route_length);
        row("stretch", r.stretch);
        row("transmissions", r.transmissions);
        os << prefix << "safety_cap_aborts," << r.safety_cap_aborts << ",," << r.replications << '\n';
        os << prefix << "duplicate_forwards," << r.duplicate_forwards << ",," << r.replications << '\n';
    }
}

const MetricsRecord* find_record(std::span<const MetricsRecord> records, Policy policy, double density, int k) {
    for (const MetricsRecord& r : records)
        if (r.policy == policy && r.density == density && r.k == k)
            return &r;
    return nullptr;
}

} // namespace georoute
