#pragma once

#include "georoute/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace georoute {

using NodeId = std::uint32_t;

enum class GraphModel { kUdg, kProxiGraph };

std::string to_string(GraphModel m);
GraphModel parse_graph_model(const std::string& tag);

/// Axis-aligned rectangular hole in the simulation disk.
struct VoidRegion {
    Point center;
    double half_width = 0.0;
    double half_height = 0.0;

    /// Square of side 0.4 * disk_radius centred on the origin.
    static VoidRegion central_square(double disk_radius);

    bool contains(Point p) const;
    void validate(double disk_radius) const;
};

struct RngSeed {
    std::uint64_t value = 0;
};

/// Mixes a parent seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream);

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Immutable geometric graph: positions, symmetric sorted adjacency.
class Topology {
public:
    Topology() = default;

    /// Builds a topology from explicit positions and undirected edges.
    /// Validates finiteness, rejects self-loops and out-of-range ids.
    static Topology from_edges(std::vector<Point> positions,
                               const std::vector<std::pair<NodeId, NodeId>>& edges,
                               double disk_radius = 1.0, GraphModel model = GraphModel::kUdg);

    std::size_t size() const { return positions_.size(); }
    Point position(NodeId id) const;
    std::span<const NodeId> neighbors(NodeId id) const;
    const std::vector<Point>& positions() const { return positions_; }
    double disk_radius() const { return disk_radius_; }
    GraphModel model() const { return model_; }

    std::size_t edge_count() const;
    double mean_degree() const;
    bool connected() const;
    bool has_edge(NodeId u, NodeId v) const;

    /// Induced subgraph on the largest connected component, ids renumbered in
    /// increasing order of the original ids.
    Topology largest_component() const;

    friend bool operator==(const Topology&, const Topology&) = default;

private:
    std::vector<Point> positions_;
    std::vector<std::vector<NodeId>> adjacency_;
    double disk_radius_ = 1.0;
    GraphModel model_ = GraphModel::kUdg;
};

struct GenerationOptions {
    double disk_radius = 1.0;
    int max_retries = 100;
    /// When every resample is disconnected, keep the largest component of the
    /// last sample instead of failing.
    bool fallback_to_largest_component = false;
};

/// Radio range giving the requested mean degree for n uniform nodes in the
/// disk (minus the void, if any). With std_fraction > 0 the result is the
/// mean range of a proxi-graph with that relative spread. The analytic value
/// R*sqrt(density/(n-1)) is refined by a deterministic Monte Carlo estimate
/// of the pair-distance distribution to account for the disk border.
double radius_for_density(std::size_t n, double density, double disk_radius = 1.0,
                          const std::optional<VoidRegion>& void_region = std::nullopt,
                          double std_fraction = 0.0);

/// The analytic estimate alone, before border correction.
double analytic_radius_for_density(std::size_t n, double density, double disk_radius = 1.0);

Topology generate_udg(std::size_t n, double radius, const std::optional<VoidRegion>& void_region,
                      RngSeed seed, const GenerationOptions& opts = {});

Topology generate_proxigraph(std::size_t n, double mean_range, double std_fraction,
                             const std::optional<VoidRegion>& void_region, RngSeed seed,
                             const GenerationOptions& opts = {});

/// Per-node ranges drawn by generate_proxigraph for a given attempt seed;
/// exposed for tests.
std::vector<double> draw_proxigraph_ranges(std::size_t n, double mean_range, double std_fraction,
                                           std::uint64_t attempt_seed);

/// All nodes at hop distance 1..k from `node`, sorted by id.
std::vector<NodeId> k_neighborhood(const Topology& t, NodeId node, int k);

std::optional<int> bfs_hops(const Topology& t, NodeId src, NodeId dst);

/// Hop distances from src to every node (-1 when unreachable).
std::vector<int> bfs_all(const Topology& t, NodeId src);

/// Line-oriented text form: header, `id x y` per node, `u v` per edge (u < v).
void write_topology(std::ostream& os, const Topology& t);
Topology read_topology(std::istream& is);

} // namespace georoute
