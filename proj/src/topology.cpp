#include "georoute/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace georoute {

std::string to_string(GraphModel m) {
    return m == GraphModel::kUdg ? "udg" : "proxigraph";
}

GraphModel parse_graph_model(const std::string& tag) {
    if (tag == "udg")
        return GraphModel::kUdg;
    if (tag == "proxigraph")
        return GraphModel::kProxiGraph;
    throw std::invalid_argument("unknown graph model: " + tag);
}

VoidRegion VoidRegion::central_square(double disk_radius) {
    const double half = 0.2 * disk_radius;
    return VoidRegion{Point{0.0, 0.0}, half, half};
}

bool VoidRegion::contains(Point p) const {
    return std::abs(p.x - center.x) <= half_width && std::abs(p.y - center.y) <= half_height;
}

void VoidRegion::validate(double disk_radius) const {
    if (!(half_width > 0.0) || !(half_height > 0.0))
        throw std::invalid_argument("VoidRegion: extents must be positive");
    const double corner = std::hypot(std::abs(center.x) + half_width, std::abs(center.y) + half_height);
    if (corner > disk_radius)
        throw std::invalid_argument("VoidRegion: rectangle must lie inside the simulation disk");
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
    std::uint64_t z = parent + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Topology

Topology Topology::from_edges(std::vector<Point> positions,
                              const std::vector<std::pair<NodeId, NodeId>>& edges, double disk_radius,
                              GraphModel model) {
    Topology t;
    for (const Point& p : positions)
        if (!p.finite())
            throw std::invalid_argument("Topology: non-finite node position");
    t.positions_ = std::move(positions);
    t.adjacency_.resize(t.positions_.size());
    t.disk_radius_ = disk_radius;
    t.model_ = model;
    for (auto [u, v] : edges) {
        if (u >= t.size() || v >= t.size())
            throw std::invalid_argument("Topology: edge endpoint out of range");
        if (u == v)
            throw std::invalid_argument("Topology: self-loop");
        t.adjacency_[u].push_back(v);
        t.adjacency_[v].push_back(u);
    }
    for (auto& adj : t.adjacency_) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    return t;
}

Point Topology::position(NodeId id) const {
    if (id >= size())
        throw LookupError("unknown node id " + std::to_string(id));
    return positions_[id];
}

std::span<const NodeId> Topology::neighbors(NodeId id) const {
    if (id >= size())
        throw LookupError("unknown node id " + std::to_string(id));
    return adjacency_[id];
}

std::size_t Topology::edge_count() const {
    std::size_t twice = 0;
    for (const auto& adj : adjacency_)
        twice += adj.size();
    return twice / 2;
}

double Topology::mean_degree() const {
    return size() == 0 ? 0.0 : 2.0 * static_cast<double>(edge_count()) / static_cast<double>(size());
}

bool Topology::has_edge(NodeId u, NodeId v) const {
    const auto adj = neighbors(u);
    return std::binary_search(adj.begin(), adj.end(), v);
}

bool Topology::connected() const {
    if (size() == 0)
        return true;
    const auto dist = bfs_all(*this, 0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

Topology Topology::largest_component() const {
    std::vector<int> comp(size(), -1);
    int best = -1;
    std::size_t best_size = 0;
    int next = 0;
    for (NodeId s = 0; s < size(); ++s) {
        if (comp[s] >= 0)
            continue;
        std::size_t count = 0;
        std::deque<NodeId> queue{s};
        comp[s] = next;
        while (!queue.empty()) {
            NodeId u = queue.front();
            queue.pop_front();
            ++count;
            for (NodeId v : adjacency_[u])
                if (comp[v] < 0) {
                    comp[v] = next;
                    queue.push_back(v);
                }
        }
        if (count > best_size) {
            best_size = count;
            best = next;
        }
        ++next;
    }
    std::vector<NodeId> remap(size(), 0);
    std::vector<Point> pos;
    for (NodeId u = 0; u < size(); ++u)
        if (comp[u] == best) {
            remap[u] = static_cast<NodeId>(pos.size());
            pos.push_back(positions_[u]);
        }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < size(); ++u)
        if (comp[u] == best)
            for (NodeId v : adjacency_[u])
                if (u < v)
                    edges.emplace_back(remap[u], remap[v]);
    return from_edges(std::move(pos), edges, disk_radius_, model_);
}

// ---------------------------------------------------------------------------
// Generation

namespace {

std::vector<Point> place_nodes(std::size_t n, double disk_radius, const std::optional<VoidRegion>& void_region,
                               std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coord(-disk_radius, disk_radius);
    std::vector<Point> pts;
    pts.reserve(n);
    while (pts.size() < n) {
        Point p{coord(rng), coord(rng)};
        if (p.x * p.x + p.y * p.y > disk_radius * disk_radius)
            continue;
        if (void_region && void_region->contains(p))
            continue;
        pts.push_back(p);
    }
    return pts;
}

double truncated_normal(std::mt19937_64& rng, double mean, double stddev) {
    std::normal_distribution<double> normal(mean, stddev);
    for (;;) {
        const double v = normal(rng);
        if (v > 0.0)
            return v;
    }
}

void check_generation_args(std::size_t n, const std::optional<VoidRegion>& void_region,
                           const GenerationOptions& opts) {
    if (n < 2)
        throw std::invalid_argument("generation requires at least 2 nodes");
    if (!(opts.disk_radius > 0.0))
        throw std::invalid_argument("disk radius must be positive");
    if (opts.max_retries < 1)
        throw std::invalid_argument("max_retries must be at least 1");
    if (void_region)
        void_region->validate(opts.disk_radius);
}

// Resamples with derived sub-seeds until `attempt` yields a connected graph.
template <typename Attempt>
Topology generate_connected(RngSeed seed, const GenerationOptions& opts, const std::string& what,
                            Attempt&& attempt) {
    Topology last;
    for (int i = 0; i < opts.max_retries; ++i) {
        last = attempt(derive_seed(seed.value, static_cast<std::uint64_t>(i)));
        if (last.connected())
            return last;
    }
    if (opts.fallback_to_largest_component)
        return last.largest_component();
    throw GenerationError("no connected topology after " + std::to_string(opts.max_retries) +
                          " attempts (" + what + ", seed " + std::to_string(seed.value) + ")");
}

} // namespace

std::vector<double> draw_proxigraph_ranges(std::size_t n, double mean_range, double std_fraction,
                                           std::uint64_t attempt_seed) {
    std::vector<double> ranges(n, mean_range);
    if (std_fraction > 0.0) {
        std::mt19937_64 rng(derive_seed(attempt_seed, 0x72616e6765ULL));
        for (double& r : ranges)
            r = truncated_normal(rng, mean_range, std_fraction * mean_range);
    }
    return ranges;
}

namespace {

Topology build_graph(std::vector<Point> pts, const std::vector<double>& ranges, double disk_radius,
                     GraphModel model) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    const auto n = static_cast<NodeId>(pts.size());
    // sweep in x order; pairs further apart in x than the largest range never link
    std::vector<NodeId> order(n);
    for (NodeId i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return pts[a].x < pts[b].x; });
    const double reach = n == 0 ? 0.0 : *std::max_element(ranges.begin(), ranges.end());
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const NodeId u = order[i];
            const NodeId v = order[j];
            if (pts[v].x - pts[u].x > reach)
                break;
            if (euclid_dist(pts[u], pts[v]) <= std::min(ranges[u], ranges[v]))
                edges.emplace_back(std::min(u, v), std::max(u, v));
        }
    return Topology::from_edges(std::move(pts), edges, disk_radius, model);
}

} // namespace

Topology generate_udg(std::size_t n, double radius, const std::optional<VoidRegion>& void_region, RngSeed seed,
                      const GenerationOptions& opts) {
    check_generation_args(n, void_region, opts);
    if (!(radius > 0.0))
        throw std::invalid_argument("radio range must be positive");
    const std::vector<double> ranges(n, radius);
    std::ostringstream what;
    what << "udg n=" << n << " radius=" << radius;
    return generate_connected(seed, opts, what.str(), [&](std::uint64_t s) {
        std::mt19937_64 rng(s);
        return build_graph(place_nodes(n, opts.disk_radius, void_region, rng), ranges, opts.disk_radius,
                           GraphModel::kUdg);
    });
}

Topology generate_proxigraph(std::size_t n, double mean_range, double std_fraction,
                             const std::optional<VoidRegion>& void_region, RngSeed seed,
                             const GenerationOptions& opts) {
    check_generation_args(n, void_region, opts);
    if (!(mean_range > 0.0))
        throw std::invalid_argument("mean radio range must be positive");
    if (!(std_fraction >= 0.0 && std_fraction < 1.0))
        throw std::invalid_argument("std_fraction must lie in [0, 1)");
    std::ostringstream what;
    what << "proxigraph n=" << n << " mean_range=" << mean_range << " std=" << std_fraction;
    return generate_connected(seed, opts, what.str(), [&](std::uint64_t s) {
        std::mt19937_64 rng(s);
        auto pts = place_nodes(n, opts.disk_radius, void_region, rng);
        return build_graph(std::move(pts), draw_proxigraph_ranges(n, mean_range, std_fraction, s),
                           opts.disk_radius, GraphModel::kProxiGraph);
    });
}

double analytic_radius_for_density(std::size_t n, double density, double disk_radius) {
    if (n < 2)
        throw std::invalid_argument("radius_for_density: need at least 2 nodes");
    if (!(density > 0.0))
        throw std::invalid_argument("radius_for_density: density must be positive");
    const double r = disk_radius * std::sqrt(density / static_cast<double>(n - 1));
    if (r > disk_radius * (1.0 + 1e-12))
        throw std::invalid_argument("radius_for_density: density infeasible for this node count");
    return std::min(r, disk_radius);
}

double radius_for_density(std::size_t n, double density, double disk_radius,
                          const std::optional<VoidRegion>& void_region, double std_fraction) {
    // validates the arguments and the feasibility bound
    analytic_radius_for_density(n, density, disk_radius);
    if (void_region)
        void_region->validate(disk_radius);

    // Mean degree is (n-1) * P(pair linked); a pair is linked when
    // d <= r * min(g1, g2) with g ~ N(1, std) truncated at 0 (g = 1 for UDG).
    // The required r is the q-quantile of d / min(g1, g2).
    constexpr std::size_t kPairs = 400'000;
    std::mt19937_64 rng(0x6465'6e73'6974'79ULL);
    std::uniform_real_distribution<double> coord(-disk_radius, disk_radius);
    auto sample = [&] {
        for (;;) {
            Point p{coord(rng), coord(rng)};
            if (p.x * p.x + p.y * p.y <= disk_radius * disk_radius && !(void_region && void_region->contains(p)))
                return p;
        }
    };
    std::vector<double> scaled;
    scaled.reserve(kPairs);
    for (std::size_t i = 0; i < kPairs; ++i) {
        const Point a = sample();
        const Point b = sample();
        double g = 1.0;
        if (std_fraction > 0.0)
            g = std::min(truncated_normal(rng, 1.0, std_fraction), truncated_normal(rng, 1.0, std_fraction));
        scaled.push_back(euclid_dist(a, b) / g);
    }
    const double q = density / static_cast<double>(n - 1);
    const auto idx = std::min(kPairs - 1, static_cast<std::size_t>(q * static_cast<double>(kPairs)));
    std::nth_element(scaled.begin(), scaled.begin() + static_cast<std::ptrdiff_t>(idx), scaled.end());
    return std::min(scaled[idx], disk_radius);
}

// ---------------------------------------------------------------------------
// Queries

std::vector<int> bfs_all(const Topology& t, NodeId src) {
    std::vector<int> dist(t.size(), -1);
    if (src >= t.size())
        throw LookupError("unknown node id " + std::to_string(src));
    std::vector<NodeId> frontier{src};
    dist[src] = 0;
    for (std::size_t head = 0; head < frontier.size(); ++head) {
        const NodeId u = frontier[head];
        for (NodeId v : t.neighbors(u))
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                frontier.push_back(v);
            }
    }
    return dist;
}

std::optional<int> bfs_hops(const Topology& t, NodeId src, NodeId dst) {
    if (dst >= t.size())
        throw LookupError("unknown node id " + std::to_string(dst));
    const int d = bfs_all(t, src)[dst];
    if (d < 0)
        return std::nullopt;
    return d;
}

std::vector<NodeId> k_neighborhood(const Topology& t, NodeId node, int k) {
    if (k < 1)
        throw std::invalid_argument("k_neighborhood: k must be at least 1");
    if (node >= t.size())
        throw LookupError("unknown node id " + std::to_string(node));
    std::vector<int> dist(t.size(), -1);
    std::vector<NodeId> frontier{node};
    dist[node] = 0;
    std::vector<NodeId> out;
    for (std::size_t head = 0; head < frontier.size(); ++head) {
        const NodeId u = frontier[head];
        if (dist[u] == k)
            continue;
        for (NodeId v : t.neighbors(u))
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                frontier.push_back(v);
                out.push_back(v);
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("topology: bad number '" + std::string(s) + "'");
    return v;
}

std::string_view field_value(std::string_view token, std::string_view key) {
    if (token.substr(0, key.size()) != key || token.size() <= key.size() || token[key.size()] != '=')
        throw std::invalid_argument("topology: expected field '" + std::string(key) + "'");
    return token.substr(key.size() + 1);
}

} // namespace

void write_topology(std::ostream& os, const Topology& t) {
    os << "nodes=" << t.size() << " model=" << to_string(t.model()) << " disk_radius=" << format_double(t.disk_radius())
       << '\n';
    for (NodeId u = 0; u < t.size(); ++u) {
        const Point p = t.position(u);
        os << u << ' ' << format_double(p.x) << ' ' << format_double(p.y) << '\n';
    }
    for (NodeId u = 0; u < t.size(); ++u)
        for (NodeId v : t.neighbors(u))
            if (u < v)
                os << u << ' ' << v << '\n';
}

Topology read_topology(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("topology: missing header");
    std::istringstream header(line);
    std::string nodes_tok, model_tok, radius_tok;
    header >> nodes_tok >> model_tok >> radius_tok;
    const auto n_str = field_value(nodes_tok, "nodes");
    std::size_t n = 0;
    if (std::from_chars(n_str.data(), n_str.data() + n_str.size(), n).ec != std::errc{})
        throw std::invalid_argument("topology: bad node count");
    const GraphModel model = parse_graph_model(std::string(field_value(model_tok, "model")));
    const double radius = parse_double(field_value(radius_tok, "disk_radius"));

    std::vector<Point> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(is, line))
            throw std::invalid_argument("topology: truncated node list");
        std::istringstream ls(line);
        std::size_t id = 0;
        std::string xs, ys;
        if (!(ls >> id >> xs >> ys) || id != i)
            throw std::invalid_argument("topology: malformed node line '" + line + "'");
        pts[i] = Point{parse_double(xs), parse_double(ys)};
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        NodeId u = 0, v = 0;
        if (!(ls >> u >> v) || u >= v)
            throw std::invalid_argument("topology: malformed edge line '" + line + "'");
        edges.emplace_back(u, v);
    }
    return Topology::from_edges(std::move(pts), edges, radius, model);
}

} // namespace georoute
