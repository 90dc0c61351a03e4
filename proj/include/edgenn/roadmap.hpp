#pragma once

// Configuration-space graph with splittable edges and two neighborhood
// finders: a linear vertex scan, or edge kNN over the swath via SegmentTree.

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "edgenn/cyclic_kernel.hpp"
#include "edgenn/segment_tree.hpp"

namespace edgenn {

using VertexId = std::uint64_t;

enum class NfMode { vertexNN, edgeNN };

std::string_view to_string(NfMode mode) noexcept;
/// Accepts "vertexNN" / "edgeNN" (also "vertex" / "edge"). Throws InvalidInput.
NfMode parse_nf_mode(std::string_view text);

/// Provenance of an edge; split children inherit their parent's tag.
enum class EdgeTag { tree, web };

std::string_view to_string(EdgeTag tag) noexcept;

struct RoadmapEdge {
    VertexId u = 0;
    VertexId v = 0;
    CSegment segment;  ///< geodesic from u to v
    double length = 0.0;
    EdgeTag tag = EdgeTag::tree;
    bool alive = true;
};

struct NeighborResult {
    enum class Kind { vertex, edge_interior };
    Kind kind = Kind::vertex;
    VertexId vertex = 0;  ///< valid when kind == vertex
    EdgeId edge = 0;      ///< valid when kind == edge_interior
    double param = 0.0;   ///< in (0,1) for edge_interior
    CPoint point;
    double distance = 0.0;
};

struct SplitResult {
    VertexId vertex;
    EdgeId first;   ///< u -> new vertex
    EdgeId second;  ///< new vertex -> v
};

class Roadmap {
public:
    /// Results of nearest() with param closer than this to 0 or 1 snap to the endpoint.
    static constexpr double kSnapTolerance = 1e-9;

    Roadmap(SpaceSignature sig, NfMode mode, TreeParams tree_params = {});

    VertexId add_vertex(const CPoint& p);
    EdgeId add_edge(VertexId u, VertexId v, EdgeTag tag = EdgeTag::tree);

    /// Up to k distinct results, nearest first. Throws InvalidInput when empty.
    [[nodiscard]] std::vector<NeighborResult> nearest(const CPoint& p, std::size_t k) const;

    /// Splits a live edge at a strictly interior parameter.
    SplitResult split_edge_at(EdgeId edge, double param);

    /// Minimum-length path, or nullopt when disconnected.
    [[nodiscard]] std::optional<std::vector<VertexId>> sssp(VertexId source, VertexId target) const;

    [[nodiscard]] const SpaceSignature& signature() const noexcept { return sig_; }
    [[nodiscard]] NfMode mode() const noexcept { return mode_; }
    [[nodiscard]] std::size_t vertex_count() const noexcept { return vertices_.size(); }
    [[nodiscard]] std::size_t live_edge_count() const noexcept { return live_edges_; }
    [[nodiscard]] const CPoint& vertex(VertexId id) const;
    [[nodiscard]] const RoadmapEdge& edge(EdgeId id) const;
    /// All edge slots ever created, including dead ones; index == EdgeId.
    [[nodiscard]] const std::vector<RoadmapEdge>& edges() const noexcept { return edges_; }
    [[nodiscard]] std::vector<EdgeId> live_edges() const;
    [[nodiscard]] const std::vector<EdgeId>& incident(VertexId id) const;
    [[nodiscard]] bool has_edge(VertexId u, VertexId v) const;
    [[nodiscard]] double total_length() const;
    [[nodiscard]] std::size_t count_edges(EdgeTag tag) const;
    /// Sum of edge lengths along a vertex path. Throws if consecutive vertices are not adjacent.
    [[nodiscard]] double path_length(const std::vector<VertexId>& path) const;
    /// Edge-NN index; nullptr in vertexNN mode.
    [[nodiscard]] const SegmentTree* index() const noexcept { return tree_ ? &*tree_ : nullptr; }

    /// Line-oriented text form, vertices then live edges. Edge ids are renumbered densely.
    void write(std::ostream& out) const;
    static Roadmap read(std::istream& in, std::optional<NfMode> mode = std::nullopt, TreeParams tree_params = {});

private:
    EdgeId attach_edge(VertexId u, VertexId v, CSegment segment, EdgeTag tag);
    void check_vertex(VertexId id, const char* where) const;
    void index_isolated(VertexId id);
    void unindex_isolated(VertexId id);
    [[nodiscard]] std::vector<NeighborResult> nearest_vertices(const CPoint& p, std::size_t k) const;
    [[nodiscard]] std::vector<NeighborResult> nearest_swath(const CPoint& p, std::size_t k) const;

    SpaceSignature sig_;
    NfMode mode_;
    std::vector<CPoint> vertices_;
    std::vector<std::vector<EdgeId>> adjacency_;  ///< live incident edges
    std::vector<RoadmapEdge> edges_;
    std::set<std::pair<VertexId, VertexId>> pairs_;
    std::size_t live_edges_ = 0;
    std::optional<SegmentTree> tree_;
};

}  // namespace edgenn
