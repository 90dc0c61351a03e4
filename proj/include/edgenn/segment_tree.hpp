#pragma once

// Edge-kNN index: a three-way AABB tree over tile-contained SubSegments with
// an insertion buffer (scanned linearly, flushed by a full rebuild) and a
// deletion set (filtered at query time, dropped at rebuild).
//
// Single writer, multiple readers: knn() is const and keeps no scratch state
// in the tree, so concurrent queries are fine; insert/remove/rebuild need
// exclusive access.

#include <cstdint>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "edgenn/cyclic_kernel.hpp"

namespace edgenn {

struct TreeParams {
    std::size_t n_leaf_thresh = 8;
    std::size_t n_buff = 64;
    double n_leaf_ratio = 0.9;  ///< in (0.5, 1]
    double epsilon = 0.0;       ///< (1+epsilon)-approximate queries

    void validate() const;
};

struct Neighbor {
    EdgeId edge_id = 0;
    CPoint point;        ///< closest point on the edge
    double param = 0.0;  ///< along the parent edge, in [0, 1]
    double distance = 0.0;
};

/// Work counters for one knn() call.
struct QueryCost {
    std::size_t nodes_visited = 0;
    std::size_t box_evals = 0;
    std::size_t distance_evals = 0;
};

struct TreeStats {
    std::size_t node_count = 0;
    std::size_t depth = 0;  ///< root-only tree has depth 0
    std::vector<std::size_t> leaf_sizes;
    std::size_t ratio_stopped_leaves = 0;
    std::size_t stored_pieces = 0;    ///< pieces inside the built tree (dead or alive)
    std::size_t buffered_pieces = 0;  ///< pieces waiting in the insert buffer
    std::size_t buffered_edges = 0;
    std::size_t pending_deletes = 0;  ///< removed edges whose pieces are still in the tree
    std::size_t live_edges = 0;
    std::size_t rebuilds = 0;

    friend bool operator==(const TreeStats&, const TreeStats&) = default;
};

class SegmentTree {
public:
    /// Node of the built tree. Exposed read-only for structural audits.
    struct Node {
        Aabb box;
        std::array<std::int32_t, 3> children{-1, -1, -1};  ///< below, above, straddling
        std::uint32_t begin = 0;  ///< leaf item range into item_order()
        std::uint32_t end = 0;
        std::int32_t split_dim = -1;
        double split_value = 0.0;
        bool leaf = true;
        bool ratio_stop = false;
    };

    SegmentTree(SpaceSignature sig, TreeParams params);

    static SegmentTree build(const SpaceSignature& sig, const std::vector<std::pair<EdgeId, CSegment>>& segments,
                             TreeParams params);

    /// Adds an edge to the insert buffer; a full buffer triggers rebuild().
    /// Throws InvalidInput when edge_id is live.
    void insert(EdgeId edge_id, const CSegment& segment);

    /// Throws InvalidInput when edge_id is not live.
    void remove(EdgeId edge_id);

    /// Up to k distinct edges, nearest first, ties by smaller edge id.
    [[nodiscard]] std::vector<Neighbor> knn(const CPoint& p, std::size_t k, QueryCost* cost = nullptr) const;

    void rebuild();

    [[nodiscard]] TreeStats stats() const;

    [[nodiscard]] bool contains(EdgeId edge_id) const { return live_.contains(edge_id); }
    [[nodiscard]] std::size_t live_edges() const noexcept { return live_.size(); }
    [[nodiscard]] const SpaceSignature& signature() const noexcept { return sig_; }
    [[nodiscard]] const TreeParams& params() const noexcept { return params_; }

    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<std::uint32_t>& item_order() const noexcept { return order_; }
    [[nodiscard]] const SubSegment& piece(std::uint32_t index) const { return pieces_[index].seg; }

private:
    struct Piece {
        SubSegment seg;
        Aabb box;
        std::uint32_t slot;
    };
    struct Slot {
        EdgeId id;
        bool dead = false;
        bool buffered = false;
    };

    std::uint32_t add_slot(EdgeId edge_id);
    void build_from(std::vector<Piece> pieces);
    std::int32_t build_node(std::uint32_t begin, std::uint32_t end, std::size_t depth, bool force_leaf);

    SpaceSignature sig_;
    TreeParams params_;

    std::vector<Slot> slots_;
    std::unordered_map<EdgeId, std::uint32_t> live_;

    std::vector<Piece> pieces_;  ///< built tree
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::size_t depth_ = 0;

    std::vector<Piece> buffer_;
    std::size_t buffered_edges_ = 0;
    std::size_t pending_deletes_ = 0;
    std::size_t rebuilds_ = 0;
};

}  // namespace edgenn
