#include "edgenn/segment_tree.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "edgenn/error.hpp"

namespace edgenn {

namespace {

double parent_param(const SubSegment& s, double local) noexcept {
    if (local <= 0.0) return s.t0;
    if (local >= 1.0) return s.t1;
    return s.t0 + local * (s.t1 - s.t0);
}

struct Candidate {
    double distance;
    EdgeId edge_id;
    std::uint32_t slot;
    CPoint point;
    double param;
};

bool ranks_before(const Candidate& x, const Candidate& y) noexcept {
    return x.distance < y.distance || (x.distance == y.distance && x.edge_id < y.edge_id);
}

// Best candidate per edge, at most k edges, kept sorted.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) { items_.reserve(k + 1); }

    [[nodiscard]] double bound() const noexcept {
        return items_.size() < k_ ? std::numeric_limits<double>::infinity() : items_.back().distance;
    }

    void offer(Candidate c) {
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (items_[i].slot != c.slot) continue;
            if (c.distance < items_[i].distance) {
                items_[i] = std::move(c);
                bubble_up(i);
            }
            return;
        }
        if (items_.size() < k_) {
            items_.push_back(std::move(c));
            bubble_up(items_.size() - 1);
        } else if (ranks_before(c, items_.back())) {
            items_.back() = std::move(c);
            bubble_up(items_.size() - 1);
        }
    }

    std::vector<Candidate>& items() noexcept { return items_; }

private:
    void bubble_up(std::size_t i) {
        while (i > 0 && ranks_before(items_[i], items_[i - 1])) {
            std::swap(items_[i], items_[i - 1]);
            --i;
        }
    }

    std::size_t k_;
    std::vector<Candidate> items_;
};

}  // namespace

void TreeParams::validate() const {
    if (n_leaf_thresh == 0) throw InvalidInput("TreeParams: n_leaf_thresh must be positive");
    if (n_buff == 0) throw InvalidInput("TreeParams: n_buff must be positive");
    if (!(n_leaf_ratio > 0.5 && n_leaf_ratio <= 1.0)) throw InvalidInput("TreeParams: n_leaf_ratio must lie in (0.5, 1]");
    if (!(epsilon >= 0.0)) throw InvalidInput("TreeParams: epsilon must be >= 0");
}

SegmentTree::SegmentTree(SpaceSignature sig, TreeParams params) : sig_(std::move(sig)), params_(params) {
    sig_.validate();
    params_.validate();
    build_from({});
}

SegmentTree SegmentTree::build(const SpaceSignature& sig, const std::vector<std::pair<EdgeId, CSegment>>& segments,
                               TreeParams params) {
    SegmentTree tree(sig, params);
    std::vector<Piece> pieces;
    for (const auto& [id, seg] : segments) {
        if (tree.live_.contains(id)) throw InvalidInput("SegmentTree::build: duplicate edge id " + std::to_string(id));
        const std::uint32_t slot = tree.add_slot(id);
        CSegment tagged = seg;
        tagged.edge_id = id;
        for (SubSegment& s : split_segment(sig, tagged)) {
            const Aabb box = Aabb::of(s);
            pieces.push_back({std::move(s), box, slot});
        }
    }
    tree.build_from(std::move(pieces));
    return tree;
}

std::uint32_t SegmentTree::add_slot(EdgeId edge_id) {
    const auto slot = static_cast<std::uint32_t>(slots_.size());
    slots_.push_back({edge_id});
    live_.emplace(edge_id, slot);
    return slot;
}

void SegmentTree::insert(EdgeId edge_id, const CSegment& segment) {
    if (live_.contains(edge_id)) throw InvalidInput("SegmentTree::insert: edge " + std::to_string(edge_id) + " already stored");
    if (segment.origin.size() != sig_.dim()) throw InvalidInput("SegmentTree::insert: dimension mismatch");
    const std::uint32_t slot = add_slot(edge_id);
    slots_[slot].buffered = true;
    CSegment tagged = segment;
    tagged.edge_id = edge_id;
    for (SubSegment& s : split_segment(sig_, tagged)) {
        const Aabb box = Aabb::of(s);
        buffer_.push_back({std::move(s), box, slot});
    }
    if (++buffered_edges_ >= params_.n_buff) rebuild();
}

void SegmentTree::remove(EdgeId edge_id) {
    const auto it = live_.find(edge_id);
    if (it == live_.end()) throw InvalidInput("SegmentTree::remove: unknown edge " + std::to_string(edge_id));
    const std::uint32_t slot = it->second;
    live_.erase(it);
    slots_[slot].dead = true;
    if (slots_[slot].buffered) {
        std::erase_if(buffer_, [slot](const Piece& p) { return p.slot == slot; });
        --buffered_edges_;
    } else {
        ++pending_deletes_;
    }
}

void SegmentTree::rebuild() {
    if (buffer_.empty() && buffered_edges_ == 0 && pending_deletes_ == 0) return;

    std::vector<Piece> pieces;
    pieces.reserve(pieces_.size() + buffer_.size());
    for (Piece& p : pieces_)
        if (!slots_[p.slot].dead) pieces.push_back(std::move(p));
    for (Piece& p : buffer_) pieces.push_back(std::move(p));

    // Compact the slot table so dead edges do not accumulate across rebuilds.
    std::vector<Slot> old_slots = std::move(slots_);
    std::vector<std::uint32_t> remap(old_slots.size(), std::numeric_limits<std::uint32_t>::max());
    slots_.clear();
    live_.clear();
    for (Piece& p : pieces) {
        if (remap[p.slot] == std::numeric_limits<std::uint32_t>::max()) remap[p.slot] = add_slot(old_slots[p.slot].id);
        p.slot = remap[p.slot];
    }

    buffer_.clear();
    buffered_edges_ = 0;
    pending_deletes_ = 0;
    ++rebuilds_;
    build_from(std::move(pieces));
}

void SegmentTree::build_from(std::vector<Piece> pieces) {
    pieces_ = std::move(pieces);
    order_.resize(pieces_.size());
    for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
    nodes_.clear();
    depth_ = 0;
    build_node(0, static_cast<std::uint32_t>(order_.size()), 0, false);
}

std::int32_t SegmentTree::build_node(std::uint32_t begin, std::uint32_t end, std::size_t depth, bool force_leaf) {
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    depth_ = std::max(depth_, depth);

    Aabb box = Aabb::empty(sig_.dim());
    for (std::uint32_t i = begin; i < end; ++i) box.expand(pieces_[order_[i]].box);
    nodes_[index].box = box;
    nodes_[index].begin = begin;
    nodes_[index].end = end;
    nodes_[index].ratio_stop = force_leaf;

    const std::size_t count = end - begin;
    if (force_leaf || count <= params_.n_leaf_thresh) return index;

    std::size_t dim = 0;
    for (std::size_t i = 1; i < sig_.dim(); ++i)
        if (box.extent(i) > box.extent(dim)) dim = i;

    std::vector<double> centers;
    centers.reserve(count);
    for (std::uint32_t i = begin; i < end; ++i) {
        const Aabb& b = pieces_[order_[i]].box;
        centers.push_back(0.5 * (b.lo[dim] + b.hi[dim]));
    }
    auto mid = centers.begin() + static_cast<std::ptrdiff_t>(count / 2);
    std::nth_element(centers.begin(), mid, centers.end());
    const double split = *mid;

    auto first = order_.begin() + begin;
    auto last = order_.begin() + end;
    auto below_end = std::stable_partition(first, last, [&](std::uint32_t i) { return pieces_[i].box.hi[dim] < split; });
    auto above_end = std::stable_partition(below_end, last, [&](std::uint32_t i) { return pieces_[i].box.lo[dim] > split; });

    const std::array<std::pair<std::uint32_t, std::uint32_t>, 3> ranges{{
        {begin, static_cast<std::uint32_t>(below_end - order_.begin())},
        {static_cast<std::uint32_t>(below_end - order_.begin()), static_cast<std::uint32_t>(above_end - order_.begin())},
        {static_cast<std::uint32_t>(above_end - order_.begin()), end},
    }};

    nodes_[index].leaf = false;
    nodes_[index].split_dim = static_cast<std::int32_t>(dim);
    nodes_[index].split_value = split;
    for (std::size_t c = 0; c < 3; ++c) {
        const auto [lo, hi] = ranges[c];
        const std::size_t n = hi - lo;
        if (n == 0) continue;
        // A child that barely shrinks becomes a leaf; n == count also covers
        // n_leaf_ratio == 1, where the ratio test alone would never stop.
        const bool stop = static_cast<double>(n) > params_.n_leaf_ratio * static_cast<double>(count) || n == count;
        const std::int32_t child = build_node(lo, hi, depth + 1, stop);
        nodes_[index].children[c] = child;
    }
    return index;
}

std::vector<Neighbor> SegmentTree::knn(const CPoint& p, std::size_t k, QueryCost* cost) const {
    if (k == 0) throw InvalidInput("SegmentTree::knn: k must be positive");
    if (p.size() != sig_.dim()) throw InvalidInput("SegmentTree::knn: dimension mismatch");

    QueryCost local;
    TopK top(k);
    const double shrink = 1.0 + params_.epsilon;

    auto consider = [&](const Piece& piece) {
        if (slots_[piece.slot].dead) return;
        ++local.distance_evals;
        const Hit hit = dist_point_subsegment(sig_, p, piece.seg);
        if (hit.distance > top.bound()) return;
        top.offer({hit.distance, slots_[piece.slot].id, piece.slot, hit.point, parent_param(piece.seg, hit.param)});
    };

    for (const Piece& piece : buffer_) consider(piece);

    using Entry = std::pair<double, std::int32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    if (!pieces_.empty()) {
        ++local.box_evals;
        open.emplace(dist_point_aabb(sig_, p, nodes_[0].box), 0);
    }
    while (!open.empty()) {
        const auto [box_dist, index] = open.top();
        open.pop();
        if (box_dist * shrink > top.bound()) break;
        ++local.nodes_visited;
        const Node& node = nodes_[static_cast<std::size_t>(index)];
        if (node.leaf) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) consider(pieces_[order_[i]]);
            continue;
        }
        for (std::int32_t child : node.children) {
            if (child < 0) continue;
            ++local.box_evals;
            const double d = dist_point_aabb(sig_, p, nodes_[static_cast<std::size_t>(child)].box);
            if (d * shrink <= top.bound()) open.emplace(d, child);
        }
    }

    std::vector<Neighbor> out;
    out.reserve(top.items().size());
    for (Candidate& c : top.items()) out.push_back({c.edge_id, std::move(c.point), c.param, c.distance});
    if (cost) *cost = local;
    return out;
}

TreeStats SegmentTree::stats() const {
    TreeStats s;
    s.node_count = nodes_.size();
    s.depth = depth_;
    for (const Node& n : nodes_) {
        if (!n.leaf) continue;
        s.leaf_sizes.push_back(n.end - n.begin);
        if (n.ratio_stop) ++s.ratio_stopped_leaves;
    }
    s.stored_pieces = pieces_.size();
    s.buffered_pieces = buffer_.size();
    s.buffered_edges = buffered_edges_;
    s.pending_deletes = pending_deletes_;
    s.live_edges = live_.size();
    s.rebuilds = rebuilds_;
    return s;
}

}  // namespace edgenn
