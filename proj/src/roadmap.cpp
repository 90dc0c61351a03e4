#include "edgenn/roadmap.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "edgenn/error.hpp"
#include "edgenn/format.hpp"

namespace edgenn {

namespace {

// Isolated vertices live in the edge index as zero-length entries under
// ids with the top bit set, so a single tree query covers the whole swath.
constexpr EdgeId kVertexTag = EdgeId{1} << 63;

std::pair<VertexId, VertexId> key(VertexId u, VertexId v) { return {std::min(u, v), std::max(u, v)}; }

bool result_before(const NeighborResult& a, const NeighborResult& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.kind != b.kind) return a.kind == NeighborResult::Kind::vertex;
    return a.kind == NeighborResult::Kind::vertex ? a.vertex < b.vertex : a.edge < b.edge;
}

}  // namespace

std::string_view to_string(NfMode mode) noexcept { return mode == NfMode::vertexNN ? "vertexNN" : "edgeNN"; }

NfMode parse_nf_mode(std::string_view text) {
    if (text == "vertexNN" || text == "vertex") return NfMode::vertexNN;
    if (text == "edgeNN" || text == "edge") return NfMode::edgeNN;
    throw InvalidInput("unknown neighborhood finder '" + std::string(text) + "' (expected vertexNN or edgeNN)");
}

std::string_view to_string(EdgeTag tag) noexcept { return tag == EdgeTag::tree ? "tree" : "web"; }

Roadmap::Roadmap(SpaceSignature sig, NfMode mode, TreeParams tree_params) : sig_(std::move(sig)), mode_(mode) {
    sig_.validate();
    if (mode_ == NfMode::edgeNN) tree_.emplace(sig_, tree_params);
}

VertexId Roadmap::add_vertex(const CPoint& p) {
    const VertexId id = vertices_.size();
    vertices_.push_back(normalize(sig_, p.coords));
    adjacency_.emplace_back();
    index_isolated(id);
    return id;
}

void Roadmap::index_isolated(VertexId id) {
    if (!tree_) return;
    tree_->insert(kVertexTag | id, CSegment{vertices_[id], VecD(sig_.dim()), std::nullopt});
}

void Roadmap::unindex_isolated(VertexId id) {
    if (tree_ && tree_->contains(kVertexTag | id)) tree_->remove(kVertexTag | id);
}

void Roadmap::check_vertex(VertexId id, const char* where) const {
    if (id >= vertices_.size()) throw InvalidInput(std::string(where) + ": unknown vertex " + std::to_string(id));
}

EdgeId Roadmap::add_edge(VertexId u, VertexId v, EdgeTag tag) {
    check_vertex(u, "add_edge");
    check_vertex(v, "add_edge");
    if (u == v) throw InvalidInput("add_edge: self-loop on vertex " + std::to_string(u));
    if (pairs_.contains(key(u, v)))
        throw InvalidInput("add_edge: duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
    return attach_edge(u, v, geodesic(sig_, vertices_[u], vertices_[v]), tag);
}

EdgeId Roadmap::attach_edge(VertexId u, VertexId v, CSegment segment, EdgeTag tag) {
    unindex_isolated(u);
    unindex_isolated(v);
    const EdgeId id = edges_.size();
    segment.edge_id = id;
    const double length = segment.length();
    if (tree_) tree_->insert(id, segment);
    edges_.push_back({u, v, std::move(segment), length, tag, true});
    adjacency_[u].push_back(id);
    adjacency_[v].push_back(id);
    pairs_.insert(key(u, v));
    ++live_edges_;
    return id;
}

SplitResult Roadmap::split_edge_at(EdgeId id, double param) {
    if (id >= edges_.size() || !edges_[id].alive) throw InvalidInput("split_edge_at: edge " + std::to_string(id) + " is not live");
    if (!(param > 0.0 && param < 1.0)) throw InvalidInput("split_edge_at: param must lie strictly inside (0,1)");

    const RoadmapEdge parent = edges_[id];
    edges_[id].alive = false;
    --live_edges_;
    pairs_.erase(key(parent.u, parent.v));
    std::erase(adjacency_[parent.u], id);
    std::erase(adjacency_[parent.v], id);
    if (tree_) tree_->remove(id);

    // Child geometry comes from the parent's displacement, not from a fresh
    // geodesic, so repeated splits cannot drift off the original line.
    const VertexId w = vertices_.size();
    vertices_.push_back(point_at(sig_, parent.segment, param));
    adjacency_.emplace_back();
    index_isolated(w);
    const EdgeId first = attach_edge(parent.u, w, CSegment{parent.segment.origin, parent.segment.disp * param, std::nullopt}, parent.tag);
    const EdgeId second = attach_edge(w, parent.v, CSegment{vertices_[w], parent.segment.disp * (1.0 - param), std::nullopt}, parent.tag);
    return {w, first, second};
}

std::vector<NeighborResult> Roadmap::nearest(const CPoint& p, std::size_t k) const {
    if (vertices_.empty()) throw InvalidInput("nearest: roadmap is empty");
    if (k == 0) throw InvalidInput("nearest: k must be positive");
    if (p.size() != sig_.dim()) throw InvalidInput("nearest: dimension mismatch");
    return mode_ == NfMode::vertexNN ? nearest_vertices(p, k) : nearest_swath(p, k);
}

std::vector<NeighborResult> Roadmap::nearest_vertices(const CPoint& p, std::size_t k) const {
    std::vector<NeighborResult> all;
    all.reserve(vertices_.size());
    for (VertexId id = 0; id < vertices_.size(); ++id) {
        NeighborResult r;
        r.vertex = id;
        r.point = vertices_[id];
        r.distance = dist_point_point(sig_, p, vertices_[id]);
        all.push_back(std::move(r));
    }
    const std::size_t n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), result_before);
    all.resize(n);
    return all;
}

std::vector<NeighborResult> Roadmap::nearest_swath(const CPoint& p, std::size_t k) const {
    // Several edges can collapse onto one shared endpoint, so ask for more
    // until k distinct results appear or the index is exhausted.
    std::size_t ask = k;
    for (;;) {
        std::vector<NeighborResult> out;
        std::unordered_set<VertexId> seen;
        const auto hits = tree_->knn(p, ask);
        for (const Neighbor& nb : hits) {
            NeighborResult r;
            std::optional<VertexId> vertex;
            if (nb.edge_id & kVertexTag) {
                vertex = nb.edge_id & ~kVertexTag;
            } else {
                const RoadmapEdge& e = edges_[nb.edge_id];
                if (nb.param <= kSnapTolerance) vertex = e.u;
                else if (nb.param >= 1.0 - kSnapTolerance) vertex = e.v;
            }
            if (vertex) {
                if (!seen.insert(*vertex).second) continue;
                r.vertex = *vertex;
                r.point = vertices_[*vertex];
                r.distance = dist_point_point(sig_, p, r.point);
            } else {
                r.kind = NeighborResult::Kind::edge_interior;
                r.edge = nb.edge_id;
                r.param = nb.param;
                r.point = nb.point;
                r.distance = nb.distance;
            }
            out.push_back(std::move(r));
        }
        if (out.size() >= k || hits.size() < ask) {
            std::stable_sort(out.begin(), out.end(), result_before);
            if (out.size() > k) out.resize(k);
            return out;
        }
        ask *= 2;
    }
}

std::optional<std::vector<VertexId>> Roadmap::sssp(VertexId source, VertexId target) const {
    check_vertex(source, "sssp");
    check_vertex(target, "sssp");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(vertices_.size(), inf);
    std::vector<VertexId> prev(vertices_.size(), std::numeric_limits<VertexId>::max());
    using Entry = std::pair<double, VertexId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    dist[source] = 0.0;
    open.emplace(0.0, source);
    while (!open.empty()) {
        const auto [d, u] = open.top();
        open.pop();
        if (d > dist[u]) continue;
        if (u == target) break;
        for (EdgeId e : adjacency_[u]) {
            const RoadmapEdge& edge = edges_[e];
            const VertexId w = edge.u == u ? edge.v : edge.u;
            const double nd = d + edge.length;
            if (nd < dist[w]) {
                dist[w] = nd;
                prev[w] = u;
                open.emplace(nd, w);
            }
        }
    }
    if (dist[target] == inf) return std::nullopt;
    std::vector<VertexId> path{target};
    while (path.back() != source) path.push_back(prev[path.back()]);
    std::reverse(path.begin(), path.end());
    return path;
}

const CPoint& Roadmap::vertex(VertexId id) const {
    check_vertex(id, "vertex");
    return vertices_[id];
}

const RoadmapEdge& Roadmap::edge(EdgeId id) const {
    if (id >= edges_.size()) throw InvalidInput("edge: unknown edge " + std::to_string(id));
    return edges_[id];
}

std::vector<EdgeId> Roadmap::live_edges() const {
    std::vector<EdgeId> out;
    out.reserve(live_edges_);
    for (EdgeId id = 0; id < edges_.size(); ++id)
        if (edges_[id].alive) out.push_back(id);
    return out;
}

const std::vector<EdgeId>& Roadmap::incident(VertexId id) const {
    check_vertex(id, "incident");
    return adjacency_[id];
}

bool Roadmap::has_edge(VertexId u, VertexId v) const { return pairs_.contains(key(u, v)); }

double Roadmap::total_length() const {
    double sum = 0.0;
    for (const RoadmapEdge& e : edges_)
        if (e.alive) sum += e.length;
    return sum;
}

std::size_t Roadmap::count_edges(EdgeTag tag) const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [tag](const RoadmapEdge& e) { return e.alive && e.tag == tag; }));
}

double Roadmap::path_length(const std::vector<VertexId>& path) const {
    double sum = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        check_vertex(path[i - 1], "path_length");
        double best = std::numeric_limits<double>::infinity();
        for (EdgeId e : adjacency_[path[i - 1]]) {
            const RoadmapEdge& edge = edges_[e];
            if (edge.u == path[i] || edge.v == path[i]) best = std::min(best, edge.length);
        }
        if (best == std::numeric_limits<double>::infinity())
            throw InvalidInput("path_length: vertices " + std::to_string(path[i - 1]) + " and " + std::to_string(path[i]) +
                               " are not adjacent");
        sum += best;
    }
    return sum;
}

// Format:
//   roadmap v1
//   signature <t> <r>
//   bounds <lo_0> <hi_0> ... <lo_{t-1}> <hi_{t-1}>
//   nf <vertexNN|edgeNN>
//   vertices <n>
//   v <coords...>            (n lines, ids 0..n-1)
//   edges <m>
//   e <u> <v> <tree|web> <disp...>
void Roadmap::write(std::ostream& out) const {
    out << "roadmap v1\n";
    out << "signature " << sig_.t << ' ' << sig_.r << '\n';
    out << "bounds";
    for (int i = 0; i < sig_.t; ++i) out << ' ' << format_double(sig_.trans_lo[i]) << ' ' << format_double(sig_.trans_hi[i]);
    out << '\n';
    out << "nf " << to_string(mode_) << '\n';
    out << "vertices " << vertices_.size() << '\n';
    for (const CPoint& p : vertices_) {
        out << 'v';
        for (double x : p.coords) out << ' ' << format_double(x);
        out << '\n';
    }
    out << "edges " << live_edges_ << '\n';
    for (const RoadmapEdge& e : edges_) {
        if (!e.alive) continue;
        out << "e " << e.u << ' ' << e.v << ' ' << to_string(e.tag);
        for (double x : e.segment.disp) out << ' ' << format_double(x);
        out << '\n';
    }
}

Roadmap Roadmap::read(std::istream& in, std::optional<NfMode> mode, TreeParams tree_params) {
    std::size_t line_no = 0;
    std::vector<std::string> tok;
    auto where = [&] { return "line " + std::to_string(line_no); };
    auto next = [&](std::string_view head, std::size_t min_tokens) {
        std::string line;
        do {
            if (!std::getline(in, line)) throw ParseError(where(), "unexpected end of input, expected '" + std::string(head) + "'");
            ++line_no;
        } while (line.empty());
        std::istringstream ss(line);
        tok.clear();
        for (std::string t; ss >> t;) tok.push_back(t);
        if (tok.empty() || tok[0] != head) throw ParseError(where(), "expected '" + std::string(head) + "'");
        if (tok.size() < min_tokens) throw ParseError(where(), "too few fields");
    };

    next("roadmap", 2);
    if (tok[1] != "v1") throw ParseError(where(), "unsupported version '" + tok[1] + "'");
    next("signature", 3);
    const int t = parse_int<int>(tok[1], where());
    const int r = parse_int<int>(tok[2], where());
    if (t < 0 || r < 0 || t + r < 1 || t + r > static_cast<int>(kMaxDim)) throw ParseError(where(), "bad signature");
    next("bounds", 1);
    if (tok.size() != 1 + 2 * static_cast<std::size_t>(t)) throw ParseError(where(), "expected 2t bound values");
    VecD lo(static_cast<std::size_t>(t)), hi(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
        lo[i] = parse_double(tok[1 + 2 * i], where());
        hi[i] = parse_double(tok[2 + 2 * i], where());
    }
    SpaceSignature sig{t, r, lo, hi};
    try {
        sig.validate();
    } catch (const InvalidInput& e) {
        throw ParseError(where(), e.what());
    }
    next("nf", 2);
    NfMode stored;
    try {
        stored = parse_nf_mode(tok[1]);
    } catch (const InvalidInput& e) {
        throw ParseError(where(), e.what());
    }
    Roadmap map(sig, mode.value_or(stored), tree_params);
    const std::size_t d = sig.dim();

    next("vertices", 2);
    const auto n = parse_int<std::size_t>(tok[1], where());
    for (std::size_t i = 0; i < n; ++i) {
        next("v", 1 + d);
        if (tok.size() != 1 + d) throw ParseError(where(), "expected " + std::to_string(d) + " coordinates");
        VecD c(d);
        for (std::size_t j = 0; j < d; ++j) c[j] = parse_double(tok[1 + j], where());
        try {
            map.add_vertex(normalize(sig, c));
        } catch (const InvalidInput& e) {
            throw ParseError(where(), e.what());
        }
    }

    next("edges", 2);
    const auto m = parse_int<std::size_t>(tok[1], where());
    for (std::size_t i = 0; i < m; ++i) {
        next("e", 4 + d);
        if (tok.size() != 4 + d) throw ParseError(where(), "expected u v tag and " + std::to_string(d) + " displacement values");
        const auto u = parse_int<VertexId>(tok[1], where());
        const auto v = parse_int<VertexId>(tok[2], where());
        EdgeTag tag;
        if (tok[3] == "tree") tag = EdgeTag::tree;
        else if (tok[3] == "web") tag = EdgeTag::web;
        else throw ParseError(where(), "unknown edge tag '" + tok[3] + "'");
        VecD disp(d);
        for (std::size_t j = 0; j < d; ++j) disp[j] = parse_double(tok[4 + j], where());
        if (u >= n || v >= n) throw ParseError(where(), "edge endpoint out of range");
        if (u == v) throw ParseError(where(), "self-loop");
        if (map.has_edge(u, v)) throw ParseError(where(), "duplicate edge");
        CSegment seg{map.vertices_[u], disp, std::nullopt};
        if (dist_point_point(sig, point_at(sig, seg, 1.0), map.vertices_[v]) > 1e-9)
            throw ParseError(where(), "displacement does not reach vertex " + std::to_string(v));
        map.attach_edge(u, v, std::move(seg), tag);
    }
    return map;
}

}  // namespace edgenn
