#include "edgenn/planners.hpp"

#include <algorithm>
#include <cmath>

#include "edgenn/error.hpp"

namespace edgenn {

namespace {

constexpr EdgeId kVertexEntry = EdgeId{1} << 63;

ExtensionResult walk(const SpaceSignature& sig, const CPoint& from, const CPoint& toward, const PlannerParams& params,
                     ValidityChecker& checker, bool& from_valid);

std::size_t step_count(double length, double resolution) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / resolution)));
}

VertexId attach_point(Roadmap& map, const NeighborResult& nb) {
    return nb.kind == NeighborResult::Kind::vertex ? nb.vertex : map.split_edge_at(nb.edge, nb.param).vertex;
}

// Connects `from` (already on the roadmap as a point) to `goal` if the
// straight geodesic is valid. Returns the goal vertex on success.
std::optional<VertexId> try_goal_connection(Roadmap& map, const Scene& scene, const PlannerParams& params,
                                            ValidityChecker& checker) {
    const NeighborResult nb = map.nearest(scene.goal, 1).front();
    if (nb.distance > params.goal_connect_radius) return std::nullopt;
    if (nb.distance == 0.0) return attach_point(map, nb);
    if (!segment_valid(scene.signature, geodesic(scene.signature, nb.point, scene.goal), params.cd_resolution, checker))
        return std::nullopt;
    const VertexId anchor = attach_point(map, nb);
    const VertexId goal = map.add_vertex(scene.goal);
    map.add_edge(anchor, goal);
    return goal;
}

// Validated connections from v to its k nearest contact-set members.
void connect_contacts(Roadmap& map, VertexId v, const std::vector<VertexId>& contacts, const PlannerParams& params,
                      ValidityChecker& checker) {
    const SpaceSignature& sig = map.signature();
    std::vector<std::pair<double, VertexId>> ranked;
    ranked.reserve(contacts.size());
    for (VertexId c : contacts) ranked.emplace_back(dist_point_point(sig, map.vertex(v), map.vertex(c)), c);
    const std::size_t n = std::min(params.k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end());
    for (std::size_t i = 0; i < n; ++i) {
        const VertexId c = ranked[i].second;
        if (c == v || map.has_edge(v, c)) continue;
        if (segment_valid(sig, geodesic(sig, map.vertex(v), map.vertex(c)), params.cd_resolution, checker))
            map.add_edge(v, c, EdgeTag::web);
    }
}

PlanResult finish(Roadmap map, VertexId start, std::optional<VertexId> goal, std::size_t iterations,
                  const ValidityChecker& checker, PlanResult result) {
    result.iterations = iterations;
    result.cd_calls = checker.cd_calls();
    result.roadmap_length = map.total_length();
    result.start_vertex = start;
    result.goal_vertex = goal;
    if (goal) {
        if (auto path = map.sssp(start, *goal)) {
            result.success = true;
            result.path = std::move(*path);
        }
    }
    result.roadmap.emplace(std::move(map));
    return result;
}

PlanResult grow_tree(const Scene& scene, NfMode mode, const PlannerParams& params, bool cobweb) {
    params.validate();
    const SpaceSignature& sig = scene.signature;
    ValidityChecker checker(scene);
    if (!checker.is_valid(scene.start) || !checker.is_valid(scene.goal)) throw InvalidInput("planner: start or goal is invalid");

    Roadmap map(sig, mode, params.tree);
    Rng rng(params.seed);
    const VertexId start = map.add_vertex(scene.start);
    std::optional<VertexId> goal;
    std::vector<VertexId> contacts;
    PlanResult result;

    std::size_t it = 0;
    while (it < params.max_iterations && !(goal && params.stop_when_solved)) {
        ++it;
        // Draw every iteration so both modes see the same sample stream.
        CPoint sample = sample_uniform(sig, rng);
        if (params.goal_bias_period > 0 && it % params.goal_bias_period == 0) sample = scene.goal;

        const NeighborResult nb = map.nearest(sample, 1).front();
        IterationRecord rec{it, sample, nb.kind, nb.distance, 0.0, false};

        // A swath point between certified samples can, rarely, be invalid;
        // that counts as a failed extension.
        bool from_valid = true;
        const ExtensionResult ext = walk(sig, nb.point, sample, params, checker, from_valid);
        if (from_valid && ext.length > 0.0) {
            rec.extension_length = ext.length;
            rec.contact = ext.contact;
            const VertexId anchor = attach_point(map, nb);
            const VertexId v = map.add_vertex(ext.reached);
            map.add_edge(anchor, v, EdgeTag::tree);
            if (ext.contact) {
                ++result.contact_points;
                if (cobweb) {
                    connect_contacts(map, v, contacts, params, checker);
                    contacts.push_back(v);
                }
            }
            if (!goal) {
                if (ext.reached == scene.goal) goal = v;
                else if (dist_point_point(sig, ext.reached, scene.goal) <= params.goal_connect_radius)
                    goal = try_goal_connection(map, scene, params, checker);
            }
        }
        if (params.keep_log) result.log.push_back(std::move(rec));
    }
    return finish(std::move(map), start, goal, it, checker, std::move(result));
}

}  // namespace

CPoint sample_uniform(const SpaceSignature& sig, Rng& rng) {
    VecD v(sig.dim());
    for (std::size_t i = 0; i < sig.dim(); ++i) {
        const double u = rng.uniform();
        v[i] = sig.is_rotational(i) ? u : sig.trans_lo[i] + u * (sig.trans_hi[i] - sig.trans_lo[i]);
    }
    return normalize(sig, v);
}

void PlannerParams::validate() const {
    if (!(min_ext > 0.0 && min_ext <= max_ext) || !std::isfinite(max_ext))
        throw InvalidInput("PlannerParams: need 0 < min_ext <= max_ext");
    if (!(cd_resolution > 0.0) || !std::isfinite(cd_resolution)) throw InvalidInput("PlannerParams: cd_resolution must be positive");
    if (!(goal_connect_radius >= 0.0)) throw InvalidInput("PlannerParams: goal_connect_radius must be >= 0");
    if (k == 0) throw InvalidInput("PlannerParams: k must be positive");
    if (prm_batch_nodes == 0 || prm_batch_tries == 0) throw InvalidInput("PlannerParams: PRM batch sizes must be positive");
    tree.validate();
}

ExtensionResult extend(const SpaceSignature& sig, const CPoint& from, const CPoint& toward, const PlannerParams& params,
                       ValidityChecker& checker) {
    bool from_valid = true;
    ExtensionResult r = walk(sig, from, toward, params, checker, from_valid);
    if (!from_valid) throw InvalidInput("extend: start configuration is invalid");
    return r;
}

namespace {

ExtensionResult walk(const SpaceSignature& sig, const CPoint& from, const CPoint& toward, const PlannerParams& params,
                     ValidityChecker& checker, bool& from_valid) {
    ExtensionResult r;
    r.reached = from;
    ++r.cd_calls;
    from_valid = checker.is_valid(from);
    if (!from_valid) {
        r.truncated = true;
        return r;
    }

    const CSegment g = geodesic(sig, from, toward);
    const double full = g.length();
    if (full == 0.0) {
        r.truncated = true;
        return r;
    }
    const double limit = std::min(params.max_ext, full);
    const std::size_t n = step_count(limit, params.cd_resolution);
    const bool reaches_target = limit == full;

    std::size_t good = 0;
    CPoint last = from;
    bool collided = false;
    for (std::size_t i = 1; i <= n; ++i) {
        const CPoint q = (i == n && reaches_target) ? toward : point_at(sig, g, (limit * static_cast<double>(i) / static_cast<double>(n)) / full);
        ++r.cd_calls;
        if (!checker.is_valid(q)) {
            collided = true;
            break;
        }
        good = i;
        last = q;
    }
    const double length = limit * static_cast<double>(good) / static_cast<double>(n);
    r.contact = collided;
    r.truncated = collided || !reaches_target;
    if (length < params.min_ext) {
        r.truncated = true;
        return r;
    }
    r.reached = last;
    r.length = length;
    return r;
}

}  // namespace

bool segment_valid(const SpaceSignature& sig, const CSegment& seg, double resolution, ValidityChecker& checker) {
    const std::size_t n = step_count(seg.length(), resolution);
    for (std::size_t i = 1; i <= n; ++i)
        if (!checker.is_valid(point_at(sig, seg, static_cast<double>(i) / static_cast<double>(n)))) return false;
    return true;
}

PlanResult rrt(const Scene& scene, NfMode mode, const PlannerParams& params) { return grow_tree(scene, mode, params, false); }

PlanResult cobweb_rrg(const Scene& scene, const PlannerParams& params) { return grow_tree(scene, NfMode::edgeNN, params, true); }

VertexId prm_connect(Roadmap& map, const CPoint& p, std::size_t k, double cd_resolution, ValidityChecker& checker) {
    const SpaceSignature& sig = map.signature();
    std::vector<NeighborResult> nbs;
    if (map.vertex_count() > 0) nbs = map.nearest(p, k);
    const VertexId v = map.add_vertex(p);
    for (const NeighborResult& nb : nbs) {
        if (nb.distance == 0.0) continue;
        if (!segment_valid(sig, geodesic(sig, p, nb.point), cd_resolution, checker)) continue;
        const VertexId anchor = attach_point(map, nb);
        if (!map.has_edge(v, anchor)) map.add_edge(v, anchor);
    }
    return v;
}

PlanResult prm(const Scene& scene, NfMode mode, const PlannerParams& params) {
    params.validate();
    const SpaceSignature& sig = scene.signature;
    ValidityChecker checker(scene);
    if (!checker.is_valid(scene.start) || !checker.is_valid(scene.goal)) throw InvalidInput("planner: start or goal is invalid");

    Roadmap map(sig, mode, params.tree);
    Rng rng(params.seed);
    PlanResult result;

    auto connect = [&](const CPoint& p) { return prm_connect(map, p, params.k, params.cd_resolution, checker); };

    const VertexId start = connect(scene.start);
    const VertexId goal = connect(scene.goal);
    bool solved = map.sssp(start, goal).has_value();

    std::size_t nodes = 0;
    std::size_t round = 0;
    const bool budget_hit = params.node_budget > 0;
    while (round < params.max_iterations && !(solved && params.stop_when_solved) && !(budget_hit && nodes >= params.node_budget)) {
        ++round;
        std::size_t added = 0;
        for (std::size_t tries = 0; tries < params.prm_batch_tries && added < params.prm_batch_nodes; ++tries) {
            if (budget_hit && nodes >= params.node_budget) break;
            const CPoint q = sample_uniform(sig, rng);
            if (!checker.is_valid(q)) continue;
            connect(q);
            ++added;
            ++nodes;
        }
        if (params.stop_when_solved && !solved) solved = map.sssp(start, goal).has_value();
    }
    return finish(std::move(map), start, goal, round, checker, std::move(result));
}

GeometricTree build_geometric_tree(const SpaceSignature& sig, const std::vector<CPoint>& points, TreeConnector connector) {
    GeometricTree out;
    if (points.empty()) throw InvalidInput("build_geometric_tree: need at least one point");
    out.step_lengths.assign(points.size(), 0.0);
    SegmentTree index(sig, TreeParams{8, 128, 0.9, 0.0});
    const VecD zero(sig.dim());

    // Clamped hits are recomputed against the exact stored vertex: origin + disp
    // can miss the far endpoint by an ulp, which would break ties between modes.
    if (connector == TreeConnector::vertexNN) {
        index.insert(0, CSegment{points[0], zero, std::nullopt});
        for (std::size_t i = 1; i < points.size(); ++i) {
            const Neighbor nb = index.knn(points[i], 1).front();
            out.step_lengths[i] = dist_point_point(sig, points[i], points[nb.edge_id]);
            index.insert(i, CSegment{points[i], zero, std::nullopt});
        }
        out.vertex_count = points.size();
        out.edge_count = points.size() - 1;
    } else {
        struct Edge {
            CSegment seg;
            CPoint end;
        };
        std::vector<Edge> edges;
        std::size_t splits = 0;
        index.insert(kVertexEntry, CSegment{points[0], zero, std::nullopt});
        for (std::size_t i = 1; i < points.size(); ++i) {
            const Neighbor nb = index.knn(points[i], 1).front();
            CPoint target = nb.point;
            if (nb.edge_id == kVertexEntry) {
                target = points[0];
                index.remove(kVertexEntry);
            } else if (nb.param == 0.0) {
                target = edges[nb.edge_id].seg.origin;
            } else if (nb.param == 1.0) {
                target = edges[nb.edge_id].end;
            } else {
                const Edge parent = edges[nb.edge_id];
                index.remove(nb.edge_id);
                edges[nb.edge_id] = {CSegment{parent.seg.origin, parent.seg.disp * nb.param, std::nullopt}, target};
                index.insert(nb.edge_id, edges[nb.edge_id].seg);
                edges.push_back({CSegment{target, parent.seg.disp * (1.0 - nb.param), std::nullopt}, parent.end});
                index.insert(edges.size() - 1, edges.back().seg);
                ++splits;
            }
            out.step_lengths[i] = dist_point_point(sig, points[i], target);
            edges.push_back({geodesic(sig, points[i], target), target});
            index.insert(edges.size() - 1, edges.back().seg);
        }
        out.vertex_count = points.size() + splits;
        out.edge_count = edges.size();
    }
    for (double l : out.step_lengths) out.total_length += l;
    return out;
}

}  // namespace edgenn
