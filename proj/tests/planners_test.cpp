#include "edgenn/planners.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "edgenn/error.hpp"
#include "test_support.hpp"

namespace edgenn {
namespace {

CPoint pt(const SpaceSignature& sig, std::initializer_list<double> v) { return normalize(sig, VecD(v)); }

Scene box_world(std::vector<BoxObstacle> boxes) {
    Scene s = empty_box(2, 0);
    s.boxes = std::move(boxes);
    return s;
}

// Point robot whose free space is the grid lines x,y in {2.5, 7.5}; samples land there with probability 0.
Scene blocked_world() {
    const double cuts[] = {0.0, 2.5, 7.5, 10.0};
    std::vector<BoxObstacle> boxes;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) boxes.push_back({VecD{cuts[i], cuts[j]}, VecD{cuts[i + 1], cuts[j + 1]}});
    return box_world(std::move(boxes));
}

std::string dump(const Roadmap& map) {
    std::ostringstream out;
    map.write(out);
    return out.str();
}

bool path_revalidates(const Scene& scene, const PlanResult& r, double resolution) {
    ValidityChecker checker(scene);
    const Roadmap& map = *r.roadmap;
    for (std::size_t i = 0; i + 1 < r.path.size(); ++i) {
        const CSegment seg = geodesic(scene.signature, map.vertex(r.path[i]), map.vertex(r.path[i + 1]));
        if (!checker.is_valid(seg.origin) || !segment_valid(scene.signature, seg, resolution, checker)) return false;
    }
    return true;
}

TEST(Rng, UniformIsHalfOpenAndRepeatable) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_EQ(u, b.uniform());
    }
}

TEST(Rng, SampleConsumesOneWordPerDimension) {
    const SpaceSignature sig = SpaceSignature::box(VecD{-1.0, 2.0}, VecD{1.0, 6.0}, 3);
    Rng a(7), b(7);
    const CPoint p = sample_uniform(sig, a);
    for (int i = 0; i < 5; ++i) b.next();
    EXPECT_EQ(a.next(), b.next());
    EXPECT_GE(p[0], -1.0);
    EXPECT_LT(p[1], 6.0);
    for (std::size_t i = 2; i < 5; ++i) EXPECT_LT(p[i], 1.0);
}

TEST(PlannerParams, RejectsBadValues) {
    PlannerParams p;
    p.min_ext = 5.0;
    EXPECT_THROW(p.validate(), InvalidInput);
    p = {};
    p.cd_resolution = 0.0;
    EXPECT_THROW(p.validate(), InvalidInput);
    p = {};
    p.k = 0;
    EXPECT_THROW(p.validate(), InvalidInput);
    EXPECT_NO_THROW(PlannerParams{}.validate());
}

TEST(Extend, FreeShortReachesTargetExactly) {
    const Scene s = empty_box(2, 0);
    ValidityChecker checker(s);
    const CPoint to = pt(s.signature, {4.0, 2.0});
    const ExtensionResult r = extend(s.signature, pt(s.signature, {2.0, 2.0}), to, PlannerParams{}, checker);
    EXPECT_EQ(r.reached, to);
    EXPECT_DOUBLE_EQ(r.length, 2.0);
    EXPECT_FALSE(r.contact);
    EXPECT_FALSE(r.truncated);
    EXPECT_EQ(r.cd_calls, checker.cd_calls());
    EXPECT_EQ(r.cd_calls, 201u);
}

TEST(Extend, WallStopsWithContact) {
    const Scene s = box_world({{VecD{3.0, 0.0}, VecD{4.0, 10.0}}});
    ValidityChecker checker(s);
    const ExtensionResult r = extend(s.signature, pt(s.signature, {2.0, 5.0}), pt(s.signature, {8.0, 5.0}), PlannerParams{}, checker);
    EXPECT_TRUE(r.contact);
    EXPECT_TRUE(r.truncated);
    EXPECT_LE(r.length, 1.0 + 1e-12);
    EXPECT_GE(r.length, 1.0 - 0.01 - 1e-12);
    EXPECT_LE(r.reached[0], 3.0);
    EXPECT_EQ(r.cd_calls, checker.cd_calls());
}

TEST(Extend, LongFreeRayIsClamped) {
    const Scene s = empty_box(2, 0);
    ValidityChecker checker(s);
    const CPoint from = pt(s.signature, {0.5, 0.5});
    const ExtensionResult r = extend(s.signature, from, pt(s.signature, {8.5, 6.5}), PlannerParams{}, checker);
    EXPECT_NEAR(r.length, 4.0, 0.01);
    EXPECT_NEAR(dist_point_point(s.signature, from, r.reached), 4.0, 0.01);
    EXPECT_FALSE(r.contact);
    EXPECT_TRUE(r.truncated);
}

TEST(Extend, TooShortIsDiscarded) {
    const Scene s = box_world({{VecD{2.005, 0.0}, VecD{4.0, 10.0}}});
    ValidityChecker checker(s);
    const CPoint from = pt(s.signature, {2.0, 5.0});
    const ExtensionResult r = extend(s.signature, from, pt(s.signature, {8.0, 5.0}), PlannerParams{}, checker);
    EXPECT_EQ(r.reached, from);
    EXPECT_EQ(r.length, 0.0);
    EXPECT_TRUE(r.truncated);
}

TEST(Extend, InvalidStartThrows) {
    const Scene s = box_world({{VecD{3.0, 0.0}, VecD{4.0, 10.0}}});
    ValidityChecker checker(s);
    EXPECT_THROW(extend(s.signature, pt(s.signature, {3.5, 5.0}), pt(s.signature, {8.0, 5.0}), PlannerParams{}, checker),
                 InvalidInput);
}

TEST(Extend, WrapsAcrossTheSeam) {
    const Scene s = empty_box(1, 1);
    ValidityChecker checker(s);
    const ExtensionResult r = extend(s.signature, pt(s.signature, {5.0, 0.95}), pt(s.signature, {5.0, 0.05}), PlannerParams{}, checker);
    EXPECT_NEAR(r.length, 0.1, 1e-12);
    EXPECT_NEAR(r.reached[1], 0.05, 1e-12);
}

TEST(SegmentValid, ExcludesOriginAndCountsSteps) {
    const Scene s = box_world({{VecD{1.0, 1.0}, VecD{3.0, 3.0}}});
    ValidityChecker checker(s);
    EXPECT_TRUE(segment_valid(s.signature, geodesic(s.signature, pt(s.signature, {2.0, 2.0}), pt(s.signature, {2.0, 2.0})), 0.01,
                              checker) == false);
    const CSegment free = geodesic(s.signature, pt(s.signature, {5.0, 5.0}), pt(s.signature, {6.0, 5.0}));
    const std::uint64_t before = checker.cd_calls();
    EXPECT_TRUE(segment_valid(s.signature, free, 0.01, checker));
    EXPECT_EQ(checker.cd_calls() - before, 100u);
}

TEST(Rrt, EmptyBoxNearGoalSolvesQuickly) {
    Scene s = empty_box(2, 0);
    s.goal = pt(s.signature, {3.5, 2.5});
    for (NfMode mode : {NfMode::vertexNN, NfMode::edgeNN}) {
        const PlanResult r = rrt(s, mode, PlannerParams{});
        ASSERT_TRUE(r.success);
        EXPECT_LE(r.iterations, 10u);
        EXPECT_EQ(r.path.front(), *r.start_vertex);
        EXPECT_EQ(r.path.back(), *r.goal_vertex);
        EXPECT_EQ(r.roadmap->sssp(r.path.front(), r.path.back()), r.path);
    }
}

TEST(Rrt, DeterministicForSeed) {
    const Scene s = wall_with_hole(0.9);
    PlannerParams p;
    p.seed = 11;
    p.max_iterations = 400;
    const PlanResult a = rrt(s, NfMode::edgeNN, p);
    const PlanResult b = rrt(s, NfMode::edgeNN, p);
    EXPECT_EQ(a.cd_calls, b.cd_calls);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(dump(*a.roadmap), dump(*b.roadmap));
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) EXPECT_EQ(a.log[i].neighbor_distance, b.log[i].neighbor_distance);
}

TEST(Rrt, EdgeModeDominatesOnIdenticalPrefix) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        PlannerParams p;
        p.seed = seed;
        p.max_iterations = 300;
        const Scene s = wall_with_hole(0.9);
        const PlanResult v = rrt(s, NfMode::vertexNN, p);
        const PlanResult e = rrt(s, NfMode::edgeNN, p);
        const std::size_t n = std::min(v.log.size(), e.log.size());
        for (std::size_t i = 0; i < n; ++i) {
            ASSERT_EQ(v.log[i].sample, e.log[i].sample) << "seed " << seed << " iter " << i;
            ASSERT_LE(e.log[i].neighbor_distance, v.log[i].neighbor_distance) << "seed " << seed << " iter " << i;
            const bool same = e.log[i].neighbor_kind == NeighborResult::Kind::vertex &&
                              e.log[i].neighbor_distance == v.log[i].neighbor_distance &&
                              e.log[i].extension_length == v.log[i].extension_length;
            if (!same) break;
        }
    }
}

TEST(Rrt, PathsRevalidateAndEdgesAreCertified) {
    const Scene s = wall_with_hole(0.9);
    PlannerParams p;
    p.seed = 3;
    for (NfMode mode : {NfMode::vertexNN, NfMode::edgeNN}) {
        const PlanResult r = rrt(s, mode, p);
        ASSERT_TRUE(r.success) << to_string(mode);
        EXPECT_TRUE(path_revalidates(s, r, p.cd_resolution));
        EXPECT_EQ(r.roadmap->live_edge_count() + 1, r.roadmap->vertex_count());
        EXPECT_EQ(r.roadmap_length, r.roadmap->total_length());
    }
}

TEST(Rrt, ExhaustedBudgetReportsFailure) {
    const Scene s = wall_with_hole(0.9);
    PlannerParams p;
    p.max_iterations = 5;
    const PlanResult r = rrt(s, NfMode::edgeNN, p);
    EXPECT_FALSE(r.success);
    EXPECT_TRUE(r.path.empty());
    EXPECT_EQ(r.iterations, 5u);
    EXPECT_EQ(r.log.size(), 5u);
}

TEST(Rrt, InvalidStartThrows) {
    Scene s = box_world({{VecD{1.0, 1.0}, VecD{4.0, 4.0}}});
    EXPECT_THROW(rrt(s, NfMode::edgeNN, PlannerParams{}), InvalidInput);
}

TEST(Prm, CollinearPointsWithOneNeighborFormAChain) {
    const Scene s = empty_box(2, 0);
    for (NfMode mode : {NfMode::vertexNN, NfMode::edgeNN}) {
        Roadmap map(s.signature, mode);
        ValidityChecker checker(s);
        const VertexId a = prm_connect(map, pt(s.signature, {1.0, 5.0}), 1, 0.01, checker);
        const VertexId b = prm_connect(map, pt(s.signature, {3.0, 5.0}), 1, 0.01, checker);
        const VertexId c = prm_connect(map, pt(s.signature, {7.0, 5.0}), 1, 0.01, checker);
        EXPECT_EQ(map.vertex_count(), 3u);
        EXPECT_EQ(map.live_edge_count(), 2u);
        EXPECT_TRUE(map.has_edge(a, b));
        EXPECT_TRUE(map.has_edge(b, c));
        EXPECT_FALSE(map.has_edge(a, c));
    }
}

TEST(Prm, EdgeModeConnectsToSwathBySplitting) {
    const Scene s = empty_box(2, 0);
    Roadmap map(s.signature, NfMode::edgeNN);
    ValidityChecker checker(s);
    const VertexId a = prm_connect(map, pt(s.signature, {1.0, 5.0}), 1, 0.01, checker);
    const VertexId b = prm_connect(map, pt(s.signature, {9.0, 5.0}), 1, 0.01, checker);
    const VertexId c = prm_connect(map, pt(s.signature, {5.0, 7.0}), 1, 0.01, checker);
    EXPECT_EQ(map.vertex_count(), 4u);
    EXPECT_EQ(map.live_edge_count(), 3u);
    EXPECT_NEAR(map.total_length(), 10.0, 1e-12);
    const auto path = map.sssp(a, b);
    ASSERT_TRUE(path.has_value());
    EXPECT_EQ(path->size(), 3u);
    EXPECT_EQ(map.incident(c).size(), 1u);
}

TEST(Prm, BlockedWorldFailsWithNoEdges) {
    const Scene s = blocked_world();
    PlannerParams p;
    p.max_iterations = 50;
    for (NfMode mode : {NfMode::vertexNN, NfMode::edgeNN}) {
        const PlanResult r = prm(s, mode, p);
        EXPECT_FALSE(r.success);
        EXPECT_TRUE(r.path.empty());
        EXPECT_EQ(r.roadmap->live_edge_count(), 0u);
        EXPECT_EQ(r.roadmap->vertex_count(), 2u);
    }
}

TEST(Prm, NodeBudgetStopsSampling) {
    const Scene s = empty_box(3, 0);
    PlannerParams p;
    p.stop_when_solved = false;
    p.node_budget = 40;
    const PlanResult r = prm(s, NfMode::vertexNN, p);
    EXPECT_EQ(r.roadmap->vertex_count(), 42u);
    EXPECT_TRUE(r.success);
}

TEST(Prm, EdgeModeIsShorterOnMatchedSeeds) {
    const Scene s = empty_box(3, 0);
    PlannerParams p;
    p.stop_when_solved = false;
    p.node_budget = 200;
    double ev = 0.0, ee = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        p.seed = seed;
        ev += prm(s, NfMode::vertexNN, p).roadmap_length;
        ee += prm(s, NfMode::edgeNN, p).roadmap_length;
    }
    EXPECT_LT(ee, ev);
}

TEST(Cobweb, EmptyWorldHasNoContactsOrWebEdges) {
    const Scene s = empty_box(2, 1);
    PlannerParams p;
    p.seed = 5;
    const PlanResult r = cobweb_rrg(s, p);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.contact_points, 0u);
    EXPECT_EQ(r.roadmap->count_edges(EdgeTag::web), 0u);
    const PlanResult plain = rrt(s, NfMode::edgeNN, p);
    EXPECT_EQ(dump(*r.roadmap), dump(*plain.roadmap));
}

// Extensions may attach to a split web edge, so tree edges form a forest
// that the web edges join; the whole graph stays connected.
TEST(Cobweb, TreeEdgesAreAcyclicAndWebEdgesJoinThem) {
    const Scene s = wall_with_hole(0.9);
    PlannerParams p;
    p.seed = 2;
    const PlanResult r = cobweb_rrg(s, p);
    ASSERT_TRUE(r.success);
    const Roadmap& map = *r.roadmap;
    std::vector<VertexId> parent(map.vertex_count());
    std::iota(parent.begin(), parent.end(), VertexId{0});
    auto find = [&](VertexId x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t components = map.vertex_count();
    for (EdgeTag tag : {EdgeTag::tree, EdgeTag::web}) {
        for (EdgeId e : map.live_edges()) {
            if (map.edge(e).tag != tag) continue;
            const VertexId a = find(map.edge(e).u), b = find(map.edge(e).v);
            if (tag == EdgeTag::tree) {
                ASSERT_NE(a, b) << "tree edges close a cycle";
            }
            if (a != b) {
                parent[a] = b;
                --components;
            }
        }
    }
    EXPECT_EQ(components, 1u);
    EXPECT_GT(map.count_edges(EdgeTag::web), 0u);
    EXPECT_TRUE(path_revalidates(s, r, p.cd_resolution));
}

TEST(GeometricTree, TwoPointsGiveOneIdenticalEdge) {
    const SpaceSignature sig = SpaceSignature::unit(2, 0);
    const std::vector<CPoint> pts{pt(sig, {0.1, 0.2}), pt(sig, {0.7, 0.6})};
    const GeometricTree v = build_geometric_tree(sig, pts, TreeConnector::vertexNN);
    const GeometricTree e = build_geometric_tree(sig, pts, TreeConnector::treeNN);
    EXPECT_EQ(v.step_lengths, e.step_lengths);
    EXPECT_EQ(v.edge_count, 1u);
    EXPECT_EQ(e.edge_count, 1u);
    EXPECT_DOUBLE_EQ(v.total_length, std::hypot(0.6, 0.4));
}

TEST(GeometricTree, SwathStepNeverExceedsVertexStep) {
    std::mt19937_64 rng(99);
    for (const SpaceSignature& sig : {SpaceSignature::unit(2, 0), SpaceSignature::unit(3, 0), SpaceSignature::unit(0, 2)}) {
        std::vector<CPoint> pts;
        for (int i = 0; i < 2000; ++i) pts.push_back(testing::random_point(sig, rng));
        const GeometricTree v = build_geometric_tree(sig, pts, TreeConnector::vertexNN);
        const GeometricTree e = build_geometric_tree(sig, pts, TreeConnector::treeNN);
        for (std::size_t i = 0; i < pts.size(); ++i) ASSERT_LE(e.step_lengths[i], v.step_lengths[i]) << "step " << i;
        EXPECT_LT(e.total_length, v.total_length);
        EXPECT_EQ(e.edge_count + 1, e.vertex_count);
    }
}

TEST(GeometricTree, VertexStepsMatchLinearScan) {
    std::mt19937_64 rng(5);
    const SpaceSignature sig = SpaceSignature::unit(1, 2);
    std::vector<CPoint> pts;
    for (int i = 0; i < 300; ++i) pts.push_back(testing::random_point(sig, rng));
    const GeometricTree v = build_geometric_tree(sig, pts, TreeConnector::vertexNN);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double best = 1e300;
        for (std::size_t j = 0; j < i; ++j) best = std::min(best, testing::brute_point_distance(sig, pts[i], pts[j]));
        EXPECT_NEAR(v.step_lengths[i], best, 1e-12);
    }
}

}  // namespace
}  // namespace edgenn
