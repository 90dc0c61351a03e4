#include "edgenn/segment_tree.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "edgenn/error.hpp"
#include "test_support.hpp"

namespace edgenn {
namespace {

using testing::random_point;
using testing::random_segment;
using testing::seam_point;

struct Ranked {
    EdgeId id;
    double distance;
};

// Every live edge measured with the lift-enumerating oracle, sorted.
std::vector<Ranked> brute_knn(const SpaceSignature& sig, const std::map<EdgeId, CSegment>& edges, const CPoint& p,
                              std::size_t k) {
    std::vector<Ranked> all;
    for (const auto& [id, seg] : edges) all.push_back({id, dist_point_segment_oracle(sig, p, seg).distance});
    std::sort(all.begin(), all.end(), [](const Ranked& a, const Ranked& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
    });
    if (all.size() > k) all.resize(k);
    return all;
}

void expect_matches(const std::vector<Neighbor>& got, const std::vector<Ranked>& want) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i].distance, want[i].distance, 1e-9) << "rank " << i;
}

TEST(TreeParams, Validation) {
    TreeParams p;
    EXPECT_NO_THROW(p.validate());
    p.n_leaf_ratio = 0.5;
    EXPECT_THROW(p.validate(), InvalidInput);
    p = {};
    p.n_leaf_thresh = 0;
    EXPECT_THROW(p.validate(), InvalidInput);
    p = {};
    p.epsilon = -0.1;
    EXPECT_THROW(p.validate(), InvalidInput);
    p = {};
    p.n_leaf_ratio = 1.0;
    EXPECT_NO_THROW(p.validate());
}

TEST(SegmentTree, EmptyTreeReturnsNothing) {
    const SegmentTree tree(SpaceSignature::unit(1, 1), {});
    EXPECT_TRUE(tree.knn(CPoint{VecD{0.5, 0.5}}, 3).empty());
    EXPECT_THROW((void)tree.knn(CPoint{VecD{0.5, 0.5}}, 0), InvalidInput);
    EXPECT_THROW((void)tree.knn(CPoint{VecD{0.5}}, 1), InvalidInput);
}

TEST(SegmentTree, SmallTorusExample) {
    const auto sig = SpaceSignature::unit(0, 2);
    const auto pt = [&](double x, double y) { return normalize(sig, VecD{x, y}); };
    std::vector<std::pair<EdgeId, CSegment>> edges{
        {10, geodesic(sig, pt(0.9, 0.4), pt(0.9, 0.6))},
        {20, geodesic(sig, pt(0.3, 0.3), pt(0.4, 0.3))},
        {30, geodesic(sig, pt(0.6, 0.9), pt(0.6, 0.1))},
    };
    const SegmentTree tree = SegmentTree::build(sig, edges, {});
    const auto got = tree.knn(pt(0.05, 0.5), 3);
    ASSERT_EQ(got.size(), 3u);
    // Oracle values: 0.15 via the seam; edge 20 at hypot(0.25, 0.2); edge 30 at hypot(0.45, 0.4).
    EXPECT_EQ(got[0].edge_id, 10u);
    EXPECT_NEAR(got[0].distance, 0.15, 1e-12);
    EXPECT_NEAR(got[0].param, 0.5, 1e-12);
    EXPECT_EQ(got[1].edge_id, 20u);
    EXPECT_NEAR(got[1].distance, std::hypot(0.25, 0.2), 1e-12);
    EXPECT_EQ(got[2].edge_id, 30u);
    EXPECT_NEAR(got[2].distance, std::hypot(0.45, 0.4), 1e-12);
}

TEST(SegmentTree, WrappingEdgeReportedOnce) {
    const auto sig = SpaceSignature::unit(0, 2);
    const CSegment s = geodesic(sig, normalize(sig, VecD{0.8, 0.7}), normalize(sig, VecD{0.2, 0.1}));
    const SegmentTree tree = SegmentTree::build(sig, {{1, s}}, {});
    EXPECT_EQ(tree.stats().stored_pieces, 3u);
    const auto got = tree.knn(normalize(sig, VecD{0.5, 0.5}), 5);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].edge_id, 1u);
}

TEST(SegmentTree, TiesBrokenBySmallerId) {
    const auto sig = SpaceSignature::unit(1, 0);
    const CSegment s = geodesic(sig, normalize(sig, VecD{0.2}), normalize(sig, VecD{0.4}));
    const SegmentTree tree = SegmentTree::build(sig, {{7, s}, {3, s}, {5, s}}, {});
    const auto got = tree.knn(normalize(sig, VecD{0.9}), 2);
    ASSERT_EQ(got.size(), 2u);
    EXPECT_EQ(got[0].edge_id, 3u);
    EXPECT_EQ(got[1].edge_id, 5u);
}

TEST(SegmentTree, DuplicateIdsRejected) {
    const auto sig = SpaceSignature::unit(1, 1);
    std::mt19937_64 rng(1);
    const CSegment s = random_segment(sig, rng);
    EXPECT_THROW((void)SegmentTree::build(sig, {{1, s}, {1, s}}, {}), InvalidInput);
    SegmentTree tree(sig, {});
    tree.insert(4, s);
    EXPECT_THROW(tree.insert(4, s), InvalidInput);
    EXPECT_THROW(tree.remove(5), InvalidInput);
}

TEST(SegmentTree, ReinsertAfterRemove) {
    const auto sig = SpaceSignature::unit(1, 1);
    std::mt19937_64 rng(2);
    SegmentTree tree(sig, {});
    const CSegment a = random_segment(sig, rng);
    const CSegment b = random_segment(sig, rng);
    tree.insert(1, a);
    tree.rebuild();
    tree.remove(1);
    EXPECT_FALSE(tree.contains(1));
    tree.insert(1, b);
    const CPoint q = random_point(sig, rng);
    const auto got = tree.knn(q, 3);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_NEAR(got[0].distance, dist_point_segment_oracle(sig, q, b).distance, 1e-12);
    tree.rebuild();
    const auto again = tree.knn(q, 3);
    ASSERT_EQ(again.size(), 1u);
    EXPECT_EQ(again[0].distance, got[0].distance);
}

TEST(SegmentTree, BufferAutoRebuild) {
    const auto sig = SpaceSignature::unit(2, 1);
    std::mt19937_64 rng(3);
    TreeParams params;
    params.n_buff = 10;
    SegmentTree tree(sig, params);
    for (EdgeId id = 0; id < 9; ++id) tree.insert(id, random_segment(sig, rng, 0.3));
    EXPECT_EQ(tree.stats().rebuilds, 0u);
    EXPECT_EQ(tree.stats().buffered_edges, 9u);
    tree.insert(9, random_segment(sig, rng, 0.3));
    EXPECT_EQ(tree.stats().rebuilds, 1u);
    EXPECT_EQ(tree.stats().buffered_edges, 0u);
    EXPECT_EQ(tree.stats().live_edges, 10u);
}

TEST(SegmentTree, RebuildWithoutChangesIsNoop) {
    const auto sig = SpaceSignature::unit(1, 1);
    std::mt19937_64 rng(4);
    std::vector<std::pair<EdgeId, CSegment>> edges;
    for (EdgeId id = 0; id < 50; ++id) edges.emplace_back(id, random_segment(sig, rng));
    SegmentTree tree = SegmentTree::build(sig, edges, {});
    const TreeStats before = tree.stats();
    tree.rebuild();
    EXPECT_EQ(tree.stats(), before);
}

TEST(SegmentTree, StructureInvariants) {
    std::mt19937_64 rng(5);
    for (double ratio : {0.6, 0.9, 1.0}) {
        const auto sig = SpaceSignature::unit(2, 2);
        std::vector<std::pair<EdgeId, CSegment>> edges;
        for (EdgeId id = 0; id < 400; ++id) edges.emplace_back(id, random_segment(sig, rng, 0.2));
        TreeParams params;
        params.n_leaf_ratio = ratio;
        const SegmentTree tree = SegmentTree::build(sig, edges, params);
        const auto& nodes = tree.nodes();
        std::vector<int> seen(tree.item_order().size(), 0);

        for (const auto& node : nodes) {
            if (node.leaf) {
                for (std::uint32_t i = node.begin; i < node.end; ++i) ++seen[tree.item_order()[i]];
                if (!node.ratio_stop) {
                    EXPECT_LE(node.end - node.begin, params.n_leaf_thresh);
                }
            }
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const Aabb b = Aabb::of(tree.piece(tree.item_order()[i]));
                for (std::size_t d = 0; d < sig.dim(); ++d) {
                    EXPECT_LE(node.box.lo[d], b.lo[d]);
                    EXPECT_GE(node.box.hi[d], b.hi[d]);
                }
            }
            if (node.leaf) continue;
            const std::size_t dim = static_cast<std::size_t>(node.split_dim);
            for (int c = 0; c < 3; ++c) {
                if (node.children[c] < 0) continue;
                const auto& child = nodes[static_cast<std::size_t>(node.children[c])];
                EXPECT_LT(child.end - child.begin, node.end - node.begin + 1);
                for (std::uint32_t i = child.begin; i < child.end; ++i) {
                    const Aabb b = Aabb::of(tree.piece(tree.item_order()[i]));
                    // children: below, above, straddling
                    const bool ok = c == 0   ? b.hi[dim] < node.split_value
                                    : c == 1 ? b.lo[dim] > node.split_value
                                             : b.lo[dim] <= node.split_value && b.hi[dim] >= node.split_value;
                    EXPECT_TRUE(ok) << "child " << c;
                }
            }
        }
        for (int s : seen) EXPECT_EQ(s, 1);
    }
}

class KnnOracle : public ::testing::TestWithParam<std::pair<int, int>> {};

TEST_P(KnnOracle, ExactAndApproximate) {
    const auto [t, r] = GetParam();
    const auto sig = SpaceSignature::unit(t, r);
    std::mt19937_64 rng(77 + 10 * t + r);
    std::uniform_int_distribution<int> count(1, 300);
    std::uniform_int_distribution<int> kdist(1, 8);
    for (int graph = 0; graph < 8; ++graph) {
        std::map<EdgeId, CSegment> edges;
        std::vector<std::pair<EdgeId, CSegment>> list;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            const CSegment s = random_segment(sig, rng, graph % 2 ? 0.15 : 1e9);
            edges.emplace(static_cast<EdgeId>(i), s);
            list.emplace_back(static_cast<EdgeId>(i), s);
        }
        const SegmentTree exact = SegmentTree::build(sig, list, {});
        TreeParams approx_params;
        approx_params.epsilon = 0.05;
        const SegmentTree approx = SegmentTree::build(sig, list, approx_params);
        for (int q = 0; q < 40; ++q) {
            const CPoint p = seam_point(sig, rng);
            const std::size_t k = static_cast<std::size_t>(kdist(rng));
            const auto want = brute_knn(sig, edges, p, k);
            expect_matches(exact.knn(p, k), want);
            const auto loose = approx.knn(p, k);
            ASSERT_EQ(loose.size(), want.size());
            for (std::size_t i = 0; i < loose.size(); ++i) EXPECT_LE(loose[i].distance, 1.05 * want[i].distance + 1e-12);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Signatures, KnnOracle,
                         ::testing::Values(std::pair{0, 2}, std::pair{0, 3}, std::pair{1, 1}, std::pair{2, 1},
                                           std::pair{3, 3}, std::pair{2, 0}));

TEST(SegmentTree, MixedUpdatesMatchOracle) {
    const auto sig = SpaceSignature::unit(1, 2);
    std::mt19937_64 rng(91);
    TreeParams params;
    params.n_buff = 16;
    SegmentTree tree(sig, params);
    std::map<EdgeId, CSegment> live;
    EdgeId next = 0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int step = 0; step < 1500; ++step) {
        const double roll = u(rng);
        if (roll < 0.6 || live.empty()) {
            const CSegment s = random_segment(sig, rng, 0.4);
            tree.insert(next, s);
            live.emplace(next++, s);
        } else if (roll < 0.8) {
            auto it = live.begin();
            std::advance(it, static_cast<long>(rng() % live.size()));
            tree.remove(it->first);
            live.erase(it);
        } else if (roll < 0.82) {
            tree.rebuild();
        } else {
            const CPoint p = seam_point(sig, rng);
            const std::size_t k = 1 + rng() % 6;
            expect_matches(tree.knn(p, k), brute_knn(sig, live, p, k));
        }
        ASSERT_EQ(tree.live_edges(), live.size());
    }
}

TEST(SegmentTree, NeighborPointAndParamConsistent) {
    const auto sig = SpaceSignature::unit(2, 1);
    std::mt19937_64 rng(12);
    std::vector<std::pair<EdgeId, CSegment>> list;
    std::map<EdgeId, CSegment> edges;
    for (EdgeId id = 0; id < 200; ++id) {
        const CSegment s = random_segment(sig, rng, 0.5);
        list.emplace_back(id, s);
        edges.emplace(id, s);
    }
    const SegmentTree tree = SegmentTree::build(sig, list, {});
    for (int q = 0; q < 200; ++q) {
        const CPoint p = seam_point(sig, rng);
        for (const Neighbor& nb : tree.knn(p, 4)) {
            EXPECT_GE(nb.param, 0.0);
            EXPECT_LE(nb.param, 1.0);
            EXPECT_NEAR(dist_point_point(sig, p, nb.point), nb.distance, 1e-12);
            EXPECT_LT(dist_point_point(sig, nb.point, point_at(sig, edges.at(nb.edge_id), nb.param)), 1e-9);
        }
    }
}

TEST(SegmentTree, PruningSavesWork) {
    const auto sig = SpaceSignature::unit(2, 1);
    std::mt19937_64 rng(13);
    std::vector<std::pair<EdgeId, CSegment>> list;
    for (EdgeId id = 0; id < 2000; ++id) list.emplace_back(id, random_segment(sig, rng, 0.05));
    const SegmentTree tree = SegmentTree::build(sig, list, {});
    std::size_t evals = 0;
    for (int q = 0; q < 100; ++q) {
        QueryCost cost;
        (void)tree.knn(random_point(sig, rng), 1, &cost);
        evals += cost.distance_evals;
    }
    EXPECT_LT(evals / 100, tree.stats().stored_pieces / 5);
}

}  // namespace
}  // namespace edgenn
