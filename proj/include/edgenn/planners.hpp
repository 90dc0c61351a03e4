#pragma once

// Sampling-based planners parameterized by neighborhood-finder mode, plus
// the obstacle-free greedy tree builder used by the theory checks.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "edgenn/roadmap.hpp"
#include "edgenn/scenes.hpp"

namespace edgenn {

/// Seeded generator shared by every planner.
///
/// Raw words come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. Doubles are built here rather than through
/// std::uniform_real_distribution, which is implementation-defined:
/// uniform() = (word >> 11) * 2^-53, a value in [0, 1).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() { return engine_(); }
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// Uniform over trans_lo..trans_hi x [0,1)^r; consumes exactly dim() words.
CPoint sample_uniform(const SpaceSignature& sig, Rng& rng);

struct PlannerParams {
    double min_ext = 0.01;
    double max_ext = 4.0;
    double cd_resolution = 0.01;
    std::size_t goal_bias_period = 100;
    double goal_connect_radius = 3.0;
    std::size_t k = 5;  ///< PRM neighbors; cobweb contact-set connections
    std::size_t max_iterations = 20000;
    std::uint64_t seed = 1;
    bool stop_when_solved = true;
    std::size_t node_budget = 0;      ///< PRM: stop after this many sampled nodes (0 = unlimited)
    std::size_t prm_batch_nodes = 5;  ///< PRM: nodes to add per round
    std::size_t prm_batch_tries = 10; ///< PRM: samples drawn per round at most
    bool keep_log = true;
    TreeParams tree;

    void validate() const;
};

struct ExtensionResult {
    CPoint reached;
    double length = 0.0;
    bool truncated = false;  ///< stopped by collision or by max_ext
    bool contact = false;    ///< stopped by collision before max_ext
    std::uint64_t cd_calls = 0;
};

/// Walks the geodesic from -> toward in cd_resolution steps, at most max_ext.
/// Throws InvalidInput when `from` is invalid.
ExtensionResult extend(const SpaceSignature& sig, const CPoint& from, const CPoint& toward, const PlannerParams& params,
                       ValidityChecker& checker);

/// Checks the points of `seg` at spacing <= resolution, excluding the origin.
bool segment_valid(const SpaceSignature& sig, const CSegment& seg, double resolution, ValidityChecker& checker);

struct IterationRecord {
    std::size_t iteration = 0;
    CPoint sample;
    NeighborResult::Kind neighbor_kind = NeighborResult::Kind::vertex;
    double neighbor_distance = 0.0;
    double extension_length = 0.0;  ///< 0 when discarded
    bool contact = false;
};

struct PlanResult {
    bool success = false;
    std::vector<VertexId> path;
    std::size_t iterations = 0;
    std::uint64_t cd_calls = 0;
    double roadmap_length = 0.0;
    std::size_t contact_points = 0;
    std::vector<IterationRecord> log;
    std::optional<Roadmap> roadmap;
    std::optional<VertexId> start_vertex;
    std::optional<VertexId> goal_vertex;
};

/// Adds p as a vertex and connects it to its k nearest roadmap neighbors,
/// nearest first, keeping only fully valid segments. Used by prm().
VertexId prm_connect(Roadmap& map, const CPoint& p, std::size_t k, double cd_resolution, ValidityChecker& checker);

PlanResult rrt(const Scene& scene, NfMode mode, const PlannerParams& params);
PlanResult prm(const Scene& scene, NfMode mode, const PlannerParams& params);
/// RRT with edge-NN; contact vertices are cross-connected to their k nearest contact predecessors.
PlanResult cobweb_rrg(const Scene& scene, const PlannerParams& params);

enum class TreeConnector { vertexNN, treeNN };

struct GeometricTree {
    std::vector<double> step_lengths;  ///< step_lengths[i] connects points[i]; entry 0 is 0
    double total_length = 0.0;
    std::size_t vertex_count = 0;
    std::size_t edge_count = 0;
};

/// Greedy insertion without validity checks. Euclidean or cyclic per `sig`.
GeometricTree build_geometric_tree(const SpaceSignature& sig, const std::vector<CPoint>& points, TreeConnector connector);

}  // namespace edgenn
