#pragma once

// Experiment drivers behind the CLI and the acceptance suite: theory checks
// for the greedy-tree constants, paired-seed planner benchmarks, distance
// heatmaps and index self-tests. Everything here is deterministic given its
// config; CSV text is byte-stable across reruns.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgenn/planners.hpp"

namespace edgenn {

// ---- theory ---------------------------------------------------------------

/// Surface area of the unit sphere in R^d, 2 pi^(d/2) / Gamma(d/2). Throws for d < 1.
double alpha_surface(int d);

/// alpha_{d-1} alpha_{d+1} / (2 alpha_d^2). Throws for d < 2.
double F_closed(int d);

struct MonteCarloEstimate {
    double f = 0.0;
    double f_stderr = 0.0;
    double delta = 0.0;  ///< mean pole-to-segment distance; targets F + 1/2
    double delta_stderr = 0.0;
    std::size_t samples = 0;
};

/// Uniform directions u on S^(d-1) (Box-Muller over Rng); the per-sample
/// distance from the pole e_d to the segment [0, u] is sqrt(1 - u_d^2) when
/// u_d > 0 and 1 otherwise. `f` averages only the first branch.
MonteCarloEstimate F_monte_carlo(int d, std::size_t samples, std::uint64_t seed);

/// Seeds used for paired runs: base, base+1, ...
std::vector<std::uint64_t> seed_list(std::uint64_t base_seed, std::size_t count);

struct ScalingFit {
    int d = 0;
    std::size_t seeds = 0;
    std::vector<std::size_t> n_grid;
    std::vector<double> mean_length;  ///< E[len(T_n)] per grid point
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double ci_lo = 0.0;  ///< 95% interval from the regression residuals
    double ci_hi = 0.0;
};

/// Greedy vertexNN trees over uniform points in [0,1]^d, one run of max(n_grid)
/// points per seed; log-log least squares of the mean length on n.
ScalingFit verify_scaling(int d, const std::vector<std::size_t>& n_grid, std::size_t seeds, std::uint64_t base_seed);

/// Accepted slope interval for d in {2, 3}; 1 - 1/d +- 0.05 otherwise.
std::pair<double, double> scaling_range(int d);

struct DominanceRecord {
    std::uint64_t seed = 0;
    double vertex_length = 0.0;
    double tree_length = 0.0;
    std::size_t step_violations = 0;  ///< steps with l'_i > l_i
};

struct DominanceReport {
    int d = 0;
    std::size_t n = 0;
    std::vector<DominanceRecord> records;

    [[nodiscard]] bool all_pass() const;
    [[nodiscard]] double mean_ratio() const;
};

/// Both connectors on the same uniform sequence in [0,1]^d for every seed.
DominanceReport check_dominance(int d, std::size_t n, std::size_t seeds, std::uint64_t base_seed);

struct TheoryConfig {
    std::vector<int> sphere_dims{2, 3, 5, 8};
    std::size_t mc_samples = 1000000;
    std::vector<int> scaling_dims{2, 3};
    std::vector<std::size_t> n_grid{625, 1250, 2500, 5000, 10000, 20000};
    std::size_t scaling_seeds = 30;
    std::vector<int> dominance_dims{2, 3};
    std::size_t dominance_n = 5000;
    std::size_t dominance_seeds = 50;
    std::uint64_t base_seed = 1;
};

struct SphereRecord {
    int d = 0;
    double f_closed = 0.0;
    MonteCarloEstimate mc;
    double delta_closed = 0.0;
    std::optional<double> reported_bound;  ///< 1/2 (1 - 1/(3k)) for odd d = 2k+1; never asserted

    [[nodiscard]] bool within_3se() const;
    [[nodiscard]] bool delta_below_one() const;
};

struct TheoryReport {
    std::vector<SphereRecord> sphere;
    std::vector<ScalingFit> scaling;
    std::vector<DominanceReport> dominance;

    [[nodiscard]] bool sphere_ok() const;
    [[nodiscard]] bool scaling_ok() const;
    [[nodiscard]] bool dominance_ok() const;
};

TheoryReport verify_theory(const TheoryConfig& config);

/// Columns: check,d,n,seed,quantity,value,stderr,target,lo,hi,pass
void write_theory_csv(std::ostream& out, const TheoryReport& report);

// ---- experiments ----------------------------------------------------------

enum class PlannerKind { rrt, prm, cobweb, geometric };
std::string_view to_string(PlannerKind kind) noexcept;
PlannerKind parse_planner(std::string_view text);

struct ExperimentConfig {
    std::string scene = "empty_box";
    PlannerKind planner = PlannerKind::prm;
    std::vector<NfMode> modes{NfMode::vertexNN, NfMode::edgeNN};
    std::size_t seeds = 50;
    std::uint64_t base_seed = 1;
    PlannerParams params;
    std::size_t budget = 500;  ///< roadmap-length runs: PRM nodes, RRT iterations, geometric points
};

struct LengthRow {
    std::string scene;
    PlannerKind planner = PlannerKind::prm;
    std::size_t k = 0;
    NfMode mode = NfMode::vertexNN;
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    std::size_t vertices = 0;
    std::size_t edges = 0;
    std::uint64_t cd_calls = 0;
    double total_length = 0.0;
};

/// Obstacle-free scenes only. PRM: node_budget = budget with k from params;
/// RRT: budget iterations, k reported as 1; geometric: budget uniform points,
/// vertexNN vs treeNN connector, no validity checks.
std::vector<LengthRow> run_roadmap_length(const ExperimentConfig& config);

/// Columns: kind,scene,planner,k,nf_mode,seed,budget,vertices,edges,cd_calls,total_length.
/// kind=run rows in (seed, mode) order, then one kind=mean row per mode.
void write_length_csv(std::ostream& out, const std::vector<LengthRow>& rows);

/// Mean total length of `numer` over mean of `denom` across the rows.
double length_ratio(const std::vector<LengthRow>& rows, NfMode numer, NfMode denom);

struct PlanningRow {
    std::string scene;
    PlannerKind planner = PlannerKind::rrt;
    NfMode mode = NfMode::vertexNN;
    std::uint64_t seed = 0;
    bool solved = false;
    std::size_t iterations = 0;
    std::uint64_t cd_calls = 0;
    double roadmap_length = 0.0;
    std::size_t vertices = 0;
    std::size_t edges = 0;
    std::size_t web_edges = 0;
    std::size_t contact_points = 0;
    double path_length = 0.0;
    bool path_revalidated = false;  ///< every path edge re-checked at cd_resolution
};

/// Called once per finished run, e.g. to save roadmaps or iteration logs.
using RunObserver = std::function<void(const PlanningRow&, const PlanResult&)>;

/// Paired runs over the seed list. Cobweb runs once per seed with edge-NN and
/// ignores `modes`.
std::vector<PlanningRow> run_planning(const ExperimentConfig& config, const RunObserver& observer = {});

/// Columns: kind,scene,planner,nf_mode,seed,solved,iterations,cd_calls,roadmap_length,
/// vertices,edges,web_edges,contact_points,path_length,path_valid.
void write_planning_csv(std::ostream& out, const std::vector<PlanningRow>& rows);

/// Re-checks every edge of the reported path with a fresh checker.
bool revalidate_path(const Scene& scene, const Roadmap& map, const std::vector<VertexId>& path, double resolution);

/// Columns: iteration,neighbor_kind,neighbor_distance,extension_length,contact,q0..q{d-1}
void write_iteration_log(std::ostream& out, const PlanResult& result);

// ---- heatmaps -------------------------------------------------------------

enum class HeatmapMode { vertices, swath };
std::string_view to_string(HeatmapMode mode) noexcept;
HeatmapMode parse_heatmap_mode(std::string_view text);

struct HeatmapGrid {
    std::vector<double> xs;      ///< cell centers along dimension 0
    std::vector<double> ys;      ///< cell centers along dimension 1
    std::vector<double> values;  ///< row-major: values[iy * xs.size() + ix]

    [[nodiscard]] double at(std::size_t ix, std::size_t iy) const { return values[iy * xs.size() + ix]; }
};

/// Distance from each cell center to the vertex set or to the swath (vertices
/// plus live edges), by linear scan. Throws InvalidInput unless dim() == 2.
HeatmapGrid heatmap_grid(const Roadmap& map, std::size_t resolution, HeatmapMode mode);

/// "# x,..." and "# y,..." comment lines, then one CSV row per y.
void write_heatmap_csv(std::ostream& out, const HeatmapGrid& grid);

// ---- self-tests -----------------------------------------------------------

struct OracleCheck {
    SpaceSignature signature;
    std::size_t instances = 0;
    double max_error = 0.0;
};

/// dist_point_segment against the brute-force lift oracle on random instances,
/// half of them drawn near the torus seam.
OracleCheck distance_oracle_check(const SpaceSignature& sig, std::size_t instances, std::uint64_t seed);

struct KnnSelftest {
    std::size_t graphs = 0;
    std::size_t queries = 0;
    std::size_t exact_mismatches = 0;  ///< epsilon = 0 answers differing from the scan
    double max_distance_error = 0.0;
    double epsilon = 0.0;
    std::size_t approx_violations = 0;  ///< rank-i distance above (1+eps) x oracle rank-i

    [[nodiscard]] bool ok() const { return exact_mismatches == 0 && approx_violations == 0; }
};

/// Random graphs (up to max_edges edges, dimension 1..max_dim, mixed t/r)
/// built through insert/remove so the buffer and deletion paths are exercised;
/// every query is answered by the tree and by a linear scan.
KnnSelftest knn_selftest(std::size_t graphs, std::size_t queries_per_graph, double epsilon, std::uint64_t seed,
                         std::size_t max_edges = 500, int max_dim = 6);

}  // namespace edgenn
