// edgenn: experiment driver. CSV goes to --out (stdout by default); human
// summaries go to stderr. Exit codes: 0 ok, 1 error, 2 a checked criterion failed.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "edgenn/error.hpp"
#include "edgenn/format.hpp"
#include "edgenn/harness.hpp"

namespace {

using namespace edgenn;

constexpr int kExitFailed = 2;

struct Common {
    std::size_t seeds = 50;
    std::uint64_t base_seed = 1;
    std::string out = "-";
};

struct ParamFlags {
    PlannerParams params;
    double epsilon = 0.0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seeds", c.seeds, "Number of paired seeds")->check(CLI::PositiveNumber);
    cmd->add_option("--base-seed", c.base_seed, "First seed; runs use base, base+1, ...");
    cmd->add_option("--out", c.out, "Output CSV path, '-' for stdout");
}

void add_params(CLI::App* cmd, ParamFlags& f) {
    PlannerParams& p = f.params;
    cmd->add_option("--k", p.k, "PRM neighbors / cobweb contact connections")->check(CLI::PositiveNumber);
    cmd->add_option("--min-ext", p.min_ext, "Shortest kept extension");
    cmd->add_option("--max-ext", p.max_ext, "Longest extension");
    cmd->add_option("--cd-resolution", p.cd_resolution, "Validity-check step along geodesics");
    cmd->add_option("--goal-bias-period", p.goal_bias_period, "Sample the goal every N iterations (0 = never)");
    cmd->add_option("--goal-radius", p.goal_connect_radius, "Try connecting to the goal within this distance");
    cmd->add_option("--max-iterations", p.max_iterations, "Iteration (PRM: round) budget");
    cmd->add_option("--node-budget", p.node_budget, "PRM: stop after this many sampled nodes (0 = unlimited)");
    cmd->add_option("--epsilon", f.epsilon, "Approximation factor for edge kNN queries")->check(CLI::NonNegativeNumber);
}

std::vector<NfMode> parse_modes(const std::vector<std::string>& names) {
    std::vector<NfMode> modes;
    for (const std::string& n : names) {
        if (n == "both") {
            modes = {NfMode::vertexNN, NfMode::edgeNN};
            continue;
        }
        const NfMode m = parse_nf_mode(n);
        if (std::find(modes.begin(), modes.end(), m) == modes.end()) modes.push_back(m);
    }
    if (modes.empty()) throw InvalidInput("--nf: need at least one mode");
    return modes;
}

// Builds the CSV in memory, then writes it in one go so a failed run leaves no partial file.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
    std::ostringstream text;
    write(text);
    if (path == "-" || path.empty()) {
        std::cout << text.str() << std::flush;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
    file << text.str();
    if (!file) throw std::runtime_error("write to '" + path + "' failed");
}

int cmd_knn_selftest(std::size_t graphs, std::size_t queries, double epsilon, std::size_t instances, const Common& c) {
    const KnnSelftest k = knn_selftest(graphs, queries, epsilon, c.base_seed);
    std::cerr << "knn: " << k.graphs << " graphs, " << k.queries << " queries, exact mismatches " << k.exact_mismatches
              << ", max distance error " << k.max_distance_error << ", (1+" << epsilon << ") violations " << k.approx_violations
              << '\n';
    bool ok = k.ok();
    std::vector<OracleCheck> checks;
    for (const SpaceSignature& sig : {SpaceSignature::unit(0, 2), SpaceSignature::unit(0, 3), SpaceSignature::unit(1, 1),
                                      SpaceSignature::unit(2, 1), SpaceSignature::unit(3, 3)}) {
        checks.push_back(distance_oracle_check(sig, instances, c.base_seed));
        std::cerr << "distance oracle t=" << sig.t << " r=" << sig.r << ": max error " << checks.back().max_error << '\n';
        ok = ok && checks.back().max_error < 1e-12;
    }
    emit(c.out, [&](std::ostream& o) {
        o << "check,t,r,count,max_error,violations,pass\n";
        o << "knn_exact,,," << k.queries << ',' << format_double(k.max_distance_error) << ',' << k.exact_mismatches << ','
          << (k.exact_mismatches == 0) << '\n';
        o << "knn_approx,,," << k.queries << ",," << k.approx_violations << ',' << (k.approx_violations == 0) << '\n';
        for (const OracleCheck& oc : checks)
            o << "distance_oracle," << oc.signature.t << ',' << oc.signature.r << ',' << oc.instances << ','
              << format_double(oc.max_error) << ",," << (oc.max_error < 1e-12) << '\n';
    });
    return ok ? 0 : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge-nearest-neighbor planning experiments"};
    app.require_subcommand(1);

    Common common;
    ParamFlags flags;
    std::string scene = "empty_box";
    std::string planner = "rrt";
    std::vector<std::string> nf{"both"};

    auto* knn = app.add_subcommand("knn-selftest", "Index and distance kernel against brute-force oracles");
    std::size_t graphs = 50, queries = 200, instances = 10000;
    double knn_epsilon = 0.05;
    knn->add_option("--graphs", graphs, "Random graphs")->check(CLI::PositiveNumber);
    knn->add_option("--queries", queries, "Queries per graph")->check(CLI::PositiveNumber);
    knn->add_option("--epsilon", knn_epsilon, "Approximate-query factor to audit")->check(CLI::NonNegativeNumber);
    knn->add_option("--instances", instances, "Distance-oracle instances per signature")->check(CLI::PositiveNumber);
    knn->add_option("--base-seed", common.base_seed, "Seed");
    knn->add_option("--out", common.out, "Output CSV path, '-' for stdout");

    auto* length = app.add_subcommand("bench-roadmap-length", "Roadmap length in obstacle-free scenes, paired seeds");
    std::string length_planner = "prm";
    std::size_t budget = 500;
    length->add_option("--scene", scene, "Obstacle-free builtin spec or scene JSON")->capture_default_str();
    length->add_option("--planner", length_planner, "prm | rrt | geometric")->capture_default_str();
    length->add_option("--nf", nf, "vertex, edge or both (comma separated)")->delimiter(',');
    length->add_option("--budget", budget, "PRM nodes, RRT iterations or tree points")->check(CLI::PositiveNumber);
    add_common(length, common);
    add_params(length, flags);

    auto* planning = app.add_subcommand("bench-planning", "Planner runs on a scene, paired seeds");
    std::string log_dir, roadmap_dir;
    planning->add_option("--scene", scene, "Builtin spec (e.g. wall_with_hole:0.9) or scene JSON")->capture_default_str();
    planning->add_option("--planner", planner, "rrt | prm | cobweb")->capture_default_str();
    planning->add_option("--nf", nf, "vertex, edge or both (comma separated)")->delimiter(',');
    planning->add_option("--log-dir", log_dir, "Write per-iteration logs here");
    planning->add_option("--roadmap-dir", roadmap_dir, "Write final roadmaps here");
    add_common(planning, common);
    add_params(planning, flags);

    auto* theory = app.add_subcommand("verify-theory", "Sphere constant, greedy-tree scaling and dominance checks");
    TheoryConfig tc;
    theory->add_option("--samples", tc.mc_samples, "Monte-Carlo directions per dimension")->check(CLI::PositiveNumber);
    theory->add_option("--sphere-dims", tc.sphere_dims, "Dimensions for the sphere constant")->delimiter(',');
    theory->add_option("--scaling-dims", tc.scaling_dims, "Dimensions for the scaling fit")->delimiter(',');
    theory->add_option("--n-grid", tc.n_grid, "Tree sizes for the scaling fit")->delimiter(',');
    theory->add_option("--seeds", tc.scaling_seeds, "Seeds for the scaling fit")->check(CLI::PositiveNumber);
    theory->add_option("--dominance-dims", tc.dominance_dims, "Dimensions for the dominance check")->delimiter(',');
    theory->add_option("--dominance-n", tc.dominance_n, "Points per dominance run")->check(CLI::PositiveNumber);
    theory->add_option("--dominance-seeds", tc.dominance_seeds, "Seeds for the dominance check")->check(CLI::PositiveNumber);
    theory->add_option("--base-seed", tc.base_seed, "First seed");
    theory->add_option("--out", common.out, "Output CSV path, '-' for stdout");

    auto* heat = app.add_subcommand("heatmap", "Nearest-distance grid of a 2-D roadmap");
    std::string roadmap_file, heat_mode = "swath";
    std::size_t resolution = 100;
    heat->add_option("--roadmap", roadmap_file, "Roadmap text file")->required()->check(CLI::ExistingFile);
    heat->add_option("--mode", heat_mode, "vertices | swath")->capture_default_str();
    heat->add_option("--resolution", resolution, "Cells per axis")->check(CLI::PositiveNumber);
    heat->add_option("--out", common.out, "Output CSV path, '-' for stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*knn) return cmd_knn_selftest(graphs, queries, knn_epsilon, instances, common);

        ExperimentConfig cfg;
        cfg.scene = scene;
        cfg.seeds = common.seeds;
        cfg.base_seed = common.base_seed;
        cfg.params = flags.params;
        cfg.params.tree.epsilon = flags.epsilon;
        cfg.params.validate();

        if (*length) {
            cfg.planner = parse_planner(length_planner);
            cfg.modes = parse_modes(nf);
            cfg.budget = budget;
            const auto rows = run_roadmap_length(cfg);
            emit(common.out, [&](std::ostream& o) { write_length_csv(o, rows); });
            if (cfg.modes.size() == 2)
                std::cerr << "length ratio edgeNN/vertexNN: " << length_ratio(rows, NfMode::edgeNN, NfMode::vertexNN) << '\n';
            return 0;
        }
        if (*planning) {
            cfg.planner = parse_planner(planner);
            cfg.modes = parse_modes(nf);
            cfg.params.keep_log = !log_dir.empty();
            for (const std::string& dir : {log_dir, roadmap_dir})
                if (!dir.empty()) std::filesystem::create_directories(dir);
            const auto rows = run_planning(cfg, [&](const PlanningRow& row, const PlanResult& r) {
                const std::string stem = std::string(to_string(row.planner)) + "_" + std::string(to_string(row.mode)) + "_" +
                                         std::to_string(row.seed);
                if (!log_dir.empty()) {
                    std::ofstream f(std::filesystem::path(log_dir) / (stem + ".csv"));
                    write_iteration_log(f, r);
                }
                if (!roadmap_dir.empty()) {
                    std::ofstream f(std::filesystem::path(roadmap_dir) / (stem + ".roadmap"));
                    r.roadmap->write(f);
                }
            });
            emit(common.out, [&](std::ostream& o) { write_planning_csv(o, rows); });
            std::size_t solved = 0;
            for (const PlanningRow& r : rows) solved += r.solved;
            std::cerr << "solved " << solved << "/" << rows.size() << " runs\n";
            return 0;
        }
        if (*theory) {
            const TheoryReport report = verify_theory(tc);
            emit(common.out, [&](std::ostream& o) { write_theory_csv(o, report); });
            std::cerr << "sphere constant: " << (report.sphere_ok() ? "ok" : "FAILED") << '\n'
                      << "scaling slopes: " << (report.scaling_ok() ? "ok" : "FAILED") << '\n'
                      << "dominance: " << (report.dominance_ok() ? "ok" : "FAILED") << '\n';
            return report.sphere_ok() && report.scaling_ok() && report.dominance_ok() ? 0 : kExitFailed;
        }
        if (*heat) {
            std::ifstream in(roadmap_file);
            const Roadmap map = Roadmap::read(in, NfMode::vertexNN);
            const HeatmapGrid grid = heatmap_grid(map, resolution, parse_heatmap_mode(heat_mode));
            emit(common.out, [&](std::ostream& o) { write_heatmap_csv(o, grid); });
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
