#include "edgenn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include "edgenn/error.hpp"
#include "edgenn/format.hpp"

namespace edgenn {

namespace {

double log_alpha(int d) { return std::log(2.0) + 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d); }

// Two-sided 97.5% Student t quantiles, df = 1..30.
double t_quantile_975(std::size_t df) {
    static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                       2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                       2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (df == 0) return std::numeric_limits<double>::infinity();
    return df <= 30 ? table[df - 1] : 1.96;
}

class Normal {
public:
    explicit Normal(std::uint64_t seed) : rng_(seed) {}
    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - rng_.uniform();  // (0, 1]
        const double u2 = rng_.uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    Rng rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::vector<CPoint> uniform_points(const SpaceSignature& sig, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CPoint> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pts.push_back(sample_uniform(sig, rng));
    return pts;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Point with each rotational coordinate pushed near the seam half the time.
CPoint seam_biased(const SpaceSignature& sig, Rng& rng) {
    VecD v = sample_uniform(sig, rng).coords;
    for (std::size_t i = static_cast<std::size_t>(sig.t); i < sig.dim(); ++i)
        if (rng.uniform() < 0.5) v[i] = 0.16 * rng.uniform() - 0.08;
    return normalize(sig, v);
}

CSegment random_segment(const SpaceSignature& sig, Rng& rng, bool near_seam) {
    const CPoint a = near_seam ? seam_biased(sig, rng) : sample_uniform(sig, rng);
    const CPoint b = near_seam ? seam_biased(sig, rng) : sample_uniform(sig, rng);
    CSegment s = geodesic(sig, a, b);
    // Squared shrink factor favors short segments, as in planner roadmaps.
    const double u = rng.uniform();
    s.disp = s.disp * (u * u);
    return s;
}

}  // namespace

// ---- theory ---------------------------------------------------------------

double alpha_surface(int d) {
    if (d < 1) throw InvalidInput("alpha_surface: need d >= 1");
    return std::exp(log_alpha(d));
}

double F_closed(int d) {
    if (d < 2) throw InvalidInput("F_closed: need d >= 2");
    return 0.5 * std::exp(log_alpha(d - 1) + log_alpha(d + 1) - 2.0 * log_alpha(d));
}

MonteCarloEstimate F_monte_carlo(int d, std::size_t samples, std::uint64_t seed) {
    if (d < 2) throw InvalidInput("F_monte_carlo: need d >= 2");
    if (samples < 2) throw InvalidInput("F_monte_carlo: need at least 2 samples");
    Normal normal(seed);
    double f_sum = 0.0, f_sq = 0.0, d_sum = 0.0, d_sq = 0.0;
    std::vector<double> z(static_cast<std::size_t>(d));
    for (std::size_t s = 0; s < samples; ++s) {
        double norm2 = 0.0;
        for (double& zi : z) {
            zi = normal();
            norm2 += zi * zi;
        }
        const double pole = z.back() / std::sqrt(norm2);
        const double f = pole > 0.0 ? std::sqrt(std::max(0.0, 1.0 - pole * pole)) : 0.0;
        const double dist = pole > 0.0 ? f : 1.0;
        f_sum += f;
        f_sq += f * f;
        d_sum += dist;
        d_sq += dist * dist;
    }
    const double n = static_cast<double>(samples);
    MonteCarloEstimate e;
    e.samples = samples;
    e.f = f_sum / n;
    e.delta = d_sum / n;
    e.f_stderr = std::sqrt(std::max(0.0, (f_sq - n * e.f * e.f) / (n - 1.0)) / n);
    e.delta_stderr = std::sqrt(std::max(0.0, (d_sq - n * e.delta * e.delta) / (n - 1.0)) / n);
    return e;
}

std::vector<std::uint64_t> seed_list(std::uint64_t base_seed, std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = base_seed + i;
    return seeds;
}

ScalingFit verify_scaling(int d, const std::vector<std::size_t>& n_grid, std::size_t seeds, std::uint64_t base_seed) {
    if (d < 1) throw InvalidInput("verify_scaling: need d >= 1");
    if (n_grid.size() < 2 || seeds == 0) throw InvalidInput("verify_scaling: need >= 2 grid points and >= 1 seed");
    std::vector<std::size_t> grid = n_grid;
    std::sort(grid.begin(), grid.end());
    if (grid.front() < 2) throw InvalidInput("verify_scaling: grid values must be >= 2");

    const SpaceSignature sig = SpaceSignature::unit(d, 0);
    ScalingFit fit;
    fit.d = d;
    fit.seeds = seeds;
    fit.n_grid = grid;
    fit.mean_length.assign(grid.size(), 0.0);
    for (std::uint64_t seed : seed_list(base_seed, seeds)) {
        const GeometricTree tree = build_geometric_tree(sig, uniform_points(sig, grid.back(), seed), TreeConnector::vertexNN);
        double prefix = 0.0;
        std::size_t g = 0;
        for (std::size_t i = 0; i < grid.back() && g < grid.size(); ++i) {
            prefix += tree.step_lengths[i];
            while (g < grid.size() && grid[g] == i + 1) fit.mean_length[g++] += prefix;
        }
    }
    for (double& m : fit.mean_length) m /= static_cast<double>(seeds);

    const std::size_t m = grid.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        x[i] = std::log(static_cast<double>(grid[i]));
        y[i] = std::log(fit.mean_length[i]);
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ssr += r * r;
    }
    fit.slope_stderr = m > 2 ? std::sqrt(ssr / static_cast<double>(m - 2) / sxx) : 0.0;
    const double half = t_quantile_975(m - 2) * fit.slope_stderr;
    fit.ci_lo = fit.slope - half;
    fit.ci_hi = fit.slope + half;
    return fit;
}

std::pair<double, double> scaling_range(int d) {
    if (d == 2) return {0.45, 0.55};
    if (d == 3) return {0.61, 0.72};
    const double theory = 1.0 - 1.0 / d;
    return {theory - 0.05, theory + 0.05};
}

bool DominanceReport::all_pass() const {
    return std::all_of(records.begin(), records.end(),
                       [](const DominanceRecord& r) { return r.step_violations == 0 && r.tree_length <= r.vertex_length; });
}

double DominanceReport::mean_ratio() const {
    if (records.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (const DominanceRecord& r : records) sum += r.tree_length / r.vertex_length;
    return sum / static_cast<double>(records.size());
}

DominanceReport check_dominance(int d, std::size_t n, std::size_t seeds, std::uint64_t base_seed) {
    const SpaceSignature sig = SpaceSignature::unit(d, 0);
    DominanceReport report;
    report.d = d;
    report.n = n;
    for (std::uint64_t seed : seed_list(base_seed, seeds)) {
        const std::vector<CPoint> pts = uniform_points(sig, n, seed);
        const GeometricTree v = build_geometric_tree(sig, pts, TreeConnector::vertexNN);
        const GeometricTree t = build_geometric_tree(sig, pts, TreeConnector::treeNN);
        DominanceRecord rec{seed, v.total_length, t.total_length, 0};
        for (std::size_t i = 0; i < n; ++i)
            if (t.step_lengths[i] > v.step_lengths[i]) ++rec.step_violations;
        report.records.push_back(rec);
    }
    return report;
}

bool SphereRecord::within_3se() const { return std::abs(mc.f - f_closed) < 3.0 * mc.f_stderr; }

bool SphereRecord::delta_below_one() const { return delta_closed < 1.0 && mc.delta < 1.0; }

bool TheoryReport::sphere_ok() const {
    return std::all_of(sphere.begin(), sphere.end(), [](const SphereRecord& r) { return r.within_3se() && r.delta_below_one(); });
}

bool TheoryReport::scaling_ok() const {
    return std::all_of(scaling.begin(), scaling.end(), [](const ScalingFit& f) {
        const auto [lo, hi] = scaling_range(f.d);
        return f.slope >= lo && f.slope <= hi;
    });
}

bool TheoryReport::dominance_ok() const {
    return std::all_of(dominance.begin(), dominance.end(),
                       [](const DominanceReport& r) { return r.all_pass() && r.mean_ratio() < 1.0; });
}

TheoryReport verify_theory(const TheoryConfig& config) {
    TheoryReport report;
    for (int d : config.sphere_dims) {
        SphereRecord rec;
        rec.d = d;
        rec.f_closed = F_closed(d);
        rec.delta_closed = rec.f_closed + 0.5;
        rec.mc = F_monte_carlo(d, config.mc_samples, config.base_seed + static_cast<std::uint64_t>(d));
        if (d % 2 == 1) rec.reported_bound = 0.5 * (1.0 - 1.0 / (3.0 * ((d - 1) / 2)));
        report.sphere.push_back(rec);
    }
    for (int d : config.scaling_dims) report.scaling.push_back(verify_scaling(d, config.n_grid, config.scaling_seeds, config.base_seed));
    for (int d : config.dominance_dims)
        report.dominance.push_back(check_dominance(d, config.dominance_n, config.dominance_seeds, config.base_seed));
    return report;
}

void write_theory_csv(std::ostream& out, const TheoryReport& report) {
    out << "check,d,n,seed,quantity,value,stderr,target,lo,hi,pass\n";
    auto row = [&](std::string_view check, int d, const std::string& n, const std::string& seed, std::string_view qty, double value,
                   const std::string& se, const std::string& target, const std::string& lo, const std::string& hi,
                   const std::string& pass) {
        out << check << ',' << d << ',' << n << ',' << seed << ',' << qty << ',' << format_double(value) << ',' << se << ','
            << target << ',' << lo << ',' << hi << ',' << pass << '\n';
    };
    auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
    for (const SphereRecord& r : report.sphere) {
        const double band = 3.0 * r.mc.f_stderr;
        row("sphere", r.d, "", "", "F", r.mc.f, format_double(r.mc.f_stderr), format_double(r.f_closed),
            format_double(r.f_closed - band), format_double(r.f_closed + band), flag(r.within_3se()));
        row("sphere", r.d, "", "", "Delta", r.mc.delta, format_double(r.mc.delta_stderr), format_double(r.delta_closed), "", "1",
            flag(r.delta_below_one()));
        if (r.reported_bound) row("sphere", r.d, "", "", "reported_bound", *r.reported_bound, "", opt(r.f_closed), "", "", "");
    }
    for (const ScalingFit& f : report.scaling) {
        const auto [lo, hi] = scaling_range(f.d);
        for (std::size_t i = 0; i < f.n_grid.size(); ++i)
            row("scaling", f.d, std::to_string(f.n_grid[i]), "", "mean_length", f.mean_length[i], "", "", "", "", "");
        row("scaling", f.d, "", "", "slope", f.slope, format_double(f.slope_stderr), format_double(1.0 - 1.0 / f.d),
            format_double(lo), format_double(hi), flag(f.slope >= lo && f.slope <= hi));
        row("scaling", f.d, "", "", "slope_ci95", f.slope, "", "", format_double(f.ci_lo), format_double(f.ci_hi), "");
    }
    for (const DominanceReport& r : report.dominance) {
        const std::string n = std::to_string(r.n);
        for (const DominanceRecord& rec : r.records)
            row("dominance", r.d, n, std::to_string(rec.seed), "ratio", rec.tree_length / rec.vertex_length,
                "", "", "", "1", flag(rec.step_violations == 0 && rec.tree_length <= rec.vertex_length));
        row("dominance", r.d, n, "", "mean_ratio", r.mean_ratio(), "", "", "", "1", flag(r.all_pass() && r.mean_ratio() < 1.0));
    }
}

// ---- experiments ----------------------------------------------------------

std::string_view to_string(PlannerKind kind) noexcept {
    switch (kind) {
        case PlannerKind::rrt: return "rrt";
        case PlannerKind::prm: return "prm";
        case PlannerKind::cobweb: return "cobweb";
        case PlannerKind::geometric: return "geometric";
    }
    return "?";
}

PlannerKind parse_planner(std::string_view text) {
    for (PlannerKind k : {PlannerKind::rrt, PlannerKind::prm, PlannerKind::cobweb, PlannerKind::geometric})
        if (text == to_string(k)) return k;
    throw InvalidInput("unknown planner '" + std::string(text) + "' (expected rrt, prm, cobweb or geometric)");
}

std::vector<LengthRow> run_roadmap_length(const ExperimentConfig& config) {
    const Scene scene = resolve_scene(config.scene);
    if (!scene.boxes.empty() || !scene.polygons.empty())
        throw InvalidInput("roadmap-length runs need an obstacle-free scene, got '" + scene.name + "'");
    if (config.planner == PlannerKind::cobweb) throw InvalidInput("roadmap-length supports prm, rrt and geometric");
    if (config.budget == 0) throw InvalidInput("roadmap-length budget must be positive");

    std::vector<LengthRow> rows;
    for (std::uint64_t seed : seed_list(config.base_seed, config.seeds)) {
        for (NfMode mode : config.modes) {
            LengthRow row;
            row.scene = scene.name;
            row.planner = config.planner;
            row.mode = mode;
            row.seed = seed;
            row.budget = config.budget;
            row.k = config.planner == PlannerKind::prm ? config.params.k : 1;
            if (config.planner == PlannerKind::geometric) {
                const auto connector = mode == NfMode::vertexNN ? TreeConnector::vertexNN : TreeConnector::treeNN;
                const GeometricTree tree =
                    build_geometric_tree(scene.signature, uniform_points(scene.signature, config.budget, seed), connector);
                row.vertices = tree.vertex_count;
                row.edges = tree.edge_count;
                row.total_length = tree.total_length;
            } else {
                PlannerParams p = config.params;
                p.seed = seed;
                p.stop_when_solved = false;
                p.keep_log = false;
                PlanResult r;
                if (config.planner == PlannerKind::prm) {
                    p.node_budget = config.budget;
                    p.max_iterations = std::numeric_limits<std::size_t>::max();
                    r = prm(scene, mode, p);
                } else {
                    p.max_iterations = config.budget;
                    r = rrt(scene, mode, p);
                }
                row.vertices = r.roadmap->vertex_count();
                row.edges = r.roadmap->live_edge_count();
                row.cd_calls = r.cd_calls;
                row.total_length = r.roadmap_length;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

namespace {

template <typename Row>
std::vector<NfMode> modes_in_order(const std::vector<Row>& rows) {
    std::vector<NfMode> modes;
    for (const Row& r : rows)
        if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
    return modes;
}

}  // namespace

void write_length_csv(std::ostream& out, const std::vector<LengthRow>& rows) {
    out << "kind,scene,planner,k,nf_mode,seed,budget,vertices,edges,cd_calls,total_length\n";
    for (const LengthRow& r : rows)
        out << "run," << r.scene << ',' << to_string(r.planner) << ',' << r.k << ',' << to_string(r.mode) << ',' << r.seed << ','
            << r.budget << ',' << r.vertices << ',' << r.edges << ',' << r.cd_calls << ',' << format_double(r.total_length) << '\n';
    for (NfMode mode : modes_in_order(rows)) {
        double n = 0.0, v = 0.0, e = 0.0, cd = 0.0, len = 0.0;
        const LengthRow* first = nullptr;
        for (const LengthRow& r : rows) {
            if (r.mode != mode) continue;
            if (!first) first = &r;
            n += 1.0;
            v += static_cast<double>(r.vertices);
            e += static_cast<double>(r.edges);
            cd += static_cast<double>(r.cd_calls);
            len += r.total_length;
        }
        out << "mean," << first->scene << ',' << to_string(first->planner) << ',' << first->k << ',' << to_string(mode) << ",,"
            << first->budget << ',' << format_double(v / n) << ',' << format_double(e / n) << ',' << format_double(cd / n) << ','
            << format_double(len / n) << '\n';
    }
}

double length_ratio(const std::vector<LengthRow>& rows, NfMode numer, NfMode denom) {
    double a = 0.0, b = 0.0;
    for (const LengthRow& r : rows) {
        if (r.mode == numer) a += r.total_length;
        if (r.mode == denom) b += r.total_length;
    }
    return a / b;
}

bool revalidate_path(const Scene& scene, const Roadmap& map, const std::vector<VertexId>& path, double resolution) {
    if (path.empty()) return false;
    ValidityChecker checker(scene);
    if (!checker.is_valid(map.vertex(path.front()))) return false;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const VertexId u = path[i], w = path[i + 1];
        const RoadmapEdge* hit = nullptr;
        for (EdgeId e : map.incident(u)) {
            const RoadmapEdge& edge = map.edge(e);
            if (edge.alive && ((edge.u == u && edge.v == w) || (edge.u == w && edge.v == u))) hit = &edge;
        }
        if (!hit) return false;
        // Walk from u so the check includes w itself.
        CSegment seg = hit->segment;
        if (hit->u != u) seg = CSegment{map.vertex(u), hit->segment.disp * -1.0, std::nullopt};
        if (!segment_valid(scene.signature, seg, resolution, checker)) return false;
    }
    return true;
}

std::vector<PlanningRow> run_planning(const ExperimentConfig& config, const RunObserver& observer) {
    const Scene scene = resolve_scene(config.scene);
    const std::vector<NfMode> modes =
        config.planner == PlannerKind::cobweb ? std::vector<NfMode>{NfMode::edgeNN} : config.modes;
    if (config.planner == PlannerKind::geometric) throw InvalidInput("planning runs support rrt, prm and cobweb");

    std::vector<PlanningRow> rows;
    for (std::uint64_t seed : seed_list(config.base_seed, config.seeds)) {
        for (NfMode mode : modes) {
            PlannerParams p = config.params;
            p.seed = seed;
            PlanResult r;
            switch (config.planner) {
                case PlannerKind::rrt: r = rrt(scene, mode, p); break;
                case PlannerKind::prm: r = prm(scene, mode, p); break;
                default: r = cobweb_rrg(scene, p); break;
            }
            PlanningRow row;
            row.scene = scene.name;
            row.planner = config.planner;
            row.mode = mode;
            row.seed = seed;
            row.solved = r.success;
            row.iterations = r.iterations;
            row.cd_calls = r.cd_calls;
            row.roadmap_length = r.roadmap_length;
            row.vertices = r.roadmap->vertex_count();
            row.edges = r.roadmap->live_edge_count();
            row.web_edges = r.roadmap->count_edges(EdgeTag::web);
            row.contact_points = r.contact_points;
            if (r.success) {
                row.path_length = r.roadmap->path_length(r.path);
                row.path_revalidated = revalidate_path(scene, *r.roadmap, r.path, p.cd_resolution);
            }
            if (observer) observer(row, r);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_planning_csv(std::ostream& out, const std::vector<PlanningRow>& rows) {
    out << "kind,scene,planner,nf_mode,seed,solved,iterations,cd_calls,roadmap_length,vertices,edges,web_edges,contact_points,"
           "path_length,path_valid\n";
    for (const PlanningRow& r : rows)
        out << "run," << r.scene << ',' << to_string(r.planner) << ',' << to_string(r.mode) << ',' << r.seed << ','
            << (r.solved ? 1 : 0) << ',' << r.iterations << ',' << r.cd_calls << ',' << format_double(r.roadmap_length) << ','
            << r.vertices << ',' << r.edges << ',' << r.web_edges << ',' << r.contact_points << ','
            << format_double(r.path_length) << ',' << (r.path_revalidated ? 1 : 0) << '\n';
    for (NfMode mode : modes_in_order(rows)) {
        std::vector<double> sums(10, 0.0);
        double n = 0.0;
        const PlanningRow* first = nullptr;
        for (const PlanningRow& r : rows) {
            if (r.mode != mode) continue;
            if (!first) first = &r;
            n += 1.0;
            const double vals[] = {r.solved ? 1.0 : 0.0,
                                   static_cast<double>(r.iterations),
                                   static_cast<double>(r.cd_calls),
                                   r.roadmap_length,
                                   static_cast<double>(r.vertices),
                                   static_cast<double>(r.edges),
                                   static_cast<double>(r.web_edges),
                                   static_cast<double>(r.contact_points),
                                   r.path_length,
                                   r.path_revalidated ? 1.0 : 0.0};
            for (std::size_t i = 0; i < 10; ++i) sums[i] += vals[i];
        }
        out << "mean," << first->scene << ',' << to_string(first->planner) << ',' << to_string(mode) << ',';
        for (std::size_t i = 0; i < 10; ++i) out << ',' << format_double(sums[i] / n);
        out << '\n';
    }
}

void write_iteration_log(std::ostream& out, const PlanResult& result) {
    const std::size_t d = result.log.empty() ? 0 : result.log.front().sample.size();
    out << "iteration,neighbor_kind,neighbor_distance,extension_length,contact";
    for (std::size_t i = 0; i < d; ++i) out << ",q" << i;
    out << '\n';
    for (const IterationRecord& rec : result.log) {
        out << rec.iteration << ',' << (rec.neighbor_kind == NeighborResult::Kind::vertex ? "vertex" : "edge") << ','
            << format_double(rec.neighbor_distance) << ',' << format_double(rec.extension_length) << ',' << (rec.contact ? 1 : 0);
        for (std::size_t i = 0; i < d; ++i) out << ',' << format_double(rec.sample[i]);
        out << '\n';
    }
}

// ---- heatmaps -------------------------------------------------------------

std::string_view to_string(HeatmapMode mode) noexcept { return mode == HeatmapMode::vertices ? "vertices" : "swath"; }

HeatmapMode parse_heatmap_mode(std::string_view text) {
    if (text == "vertices") return HeatmapMode::vertices;
    if (text == "swath") return HeatmapMode::swath;
    throw InvalidInput("unknown heatmap mode '" + std::string(text) + "' (expected vertices or swath)");
}

HeatmapGrid heatmap_grid(const Roadmap& map, std::size_t resolution, HeatmapMode mode) {
    const SpaceSignature& sig = map.signature();
    if (sig.dim() != 2) throw InvalidInput("heatmap_grid: need a 2-D signature");
    if (resolution == 0) throw InvalidInput("heatmap_grid: resolution must be positive");
    if (map.vertex_count() == 0) throw InvalidInput("heatmap_grid: roadmap has no vertices");

    auto centers = [&](std::size_t dim) {
        const double lo = sig.is_rotational(dim) ? 0.0 : sig.trans_lo[dim];
        const double hi = sig.is_rotational(dim) ? 1.0 : sig.trans_hi[dim];
        std::vector<double> c(resolution);
        for (std::size_t i = 0; i < resolution; ++i) c[i] = lo + (static_cast<double>(i) + 0.5) * (hi - lo) / static_cast<double>(resolution);
        return c;
    };
    HeatmapGrid grid;
    grid.xs = centers(0);
    grid.ys = centers(1);
    grid.values.resize(resolution * resolution);
    const std::vector<EdgeId> edges = mode == HeatmapMode::swath ? map.live_edges() : std::vector<EdgeId>{};
    for (std::size_t iy = 0; iy < resolution; ++iy) {
        for (std::size_t ix = 0; ix < resolution; ++ix) {
            const CPoint p = normalize(sig, VecD{grid.xs[ix], grid.ys[iy]});
            double best = std::numeric_limits<double>::infinity();
            for (VertexId v = 0; v < map.vertex_count(); ++v) best = std::min(best, dist_point_point(sig, p, map.vertex(v)));
            for (EdgeId e : edges) best = std::min(best, dist_point_segment(sig, p, map.edge(e).segment).distance);
            grid.values[iy * resolution + ix] = best;
        }
    }
    return grid;
}

void write_heatmap_csv(std::ostream& out, const HeatmapGrid& grid) {
    auto line = [&](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_double(v[i]);
        out << '\n';
    };
    out << "# x,";
    line(grid.xs);
    out << "# y,";
    line(grid.ys);
    for (std::size_t iy = 0; iy < grid.ys.size(); ++iy)
        line(std::vector<double>(grid.values.begin() + static_cast<std::ptrdiff_t>(iy * grid.xs.size()),
                                 grid.values.begin() + static_cast<std::ptrdiff_t>((iy + 1) * grid.xs.size())));
}

// ---- self-tests -----------------------------------------------------------

OracleCheck distance_oracle_check(const SpaceSignature& sig, std::size_t instances, std::uint64_t seed) {
    sig.validate();
    Rng rng(seed);
    OracleCheck check{sig, instances, 0.0};
    for (std::size_t i = 0; i < instances; ++i) {
        const bool seam = i % 2 == 1;
        const CPoint p = seam ? seam_biased(sig, rng) : sample_uniform(sig, rng);
        const CSegment s = random_segment(sig, rng, seam);
        const double fast = dist_point_segment(sig, p, s).distance;
        const double slow = dist_point_segment_oracle(sig, p, s).distance;
        check.max_error = std::max(check.max_error, std::abs(fast - slow));
    }
    return check;
}

KnnSelftest knn_selftest(std::size_t graphs, std::size_t queries_per_graph, double epsilon, std::uint64_t seed,
                         std::size_t max_edges, int max_dim) {
    if (max_dim < 1 || max_dim > 8) throw InvalidInput("knn_selftest: max_dim must be in [1, 8]");
    if (max_edges == 0) throw InvalidInput("knn_selftest: max_edges must be positive");
    Rng rng(seed);
    KnnSelftest out;
    out.epsilon = epsilon;
    constexpr double kTol = 1e-9;

    for (std::size_t g = 0; g < graphs; ++g) {
        const int d = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_dim));
        const int r = static_cast<int>(rng.next() % static_cast<std::uint64_t>(d + 1));
        VecD lo(static_cast<std::size_t>(d - r)), hi(static_cast<std::size_t>(d - r));
        for (std::size_t i = 0; i < lo.size(); ++i) {
            lo[i] = -5.0 * rng.uniform();
            hi[i] = lo[i] + 1.0 + 9.0 * rng.uniform();
        }
        const SpaceSignature sig = SpaceSignature::box(lo, hi, r);
        SegmentTree exact(sig, TreeParams{8, 64, 0.9, 0.0});
        SegmentTree approx(sig, TreeParams{8, 64, 0.9, epsilon});
        std::map<EdgeId, CSegment> alive;

        const std::size_t m = 1 + rng.next() % max_edges;
        for (EdgeId id = 0; id < m; ++id) {
            const CSegment s = random_segment(sig, rng, rng.uniform() < 0.3);
            exact.insert(id, s);
            approx.insert(id, s);
            alive.emplace(id, s);
        }
        // Delete about a tenth, then refill a few so some answers come from the buffer.
        for (EdgeId id = 0; id < m; ++id) {
            if (rng.uniform() < 0.1) {
                exact.remove(id);
                approx.remove(id);
                alive.erase(id);
            }
        }
        for (EdgeId id = m; id < m + m / 20; ++id) {
            const CSegment s = random_segment(sig, rng, false);
            exact.insert(id, s);
            approx.insert(id, s);
            alive.emplace(id, s);
        }

        for (std::size_t q = 0; q < queries_per_graph; ++q) {
            ++out.queries;
            const CPoint p = q % 2 ? seam_biased(sig, rng) : sample_uniform(sig, rng);
            const std::size_t k = 1 + rng.next() % 10;
            std::vector<std::pair<double, EdgeId>> oracle;
            std::map<EdgeId, double> oracle_of;
            for (const auto& [id, s] : alive) {
                const double dist = dist_point_segment_oracle(sig, p, s).distance;
                oracle.emplace_back(dist, id);
                oracle_of[id] = dist;
            }
            std::sort(oracle.begin(), oracle.end());
            const std::size_t want = std::min(k, oracle.size());

            const std::vector<Neighbor> got = exact.knn(p, k);
            bool mismatch = got.size() != want;
            for (std::size_t i = 0; !mismatch && i < want; ++i) {
                const double err = std::abs(got[i].distance - oracle[i].first);
                out.max_distance_error = std::max(out.max_distance_error, err);
                // A different id is fine only when it ties the oracle's k-th distance.
                if (err > kTol || std::abs(oracle_of[got[i].edge_id] - got[i].distance) > kTol) mismatch = true;
                const bool in_oracle = std::any_of(oracle.begin(), oracle.begin() + static_cast<std::ptrdiff_t>(want),
                                                   [&](const auto& o) { return o.second == got[i].edge_id; });
                if (!in_oracle && std::abs(got[i].distance - oracle[want - 1].first) > kTol) mismatch = true;
            }
            if (mismatch) ++out.exact_mismatches;

            const std::vector<Neighbor> near = approx.knn(p, k);
            bool violated = near.size() != want;
            for (std::size_t i = 0; !violated && i < want; ++i)
                if (near[i].distance > (1.0 + epsilon) * oracle[i].first + 1e-12) violated = true;
            if (violated) ++out.approx_violations;
        }
        ++out.graphs;
    }
    return out;
}

}  // namespace edgenn
