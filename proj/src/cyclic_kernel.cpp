#include "edgenn/cyclic_kernel.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "edgenn/error.hpp"

namespace edgenn {

namespace {

// Cut parameters closer than this are merged; cuts this close to 0 or 1 are
// dropped. Keeps zero-length pieces out of the index.
constexpr double kCutMergeTol = 1e-12;

void require_dim(const SpaceSignature& sig, const VecD& v, const char* what) {
    if (v.size() != sig.dim()) {
        throw InvalidInput(std::string(what) + ": expected dimension " + std::to_string(sig.dim()) +
                           ", got " + std::to_string(v.size()));
    }
}

double frac(double x) noexcept {
    double f = x - std::floor(x);
    // x slightly below an integer can round up to exactly 1.
    return f >= 1.0 ? 0.0 : f;
}

// Shortest lifted difference for a rotational coordinate, with a half turn
// resolved to +0.5.
double wrap_delta(double delta) noexcept {
    if (delta > 0.5) delta -= 1.0;
    else if (delta < -0.5) delta += 1.0;
    if (delta == -0.5) delta = 0.5;
    return delta;
}

double interval_gap(double x, double lo, double hi) noexcept {
    if (x < lo) return lo - x;
    if (x > hi) return x - hi;
    return 0.0;
}

}  // namespace

void SpaceSignature::validate() const {
    if (t < 0 || r < 0) throw InvalidInput("signature: negative dimension count");
    if (t + r < 1) throw InvalidInput("signature: t + r must be at least 1");
    if (dim() > kMaxDim) throw InvalidInput("signature: dimension exceeds " + std::to_string(kMaxDim));
    if (trans_lo.size() != static_cast<std::size_t>(t) || trans_hi.size() != static_cast<std::size_t>(t))
        throw InvalidInput("signature: translational bounds must have t entries");
    for (int i = 0; i < t; ++i) {
        if (!(trans_lo[i] < trans_hi[i]))
            throw InvalidInput("signature: bound " + std::to_string(i) + " has lo >= hi");
    }
}

SpaceSignature SpaceSignature::unit(int t, int r) {
    SpaceSignature sig{t, r, VecD(static_cast<std::size_t>(t), 0.0), VecD(static_cast<std::size_t>(t), 1.0)};
    sig.validate();
    return sig;
}

SpaceSignature SpaceSignature::box(const VecD& lo, const VecD& hi, int r) {
    SpaceSignature sig{static_cast<int>(lo.size()), r, lo, hi};
    sig.validate();
    return sig;
}

Aabb Aabb::of(const SubSegment& s) {
    Aabb box{s.a, s.a};
    for (std::size_t i = 0; i < s.a.size(); ++i) {
        box.lo[i] = std::min(s.a[i], s.b[i]);
        box.hi[i] = std::max(s.a[i], s.b[i]);
    }
    return box;
}

Aabb Aabb::empty(std::size_t dim) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return Aabb{VecD(dim, inf), VecD(dim, -inf)};
}

void Aabb::expand(const Aabb& other) {
    for (std::size_t i = 0; i < lo.size(); ++i) {
        lo[i] = std::min(lo[i], other.lo[i]);
        hi[i] = std::max(hi[i], other.hi[i]);
    }
}

CPoint normalize(const SpaceSignature& sig, const VecD& raw) {
    require_dim(sig, raw, "normalize");
    CPoint p{raw};
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i])) throw InvalidInput("normalize: non-finite coordinate " + std::to_string(i));
        if (sig.is_rotational(i)) p.coords[i] = frac(raw[i]);
    }
    return p;
}

double dist_point_point(const SpaceSignature& sig, const CPoint& p, const CPoint& q) {
    require_dim(sig, p.coords, "dist_point_point");
    require_dim(sig, q.coords, "dist_point_point");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = sig.is_rotational(i) ? cyclic_dist_1d(p[i], q[i]) : p[i] - q[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

VecD nearest_lift(const SpaceSignature& sig, const CPoint& q, const CPoint& anchor) {
    require_dim(sig, q.coords, "nearest_lift");
    require_dim(sig, anchor.coords, "nearest_lift");
    VecD out = q.coords;
    for (std::size_t i = static_cast<std::size_t>(sig.t); i < out.size(); ++i) {
        const double delta = q[i] - anchor[i];
        if (delta > 0.5) out[i] -= 1.0;
        else if (delta < -0.5) out[i] += 1.0;
    }
    return out;
}

CSegment geodesic(const SpaceSignature& sig, const CPoint& a, const CPoint& b) {
    require_dim(sig, a.coords, "geodesic");
    require_dim(sig, b.coords, "geodesic");
    CSegment s{a, VecD(a.size()), std::nullopt};
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double delta = b[i] - a[i];
        s.disp[i] = sig.is_rotational(i) ? wrap_delta(delta) : delta;
    }
    return s;
}

CPoint point_at(const SpaceSignature& sig, const CSegment& s, double t) {
    if (t >= 1.0) return normalize(sig, s.lifted_end());
    return normalize(sig, lerp_along(s.origin.coords, s.disp, t));
}

std::vector<SubSegment> split_segment(const SpaceSignature& sig, const CSegment& s) {
    struct Cut {
        double t;
        std::size_t dim;
    };
    std::vector<Cut> cuts;
    for (std::size_t i = static_cast<std::size_t>(sig.t); i < s.disp.size(); ++i) {
        const double o = s.origin[i];
        const double v = s.disp[i];
        if (v == 0.0) continue;
        // Canonical origin and |v| <= 0.5 admit at most one integer crossing.
        const double target = v > 0.0 ? std::floor(o) + 1.0 : std::floor(o);
        const double t = (target - o) / v;
        if (t > kCutMergeTol && t < 1.0 - kCutMergeTol) cuts.push_back({t, i});
    }
    std::sort(cuts.begin(), cuts.end(), [](const Cut& x, const Cut& y) {
        return x.t < y.t || (x.t == y.t && x.dim < y.dim);
    });

    // Group coinciding cuts; every member dimension is snapped to its integer.
    std::vector<std::pair<double, std::vector<std::size_t>>> groups;
    for (const Cut& c : cuts) {
        if (!groups.empty() && c.t - groups.back().first <= kCutMergeTol) {
            groups.back().second.push_back(c.dim);
        } else {
            groups.push_back({c.t, {c.dim}});
        }
    }

    auto point_at_cut = [&](std::size_t g) {
        VecD x = lerp_along(s.origin.coords, s.disp, groups[g].first);
        for (std::size_t dim : groups[g].second) x[dim] = std::round(x[dim]);
        return x;
    };

    std::vector<SubSegment> pieces;
    pieces.reserve(groups.size() + 1);
    const EdgeId parent = s.edge_id.value_or(0);
    VecD a = s.origin.coords;
    double t0 = 0.0;
    for (std::size_t g = 0; g <= groups.size(); ++g) {
        const bool last = g == groups.size();
        VecD b = last ? s.lifted_end() : point_at_cut(g);
        const double t1 = last ? 1.0 : groups[g].first;
        SubSegment piece{a, b, parent, t0, t1};
        for (std::size_t i = static_cast<std::size_t>(sig.t); i < a.size(); ++i) {
            const double shift = std::floor(0.5 * (a[i] + b[i]));
            piece.a[i] -= shift;
            piece.b[i] -= shift;
        }
        pieces.push_back(piece);
        a = b;
        t0 = t1;
    }
    return pieces;
}

EuclideanHit euclidean_point_segment(const VecD& p, const VecD& a, const VecD& b) {
    const VecD v = b - a;
    const double vv = squared_norm(v);
    double t = 0.0;
    if (vv > 0.0) t = std::clamp(dot(p - a, v) / vv, 0.0, 1.0);
    const VecD closest = t == 1.0 ? b : lerp_along(a, v, t);
    return {norm(p - closest), t};
}

Hit dist_point_subsegment(const SpaceSignature& sig, const CPoint& p, const SubSegment& s) {
    const std::size_t d = p.size();
    const VecD v = s.b - s.a;

    // Lift of p whose Voronoi cell (a shifted unit grid) contains s.a.
    VecD lift = p.coords;
    for (std::size_t i = static_cast<std::size_t>(sig.t); i < d; ++i) lift[i] += std::round(s.a[i] - p[i]);

    struct Crossing {
        double t;
        std::size_t dim;
        double step;
    };
    std::array<Crossing, 2 * kMaxDim> crossings{};
    std::size_t n_cross = 0;
    for (std::size_t i = static_cast<std::size_t>(sig.t); i < d; ++i) {
        if (v[i] == 0.0) continue;
        const double step = v[i] > 0.0 ? 1.0 : -1.0;
        double bisector = lift[i] + 0.5 * step;
        double t = (bisector - s.a[i]) / v[i];
        while (t > 0.0 && t < 1.0 && n_cross < crossings.size()) {
            crossings[n_cross++] = {t, i, step};
            bisector += step;
            t = (bisector - s.a[i]) / v[i];
        }
    }
    std::sort(crossings.begin(), crossings.begin() + static_cast<std::ptrdiff_t>(n_cross),
              [](const Crossing& x, const Crossing& y) { return x.t < y.t; });

    EuclideanHit best = euclidean_point_segment(lift, s.a, s.b);
    for (std::size_t c = 0; c < n_cross; ++c) {
        lift[crossings[c].dim] += crossings[c].step;
        const EuclideanHit h = euclidean_point_segment(lift, s.a, s.b);
        if (h.distance < best.distance) best = h;
    }

    const VecD on = best.param == 1.0 ? s.b : lerp_along(s.a, v, best.param);
    return Hit{best.distance, normalize(sig, on), best.param};
}

Hit dist_point_segment(const SpaceSignature& sig, const CPoint& p, const CSegment& s) {
    require_dim(sig, p.coords, "dist_point_segment");
    Hit best{std::numeric_limits<double>::infinity(), {}, 0.0};
    for (const SubSegment& piece : split_segment(sig, s)) {
        Hit h = dist_point_subsegment(sig, p, piece);
        if (h.distance < best.distance) {
            if (h.param <= 0.0) h.param = piece.t0;
            else if (h.param >= 1.0) h.param = piece.t1;
            else h.param = piece.t0 + h.param * (piece.t1 - piece.t0);
            best = h;
        }
    }
    return best;
}

Hit dist_point_segment_oracle(const SpaceSignature& sig, const CPoint& p, const CSegment& s) {
    require_dim(sig, p.coords, "dist_point_segment_oracle");
    if (sig.r > 8) throw InvalidInput("dist_point_segment_oracle: refusing r > 8");
    const VecD a = s.origin.coords;
    const VecD b = s.lifted_end();
    std::size_t combos = 1;
    for (int i = 0; i < sig.r; ++i) combos *= 3;

    EuclideanHit best{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t code = 0; code < combos; ++code) {
        VecD lift = p.coords;
        std::size_t rest = code;
        for (std::size_t i = static_cast<std::size_t>(sig.t); i < lift.size(); ++i) {
            lift[i] += static_cast<double>(rest % 3) - 1.0;
            rest /= 3;
        }
        const EuclideanHit h = euclidean_point_segment(lift, a, b);
        if (h.distance < best.distance) best = h;
    }
    return Hit{best.distance, point_at(sig, s, best.param), best.param};
}

double dist_point_aabb(const SpaceSignature& sig, const CPoint& p, const Aabb& box) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double gap = interval_gap(p[i], box.lo[i], box.hi[i]);
        if (gap > 0.0 && sig.is_rotational(i)) {
            gap = std::min({gap, interval_gap(p[i] + 1.0, box.lo[i], box.hi[i]),
                            interval_gap(p[i] - 1.0, box.lo[i], box.hi[i])});
        }
        sum += gap * gap;
    }
    return std::sqrt(sum);
}

bool segment_aabb_intersect(const SubSegment& s, const Aabb& box) {
    double t_enter = 0.0;
    double t_exit = 1.0;
    for (std::size_t i = 0; i < s.a.size(); ++i) {
        const double v = s.b[i] - s.a[i];
        if (v == 0.0) {
            if (s.a[i] < box.lo[i] || s.a[i] > box.hi[i]) return false;
            continue;
        }
        double t_lo = (box.lo[i] - s.a[i]) / v;
        double t_hi = (box.hi[i] - s.a[i]) / v;
        if (t_lo > t_hi) std::swap(t_lo, t_hi);
        t_enter = std::max(t_enter, t_lo);
        t_exit = std::min(t_exit, t_hi);
        if (t_enter > t_exit) return false;
    }
    return true;
}

}  // namespace edgenn
