#pragma once

// Distance and decomposition primitives for the mixed space R^t x T^r.
//
// Rotational coordinates are the last r coordinates of every vector and have
// period 1. Canonical points keep them in [0, 1). Segments are stored in the
// universal cover as an origin plus a lifted displacement; before they enter
// Euclidean subroutines they are cut into SubSegments that each lie inside a
// single tile of the integer grid.

#include <cstdint>
#include <optional>
#include <vector>

#include "edgenn/vec.hpp"

namespace edgenn {

using EdgeId = std::uint64_t;

struct SpaceSignature {
    int t = 0;  ///< translational dimensions
    int r = 0;  ///< rotational dimensions
    VecD trans_lo;  ///< size t
    VecD trans_hi;  ///< size t

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(t + r); }
    [[nodiscard]] bool is_rotational(std::size_t i) const noexcept {
        return i >= static_cast<std::size_t>(t);
    }

    /// Throws InvalidInput unless t + r in [1, kMaxDim] and every translational
    /// bound has lo < hi.
    void validate() const;

    /// Unit box [0,1]^t x T^r.
    static SpaceSignature unit(int t, int r);
    static SpaceSignature box(const VecD& lo, const VecD& hi, int r);

    friend bool operator==(const SpaceSignature&, const SpaceSignature&) = default;
};

/// A configuration with rotational coordinates in [0, 1).
struct CPoint {
    VecD coords;

    [[nodiscard]] std::size_t size() const noexcept { return coords.size(); }
    double operator[](std::size_t i) const noexcept { return coords[i]; }

    friend bool operator==(const CPoint&, const CPoint&) = default;
};

/// Geodesic in the cover: origin -> origin + disp. Rotational components of
/// disp lie in [-0.5, 0.5] with an exact half-turn stored as +0.5.
struct CSegment {
    CPoint origin;
    VecD disp;
    std::optional<EdgeId> edge_id;

    [[nodiscard]] double length() const noexcept { return norm(disp); }
    [[nodiscard]] VecD lifted_end() const noexcept { return origin.coords + disp; }
};

/// Wrap-free piece of a CSegment, translated into the tile [0,1]^r.
struct SubSegment {
    VecD a;
    VecD b;
    EdgeId parent_edge = 0;
    double t0 = 0.0;  ///< parent parameter at a
    double t1 = 1.0;  ///< parent parameter at b
};

struct Aabb {
    VecD lo;
    VecD hi;

    static Aabb of(const SubSegment& s);
    static Aabb empty(std::size_t dim);
    void expand(const Aabb& other);
    [[nodiscard]] double extent(std::size_t i) const noexcept { return hi[i] - lo[i]; }
};

struct Hit {
    double distance = 0.0;
    CPoint point;        ///< closest point on the target, canonical
    double param = 0.0;  ///< parameter along the target segment, 0 for points
};

/// Maps rotational coordinates to their fractional part. Throws InvalidInput on
/// non-finite input or a dimension mismatch.
CPoint normalize(const SpaceSignature& sig, const VecD& raw);

/// Shortest distance between two canonical angles on the unit circle.
inline double cyclic_dist_1d(double a, double b) noexcept {
    const double delta = std::abs(b - a);
    return delta < 1.0 - delta ? delta : 1.0 - delta;
}

double dist_point_point(const SpaceSignature& sig, const CPoint& p, const CPoint& q);

/// Representative of q in the cover closest to anchor. Each rotational
/// coordinate moves by one of {-1, 0, +1}; ties keep the smaller shift.
VecD nearest_lift(const SpaceSignature& sig, const CPoint& q, const CPoint& anchor);

CSegment geodesic(const SpaceSignature& sig, const CPoint& a, const CPoint& b);

/// Point at parameter t along the segment, canonicalized.
CPoint point_at(const SpaceSignature& sig, const CSegment& s, double t);

/// Cuts a geodesic at its crossings of the integer rotational hyperplanes.
/// Pieces come back in parameter order, each shifted into [0,1]^r.
std::vector<SubSegment> split_segment(const SpaceSignature& sig, const CSegment& s);

/// Cyclic distance from p to a tile-contained piece, visiting the Voronoi
/// cells of the lifts of p that the piece crosses. `param` is local to the
/// piece.
Hit dist_point_subsegment(const SpaceSignature& sig, const CPoint& p, const SubSegment& s);

/// Cyclic distance from p to a full geodesic; `param` refers to the parent.
Hit dist_point_segment(const SpaceSignature& sig, const CPoint& p, const CSegment& s);

/// Reference answer by exhaustive enumeration of the 3^r lifts of p against
/// the lifted segment. Refuses r > 8.
Hit dist_point_segment_oracle(const SpaceSignature& sig, const CPoint& p, const CSegment& s);

/// Lower bound on the cyclic distance from p to anything inside the box.
double dist_point_aabb(const SpaceSignature& sig, const CPoint& p, const Aabb& box);

/// Closed-box slab test on Euclidean coordinates.
bool segment_aabb_intersect(const SubSegment& s, const Aabb& box);

/// Euclidean point-to-segment distance; returns (distance, clamped parameter).
struct EuclideanHit {
    double distance;
    double param;
};
EuclideanHit euclidean_point_segment(const VecD& p, const VecD& a, const VecD& b);

}  // namespace edgenn
