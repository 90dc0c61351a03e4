#pragma once

#include <cstdint>
#include <random>

#include "edgenn/cyclic_kernel.hpp"

namespace edgenn::testing {

inline CPoint random_point(const SpaceSignature& sig, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    VecD v(sig.dim());
    for (std::size_t i = 0; i < sig.dim(); ++i) {
        if (sig.is_rotational(i)) {
            v[i] = unit(rng);
        } else {
            v[i] = sig.trans_lo[i] + unit(rng) * (sig.trans_hi[i] - sig.trans_lo[i]);
        }
    }
    return normalize(sig, v);
}

/// Points biased toward the seam so wrap cases show up often.
inline CPoint seam_point(const SpaceSignature& sig, std::mt19937_64& rng) {
    CPoint p = random_point(sig, rng);
    std::uniform_real_distribution<double> near(-0.08, 0.08);
    std::bernoulli_distribution coin(0.5);
    VecD v = p.coords;
    for (std::size_t i = static_cast<std::size_t>(sig.t); i < sig.dim(); ++i)
        if (coin(rng)) v[i] = near(rng);
    return normalize(sig, v);
}

inline CSegment random_segment(const SpaceSignature& sig, std::mt19937_64& rng, double max_len = 1e9) {
    const CPoint a = random_point(sig, rng);
    CPoint b = random_point(sig, rng);
    CSegment s = geodesic(sig, a, b);
    const double len = s.length();
    if (len > max_len) {
        b = point_at(sig, s, max_len / len);
        s = geodesic(sig, a, b);
    }
    return s;
}

/// Cyclic distance by brute force over every lift of q in {-1,0,1}^r.
inline double brute_point_distance(const SpaceSignature& sig, const CPoint& p, const CPoint& q) {
    std::size_t combos = 1;
    for (int i = 0; i < sig.r; ++i) combos *= 3;
    double best = 1e300;
    for (std::size_t code = 0; code < combos; ++code) {
        std::size_t rest = code;
        double sum = 0.0;
        for (std::size_t i = 0; i < sig.dim(); ++i) {
            double qi = q[i];
            if (sig.is_rotational(i)) {
                qi += static_cast<double>(rest % 3) - 1.0;
                rest /= 3;
            }
            sum += (p[i] - qi) * (p[i] - qi);
        }
        best = std::min(best, std::sqrt(sum));
    }
    return best;
}

}  // namespace edgenn::testing
