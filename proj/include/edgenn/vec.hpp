#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace edgenn {

/// Upper bound on the configuration-space dimension. Coordinates live inline
/// so distance kernels never touch the heap.
inline constexpr std::size_t kMaxDim = 16;

/// Fixed-capacity vector of doubles with a runtime size <= kMaxDim.
class VecD {
public:
    VecD() = default;

    explicit VecD(std::size_t n, double fill = 0.0) : n_(static_cast<std::uint8_t>(n)) {
        assert(n <= kMaxDim);
        for (std::size_t i = 0; i < n; ++i) v_[i] = fill;
    }

    VecD(std::initializer_list<double> init) : n_(static_cast<std::uint8_t>(init.size())) {
        assert(init.size() <= kMaxDim);
        std::size_t i = 0;
        for (double x : init) v_[i++] = x;
    }

    explicit VecD(std::span<const double> values) : n_(static_cast<std::uint8_t>(values.size())) {
        assert(values.size() <= kMaxDim);
        for (std::size_t i = 0; i < values.size(); ++i) v_[i] = values[i];
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] bool empty() const noexcept { return n_ == 0; }

    double& operator[](std::size_t i) noexcept { return v_[i]; }
    double operator[](std::size_t i) const noexcept { return v_[i]; }

    [[nodiscard]] const double* begin() const noexcept { return v_.data(); }
    [[nodiscard]] const double* end() const noexcept { return v_.data() + n_; }
    [[nodiscard]] double* begin() noexcept { return v_.data(); }
    [[nodiscard]] double* end() noexcept { return v_.data() + n_; }

    [[nodiscard]] std::span<const double> span() const noexcept { return {v_.data(), n_}; }

    friend bool operator==(const VecD& a, const VecD& b) noexcept {
        if (a.n_ != b.n_) return false;
        for (std::size_t i = 0; i < a.n_; ++i)
            if (a.v_[i] != b.v_[i]) return false;
        return true;
    }

    VecD& operator+=(const VecD& o) noexcept {
        for (std::size_t i = 0; i < n_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    VecD& operator-=(const VecD& o) noexcept {
        for (std::size_t i = 0; i < n_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    VecD& operator*=(double s) noexcept {
        for (std::size_t i = 0; i < n_; ++i) v_[i] *= s;
        return *this;
    }

    friend VecD operator+(VecD a, const VecD& b) noexcept { return a += b; }
    friend VecD operator-(VecD a, const VecD& b) noexcept { return a -= b; }
    friend VecD operator*(VecD a, double s) noexcept { return a *= s; }
    friend VecD operator*(double s, VecD a) noexcept { return a *= s; }

private:
    std::array<double, kMaxDim> v_{};
    std::uint8_t n_ = 0;
};

inline double dot(const VecD& a, const VecD& b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(const VecD& a) noexcept { return dot(a, a); }
inline double norm(const VecD& a) noexcept { return std::sqrt(squared_norm(a)); }

/// a + t * v, evaluated so that t == 0 returns a exactly.
inline VecD lerp_along(const VecD& a, const VecD& v, double t) noexcept {
    VecD out = a;
    if (t == 0.0) return out;
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += t * v[i];
    return out;
}

}  // namespace edgenn
