// grid.hpp -- centered square kernels and torus-folded kernel evolution.
#pragma once

#include <cstdint>
#include <thread>
#include <vector>

#include "latticelab/vec2.hpp"
#include "latticelab/walk.hpp"

namespace latticelab {

// Kernel values on the centered square [-radius, radius]^2, row-major.
struct SquareGrid {
    std::int64_t radius = 0;
    std::vector<double> a;

    explicit SquareGrid(std::int64_t r = 0) : radius(r), a((2 * r + 1) * (2 * r + 1), 0.0) {}

    std::int64_t side() const { return 2 * radius + 1; }
    double& at(std::int64_t x, std::int64_t y) { return a[(y + radius) * side() + (x + radius)]; }
    double at(std::int64_t x, std::int64_t y) const { return a[(y + radius) * side() + (x + radius)]; }
    double value(Vec2 v) const {
        if (v.norm_inf() > radius) return 0.0;
        return at(v.x, v.y);
    }
    double sum() const {
        double s = 0.0;
        for (const double v : a) s += v;
        return s;
    }

    static SquareGrid delta() {
        SquareGrid g(0);
        g.a[0] = 1.0;
        return g;
    }

    // Linear (exact) convolution with a one-step kernel; the radius grows by
    // the kernel reach.
    SquareGrid convolve(const StepDistribution& step) const {
        SquareGrid out(radius + step.max_reach());
        for (const auto& atom : step.atoms()) {
            const double w = atom.weight;
            for (std::int64_t y = -radius; y <= radius; ++y) {
                const double* src = &a[(y + radius) * side()];
                double* dst = &out.at(-radius + atom.site.x, y + atom.site.y);
                for (std::int64_t i = 0; i < side(); ++i) dst[i] += w * src[i];
            }
        }
        return out;
    }
};

// Kernel folded onto the torus (Z/L)^2. Folding commutes with convolution, so
// evolving here yields the exact folded kernel; reading a site of Z^2 off the
// torus is correct up to the wrap-around mass, which the caller controls by
// sizing L (see torus_size_for).
class TorusGrid {
  public:
    explicit TorusGrid(std::int64_t size) : size_(size), a_(size * size, 0.0), b_(size * size, 0.0) {
        a_[0] = 1.0; // delta at the origin
    }

    std::int64_t size() const { return size_; }

    double value(Vec2 v) const {
        const std::int64_t x = mod(v.x), y = mod(v.y);
        return a_[y * size_ + x];
    }

    double sum() const {
        double s = 0.0;
        for (const double v : a_) s += v;
        return s;
    }

    // One convolution step with the given one-step kernel, optionally
    // row-parallel. Threads own disjoint output rows, so the result does not
    // depend on the worker count.
    void step(const StepDistribution& kernel, unsigned workers = 1) {
        std::fill(b_.begin(), b_.end(), 0.0);
        auto run_rows = [&](std::int64_t y0, std::int64_t y1) {
            for (const auto& atom : kernel.atoms()) {
                const double w = atom.weight;
                const std::int64_t sx = mod(atom.site.x), sy = mod(atom.site.y);
                for (std::int64_t y = y0; y < y1; ++y) {
                    const std::int64_t ysrc = y >= sy ? y - sy : y - sy + size_;
                    const double* src = &a_[ysrc * size_];
                    double* dst = &b_[y * size_];
                    // dst[x] += w * src[(x - sx) mod L], split at the wrap point
                    for (std::int64_t x = sx; x < size_; ++x) dst[x] += w * src[x - sx];
                    for (std::int64_t x = 0; x < sx; ++x) dst[x] += w * src[x - sx + size_];
                }
            }
        };
        if (workers <= 1) {
            run_rows(0, size_);
        } else {
            std::vector<std::thread> pool;
            const std::int64_t chunk = (size_ + workers - 1) / workers;
            for (unsigned t = 0; t < workers; ++t) {
                const std::int64_t y0 = t * chunk, y1 = std::min<std::int64_t>(size_, y0 + chunk);
                if (y0 >= y1) break;
                pool.emplace_back(run_rows, y0, y1);
            }
            for (auto& th : pool) th.join();
        }
        a_.swap(b_);
    }

  private:
    std::int64_t mod(std::int64_t v) const {
        const std::int64_t m = v % size_;
        return m < 0 ? m + size_ : m;
    }

    std::int64_t size_;
    std::vector<double> a_, b_;
};

// Torus side keeping the wrap-around error at read sites within |x| <= extra
// below ~1e-15 after n steps of a kernel with sup-norm reach R (Hoeffding
// tail bound on the folded mass).
inline std::int64_t torus_size_for(std::int64_t reach, std::int64_t n, std::int64_t extra = 0) {
    const double l = 8.6 * static_cast<double>(reach) * std::sqrt(static_cast<double>(std::max<std::int64_t>(n, 1)));
    return static_cast<std::int64_t>(l) + 2 * extra + 8;
}

} // namespace latticelab
