// lattice_map.hpp -- sublattice detection, image-walk reduction, periodicity.
#pragma once

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "latticelab/errors.hpp"
#include "latticelab/walk.hpp"

namespace latticelab {

// Integer basis B of the lattice generated by the nonzero step support,
// stored in column Hermite normal form: columns (a,c) and (0,d) with
// a,d > 0 and 0 <= c < d, i.e. the matrix [[a,0],[c,d]] is lower-triangular
// with positive diagonal.
struct LatticeMap {
    std::int64_t a = 1; // B[0][0]
    std::int64_t c = 0; // B[1][0]
    std::int64_t d = 1; // B[1][1]

    std::int64_t det() const { return a * d; }
    bool is_identity() const { return a == 1 && c == 0 && d == 1; }

    bool contains(Vec2 v) const {
        if (v.x % a != 0) return false;
        return (v.y - c * (v.x / a)) % d == 0;
    }

    // B^-1 v; throws when v is not a lattice point.
    Vec2 apply_inverse(Vec2 v) const {
        if (!contains(v)) throw Error("site " + v.str() + " is not on the sublattice");
        const std::int64_t u = v.x / a;
        return {u, (v.y - c * u) / d};
    }

    Vec2 apply(Vec2 w) const { return {a * w.x, c * w.x + d * w.y}; }
};

namespace detail {

// Column HNF of the lattice generated by `gens`. Returns a=0 or d=0 when the
// rank is deficient.
inline LatticeMap hnf_of(const std::vector<Vec2>& gens) {
    // Reduce to one vector with minimal positive x (the gcd) plus the set of
    // pure-y residuals it leaves behind.
    std::int64_t a = 0, ya = 0; // current vector (a, ya)
    std::vector<std::int64_t> y_only;
    auto absll = [](std::int64_t v) { return v < 0 ? -v : v; };
    for (const Vec2& g : gens) {
        if (g.x == 0) {
            if (g.y != 0) y_only.push_back(absll(g.y));
            continue;
        }
        if (a == 0) {
            a = absll(g.x);
            ya = g.x < 0 ? -g.y : g.y;
            continue;
        }
        // Extended gcd of (a, g.x): new generator s*(a,ya) + t*g has x = gcd.
        std::int64_t old_r = a, r = g.x, old_s = 1, s = 0, old_t = 0, t = 1;
        while (r != 0) {
            const std::int64_t q = old_r / r;
            std::int64_t tmp = old_r - q * r; old_r = r; r = tmp;
            tmp = old_s - q * s; old_s = s; s = tmp;
            tmp = old_t - q * t; old_t = t; t = tmp;
        }
        std::int64_t new_a = old_r, new_y = old_s * ya + old_t * g.y;
        if (new_a < 0) { new_a = -new_a; new_y = -new_y; }
        // Both old generators minus their multiple of the new one leave pure-y residuals.
        y_only.push_back(absll(ya - (a / new_a) * new_y));
        y_only.push_back(absll(g.y - (g.x / new_a) * new_y));
        a = new_a;
        ya = new_y;
    }
    std::int64_t d = 0;
    for (const std::int64_t y : y_only) d = std::gcd(d, y);
    LatticeMap m;
    m.a = a;
    m.d = d;
    if (a > 0 && d > 0) {
        m.c = ((ya % d) + d) % d;
    } else {
        m.c = ya; // rank-deficient; keep the raw second coordinate for diagnostics
    }
    return m;
}

} // namespace detail

// Basis of the group generated by the nonzero support vectors plus the image
// distribution with support B^-1 * support. The image support generates Z^2.
inline std::pair<LatticeMap, StepDistribution> sublattice_reduce(const StepDistribution& dist) {
    std::vector<Vec2> gens;
    for (const auto& atom : dist.atoms())
        if (!atom.site.is_zero()) gens.push_back(atom.site);
    const LatticeMap map = detail::hnf_of(gens);
    if (map.a <= 0 || map.d <= 0) throw RankDeficient();
    std::vector<StepDistribution::Atom> image;
    image.reserve(dist.size());
    for (const auto& atom : dist.atoms()) image.push_back({map.apply_inverse(atom.site), atom.weight, atom.exact});
    return {map, StepDistribution::make(std::move(image), dist.exact())};
}

// Irreducible == the nonzero support generates all of Z^2.
inline bool is_irreducible(const StepDistribution& dist) {
    try {
        return sublattice_reduce(dist).first.det() == 1;
    } catch (const RankDeficient&) {
        return false;
    }
}

// Lattice H generated by the support differences {s - s0}; the walk at time n
// is supported on n*s0 + H. Rank-deficient H is reported with a = 0 or d = 0.
inline LatticeMap difference_lattice(const StepDistribution& dist) {
    const Vec2 s0 = dist.atoms().front().site;
    std::vector<Vec2> diffs;
    for (const auto& atom : dist.atoms())
        if (atom.site != s0) diffs.push_back(atom.site - s0);
    return detail::hnf_of(diffs);
}

// Period of the discrete walk at the origin: gcd{n : p_n(0) > 0}. Detected
// from the support geometry: with s0 a support point and H the lattice
// generated by {s - s0}, the walk at time n lives on n*s0 + H, so the period
// is the least n with n*s0 in H. Returns 0 when no return is possible.
inline std::int64_t detect_period(const StepDistribution& dist) {
    if (dist.weight_at({0, 0}) > 0.0) return 1;
    const Vec2 s0 = dist.atoms().front().site;
    std::vector<Vec2> diffs;
    for (const auto& atom : dist.atoms())
        if (atom.site != s0) diffs.push_back(atom.site - s0);
    if (diffs.empty()) return 0; // deterministic nonzero drift never returns
    const LatticeMap h = detail::hnf_of(diffs);
    if (h.a > 0 && h.d > 0) {
        const std::int64_t index = h.det();
        for (std::int64_t n = 1; n <= index; ++n)
            if (h.contains(n * s0)) return n;
        return 0;
    }
    // Rank-1 difference lattice (cannot happen for zero-mean truly 2D walks):
    // scan a few multiples directly.
    for (std::int64_t n = 1; n <= 64; ++n) {
        const Vec2 target = n * s0;
        if (h.a > 0) {
            if (target.x % h.a == 0 && target.y == (target.x / h.a) * h.c) return n;
        } else if (h.d > 0) {
            if (target.x == 0 && target.y % h.d == 0) return n;
        } else if (target.is_zero()) {
            return n;
        }
    }
    return 0;
}

// 2 pi r sqrt(det Q): the Erdos-Taylor normalizing constant of a single walk,
// or of a difference walk with r = kappa + rho. The covariance must be the
// one of the (image-)reduced walk.
inline double et_constant(const WalkSpec& spec, const CovarianceMatrix& reduced_q) {
    const double d = reduced_q.det();
    if (!(d > 1e-12)) throw DegenerateCovariance();
    const double r = spec.discrete() ? 1.0 : spec.rate;
    return 2.0 * M_PI * r * std::sqrt(d);
}

// Full pipeline: reduce the step support to Z^2, take the image covariance,
// apply the Theorem constant.
inline double erdos_taylor_constant(const WalkSpec& spec) {
    const auto [map, image] = sublattice_reduce(spec.step);
    (void)map;
    return et_constant(spec, covariance(image));
}

} // namespace latticelab
