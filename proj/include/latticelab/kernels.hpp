// kernels.hpp -- exact n-step kernels, origin columns at scale, local-time
// distributions and moments, uniformized continuous-time kernels, LCLT leading
// term.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latticelab/errors.hpp"
#include "latticelab/fft.hpp"
#include "latticelab/grid.hpp"
#include "latticelab/lattice_map.hpp"
#include "latticelab/rational.hpp"
#include "latticelab/walk.hpp"

namespace latticelab {

struct KernelTable {
    WalkSpec walk;
    std::int64_t horizon = 0;
    std::vector<double> p0;       // p_j(0), j = 0..horizon
    std::vector<SquareGrid> grids; // full p_j(.) when requested
    std::string p0_route;

    bool has_grids() const { return !grids.empty(); }
};

// P(L_n = m) for m = 1..n+1; the visit at time 0 is counted, so L_n >= 1.
struct LocalTimePMF {
    std::int64_t horizon = 0;
    std::vector<double> prob; // prob[m-1] = P(L_n = m)

    double sum() const {
        double s = 0.0;
        for (const double p : prob) s += p;
        return s;
    }
    double moment(int k) const {
        double s = 0.0;
        for (std::size_t m = 1; m <= prob.size(); ++m) s += prob[m - 1] * std::pow(static_cast<double>(m), k);
        return s;
    }
    double mean() const { return moment(1); }
};

namespace detail {

// -- 2D simple-walk return probabilities ------------------------------------
// s_D = P(srw returns to 0 in D steps) = [D even] (C(D, D/2) 2^-D)^2; the
// table stores u_m = C(2m,m) 4^-m so s_{2m} = u_m^2.
inline std::vector<double> srw_u_table(std::int64_t max_m) {
    std::vector<double> u(max_m + 1);
    long double v = 1.0L;
    u[0] = 1.0;
    for (std::int64_t m = 0; m < max_m; ++m) {
        v *= static_cast<long double>(2 * m + 1) / static_cast<long double>(2 * m + 2);
        u[m + 1] = static_cast<double>(v);
    }
    return u;
}

// -- decomposition of a step kernel as a mixture of srw powers ---------------
// Tries to write p = sum_d a_d srw^{*d} with a_d >= 0. Works exactly in
// rationals when the distribution carries them, greedily peeling the extreme
// corner (d, 0) from the largest l1 shell down. Fails (nullopt) when the
// kernel is not in the srw convolution family.
inline std::optional<std::vector<double>> srw_mixture_coefficients(const StepDistribution& dist) {
    const std::int64_t d_max = dist.max_reach_l1();
    if (d_max > 16) return std::nullopt;

    if (dist.exact()) {
        try {
            std::vector<std::map<Vec2, Rational>> pow(d_max + 1);
            pow[0][{0, 0}] = Rational(1);
            const Rational quarter(1, 4);
            const Vec2 dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (std::int64_t d = 1; d <= d_max; ++d)
                for (const auto& [site, w] : pow[d - 1])
                    for (const Vec2 dir : dirs) {
                        auto [it, fresh] = pow[d].try_emplace(site + dir, Rational(0));
                        it->second = it->second + w * quarter;
                    }
            std::map<Vec2, Rational> work;
            for (const auto& atom : dist.atoms()) work[atom.site] = atom.exact;
            std::vector<Rational> a(d_max + 1, Rational(0));
            for (std::int64_t d = d_max; d >= 1; --d) {
                const auto corner = work.find({d, 0});
                if (corner == work.end() || corner->second.is_zero()) continue;
                const Rational ad = corner->second / pow[d].at({d, 0});
                if (ad.is_negative()) return std::nullopt;
                a[d] = ad;
                for (const auto& [site, w] : pow[d]) {
                    auto [it, fresh] = work.try_emplace(site, Rational(0));
                    it->second = it->second - ad * w;
                    if (it->second.is_negative()) return std::nullopt;
                }
            }
            for (const auto& [site, w] : work) {
                if (site.is_zero()) continue;
                if (!w.is_zero()) return std::nullopt;
            }
            a[0] = work.count({0, 0}) ? work.at({0, 0}) : Rational(0);
            std::vector<double> out(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].value();
            return out;
        } catch (const Error&) {
            // rational overflow on an exotic kernel: fall through to doubles
        }
    }

    std::vector<std::map<Vec2, double>> pow(d_max + 1);
    pow[0][{0, 0}] = 1.0;
    const Vec2 dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (std::int64_t d = 1; d <= d_max; ++d)
        for (const auto& [site, w] : pow[d - 1])
            for (const Vec2 dir : dirs) pow[d][site + dir] += 0.25 * w;
    std::map<Vec2, double> work;
    for (const auto& atom : dist.atoms()) work[atom.site] = atom.weight;
    std::vector<double> a(d_max + 1, 0.0);
    constexpr double tol = 1e-12;
    for (std::int64_t d = d_max; d >= 1; --d) {
        const auto corner = work.find({d, 0});
        const double w = corner == work.end() ? 0.0 : corner->second;
        if (std::abs(w) <= tol) continue;
        const double ad = w / pow[d].at({d, 0});
        if (ad < -tol) return std::nullopt;
        a[d] = ad;
        for (const auto& [site, pw] : pow[d]) work[site] -= ad * pw;
    }
    for (const auto& [site, w] : work) {
        if (site.is_zero()) continue;
        if (std::abs(w) > tol) return std::nullopt;
    }
    a[0] = std::max(0.0, work.count({0, 0}) ? work.at({0, 0}) : 0.0);
    return a;
}

// Origin column of a mixture-of-srw-powers walk for all j <= n. The number of
// elementary srw steps after j ticks is a lattice random walk on N whose
// distribution is kept as a sliding window (the tails beyond ~1e-25 carry no
// mass that survives the s_D dot product).
inline std::vector<double> p0_from_srw_mixture(const std::vector<double>& a, std::int64_t n) {
    const std::int64_t d_max = static_cast<std::int64_t>(a.size()) - 1;
    const std::int64_t max_m = (d_max * n) / 2 + 1;
    const std::vector<double> u = srw_u_table(max_m);
    constexpr double trim = 1e-25;

    std::vector<double> g(n + 1, 0.0);
    g[0] = 1.0;
    std::vector<double> w = {1.0};
    std::int64_t lo = 0;
    std::vector<double> next;
    for (std::int64_t j = 1; j <= n; ++j) {
        next.assign(w.size() + d_max, 0.0);
        for (std::int64_t d = 0; d <= d_max; ++d) {
            if (a[d] == 0.0) continue;
            const double ad = a[d];
            for (std::size_t i = 0; i < w.size(); ++i) next[i + d] += ad * w[i];
        }
        std::size_t head = 0, tail = next.size();
        while (head < tail && next[head] < trim) ++head;
        while (tail > head && next[tail - 1] < trim) --tail;
        lo += static_cast<std::int64_t>(head);
        w.assign(next.begin() + head, next.begin() + tail);

        double gj = 0.0;
        const std::size_t start = (lo % 2 == 0) ? 0 : 1;
        for (std::size_t i = start; i < w.size(); i += 2) {
            const double um = u[(lo + static_cast<std::int64_t>(i)) / 2];
            gj += w[i] * um * um;
        }
        g[j] = gj;
    }
    return g;
}

// The origin column is invariant under any unimodular relabeling of the
// lattice, so hunt for a GL(2,Z) image of the support that lands in the srw
// convolution family (the canonical HNF image is often a sheared simple walk).
inline std::optional<std::vector<double>> srw_family_coefficients(const StepDistribution& dist) {
    if (auto a = srw_mixture_coefficients(dist)) return a;
    struct Mat {
        std::int64_t p, q, r, s;
    };
    static const std::vector<Mat> candidates = [] {
        std::vector<Mat> out;
        for (std::int64_t p = -2; p <= 2; ++p)
            for (std::int64_t q = -2; q <= 2; ++q)
                for (std::int64_t r = -2; r <= 2; ++r)
                    for (std::int64_t s = -2; s <= 2; ++s) {
                        const std::int64_t det = p * s - q * r;
                        if (det == 1 || det == -1) out.push_back({p, q, r, s});
                    }
        return out;
    }();
    for (const Mat& m : candidates) {
        std::vector<StepDistribution::Atom> atoms;
        atoms.reserve(dist.size());
        std::int64_t reach = 0;
        for (const auto& atom : dist.atoms()) {
            const Vec2 img{m.p * atom.site.x + m.q * atom.site.y, m.r * atom.site.x + m.s * atom.site.y};
            reach = std::max(reach, img.norm1());
            atoms.push_back({img, atom.weight, atom.exact});
        }
        if (reach > 8) continue;
        if (auto a = srw_mixture_coefficients(StepDistribution::make(std::move(atoms), dist.exact()))) return a;
    }
    return std::nullopt;
}

inline std::vector<double> p0_direct(const StepDistribution& step, std::int64_t n) {
    std::vector<double> g(n + 1, 0.0);
    SquareGrid grid = SquareGrid::delta();
    g[0] = 1.0;
    for (std::int64_t j = 1; j <= n; ++j) {
        grid = grid.convolve(step);
        g[j] = grid.value({0, 0});
    }
    return g;
}

inline std::vector<double> p0_torus(const StepDistribution& step, std::int64_t n, unsigned workers) {
    TorusGrid grid(torus_size_for(step.max_reach(), n));
    std::vector<double> g(n + 1, 0.0);
    g[0] = 1.0;
    for (std::int64_t j = 1; j <= n; ++j) {
        grid.step(step, workers);
        g[j] = grid.value({0, 0});
    }
    return g;
}

inline int stirling2(int k, int m) {
    if (m == 0) return k == 0 ? 1 : 0;
    if (m > k) return 0;
    // S(k,m) = m S(k-1,m) + S(k-1,m-1)
    return m * stirling2(k - 1, m) + stirling2(k - 1, m - 1);
}

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

} // namespace detail

struct P0Options {
    std::int64_t direct_cap = 128;  // exact square-grid route up to this horizon
    std::int64_t torus_cap = 4096;  // generic folded route up to this horizon
    unsigned workers = 1;
};

struct P0Result {
    std::vector<double> values;
    std::string route;
};

// p_j(0) for j = 0..n. Route order: exact grids for short horizons, the
// srw-mixture column for kernels in the simple-walk convolution family
// (directly or after sublattice reduction, under which the origin column is
// invariant), then the torus-folded generic route up to its cap.
inline P0Result p0_series_ex(const StepDistribution& step, std::int64_t n, const P0Options& opt = {}) {
    if (n < 0) throw Error("horizon must be >= 0");
    if (n <= opt.direct_cap && step.max_reach() * n <= 2048)
        return {detail::p0_direct(step, n), "direct"};
    if (auto a = detail::srw_family_coefficients(step))
        return {detail::p0_from_srw_mixture(*a, n), "srw-mixture"};
    try {
        const auto [map, image] = sublattice_reduce(step);
        if (!map.is_identity())
            if (auto a = detail::srw_family_coefficients(image))
                return {detail::p0_from_srw_mixture(*a, n), "reduced-srw-mixture"};
    } catch (const RankDeficient&) {
        // not truly two-dimensional; the torus route still applies
    }
    if (n <= opt.torus_cap) return {detail::p0_torus(step, n, opt.workers), "torus"};
    throw GridTooLarge("origin column horizon " + std::to_string(n) +
                       " exceeds the generic-route cap " + std::to_string(opt.torus_cap) +
                       " and the kernel is outside the srw convolution family");
}

inline std::vector<double> p0_series(const StepDistribution& step, std::int64_t n, const P0Options& opt = {}) {
    return p0_series_ex(step, n, opt).values;
}

struct KernelOptions {
    std::int64_t grid_radius_cap = 160; // memory guard: R*N <= cap for full grids
    P0Options p0;
};

// p_{j+1} = p_j * p_1 by direct convolution; the p0 array is always filled,
// full grids only on request and under the memory cap.
inline KernelTable build_kernel_table(const WalkSpec& walk, std::int64_t n, bool want_grids = false,
                                      const KernelOptions& opt = {}) {
    if (n < 0) throw Error("horizon must be >= 0");
    if (!walk.discrete()) throw Error("kernel tables index discrete steps; use continuous_kernel for times");
    KernelTable table;
    table.walk = walk;
    table.horizon = n;
    if (want_grids) {
        const std::int64_t reach = walk.step.max_reach();
        if (reach * n > opt.grid_radius_cap)
            throw GridTooLarge("grid radius " + std::to_string(reach * n) + " exceeds cap " +
                               std::to_string(opt.grid_radius_cap));
        table.grids.reserve(n + 1);
        table.grids.push_back(SquareGrid::delta());
        for (std::int64_t j = 1; j <= n; ++j) table.grids.push_back(table.grids.back().convolve(walk.step));
        table.p0.resize(n + 1);
        for (std::int64_t j = 0; j <= n; ++j) table.p0[j] = table.grids[j].value({0, 0});
        table.p0_route = "direct-grids";
    } else {
        auto r = p0_series_ex(walk.step, n, opt.p0);
        table.p0 = std::move(r.values);
        table.p0_route = std::move(r.route);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Continuous time: uniformization p_t(x) = sum_k e^{-rt}(rt)^k/k! p_k(x)
// ---------------------------------------------------------------------------

namespace detail {

inline double log_poisson_pmf(double lambda, std::int64_t k) {
    if (lambda == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return -lambda + static_cast<double>(k) * std::log(lambda) - std::lgamma(static_cast<double>(k) + 1.0);
}

inline std::int64_t poisson_cutoff(double lambda, double tol) {
    if (lambda <= 0.0) return 0;
    std::int64_t k = static_cast<std::int64_t>(lambda);
    double tail_log = detail::log_poisson_pmf(lambda, k);
    // crude upward scan from the mode; pmf beyond the mode decays at least
    // geometrically with ratio lambda/(k+1)
    while (true) {
        ++k;
        tail_log = detail::log_poisson_pmf(lambda, k);
        const double ratio = lambda / static_cast<double>(k + 1);
        const double tail_bound = std::exp(tail_log) / std::max(1e-300, 1.0 - std::min(0.999999, ratio));
        if (ratio < 1.0 && tail_bound < tol) return k;
        if (k > static_cast<std::int64_t>(10.0 * lambda) + 200) return k;
    }
}

} // namespace detail

// Single-site uniformized kernel value with truncation error <= tol.
inline double continuous_kernel(const WalkSpec& walk, double t, Vec2 x, double tol = 1e-12) {
    if (walk.discrete()) throw Error("continuous_kernel needs a continuous-time walk");
    if (t < 0.0) throw Error("time must be >= 0");
    if (!(tol > 0.0)) throw Error("tolerance must be > 0");
    if (t == 0.0) return x.is_zero() ? 1.0 : 0.0;
    const double lambda = walk.rate * t;
    const std::int64_t kmax = detail::poisson_cutoff(lambda, tol);
    double acc = 0.0;
    if (walk.step.max_reach() * kmax <= 2048) {
        SquareGrid grid = SquareGrid::delta();
        acc += std::exp(detail::log_poisson_pmf(lambda, 0)) * grid.value(x);
        for (std::int64_t k = 1; k <= kmax; ++k) {
            grid = grid.convolve(walk.step);
            acc += std::exp(detail::log_poisson_pmf(lambda, k)) * grid.value(x);
        }
    } else {
        TorusGrid grid(torus_size_for(walk.step.max_reach(), kmax, x.norm_inf()));
        acc += std::exp(detail::log_poisson_pmf(lambda, 0)) * grid.value(x);
        for (std::int64_t k = 1; k <= kmax; ++k) {
            grid.step(walk.step);
            acc += std::exp(detail::log_poisson_pmf(lambda, k)) * grid.value(x);
        }
    }
    return acc;
}

// p_t(0) over a batch of times, sharing one jump-chain origin column.
inline std::vector<double> continuous_p0_series(const WalkSpec& walk, const std::vector<double>& times,
                                                double tol = 1e-12, const P0Options& opt = {}) {
    if (walk.discrete()) throw Error("continuous_p0_series needs a continuous-time walk");
    double tmax = 0.0;
    for (const double t : times) {
        if (t < 0.0) throw Error("time must be >= 0");
        tmax = std::max(tmax, t);
    }
    const std::int64_t kmax = detail::poisson_cutoff(walk.rate * tmax, tol);
    const std::vector<double> g = p0_series(walk.step, kmax, opt);
    std::vector<double> out;
    out.reserve(times.size());
    for (const double t : times) {
        if (t == 0.0) {
            out.push_back(1.0);
            continue;
        }
        const double lambda = walk.rate * t;
        const std::int64_t kt = std::min<std::int64_t>(kmax, detail::poisson_cutoff(lambda, tol));
        double acc = 0.0;
        for (std::int64_t k = 0; k <= kt; ++k) acc += std::exp(detail::log_poisson_pmf(lambda, k)) * g[k];
        out.push_back(acc);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Local time at the origin, discrete time
// ---------------------------------------------------------------------------

// First-return probabilities from the renewal identity
// p_j(0) = sum_{i<=j} f_i p_{j-i}(0), f_0 = 0.
inline std::vector<double> first_return_probabilities(const std::vector<double>& p0) {
    std::vector<double> f(p0.size(), 0.0);
    for (std::size_t j = 1; j < p0.size(); ++j) {
        double s = p0[j];
        for (std::size_t i = 1; i < j; ++i) s -= f[i] * p0[j - i];
        f[j] = s;
    }
    return f;
}

// Exact pmf of L_n via iterated convolutions of the first-return law:
// P(L_n >= m+1) = sum_{j<=n} f^{*m}_j.
inline LocalTimePMF local_time_pmf(const WalkSpec& walk, std::int64_t n, const P0Options& opt = {}) {
    if (!walk.discrete()) throw Error("local_time_pmf is the discrete-time law");
    if (n < 0) throw Error("horizon must be >= 0");
    const std::vector<double> g = p0_series(walk.step, n, opt);
    const std::vector<double> f = first_return_probabilities(g);

    LocalTimePMF pmf;
    pmf.horizon = n;
    pmf.prob.assign(n + 1, 0.0);
    std::vector<double> fm = f; // f^{*m}, m = 1
    double surv_prev = 1.0;     // P(L >= m)
    for (std::int64_t m = 1; m <= n + 1; ++m) {
        double surv = 0.0;
        for (std::size_t j = 0; j < fm.size(); ++j) surv += fm[j];
        pmf.prob[m - 1] = surv_prev - surv;
        surv_prev = surv;
        if (surv == 0.0) break;
        if (m <= n) {
            std::vector<double> next(n + 1, 0.0);
            for (std::size_t i = 1; i < fm.size(); ++i) {
                if (fm[i] == 0.0) continue;
                for (std::size_t j = 1; i + j <= static_cast<std::size_t>(n); ++j) next[i + j] += fm[i] * f[j];
            }
            fm.swap(next);
        }
    }
    return pmf;
}

// Exact E[L_n^k] for every n in `ns`, k = 0..k_max, computed from the origin
// column by counting ordered visit tuples: with A_m(n) the sum over strictly
// increasing m-tuples of visit times of the product of gap return
// probabilities, E[L_n^k] = sum_m S(k,m) m! A_m(n).
inline std::vector<std::vector<double>> local_time_moments(const std::vector<double>& p0,
                                                           const std::vector<std::int64_t>& ns, int k_max) {
    std::int64_t max_n = 0;
    for (const std::int64_t n : ns) {
        if (n < 0) throw Error("horizon must be >= 0");
        if (static_cast<std::size_t>(n) >= p0.size()) throw Error("origin column shorter than requested horizon");
        max_n = std::max(max_n, n);
    }
    std::vector<double> g(p0.begin(), p0.begin() + max_n + 1);
    std::vector<double> g_pos = g;
    if (!g_pos.empty()) g_pos[0] = 0.0;

    std::vector<std::vector<double>> prefix(k_max + 1); // prefix[m][n] = A_m(n), m >= 1
    std::vector<double> c = g;
    for (int m = 1; m <= k_max; ++m) {
        if (m > 1) c = convolve_truncated(c, g_pos, max_n + 1);
        auto& acc = prefix[m];
        acc.assign(max_n + 1, 0.0);
        double run = 0.0;
        for (std::int64_t j = 0; j <= max_n; ++j) {
            run += c[j];
            acc[j] = run;
        }
    }

    std::vector<std::vector<double>> out;
    out.reserve(ns.size());
    for (const std::int64_t n : ns) {
        std::vector<double> row(k_max + 1, 1.0);
        for (int k = 1; k <= k_max; ++k) {
            double v = 0.0;
            for (int m = 1; m <= k; ++m)
                v += detail::stirling2(k, m) * detail::factorial(m) * prefix[m][n];
            row[k] = v;
        }
        out.push_back(std::move(row));
    }
    return out;
}

inline std::vector<std::vector<double>> local_time_moments(const WalkSpec& walk, const std::vector<std::int64_t>& ns,
                                                           int k_max, const P0Options& opt = {}) {
    std::int64_t max_n = 0;
    for (const std::int64_t n : ns) max_n = std::max(max_n, n);
    return local_time_moments(p0_series(walk.step, max_n, opt), ns, k_max);
}

// ---------------------------------------------------------------------------
// Continuous-time exact moments and the LCLT leading term
// ---------------------------------------------------------------------------

struct MomentQuadrature {
    double value = 0.0;
    double refinement_delta = 0.0; // relative change under one grid halving
    double grid_step = 0.0;
};

// E[L_t^k] = k! * J_k(t) with J_m(tau) = int_0^tau p_s(0) J_{m-1}(tau - s) ds,
// evaluated by iterated cumulative trapezoid sums with a Richardson check.
inline MomentQuadrature exact_moments_continuous(const WalkSpec& walk, double t, int k, double grid_step,
                                                 double refine_tol = 1e-3, const P0Options& opt = {}) {
    if (k < 1) throw Error("moment order must be >= 1");
    if (!(grid_step > 0.0) || t < 0.0) throw Error("need grid_step > 0 and t >= 0");

    auto evaluate = [&](double h) {
        const std::size_t m = static_cast<std::size_t>(std::llround(t / h));
        const double step = m == 0 ? h : t / static_cast<double>(m);
        std::vector<double> times(m + 1);
        for (std::size_t i = 0; i <= m; ++i) times[i] = step * static_cast<double>(i);
        const std::vector<double> p = continuous_p0_series(walk, times, 1e-13, opt);
        std::vector<double> J(m + 1, 0.0); // J_1 cumulative trapezoid
        for (std::size_t i = 1; i <= m; ++i) J[i] = J[i - 1] + 0.5 * step * (p[i - 1] + p[i]);
        for (int level = 2; level <= k; ++level) {
            std::vector<double> next(m + 1, 0.0);
            for (std::size_t i = 1; i <= m; ++i) {
                // trapezoid in s of p(s) J(tau - s) over [0, tau_i]
                double acc = 0.5 * (p[0] * J[i] + p[i] * J[0]);
                for (std::size_t s = 1; s < i; ++s) acc += p[s] * J[i - s];
                next[i] = acc * step;
            }
            J.swap(next);
        }
        return J[m];
    };

    double h = grid_step;
    double coarse = evaluate(h);
    double fine = evaluate(h / 2.0);
    while (std::abs(fine - coarse) > refine_tol * std::max(1e-300, std::abs(fine)) && h > grid_step / 64.0) {
        h /= 2.0;
        coarse = fine;
        fine = evaluate(h / 2.0);
    }
    MomentQuadrature q;
    q.value = detail::factorial(k) * fine;
    q.refinement_delta = std::abs(fine - coarse) / std::max(1e-300, std::abs(fine));
    q.grid_step = h / 2.0;
    return q;
}

// Leading term of the local CLT: e^{-x.Q^{-1}x/(2n)} / (2 pi n sqrt(det Q)),
// with n replaced by rate_scale * n for continuous time.
inline double lclt_leading(const CovarianceMatrix& q, double n, Vec2 x, double rate_scale = 1.0) {
    const double d = q.det();
    if (!(d > 0.0)) throw DegenerateCovariance();
    const double eff = n * rate_scale;
    if (!(eff > 0.0)) throw Error("lclt_leading needs n * rate_scale > 0");
    const double quad = q.inverse_quadratic(static_cast<double>(x.x), static_cast<double>(x.y));
    return std::exp(-quad / (2.0 * eff)) / (2.0 * M_PI * eff * std::sqrt(d));
}

} // namespace latticelab
