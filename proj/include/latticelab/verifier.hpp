// verifier.hpp -- numerical checks of the supporting lemmas: kernel-gradient
// sums, weighted kernel decay, rearrangement inequalities, and the
// moment-method convergence scan.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "latticelab/grid.hpp"
#include "latticelab/kernels.hpp"
#include "latticelab/lattice_map.hpp"
#include "latticelab/rng.hpp"
#include "latticelab/stats.hpp"
#include "latticelab/walk.hpp"

namespace latticelab {

struct RatioRow {
    std::string input;
    double scale = 0.0; // abscissa for the trend fit (e.g. 1 + |x|, or i)
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

// Scan of LHS/RHS ratios of a bound, with the log-log trend slope used to
// assert boundedness (the lemma constants themselves are unknown).
struct RatioReport {
    std::vector<RatioRow> rows;
    double max_ratio = 0.0;
    double trend_slope = 0.0;
    std::string note;

    void finalize() {
        max_ratio = 0.0;
        std::vector<double> xs, ys;
        for (const auto& r : rows) {
            max_ratio = std::max(max_ratio, r.ratio);
            if (r.scale > 0.0 && r.ratio > 0.0) {
                xs.push_back(r.scale);
                ys.push_back(r.ratio);
            }
        }
        trend_slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
    }
};

// sum_n |p_n(x) - p_n(x+z0)| <= C |z0| (1/(1+|x|) + 1/(1+|x+z0|)).
// The sum is truncated at factor*(1+|x|)^2 steps per site; the tail is
// estimated from the last computed half-block via the n^{-3/2} decay shape of
// the summand (ratio of consecutive partial tails), reported but never
// asserted as the lemma's constant.
inline RatioReport check_gradpot(const WalkSpec& z_walk, Vec2 z0, const std::vector<Vec2>& x_list,
                                 std::int64_t trunc_factor = 4, unsigned workers = 1,
                                 double cost_cap = 4e10) {
    if (!z_walk.discrete()) throw Error("check_gradpot runs the discrete-time bound");
    if (x_list.empty()) throw Error("x_list must be non-empty");

    RatioReport report;
    if (z0.is_zero()) {
        for (const Vec2 x : x_list) report.rows.push_back({x.str(), 1.0 + x.norm(), 0.0, 0.0, 0.0});
        report.finalize();
        report.note = "z0 = 0: both kernels identical";
        return report;
    }

    // Periodic walks: p_n(x) p_n(x+z0) > 0 for some n forces z0 into the
    // support-difference lattice; outside it the two sites never carry mass at
    // the same time and the lemma's precondition fails, so the scan is skipped.
    const std::int64_t period = detect_period(z_walk.step);
    if (period != 1) {
        const LatticeMap h = difference_lattice(z_walk.step);
        if (h.a <= 0 || h.d <= 0 || !h.contains(z0)) {
            report.note = "periodic walk: z0 outside the difference lattice, pairs skipped";
            report.finalize();
            return report;
        }
    }

    struct Tracked {
        Vec2 x;
        std::int64_t n_trunc = 0;
        double partial = 0.0;
        double last_half = 0.0; // sum over (n_trunc/2, n_trunc]
    };
    std::vector<Tracked> tracked;
    std::int64_t n_max = 0, read_extent = 0;
    for (const Vec2 x : x_list) {
        Tracked t;
        t.x = x;
        const double nx = 1.0 + x.norm();
        t.n_trunc = trunc_factor * static_cast<std::int64_t>(std::llround(nx * nx));
        tracked.push_back(t);
        n_max = std::max(n_max, t.n_trunc);
        read_extent = std::max({read_extent, x.norm_inf(), (x + z0).norm_inf()});
    }

    const std::int64_t torus = torus_size_for(z_walk.step.max_reach(), n_max, read_extent);
    if (static_cast<double>(torus) * torus * n_max > cost_cap)
        throw GridTooLarge("gradpot scan needs " + std::to_string(n_max) + " steps on a side-" +
                           std::to_string(torus) + " torus; beyond the cost cap");

    TorusGrid grid(torus);
    for (std::int64_t n = 1; n <= n_max; ++n) {
        grid.step(z_walk.step, workers);
        for (auto& t : tracked) {
            if (n > t.n_trunc) continue;
            const double diff = std::abs(grid.value(t.x) - grid.value(t.x + z0));
            t.partial += diff;
            if (n > t.n_trunc / 2) t.last_half += diff;
        }
    }

    const double z0n = z0.norm();
    for (const auto& t : tracked) {
        // sum_{n>N} n^{-3/2} / sum_{N/2<n<=N} n^{-3/2} = 1/(sqrt(2)-1)
        const double tail = t.last_half / (std::sqrt(2.0) - 1.0);
        const double lhs = t.partial + tail;
        const double rhs = z0n * (1.0 / (1.0 + t.x.norm()) + 1.0 / (1.0 + (t.x + z0).norm()));
        report.rows.push_back({t.x.str(), 1.0 + t.x.norm(), lhs, rhs, rhs > 0.0 ? lhs / rhs : 0.0});
    }
    report.finalize();
    return report;
}

// sum_x p_i(x) (1 + |x - v|)^{-q} <= C_q i^{-q/2}: the report carries
// i^{q/2} * sum as the ratio, which should stay bounded in i.
inline RatioReport check_rwconv(const WalkSpec& walk, double q, Vec2 v, const std::vector<std::int64_t>& i_list,
                                unsigned workers = 1, double cost_cap = 4e10) {
    if (!(q >= 1.0 && q < 2.0)) throw Error("q must lie in [1,2)");
    if (!walk.discrete()) throw Error("check_rwconv runs the discrete-time bound");
    if (i_list.empty()) throw Error("i_list must be non-empty");
    std::int64_t i_max = 0;
    for (const std::int64_t i : i_list) {
        if (i < 1) throw Error("i_list entries must be >= 1");
        i_max = std::max(i_max, i);
    }
    const std::int64_t torus = torus_size_for(walk.step.max_reach(), i_max, v.norm_inf());
    if (static_cast<double>(torus) * torus * i_max > cost_cap)
        throw GridTooLarge("rwconv scan needs " + std::to_string(i_max) + " steps on a side-" +
                           std::to_string(torus) + " torus; beyond the cost cap");
    TorusGrid grid(torus);
    const std::int64_t half = torus / 2;

    RatioReport report;
    std::size_t next = 0;
    std::vector<std::int64_t> sorted(i_list);
    std::sort(sorted.begin(), sorted.end());
    for (std::int64_t i = 1; i <= i_max && next < sorted.size(); ++i) {
        grid.step(walk.step, workers);
        if (i != sorted[next]) continue;
        ++next;
        // unwrap torus coordinates to the centered representative
        double sum = 0.0;
        for (std::int64_t yy = 0; yy < torus; ++yy)
            for (std::int64_t xx = 0; xx < torus; ++xx) {
                const double p = grid.value({xx, yy});
                if (p == 0.0) continue;
                const std::int64_t cx = xx > half ? xx - torus : xx;
                const std::int64_t cy = yy > half ? yy - torus : yy;
                const double dx = static_cast<double>(cx - v.x), dy = static_cast<double>(cy - v.y);
                sum += p / std::pow(1.0 + std::sqrt(dx * dx + dy * dy), q);
            }
        const double scaled = sum * std::pow(static_cast<double>(i), q / 2.0);
        report.rows.push_back({"i=" + std::to_string(i), static_cast<double>(i), sum,
                               std::pow(static_cast<double>(i), -q / 2.0), scaled});
    }
    report.finalize();
    return report;
}

struct RearrangementResult {
    std::uint64_t trials = 0;
    std::uint64_t violations = 0;
    double worst_slack = 0.0; // most negative margin seen
};

// Random verification of sum a_n b_n <= sum a_n c_n for non-increasing a and
// c majorizing b, plus the sorted-rearrangement corollary.
inline RearrangementResult check_rearrangement(std::uint64_t trials, std::size_t length,
                                               std::uint64_t master_seed) {
    if (length < 1) throw Error("length must be >= 1");
    RearrangementResult out;
    out.trials = trials;
    constexpr double slack = 1e-12;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        RngStream rng(master_seed, "rearrange", trial);
        std::vector<double> a(length), b(length), c(length);
        // non-negative non-increasing a via cumulative products
        double cur = rng.next_unit() + 0.5;
        for (std::size_t i = 0; i < length; ++i) {
            a[i] = cur;
            cur *= rng.next_unit();
        }
        for (std::size_t i = 0; i < length; ++i) b[i] = 2.0 * rng.next_unit();
        // c: push a random share of each entry to a random earlier slot; this
        // only raises prefix sums, so c majorizes b
        c = b;
        for (std::size_t i = 1; i < length; ++i) {
            const double share = rng.next_unit() * c[i];
            const std::size_t j = static_cast<std::size_t>(
                (static_cast<std::uint64_t>(rng.next_u32()) * (i + 1)) >> 32);
            if (j < i) {
                c[i] -= share;
                c[j] += share;
            }
        }
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < length; ++i) {
            lhs += a[i] * b[i];
            rhs += a[i] * c[i];
        }
        if (lhs > rhs + slack) {
            ++out.violations;
            out.worst_slack = std::min(out.worst_slack, rhs - lhs);
        }
        // corollary: sorting b non-increasing maximizes sum a_n b_{sigma(n)}
        std::vector<double> sorted_b = b;
        std::sort(sorted_b.begin(), sorted_b.end(), std::greater<double>());
        double rhs2 = 0.0;
        for (std::size_t i = 0; i < length; ++i) rhs2 += a[i] * sorted_b[i];
        if (lhs > rhs2 + slack) {
            ++out.violations;
            out.worst_slack = std::min(out.worst_slack, rhs2 - lhs);
        }
    }
    return out;
}

struct MomentScanRow {
    std::int64_t n = 0;
    int k = 0;
    double normalized = 0.0; // et^k E[L_n^k] / log^k n
    double limit = 1.0;      // k!
    double rel_dev = 0.0;    // |normalized/k! - 1|
};

struct MomentScanResult {
    std::vector<MomentScanRow> rows;
    double et_c = 0.0;
    std::string p0_route;
};

// Exact normalized moments along an n-grid: et^k E[L_n^k] / log^k n vs k!.
inline MomentScanResult moment_convergence_scan(const WalkSpec& z_walk, const std::vector<std::int64_t>& n_grid,
                                                int k_max, const P0Options& opt = {}) {
    if (!z_walk.discrete()) throw Error("moment scan runs in discrete time");
    if (n_grid.empty()) throw Error("n_grid must be non-empty");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1]) throw Error("n_grid must be increasing");

    MomentScanResult out;
    out.et_c = erdos_taylor_constant(z_walk);
    const auto column = p0_series_ex(z_walk.step, n_grid.back(), opt);
    out.p0_route = column.route;
    const auto moments = local_time_moments(column.values, n_grid, k_max);
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const double logn = std::log(static_cast<double>(n_grid[i]));
        for (int k = 0; k <= k_max; ++k) {
            MomentScanRow row;
            row.n = n_grid[i];
            row.k = k;
            row.limit = detail::factorial(k);
            row.normalized = moments[i][k] * std::pow(out.et_c / logn, k);
            row.rel_dev = std::abs(row.normalized / row.limit - 1.0);
            out.rows.push_back(row);
        }
    }
    return out;
}

} // namespace latticelab
