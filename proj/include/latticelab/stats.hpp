// stats.hpp -- small estimation helpers: mean/se, KS distances against the
// mean-1 exponential, log-log trend slopes, bootstrap resampling.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "latticelab/errors.hpp"
#include "latticelab/rng.hpp"

namespace latticelab {

struct MeanSe {
    double mean = 0.0;
    double se = std::numeric_limits<double>::infinity();
    std::uint64_t count = 0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe out;
    out.count = xs.size();
    if (xs.empty()) return out;
    double sum = 0.0;
    for (const double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (const double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (static_cast<double>(xs.size() - 1) * static_cast<double>(xs.size())));
    return out;
}

// Unbiased sample variance.
inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw InsufficientEnvironments();
    double mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(xs.size() - 1);
}

struct KsDistances {
    double d_plus = 0.0;  // sup_x (F_emp - F_model): excess mass at small values
    double d_minus = 0.0; // sup_x (F_model - F_emp)
    double d = 0.0;
};

// Distances between the empirical law of `samples` and Exp(1).
inline KsDistances ks_exponential(std::vector<double> samples) {
    if (samples.empty()) throw Error("ks needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    KsDistances out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = 1.0 - std::exp(-std::max(0.0, samples[i]));
        out.d_plus = std::max(out.d_plus, (static_cast<double>(i) + 1.0) / n - f);
        out.d_minus = std::max(out.d_minus, f - static_cast<double>(i) / n);
    }
    out.d = std::max(out.d_plus, out.d_minus);
    return out;
}

// Least-squares slope of log(y) against log(x); requires positive data.
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw Error("slope needs >= 2 points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw Error("log-log slope needs positive data");
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(xs.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Bootstrap standard error of a statistic of an i.i.d. sample; the resampling
// stream is seeded explicitly, so the answer is deterministic.
template <class Stat>
double bootstrap_se(const std::vector<double>& xs, Stat&& stat, std::uint64_t master_seed, int replicates = 400) {
    if (xs.size() < 2) return std::numeric_limits<double>::infinity();
    std::vector<double> stats;
    stats.reserve(replicates);
    std::vector<double> resample(xs.size());
    for (int b = 0; b < replicates; ++b) {
        RngStream rng(master_seed, "bootstrap", static_cast<std::uint64_t>(b));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const std::size_t j = static_cast<std::size_t>(
                (static_cast<std::uint64_t>(rng.next_u32()) * xs.size()) >> 32);
            resample[i] = xs[j];
        }
        stats.push_back(stat(resample));
    }
    double mean = 0.0;
    for (const double s : stats) mean += s;
    mean /= static_cast<double>(stats.size());
    double ss = 0.0;
    for (const double s : stats) ss += (s - mean) * (s - mean);
    return std::sqrt(ss / static_cast<double>(stats.size() - 1));
}

} // namespace latticelab
