// mc.hpp -- seeded, reproducible Monte Carlo for one- and two-walk local
// times: environment paths, annealed and quenched moment estimators, the
// variance-across-environments scan and the joint-moment experiment.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "latticelab/errors.hpp"
#include "latticelab/lattice_map.hpp"
#include "latticelab/parallel.hpp"
#include "latticelab/rng.hpp"
#include "latticelab/stats.hpp"
#include "latticelab/walk.hpp"

namespace latticelab {

// ---------------------------------------------------------------------------
// Environments
// ---------------------------------------------------------------------------

// A stored realization of the Y walk: positions per tick in discrete time,
// jump times plus positions between jumps in continuous time.
struct EnvironmentPath {
    WalkSpec spec;
    double horizon = 0.0;
    std::vector<Vec2> positions;    // discrete: Y_0..Y_n; continuous: piece values
    std::vector<double> jump_times; // continuous only, strictly increasing in (0, horizon]
    std::uint64_t master_seed = 0;
    std::uint64_t env_index = 0;

    bool discrete() const { return spec.discrete(); }

    // Frozen-at-origin environment (Y == 0), handy for reductions.
    static EnvironmentPath zero(const WalkSpec& spec, double horizon) {
        EnvironmentPath env;
        env.spec = spec;
        env.horizon = horizon;
        if (spec.discrete()) {
            env.positions.assign(static_cast<std::size_t>(horizon) + 1, Vec2{0, 0});
        } else {
            env.positions.assign(1, Vec2{0, 0});
        }
        return env;
    }
};

namespace detail {

inline std::int64_t discrete_horizon(double t) {
    const std::int64_t n = static_cast<std::int64_t>(std::llround(t));
    if (std::abs(t - static_cast<double>(n)) > 1e-9 || n < 0) throw Error("discrete horizon must be a nonnegative integer");
    return n;
}

} // namespace detail

// Deterministic function of (spec, t, master_seed, env_index).
inline EnvironmentPath sample_environment(const WalkSpec& spec, double t, std::uint64_t master_seed,
                                          std::uint64_t env_index) {
    if (t < 0.0) throw Error("environment horizon must be >= 0");
    EnvironmentPath env;
    env.spec = spec;
    env.horizon = t;
    env.master_seed = master_seed;
    env.env_index = env_index;
    RngStream rng(master_seed, "env", env_index);
    const StepSampler sampler(spec.step);
    if (spec.discrete()) {
        const std::int64_t n = detail::discrete_horizon(t);
        env.positions.reserve(n + 1);
        Vec2 pos{0, 0};
        env.positions.push_back(pos);
        for (std::int64_t i = 0; i < n; ++i) {
            pos = pos + sampler.sample(rng);
            env.positions.push_back(pos);
        }
    } else {
        Vec2 pos{0, 0};
        env.positions.push_back(pos);
        double clock = rng.next_exponential(spec.rate);
        while (clock <= t) {
            env.jump_times.push_back(clock);
            pos = pos + sampler.sample(rng);
            env.positions.push_back(pos);
            clock += rng.next_exponential(spec.rate);
        }
    }
    return env;
}

// ---------------------------------------------------------------------------
// Local-time sampling
// ---------------------------------------------------------------------------

// Local time of a single walk at the origin up to t (counting time 0).
inline double sample_local_time_single(const WalkSpec& spec, const StepSampler& sampler, double t, RngStream& rng) {
    if (spec.discrete()) {
        const std::int64_t n = detail::discrete_horizon(t);
        std::int64_t hits = 1;
        Vec2 pos{0, 0};
        for (std::int64_t i = 0; i < n; ++i) {
            pos = pos + sampler.sample(rng);
            hits += pos.is_zero() ? 1 : 0;
        }
        return static_cast<double>(hits);
    }
    double local = 0.0, clock = 0.0;
    Vec2 pos{0, 0};
    while (clock < t) {
        const double gap = rng.next_exponential(spec.rate);
        const double next = std::min(clock + gap, t);
        if (pos.is_zero()) local += next - clock;
        clock = next;
        if (clock >= t) break;
        pos = pos + sampler.sample(rng);
    }
    return local;
}

// Collision local time L_t(X, Y) of a fresh X sample against a stored Y.
inline double local_time_two_walks(const WalkSpec& x_spec, const EnvironmentPath& env, double t, RngStream& rng) {
    if (x_spec.kind != env.spec.kind) throw MixedTimeKinds();
    if (t > env.horizon + 1e-12) throw HorizonExceeded();
    const StepSampler sampler(x_spec.step);
    if (x_spec.discrete()) {
        const std::int64_t n = detail::discrete_horizon(t);
        std::int64_t hits = 1; // X_0 = Y_0 = 0
        Vec2 pos{0, 0};
        for (std::int64_t i = 1; i <= n; ++i) {
            pos = pos + sampler.sample(rng);
            hits += (pos == env.positions[i]) ? 1 : 0;
        }
        return static_cast<double>(hits);
    }
    // merge X's fresh jumps with Y's stored jumps
    double local = 0.0, clock = 0.0;
    Vec2 xpos{0, 0};
    std::size_t yi = 0;
    Vec2 ypos = env.positions[0];
    double next_x = rng.next_exponential(x_spec.rate);
    while (clock < t) {
        const double next_y = yi < env.jump_times.size() ? env.jump_times[yi]
                                                         : std::numeric_limits<double>::infinity();
        const double next = std::min(std::min(next_x, next_y), t);
        if (xpos == ypos) local += next - clock;
        clock = next;
        if (clock >= t) break;
        if (next_x <= next_y) {
            xpos = xpos + sampler.sample(rng);
            next_x = clock + rng.next_exponential(x_spec.rate);
        } else {
            ++yi;
            ypos = env.positions[yi];
        }
    }
    return local;
}

// ---------------------------------------------------------------------------
// Estimates
// ---------------------------------------------------------------------------

struct EstimateWithCI {
    double estimate = 0.0;
    double se = std::numeric_limits<double>::infinity();
    std::uint64_t replicas = 0;
    std::uint64_t master_seed = 0;
    double z = 3.0;

    double lo() const { return estimate - z * se; }
    double hi() const { return estimate + z * se; }
};

struct MomentEstimates {
    double horizon = 0.0;
    double et_c = 0.0;                    // Erdos-Taylor constant of the (difference) walk
    std::vector<EstimateWithCI> raw;        // E[L^k], k = 1..k_max
    std::vector<EstimateWithCI> normalized; // E[(et_c L / log t)^k]
};

namespace detail {

constexpr std::uint64_t replica_chunk = 1024;

// Accumulates sums of L^k for k = 1..2*k_max in fixed replica order; chunk
// partials are combined in chunk order, so the reduction is deterministic.
template <class SampleFn>
MomentEstimates estimate_moments(double t, int k_max, std::uint64_t m, std::uint64_t master_seed, double et_c,
                                 unsigned workers, SampleFn&& sample) {
    if (k_max < 1) throw Error("k_max must be >= 1");
    const int nsum = 2 * k_max;
    const std::uint64_t chunks = (m + replica_chunk - 1) / replica_chunk;
    std::vector<std::vector<double>> partial(chunks, std::vector<double>(nsum, 0.0));
    parallel_chunks(m, replica_chunk, workers, [&](std::size_t chunk, std::uint64_t begin, std::uint64_t end) {
        auto& acc = partial[chunk];
        for (std::uint64_t r = begin; r < end; ++r) {
            const double l = sample(r);
            double p = 1.0;
            for (int k = 0; k < nsum; ++k) {
                p *= l;
                acc[k] += p;
            }
        }
    });
    std::vector<double> sums(nsum, 0.0);
    for (const auto& acc : partial)
        for (int k = 0; k < nsum; ++k) sums[k] += acc[k];

    MomentEstimates out;
    out.horizon = t;
    out.et_c = et_c;
    const double md = static_cast<double>(m);
    const double logt = std::log(t);
    for (int k = 1; k <= k_max; ++k) {
        EstimateWithCI est;
        est.replicas = m;
        est.master_seed = master_seed;
        est.estimate = sums[k - 1] / md;
        if (m >= 2) {
            const double second = sums[2 * k - 1] / md;
            const double var = std::max(0.0, second - est.estimate * est.estimate) * md / (md - 1.0);
            est.se = std::sqrt(var / md);
        }
        out.raw.push_back(est);
        EstimateWithCI norm = est;
        const double scale = std::pow(et_c / logt, k);
        norm.estimate *= scale;
        norm.se *= scale;
        out.normalized.push_back(norm);
    }
    return out;
}

} // namespace detail

// Moments of L_t for the (difference) walk `z_spec`, resampling the walk each
// replica, plus the Theorem-normalized variants.
inline MomentEstimates annealed_moments(const WalkSpec& z_spec, double t, int k_max, std::uint64_t m,
                                        std::uint64_t master_seed, unsigned workers = 1) {
    const double et_c = erdos_taylor_constant(z_spec);
    const StepSampler sampler(z_spec.step);
    return detail::estimate_moments(t, k_max, m, master_seed, et_c, workers, [&](std::uint64_t r) {
        RngStream rng(master_seed, "annealed", r);
        return sample_local_time_single(z_spec, sampler, t, rng);
    });
}

// Conditional moments E[L_t(X,Y)^k | Y] for one stored environment; replica
// streams are indexed by (env_index, replica) so distinct environments use
// independent randomness.
inline MomentEstimates quenched_moments(const WalkSpec& x_spec, const EnvironmentPath& env, double t, int k_max,
                                        std::uint64_t m, std::uint64_t master_seed, unsigned workers = 1) {
    if (t > env.horizon + 1e-12) throw HorizonExceeded();
    const double et_c = erdos_taylor_constant(difference_walk(x_spec, env.spec));
    return detail::estimate_moments(t, k_max, m, master_seed, et_c, workers, [&](std::uint64_t r) {
        RngStream rng(master_seed, "quenched", (env.env_index << 32) | r);
        return local_time_two_walks(x_spec, env, t, rng);
    });
}

// ---------------------------------------------------------------------------
// Variance-across-environments scan
// ---------------------------------------------------------------------------

struct QuenchedScanRow {
    double horizon = 0.0;
    int k = 1;
    std::vector<double> env_estimates;  // conditional k-th moment per environment
    std::vector<double> env_se;         // Monte Carlo se of each estimate
    double variance_raw = 0.0;          // sample variance across environments
    double mc_noise = 0.0;              // mean within-environment se^2 (bias term)
    double variance_debiased = 0.0;
    double normalizer = 1.0;            // log^{2k-1+eps} n
    double ratio = 0.0;
    double ratio_bootstrap_se = 0.0;
};

struct QuenchedScanResult {
    std::vector<QuenchedScanRow> rows;
    double epsilon = 0.5;
    std::uint64_t num_env = 0;
    std::uint64_t replicas = 0;
    std::uint64_t master_seed = 0;
};

// For each n: num_env fresh environments, conditional k-th moment of each via
// M replicas, unbiased variance across environments minus the mean Monte
// Carlo noise, compared against log^{2k-1+eps} n.
inline QuenchedScanResult quenched_variance_scan(const WalkSpec& x_spec, const WalkSpec& y_spec,
                                                 const std::vector<double>& n_grid, int k, std::uint64_t num_env,
                                                 std::uint64_t m, double epsilon, std::uint64_t master_seed,
                                                 unsigned workers = 1) {
    if (num_env < 2) throw InsufficientEnvironments();
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (!(n_grid[i] > n_grid[i - 1])) throw Error("n_grid must be increasing");
    QuenchedScanResult out;
    out.epsilon = epsilon;
    out.num_env = num_env;
    out.replicas = m;
    out.master_seed = master_seed;

    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
        const double t = n_grid[ni];
        QuenchedScanRow row;
        row.horizon = t;
        row.k = k;
        row.env_estimates.assign(num_env, 0.0);
        row.env_se.assign(num_env, 0.0);
        // one environment per chunk: the env loop parallelizes, each env runs
        // its replicas serially in index order
        parallel_chunks(num_env, 1, workers, [&](std::size_t, std::uint64_t e0, std::uint64_t e1) {
            for (std::uint64_t e = e0; e < e1; ++e) {
                const std::uint64_t env_key = static_cast<std::uint64_t>(ni) * num_env + e;
                const EnvironmentPath env = sample_environment(y_spec, t, master_seed, (1ull << 40) + env_key);
                double sum = 0.0, sum2 = 0.0;
                for (std::uint64_t r = 0; r < m; ++r) {
                    RngStream rng(master_seed, "quenched-scan", (env_key << 24) | r);
                    const double l = local_time_two_walks(x_spec, env, t, rng);
                    const double lk = std::pow(l, k);
                    sum += lk;
                    sum2 += lk * lk;
                }
                const double md = static_cast<double>(m);
                const double mean = sum / md;
                row.env_estimates[e] = mean;
                const double var = std::max(0.0, sum2 / md - mean * mean) * md / (md - 1.0);
                row.env_se[e] = std::sqrt(var / md);
            }
        });
        row.variance_raw = sample_variance(row.env_estimates);
        double noise = 0.0;
        for (const double se : row.env_se) noise += se * se;
        row.mc_noise = noise / static_cast<double>(num_env);
        row.variance_debiased = row.variance_raw - row.mc_noise;
        row.normalizer = std::pow(std::log(t), 2.0 * k - 1.0 + epsilon);
        row.ratio = row.variance_debiased / row.normalizer;

        // bootstrap over environments of the debiased ratio
        std::vector<double> packed(num_env);
        for (std::uint64_t e = 0; e < num_env; ++e) packed[e] = static_cast<double>(e);
        const auto& est = row.env_estimates;
        const auto& ses = row.env_se;
        const double norm = row.normalizer;
        row.ratio_bootstrap_se = bootstrap_se(
            packed,
            [&](const std::vector<double>& idx) {
                std::vector<double> vals(idx.size());
                double noise_b = 0.0;
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    const std::size_t e = static_cast<std::size_t>(idx[i]);
                    vals[i] = est[e];
                    noise_b += ses[e] * ses[e];
                }
                noise_b /= static_cast<double>(idx.size());
                return (sample_variance(vals) - noise_b) / norm;
            },
            master_seed ^ fnv1a64("scan-bootstrap") ^ ni);
        out.rows.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Joint conditional moments (exploratory)
// ---------------------------------------------------------------------------

struct JointMomentRow {
    std::vector<int> index;  // multi-index a over (Y_0==0, Y_1, ..., Y_k)
    double estimate = 0.0;
    double se = 0.0;
    double prediction = 1.0; // prod a_i! under the independence guess
};

struct JointMomentReport {
    std::vector<JointMomentRow> rows;
    std::vector<double> constants; // per-coordinate normalizing constants
    double horizon = 0.0;
    std::uint64_t replicas = 0;
};

// Estimates E[prod_i (c_i L_t(X, Y_i) / log t)^{a_i} | Y_1..Y_k] for all
// multi-indices |a| <= 2, with Y_0 == 0 prepended. One X replica is shared
// across the coordinates, which is exactly the conditional joint law.
inline JointMomentReport joint_conditional_moments(const WalkSpec& x_spec,
                                                   const std::vector<EnvironmentPath>& envs, double t,
                                                   std::uint64_t m, std::uint64_t master_seed,
                                                   unsigned workers = 1) {
    for (const auto& env : envs) {
        if (env.spec.kind != x_spec.kind) throw MixedTimeKinds();
        if (t > env.horizon + 1e-12) throw HorizonExceeded();
    }
    if (!x_spec.discrete()) throw Error("joint experiment currently runs in discrete time");

    const std::size_t d = envs.size() + 1;
    std::vector<double> constants(d);
    constants[0] = erdos_taylor_constant(x_spec);
    for (std::size_t i = 0; i < envs.size(); ++i)
        constants[i + 1] = erdos_taylor_constant(difference_walk(x_spec, envs[i].spec));
    const double logt = std::log(t);

    // multi-indices with |a| = 1 and |a| = 2
    std::vector<std::vector<int>> indices;
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<int> a(d, 0);
        a[i] = 1;
        indices.push_back(a);
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            std::vector<int> a(d, 0);
            a[i] += 1;
            a[j] += 1;
            indices.push_back(a);
        }

    const std::int64_t n = detail::discrete_horizon(t);
    const StepSampler sampler(x_spec.step);
    // X streams reuse the quenched keying of the first environment, so the
    // marginal along that coordinate reproduces quenched_moments replica by
    // replica (a single environment reduces to it outright).
    const std::uint64_t stream_base = envs.front().env_index << 32;
    const std::uint64_t chunks = (m + detail::replica_chunk - 1) / detail::replica_chunk;
    std::vector<std::vector<double>> partial(chunks, std::vector<double>(2 * indices.size(), 0.0));
    parallel_chunks(m, detail::replica_chunk, workers, [&](std::size_t chunk, std::uint64_t r0, std::uint64_t r1) {
        auto& acc = partial[chunk];
        std::vector<double> hits(d);
        std::vector<double> normalized(d);
        for (std::uint64_t r = r0; r < r1; ++r) {
            RngStream rng(master_seed, "quenched", stream_base | r);
            std::fill(hits.begin(), hits.end(), 1.0); // all walks collide at time 0
            Vec2 pos{0, 0};
            for (std::int64_t i = 1; i <= n; ++i) {
                pos = pos + sampler.sample(rng);
                if (pos.is_zero()) hits[0] += 1.0;
                for (std::size_t e = 0; e < envs.size(); ++e)
                    if (pos == envs[e].positions[i]) hits[e + 1] += 1.0;
            }
            for (std::size_t i = 0; i < d; ++i) normalized[i] = constants[i] * hits[i] / logt;
            for (std::size_t q = 0; q < indices.size(); ++q) {
                double v = 1.0;
                for (std::size_t i = 0; i < d; ++i)
                    for (int rep = 0; rep < indices[q][i]; ++rep) v *= normalized[i];
                acc[2 * q] += v;
                acc[2 * q + 1] += v * v;
            }
        }
    });

    JointMomentReport report;
    report.constants = constants;
    report.horizon = t;
    report.replicas = m;
    const double md = static_cast<double>(m);
    for (std::size_t q = 0; q < indices.size(); ++q) {
        double sum = 0.0, sum2 = 0.0;
        for (const auto& acc : partial) {
            sum += acc[2 * q];
            sum2 += acc[2 * q + 1];
        }
        JointMomentRow row;
        row.index = indices[q];
        row.estimate = sum / md;
        const double var = std::max(0.0, sum2 / md - row.estimate * row.estimate) * md / std::max(1.0, md - 1.0);
        row.se = std::sqrt(var / md);
        row.prediction = 1.0;
        for (const int a : indices[q])
            for (int v = 2; v <= a; ++v) row.prediction *= v;
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace latticelab
