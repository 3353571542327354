// experiment.hpp -- config-driven experiment orchestration: validation, run
// dispatch, result persistence, and report rendering.
#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latticelab/catalyst.hpp"
#include "latticelab/io.hpp"
#include "latticelab/kernels.hpp"
#include "latticelab/mc.hpp"
#include "latticelab/verifier.hpp"
#include "latticelab/walk.hpp"

namespace latticelab {

constexpr std::int64_t max_discrete_horizon = 1ll << 22;
constexpr double max_continuous_horizon = 1e6;

inline WalkSpec z_walk_from_json(const nlohmann::json& j) {
    if (j.is_string() && j.get<std::string>() == "srw-pair")
        return difference_walk(WalkSpec::make_discrete(preset_step("srw")),
                               WalkSpec::make_discrete(preset_step("srw")));
    return walk_spec_from_json(j);
}

namespace detail {

inline Vec2 vec_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw Error("expected [dx, dy]");
    return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

inline bool horizon_ok(const WalkSpec& w, double horizon) {
    if (w.discrete())
        return horizon >= 0 && horizon <= static_cast<double>(max_discrete_horizon) &&
               std::abs(horizon - std::llround(horizon)) < 1e-9;
    return horizon >= 0 && horizon <= max_continuous_horizon;
}

// nlohmann stores C++ int literals as signed; treat any nonnegative integer as unsigned
inline bool is_uint(const nlohmann::json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

} // namespace detail

// Empty result iff run_experiment would accept the document; each violation
// names the offending field.
inline std::vector<std::string> validate_config(const nlohmann::json& cfg) try {
    std::vector<std::string> out;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) out.push_back(msg);
    };
    if (!cfg.is_object()) return {"config must be a JSON object"};
    need(cfg.contains("master_seed") && detail::is_uint(cfg.at("master_seed")), "master_seed required");
    if (!cfg.contains("kind") || !cfg.at("kind").is_string()) {
        out.push_back("kind required");
        return out;
    }
    const std::string kind = cfg.at("kind").get<std::string>();
    const std::vector<std::string> kinds{"annealed",   "quenched", "variance-scan", "lemma-check",
                                         "moment-scan", "pam",      "pinning",       "joint"};
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
        out.push_back("unknown kind: " + kind);
        return out;
    }
    if (cfg.contains("workers"))
        need(detail::is_uint(cfg.at("workers")) && cfg.at("workers").get<std::uint64_t>() >= 1,
             "workers must be >= 1");

    auto check_walk = [&](const char* field, bool allow_pair) {
        if (!cfg.contains(field)) {
            out.push_back(std::string(field) + " required");
            return false;
        }
        try {
            if (allow_pair) z_walk_from_json(cfg.at(field));
            else walk_spec_from_json(cfg.at(field));
            return true;
        } catch (const std::exception& e) {
            out.push_back(std::string(field) + ": " + e.what());
            return false;
        }
    };
    auto check_horizon = [&](const WalkSpec& w) {
        if (!cfg.contains("horizon") || !cfg.at("horizon").is_number()) {
            out.push_back("horizon required");
            return;
        }
        need(detail::horizon_ok(w, cfg.at("horizon").get<double>()),
             w.discrete() ? "horizon must be an integer in [0, 2^22]" : "horizon must lie in [0, 1e6]");
    };
    auto check_replicas = [&](std::uint64_t lo = 2) {
        if (!cfg.contains("replicas") || !detail::is_uint(cfg.at("replicas")) ||
            cfg.at("replicas").get<std::uint64_t>() < lo)
            out.push_back("M >= " + std::to_string(lo));
    };
    auto check_grid = [&](const char* field) {
        if (!cfg.contains(field) || !cfg.at(field).is_array() || cfg.at(field).empty()) {
            out.push_back(std::string(field) + " must be a non-empty increasing array");
            return false;
        }
        double prev = -1.0;
        for (const auto& v : cfg.at(field)) {
            if (!v.is_number() || v.get<double>() <= prev) {
                out.push_back(std::string(field) + " must be a non-empty increasing array");
                return false;
            }
            prev = v.get<double>();
        }
        return true;
    };

    if (kind == "annealed") {
        if (cfg.contains("z_walk")) {
            if (check_walk("z_walk", true)) check_horizon(z_walk_from_json(cfg.at("z_walk")));
        } else if (check_walk("x_walk", false) && check_walk("y_walk", false)) {
            check_horizon(walk_spec_from_json(cfg.at("x_walk")));
        }
        check_replicas();
        if (cfg.contains("k_max"))
            need(detail::is_uint(cfg.at("k_max")) && cfg.at("k_max").get<int>() >= 1 &&
                     cfg.at("k_max").get<int>() <= 6,
                 "k_max must lie in [1, 6]");
    } else if (kind == "quenched") {
        if (check_walk("x_walk", false) && check_walk("y_walk", false))
            check_horizon(walk_spec_from_json(cfg.at("x_walk")));
        check_replicas();
        if (cfg.contains("num_env"))
            need(detail::is_uint(cfg.at("num_env")) && cfg.at("num_env").get<std::uint64_t>() >= 1,
                 "num_env must be >= 1");
    } else if (kind == "variance-scan") {
        check_walk("x_walk", false);
        check_walk("y_walk", false);
        if (check_grid("n_grid"))
            for (const auto& v : cfg.at("n_grid")) {
                const double d = v.get<double>();
                if (d > static_cast<double>(max_discrete_horizon) || std::abs(d - std::llround(d)) > 1e-9) {
                    out.push_back("n_grid entries must be integers <= 2^22");
                    break;
                }
            }
        check_replicas();
        need(cfg.contains("num_env") && detail::is_uint(cfg.at("num_env")) &&
                 cfg.at("num_env").get<std::uint64_t>() >= 20,
             "num_env must be >= 20");
        if (cfg.contains("epsilon")) need(cfg.at("epsilon").get<double>() > 0.0, "epsilon must be > 0");
        if (cfg.contains("k"))
            need(detail::is_uint(cfg.at("k")) && cfg.at("k").get<int>() >= 1, "k must be >= 1");
    } else if (kind == "lemma-check") {
        const std::string lemma = cfg.value("lemma", "");
        if (lemma == "gradpot") {
            check_walk("walk", false);
            if (cfg.contains("z0")) {
                try {
                    detail::vec_from_json(cfg.at("z0"));
                } catch (const std::exception&) {
                    out.push_back("z0 must be [dx, dy]");
                }
            }
        } else if (lemma == "rwconv") {
            check_walk("walk", false);
            const double q = cfg.value("q", 1.5);
            need(q >= 1.0 && q < 2.0, "q must lie in [1,2)");
            if (cfg.contains("i_list")) check_grid("i_list");
        } else if (lemma == "rearrange") {
            need(cfg.value("trials", 1) >= 1, "trials must be >= 1");
            need(cfg.value("length", 1) >= 1, "length must be >= 1");
        } else {
            out.push_back("lemma must be one of gradpot|rwconv|rearrange");
        }
    } else if (kind == "moment-scan") {
        if (cfg.contains("z_walk")) check_walk("z_walk", true);
        else {
            check_walk("x_walk", false);
            check_walk("y_walk", false);
        }
        if (check_grid("n_grid"))
            need(cfg.at("n_grid").back().get<double>() <= static_cast<double>(max_discrete_horizon),
                 "n_grid entries must be <= 2^22");
        if (cfg.contains("k_max"))
            need(detail::is_uint(cfg.at("k_max")) && cfg.at("k_max").get<int>() >= 1 &&
                     cfg.at("k_max").get<int>() <= 6,
                 "k_max must lie in [1, 6]");
    } else if (kind == "pam") {
        need(cfg.value("kappa", 1.0) >= 0.0, "kappa must be >= 0");
        need(cfg.value("rho", 1.0) >= 0.0, "rho must be >= 0");
        const double t = cfg.value("t", 1.0);
        need(t >= 0.0 && t <= max_continuous_horizon, "t must lie in [0, 1e6]");
        need(cfg.value("tol", 1e-8) > 0.0, "tol must be > 0");
        const std::int64_t rbox = cfg.value("rbox", 0ll);
        need(rbox >= static_cast<std::int64_t>(std::ceil(3.0 * std::sqrt(std::max(0.0, t)))),
             "rbox must be >= ceil(3 sqrt(t))");
        check_replicas();
    } else if (kind == "pinning") {
        check_walk("x_walk", false);
        check_walk("y_walk", false);
        check_grid("t_grid");
        if (cfg.contains("t_grid") && cfg.at("t_grid").is_array())
            for (const auto& v : cfg.at("t_grid"))
                if (v.is_number() && v.get<double>() > 1024) {
                    out.push_back("t_grid entries must be <= 1024 (cubic-cost exact transfer operator)");
                    break;
                }
        need(cfg.contains("num_env") && detail::is_uint(cfg.at("num_env")) &&
                 cfg.at("num_env").get<std::uint64_t>() >= 1,
             "num_env must be >= 1");
    } else if (kind == "joint") {
        check_walk("x_walk", false);
        if (!cfg.contains("y_walks") || !cfg.at("y_walks").is_array() || cfg.at("y_walks").empty())
            out.push_back("y_walks must be a non-empty array of walk specs");
        else
            for (const auto& w : cfg.at("y_walks"))
                try {
                    walk_spec_from_json(w);
                } catch (const std::exception& e) {
                    out.push_back(std::string("y_walks: ") + e.what());
                }
        if (cfg.contains("x_walk") && cfg.at("x_walk").is_string())
            check_horizon(WalkSpec::make_discrete(preset_step(cfg.at("x_walk").get<std::string>())));
        else if (cfg.contains("horizon"))
            need(cfg.at("horizon").is_number(), "horizon required");
        else
            out.push_back("horizon required");
        check_replicas();
    }
    return out;
} catch (const std::exception& e) {
    return {std::string("config: ") + e.what()};
}

struct RunOutcome {
    std::filesystem::path run_dir;
    bool pass = true;
    std::string summary;
};

namespace detail {

inline std::string estimate_csv(const std::string& id, const std::vector<std::string>& keys,
                                const std::vector<MomentEstimates>& ests, bool normalized, std::uint64_t seed) {
    CsvWriter csv({"experiment_id", "n_or_t", "k", "env", "estimate", "stderr", "M", "seed"});
    for (std::size_t e = 0; e < ests.size(); ++e) {
        const auto& list = normalized ? ests[e].normalized : ests[e].raw;
        for (std::size_t k = 0; k < list.size(); ++k)
            csv.row({id, format_double(ests[e].horizon), std::to_string(k + 1), keys[e],
                     format_double(list[k].estimate), format_double(list[k].se), std::to_string(list[k].replicas),
                     std::to_string(seed)});
    }
    return csv.render();
}

inline std::string ratio_csv(const RatioReport& report) {
    CsvWriter csv({"input", "lhs", "rhs", "ratio"});
    for (const auto& row : report.rows)
        csv.row({row.input, format_double(row.lhs), format_double(row.rhs), format_double(row.ratio)});
    return csv.render();
}

} // namespace detail

// Validates, dispatches to the owning module, writes result CSVs plus a
// checksummed manifest. The pass bit reflects the experiment's own criterion
// (lemma trends, oracle agreement); report-only kinds always pass.
inline RunOutcome run_experiment(const nlohmann::json& cfg) {
    {
        const auto violations = validate_config(cfg);
        if (!violations.empty()) {
            std::string joined;
            for (const auto& v : violations) joined += (joined.empty() ? "" : "; ") + v;
            throw ConfigInvalid(joined);
        }
    }
    const std::string kind = cfg.at("kind").get<std::string>();
    const std::uint64_t seed = cfg.at("master_seed").get<std::uint64_t>();
    const unsigned workers = cfg.contains("workers") ? cfg.at("workers").get<unsigned>() : default_workers();
    const std::string id = cfg.value("id", kind + "-seed" + std::to_string(seed));
    const char* env_root = std::getenv("LATTICELAB_OUT");
    const std::filesystem::path root = env_root != nullptr ? env_root : cfg.value("out_dir", "runs");

    RunDirectory run(root / id);
    RunOutcome outcome;
    outcome.run_dir = run.path();
    std::ostringstream summary;

    if (kind == "annealed") {
        const WalkSpec z = cfg.contains("z_walk")
                               ? z_walk_from_json(cfg.at("z_walk"))
                               : difference_walk(walk_spec_from_json(cfg.at("x_walk")),
                                                 walk_spec_from_json(cfg.at("y_walk")));
        const double horizon = cfg.at("horizon").get<double>();
        const int k_max = cfg.value("k_max", 2);
        const std::uint64_t m = cfg.at("replicas").get<std::uint64_t>();
        const auto est = annealed_moments(z, horizon, k_max, m, seed, workers);
        run.emit("results.csv", detail::estimate_csv(id, {"annealed"}, {est}, false, seed));
        run.emit("normalized.csv", detail::estimate_csv(id, {"annealed"}, {est}, true, seed));
        summary << "annealed moments at n_or_t=" << horizon << ", k<=" << k_max << ", M=" << m
                << "; E[L]=" << format_double(est.raw[0].estimate) << " (se " << format_double(est.raw[0].se)
                << ")";
    } else if (kind == "quenched") {
        const WalkSpec x = walk_spec_from_json(cfg.at("x_walk"));
        const WalkSpec y = walk_spec_from_json(cfg.at("y_walk"));
        const double horizon = cfg.at("horizon").get<double>();
        const int k_max = cfg.value("k_max", 2);
        const std::uint64_t m = cfg.at("replicas").get<std::uint64_t>();
        const std::uint64_t num_env = cfg.value("num_env", 1ull);
        std::vector<MomentEstimates> ests(num_env);
        std::vector<std::string> keys(num_env);
        parallel_chunks(num_env, 1, workers, [&](std::size_t, std::uint64_t e0, std::uint64_t e1) {
            for (std::uint64_t e = e0; e < e1; ++e) {
                const auto env = sample_environment(y, horizon, seed, e);
                ests[e] = quenched_moments(x, env, horizon, k_max, m, seed, 1);
                keys[e] = std::to_string(e);
            }
        });
        run.emit("results.csv", detail::estimate_csv(id, keys, ests, false, seed));
        run.emit("normalized.csv", detail::estimate_csv(id, keys, ests, true, seed));
        std::vector<double> k1;
        for (const auto& e : ests) k1.push_back(e.raw[0].estimate);
        const auto ms = mean_se(k1);
        summary << "quenched moments over " << num_env << " environments at n_or_t=" << horizon
                << "; mean E[L|Y]=" << format_double(ms.mean);
    } else if (kind == "variance-scan") {
        const WalkSpec x = walk_spec_from_json(cfg.at("x_walk"));
        const WalkSpec y = walk_spec_from_json(cfg.at("y_walk"));
        std::vector<double> n_grid;
        for (const auto& v : cfg.at("n_grid")) n_grid.push_back(v.get<double>());
        const int k = cfg.value("k", 1);
        const std::uint64_t num_env = cfg.at("num_env").get<std::uint64_t>();
        const std::uint64_t m = cfg.at("replicas").get<std::uint64_t>();
        const double eps = cfg.value("epsilon", 0.5);
        const auto scan = quenched_variance_scan(x, y, n_grid, k, num_env, m, eps, seed, workers);

        CsvWriter per_env({"experiment_id", "n_or_t", "k", "env", "estimate", "stderr", "M", "seed"});
        for (const auto& row : scan.rows)
            for (std::size_t e = 0; e < row.env_estimates.size(); ++e)
                per_env.row({id, format_double(row.horizon), std::to_string(row.k), std::to_string(e),
                             format_double(row.env_estimates[e]), format_double(row.env_se[e]),
                             std::to_string(m), std::to_string(seed)});
        run.emit("results.csv", per_env.render());

        CsvWriter sc({"n", "k", "variance_raw", "mc_noise", "variance_debiased", "normalizer", "ratio",
                      "ratio_bootstrap_se"});
        for (const auto& row : scan.rows)
            sc.row({format_double(row.horizon), std::to_string(row.k), format_double(row.variance_raw),
                    format_double(row.mc_noise), format_double(row.variance_debiased),
                    format_double(row.normalizer), format_double(row.ratio),
                    format_double(row.ratio_bootstrap_se)});
        run.emit("scan.csv", sc.render());

        int raw_inversions = 0, hard_inversions = 0;
        for (std::size_t i = 1; i < scan.rows.size(); ++i) {
            const double gap = scan.rows[i].ratio - scan.rows[i - 1].ratio;
            if (gap > 0.0) ++raw_inversions;
            const double tol = 2.0 * std::sqrt(scan.rows[i].ratio_bootstrap_se * scan.rows[i].ratio_bootstrap_se +
                                               scan.rows[i - 1].ratio_bootstrap_se *
                                                   scan.rows[i - 1].ratio_bootstrap_se);
            if (gap > tol) ++hard_inversions;
        }
        outcome.pass = hard_inversions == 0 && raw_inversions <= 1;
        summary << (outcome.pass ? "PASS" : "FAIL") << " variance ratio trend: inversions=" << raw_inversions
                << " beyond-2sigma=" << hard_inversions << "; ratios";
        for (const auto& row : scan.rows) summary << " " << format_double(row.ratio);
    } else if (kind == "lemma-check") {
        const std::string lemma = cfg.at("lemma").get<std::string>();
        const double threshold = cfg.value("slope_threshold", 0.1);
        if (lemma == "gradpot") {
            const WalkSpec walk = walk_spec_from_json(cfg.at("walk"));
            const Vec2 z0 = cfg.contains("z0") ? detail::vec_from_json(cfg.at("z0")) : Vec2{1, 0};
            std::vector<Vec2> xs;
            if (cfg.contains("x_list"))
                for (const auto& v : cfg.at("x_list")) xs.push_back(detail::vec_from_json(v));
            else
                for (const auto& v : cfg.value("x_norms", std::vector<std::int64_t>{4, 8, 16, 32}))
                    xs.push_back({v, 0});
            const auto report = check_gradpot(walk, z0, xs, cfg.value("trunc_factor", 4ll), workers);
            run.emit("check.csv", detail::ratio_csv(report));
            outcome.pass = report.trend_slope <= threshold;
            summary << (outcome.pass ? "PASS" : "FAIL") << " gradpot trend slope="
                    << format_double(report.trend_slope) << " max_ratio=" << format_double(report.max_ratio);
            if (!report.note.empty()) summary << " (" << report.note << ")";
        } else if (lemma == "rwconv") {
            const WalkSpec walk = walk_spec_from_json(cfg.at("walk"));
            const double q = cfg.value("q", 1.5);
            const Vec2 v = cfg.contains("v") ? detail::vec_from_json(cfg.at("v")) : Vec2{5, 0};
            std::vector<std::int64_t> is;
            if (cfg.contains("i_list"))
                for (const auto& iv : cfg.at("i_list")) is.push_back(iv.get<std::int64_t>());
            else
                is = {4, 16, 64, 256};
            const auto report = check_rwconv(walk, q, v, is, workers);
            run.emit("check.csv", detail::ratio_csv(report));
            outcome.pass = report.trend_slope <= threshold;
            summary << (outcome.pass ? "PASS" : "FAIL") << " rwconv trend slope="
                    << format_double(report.trend_slope) << " max_ratio=" << format_double(report.max_ratio);
        } else {
            const auto result = check_rearrangement(cfg.value("trials", 10000ull), cfg.value("length", 64ull), seed);
            CsvWriter csv({"input", "lhs", "rhs", "ratio"});
            csv.row({"trials=" + std::to_string(result.trials), std::to_string(result.violations), "0",
                     format_double(static_cast<double>(result.violations))});
            run.emit("check.csv", csv.render());
            outcome.pass = result.violations == 0;
            summary << (outcome.pass ? "PASS" : "FAIL") << " violations: " << result.violations;
        }
    } else if (kind == "moment-scan") {
        const WalkSpec z = cfg.contains("z_walk")
                               ? z_walk_from_json(cfg.at("z_walk"))
                               : difference_walk(walk_spec_from_json(cfg.at("x_walk")),
                                                 walk_spec_from_json(cfg.at("y_walk")));
        std::vector<std::int64_t> n_grid;
        for (const auto& v : cfg.at("n_grid")) n_grid.push_back(v.get<std::int64_t>());
        const int k_max = cfg.value("k_max", 2);
        P0Options opt;
        opt.workers = workers;
        const auto scan = moment_convergence_scan(z, n_grid, k_max, opt);
        CsvWriter sc({"n", "k", "normalized", "k_factorial", "rel_dev"});
        for (const auto& row : scan.rows)
            sc.row({std::to_string(row.n), std::to_string(row.k), format_double(row.normalized),
                    format_double(row.limit), format_double(row.rel_dev)});
        run.emit("scan.csv", sc.render());
        if (cfg.value("export_p0", false)) {
            const auto g = p0_series(z.step, n_grid.back(), opt);
            CsvWriter p0({"j", "p_j_0"});
            for (std::size_t j = 0; j < g.size(); ++j) p0.row({std::to_string(j), format_double(g[j])});
            run.emit("p0.csv", p0.render());
        }
        if (cfg.contains("export_pmf_at")) {
            const std::int64_t n = cfg.at("export_pmf_at").get<std::int64_t>();
            if (n > 4096) throw ConfigInvalid("export_pmf_at must be <= 4096 (quadratic renewal convolution)");
            const auto pmf = local_time_pmf(z, n, opt);
            CsvWriter pc({"m", "prob"});
            for (std::size_t mm = 1; mm <= pmf.prob.size(); ++mm)
                pc.row({std::to_string(mm), format_double(pmf.prob[mm - 1])});
            run.emit("pmf.csv", pc.render());
        }
        const std::int64_t period = detect_period(z.step);
        summary << "moment scan over " << n_grid.size() << " horizons, k<=" << k_max << ", route="
                << scan.p0_route;
        if (period != 1) summary << " [warning: walk has period " << period << "; LCLT-style diagnostics apply per period class]";
        for (const auto& row : scan.rows)
            if (row.n == n_grid.back() && row.k >= 1)
                summary << " | k=" << row.k << " dev=" << format_double(row.rel_dev);
    } else if (kind == "pam") {
        PamConfig pc;
        pc.kappa = cfg.value("kappa", 1.0);
        pc.gamma = cfg.value("gamma", 1.0);
        pc.rho = cfg.value("rho", 1.0);
        pc.t = cfg.value("t", 4.0);
        pc.rbox = cfg.value("rbox", 40ll);
        pc.tol = cfg.value("tol", 1e-8);
        pc.boundary_threshold = cfg.value("boundary_threshold", 1e-8);
        const std::uint64_t m = cfg.at("replicas").get<std::uint64_t>();
        const WalkSpec y_spec = WalkSpec::make_continuous(preset_step("srw"), pc.rho > 0.0 ? pc.rho : 1.0);
        const EnvironmentPath env = pc.rho > 0.0
                                        ? sample_environment(y_spec, pc.t, seed, cfg.value("env_index", 0ull))
                                        : EnvironmentPath::zero(y_spec, pc.t);
        const auto field = pam_solve(pc, env);
        const auto fk = pam_feynman_kac(pc, env, {0, 0}, m, seed, workers);

        CsvWriter fc({"x", "y", "u"});
        for (std::int64_t yy = -pc.rbox; yy <= pc.rbox; ++yy)
            for (std::int64_t xx = -pc.rbox; xx <= pc.rbox; ++xx)
                fc.row({std::to_string(xx), std::to_string(yy), format_double(field.at(xx, yy))});
        run.emit("field.csv", fc.render());
        CsvWriter rc({"experiment_id", "n_or_t", "k", "env", "estimate", "stderr", "M", "seed"});
        rc.row({id, format_double(pc.t), "1", "fk", format_double(fk.estimate), format_double(fk.se),
                std::to_string(m), std::to_string(seed)});
        rc.row({id, format_double(pc.t), "1", "solve", format_double(field.at(0, 0)), "0", "0",
                std::to_string(seed)});
        run.emit("results.csv", rc.render());

        const double gap = std::abs(fk.estimate - field.at(0, 0));
        outcome.pass = gap <= 3.0 * fk.se || fk.se == 0.0;
        summary << (outcome.pass ? "PASS" : "FAIL") << " pam cross-oracle: solve u(t,0)="
                << format_double(field.at(0, 0)) << " fk=" << format_double(fk.estimate) << " (se "
                << format_double(fk.se) << "), boundary_ratio=" << format_double(field.boundary_mass_ratio);
    } else if (kind == "pinning") {
        PinningConfig pc;
        pc.x_walk = walk_spec_from_json(cfg.at("x_walk"));
        pc.y_walk = walk_spec_from_json(cfg.at("y_walk"));
        pc.gamma = cfg.value("gamma", 1.0);
        std::vector<std::int64_t> t_grid;
        for (const auto& v : cfg.at("t_grid")) t_grid.push_back(v.get<std::int64_t>());
        const std::uint64_t num_env = cfg.at("num_env").get<std::uint64_t>();
        const auto est = free_energy_estimate(pc, t_grid, num_env, seed, workers);

        CsvWriter csv({"t", "env_index", "log_partition", "per_time_rate"});
        for (const auto& point : est.points)
            for (std::size_t e = 0; e < point.env_rates.size(); ++e)
                csv.row({std::to_string(point.t), std::to_string(e),
                         format_double(point.env_rates[e] * static_cast<double>(point.t)),
                         format_double(point.env_rates[e])});
        run.emit("pinning.csv", csv.render());
        summary << "free-energy lower bound lambda>=" << format_double(est.lambda_lower) << " at gamma="
                << format_double(pc.gamma) << "; sign: " << (est.lambda_lower > 0.0 ? "positive" : "nonpositive");
    } else { // joint
        const WalkSpec x = walk_spec_from_json(cfg.at("x_walk"));
        const double horizon = cfg.at("horizon").get<double>();
        const std::uint64_t m = cfg.at("replicas").get<std::uint64_t>();
        std::vector<EnvironmentPath> envs;
        std::size_t e = 0;
        for (const auto& w : cfg.at("y_walks"))
            envs.push_back(sample_environment(walk_spec_from_json(w), horizon, seed, e++));
        const auto report = joint_conditional_moments(x, envs, horizon, m, seed, workers);
        CsvWriter csv({"multi_index", "estimate", "stderr", "prediction", "ratio"});
        for (const auto& row : report.rows) {
            std::string key = "a=(";
            for (std::size_t i = 0; i < row.index.size(); ++i) key += (i ? "," : "") + std::to_string(row.index[i]);
            key += ")";
            csv.row({key, format_double(row.estimate), format_double(row.se), format_double(row.prediction),
                     format_double(row.estimate / row.prediction)});
        }
        run.emit("joint.csv", csv.render());
        summary << "joint conditional moments over " << envs.size() << " environments at n=" << horizon
                << ", M=" << m << " (exploratory; no pass/fail)";
    }

    outcome.summary = summary.str();
    run.finalize(cfg, outcome.summary, outcome.pass);
    return outcome;
}

// Human-readable rendering of a finished run; verifies manifest checksums.
inline std::string render_report(const std::filesystem::path& run_dir) {
    const auto manifest = load_verified_manifest(run_dir);
    std::ostringstream out;
    out << "run: " << run_dir.string() << "\n";
    out << "kind: " << manifest.at("config").value("kind", "?") << "  seed: "
        << manifest.at("config").value("master_seed", 0ull) << "\n";
    out << "started: " << manifest.value("started_utc", "?") << "  finished: " << manifest.value("finished_utc", "?")
        << "\n";
    out << "summary: " << manifest.value("summary", "") << "\n";
    out << "verdict: " << (manifest.value("pass", true) ? "PASS" : "FAIL") << "\n";
    for (const auto& [name, sum] : manifest.at("outputs").items()) {
        out << "\n== " << name << " (" << sum.get<std::string>() << ")\n";
        const std::string bytes = read_file(run_dir / name);
        std::size_t lines = 0;
        std::istringstream in(bytes);
        std::string line;
        std::vector<std::string> head, tail;
        while (std::getline(in, line)) {
            ++lines;
            if (head.size() < 24) head.push_back(line);
            else {
                tail.push_back(line);
                if (tail.size() > 4) tail.erase(tail.begin());
            }
        }
        for (const auto& l : head) out << "  " << l << "\n";
        if (lines > head.size() + tail.size()) out << "  ... (" << lines << " lines)\n";
        for (const auto& l : tail) out << "  " << l << "\n";
    }
    return out.str();
}

} // namespace latticelab
