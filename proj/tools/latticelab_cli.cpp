// latticelab CLI: run experiments from JSON configs, validate configs, render
// reports of finished runs, list walk presets.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "latticelab/experiment.hpp"

namespace {

using nlohmann::json;

json load_config(const std::string& path, const std::vector<std::string>& sets, bool seed_given,
                 std::uint64_t seed, bool workers_given, unsigned workers, const std::string& out_dir) {
    json cfg = json::parse(latticelab::read_file(path));
    for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw latticelab::ConfigInvalid("--set expects key=value, got: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        try {
            cfg[key] = json::parse(value);
        } catch (const json::parse_error&) {
            cfg[key] = value; // bare strings are fine
        }
    }
    if (seed_given) cfg["master_seed"] = seed;
    if (workers_given) cfg["workers"] = workers;
    if (!out_dir.empty()) cfg["out_dir"] = out_dir;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"latticelab: local times of 2D lattice random walks -- exact kernels, Monte Carlo, lemma checks"};
    app.require_subcommand(1);

    std::string config_path, run_dir, out_dir;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    unsigned workers = 0;

    auto* run_cmd = app.add_subcommand("run", "validate a config, run the experiment, write CSVs + manifest");
    run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
    auto* run_seed = run_cmd->add_option("--seed", seed, "override master_seed");
    auto* run_workers = run_cmd->add_option("--workers", workers, "override worker count");
    run_cmd->add_option("--out", out_dir, "override output root (LATTICELAB_OUT wins over both)");
    run_cmd->add_option("--set", sets, "override a top-level field, key=JSON");

    auto* val_cmd = app.add_subcommand("validate", "list config violations without running");
    val_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
    auto* val_seed = val_cmd->add_option("--seed", seed, "override master_seed");
    auto* val_workers = val_cmd->add_option("--workers", workers, "override worker count");
    val_cmd->add_option("--set", sets, "override a top-level field, key=JSON");

    auto* rep_cmd = app.add_subcommand("report", "verify checksums and print a run summary");
    rep_cmd->add_option("run_dir", run_dir, "finished run directory")->required();

    app.add_subcommand("presets", "list built-in step distributions");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const json cfg = load_config(config_path, sets, run_seed->count() > 0, seed,
                                         run_workers->count() > 0, workers, out_dir);
            const auto outcome = latticelab::run_experiment(cfg);
            std::cout << outcome.summary << "\n";
            std::cout << "run dir: " << outcome.run_dir.string() << "\n";
            return outcome.pass ? 0 : 1;
        }
        if (val_cmd->parsed()) {
            const json cfg = load_config(config_path, sets, val_seed->count() > 0, seed,
                                         val_workers->count() > 0, workers, "");
            const auto violations = latticelab::validate_config(cfg);
            if (violations.empty()) {
                std::cout << "config valid\n";
                return 0;
            }
            for (const auto& v : violations) std::cout << v << "\n";
            return 2;
        }
        if (rep_cmd->parsed()) {
            std::cout << latticelab::render_report(run_dir);
            return 0;
        }
        // presets
        for (const auto& name : latticelab::preset_names()) {
            const auto step = latticelab::preset_step(name);
            json doc;
            doc["support"] = json::array();
            for (const auto& atom : step.atoms())
                doc["support"].push_back({atom.site.x, atom.site.y,
                                          std::to_string(atom.exact.num()) + "/" + std::to_string(atom.exact.den())});
            doc["kind"] = "discrete";
            std::cout << name << " " << doc.dump() << "\n";
        }
        std::cout << "srw-pair (difference of two srw walks; z_walk positions only)\n";
        return 0;
    } catch (const latticelab::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const latticelab::ManifestCorrupt& e) {
        std::cerr << "manifest error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
