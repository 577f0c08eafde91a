#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>

#include "lidal/harness.hpp"
#include "lidal/io.hpp"
#include "lidal/metrics.hpp"

namespace {

using namespace lidal;

Scenario load_or_default(const std::string& path) {
    if (path.empty()) return Scenario{};
    return load_scenario(path);
}

std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

int cmd_simulate(const std::string& scenario_path, const std::string& system,
                 std::uint64_t seed, const std::string& out, int unit, int targets) {
    Scenario scenario = load_or_default(scenario_path);
    SceneConfig scene_config = scenario.scene;
    scene_config.target_count = targets;
    scene_config.seed = seed;
    const Scene scene = build_scene(scene_config);
    Scene background = scene;
    background.targets.clear();
    LidalSimulator sim = make_simulator(scenario, background);

    if (system_from_string(system) == SystemKind::mimo) {
        const auto& channel_unit = sim.units().at(unit);
        const ImpulseResponse ir =
            impulse_response(scene, channel_unit.emitter, channel_unit.detector, 1);
        write_impulse_csv(out_path(out, "impulse_response.csv"), ir);
        const Snapshot snap = sim.mimo_scan(scene.targets, unit, unit, seed);
        write_waveform_csv(out_path(out, "waveform.csv"), snap.waveforms[0]);
    } else {
        const Snapshot snap = sim.miso_group_snapshot(scene.targets, unit, seed);
        for (std::size_t p = 0; p < snap.waveforms.size(); ++p) {
            write_waveform_csv(out_path(out, "pixel_" + std::to_string(p) + ".csv"),
                               snap.waveforms[p]);
        }
    }
    std::printf("simulate: wrote scan dumps to %s\n", out.c_str());
    return 0;
}

int cmd_train(const std::string& scenario_path, const std::string& system, std::uint64_t seed,
              const std::string& out, int i_max, int itr, int snapshots, int epochs,
              std::vector<double> betas, double target_mse, std::vector<int> rx_units,
              bool mono_only, double validation_fraction) {
    Scenario scenario = load_or_default(scenario_path);
    TrainingDataConfig data_config;
    data_config.system = system_from_string(system);
    data_config.loop = {i_max, itr, snapshots, seed};
    data_config.rx_units = rx_units;
    data_config.include_bistatic = !mono_only;
    if (scenario.single_unit_position) data_config.gate = TruthGate::visibility;

    const auto datasets = generate_training_data(scenario, data_config);

    TrainerConfig trainer;
    trainer.epochs = epochs;
    trainer.seed = seed;
    trainer.validation_fraction = validation_fraction;
    trainer.target_train_mse = target_mse;
    trainer.beta_range = betas;
    if (trainer.beta_range.empty()) {
        const double n_in = static_cast<double>(datasets.front().data.inputs.cols());
        const double n_out = static_cast<double>(datasets.front().data.labels.cols());
        for (int hidden : {4, 8, 12}) trainer.beta_range.push_back((n_in + n_out) / hidden);
    }

    std::map<int, TrainingReport> reports;
    const auto models = train_models(datasets, trainer, &reports);
    save_models(out_path(out, "models.bin"), models);

    CsvWriter summary(out_path(out, "training_summary.csv"),
                      {"stream", "beta", "hidden", "val_mse", "train_mse", "seed"});
    for (const auto& [stream, report] : reports) {
        write_training_report_csv(
            out_path(out, "training_report_" + std::to_string(stream) + ".csv"), report);
        summary.row({std::to_string(stream), format_value(report.best_beta),
                     std::to_string(report.best_hidden), format_value(report.best_val_mse),
                     format_value(report.best_train_mse), std::to_string(seed)});
    }
    std::printf("train: %zu stream models -> %s\n", models.size(), out.c_str());
    return 0;
}

int cmd_evaluate(const std::string& scenario_path, const std::string& system,
                 const std::string& method, std::uint64_t seed, const std::string& out,
                 const std::string& model_path, int i_max, int itr, int snapshots) {
    Scenario scenario = load_or_default(scenario_path);
    ExperimentConfig config;
    config.system = system_from_string(system);
    config.method = method_from_string(method);
    config.loop = {i_max, itr, snapshots, seed};

    std::map<int, AnnModel> models;
    if (config.method == Method::ann) {
        if (model_path.empty()) throw std::runtime_error("evaluate: --model required for ann");
        models = load_models(model_path);
    }
    const ExperimentResult result =
        run_experiment(scenario, config, models.empty() ? nullptr : &models);

    CsvWriter counting(out_path(out, "counting_mape.csv"),
                       {"system", "method", "targets", "mape_percent", "snapshots", "seed"});
    for (const auto& row : result.counting) {
        counting.row({system, method, std::to_string(row.target_count), format_value(row.mape),
                      std::to_string(row.snapshots), std::to_string(seed)});
    }
    CsvWriter samples(out_path(out, "drmse_samples.csv"), {"sample", "drmse_m", "seed"});
    for (std::size_t i = 0; i < result.drmse_samples.size(); ++i) {
        samples.row({std::to_string(i), format_value(result.drmse_samples[i]),
                     std::to_string(seed)});
    }
    if (!result.drmse_samples.empty()) {
        const Cdf cdf(result.drmse_samples);
        CsvWriter curve(out_path(out, "drmse_cdf.csv"), {"error_m", "fraction", "seed"});
        for (const auto& [error, fraction] : cdf.curve()) {
            curve.row({format_value(error), format_value(fraction), std::to_string(seed)});
        }
        std::printf("evaluate: drmse mean-ish p95 = %.3f m over %zu samples\n",
                    cdf.percentile(0.95), result.drmse_samples.size());
    }
    std::printf("evaluate: wrote results to %s (skipped %d iterations)\n", out.c_str(),
                result.skipped_iterations);
    return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& mode, std::uint64_t seed,
              const std::string& out, const std::string& model_path, int snapshots,
              std::vector<double> fractions, int i_max, int itr) {
    Scenario scenario = load_or_default(scenario_path);
    if (mode == "displacement") {
        DistinguishingConfig config;
        config.snapshots = snapshots;
        config.seed = seed;
        std::map<int, AnnModel> models;
        if (!model_path.empty()) {
            models = load_models(model_path);
        } else {
            config.methods = {Method::bsm, Method::ccm};
        }
        if (fractions.empty()) fractions = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
        const auto results = displacement_sweep(scenario, config, fractions,
                                                models.empty() ? nullptr : &models);
        CsvWriter csv(out_path(out, "displacement_sweep.csv"),
                      {"fraction", "method", "error_percent", "snapshots", "seed"});
        for (const auto& point : results) {
            for (const auto& [method, error] : point.error_percent) {
                csv.row({format_value(point.displacement_fraction), to_string(method),
                         format_value(error), std::to_string(point.snapshots),
                         std::to_string(seed)});
            }
        }
        std::printf("sweep: wrote displacement sweep to %s\n", out.c_str());
        return 0;
    }
    if (mode == "targets") {
        std::map<int, AnnModel> models;
        if (!model_path.empty()) models = load_models(model_path);
        CsvWriter csv(out_path(out, "target_sweep.csv"),
                      {"system", "method", "targets", "mape_percent", "snapshots", "seed"});
        for (const auto system : {SystemKind::mimo, SystemKind::miso}) {
            for (const auto method : {Method::ccm, Method::ann}) {
                if (method == Method::ann && models.empty()) continue;
                ExperimentConfig config;
                config.system = system;
                config.method = method;
                config.loop = {i_max, itr, 10, seed};
                const auto result =
                    run_experiment(scenario, config, models.empty() ? nullptr : &models);
                for (const auto& row : result.counting) {
                    csv.row({to_string(system), to_string(method),
                             std::to_string(row.target_count), format_value(row.mape),
                             std::to_string(row.snapshots), std::to_string(seed)});
                }
            }
        }
        std::printf("sweep: wrote target-count sweep to %s\n", out.c_str());
        return 0;
    }
    std::fprintf(stderr, "unknown sweep mode '%s'\n", mode.c_str());
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Indoor optical target detection, counting and localization simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string system = "mimo";
    std::string method = "ccm";
    std::string out = "out";
    std::string model_path;
    std::uint64_t seed = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_path, "Scenario JSON file");
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--out", out, "Output directory");
    };

    auto* simulate = app.add_subcommand("simulate", "Render one scan and dump CSV waveforms");
    int unit = 0, sim_targets = 1;
    add_common(simulate);
    simulate->add_option("--system", system, "mimo|miso");
    simulate->add_option("--unit", unit, "Transceiver unit / group index");
    simulate->add_option("--targets", sim_targets, "Targets to place");

    auto* train = app.add_subcommand("train", "Generate training data and train the networks");
    int i_max = 3, itr = 50, snapshots = 10, epochs = 60;
    double target_mse = 0.0, validation_fraction = 0.2;
    std::vector<double> betas;
    std::vector<int> rx_units;
    bool mono_only = false;
    add_common(train);
    train->add_option("--system", system, "mimo|miso");
    train->add_option("--imax", i_max, "Max simultaneous targets");
    train->add_option("--itr", itr, "Iterations per target count");
    train->add_option("--snapshots", snapshots, "Snapshots per iteration");
    train->add_option("--epochs", epochs, "Training epochs");
    train->add_option("--beta", betas, "Pruning factors to sweep");
    train->add_option("--target-mse", target_mse, "Early-stop train MSE");
    train->add_option("--rx-units", rx_units, "MIMO receivers to train (default all)");
    train->add_flag("--mono-only", mono_only, "Skip bistatic streams");
    train->add_option("--validation-fraction", validation_fraction, "Validation split");

    auto* evaluate = app.add_subcommand("evaluate", "Run the counting/localization experiment");
    add_common(evaluate);
    evaluate->add_option("--system", system, "mimo|miso");
    evaluate->add_option("--method", method, "bsm|ccm|ann");
    evaluate->add_option("--model", model_path, "Trained model bundle (ann)");
    evaluate->add_option("--imax", i_max, "Max simultaneous targets");
    evaluate->add_option("--itr", itr, "Iterations per target count");
    evaluate->add_option("--snapshots", snapshots, "Snapshots per iteration");

    auto* sweep = app.add_subcommand("sweep", "Displacement or target-count sweeps");
    std::string sweep_mode = "displacement";
    std::vector<double> fractions;
    int sweep_snapshots = 1500;
    add_common(sweep);
    sweep->add_option("--mode", sweep_mode, "displacement|targets");
    sweep->add_option("--model", model_path, "Trained model bundle (ann)");
    sweep->add_option("--snapshots", sweep_snapshots, "Snapshots per sweep point");
    sweep->add_option("--fractions", fractions, "Displacement fractions");
    sweep->add_option("--imax", i_max, "Max targets (targets mode)");
    sweep->add_option("--itr", itr, "Iterations (targets mode)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return cmd_simulate(scenario_path, system, seed, out, unit, sim_targets);
        }
        if (train->parsed()) {
            return cmd_train(scenario_path, system, seed, out, i_max, itr, snapshots, epochs,
                             betas, target_mse, rx_units, mono_only, validation_fraction);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(scenario_path, system, method, seed, out, model_path, i_max, itr,
                                snapshots);
        }
        if (sweep->parsed()) {
            return cmd_sweep(scenario_path, sweep_mode, seed, out, model_path, sweep_snapshots,
                             fractions, i_max, itr);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
