#include "lidal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace lidal {

std::string to_string(SystemKind system) {
    return system == SystemKind::mimo ? "mimo" : "miso";
}

std::string to_string(Method method) {
    switch (method) {
        case Method::bsm: return "bsm";
        case Method::ccm: return "ccm";
        case Method::ann: return "ann";
        case Method::oracle: return "oracle";
    }
    return "?";
}

SystemKind system_from_string(const std::string& name) {
    if (name == "mimo") return SystemKind::mimo;
    if (name == "miso") return SystemKind::miso;
    throw std::invalid_argument("unknown system '" + name + "'");
}

Method method_from_string(const std::string& name) {
    if (name == "bsm") return Method::bsm;
    if (name == "ccm") return Method::ccm;
    if (name == "ann") return Method::ann;
    if (name == "oracle") return Method::oracle;
    throw std::invalid_argument("unknown method '" + name + "'");
}

LidalSimulator make_simulator(const Scenario& scenario, const Scene& background) {
    return LidalSimulator(background, scenario_units(scenario),
                          default_imaging_receiver(scenario.scene.room), scenario.noise);
}

LidalSimulator make_simulator(const Scenario& scenario) {
    SceneConfig config = scenario.scene;
    config.target_count = 0;
    return make_simulator(scenario, build_scene(config));
}

int miso_samples_per_pixel(const ImagingReceiver& receiver) {
    const Waveform reference;  // default T_s / T_sa
    const double range_resolution = kSpeedOfLight * reference.slot_width / 2.0;
    return static_cast<int>(
        std::ceil(reference.samples_per_slot() * receiver.cell_size / range_resolution));
}

std::vector<StreamSpec> mimo_streams(const LidalSimulator& sim) {
    std::vector<StreamSpec> streams;
    for (int rx = 0; rx < static_cast<int>(sim.units().size()); ++rx) {
        streams.push_back({mimo_stream(rx, 0), SnapshotKind::mimo_scan, rx, rx});
        if (sim.units().size() > 2) {
            const auto [n1, n2] = sim.neighbors(rx);
            streams.push_back({mimo_stream(rx, 1), SnapshotKind::mimo_scan, rx, n1});
            streams.push_back({mimo_stream(rx, 2), SnapshotKind::mimo_scan, rx, n2});
        }
    }
    return streams;
}

std::vector<StreamSpec> miso_streams(const LidalSimulator& sim) {
    std::vector<StreamSpec> streams;
    for (int g = 0; g < static_cast<int>(sim.units().size()); ++g) {
        streams.push_back({miso_stream(g), SnapshotKind::miso_group, g, g});
    }
    return streams;
}

namespace {

Snapshot background_snapshot(const LidalSimulator& sim, const StreamSpec& spec) {
    if (spec.kind == SnapshotKind::mimo_scan) return sim.background_mimo_scan(spec.rx, spec.tx);
    return sim.background_miso_snapshot(spec.tx);
}

Snapshot live_snapshot(const LidalSimulator& sim, const StreamSpec& spec,
                       std::span<const Target> targets, std::uint64_t seed, double timestamp) {
    if (spec.kind == SnapshotKind::mimo_scan) {
        return sim.mimo_scan(targets, spec.rx, spec.tx, seed, timestamp);
    }
    return sim.miso_group_snapshot(targets, spec.tx, seed, timestamp);
}

}  // namespace

double stream_input_scale(const LidalSimulator& sim, const StreamSpec& spec) {
    const Snapshot snap = background_snapshot(sim, spec);
    double peak = 0.0;
    if (spec.kind == SnapshotKind::mimo_scan) {
        for (double v : snap.waveforms[0].samples) peak = std::max(peak, std::abs(v));
    } else {
        const int bins = miso_samples_per_pixel(sim.receiver());
        for (const auto& wf : snap.waveforms) {
            for (double v : pool_sums(wf.samples, bins)) peak = std::max(peak, std::abs(v));
        }
    }
    return peak > 0.0 ? peak : 1.0;
}

// ---------------------------------------------------------------------------
// Target loop

namespace {

std::vector<Target> place_targets(const Scene& background, const MobilityParams& mobility,
                                  int count, Rng& rng, int max_attempts = 200) {
    std::vector<Target> targets;
    for (int k = 0; k < count; ++k) {
        Target target;
        target.id = k;
        bool placed = false;
        for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
            target.position = {rng.uniform(0.0, background.room.width),
                               rng.uniform(0.0, background.room.length)};
            placed = position_feasible(background, target.position, mobility.clearance);
        }
        if (!placed) return {};
        target.reflectivity = draw_target_reflectivity(rng);
        targets.push_back(target);
    }
    return targets;
}

}  // namespace

int run_target_loop(const Scenario& scenario, const Scene& background, const LoopConfig& config,
                    const std::function<void(const LoopContext&)>& callback) {
    if (config.i_max < 1 || config.itr < 1 || config.snapshots_per_iteration < 1) {
        throw std::invalid_argument("run_target_loop: loop bounds must be >= 1");
    }
    const Pathway pathway = scenario_pathway(scenario, background);
    const double dt = 1.0 / scenario.mobility.rate_hz;
    int skipped = 0;

    for (int i = 1; i <= config.i_max; ++i) {
        for (int j = 1; j <= config.itr; ++j) {
            Rng iteration_rng(Rng::mix(config.seed, 0x10000ULL * i + j));
            std::vector<Target> targets =
                place_targets(background, scenario.mobility, i, iteration_rng);
            if (targets.empty() && i > 0) {
                ++skipped;
                continue;
            }

            // Per-target walk state, aimed at a seeded waypoint.
            std::vector<TrajectoryState> states;
            std::vector<Rng> walkers;
            for (int k = 0; k < i; ++k) {
                walkers.push_back(iteration_rng.stream(1000 + k));
                TrajectoryState state;
                state.position = targets[k].position;
                state.speed = scenario.mobility.speed;
                state.mode = MotionMode::walking;
                state.waypoint =
                    static_cast<int>(walkers[k].uniform_index(pathway.waypoints.size()));
                states.push_back(state);
            }

            for (int s = 0; s < config.snapshots_per_iteration; ++s) {
                LoopContext context{
                    i,
                    j,
                    s,
                    Rng::mix(config.seed, 0x9000000ULL + 0x40000ULL * i + 0x400ULL * j + s),
                    targets,
                    s * dt};
                callback(context);
                for (int k = 0; k < i; ++k) {
                    states[k] = step(states[k], background, pathway, scenario.mobility, dt,
                                     walkers[k]);
                    targets[k].position = states[k].position;
                }
            }
        }
    }
    return skipped;
}

// ---------------------------------------------------------------------------
// Training data

std::vector<StreamDataset> generate_training_data(const Scenario& scenario,
                                                  const TrainingDataConfig& config) {
    SceneConfig scene_config = scenario.scene;
    scene_config.target_count = 0;
    const Scene background = build_scene(scene_config);
    LidalSimulator sim = make_simulator(scenario, background);

    std::vector<StreamSpec> streams;
    if (config.system == SystemKind::mimo) {
        for (const auto& spec : mimo_streams(sim)) {
            const bool wanted_rx = config.rx_units.empty() ||
                                   std::find(config.rx_units.begin(), config.rx_units.end(),
                                             spec.rx) != config.rx_units.end();
            const bool wanted_kind = config.include_bistatic || spec.rx == spec.tx;
            if (wanted_rx && wanted_kind) streams.push_back(spec);
        }
    } else {
        for (const auto& spec : miso_streams(sim)) {
            if (config.groups.empty() ||
                std::find(config.groups.begin(), config.groups.end(), spec.rx) !=
                    config.groups.end()) {
                streams.push_back(spec);
            }
        }
    }
    if (streams.empty()) throw std::invalid_argument("generate_training_data: no streams selected");

    const int n_slots = sim.slot_count();
    const int pixels_per_group =
        sim.receiver().pixel_count() / static_cast<int>(sim.units().size());
    const int per_pixel = miso_samples_per_pixel(sim.receiver());

    const long long rows = static_cast<long long>(config.loop.i_max) * config.loop.itr *
                           config.loop.snapshots_per_iteration;
    std::vector<StreamDataset> datasets;
    for (const auto& spec : streams) {
        StreamDataset ds;
        ds.spec = spec;
        ds.input_scale = stream_input_scale(sim, spec);
        const int n_in = spec.kind == SnapshotKind::mimo_scan
                             ? n_slots * Waveform{}.samples_per_slot()
                             : pixels_per_group * per_pixel;
        const int n_out = spec.kind == SnapshotKind::mimo_scan ? n_slots : pixels_per_group;
        ds.data.inputs.resize(rows, n_in);
        ds.data.labels.resize(rows, n_out);
        datasets.push_back(std::move(ds));
    }

    long long row = 0;
    run_target_loop(scenario, background, config.loop, [&](const LoopContext& context) {
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            auto& ds = datasets[d];
            const Snapshot snap = live_snapshot(sim, ds.spec, context.targets,
                                                Rng::mix(context.snapshot_seed, 7000 + d),
                                                context.timestamp);
            AnnModel layout;
            layout.kind = ds.spec.kind;
            layout.mlp.n_in = static_cast<int>(ds.data.inputs.cols());
            layout.input_scale = ds.input_scale;
            ds.data.inputs.row(row) = ann_input_from_snapshot(layout, snap).transpose();

            std::vector<std::uint8_t> truth;
            if (ds.spec.kind == SnapshotKind::mimo_scan) {
                truth = mimo_truth_bits(sim.units()[ds.spec.rx], sim.units()[ds.spec.tx],
                                        context.targets, n_slots, config.gate);
            } else {
                const auto pixels = group_pixels(sim.receiver(), sim.units(), ds.spec.rx);
                truth = miso_truth_bits(sim.receiver(), pixels, context.targets);
            }
            for (std::size_t k = 0; k < truth.size(); ++k) {
                ds.data.labels(row, static_cast<Eigen::Index>(k)) = truth[k];
            }
        }
        ++row;
    });

    for (auto& ds : datasets) {
        ds.data.inputs.conservativeResize(row, Eigen::NoChange);
        ds.data.labels.conservativeResize(row, Eigen::NoChange);
    }
    return datasets;
}

std::map<int, AnnModel> train_models(const std::vector<StreamDataset>& datasets,
                                     const TrainerConfig& trainer,
                                     std::map<int, TrainingReport>* reports) {
    std::map<int, AnnModel> models;
    for (const auto& ds : datasets) {
        TrainerConfig config = trainer;
        config.seed = Rng::mix(trainer.seed, 0xbeef00ULL + ds.spec.stream);
        auto [mlp, report] = train_ann(ds.data, config);
        AnnModel model;
        model.kind = ds.spec.kind;
        model.mlp = std::move(mlp);
        model.input_scale = ds.input_scale;
        model.output_threshold = trainer.output_threshold;
        models.emplace(ds.spec.stream, std::move(model));
        if (reports) reports->emplace(ds.spec.stream, std::move(report));
    }
    return models;
}

// ---------------------------------------------------------------------------
// Distinguisher wiring

void calibrate_distinguisher(Distinguisher& distinguisher, Method method, SystemKind system,
                             const LidalSimulator& sim, std::uint64_t seed) {
    if (method != Method::bsm && method != Method::ccm) return;
    const auto streams =
        system == SystemKind::mimo ? mimo_streams(sim) : miso_streams(sim);
    for (const auto& spec : streams) {
        // A measured reference is noisy; capture one with its own noise draw.
        Snapshot reference = live_snapshot(sim, spec, {}, Rng::mix(seed, 0xCA1ULL + spec.stream),
                                           0.0);
        distinguisher.calibrate(spec.stream, reference);
    }
}

std::unique_ptr<Distinguisher> make_distinguisher(Method method, SystemKind system,
                                                  const LidalSimulator& sim,
                                                  const std::map<int, AnnModel>* models,
                                                  std::uint64_t seed,
                                                  const MotionDetectorParams& tuning) {
    MotionDetectorParams params = tuning;
    if (params.noise_sigma <= 0.0) {
        params.noise_sigma =
            system == SystemKind::mimo ? sim.mimo_noise_sigma() : sim.miso_noise_sigma();
    }

    std::unique_ptr<Distinguisher> distinguisher;
    switch (method) {
        case Method::bsm:
            distinguisher = std::make_unique<BsmDistinguisher>(params);
            break;
        case Method::ccm:
            distinguisher = std::make_unique<CcmDistinguisher>(params);
            break;
        case Method::ann: {
            if (!models) throw std::invalid_argument("ann method needs trained models");
            distinguisher = std::make_unique<AnnDistinguisher>(*models);
            break;
        }
        case Method::oracle:
            distinguisher = std::make_unique<OracleDistinguisher>(sim.units(), sim.receiver());
            break;
    }
    calibrate_distinguisher(*distinguisher, method, system, sim, seed);
    return distinguisher;
}

// ---------------------------------------------------------------------------
// Counting / localization experiment

ExperimentResult run_experiment(const Scenario& scenario, const ExperimentConfig& config,
                                const std::map<int, AnnModel>* models) {
    SceneConfig scene_config = scenario.scene;
    scene_config.target_count = 0;
    const Scene background = build_scene(scene_config);
    LidalSimulator sim = make_simulator(scenario, background);

    auto distinguisher = make_distinguisher(config.method, config.system, sim, models,
                                            config.loop.seed, config.tuning);

    ExperimentResult result;
    result.seed = config.loop.seed;
    std::vector<double> abs_count_error_sum(config.loop.i_max + 1, 0.0);
    std::vector<long long> samples(config.loop.i_max + 1, 0);

    int last_iteration = -1;
    result.skipped_iterations = run_target_loop(
        scenario, background, config.loop, [&](const LoopContext& context) {
            // Fresh Monte-Carlo draw: restore the background references.
            const int iteration_key = context.target_count * 1000000 + context.iteration;
            if (iteration_key != last_iteration) {
                last_iteration = iteration_key;
                calibrate_distinguisher(*distinguisher, config.method, config.system, sim,
                                        Rng::mix(config.loop.seed, 0xF00DULL + iteration_key));
            }

            const DetectionReport report =
                config.system == SystemKind::mimo
                    ? run_mimo_cycle(sim, context.targets, *distinguisher, context.snapshot_seed,
                                     config.cycle, context.timestamp)
                    : run_miso_cycle(sim, context.targets, *distinguisher, context.snapshot_seed,
                                     config.cycle, context.timestamp);

            const int i = context.target_count;
            abs_count_error_sum[i] += std::abs(i - report.count) / static_cast<double>(i);
            samples[i] += 1;
            result.count_errors.push_back(std::abs(i - report.count));
            ++result.total_snapshots;

            std::vector<Vec2> truth;
            for (const auto& t : context.targets) truth.push_back(t.position);
            const DrmseResult dr = drmse(truth, report.positions);
            if (dr.matched > 0) result.drmse_samples.push_back(dr.value);
        });

    for (int i = 1; i <= config.loop.i_max; ++i) {
        if (samples[i] == 0) continue;
        CountingResult row;
        row.target_count = i;
        row.mape = 100.0 * abs_count_error_sum[i] / static_cast<double>(samples[i]);
        row.snapshots = samples[i];
        result.counting.push_back(row);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Single-target distinguishing

namespace {

/// Snapshot-level agreement: equal detection counts and every leading slot
/// within the tolerance of a distinct truth slot.
bool occupancy_agrees(const std::vector<std::uint8_t>& truth,
                      const std::vector<std::uint8_t>& detected, int slot_tolerance) {
    const auto truth_runs = occupied_runs(truth);
    const auto detected_runs = occupied_runs(detected);
    if (truth_runs.size() != detected_runs.size()) return false;
    std::vector<bool> used(detected_runs.size(), false);
    for (const auto& t : truth_runs) {
        bool matched = false;
        for (std::size_t d = 0; d < detected_runs.size(); ++d) {
            if (used[d]) continue;
            if (std::abs(detected_runs[d].first - t.first) <= slot_tolerance) {
                used[d] = true;
                matched = true;
                break;
            }
        }
        if (!matched) return false;
    }
    return true;
}

}  // namespace

DistinguishingResult run_distinguishing(const Scenario& scenario,
                                        const DistinguishingConfig& config,
                                        const std::map<int, AnnModel>* models) {
    if (!scenario.single_unit_position) {
        throw std::invalid_argument("run_distinguishing: scenario needs a single_unit");
    }
    SceneConfig scene_config = scenario.scene;
    scene_config.target_count = 0;
    const Scene trained_room = build_scene(scene_config);
    const Scene displaced_room =
        displace_furniture(trained_room, config.displacement_fraction, config.seed);

    // Methods are calibrated on the room they were set up in: the ANN models
    // come in pre-trained and BSM/CCM capture their references there.
    LidalSimulator trained_sim = make_simulator(scenario, trained_room);
    LidalSimulator run_sim = make_simulator(scenario, displaced_room);

    MotionDetectorParams tuning = config.tuning;
    if (tuning.noise_sigma <= 0.0) tuning.noise_sigma = run_sim.mimo_noise_sigma();

    std::map<Method, std::unique_ptr<Distinguisher>> distinguishers;
    for (Method method : config.methods) {
        auto d = make_distinguisher(method, SystemKind::mimo, trained_sim,
                                    method == Method::ann ? models : nullptr, config.seed, tuning);
        distinguishers.emplace(method, std::move(d));
    }

    const Pathway pathway = scenario_pathway(scenario, displaced_room);
    Rng walker(Rng::mix(config.seed, 0xD157ULL));
    TrajectoryState state =
        init_trajectory(pathway, displaced_room, scenario.mobility, walker);
    const double dt = 1.0 / scenario.mobility.rate_hz;
    const int n_slots = run_sim.slot_count();
    const TransceiverUnit& unit = run_sim.units()[0];

    DistinguishingResult result;
    result.displacement_fraction = config.displacement_fraction;
    result.snapshots = config.snapshots;
    for (Method method : config.methods) result.error_count[method] = 0;

    Target target;
    target.id = 0;
    Rng reflect(Rng::mix(config.seed, 0x00F1ULL));
    target.reflectivity = draw_target_reflectivity(reflect);

    for (int s = 0; s < config.snapshots; ++s) {
        target.position = state.position;
        const Target targets[1] = {target};
        const Snapshot snap = run_sim.mimo_scan(targets, 0, 0, Rng::mix(config.seed, 50000 + s),
                                                s * dt);
        const auto truth =
            mimo_truth_bits(unit, unit, targets, n_slots, TruthGate::visibility);
        const Scene current = run_sim.background().with_targets({target});
        for (Method method : config.methods) {
            auto& distinguisher = *distinguishers.at(method);
            distinguisher.begin_cycle(current);
            const auto detected = distinguisher.detect(mimo_stream(0, 0), snap);
            if (!occupancy_agrees(truth, detected, config.slot_tolerance)) {
                ++result.error_count[method];
            }
        }
        state = step(state, displaced_room, pathway, scenario.mobility, dt, walker);
    }

    for (Method method : config.methods) {
        result.error_percent[method] =
            100.0 * result.error_count[method] / static_cast<double>(config.snapshots);
    }
    return result;
}

std::vector<DistinguishingResult> displacement_sweep(const Scenario& scenario,
                                                     const DistinguishingConfig& config,
                                                     const std::vector<double>& fractions,
                                                     const std::map<int, AnnModel>* models) {
    std::vector<DistinguishingResult> results;
    for (double fraction : fractions) {
        DistinguishingConfig point = config;
        point.displacement_fraction = fraction;
        results.push_back(run_distinguishing(scenario, point, models));
    }
    return results;
}

}  // namespace lidal
