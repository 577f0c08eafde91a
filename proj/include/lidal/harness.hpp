#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "lidal/io.hpp"
#include "lidal/metrics.hpp"
#include "lidal/mobility.hpp"
#include "lidal/system.hpp"
#include "lidal/training.hpp"

namespace lidal {

enum class SystemKind { mimo, miso };
enum class Method { bsm, ccm, ann, oracle };

std::string to_string(SystemKind system);
std::string to_string(Method method);
SystemKind system_from_string(const std::string& name);
Method method_from_string(const std::string& name);

/// Simulator wired from a scenario: single monostatic unit when configured,
/// full grid + imaging receiver otherwise. The background scene is the
/// scenario scene without targets.
LidalSimulator make_simulator(const Scenario& scenario);
LidalSimulator make_simulator(const Scenario& scenario, const Scene& background);

/// Per-pixel input width of the imaging-receiver network: the slot sample
/// count scaled by the ratio of the pixel cell size to the ranging
/// resolution, rounded up (34 for the default geometry).
int miso_samples_per_pixel(const ImagingReceiver& receiver);

/// Streams a distinguisher consumes for one system, with per-stream metadata.
struct StreamSpec {
    int stream = 0;
    SnapshotKind kind = SnapshotKind::mimo_scan;
    int rx = 0;  // receiving unit (MIMO) or group (MISO)
    int tx = 0;  // emitting unit
};

std::vector<StreamSpec> mimo_streams(const LidalSimulator& sim);
std::vector<StreamSpec> miso_streams(const LidalSimulator& sim);

/// Largest noiseless background amplitude of the stream in the network's
/// input space (raw samples for MIMO, pooled sums for MISO).
double stream_input_scale(const LidalSimulator& sim, const StreamSpec& spec);

// ---------------------------------------------------------------------------
// Table-style simulation loop: i = 1..i_max targets, itr iterations each,
// a fixed number of snapshots per iteration with the targets walking between
// snapshots. Placement, reflectivities, trajectories and receiver noise all
// derive from the seed.

struct LoopConfig {
    int i_max = 15;
    int itr = 250;
    int snapshots_per_iteration = 10;
    std::uint64_t seed = 1;
};

struct LoopContext {
    int target_count = 0;   // i
    int iteration = 0;      // j
    int snapshot = 0;       // s
    std::uint64_t snapshot_seed = 0;
    const std::vector<Target>& targets;
    double timestamp = 0.0;
};

/// Drives the loop, invoking the callback once per snapshot. Iterations whose
/// placement fails after bounded retries are skipped (and counted).
int run_target_loop(const Scenario& scenario, const Scene& background, const LoopConfig& config,
                    const std::function<void(const LoopContext&)>& callback);

// ---------------------------------------------------------------------------
// Training data generation (dataset per stream) and model training

struct TrainingDataConfig {
    LoopConfig loop{3, 50, 10, 1};
    SystemKind system = SystemKind::mimo;
    std::vector<int> rx_units;   // MIMO receivers to collect; empty = all
    bool include_bistatic = true;
    std::vector<int> groups;     // MISO groups; empty = all
    TruthGate gate = TruthGate::zone;
};

struct StreamDataset {
    StreamSpec spec;
    Dataset data;
    double input_scale = 1.0;
};

std::vector<StreamDataset> generate_training_data(const Scenario& scenario,
                                                  const TrainingDataConfig& config);

/// Trains one network per stream dataset; reports are keyed by stream.
std::map<int, AnnModel> train_models(const std::vector<StreamDataset>& datasets,
                                     const TrainerConfig& trainer,
                                     std::map<int, TrainingReport>* reports = nullptr);

// ---------------------------------------------------------------------------
// Experiments

/// Builds a calibrated distinguisher for the system. BSM/CCM references are
/// seeded with a noisy background capture; the ANN takes its trained models.
std::unique_ptr<Distinguisher> make_distinguisher(Method method, SystemKind system,
                                                  const LidalSimulator& sim,
                                                  const std::map<int, AnnModel>* models,
                                                  std::uint64_t seed,
                                                  const MotionDetectorParams& tuning = {});

/// Re-captures the BSM/CCM background references (used between Monte-Carlo
/// iterations); no-op for ANN/oracle.
void calibrate_distinguisher(Distinguisher& distinguisher, Method method, SystemKind system,
                             const LidalSimulator& sim, std::uint64_t seed);

struct CountingResult {
    int target_count = 0;
    double mape = 0.0;
    long long snapshots = 0;
};

struct ExperimentConfig {
    LoopConfig loop{15, 250, 10, 1};
    SystemKind system = SystemKind::mimo;
    Method method = Method::ccm;
    MotionDetectorParams tuning;  // noise_sigma filled from the simulator
    CycleParams cycle;
};

struct ExperimentResult {
    std::vector<CountingResult> counting;        // one row per target count
    std::vector<double> drmse_samples;           // per snapshot, matched pairs
    std::vector<double> count_errors;            // per snapshot |i - estimate|
    long long total_snapshots = 0;
    int skipped_iterations = 0;
    std::uint64_t seed = 0;
};

ExperimentResult run_experiment(const Scenario& scenario, const ExperimentConfig& config,
                                const std::map<int, AnnModel>* models = nullptr);

// ---------------------------------------------------------------------------
// Single-target distinguishing experiment (static room / displaced furniture)

struct DistinguishingConfig {
    int snapshots = 1500;
    double displacement_fraction = 0.0;
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::bsm, Method::ccm, Method::ann};
    MotionDetectorParams tuning;
    int slot_tolerance = 1;  // detection/truth slot agreement margin
};

struct DistinguishingResult {
    std::map<Method, double> error_percent;
    std::map<Method, long long> error_count;
    long long snapshots = 0;
    double displacement_fraction = 0.0;
};

/// The monostatic single-target experiment: one nomadic target walks the
/// pathway for `snapshots` scans while every method classifies each scan.
/// The ANN models and the BSM/CCM references are calibrated on the
/// undisplaced room; the run itself uses furniture displaced by the given
/// fraction.
DistinguishingResult run_distinguishing(const Scenario& scenario,
                                        const DistinguishingConfig& config,
                                        const std::map<int, AnnModel>* models);

std::vector<DistinguishingResult> displacement_sweep(const Scenario& scenario,
                                                     const DistinguishingConfig& config,
                                                     const std::vector<double>& fractions,
                                                     const std::map<int, AnnModel>* models);

}  // namespace lidal
