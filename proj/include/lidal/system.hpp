#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lidal/channel.hpp"
#include "lidal/distinguishers.hpp"
#include "lidal/scene.hpp"
#include "lidal/snapshot.hpp"

namespace lidal {

/// Collocated emitter + photodetector on the ceiling.
struct TransceiverUnit {
    int id = 0;
    Emitter emitter;
    Detector detector;
    double zone_radius = 1.25;

    Vec2 floor_position() const { return emitter.position.xy(); }
};

/// The eight ceiling transceivers: a 2 x 4 grid at x in {W/4, 3W/4},
/// y in {L/8, 3L/8, 5L/8, 7L/8}. For the 4 x 8 x 3 room this lands them at
/// (1,1,3) ... (3,7,3) with 2 m neighbor spacing.
std::vector<TransceiverUnit> default_mimo_units(const Room& room);

TransceiverUnit make_transceiver(int id, Vec3 position);

/// Ceiling imaging receiver whose pixel footprints tile the floor.
struct ImagingReceiver {
    Vec3 position{2.0, 4.0, 3.0};
    int columns = 8;
    int rows = 16;
    double cell_size = 0.5;
    double aperture_area = 2e-4;      // collection aperture shared by the pixels
    double pixel_area = 1.56e-6;
    double responsivity = 0.4;
    double fov_semi_angle_deg = 72.0;
    double noise_density = 2.6e-12;

    int pixel_count() const { return columns * rows; }
    /// pixel index = row * columns + column
    Rect pixel_footprint(int pixel) const;
    Vec2 pixel_center(int pixel) const;
    /// Index of the pixel whose footprint contains p; -1 outside the array.
    int pixel_at(const Vec2& p) const;
    Detector pixel_detector(int pixel) const;
};

ImagingReceiver default_imaging_receiver(const Room& room);

/// Pixels whose footprint centers fall in the 2 m x 2 m block around
/// transmitter `group`; with the default geometry that is 16 pixels.
std::vector<int> group_pixels(const ImagingReceiver& receiver,
                              const std::vector<TransceiverUnit>& units, int group);

struct NoiseParams {
    double bandwidth_hz = 5e8;
};

struct DetectionReport {
    std::vector<std::vector<std::uint8_t>> occupancy;  // per stream, slot or pixel bits
    std::vector<double> ranges;                        // monostatic ranges, m (MIMO)
    std::vector<Vec2> positions;
    int count = 0;
    std::vector<double> residuals;                     // triangulation residuals, m
    int dropped = 0;                                   // detections without a fix
    std::uint64_t seed = 0;
    double timestamp = 0.0;
};

// ---------------------------------------------------------------------------
// Ranging and localization primitives

enum class RangingMode { monostatic, bistatic };

/// Bin-center TOA conversion. Monostatic: target range c*(slot+0.5)*Ts/2.
/// Bistatic: total path length c*(slot+0.5)*Ts (an ellipse constraint).
double toa_range(int slot_index, RangingMode mode, double slot_width = 2e-9);

/// Distance constraint from one scan: a circle when tx == rx, otherwise the
/// ellipse d(tx,p) + d(p,rx) = value. The weight scales the residual in the
/// least-squares objective; bistatic path bins are twice as coarse as
/// monostatic range bins, so cycles weight them at 1/2.
struct RangeConstraint {
    Vec3 tx;
    Vec3 rx;
    double value = 0.0;
    double weight = 1.0;

    bool monostatic() const { return (tx - rx).norm() < 1e-12; }
    double residual(const Vec2& p, double z_ref) const {
        const Vec3 q{p.x, p.y, z_ref};
        if (monostatic()) return weight * (distance(rx, q) - value);
        return weight * (distance(tx, q) + distance(q, rx) - value);
    }
};

struct TriangulationOptions {
    double z_ref = 0.0;            // assumed height of the reflecting point
    double grid_step = 0.05;       // coarse floor grid pitch
    double residual_limit = 0.45;  // RMS residual above which there is no fix
};

struct TriangulationResult {
    Vec2 position;
    double residual = 0.0;  // RMS over the constraints, m
    bool feasible = false;
};

/// Floor point minimizing the sum of squared constraint residuals: coarse
/// grid search over the room followed by a deterministic pattern refinement.
TriangulationResult triangulate(std::span<const RangeConstraint> constraints, const Room& room,
                                const TriangulationOptions& options = {});

/// Transitive-closure clustering to a fixpoint: positions within `tolerance`
/// of each other collapse to their centroid, repeatedly, so the result is
/// idempotent.
std::vector<Vec2> deduplicate(std::vector<Vec2> positions, double tolerance = 0.3);

/// Every occupied pixel contributes its footprint center; 4-adjacent occupied
/// pixels merge into one target at the occupied-cell centroid.
std::vector<Vec2> doa_localize(const std::vector<std::uint8_t>& occupancy,
                               const ImagingReceiver& receiver);

/// Groups of adjacent set bits; each group is reported as (first, last).
std::vector<std::pair<int, int>> occupied_runs(const std::vector<std::uint8_t>& bits);

// ---------------------------------------------------------------------------
// Ground-truth geometry (training labels and evaluation truth)

/// Monostatic slot of the target's reference reflection point (the top-face
/// center, which dominates the echo seen from the ceiling):
/// floor(2 * d / (c * Ts)).
int monostatic_slot(const TransceiverUnit& unit, const Target& target, double slot_width = 2e-9);

/// Bistatic slot of the same reference point: floor((d_tx + d_rx) / (c * Ts)).
int bistatic_slot(const TransceiverUnit& tx, const TransceiverUnit& rx, const Target& target,
                  double slot_width = 2e-9);

/// Horizontal-distance zone membership.
bool target_in_zone(const TransceiverUnit& unit, const Target& target);

/// The target's top center lies within the detector's acceptance cone.
bool target_visible(const TransceiverUnit& unit, const Target& target);

enum class TruthGate { zone, visibility };

std::vector<std::uint8_t> mimo_truth_bits(const TransceiverUnit& rx, const TransceiverUnit& tx,
                                          std::span<const Target> targets, int n_slots,
                                          TruthGate gate = TruthGate::zone);

/// Per-pixel truth for one group: the cell containing each target's center is
/// occupied.
std::vector<std::uint8_t> miso_truth_bits(const ImagingReceiver& receiver,
                                          std::span<const int> pixels,
                                          std::span<const Target> targets);

// ---------------------------------------------------------------------------
// Scan simulation

/// Snapshot streams are keyed so a distinguisher can hold per-stream state:
/// MIMO scan `s` (0 monostatic, 1-2 the two bistatic neighbors) of receiver
/// `rx` is stream rx*3+s; MISO group g is stream 1000+g.
constexpr int mimo_stream(int rx, int scan) { return rx * 3 + scan; }
constexpr int miso_stream(int group) { return 1000 + group; }

/// Renders snapshots for arbitrary target sets over a fixed background,
/// caching the static background channel per scan pair on first use. The
/// lazy cache makes instances non-reentrant across threads.
class LidalSimulator {
public:
    LidalSimulator(Scene background, std::vector<TransceiverUnit> units, ImagingReceiver receiver,
                   NoiseParams noise = {});

    /// Convenience: default units/receiver for the scene's room.
    explicit LidalSimulator(const Scene& background);

    const Scene& background() const { return background_; }
    const std::vector<TransceiverUnit>& units() const { return units_; }
    const ImagingReceiver& receiver() const { return receiver_; }
    const NoiseParams& noise() const { return noise_; }
    int slot_count() const { return n_slots_; }
    /// The two collaborating neighbors of unit n (n+1, n+2, wrapping by
    /// nearest distance at the grid edge).
    std::array<int, 2> neighbors(int unit) const;

    Snapshot mimo_scan(std::span<const Target> targets, int rx, int tx, std::uint64_t seed,
                       double timestamp = 0.0) const;
    Snapshot miso_group_snapshot(std::span<const Target> targets, int tx, std::uint64_t seed,
                                 double timestamp = 0.0) const;

    /// Noiseless target-free snapshots (calibration references, input scales).
    Snapshot background_mimo_scan(int rx, int tx) const;
    Snapshot background_miso_snapshot(int tx) const;

    double mimo_noise_sigma() const;
    double miso_noise_sigma() const;

private:
    struct MisoPath {
        double gain;
        int bin;
        int pixel;
        Vec3 ray_origin;
    };

    const CachedChannel& mimo_channel(int rx, int tx) const;
    std::vector<ImpulseResponse> miso_pixel_irs(std::span<const Target> targets, int tx) const;

    Scene background_;
    std::vector<TransceiverUnit> units_;
    ImagingReceiver receiver_;
    NoiseParams noise_;
    int n_slots_ = 0;
    mutable std::map<int, CachedChannel> mimo_channels_;  // key rx * n_units + tx
    mutable std::map<int, std::vector<MisoPath>> miso_paths_;  // key tx
    std::vector<Box> obstacle_boxes_;
    int miso_bins_ = 0;
};

// ---------------------------------------------------------------------------
// Controller cycles

struct CycleParams {
    double dedup_tolerance = 0.3;
    double reflection_height = 1.7;  // assumed echo height when triangulating
    double residual_limit = 0.45;    // triangulation feasibility cutoff, m RMS
    double grid_step = 0.05;
};

/// Full MIMO controller pass: per-unit monostatic detection, two neighbor
/// bistatic scans, constraint association by best triangulation residual,
/// overlap deduplication. Deterministic under (scene, seed).
DetectionReport run_mimo_cycle(const LidalSimulator& sim, std::span<const Target> targets,
                               Distinguisher& distinguisher, std::uint64_t seed,
                               const CycleParams& params = {}, double timestamp = 0.0);

/// Eight sequential group snapshots, per-group detection, DOA localization.
DetectionReport run_miso_cycle(const LidalSimulator& sim, std::span<const Target> targets,
                               Distinguisher& distinguisher, std::uint64_t seed,
                               const CycleParams& params = {}, double timestamp = 0.0);

/// Convenience overloads building a throwaway simulator from the scene.
DetectionReport run_mimo_cycle(const Scene& scene, Distinguisher& distinguisher,
                               std::uint64_t seed, const CycleParams& params = {});
DetectionReport run_miso_cycle(const Scene& scene, Distinguisher& distinguisher,
                               std::uint64_t seed, const CycleParams& params = {});

/// Test stub that answers with the geometric ground truth of the scene passed
/// to begin_cycle. Not a physical method; used to exercise the controller
/// flows in isolation.
class OracleDistinguisher : public Distinguisher {
public:
    OracleDistinguisher(std::vector<TransceiverUnit> units, ImagingReceiver receiver,
                        TruthGate gate = TruthGate::zone)
        : units_(std::move(units)), receiver_(receiver), gate_(gate) {}

    void begin_cycle(const Scene& scene) override;
    std::vector<std::uint8_t> detect(int stream, const Snapshot& snapshot) override;

private:
    std::vector<TransceiverUnit> units_;
    ImagingReceiver receiver_;
    TruthGate gate_;
    std::vector<Target> targets_;
    int n_slots_ = 0;
};

}  // namespace lidal
