#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "lidal/mlp.hpp"
#include "lidal/scene.hpp"
#include "lidal/snapshot.hpp"

namespace lidal {

/// Background subtraction: per-slot (MIMO) or per-pixel (MISO) bit set where
/// the magnitude of the summed sample difference between the two snapshots
/// exceeds the threshold.
std::vector<std::uint8_t> bsm_detect(const Snapshot& prev, const Snapshot& curr, double threshold);

/// Per-slot/per-pixel statistic |sum(curr - prev)| used by bsm_detect.
std::vector<double> bsm_statistic(const Snapshot& prev, const Snapshot& curr);

/// Cross correlation: Pearson coefficient between consecutive snapshots'
/// slot (or pixel) sample vectors; a bit is set where any consecutive pair's
/// coefficient drops below 1 - threshold. Zero-variance vectors correlate at
/// exactly 1 (no change).
std::vector<std::uint8_t> ccm_detect(std::span<const Snapshot> window, double threshold);

/// Per-slot coefficients for one snapshot pair.
std::vector<double> ccm_coefficients(const Snapshot& a, const Snapshot& b);

/// Stateful target/background separator driven by one snapshot stream per
/// scan configuration. begin_cycle carries the current scene as a truth
/// channel for oracle stubs; physical methods ignore it.
class Distinguisher {
public:
    virtual ~Distinguisher() = default;
    virtual void begin_cycle(const Scene& /*scene*/) {}
    virtual void calibrate(int /*stream*/, const Snapshot& /*background*/) {}
    virtual std::vector<std::uint8_t> detect(int stream, const Snapshot& snapshot) = 0;
};

/// Shared tuning for the two motion-based methods.
struct MotionDetectorParams {
    double noise_sigma = 0.0;        // per-sample Gaussian sigma of the stream
    double threshold_sigma = 3.0;    // detection threshold in noise sigmas
    double reference_blend = 0.02;   // running-average reference update rate
    double corr_threshold = 0.3;     // CCM: change when corr < 1 - this
};

/// Background subtraction against an adaptive reference snapshot. The first
/// snapshot of an uncalibrated stream seeds the reference.
class BsmDistinguisher : public Distinguisher {
public:
    explicit BsmDistinguisher(MotionDetectorParams params) : params_(params) {}
    void calibrate(int stream, const Snapshot& background) override;
    std::vector<std::uint8_t> detect(int stream, const Snapshot& snapshot) override;

private:
    MotionDetectorParams params_;
    std::map<int, Snapshot> reference_;
};

/// Cross correlation against the same adaptive reference, gated so that
/// slots carrying nothing but noise do not register as change.
class CcmDistinguisher : public Distinguisher {
public:
    explicit CcmDistinguisher(MotionDetectorParams params) : params_(params) {}
    void calibrate(int stream, const Snapshot& background) override;
    std::vector<std::uint8_t> detect(int stream, const Snapshot& snapshot) override;

private:
    MotionDetectorParams params_;
    std::map<int, Snapshot> reference_;
};

/// Trained network for one snapshot stream plus the fixed preprocessing it
/// expects. MIMO inputs are the raw waveform samples; MISO inputs are each
/// pixel waveform sum-pooled to n_in / n_pixels bins. Both are scaled by the
/// stream's maximum noiseless background amplitude.
struct AnnModel {
    SnapshotKind kind = SnapshotKind::mimo_scan;
    Mlp mlp;
    double input_scale = 1.0;
    double output_threshold = 0.5;
};

Eigen::VectorXd ann_input_from_snapshot(const AnnModel& model, const Snapshot& snapshot);

/// Occupancy bits: bit_k = 1 iff y_k strictly exceeds the output threshold.
std::vector<std::uint8_t> ann_detect(const AnnModel& model, const Snapshot& snapshot);

/// Sum-pools `samples` into `bins` contiguous groups (used for the MISO
/// per-pixel input reduction).
std::vector<double> pool_sums(std::span<const double> samples, int bins);

class AnnDistinguisher : public Distinguisher {
public:
    AnnDistinguisher() = default;
    explicit AnnDistinguisher(std::map<int, AnnModel> models) : models_(std::move(models)) {}

    void add_model(int stream, AnnModel model) { models_[stream] = std::move(model); }
    const std::map<int, AnnModel>& models() const { return models_; }
    std::map<int, AnnModel>& models() { return models_; }

    std::vector<std::uint8_t> detect(int stream, const Snapshot& snapshot) override;

private:
    std::map<int, AnnModel> models_;
};

}  // namespace lidal
