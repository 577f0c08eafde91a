#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "lidal/geometry.hpp"
#include "lidal/scene.hpp"

namespace lidal {

/// Generalized Lambertian order m = -ln 2 / ln(cos(semi_angle)).
double lambertian_order(double semi_angle_deg);

struct Emitter {
    Vec3 position;
    double elevation_deg = 90.0;  // 90 = facing straight down
    double azimuth_deg = 0.0;
    double semi_angle_deg = 75.0;
    double optical_power = 18.0;   // W
    double pulse_width = 2e-9;     // s

    Vec3 axis() const {
        const double el = deg_to_rad(elevation_deg);
        const double az = deg_to_rad(azimuth_deg);
        return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), -std::sin(el)};
    }
};

/// Compound parabolic concentrator: ideal gain inside the acceptance cone,
/// opaque outside it.
struct CpcOptics {
    double acceptance_semi_angle_deg = 43.8;
    double refractive_index = 1.7;

    double gain() const {
        const double s = std::sin(deg_to_rad(acceptance_semi_angle_deg));
        return refractive_index * refractive_index / (s * s);
    }
};

/// Imaging-receiver pixel: collects within the lens field of view, but only
/// from surface elements whose floor position falls inside the pixel's
/// footprint cell.
struct LensPixelOptics {
    double fov_semi_angle_deg = 72.0;
    Rect footprint;
};

struct Detector {
    Vec3 position;
    double area = 20e-6;           // m^2; for lens pixels this is the collection aperture
    double responsivity = 0.4;     // A/W
    std::variant<CpcOptics, LensPixelOptics> optics = CpcOptics{};
    double noise_density = 2.5e-12;  // A/sqrt(Hz)
    Vec3 axis{0.0, 0.0, -1.0};
};

struct ImpulseResponse {
    std::vector<double> bins;      // received optical power per delay bin, W
    double bin_duration = 0.01e-9; // s
    double origin_time = 0.0;

    double total_power() const {
        double sum = 0.0;
        for (double b : bins) sum += b;
        return sum;
    }
};

struct Waveform {
    std::vector<double> samples;   // photocurrent, A
    double sample_period = 0.1e-9; // T_sa
    double slot_width = 2e-9;      // T_s

    int samples_per_slot() const {
        return static_cast<int>(std::llround(slot_width / sample_period));
    }
    int slot_count() const {
        const int per_slot = samples_per_slot();
        return per_slot > 0 ? static_cast<int>(samples.size()) / per_slot : 0;
    }
};

/// Observation window: ceil((2 * room diagonal / c) / slot_width) slots cover
/// the longest possible emitter->patch->detector path in the room.
int slot_count_for_room(const Room& room, double slot_width = 2e-9);

/// One-bounce ray contribution from a single patch.
struct PathContribution {
    double gain = 0.0;     // dimensionless path gain (fraction of emitted power)
    double delay = 0.0;    // s
    int patch_index = -1;  // index into the traced patch list
};

/// Emission-side gain toward a point: (m+1)/(2*pi*d^2) * cos^m(phi), zero
/// behind the emitter.
double emission_gain(const Emitter& emitter, const Vec3& point);

/// Collection gain of a detector for diffuse radiation leaving `point` with
/// surface normal `normal`; zero outside the optics' acceptance/footprint.
double collection_gain(const Detector& detector, const Vec3& point, const Vec3& normal);

/// Traces single-bounce paths emitter -> patch -> detector over `patches`,
/// testing occlusion against `occluders`. Patches with zero gain are omitted.
std::vector<PathContribution> trace_paths(std::span<const Patch> patches, const Emitter& emitter,
                                          const Detector& detector,
                                          std::span<const Box> occluders);

/// Reflected impulse response through the scene. max_bounces is 1 or 2; the
/// second bounce costs O(patches^2) and is intended for coarse patch sizes.
ImpulseResponse impulse_response(const Scene& scene, const Emitter& emitter,
                                 const Detector& detector, int max_bounces = 1);

/// Convolves the impulse response with the rectangular transmit pulse,
/// applies the responsivity and samples at T_sa. Noiseless.
Waveform received_waveform(const ImpulseResponse& ir, const Emitter& emitter,
                           const Detector& detector);

/// Adds i.i.d. zero-mean Gaussian samples with sigma = noise_density *
/// sqrt(bandwidth); deterministic under the seed.
Waveform add_noise(const Waveform& w, const Detector& detector, double bandwidth_hz,
                   std::uint64_t seed);

double noise_sigma(const Detector& detector, double bandwidth_hz);

struct SlotStats {
    std::vector<double> aggregate;              // per-slot sum of sample magnitudes
    std::vector<std::vector<double>> samples;   // raw per-slot sample vectors
};

SlotStats slot_energies(const Waveform& w);

/// Precomputed single-bounce background channel for one emitter/detector
/// pair. Static patch gains are traced once against the static obstacles;
/// per-call work is limited to re-testing those paths against the current
/// target boxes and tracing the target patches themselves. compute() agrees
/// exactly with impulse_response() on the equivalent scene.
class CachedChannel {
public:
    CachedChannel(const Scene& background, const Emitter& emitter, const Detector& detector);

    ImpulseResponse compute(std::span<const Target> targets) const;

    const Emitter& emitter() const { return emitter_; }
    const Detector& detector() const { return detector_; }

private:
    struct StaticPath {
        double gain;
        int bin;
        Vec3 ray_origin;  // patch center nudged off the surface, as traced
    };

    Scene background_;
    Emitter emitter_;
    Detector detector_;
    std::vector<Box> obstacle_boxes_;
    std::vector<StaticPath> static_paths_;
    int n_bins_ = 0;
};

}  // namespace lidal
