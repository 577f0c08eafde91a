#include "lidal/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "lidal/rng.hpp"

namespace lidal {

double lambertian_order(double semi_angle_deg) {
    if (!(semi_angle_deg > 0.0 && semi_angle_deg < 90.0)) {
        throw std::invalid_argument("lambertian_order: semi-angle must lie in (0, 90) degrees");
    }
    return -std::log(2.0) / std::log(std::cos(deg_to_rad(semi_angle_deg)));
}

int slot_count_for_room(const Room& room, double slot_width) {
    const double max_path = 2.0 * room.diagonal();
    return static_cast<int>(std::ceil(max_path / kSpeedOfLight / slot_width));
}

double emission_gain(const Emitter& emitter, const Vec3& point) {
    const Vec3 d = point - emitter.position;
    const double dist = d.norm();
    if (dist < 1e-9) return 0.0;
    const Vec3 dir = d * (1.0 / dist);
    const double cos_phi = dir.dot(emitter.axis());
    if (cos_phi <= 0.0) return 0.0;
    const double m = lambertian_order(emitter.semi_angle_deg);
    return (m + 1.0) / (2.0 * kPi * dist * dist) * std::pow(cos_phi, m);
}

double collection_gain(const Detector& detector, const Vec3& point, const Vec3& normal) {
    const Vec3 d = detector.position - point;
    const double dist = d.norm();
    if (dist < 1e-9) return 0.0;
    const Vec3 dir = d * (1.0 / dist);
    const double cos_out = dir.dot(normal);
    if (cos_out <= 0.0) return 0.0;
    const double cos_psi = (Vec3{} - dir).dot(detector.axis);
    if (cos_psi <= 0.0) return 0.0;

    double optics_gain = 0.0;
    if (const auto* cpc = std::get_if<CpcOptics>(&detector.optics)) {
        const double psi = std::acos(std::clamp(cos_psi, -1.0, 1.0));
        if (rad_to_deg(psi) > cpc->acceptance_semi_angle_deg) return 0.0;
        optics_gain = cpc->gain();
    } else {
        const auto& lens = std::get<LensPixelOptics>(detector.optics);
        const double psi = std::acos(std::clamp(cos_psi, -1.0, 1.0));
        if (rad_to_deg(psi) > lens.fov_semi_angle_deg) return 0.0;
        if (!lens.footprint.contains(point.xy())) return 0.0;
        optics_gain = 1.0;
    }
    // Fraction of the diffusely re-emitted power collected by the aperture;
    // clamp keeps near-field geometry passive.
    const double fraction =
        cos_out / (kPi * dist * dist) * detector.area * optics_gain * cos_psi;
    return std::min(fraction, 1.0);
}

namespace {

bool path_blocked(const Vec3& from, const Vec3& to, std::span<const Box> occluders) {
    for (const auto& box : occluders) {
        if (segment_hits_box(from, to, box)) return true;
    }
    return false;
}

}  // namespace

std::vector<PathContribution> trace_paths(std::span<const Patch> patches, const Emitter& emitter,
                                          const Detector& detector,
                                          std::span<const Box> occluders) {
    std::vector<PathContribution> contributions;
    contributions.reserve(patches.size() / 4);
    for (std::size_t p = 0; p < patches.size(); ++p) {
        const Patch& patch = patches[p];
        const Vec3 d_in = patch.center - emitter.position;
        const double dist_in = d_in.norm();
        if (dist_in < 1e-9) continue;
        const double cos_in = (d_in * (-1.0 / dist_in)).dot(patch.normal);
        if (cos_in <= 0.0) continue;

        const double em = emission_gain(emitter, patch.center);
        if (em <= 0.0) continue;
        // Fraction of emitted power intercepted by the patch, capped at 1.
        const double capture = std::min(em * cos_in * patch.area, 1.0);

        const double coll = collection_gain(detector, patch.center, patch.normal);
        if (coll <= 0.0) continue;

        const double gain = capture * patch.reflectivity * coll;
        if (gain <= 0.0) continue;

        // Occlusion, with the ray origins nudged off the surface.
        const Vec3 off = patch.center + patch.normal * 1e-9;
        if (path_blocked(emitter.position, off, occluders)) continue;
        if (path_blocked(off, detector.position, occluders)) continue;

        PathContribution c;
        c.gain = gain;
        c.delay = (dist_in + distance(patch.center, detector.position)) / kSpeedOfLight;
        c.patch_index = static_cast<int>(p);
        contributions.push_back(c);
    }
    return contributions;
}

namespace {

int bins_for_scene(const Room& room, double bin_duration) {
    const int n_slots = slot_count_for_room(room);
    const double window = n_slots * 2e-9;
    return static_cast<int>(std::llround(window / bin_duration));
}

void deposit(ImpulseResponse& ir, double power, double delay) {
    const int bin = static_cast<int>(std::floor(delay / ir.bin_duration));
    if (bin >= 0 && bin < static_cast<int>(ir.bins.size())) ir.bins[bin] += power;
}

}  // namespace

ImpulseResponse impulse_response(const Scene& scene, const Emitter& emitter,
                                 const Detector& detector, int max_bounces) {
    if (max_bounces < 1 || max_bounces > 2) {
        throw std::invalid_argument("impulse_response: max_bounces must be 1 or 2");
    }
    if (!scene.room.bounds().contains(emitter.position) ||
        !scene.room.bounds().contains(detector.position)) {
        throw std::invalid_argument("impulse_response: emitter/detector must be inside the room");
    }

    const std::vector<Patch> patches = make_patches(scene);
    std::vector<Box> occluders;
    occluders.reserve(scene.obstacles.size() + scene.targets.size());
    for (const auto& o : scene.obstacles) occluders.push_back(o.box());
    for (const auto& t : scene.targets) occluders.push_back(t.box());

    ImpulseResponse ir;
    ir.bins.assign(bins_for_scene(scene.room, ir.bin_duration), 0.0);

    const auto first_bounce = trace_paths(patches, emitter, detector, occluders);
    for (const auto& c : first_bounce) deposit(ir, c.gain * emitter.optical_power, c.delay);

    if (max_bounces == 2) {
        // emitter -> p -> q -> detector with diffuse patch-to-patch transfer.
        for (const auto& p : patches) {
            const Vec3 dp = p.center - emitter.position;
            const double dist_p = dp.norm();
            if (dist_p < 1e-9) continue;
            const double cos_in = (dp * (-1.0 / dist_p)).dot(p.normal);
            if (cos_in <= 0.0) continue;
            const double em = emission_gain(emitter, p.center);
            if (em <= 0.0) continue;
            const double captured = std::min(em * cos_in * p.area, 1.0) * p.reflectivity;
            if (captured <= 0.0) continue;
            const Vec3 p_off = p.center + p.normal * 1e-9;
            if (path_blocked(emitter.position, p_off, occluders)) continue;

            for (const auto& q : patches) {
                const Vec3 pq = q.center - p.center;
                const double dist_pq = pq.norm();
                if (dist_pq < 1e-6) continue;
                const Vec3 dir = pq * (1.0 / dist_pq);
                const double cos_leave = dir.dot(p.normal);
                const double cos_arrive = (Vec3{} - dir).dot(q.normal);
                if (cos_leave <= 0.0 || cos_arrive <= 0.0) continue;
                const double transfer = std::min(
                    cos_leave / (kPi * dist_pq * dist_pq) * q.area * cos_arrive, 1.0);
                const double coll = collection_gain(detector, q.center, q.normal);
                if (coll <= 0.0) continue;
                const Vec3 q_off = q.center + q.normal * 1e-9;
                if (path_blocked(p_off, q_off, occluders)) continue;
                if (path_blocked(q_off, detector.position, occluders)) continue;

                const double gain = captured * transfer * q.reflectivity * coll;
                const double delay =
                    (dist_p + dist_pq + distance(q.center, detector.position)) / kSpeedOfLight;
                deposit(ir, gain * emitter.optical_power, delay);
            }
        }
    }
    return ir;
}

Waveform received_waveform(const ImpulseResponse& ir, const Emitter& emitter,
                           const Detector& detector) {
    Waveform w;
    const double ratio = emitter.pulse_width / ir.bin_duration;
    const int pulse_bins = static_cast<int>(std::llround(ratio));
    if (std::abs(ratio - pulse_bins) > 1e-9 || pulse_bins <= 0) {
        throw std::invalid_argument(
            "received_waveform: pulse width must be an integer multiple of the bin duration");
    }

    const int per_slot = w.samples_per_slot();
    const double span = ir.bins.size() * ir.bin_duration;
    const int n_slots = static_cast<int>(std::ceil(span / w.slot_width));
    w.samples.assign(static_cast<std::size_t>(n_slots) * per_slot, 0.0);

    // The pulse holds each bin's power for pulse_width; the waveform samples
    // the sum of all active bins at each sampling instant.
    const int bins_per_sample = static_cast<int>(std::llround(w.sample_period / ir.bin_duration));
    std::vector<double> prefix(ir.bins.size() + 1, 0.0);
    for (std::size_t b = 0; b < ir.bins.size(); ++b) prefix[b + 1] = prefix[b] + ir.bins[b];

    for (std::size_t s = 0; s < w.samples.size(); ++s) {
        // Active bins satisfy t_b <= t_s < t_b + pulse_width.
        const long long sample_bin = static_cast<long long>(s) * bins_per_sample;
        const long long first = std::max(0LL, sample_bin - pulse_bins + 1);
        const long long last = std::min<long long>(sample_bin, static_cast<long long>(ir.bins.size()) - 1);
        if (last < first) continue;
        w.samples[s] = detector.responsivity * (prefix[last + 1] - prefix[first]);
    }
    return w;
}

double noise_sigma(const Detector& detector, double bandwidth_hz) {
    return detector.noise_density * std::sqrt(bandwidth_hz);
}

Waveform add_noise(const Waveform& w, const Detector& detector, double bandwidth_hz,
                   std::uint64_t seed) {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("add_noise: bandwidth must be positive");
    Waveform noisy = w;
    const double sigma = noise_sigma(detector, bandwidth_hz);
    if (sigma == 0.0) return noisy;
    Rng rng(Rng::mix(seed, 0xA03EULL));
    for (auto& s : noisy.samples) s += sigma * rng.gaussian();
    return noisy;
}

SlotStats slot_energies(const Waveform& w) {
    const int per_slot = w.samples_per_slot();
    if (per_slot <= 0 || w.samples.size() % per_slot != 0) {
        throw std::invalid_argument("slot_energies: waveform length is not a whole number of slots");
    }
    const int n_slots = static_cast<int>(w.samples.size()) / per_slot;
    SlotStats stats;
    stats.aggregate.assign(n_slots, 0.0);
    stats.samples.resize(n_slots);
    for (int k = 0; k < n_slots; ++k) {
        auto& slot = stats.samples[k];
        slot.assign(w.samples.begin() + static_cast<std::size_t>(k) * per_slot,
                    w.samples.begin() + static_cast<std::size_t>(k + 1) * per_slot);
        double sum = 0.0;
        for (double v : slot) sum += std::abs(v);
        stats.aggregate[k] = sum;
    }
    return stats;
}

CachedChannel::CachedChannel(const Scene& background, const Emitter& emitter,
                             const Detector& detector)
    : background_(background), emitter_(emitter), detector_(detector) {
    background_.targets.clear();
    for (const auto& o : background_.obstacles) obstacle_boxes_.push_back(o.box());
    n_bins_ = bins_for_scene(background_.room, ImpulseResponse{}.bin_duration);

    const auto patches = make_background_patches(background_);
    const auto contribs = trace_paths(patches, emitter_, detector_, obstacle_boxes_);
    static_paths_.reserve(contribs.size());
    const double bin_duration = ImpulseResponse{}.bin_duration;
    for (const auto& c : contribs) {
        StaticPath path;
        path.gain = c.gain * emitter_.optical_power;
        path.bin = static_cast<int>(std::floor(c.delay / bin_duration));
        const Patch& patch = patches[c.patch_index];
        path.ray_origin = patch.center + patch.normal * 1e-9;
        static_paths_.push_back(path);
    }
}

ImpulseResponse CachedChannel::compute(std::span<const Target> targets) const {
    ImpulseResponse ir;
    ir.bins.assign(n_bins_, 0.0);

    std::vector<Box> target_boxes;
    target_boxes.reserve(targets.size());
    for (const auto& t : targets) target_boxes.push_back(t.box());

    for (const auto& path : static_paths_) {
        bool blocked = false;
        for (const auto& box : target_boxes) {
            if (segment_hits_box(emitter_.position, path.ray_origin, box) ||
                segment_hits_box(path.ray_origin, detector_.position, box)) {
                blocked = true;
                break;
            }
        }
        if (!blocked && path.bin >= 0 && path.bin < n_bins_) ir.bins[path.bin] += path.gain;
    }

    if (!targets.empty()) {
        std::vector<Box> occluders = obstacle_boxes_;
        occluders.insert(occluders.end(), target_boxes.begin(), target_boxes.end());
        std::vector<Patch> patches;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const auto tp = make_target_patches(
                targets[t], background_.patch_size,
                static_cast<int>(background_.obstacles.size() + t));
            patches.insert(patches.end(), tp.begin(), tp.end());
        }
        const auto contribs = trace_paths(patches, emitter_, detector_, occluders);
        for (const auto& c : contribs) {
            deposit(ir, c.gain * emitter_.optical_power, c.delay);
        }
    }
    return ir;
}

}  // namespace lidal
