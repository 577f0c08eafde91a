#include "lidal/system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lidal {

TransceiverUnit make_transceiver(int id, Vec3 position) {
    TransceiverUnit unit;
    unit.id = id;
    unit.emitter.position = position;
    unit.detector.position = position;
    return unit;
}

std::vector<TransceiverUnit> default_mimo_units(const Room& room) {
    // Row-major numbering keeps units n, n+1, n+2 non-collinear, so the three
    // collaborating scans always span a proper triangle.
    std::vector<TransceiverUnit> units;
    int id = 0;
    for (int row = 0; row < 4; ++row) {
        for (int col = 0; col < 2; ++col) {
            const double x = room.width * (2 * col + 1) / 4.0;
            const double y = room.length * (2 * row + 1) / 8.0;
            units.push_back(make_transceiver(id++, {x, y, room.height}));
        }
    }
    return units;
}

Rect ImagingReceiver::pixel_footprint(int pixel) const {
    const int row = pixel / columns;
    const int col = pixel % columns;
    return {col * cell_size, row * cell_size, (col + 1) * cell_size, (row + 1) * cell_size};
}

Vec2 ImagingReceiver::pixel_center(int pixel) const { return pixel_footprint(pixel).center(); }

int ImagingReceiver::pixel_at(const Vec2& p) const {
    const int col = static_cast<int>(std::floor(p.x / cell_size));
    const int row = static_cast<int>(std::floor(p.y / cell_size));
    if (col < 0 || col >= columns || row < 0 || row >= rows) return -1;
    return row * columns + col;
}

Detector ImagingReceiver::pixel_detector(int pixel) const {
    Detector det;
    det.position = position;
    det.area = aperture_area;
    det.responsivity = responsivity;
    det.optics = LensPixelOptics{fov_semi_angle_deg, pixel_footprint(pixel)};
    det.noise_density = noise_density;
    return det;
}

ImagingReceiver default_imaging_receiver(const Room& room) {
    ImagingReceiver receiver;
    receiver.position = {room.width / 2.0, room.length / 2.0, room.height};
    receiver.columns = static_cast<int>(std::llround(room.width / receiver.cell_size));
    receiver.rows = static_cast<int>(std::llround(room.length / receiver.cell_size));
    return receiver;
}

std::vector<int> group_pixels(const ImagingReceiver& receiver,
                              const std::vector<TransceiverUnit>& units, int group) {
    if (group < 0 || group >= static_cast<int>(units.size())) {
        throw std::invalid_argument("group_pixels: group out of range");
    }
    const Vec2 center = units[group].floor_position();
    const Rect block{center.x - 1.0, center.y - 1.0, center.x + 1.0, center.y + 1.0};
    std::vector<int> pixels;
    for (int p = 0; p < receiver.pixel_count(); ++p) {
        if (block.contains(receiver.pixel_center(p))) pixels.push_back(p);
    }
    return pixels;
}

// ---------------------------------------------------------------------------
// Ranging and localization primitives

double toa_range(int slot_index, RangingMode mode, double slot_width) {
    if (slot_index < 0) throw std::invalid_argument("toa_range: slot index must be >= 0");
    const double center_time = (slot_index + 0.5) * slot_width;
    const double path = kSpeedOfLight * center_time;
    return mode == RangingMode::monostatic ? path / 2.0 : path;
}

namespace {

double objective(std::span<const RangeConstraint> constraints, const Vec2& p, double z_ref) {
    double sum = 0.0;
    for (const auto& c : constraints) {
        const double r = c.residual(p, z_ref);
        sum += r * r;
    }
    return sum;
}

}  // namespace

TriangulationResult triangulate(std::span<const RangeConstraint> constraints, const Room& room,
                                const TriangulationOptions& options) {
    if (constraints.empty()) throw std::invalid_argument("triangulate: no constraints");

    const double step = options.grid_step;
    Vec2 best{0.0, 0.0};
    double best_f = objective(constraints, best, options.z_ref);
    const int nx = static_cast<int>(std::floor(room.width / step));
    const int ny = static_cast<int>(std::floor(room.length / step));
    for (int i = 0; i <= nx; ++i) {
        for (int j = 0; j <= ny; ++j) {
            const Vec2 p{std::min(i * step, room.width), std::min(j * step, room.length)};
            const double f = objective(constraints, p, options.z_ref);
            if (f < best_f) {
                best_f = f;
                best = p;
            }
        }
    }

    // Compass refinement from the best grid node.
    double h = step;
    while (h > 1e-9) {
        bool moved = false;
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                if (dx == 0 && dy == 0) continue;
                Vec2 p{std::clamp(best.x + dx * h, 0.0, room.width),
                       std::clamp(best.y + dy * h, 0.0, room.length)};
                const double f = objective(constraints, p, options.z_ref);
                if (f < best_f) {
                    best_f = f;
                    best = p;
                    moved = true;
                }
            }
        }
        if (!moved) h *= 0.5;
    }

    // Damped Gauss-Newton polish; compass search alone can stall inside the
    // narrow curved valleys these ellipse residuals produce.
    double lambda = 1e-9;
    for (int iteration = 0; iteration < 80; ++iteration) {
        double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
        for (const auto& c : constraints) {
            const Vec3 q{best.x, best.y, options.z_ref};
            double jx = 0.0, jy = 0.0;
            const Vec3 to_rx = q - c.rx;
            const double d_rx = to_rx.norm();
            if (d_rx > 1e-12) {
                jx += to_rx.x / d_rx;
                jy += to_rx.y / d_rx;
            }
            if (!c.monostatic()) {
                const Vec3 to_tx = q - c.tx;
                const double d_tx = to_tx.norm();
                if (d_tx > 1e-12) {
                    jx += to_tx.x / d_tx;
                    jy += to_tx.y / d_tx;
                }
            }
            jx *= c.weight;
            jy *= c.weight;
            const double r = c.residual(best, options.z_ref);
            g0 += jx * r;
            g1 += jy * r;
            h00 += jx * jx;
            h01 += jx * jy;
            h11 += jy * jy;
        }
        const double det = (h00 + lambda) * (h11 + lambda) - h01 * h01;
        if (std::abs(det) < 1e-18) break;
        const double dx = -((h11 + lambda) * g0 - h01 * g1) / det;
        const double dy = -((h00 + lambda) * g1 - h01 * g0) / det;
        const Vec2 candidate{std::clamp(best.x + dx, 0.0, room.width),
                             std::clamp(best.y + dy, 0.0, room.length)};
        const double f = objective(constraints, candidate, options.z_ref);
        if (f < best_f) {
            best_f = f;
            best = candidate;
            lambda = std::max(lambda / 3.0, 1e-12);
            if (dx * dx + dy * dy < 1e-24) break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e6) break;
        }
    }

    TriangulationResult result;
    result.position = best;
    result.residual = std::sqrt(best_f / static_cast<double>(constraints.size()));
    result.feasible = result.residual <= options.residual_limit;
    return result;
}

std::vector<Vec2> deduplicate(std::vector<Vec2> positions, double tolerance) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("deduplicate: tolerance must be positive");

    bool merged_any = true;
    while (merged_any && positions.size() > 1) {
        const std::size_t n = positions.size();
        std::vector<std::size_t> parent(n);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](std::size_t a) {
            while (parent[a] != a) a = parent[a] = parent[parent[a]];
            return a;
        };
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (distance(positions[i], positions[j]) <= tolerance) {
                    const auto ri = find(i), rj = find(j);
                    if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
                }
            }
        }

        std::vector<Vec2> centroids;
        std::vector<int> counts;
        std::vector<int> slot_of(n, -1);
        merged_any = false;
        for (std::size_t i = 0; i < n; ++i) {
            const auto root = find(i);
            if (slot_of[root] < 0) {
                slot_of[root] = static_cast<int>(centroids.size());
                centroids.push_back({0.0, 0.0});
                counts.push_back(0);
            }
            auto& c = centroids[slot_of[root]];
            c = c + positions[i];
            if (++counts[slot_of[root]] > 1) merged_any = true;
        }
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            centroids[c] = centroids[c] * (1.0 / counts[c]);
        }
        positions = std::move(centroids);
    }
    return positions;
}

std::vector<Vec2> doa_localize(const std::vector<std::uint8_t>& occupancy,
                               const ImagingReceiver& receiver) {
    if (static_cast<int>(occupancy.size()) != receiver.pixel_count()) {
        throw std::invalid_argument("doa_localize: occupancy length != pixel count");
    }
    std::vector<Vec2> positions;
    std::vector<std::uint8_t> visited(occupancy.size(), 0);
    for (int start = 0; start < receiver.pixel_count(); ++start) {
        if (!occupancy[start] || visited[start]) continue;
        // 4-neighbor flood fill.
        std::vector<int> stack{start};
        visited[start] = 1;
        Vec2 sum{0.0, 0.0};
        int cells = 0;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            sum = sum + receiver.pixel_center(p);
            ++cells;
            const int row = p / receiver.columns;
            const int col = p % receiver.columns;
            const int neighbors[4] = {p - receiver.columns, p + receiver.columns, p - 1, p + 1};
            const bool valid[4] = {row > 0, row < receiver.rows - 1, col > 0,
                                   col < receiver.columns - 1};
            for (int k = 0; k < 4; ++k) {
                if (!valid[k]) continue;
                const int q = neighbors[k];
                if (occupancy[q] && !visited[q]) {
                    visited[q] = 1;
                    stack.push_back(q);
                }
            }
        }
        positions.push_back(sum * (1.0 / cells));
    }
    return positions;
}

std::vector<std::pair<int, int>> occupied_runs(const std::vector<std::uint8_t>& bits) {
    std::vector<std::pair<int, int>> runs;
    int start = -1;
    for (int i = 0; i < static_cast<int>(bits.size()); ++i) {
        if (bits[i] && start < 0) start = i;
        if (!bits[i] && start >= 0) {
            runs.emplace_back(start, i - 1);
            start = -1;
        }
    }
    if (start >= 0) runs.emplace_back(start, static_cast<int>(bits.size()) - 1);
    return runs;
}

// ---------------------------------------------------------------------------
// Ground-truth geometry

int monostatic_slot(const TransceiverUnit& unit, const Target& target, double slot_width) {
    // The top face dominates the echo seen from the ceiling; its center is
    // the reference reflection point.
    const double d = distance(unit.emitter.position, target.top_center());
    return static_cast<int>(std::floor(2.0 * d / (kSpeedOfLight * slot_width)));
}

int bistatic_slot(const TransceiverUnit& tx, const TransceiverUnit& rx, const Target& target,
                  double slot_width) {
    const double path = distance(tx.emitter.position, target.top_center()) +
                        distance(target.top_center(), rx.detector.position);
    return static_cast<int>(std::floor(path / (kSpeedOfLight * slot_width)));
}

bool target_in_zone(const TransceiverUnit& unit, const Target& target) {
    return distance(unit.floor_position(), target.position) <= unit.zone_radius;
}

bool target_visible(const TransceiverUnit& unit, const Target& target) {
    const Vec3 dir = (target.top_center() - unit.detector.position).normalized();
    const double cos_psi = dir.dot(unit.detector.axis);
    if (cos_psi <= 0.0) return false;
    const double psi_deg = rad_to_deg(std::acos(std::clamp(cos_psi, -1.0, 1.0)));
    if (const auto* cpc = std::get_if<CpcOptics>(&unit.detector.optics)) {
        return psi_deg <= cpc->acceptance_semi_angle_deg;
    }
    return psi_deg <= std::get<LensPixelOptics>(unit.detector.optics).fov_semi_angle_deg;
}

std::vector<std::uint8_t> mimo_truth_bits(const TransceiverUnit& rx, const TransceiverUnit& tx,
                                          std::span<const Target> targets, int n_slots,
                                          TruthGate gate) {
    std::vector<std::uint8_t> bits(n_slots, 0);
    for (const auto& target : targets) {
        const bool inside = gate == TruthGate::zone ? target_in_zone(rx, target)
                                                    : target_visible(rx, target);
        if (!inside) continue;
        const int slot = (rx.id == tx.id) ? monostatic_slot(rx, target)
                                          : bistatic_slot(tx, rx, target);
        if (slot >= 0 && slot < n_slots) bits[slot] = 1;
    }
    return bits;
}

std::vector<std::uint8_t> miso_truth_bits(const ImagingReceiver& receiver,
                                          std::span<const int> pixels,
                                          std::span<const Target> targets) {
    std::vector<std::uint8_t> bits(pixels.size(), 0);
    for (const auto& target : targets) {
        const int pixel = receiver.pixel_at(target.position);
        if (pixel < 0) continue;
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            if (pixels[i] == pixel) bits[i] = 1;
        }
    }
    return bits;
}

// ---------------------------------------------------------------------------
// LidalSimulator

LidalSimulator::LidalSimulator(Scene background, std::vector<TransceiverUnit> units,
                               ImagingReceiver receiver, NoiseParams noise)
    : background_(std::move(background)),
      units_(std::move(units)),
      receiver_(receiver),
      noise_(noise) {
    background_.targets.clear();
    validate_scene(background_);
    if (units_.empty()) throw std::invalid_argument("LidalSimulator: no transceiver units");
    n_slots_ = slot_count_for_room(background_.room);
    const double bin_duration = ImpulseResponse{}.bin_duration;
    miso_bins_ = static_cast<int>(std::llround(n_slots_ * 2e-9 / bin_duration));
    for (const auto& o : background_.obstacles) obstacle_boxes_.push_back(o.box());
}

LidalSimulator::LidalSimulator(const Scene& background)
    : LidalSimulator(background, default_mimo_units(background.room),
                     default_imaging_receiver(background.room), NoiseParams{}) {}

std::array<int, 2> LidalSimulator::neighbors(int unit) const {
    const int n = static_cast<int>(units_.size());
    std::array<int, 2> out{-1, -1};
    int chosen = 0;
    for (int c : {unit + 1, unit + 2}) {
        if (c < n) out[chosen++] = c;
    }
    while (chosen < 2) {
        int best = -1;
        double best_d = 0.0;
        for (int c = 0; c < n; ++c) {
            if (c == unit || c == out[0] || c == out[1]) continue;
            const double d = distance(units_[c].floor_position(), units_[unit].floor_position());
            if (best < 0 || d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && c < best)) {
                best = c;
                best_d = d;
            }
        }
        if (best < 0) throw std::runtime_error("neighbors: not enough units");
        out[chosen++] = best;
    }
    return out;
}

const CachedChannel& LidalSimulator::mimo_channel(int rx, int tx) const {
    const int key = rx * static_cast<int>(units_.size()) + tx;
    auto it = mimo_channels_.find(key);
    if (it == mimo_channels_.end()) {
        it = mimo_channels_
                 .emplace(key, CachedChannel(background_, units_.at(tx).emitter,
                                             units_.at(rx).detector))
                 .first;
    }
    return it->second;
}

Snapshot LidalSimulator::mimo_scan(std::span<const Target> targets, int rx, int tx,
                                   std::uint64_t seed, double timestamp) const {
    const auto& channel = mimo_channel(rx, tx);
    const ImpulseResponse ir = channel.compute(targets);
    Waveform wf = received_waveform(ir, units_[tx].emitter, units_[rx].detector);
    if (noise_.bandwidth_hz > 0.0) {
        wf = add_noise(wf, units_[rx].detector, noise_.bandwidth_hz,
                       Rng::mix(seed, 0x3131ULL + rx * units_.size() + tx));
    }
    Snapshot snap;
    snap.kind = SnapshotKind::mimo_scan;
    snap.receiver_id = rx;
    snap.emitter_id = tx;
    snap.waveforms.push_back(std::move(wf));
    snap.timestamp = timestamp;
    return snap;
}

Snapshot LidalSimulator::background_mimo_scan(int rx, int tx) const {
    const ImpulseResponse ir = mimo_channel(rx, tx).compute({});
    Snapshot snap;
    snap.kind = SnapshotKind::mimo_scan;
    snap.receiver_id = rx;
    snap.emitter_id = tx;
    snap.waveforms.push_back(received_waveform(ir, units_[tx].emitter, units_[rx].detector));
    return snap;
}

std::vector<ImpulseResponse> LidalSimulator::miso_pixel_irs(std::span<const Target> targets,
                                                            int tx) const {
    auto it = miso_paths_.find(tx);
    if (it == miso_paths_.end()) {
        // One pass over the background patches; the footprint partition sends
        // each patch to exactly one pixel, so a single trace serves them all.
        std::vector<MisoPath> paths;
        Detector full = receiver_.pixel_detector(0);
        full.optics = LensPixelOptics{receiver_.fov_semi_angle_deg,
                                      Rect{0.0, 0.0, receiver_.columns * receiver_.cell_size,
                                           receiver_.rows * receiver_.cell_size}};
        const auto patches = make_background_patches(background_);
        const auto contribs =
            trace_paths(patches, units_.at(tx).emitter, full, obstacle_boxes_);
        const double bin_duration = ImpulseResponse{}.bin_duration;
        for (const auto& c : contribs) {
            const Patch& patch = patches[c.patch_index];
            const int pixel = receiver_.pixel_at(patch.center.xy());
            if (pixel < 0) continue;
            MisoPath path;
            path.gain = c.gain * units_[tx].emitter.optical_power;
            path.bin = static_cast<int>(std::floor(c.delay / bin_duration));
            path.pixel = pixel;
            path.ray_origin = patch.center + patch.normal * 1e-9;
            paths.push_back(path);
        }
        it = miso_paths_.emplace(tx, std::move(paths)).first;
    }

    std::vector<ImpulseResponse> irs(receiver_.pixel_count());
    for (auto& ir : irs) ir.bins.assign(miso_bins_, 0.0);

    std::vector<Box> target_boxes;
    for (const auto& t : targets) target_boxes.push_back(t.box());
    const Vec3 tx_pos = units_.at(tx).emitter.position;
    for (const auto& path : it->second) {
        bool blocked = false;
        for (const auto& box : target_boxes) {
            if (segment_hits_box(tx_pos, path.ray_origin, box) ||
                segment_hits_box(path.ray_origin, receiver_.position, box)) {
                blocked = true;
                break;
            }
        }
        if (!blocked && path.bin >= 0 && path.bin < miso_bins_) {
            irs[path.pixel].bins[path.bin] += path.gain;
        }
    }

    if (!targets.empty()) {
        std::vector<Box> occluders = obstacle_boxes_;
        occluders.insert(occluders.end(), target_boxes.begin(), target_boxes.end());
        Detector full = receiver_.pixel_detector(0);
        full.optics = LensPixelOptics{receiver_.fov_semi_angle_deg,
                                      Rect{0.0, 0.0, receiver_.columns * receiver_.cell_size,
                                           receiver_.rows * receiver_.cell_size}};
        std::vector<Patch> patches;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const auto tp = make_target_patches(
                targets[t], background_.patch_size,
                static_cast<int>(background_.obstacles.size() + t));
            patches.insert(patches.end(), tp.begin(), tp.end());
        }
        const auto contribs = trace_paths(patches, units_.at(tx).emitter, full, occluders);
        const double bin_duration = ImpulseResponse{}.bin_duration;
        for (const auto& c : contribs) {
            const int pixel = receiver_.pixel_at(patches[c.patch_index].center.xy());
            if (pixel < 0) continue;
            const int bin = static_cast<int>(std::floor(c.delay / bin_duration));
            if (bin >= 0 && bin < miso_bins_) {
                irs[pixel].bins[bin] += c.gain * units_[tx].emitter.optical_power;
            }
        }
    }
    return irs;
}

Snapshot LidalSimulator::miso_group_snapshot(std::span<const Target> targets, int tx,
                                             std::uint64_t seed, double timestamp) const {
    const auto irs = miso_pixel_irs(targets, tx);
    const auto pixels = group_pixels(receiver_, units_, tx);
    const std::size_t expected = receiver_.pixel_count() / units_.size();
    if (pixels.size() != expected) {
        throw std::runtime_error("miso_group_snapshot: group does not hold N_p/L_tx pixels");
    }

    Snapshot snap;
    snap.kind = SnapshotKind::miso_group;
    snap.receiver_id = tx;
    snap.emitter_id = tx;
    snap.timestamp = timestamp;
    for (const int pixel : pixels) {
        const Detector det = receiver_.pixel_detector(pixel);
        Waveform wf = received_waveform(irs[pixel], units_[tx].emitter, det);
        if (noise_.bandwidth_hz > 0.0) {
            wf = add_noise(wf, det, noise_.bandwidth_hz,
                           Rng::mix(seed, 0x800ULL + tx * 256ULL + pixel));
        }
        snap.waveforms.push_back(std::move(wf));
    }
    return snap;
}

Snapshot LidalSimulator::background_miso_snapshot(int tx) const {
    const auto irs = miso_pixel_irs({}, tx);
    const auto pixels = group_pixels(receiver_, units_, tx);
    Snapshot snap;
    snap.kind = SnapshotKind::miso_group;
    snap.receiver_id = tx;
    snap.emitter_id = tx;
    for (const int pixel : pixels) {
        snap.waveforms.push_back(
            received_waveform(irs[pixel], units_[tx].emitter, receiver_.pixel_detector(pixel)));
    }
    return snap;
}

double LidalSimulator::mimo_noise_sigma() const {
    return noise_sigma(units_.front().detector, noise_.bandwidth_hz);
}

double LidalSimulator::miso_noise_sigma() const {
    return noise_sigma(receiver_.pixel_detector(0), noise_.bandwidth_hz);
}

// ---------------------------------------------------------------------------
// Controller cycles

DetectionReport run_mimo_cycle(const LidalSimulator& sim, std::span<const Target> targets,
                               Distinguisher& distinguisher, std::uint64_t seed,
                               const CycleParams& params, double timestamp) {
    const Scene current =
        sim.background().with_targets(std::vector<Target>(targets.begin(), targets.end()));
    distinguisher.begin_cycle(current);

    DetectionReport report;
    report.seed = seed;
    report.timestamp = timestamp;

    TriangulationOptions tri_options;
    tri_options.z_ref = params.reflection_height;
    tri_options.residual_limit = params.residual_limit;
    tri_options.grid_step = params.grid_step;

    std::vector<Vec2> positions;
    const int n_units = static_cast<int>(sim.units().size());
    for (int n = 0; n < n_units; ++n) {
        const Snapshot mono = sim.mimo_scan(targets, n, n, seed, timestamp);
        auto mono_bits = distinguisher.detect(mimo_stream(n, 0), mono);
        report.occupancy.push_back(mono_bits);
        const auto mono_runs = occupied_runs(mono_bits);
        if (mono_runs.empty()) continue;

        const auto [n1, n2] = sim.neighbors(n);
        const Snapshot bi1 = sim.mimo_scan(targets, n, n1, seed, timestamp);
        const Snapshot bi2 = sim.mimo_scan(targets, n, n2, seed, timestamp);
        auto bits1 = distinguisher.detect(mimo_stream(n, 1), bi1);
        auto bits2 = distinguisher.detect(mimo_stream(n, 2), bi2);
        report.occupancy.push_back(bits1);
        report.occupancy.push_back(bits2);
        const auto runs1 = occupied_runs(bits1);
        const auto runs2 = occupied_runs(bits2);

        const Vec3 pos_rx = sim.units()[n].detector.position;
        const Vec3 pos_tx1 = sim.units()[n1].emitter.position;
        const Vec3 pos_tx2 = sim.units()[n2].emitter.position;

        // Associate every monostatic detection with one bistatic echo from
        // each neighbor by best triangulation residual.
        std::vector<bool> used1(runs1.size(), false), used2(runs2.size(), false);
        for (const auto& mono_run : mono_runs) {
            const double range = toa_range(mono_run.first, RangingMode::monostatic);
            TriangulationResult best;
            double best_residual = 0.0;
            int best_i1 = -1, best_i2 = -1;
            for (std::size_t i1 = 0; i1 < runs1.size(); ++i1) {
                if (used1[i1]) continue;
                const double path1 = toa_range(runs1[i1].first, RangingMode::bistatic);
                for (std::size_t i2 = 0; i2 < runs2.size(); ++i2) {
                    if (used2[i2]) continue;
                    const double path2 = toa_range(runs2[i2].first, RangingMode::bistatic);
                    const RangeConstraint constraints[3] = {
                        {pos_rx, pos_rx, range, 1.0},
                        {pos_tx1, pos_rx, path1, 0.5},
                        {pos_tx2, pos_rx, path2, 0.5},
                    };
                    const auto tri = triangulate(constraints, sim.background().room, tri_options);
                    if (best_i1 < 0 || tri.residual < best_residual) {
                        best = tri;
                        best_residual = tri.residual;
                        best_i1 = static_cast<int>(i1);
                        best_i2 = static_cast<int>(i2);
                    }
                }
            }
            if (best_i1 >= 0 && best.feasible) {
                used1[best_i1] = used2[best_i2] = true;
                positions.push_back(best.position);
                report.ranges.push_back(range);
                report.residuals.push_back(best.residual);
            } else {
                ++report.dropped;
            }
        }
    }

    report.positions = deduplicate(std::move(positions), params.dedup_tolerance);
    report.count = static_cast<int>(report.positions.size());
    return report;
}

DetectionReport run_miso_cycle(const LidalSimulator& sim, std::span<const Target> targets,
                               Distinguisher& distinguisher, std::uint64_t seed,
                               const CycleParams& params, double timestamp) {
    const Scene current =
        sim.background().with_targets(std::vector<Target>(targets.begin(), targets.end()));
    distinguisher.begin_cycle(current);

    DetectionReport report;
    report.seed = seed;
    report.timestamp = timestamp;

    std::vector<std::uint8_t> occupancy(sim.receiver().pixel_count(), 0);
    const int n_groups = static_cast<int>(sim.units().size());
    for (int g = 0; g < n_groups; ++g) {
        const Snapshot snap = sim.miso_group_snapshot(targets, g, seed, timestamp);
        auto bits = distinguisher.detect(miso_stream(g), snap);
        report.occupancy.push_back(bits);
        const auto pixels = group_pixels(sim.receiver(), sim.units(), g);
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            if (bits.at(i)) occupancy[pixels[i]] = 1;
        }
    }

    report.positions = doa_localize(occupancy, sim.receiver());
    report.count = static_cast<int>(report.positions.size());
    (void)params;
    return report;
}

DetectionReport run_mimo_cycle(const Scene& scene, Distinguisher& distinguisher,
                               std::uint64_t seed, const CycleParams& params) {
    LidalSimulator sim(scene);
    return run_mimo_cycle(sim, scene.targets, distinguisher, seed, params);
}

DetectionReport run_miso_cycle(const Scene& scene, Distinguisher& distinguisher,
                               std::uint64_t seed, const CycleParams& params) {
    LidalSimulator sim(scene);
    return run_miso_cycle(sim, scene.targets, distinguisher, seed, params);
}

// ---------------------------------------------------------------------------
// OracleDistinguisher

void OracleDistinguisher::begin_cycle(const Scene& scene) {
    targets_ = scene.targets;
    n_slots_ = slot_count_for_room(scene.room);
}

std::vector<std::uint8_t> OracleDistinguisher::detect(int /*stream*/, const Snapshot& snapshot) {
    if (snapshot.kind == SnapshotKind::mimo_scan) {
        return mimo_truth_bits(units_.at(snapshot.receiver_id), units_.at(snapshot.emitter_id),
                               targets_, n_slots_, gate_);
    }
    const auto pixels = group_pixels(receiver_, units_, snapshot.receiver_id);
    return miso_truth_bits(receiver_, pixels, targets_);
}

}  // namespace lidal
