#include "lidal/distinguishers.hpp"

#include <cmath>
#include <stdexcept>

namespace lidal {

namespace {

void check_same_shape(const Snapshot& a, const Snapshot& b, const char* who) {
    if (a.kind != b.kind || a.waveforms.size() != b.waveforms.size()) {
        throw std::invalid_argument(std::string(who) + ": snapshot shape mismatch");
    }
    for (std::size_t w = 0; w < a.waveforms.size(); ++w) {
        if (a.waveforms[w].samples.size() != b.waveforms[w].samples.size()) {
            throw std::invalid_argument(std::string(who) + ": waveform length mismatch");
        }
    }
}

/// The unit of detection: one slot of the single MIMO waveform, or one whole
/// pixel waveform of a MISO group.
struct Cells {
    int count = 0;
    int cell_samples = 0;  // samples per cell
};

Cells cells_of(const Snapshot& snap) {
    Cells c;
    if (snap.kind == SnapshotKind::mimo_scan) {
        const Waveform& w = snap.waveforms.at(0);
        c.count = w.slot_count();
        c.cell_samples = w.samples_per_slot();
    } else {
        c.count = static_cast<int>(snap.waveforms.size());
        c.cell_samples = static_cast<int>(snap.waveforms.at(0).samples.size());
    }
    return c;
}

std::span<const double> cell_view(const Snapshot& snap, const Cells& cells, int index) {
    if (snap.kind == SnapshotKind::mimo_scan) {
        const auto& samples = snap.waveforms[0].samples;
        return {samples.data() + static_cast<std::size_t>(index) * cells.cell_samples,
                static_cast<std::size_t>(cells.cell_samples)};
    }
    return {snap.waveforms[index].samples.data(), snap.waveforms[index].samples.size()};
}

}  // namespace

std::vector<double> bsm_statistic(const Snapshot& prev, const Snapshot& curr) {
    check_same_shape(prev, curr, "bsm_detect");
    const Cells cells = cells_of(curr);
    std::vector<double> stat(cells.count, 0.0);
    for (int k = 0; k < cells.count; ++k) {
        const auto a = cell_view(prev, cells, k);
        const auto b = cell_view(curr, cells, k);
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) sum += b[i] - a[i];
        stat[k] = std::abs(sum);
    }
    return stat;
}

std::vector<std::uint8_t> bsm_detect(const Snapshot& prev, const Snapshot& curr,
                                     double threshold) {
    const auto stat = bsm_statistic(prev, curr);
    std::vector<std::uint8_t> bits(stat.size(), 0);
    for (std::size_t k = 0; k < stat.size(); ++k) bits[k] = stat[k] > threshold ? 1 : 0;
    return bits;
}

std::vector<double> ccm_coefficients(const Snapshot& a, const Snapshot& b) {
    check_same_shape(a, b, "ccm_detect");
    const Cells cells = cells_of(b);
    std::vector<double> coeffs(cells.count, 1.0);
    for (int k = 0; k < cells.count; ++k) {
        const auto u = cell_view(a, cells, k);
        const auto v = cell_view(b, cells, k);
        const double n = static_cast<double>(u.size());
        double mu = 0.0, mv = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            mu += u[i];
            mv += v[i];
        }
        mu /= n;
        mv /= n;
        double suu = 0.0, svv = 0.0, suv = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double du = u[i] - mu;
            const double dv = v[i] - mv;
            suu += du * du;
            svv += dv * dv;
            suv += du * dv;
        }
        if (suu <= 0.0 || svv <= 0.0) {
            coeffs[k] = 1.0;  // degenerate vectors carry no change information
        } else {
            coeffs[k] = std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
        }
    }
    return coeffs;
}

std::vector<std::uint8_t> ccm_detect(std::span<const Snapshot> window, double threshold) {
    if (window.size() < 2) throw std::invalid_argument("ccm_detect: window needs >= 2 snapshots");
    const Cells cells = cells_of(window[0]);
    std::vector<std::uint8_t> bits(cells.count, 0);
    for (std::size_t s = 0; s + 1 < window.size(); ++s) {
        const auto coeffs = ccm_coefficients(window[s], window[s + 1]);
        for (int k = 0; k < cells.count; ++k) {
            if (coeffs[k] < 1.0 - threshold) bits[k] = 1;
        }
    }
    return bits;
}

namespace {

void blend_reference(Snapshot& reference, const Snapshot& current, double alpha) {
    for (std::size_t w = 0; w < reference.waveforms.size(); ++w) {
        auto& ref = reference.waveforms[w].samples;
        const auto& cur = current.waveforms[w].samples;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            ref[i] = (1.0 - alpha) * ref[i] + alpha * cur[i];
        }
    }
}

double bsm_threshold(const MotionDetectorParams& params, int cell_samples) {
    // sigma of a summed difference of two independent noisy cells.
    return params.threshold_sigma * std::sqrt(2.0 * cell_samples) * params.noise_sigma;
}

/// Aggregate magnitude a noise-only cell stays below with ~3-sigma margin.
double energy_gate(const MotionDetectorParams& params, int cell_samples) {
    const double n = static_cast<double>(cell_samples);
    const double mean = n * params.noise_sigma * std::sqrt(2.0 / kPi);
    const double sd = params.noise_sigma * std::sqrt(n * (1.0 - 2.0 / kPi));
    return mean + 3.0 * sd;
}

double cell_energy(std::span<const double> cell) {
    double sum = 0.0;
    for (double v : cell) sum += std::abs(v);
    return sum;
}

}  // namespace

void BsmDistinguisher::calibrate(int stream, const Snapshot& background) {
    reference_[stream] = background;
}

std::vector<std::uint8_t> BsmDistinguisher::detect(int stream, const Snapshot& snapshot) {
    auto it = reference_.find(stream);
    if (it == reference_.end()) {
        reference_[stream] = snapshot;
        return std::vector<std::uint8_t>(cells_of(snapshot).count, 0);
    }
    const Cells cells = cells_of(snapshot);
    const double threshold = bsm_threshold(params_, cells.cell_samples);
    auto bits = bsm_detect(it->second, snapshot, threshold);
    blend_reference(it->second, snapshot, params_.reference_blend);
    return bits;
}

void CcmDistinguisher::calibrate(int stream, const Snapshot& background) {
    reference_[stream] = background;
}

std::vector<std::uint8_t> CcmDistinguisher::detect(int stream, const Snapshot& snapshot) {
    auto it = reference_.find(stream);
    if (it == reference_.end()) {
        reference_[stream] = snapshot;
        return std::vector<std::uint8_t>(cells_of(snapshot).count, 0);
    }
    const Cells cells = cells_of(snapshot);
    const Snapshot window[2] = {it->second, snapshot};
    auto bits = ccm_detect(window, params_.corr_threshold);
    // Slots that hold nothing but noise decorrelate trivially; require some
    // energy before calling the change a target.
    const double gate = energy_gate(params_, cells.cell_samples);
    for (int k = 0; k < cells.count; ++k) {
        if (!bits[k]) continue;
        const double energy = std::max(cell_energy(cell_view(it->second, cells, k)),
                                       cell_energy(cell_view(snapshot, cells, k)));
        if (energy <= gate) bits[k] = 0;
    }
    blend_reference(it->second, snapshot, params_.reference_blend);
    return bits;
}

std::vector<double> pool_sums(std::span<const double> samples, int bins) {
    if (bins <= 0) throw std::invalid_argument("pool_sums: bins must be positive");
    std::vector<double> pooled(bins, 0.0);
    const std::size_t n = samples.size();
    for (int b = 0; b < bins; ++b) {
        const std::size_t lo = n * b / bins;
        const std::size_t hi = n * (b + 1) / bins;
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += samples[i];
        pooled[b] = sum;
    }
    return pooled;
}

Eigen::VectorXd ann_input_from_snapshot(const AnnModel& model, const Snapshot& snapshot) {
    const double scale = model.input_scale != 0.0 ? model.input_scale : 1.0;
    if (model.kind == SnapshotKind::mimo_scan) {
        const auto& samples = snapshot.waveforms.at(0).samples;
        if (static_cast<int>(samples.size()) != model.mlp.n_in) {
            throw std::invalid_argument("ann input layout mismatch (mimo)");
        }
        Eigen::VectorXd input(model.mlp.n_in);
        for (int i = 0; i < model.mlp.n_in; ++i) input(i) = samples[i] / scale;
        return input;
    }
    const int n_pixels = static_cast<int>(snapshot.waveforms.size());
    if (n_pixels == 0 || model.mlp.n_in % n_pixels != 0) {
        throw std::invalid_argument("ann input layout mismatch (miso)");
    }
    const int per_pixel = model.mlp.n_in / n_pixels;
    Eigen::VectorXd input(model.mlp.n_in);
    for (int pixel = 0; pixel < n_pixels; ++pixel) {
        const auto pooled = pool_sums(snapshot.waveforms[pixel].samples, per_pixel);
        for (int b = 0; b < per_pixel; ++b) input(pixel * per_pixel + b) = pooled[b] / scale;
    }
    return input;
}

std::vector<std::uint8_t> ann_detect(const AnnModel& model, const Snapshot& snapshot) {
    const Eigen::VectorXd outputs = ann_forward(model.mlp, ann_input_from_snapshot(model, snapshot));
    std::vector<std::uint8_t> bits(outputs.size(), 0);
    for (Eigen::Index k = 0; k < outputs.size(); ++k) {
        bits[k] = outputs(k) > model.output_threshold ? 1 : 0;
    }
    return bits;
}

std::vector<std::uint8_t> AnnDistinguisher::detect(int stream, const Snapshot& snapshot) {
    auto it = models_.find(stream);
    if (it == models_.end()) {
        throw std::runtime_error("AnnDistinguisher: no model for stream " + std::to_string(stream));
    }
    return ann_detect(it->second, snapshot);
}

}  // namespace lidal
