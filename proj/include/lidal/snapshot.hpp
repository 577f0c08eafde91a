#pragma once

#include <vector>

#include "lidal/channel.hpp"

namespace lidal {

enum class SnapshotKind { mimo_scan, miso_group };

/// One listening interval's sampled reflection signal: a single waveform for
/// a MIMO transceiver scan, or one waveform per pixel of an imaging-receiver
/// group.
struct Snapshot {
    SnapshotKind kind = SnapshotKind::mimo_scan;
    int receiver_id = 0;   // receiving unit (MIMO) or group index (MISO)
    int emitter_id = 0;    // transmitting unit
    std::vector<Waveform> waveforms;
    double timestamp = 0.0;
};

}  // namespace lidal
