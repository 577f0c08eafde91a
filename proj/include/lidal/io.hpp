#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lidal/distinguishers.hpp"
#include "lidal/mobility.hpp"
#include "lidal/scene.hpp"
#include "lidal/system.hpp"
#include "lidal/training.hpp"

namespace lidal {

/// Everything a run needs, loadable from one JSON document. Missing keys fall
/// back to the defaults (standard office room, default furniture, Table-style
/// transceiver grid).
struct Scenario {
    SceneConfig scene;
    MobilityParams mobility;
    std::vector<Vec2> waypoints;  // empty => default_pathway
    NoiseParams noise;
    std::optional<Vec3> single_unit_position;      // monostatic setups
    std::optional<double> single_unit_acceptance_deg;
};

Scenario scenario_from_json_text(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Units for the scenario: the single monostatic unit when configured,
/// otherwise the default ceiling grid.
std::vector<TransceiverUnit> scenario_units(const Scenario& scenario);

Pathway scenario_pathway(const Scenario& scenario, const Scene& scene);

// ---------------------------------------------------------------------------
// Model bundles (binary, bit-exact round trip)

void save_models(const std::string& path, const std::map<int, AnnModel>& models);
std::map<int, AnnModel> load_models(const std::string& path);

// ---------------------------------------------------------------------------
// CSV output. All values are printed with fixed "%.*g" formatting so a rerun
// with the same seed produces byte-identical files.

std::string format_value(double v);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<std::string>& cells);

private:
    FILE* file_ = nullptr;
    std::size_t columns_ = 0;
};

void write_waveform_csv(const std::string& path, const Waveform& waveform);
void write_impulse_csv(const std::string& path, const ImpulseResponse& ir);
void write_training_report_csv(const std::string& path, const TrainingReport& report);
void write_detection_report_csv(const std::string& path,
                                const std::vector<DetectionReport>& reports);

}  // namespace lidal
