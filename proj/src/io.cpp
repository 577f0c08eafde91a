#include "lidal/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lidal {

namespace {

using nlohmann::json;

Vec2 vec2_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Vec3 vec3_from(const json& j) {
    Vec3 v{j.at(0).get<double>(), j.at(1).get<double>(), 0.0};
    if (j.size() > 2) v.z = j.at(2).get<double>();
    return v;
}

ObstacleKind kind_from(const std::string& name) {
    if (name == "desk") return ObstacleKind::desk;
    if (name == "bookshelf") return ObstacleKind::bookshelf;
    if (name == "custom") return ObstacleKind::custom;
    throw std::invalid_argument("scenario: unknown obstacle kind '" + name + "'");
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
    const json doc = json::parse(text);
    Scenario scenario;

    scenario.scene.seed = doc.value("seed", std::uint64_t{1});
    scenario.scene.patch_size = doc.value("patch_size", 0.10);
    scenario.scene.target_count = doc.value("targets", 0);
    scenario.scene.default_furniture = doc.value("default_furniture", true);

    if (doc.contains("room")) {
        const auto& room = doc["room"];
        scenario.scene.room.length = room.value("length", 8.0);
        scenario.scene.room.width = room.value("width", 4.0);
        scenario.scene.room.height = room.value("height", 3.0);
        scenario.scene.room.rho_walls = room.value("rho_walls", 0.8);
        scenario.scene.room.rho_floor = room.value("rho_floor", 0.3);
        scenario.scene.room.rho_ceiling = room.value("rho_ceiling", 0.8);
    }

    if (doc.contains("obstacles")) {
        for (const auto& entry : doc["obstacles"]) {
            Obstacle obstacle;
            obstacle.kind = kind_from(entry.value("kind", std::string("custom")));
            if (obstacle.kind == ObstacleKind::desk) {
                obstacle = make_desk({0, 0});
            } else if (obstacle.kind == ObstacleKind::bookshelf) {
                obstacle = make_bookshelf({0, 0});
            }
            const Vec3 center = vec3_from(entry.at("center"));
            obstacle.base_center = center;
            if (entry.contains("dims")) obstacle.dims = vec3_from(entry["dims"]);
            obstacle.reflectivity = entry.value("reflectivity", obstacle.reflectivity);
            obstacle.movable = entry.value("movable", false);
            obstacle.displaced_center =
                entry.contains("path_end") ? vec2_from(entry["path_end"]) : center.xy();
            scenario.scene.obstacles.push_back(obstacle);
        }
    }

    if (doc.contains("mobility")) {
        const auto& mob = doc["mobility"];
        scenario.mobility.speed = mob.value("speed", 0.5);
        scenario.mobility.rate_hz = mob.value("rate_hz", 5.0);
        scenario.mobility.heading_jitter_deg = mob.value("heading_jitter_deg", 15.0);
        if (mob.contains("dwell_s")) {
            scenario.mobility.dwell_min_s = mob["dwell_s"].at(0).get<double>();
            scenario.mobility.dwell_max_s = mob["dwell_s"].at(1).get<double>();
        }
        if (mob.contains("waypoints")) {
            for (const auto& wp : mob["waypoints"]) scenario.waypoints.push_back(vec2_from(wp));
        }
    }

    scenario.noise.bandwidth_hz = doc.value("noise_bandwidth_hz", 5e8);

    if (doc.contains("single_unit")) {
        const auto& unit = doc["single_unit"];
        scenario.single_unit_position = vec3_from(unit.at("position"));
        if (unit.contains("acceptance_deg")) {
            scenario.single_unit_acceptance_deg = unit["acceptance_deg"].get<double>();
        }
    }
    return scenario;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return scenario_from_json_text(text.str());
}

std::vector<TransceiverUnit> scenario_units(const Scenario& scenario) {
    if (scenario.single_unit_position) {
        TransceiverUnit unit = make_transceiver(0, *scenario.single_unit_position);
        if (scenario.single_unit_acceptance_deg) {
            auto& cpc = std::get<CpcOptics>(unit.detector.optics);
            cpc.acceptance_semi_angle_deg = *scenario.single_unit_acceptance_deg;
        }
        return {unit};
    }
    return default_mimo_units(scenario.scene.room);
}

Pathway scenario_pathway(const Scenario& scenario, const Scene& scene) {
    if (scenario.waypoints.empty()) return default_pathway(scene, scenario.mobility);
    Pathway pathway;
    for (const auto& wp : scenario.waypoints) {
        if (!position_feasible(scene, wp, scenario.mobility.clearance)) {
            throw std::invalid_argument("scenario: waypoint collides with the scene");
        }
        pathway.waypoints.push_back(wp);
    }
    if (pathway.waypoints.size() < 2) {
        throw std::invalid_argument("scenario: need at least two waypoints");
    }
    return pathway;
}

// ---------------------------------------------------------------------------
// Model bundles

namespace {

constexpr char kModelMagic[8] = {'L', 'D', 'A', 'L', 'M', 'D', 'L', '1'};

void write_bytes(FILE* f, const void* data, std::size_t size) {
    if (std::fwrite(data, 1, size, f) != size) throw std::runtime_error("model write failed");
}

void read_bytes(FILE* f, void* data, std::size_t size) {
    if (std::fread(data, 1, size, f) != size) throw std::runtime_error("model read failed");
}

void write_i32(FILE* f, std::int32_t v) { write_bytes(f, &v, sizeof v); }
void write_f64(FILE* f, double v) { write_bytes(f, &v, sizeof v); }

std::int32_t read_i32(FILE* f) {
    std::int32_t v;
    read_bytes(f, &v, sizeof v);
    return v;
}
double read_f64(FILE* f) {
    double v;
    read_bytes(f, &v, sizeof v);
    return v;
}

void write_matrix(FILE* f, const Eigen::MatrixXd& m) {
    write_bytes(f, m.data(), sizeof(double) * m.size());
}
void read_matrix(FILE* f, Eigen::MatrixXd& m) {
    read_bytes(f, m.data(), sizeof(double) * m.size());
}

}  // namespace

void save_models(const std::string& path, const std::map<int, AnnModel>& models) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open model file for writing: " + path);
    try {
        write_bytes(f, kModelMagic, sizeof kModelMagic);
        write_i32(f, 1);  // version
        write_i32(f, static_cast<std::int32_t>(models.size()));
        for (const auto& [stream, model] : models) {
            write_i32(f, stream);
            write_i32(f, model.kind == SnapshotKind::mimo_scan ? 0 : 1);
            write_i32(f, model.mlp.n_in);
            write_i32(f, model.mlp.n_hidden);
            write_i32(f, model.mlp.n_out);
            write_f64(f, model.input_scale);
            write_f64(f, model.output_threshold);
            write_matrix(f, model.mlp.w_in);
            write_bytes(f, model.mlp.bias_hidden.data(),
                        sizeof(double) * model.mlp.bias_hidden.size());
            write_matrix(f, model.mlp.w_out);
            write_bytes(f, model.mlp.bias_out.data(), sizeof(double) * model.mlp.bias_out.size());
        }
    } catch (...) {
        std::fclose(f);
        throw;
    }
    std::fclose(f);
}

std::map<int, AnnModel> load_models(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open model file: " + path);
    std::map<int, AnnModel> models;
    try {
        char magic[8];
        read_bytes(f, magic, sizeof magic);
        if (std::memcmp(magic, kModelMagic, sizeof magic) != 0) {
            throw std::runtime_error("not a model bundle: " + path);
        }
        const auto version = read_i32(f);
        if (version != 1) throw std::runtime_error("unsupported model bundle version");
        const auto count = read_i32(f);
        for (std::int32_t entry = 0; entry < count; ++entry) {
            const int stream = read_i32(f);
            AnnModel model;
            model.kind = read_i32(f) == 0 ? SnapshotKind::mimo_scan : SnapshotKind::miso_group;
            const int n_in = read_i32(f);
            const int n_hidden = read_i32(f);
            const int n_out = read_i32(f);
            model.input_scale = read_f64(f);
            model.output_threshold = read_f64(f);
            model.mlp = make_mlp(n_in, n_hidden, n_out);
            read_matrix(f, model.mlp.w_in);
            read_bytes(f, model.mlp.bias_hidden.data(), sizeof(double) * n_hidden);
            read_matrix(f, model.mlp.w_out);
            read_bytes(f, model.mlp.bias_out.data(), sizeof(double) * n_out);
            models.emplace(stream, std::move(model));
        }
    } catch (...) {
        std::fclose(f);
        throw;
    }
    std::fclose(f);
    return models;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_value(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.12g", v);
    return buffer;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : columns_(header.size()) {
    file_ = std::fopen(path.c_str(), "wb");
    if (!file_) throw std::runtime_error("cannot open csv for writing: " + path);
    row(header);
}

CsvWriter::~CsvWriter() {
    if (file_) std::fclose(file_);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::invalid_argument("csv row width mismatch");
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    line += '\n';
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size()) {
        throw std::runtime_error("csv write failed");
    }
}

void write_waveform_csv(const std::string& path, const Waveform& waveform) {
    CsvWriter csv(path, {"time_s", "current_a"});
    for (std::size_t i = 0; i < waveform.samples.size(); ++i) {
        csv.row({format_value(i * waveform.sample_period), format_value(waveform.samples[i])});
    }
}

void write_impulse_csv(const std::string& path, const ImpulseResponse& ir) {
    CsvWriter csv(path, {"time_s", "power_w"});
    for (std::size_t b = 0; b < ir.bins.size(); ++b) {
        if (ir.bins[b] == 0.0) continue;  // sparse dump
        csv.row({format_value(ir.origin_time + b * ir.bin_duration), format_value(ir.bins[b])});
    }
}

void write_training_report_csv(const std::string& path, const TrainingReport& report) {
    CsvWriter csv(path, {"beta", "epoch", "train_mse", "val_mse", "mu"});
    for (const auto& r : report.epochs) {
        csv.row({format_value(r.beta), std::to_string(r.epoch), format_value(r.train_mse),
                 format_value(r.val_mse), format_value(r.mu)});
    }
}

void write_detection_report_csv(const std::string& path,
                                const std::vector<DetectionReport>& reports) {
    CsvWriter csv(path, {"seed", "timestamp", "count", "positions", "residuals"});
    for (const auto& report : reports) {
        std::string positions;
        for (std::size_t i = 0; i < report.positions.size(); ++i) {
            if (i) positions += ';';
            positions += format_value(report.positions[i].x) + ":" +
                         format_value(report.positions[i].y);
        }
        std::string residuals;
        for (std::size_t i = 0; i < report.residuals.size(); ++i) {
            if (i) residuals += ';';
            residuals += format_value(report.residuals[i]);
        }
        csv.row({std::to_string(report.seed), format_value(report.timestamp),
                 std::to_string(report.count), positions, residuals});
    }
}

}  // namespace lidal
