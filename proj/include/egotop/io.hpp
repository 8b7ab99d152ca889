#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "egotop/features.hpp"
#include "egotop/geometry.hpp"
#include "egotop/simulator.hpp"

namespace egotop {

using Json = nlohmann::ordered_json;

enum class DescriptorFormat { Csv, Binary };

/// Sidecar `<file>.json` next to every descriptor file.
struct DescriptorMeta {
    std::string video_id;
    double frame_rate = 10.0;
    DescriptorFormat format = DescriptorFormat::Csv;
};

struct GroundTruth {
    std::vector<std::pair<std::string, std::string>> assignment;  // ego video id -> viewer id
    std::vector<int> delays;                                       // per entry of `assignment`
    Json config;

    /// Throws InvalidInput unless every ego and every viewer appears at most once.
    void validate() const;
};

// topview.csv: frame,viewer_id,x,y
void write_trajectories_csv(const std::filesystem::path& file, std::span<const Trajectory> trajectories);
/// Viewers in order of first appearance; every viewer must cover frames 0..T-1 exactly once.
std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& file, double frame_rate);

void write_descriptors(const std::filesystem::path& file, const Eigen::MatrixXd& descriptors, const DescriptorMeta& meta);
std::pair<Eigen::MatrixXd, DescriptorMeta> read_descriptors(const std::filesystem::path& file);

// <video>.counts.csv: frame,count
void write_counts_csv(const std::filesystem::path& file, const Eigen::VectorXd& counts);
Eigen::VectorXd read_counts_csv(const std::filesystem::path& file);

// <video>.detections.csv: frame,score,box_height_fraction
std::vector<DetectionRecord> read_detections_csv(const std::filesystem::path& file);

void write_truth_json(const std::filesystem::path& file, const GroundTruth& truth);
GroundTruth read_truth_json(const std::filesystem::path& file);

Json scenario_config_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_config_from_json(const Json& j);

void write_json(const std::filesystem::path& file, const Json& j);
Json read_json(const std::filesystem::path& file);
void write_text(const std::filesystem::path& file, const std::string& text);

/// A scenario directory as read back from disk.
struct LoadedScenario {
    std::filesystem::path dir;
    ScenarioConfig config;
    std::vector<Trajectory> trajectories;
    std::vector<EgoVideo> ego;
    std::vector<std::size_t> truth;  // per ego video, index into trajectories; empty without truth.json
    std::vector<int> delays;
};

/// Reads topview.csv, every ego_<k>.desc (counts from ego_<k>.counts.csv, or from
/// ego_<k>.detections.csv when no counts file exists), and truth.json / config.json if present.
LoadedScenario load_scenario(const std::filesystem::path& dir, const FeatureConfig& fcfg = {});

/// Same content as a generated scenario, without the world.
LoadedScenario as_loaded(const Scenario& s);

}  // namespace egotop
