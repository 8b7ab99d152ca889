#include "egotop/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "egotop/errors.hpp"

namespace egotop {

namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const fs::path& file, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(file, mode);
    if (!in) throw IoError("cannot open " + file.string() + " for reading");
    return in;
}

std::ofstream open_out(const fs::path& file, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(file, mode | std::ios::trunc);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    return out;
}

void close_out(std::ofstream& out, const fs::path& file) {
    out.close();
    if (!out) throw IoError("failed writing " + file.string());
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double to_double(std::string_view s, const fs::path& file, std::size_t line_no) {
    s = trim(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw InvalidInput(file.string() + ":" + std::to_string(line_no) + ": not a number: '" + std::string(s) + "'");
    return v;
}

std::size_t to_index(std::string_view s, const fs::path& file, std::size_t line_no) {
    s = trim(s);
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw InvalidInput(file.string() + ":" + std::to_string(line_no) + ": not a frame index: '" + std::string(s) + "'");
    return v;
}

// Calls fn(fields, line_no) for every data row, skipping the header and blank lines.
template <class Fn>
void for_each_row(const fs::path& file, std::size_t expected_fields, Fn&& fn) {
    auto in = open_in(file);
    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != expected_fields)
            throw InvalidInput(file.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(expected_fields) + " fields");
        fn(fields, line_no);
    }
    if (in.bad()) throw IoError("failed reading " + file.string());
}

fs::path sidecar(const fs::path& file) { return fs::path(file.string() + ".json"); }

}  // namespace

void GroundTruth::validate() const {
    std::set<std::string> egos, viewers;
    for (const auto& [e, v] : assignment) {
        if (!egos.insert(e).second) throw InvalidInput("ground truth lists ego video " + e + " twice");
        if (!viewers.insert(v).second) throw InvalidInput("ground truth assigns viewer " + v + " twice");
    }
    if (delays.size() != assignment.size()) throw InvalidInput("ground truth needs one delay per ego video");
}

void write_trajectories_csv(const fs::path& file, std::span<const Trajectory> trajectories) {
    auto out = open_out(file);
    out << "frame,viewer_id,x,y\n";
    const std::size_t T = trajectories.empty() ? 0 : trajectories.front().frames();
    for (std::size_t t = 0; t < T; ++t)
        for (const auto& tr : trajectories)
            out << t << ',' << tr.viewer_id << ',' << fmt(tr.positions[t].x()) << ',' << fmt(tr.positions[t].y()) << '\n';
    close_out(out, file);
}

std::vector<Trajectory> read_trajectories_csv(const fs::path& file, double frame_rate) {
    std::vector<std::string> order;
    std::map<std::string, std::map<std::size_t, Point2>> rows;
    for_each_row(file, 4, [&](const auto& f, std::size_t line_no) {
        const std::size_t t = to_index(f[0], file, line_no);
        const std::string id(trim(f[1]));
        if (!rows.count(id)) order.push_back(id);
        auto& track = rows[id];
        if (!track.emplace(t, Point2(to_double(f[2], file, line_no), to_double(f[3], file, line_no))).second)
            throw InvalidInput(file.string() + ":" + std::to_string(line_no) + ": duplicate frame for " + id);
    });
    std::vector<Trajectory> out;
    for (const auto& id : order) {
        const auto& track = rows[id];
        Trajectory tr{id, {}, frame_rate};
        std::size_t expect = 0;
        for (const auto& [t, p] : track) {
            if (t != expect++) throw InvalidInput(file.string() + ": viewer " + id + " is missing frames");
            tr.positions.push_back(p);
        }
        out.push_back(std::move(tr));
    }
    return out;
}

void write_descriptors(const fs::path& file, const Eigen::MatrixXd& descriptors, const DescriptorMeta& meta) {
    if (meta.format == DescriptorFormat::Csv) {
        auto out = open_out(file);
        for (Eigen::Index r = 0; r < descriptors.rows(); ++r) {
            for (Eigen::Index c = 0; c < descriptors.cols(); ++c) {
                if (c) out << ',';
                out << fmt(descriptors(r, c));
            }
            out << '\n';
        }
        close_out(out, file);
    } else {
        auto out = open_out(file, std::ios::binary);
        // Row-major doubles in host byte order.
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = descriptors;
        out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
        close_out(out, file);
    }
    Json j;
    j["video_id"] = meta.video_id;
    j["frame_rate"] = meta.frame_rate;
    j["rows"] = descriptors.rows();
    j["cols"] = descriptors.cols();
    j["format"] = meta.format == DescriptorFormat::Csv ? "csv" : "binary";
    write_json(sidecar(file), j);
}

std::pair<Eigen::MatrixXd, DescriptorMeta> read_descriptors(const fs::path& file) {
    const Json j = read_json(sidecar(file));
    DescriptorMeta meta;
    Eigen::Index rows = 0, cols = 0;
    try {
        meta.video_id = j.at("video_id").get<std::string>();
        meta.frame_rate = j.at("frame_rate").get<double>();
        rows = j.at("rows").get<Eigen::Index>();
        cols = j.at("cols").get<Eigen::Index>();
        const auto format = j.value("format", std::string("csv"));
        if (format == "csv") meta.format = DescriptorFormat::Csv;
        else if (format == "binary") meta.format = DescriptorFormat::Binary;
        else throw InvalidInput("unknown descriptor format " + format);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(sidecar(file).string() + ": " + e.what());
    }
    if (rows < 0 || cols < 1) throw InvalidInput(sidecar(file).string() + ": bad descriptor shape");

    Eigen::MatrixXd m(rows, cols);
    if (meta.format == DescriptorFormat::Binary) {
        auto in = open_in(file, std::ios::binary);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
        in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(rm.size() * sizeof(double)))
            throw InvalidInput(file.string() + ": truncated descriptor file");
        m = rm;
    } else {
        auto in = open_in(file);
        std::string line;
        Eigen::Index r = 0;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            const auto f = split(line);
            if (r >= rows || static_cast<Eigen::Index>(f.size()) != cols)
                throw InvalidInput(file.string() + ":" + std::to_string(line_no) + ": shape disagrees with sidecar");
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = to_double(f[static_cast<std::size_t>(c)], file, line_no);
            ++r;
        }
        if (r != rows) throw InvalidInput(file.string() + ": expected " + std::to_string(rows) + " rows");
    }
    return {std::move(m), meta};
}

void write_counts_csv(const fs::path& file, const Eigen::VectorXd& counts) {
    auto out = open_out(file);
    out << "frame,count\n";
    for (Eigen::Index t = 0; t < counts.size(); ++t) out << t << ',' << fmt(counts(t)) << '\n';
    close_out(out, file);
}

Eigen::VectorXd read_counts_csv(const fs::path& file) {
    std::map<std::size_t, double> rows;
    for_each_row(file, 2, [&](const auto& f, std::size_t line_no) {
        if (!rows.emplace(to_index(f[0], file, line_no), to_double(f[1], file, line_no)).second)
            throw InvalidInput(file.string() + ":" + std::to_string(line_no) + ": duplicate frame");
    });
    Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
    Eigen::Index expect = 0;
    for (const auto& [t, c] : rows) {
        if (static_cast<Eigen::Index>(t) != expect) throw InvalidInput(file.string() + ": missing frames");
        v(expect++) = c;
    }
    return v;
}

std::vector<DetectionRecord> read_detections_csv(const fs::path& file) {
    std::vector<DetectionRecord> out;
    for_each_row(file, 3, [&](const auto& f, std::size_t line_no) {
        out.push_back({to_index(f[0], file, line_no), to_double(f[1], file, line_no), to_double(f[2], file, line_no)});
    });
    return out;
}

void write_truth_json(const fs::path& file, const GroundTruth& truth) {
    truth.validate();
    Json j;
    j["assignment"] = Json::object();
    j["delays"] = Json::object();
    for (std::size_t k = 0; k < truth.assignment.size(); ++k) {
        j["assignment"][truth.assignment[k].first] = truth.assignment[k].second;
        j["delays"][truth.assignment[k].first] = truth.delays[k];
    }
    j["config"] = truth.config;
    write_json(file, j);
}

GroundTruth read_truth_json(const fs::path& file) {
    const Json j = read_json(file);
    GroundTruth g;
    try {
        for (const auto& [ego, viewer] : j.at("assignment").items()) {
            g.assignment.emplace_back(ego, viewer.get<std::string>());
            g.delays.push_back(j.contains("delays") ? j["delays"].value(ego, 0) : 0);
        }
        if (j.contains("config")) g.config = j["config"];
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(file.string() + ": " + e.what());
    }
    g.validate();
    return g;
}

Json scenario_config_to_json(const ScenarioConfig& c) {
    Json j;
    j["n_top"] = c.n_top;
    j["n_ego"] = c.n_ego;
    j["duration_frames"] = c.duration_frames;
    j["frame_rate"] = c.frame_rate;
    j["true_delays"] = c.true_delays;
    j["descriptor_noise_sigma"] = c.descriptor_noise_sigma;
    j["count_noise_rate"] = c.count_noise_rate;
    j["waypoint_count"] = c.waypoint_count;
    j["speed_min"] = c.speed_min;
    j["speed_max"] = c.speed_max;
    j["turn_rate_deg"] = c.turn_rate_deg;
    j["intruders"] = c.intruders == IntruderPolicy::Walk ? "walk" : "loiter";
    j["arena_width"] = c.arena_width;
    j["arena_height"] = c.arena_height;
    j["landmark_margin"] = c.landmark_margin;
    j["n_landmarks"] = c.n_landmarks;
    j["descriptor_dim"] = c.descriptor_dim;
    j["half_angle_deg"] = c.half_angle_deg;
    j["range_m"] = c.range();
    j["seed"] = c.seed;
    return j;
}

ScenarioConfig scenario_config_from_json(const Json& j) {
    ScenarioConfig c;
    try {
        c.n_top = j.value("n_top", c.n_top);
        c.n_ego = j.value("n_ego", c.n_ego);
        c.duration_frames = j.value("duration_frames", c.duration_frames);
        c.frame_rate = j.value("frame_rate", c.frame_rate);
        c.true_delays = j.value("true_delays", c.true_delays);
        c.descriptor_noise_sigma = j.value("descriptor_noise_sigma", c.descriptor_noise_sigma);
        c.count_noise_rate = j.value("count_noise_rate", c.count_noise_rate);
        c.waypoint_count = j.value("waypoint_count", c.waypoint_count);
        c.speed_min = j.value("speed_min", c.speed_min);
        c.speed_max = j.value("speed_max", c.speed_max);
        c.turn_rate_deg = j.value("turn_rate_deg", c.turn_rate_deg);
        const auto intr = j.value("intruders", std::string("walk"));
        if (intr == "walk") c.intruders = IntruderPolicy::Walk;
        else if (intr == "loiter") c.intruders = IntruderPolicy::Loiter;
        else throw InvalidInput("unknown intruder policy " + intr);
        c.arena_width = j.value("arena_width", c.arena_width);
        c.arena_height = j.value("arena_height", c.arena_height);
        c.landmark_margin = j.value("landmark_margin", c.landmark_margin);
        c.n_landmarks = j.value("n_landmarks", c.n_landmarks);
        c.descriptor_dim = j.value("descriptor_dim", c.descriptor_dim);
        c.half_angle_deg = j.value("half_angle_deg", c.half_angle_deg);
        if (j.contains("range_m")) c.range_m = j["range_m"].get<double>();
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("scenario config: ") + e.what());
    }
    return c;
}

void write_json(const fs::path& file, const Json& j) { write_text(file, j.dump(2) + "\n"); }

Json read_json(const fs::path& file) {
    auto in = open_in(file);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInput(file.string() + ": " + e.what());
    }
}

void write_text(const fs::path& file, const std::string& text) {
    auto out = open_out(file, std::ios::binary);
    out << text;
    close_out(out, file);
}

LoadedScenario load_scenario(const fs::path& dir, const FeatureConfig& fcfg) {
    if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
    LoadedScenario s;
    s.dir = dir;
    if (fs::exists(dir / "config.json")) s.config = scenario_config_from_json(read_json(dir / "config.json"));
    s.trajectories = read_trajectories_csv(dir / "topview.csv", s.config.frame_rate);

    for (std::size_t k = 0;; ++k) {
        const auto id = ego_video_id(k);
        const auto desc = dir / (id + ".desc");
        if (!fs::exists(desc)) break;
        auto [m, meta] = read_descriptors(desc);
        EgoVideo v;
        v.video_id = meta.video_id.empty() ? id : meta.video_id;
        v.frame_rate = meta.frame_rate;
        v.descriptors = std::move(m);
        const auto counts = dir / (id + ".counts.csv");
        const auto dets = dir / (id + ".detections.csv");
        if (fs::exists(counts)) {
            v.counts = read_counts_csv(counts);
        } else if (fs::exists(dets)) {
            const auto rows = read_detections_csv(dets);
            v.counts = ingest_detections(rows, static_cast<std::size_t>(v.descriptors.rows()), fcfg);
        } else {
            throw IoError("no counts or detections for " + id);
        }
        if (v.counts.size() != v.descriptors.rows())
            throw MismatchedLengths(id + ": counts and descriptors disagree on frame count");
        s.ego.push_back(std::move(v));
    }
    if (s.ego.empty()) throw IoError(dir.string() + " holds no ego_<k>.desc files");

    if (fs::exists(dir / "truth.json")) {
        const auto g = read_truth_json(dir / "truth.json");
        std::map<std::string, std::size_t> viewer_index;
        for (std::size_t v = 0; v < s.trajectories.size(); ++v) viewer_index[s.trajectories[v].viewer_id] = v;
        s.truth.assign(s.ego.size(), 0);
        s.delays.assign(s.ego.size(), 0);
        std::vector<char> seen(s.ego.size(), 0);
        for (std::size_t a = 0; a < g.assignment.size(); ++a) {
            const auto& [e, v] = g.assignment[a];
            std::size_t k = s.ego.size();
            for (std::size_t q = 0; q < s.ego.size(); ++q)
                if (s.ego[q].video_id == e) k = q;
            if (k == s.ego.size()) throw InvalidInput("truth.json names unknown ego video " + e);
            const auto it = viewer_index.find(v);
            if (it == viewer_index.end()) throw InvalidInput("truth.json names unknown viewer " + v);
            s.truth[k] = it->second;
            s.delays[k] = g.delays[a];
            seen[k] = 1;
        }
        for (char c : seen)
            if (!c) throw InvalidInput("truth.json does not cover every ego video");
    }
    s.config.n_top = s.trajectories.size();
    s.config.n_ego = s.ego.size();
    return s;
}

LoadedScenario as_loaded(const Scenario& s) {
    LoadedScenario l;
    l.config = s.config;
    l.trajectories = s.trajectories;
    l.ego = s.ego;
    l.truth = s.truth;
    l.delays = s.delays;
    return l;
}

}  // namespace egotop
