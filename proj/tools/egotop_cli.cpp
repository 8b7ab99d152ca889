#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "egotop/errors.hpp"
#include "egotop/eval.hpp"
#include "egotop/io.hpp"
#include "egotop/report.hpp"
#include "egotop/simulator.hpp"

namespace fs = std::filesystem;
using namespace egotop;

namespace {

struct Common {
    std::string method = "score";
    std::string init = "median";
    double alpha = 0.9;
    double gamma = 0.5;
    double theta_d = 30.0;
    std::uint64_t seed = 1;
    std::string out = "out";

    PipelineConfig pipeline() const {
        PipelineConfig c;
        c.method = parse_method(method);
        c.init = parse_init(init);
        c.features.alpha = alpha;
        c.features.gamma = gamma;
        c.geometry.half_angle_deg = theta_d;
        return c;
    }
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--method", c.method, "free | spectral | score")->check(CLI::IsMember({"free", "spectral", "score"}));
    app->add_option("--init", c.init, "zero | median")->check(CLI::IsMember({"zero", "median"}));
    app->add_option("--alpha", c.alpha, "weight of the 2D node term")->check(CLI::Range(0.0, 1.0));
    app->add_option("--gamma", c.gamma, "descriptor similarity decay")->check(CLI::PositiveNumber);
    app->add_option("--theta-d", c.theta_d, "cone half-angle in degrees")->check(CLI::Range(0.0, 90.0));
    app->add_option("--seed", c.seed, "random seed");
    app->add_option("--out", c.out, "output directory");
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Json header(const std::string& command, const Common& c) {
    Json j;
    j["command"] = command;
    j["method"] = label(parse_method(c.method));
    j["init"] = label(parse_init(c.init));
    j["seed"] = c.seed;
    return j;
}

void finish(Json report, const Stopwatch& sw, const fs::path& out) {
    report["timing"] = Json{{"seconds", sw.seconds()}};
    write_json(out / "report.json", report);
    std::cout << (out / "report.json").string() << '\n';
}

struct SimulateArgs {
    std::size_t count = 1;
    std::size_t n_top = 6;
    std::size_t n_ego = 6;
    std::size_t frames = 400;
    double fps = 10.0;
    int max_delay = 0;
    double noise = 0.0;
    double count_noise = 0.0;
    std::string intruders = "walk";
};

int run_simulate(const Common& c, const SimulateArgs& a) {
    Stopwatch sw;
    const fs::path out(c.out);
    fs::create_directories(out);
    std::mt19937_64 rng(c.seed);
    std::uniform_int_distribution<int> delay(-a.max_delay, a.max_delay);
    Json report = header("simulate", c);
    report["scenarios"] = Json::array();
    for (std::size_t s = 0; s < a.count; ++s) {
        ScenarioConfig cfg;
        cfg.n_top = a.n_top;
        cfg.n_ego = a.n_ego;
        cfg.duration_frames = a.frames;
        cfg.frame_rate = a.fps;
        cfg.descriptor_noise_sigma = a.noise;
        cfg.count_noise_rate = a.count_noise;
        cfg.half_angle_deg = c.theta_d;
        cfg.intruders = a.intruders == "loiter" ? IntruderPolicy::Loiter : IntruderPolicy::Walk;
        cfg.seed = c.seed * 1000003ULL + s;
        cfg.true_delays.resize(a.n_ego);
        for (auto& d : cfg.true_delays) d = a.max_delay > 0 ? delay(rng) : 0;
        char name[32];
        std::snprintf(name, sizeof name, "scene_%03zu", s);
        emit(generate(cfg), out / name);
        report["scenarios"].push_back(Json{{"dir", name}, {"seed", cfg.seed}, {"delays", cfg.true_delays}});
    }
    finish(report, sw, out);
    return 0;
}

int run_match(const Common& c, const std::string& dir) {
    Stopwatch sw;
    const auto cfg = c.pipeline();
    const auto s = load_scenario(dir, cfg.features);
    const auto g = build_graphs(s, cfg);
    const auto r = run_pipeline(make_bank(g, cfg), cfg);
    const fs::path out(c.out);
    fs::create_directories(out);
    Json report = header("match", c);
    report["scenario"] = fs::path(dir).filename().string();
    report["result"] = match_report(g, r, s.truth, cfg);
    if (!s.truth.empty()) write_text(out / "viewer_cmc.csv", cmc_csv(viewer_cmc(r.soft, s.truth)));
    finish(report, sw, out);
    return 0;
}

int run_rank(const Common& c, const std::string& ego_dir, const std::vector<std::string>& candidates,
             std::optional<std::size_t> truth) {
    Stopwatch sw;
    const auto cfg = c.pipeline();
    const auto ego_scene = load_scenario(ego_dir, cfg.features);
    const auto ego = build_ego_graph(ego_scene.ego, cfg.features);
    std::vector<ViewGraph> tops;
    for (const auto& d : candidates) tops.push_back(build_top_graph(load_scenario(d, cfg.features), cfg));
    const auto ranking = rank_topviews(ego, tops, cfg, truth);
    const fs::path out(c.out);
    fs::create_directories(out);
    Json report = header("rank", c);
    report["ego"] = fs::path(ego_dir).filename().string();
    report["candidates"] = Json::array();
    for (const auto& d : candidates) report["candidates"].push_back(fs::path(d).filename().string());
    report["ranking"] = to_json(ranking);
    write_text(out / "ranking.csv", ranking_csv(ranking));
    finish(report, sw, out);
    return 0;
}

int run_sweep_completeness(const Common& c, const std::vector<std::string>& dirs) {
    Stopwatch sw;
    const auto cfg = c.pipeline();
    std::vector<LoadedScenario> scenes;
    std::vector<AffinityBank> banks;
    for (const auto& d : dirs) {
        scenes.push_back(load_scenario(d, cfg.features));
        if (scenes.back().truth.empty()) throw InvalidInput(d + " has no truth.json");
        banks.push_back(make_bank(build_graphs(scenes.back(), cfg), cfg));
    }
    std::vector<EvalScene> eval;
    for (std::size_t i = 0; i < scenes.size(); ++i) eval.push_back({&banks[i], scenes[i].truth});
    const auto sweep = sweep_completeness(eval, cfg);
    const fs::path out(c.out);
    fs::create_directories(out);
    Json report = header("sweep_completeness", c);
    report["scenarios"] = dirs.size();
    report["completeness"] = to_json(sweep);
    write_text(out / "completeness.csv", completeness_csv(sweep));
    finish(report, sw, out);
    return 0;
}

int run_sweep_length(const Common& c, const std::vector<std::string>& dirs, const std::vector<std::size_t>& lengths) {
    Stopwatch sw;
    const auto cfg = c.pipeline();
    std::vector<LengthRow> mean;
    std::vector<std::size_t> counted(lengths.size(), 0);
    for (std::size_t L : lengths) mean.push_back({L, true, "no scenario reached this length", 0.0});
    Json per = Json::array();
    for (const auto& d : dirs) {
        const auto s = load_scenario(d, cfg.features);
        if (s.truth.empty()) throw InvalidInput(d + " has no truth.json");
        const auto rows = sweep_length(build_graphs(s, cfg), s.truth, cfg, lengths);
        per.push_back(Json{{"scenario", fs::path(d).filename().string()}, {"rows", to_json(rows)}});
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].skipped) continue;
            mean[i].skipped = false;
            mean[i].diagnostic.clear();
            mean[i].accuracy += rows[i].accuracy;
            ++counted[i];
        }
    }
    for (std::size_t i = 0; i < mean.size(); ++i)
        if (counted[i]) mean[i].accuracy /= static_cast<double>(counted[i]);
    const fs::path out(c.out);
    fs::create_directories(out);
    Json report = header("sweep_length", c);
    report["per_scenario"] = per;
    report["mean"] = to_json(mean);
    write_text(out / "length.csv", length_csv(mean));
    finish(report, sw, out);
    return 0;
}

int run_baselines_cmd(const Common& c, const std::vector<std::string>& dirs) {
    Stopwatch sw;
    const auto cfg = c.pipeline();
    Json per = Json::array();
    std::vector<BaselineRow> mean;
    for (std::size_t n = 0; n < dirs.size(); ++n) {
        const auto s = load_scenario(dirs[n], cfg.features);
        if (s.truth.empty()) throw InvalidInput(dirs[n] + " has no truth.json");
        const auto rows = run_baselines(make_bank(build_graphs(s, cfg), cfg), s.truth, cfg, c.seed + n);
        per.push_back(Json{{"scenario", fs::path(dirs[n]).filename().string()}, {"rows", to_json(rows)}});
        if (mean.empty())
            for (const auto& r : rows) mean.push_back({r.name, 0.0, {}});
        for (std::size_t i = 0; i < rows.size(); ++i) mean[i].accuracy += rows[i].accuracy / static_cast<double>(dirs.size());
    }
    const fs::path out(c.out);
    fs::create_directories(out);
    Json report = header("baselines", c);
    report["per_scenario"] = per;
    report["mean"] = to_json(mean);
    write_text(out / "baselines.csv", baselines_csv(mean));
    finish(report, sw, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Match egocentric videos to the viewers of a top-view video"};
    app.require_subcommand(1);
    Common common;

    auto* sim = app.add_subcommand("simulate", "emit a batch of synthetic scenarios");
    SimulateArgs sa;
    add_common(sim, common);
    sim->add_option("--count", sa.count, "number of scenarios")->check(CLI::PositiveNumber);
    sim->add_option("--n-top", sa.n_top, "viewers in the top view");
    sim->add_option("--n-ego", sa.n_ego, "viewers recording egocentric video");
    sim->add_option("--frames", sa.frames, "frames per stream");
    sim->add_option("--fps", sa.fps, "frame rate");
    sim->add_option("--max-delay", sa.max_delay, "true delays drawn uniformly from [-d, d] frames")->check(CLI::NonNegativeNumber);
    sim->add_option("--noise", sa.noise, "descriptor noise sigma")->check(CLI::NonNegativeNumber);
    sim->add_option("--count-noise", sa.count_noise, "count corruption rate")->check(CLI::Range(0.0, 1.0));
    sim->add_option("--intruders", sa.intruders, "walk | loiter")->check(CLI::IsMember({"walk", "loiter"}));

    auto* match = app.add_subcommand("match", "assign the ego videos of one scenario");
    std::string scenario;
    add_common(match, common);
    match->add_option("scenario", scenario, "scenario directory")->required()->check(CLI::ExistingDirectory);

    auto* rank = app.add_subcommand("rank", "rank candidate top views for one ego set");
    std::string ego_dir;
    std::vector<std::string> candidates;
    std::optional<std::size_t> truth;
    add_common(rank, common);
    rank->add_option("--ego", ego_dir, "scenario directory holding the ego videos")->required()->check(CLI::ExistingDirectory);
    rank->add_option("candidates", candidates, "scenario directories holding candidate top views")
        ->required()->check(CLI::ExistingDirectory);
    rank->add_option("--truth", truth, "index of the true candidate");

    auto* sweep = app.add_subcommand("sweep", "accuracy against completeness ratio or video length");
    sweep->require_subcommand(1);
    std::vector<std::string> sweep_dirs;
    auto* comp = sweep->add_subcommand("completeness", "all non-empty ego subsets");
    add_common(comp, common);
    comp->add_option("scenarios", sweep_dirs, "scenario directories")->required()->check(CLI::ExistingDirectory);
    auto* len = sweep->add_subcommand("length", "prefixes of the streams");
    std::vector<std::size_t> lengths{100, 200, 300, 400};
    add_common(len, common);
    len->add_option("scenarios", sweep_dirs, "scenario directories")->required()->check(CLI::ExistingDirectory);
    len->add_option("--lengths", lengths, "prefix lengths in frames");

    auto* base = app.add_subcommand("baselines", "random, unary-only and free-offset baselines");
    std::vector<std::string> base_dirs;
    add_common(base, common);
    base->add_option("scenarios", base_dirs, "scenario directories")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(common, sa);
        if (match->parsed()) return run_match(common, scenario);
        if (rank->parsed()) return run_rank(common, ego_dir, candidates, truth);
        if (comp->parsed()) return run_sweep_completeness(common, sweep_dirs);
        if (len->parsed()) return run_sweep_length(common, sweep_dirs, lengths);
        if (base->parsed()) return run_baselines_cmd(common, base_dirs);
    } catch (const egotop::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
