// dsgen: command-line front end for rasterizing, vectorizing, scoring,
// diffusing and simulating driving scenes.

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "dsg/agent_extractor.hpp"
#include "dsg/ddpm.hpp"
#include "dsg/error.hpp"
#include "dsg/graph_metrics.hpp"
#include "dsg/lane_vectorizer.hpp"
#include "dsg/scenario_io.hpp"
#include "dsg/sim_rollout.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace dsg;

namespace {

enum class Level { Error, Warn, Info, Debug };

Level log_level() {
  const char* env = std::getenv("DSG_LOG_LEVEL");
  if (!env) return Level::Warn;
  const std::string v = env;
  if (v == "error") return Level::Error;
  if (v == "info") return Level::Info;
  if (v == "debug") return Level::Debug;
  return Level::Warn;
}

void log(Level lvl, const std::string& msg) {
  static const Level threshold = log_level();
  if (lvl > threshold) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "dsgen: " << names[static_cast<int>(lvl)] << ": " << msg << "\n";
}

bool is_png(const fs::path& p) {
  auto ext = p.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png";
}

FeatureMap load_raster(const fs::path& p, double range) {
  if (!is_png(p)) return read_raster(p);
  // The PNG carries no scale; derive it from the scene range.
  FeatureMap probe = load_png(p, 1.0);
  return load_png(p, range / probe.width());
}

void save_raster(const FeatureMap& fm, const fs::path& p) {
  if (is_png(p)) {
    render_png(fm, p);
  } else {
    write_raster(fm, p);
  }
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + p.string() + " for writing");
  out << text;
}

nlohmann::ordered_json detection_json(const AgentDetection& d) {
  nlohmann::ordered_json j;
  j["x"] = d.center.x;
  j["y"] = d.center.y;
  j["heading"] = d.heading;
  j["speed"] = d.speed;
  j["length"] = d.length;
  j["width"] = d.width;
  j["pixel_count"] = d.pixel_count;
  j["heading_ambiguous"] = d.heading_ambiguous;
  return j;
}

// Runs job(i) for i in [0, n) on `jobs` threads; the first error is rethrown.
template <class F>
void parallel_for(int n, int jobs, F job) {
  jobs = std::max(1, std::min(jobs, n));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Scenario vectorize_scene(const FeatureMap& fm, double v_max, const VectorizeConfig& vcfg) {
  Scenario s;
  s.range = fm.meters_per_pixel() * fm.width();
  s.v_max = v_max;
  s.lanes = vectorize(fm, vcfg).lanes;
  AgentExtractConfig acfg;
  acfg.v_max = v_max;
  s.agents = to_agents(extract_agents(fm, acfg));
  s.metadata["generator"] = "vectorize";
  return s;
}

// Help and version requests exit 0; any other parse failure prints usage and exits 2.
int usage_error(CLI::App& app, const CLI::ParseError& e) {
  if (app.exit(e) == 0) return 0;
  const CLI::App* failed = &app;
  for (const auto* sub : app.get_subcommands()) failed = sub;
  std::cerr << "\n" << failed->help();
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driving scene generation toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  double range = kDefaultRange;
  double v_max = kDefaultVMax;
  app.add_option("--range", range, "Scene side length in meters, used to scale PNG rasters")->capture_default_str();
  app.add_option("--v-max", v_max, "Speed that saturates the agent channel, m/s")->capture_default_str();

  // rasterize
  auto* cmd_raster = app.add_subcommand("rasterize", "Scenario file -> feature map");
  std::string in_path, out_path, png_path;
  int size = kDefaultResolution;
  int stroke = kDefaultStroke;
  cmd_raster->add_option("scenario", in_path, "Scenario JSON")->required();
  cmd_raster->add_option("-o,--output", out_path, "Raster output (.png for an image)")->required();
  cmd_raster->add_option("--png", png_path, "Also write a PNG preview");
  cmd_raster->add_option("--size", size, "Raster side in pixels")->capture_default_str();
  cmd_raster->add_option("--stroke", stroke, "Lane stroke in pixels")->capture_default_str();

  // vectorize
  auto* cmd_vec = app.add_subcommand("vectorize", "Feature map -> scenario file");
  double k_thresh = VectorizeConfig{}.k_thresh;
  cmd_vec->add_option("raster", in_path, "Raster (.dsgf binary or .png)")->required();
  cmd_vec->add_option("-o,--output", out_path, "Scenario JSON output")->required();
  cmd_vec->add_option("--k-thresh", k_thresh, "Max curvature of intersection curves, 1/m")->capture_default_str();

  // extract-agents
  auto* cmd_agents = app.add_subcommand("extract-agents", "Decode agent boxes from a feature map");
  cmd_agents->add_option("raster", in_path, "Raster (.dsgf binary or .png)")->required();
  cmd_agents->add_option("-o,--output", out_path, "Write JSON here instead of stdout");

  // eval
  auto* cmd_eval = app.add_subcommand("eval", "Score a predicted lane graph against ground truth");
  std::string pred_path;
  EvalConfig ecfg;
  bool as_json = false;
  cmd_eval->add_option("gt", in_path, "Ground-truth scenario")->required();
  cmd_eval->add_option("pred", pred_path, "Predicted scenario")->required();
  cmd_eval->add_option("--threshold", ecfg.threshold, "Vertex match distance, m")->capture_default_str();
  cmd_eval->add_option("--interp", ecfg.interpolation, "Interpolation spacing, m")->capture_default_str();
  cmd_eval->add_option("--radius", ecfg.subgraph_radius, "TOPO subgraph radius, m")->capture_default_str();
  cmd_eval->add_flag("--json", as_json, "Print JSON");

  // noise
  auto* cmd_noise = app.add_subcommand("noise", "Forward-diffuse a raster to step t");
  int step = 500;
  std::uint64_t seed = 0;
  int steps = kDefaultSteps;
  cmd_noise->add_option("raster", in_path, "Input raster")->required();
  cmd_noise->add_option("--t", step, "Diffusion step")->capture_default_str();
  cmd_noise->add_option("--seed", seed, "RNG seed")->capture_default_str();
  cmd_noise->add_option("--steps", steps, "Schedule length T")->capture_default_str();
  cmd_noise->add_option("-o,--output", out_path, "Raster output")->required();

  // sample
  auto* cmd_sample = app.add_subcommand("sample", "Reverse-diffuse from pure noise");
  std::string denoiser_name = "zero";
  std::string reference;
  bool no_clamp = false;
  cmd_sample->add_option("--shape", size, "Raster side in pixels")->capture_default_str();
  cmd_sample->add_option("--denoiser", denoiser_name, "Noise predictor")
      ->check(CLI::IsMember({"oracle", "zero", "blur"}))
      ->capture_default_str();
  cmd_sample->add_option("--reference", reference, "Target raster for the oracle denoiser");
  cmd_sample->add_option("--seed", seed, "RNG seed")->capture_default_str();
  cmd_sample->add_option("--steps", steps, "Schedule length T")->capture_default_str();
  cmd_sample->add_flag("--no-clamp", no_clamp, "Keep values outside [0, 1]");
  cmd_sample->add_option("-o,--output", out_path, "Raster output")->required();

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "Roll out K joint futures");
  RolloutConfig rcfg;
  cmd_sim->add_option("scenario", in_path, "Scenario JSON")->required();
  cmd_sim->add_option("--k", rcfg.K, "Number of futures")->capture_default_str();
  cmd_sim->add_option("--horizon", rcfg.horizon, "Horizon, s")->capture_default_str();
  cmd_sim->add_option("--dt", rcfg.dt, "Timestep, s")->capture_default_str();
  cmd_sim->add_option("-o,--output", out_path, "Output prefix; writes <prefix>_<k>.json")->required();

  // roundtrip
  auto* cmd_rt = app.add_subcommand("roundtrip", "Rasterize, vectorize and score scenario files");
  std::vector<std::string> inputs;
  int jobs = 1;
  cmd_rt->add_option("scenarios", inputs, "Scenario JSON files")->required();
  cmd_rt->add_option("-j,--jobs", jobs, "Worker threads")->capture_default_str();
  cmd_rt->add_flag("--json", as_json, "Print JSON");

  // gen-corpus
  auto* cmd_corpus = app.add_subcommand("gen-corpus", "Write a seeded synthetic corpus");
  std::string config_path;
  int count = 0;
  cmd_corpus->add_option("--config", config_path, "Corpus config JSON");
  cmd_corpus->add_option("--count", count, "Even template mix of this size when no config is given");
  cmd_corpus->add_option("--seed", seed, "RNG seed")->capture_default_str();
  cmd_corpus->add_option("-o,--output", out_path, "Output directory")->required();
  cmd_corpus->add_option("-j,--jobs", jobs, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return usage_error(app, e);
  }

  try {
    if (*cmd_raster) {
      const Scenario s = read_scenario(in_path);
      const FeatureMap fm = rasterize(s, size, size, stroke);
      save_raster(fm, out_path);
      if (!png_path.empty()) render_png(fm, png_path);
      log(Level::Info, "wrote " + out_path);
    } else if (*cmd_vec) {
      VectorizeConfig vcfg;
      vcfg.k_thresh = k_thresh;
      write_scenario(vectorize_scene(load_raster(in_path, range), v_max, vcfg), out_path);
      log(Level::Info, "wrote " + out_path);
    } else if (*cmd_agents) {
      AgentExtractConfig acfg;
      acfg.v_max = v_max;
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& d : extract_agents(load_raster(in_path, range), acfg)) arr.push_back(detection_json(d));
      const std::string text = arr.dump(1) + "\n";
      if (out_path.empty()) {
        std::cout << text;
      } else {
        write_text(out_path, text);
      }
    } else if (*cmd_eval) {
      const auto score = evaluate(read_scenario(in_path).lanes, read_scenario(pred_path).lanes, ecfg);
      std::cout << (as_json ? score_to_json(score) : format_score(score));
    } else if (*cmd_noise) {
      const FeatureMap f0 = load_raster(in_path, range);
      const auto ns = make_schedule(steps);
      Rng rng(seed);
      const FeatureMap eps = gaussian_like(f0, rng);
      save_raster(forward_noise(f0, step, eps, ns), out_path);
    } else if (*cmd_sample) {
      const auto ns = make_schedule(steps);
      SampleShape shape{size, size, range / size};
      Denoiser den;
      if (denoiser_name == "oracle") {
        if (reference.empty()) throw CLI::RequiredError("--reference (needed by the oracle denoiser)");
        FeatureMap f0 = load_raster(reference, range);
        shape = {f0.width(), f0.height(), f0.meters_per_pixel()};
        den = oracle_denoiser(std::move(f0), ns);
      } else if (denoiser_name == "blur") {
        den = blur_denoiser();
      } else {
        den = zero_denoiser();
      }
      Rng rng(seed);
      save_raster(sample(den, ns, shape, rng, !no_clamp), out_path);
    } else if (*cmd_sim) {
      const Scenario s = read_scenario(in_path);
      const LaneGraph g = lane_graph_from_centerlines(s.lanes);
      const auto futures = rollout(s, g, rcfg);
      for (std::size_t k = 0; k < futures.size(); ++k) {
        Scenario out = apply_future(s, futures[k]);
        out.metadata["future"] = std::to_string(k);
        out.metadata["probability"] = std::to_string(futures[k].probability);
        const std::string file = out_path + "_" + std::to_string(k) + ".json";
        write_scenario(out, file);
        std::printf("%s  p=%.6f\n", file.c_str(), futures[k].probability);
      }
    } else if (*cmd_rt) {
      std::vector<GeoTopoScore> scores(inputs.size());
      parallel_for(static_cast<int>(inputs.size()), jobs, [&](int i) {
        const Scenario s = read_scenario(inputs[static_cast<std::size_t>(i)]);
        const FeatureMap fm = rasterize(s);
        scores[static_cast<std::size_t>(i)] = evaluate(s.lanes, vectorize(fm).lanes);
      });
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (inputs.size() > 1) std::cout << inputs[i] << "\n";
        std::cout << (as_json ? score_to_json(scores[i]) : format_score(scores[i]));
      }
    } else if (*cmd_corpus) {
      CorpusConfig cfg;
      if (!config_path.empty()) {
        cfg = CorpusConfig::from_json(read_text(config_path));
      } else if (count > 0) {
        cfg = CorpusConfig::mixed(count, range);
        cfg.v_max = v_max;
      } else {
        throw CLI::RequiredError("--config or --count");
      }
      const auto corpus = generate_synthetic_corpus(cfg, seed);
      fs::create_directories(out_path);
      parallel_for(static_cast<int>(corpus.size()), jobs, [&](int i) {
        char name[32];
        std::snprintf(name, sizeof name, "scenario_%04d.json", i);
        write_scenario(corpus[static_cast<std::size_t>(i)], fs::path(out_path) / name);
      });
      std::printf("wrote %zu scenarios to %s\n", corpus.size(), out_path.c_str());
    }
  } catch (const CLI::ParseError& e) {
    return usage_error(app, e);
  } catch (const std::exception& e) {
    std::cerr << "dsgen: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
