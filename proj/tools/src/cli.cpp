// Copyright 2026 The stylescene Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "stylescene/embedding.hpp"
#include "stylescene/error.hpp"
#include "stylescene/fsm.hpp"
#include "stylescene/metrics.hpp"
#include "stylescene/planner.hpp"
#include "stylescene/scene.hpp"
#include "stylescene/scriptdb.hpp"
#include "stylescene/synthetic.hpp"
#include "stylescene/tasks.hpp"

namespace stylescene::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kDefaultHorizon = 20000;

struct EmbedFlags {
  std::string url;
  std::size_t dim = kDefaultEmbeddingDim;
  std::uint64_t seed = 0;
};

void add_embed_flags(CLI::App* cmd, EmbedFlags& flags) {
  cmd->add_option("--embed-url", flags.url,
                  "HTTP embedding endpoint (default: $STYLESCENE_EMBED_URL, else offline)");
  cmd->add_option("--embed-dim", flags.dim, "Embedding dimension")->capture_default_str();
  cmd->add_option("--embed-seed", flags.seed, "Seed of the offline test embedder")
      ->capture_default_str();
}

std::unique_ptr<EmbeddingProvider> make_embedder(const EmbedFlags& flags) {
  std::optional<HttpEmbeddingOptions> http;
  if (!flags.url.empty()) {
    http = HttpEmbeddingOptions{};
    http->url = flags.url;
  } else {
    http = embedding_options_from_env();
  }
  if (http) {
    http->dim = flags.dim;
    return std::make_unique<HttpEmbeddingProvider>(*http);
  }
  if (flags.dim < 2) throw ValidationError("--embed-dim must be at least 2");
  return std::make_unique<TestEmbedder>(flags.dim, flags.seed);
}

void write_manifest(const fs::path& path, const std::string& command, const json& inputs,
                    const std::string& config, std::uint64_t seed, const fs::path& output) {
  const json manifest = {{"command", command},
                         {"config", config},
                         {"seed", seed},
                         {"inputs", inputs},
                         {"output", output.string()},
                         {"tool_version", STYLESCENE_VERSION}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << manifest.dump(2) << '\n';
}

fs::path sidecar_manifest(const fs::path& output) {
  return fs::path(output.string() + ".manifest.json");
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw IoError(std::string(what) + " not found: " + path.string());
  }
}

int cmd_build_db(const fs::path& scripts_path, const fs::path& out_path,
                 const EmbedFlags& flags, std::ostream& out, std::ostream& err) {
  require_file(scripts_path, "scripts file");
  const std::vector<ShortScript> scripts = load_short_scripts(scripts_path);
  bool bad = false;
  for (std::size_t i = 0; i < scripts.size(); ++i) {
    const ValidityReport report = validate_short_script(scripts[i]);
    if (!report.ok()) {
      err << "record " << i << ": " << report.to_string() << '\n';
      bad = true;
    }
  }
  if (bad) throw ValidationError("invalid records; database not written");
  const auto embedder = make_embedder(flags);
  ScriptDatabase db;
  for (const auto& s : scripts) insert_script(db, s, *embedder);
  save_db(db, out_path);
  write_manifest(sidecar_manifest(out_path), "build-db", {{"scripts", scripts_path.string()}},
                 "", flags.seed, out_path);
  out << "wrote " << db.size() << " scripts to " << out_path.string() << '\n';
  for (StyleLabel s : kAllStyles) {
    out << "  " << std::left << std::setw(10) << to_string(s) << db.ids_with_style(s).size()
        << '\n';
  }
  return 0;
}

struct PlanFlags {
  fs::path db;
  fs::path scene;
  std::string theme;
  std::size_t m = 3;
  std::size_t k = 5;
  std::size_t max_scripts = 4;
  bool no_llm = false;
  std::string llm_url;
  std::uint64_t seed = 0;
  fs::path out;
};

int cmd_plan(const PlanFlags& flags, const EmbedFlags& embed, std::ostream& out) {
  require_file(flags.db, "database");
  require_file(flags.scene, "scene");
  const ScriptDatabase db = load_db(flags.db);
  const Scene scene = load_scene(flags.scene);
  const auto embedder = make_embedder(embed);
  if (db.key_dim() != 0 && db.key_dim() != embedder->dim()) {
    throw ValidationError("database keys have dim " + std::to_string(db.key_dim()) +
                          " but the embedder produces " + std::to_string(embedder->dim()));
  }
  std::unique_ptr<NarrativeProvider> narrative;
  if (!flags.no_llm) {
    std::optional<HttpNarrativeOptions> opts;
    if (!flags.llm_url.empty()) {
      opts = HttpNarrativeOptions{};
      opts->url = flags.llm_url;
    } else {
      opts = narrative_options_from_env();
    }
    if (opts) narrative = std::make_unique<HttpNarrativeProvider>(*opts);
  }
  PlanOptions options;
  options.m = flags.m;
  options.k = flags.k;
  options.max_scripts = flags.max_scripts;
  options.seed = flags.seed;
  const LongScript script = plan(db, flags.theme, scene, *embedder, narrative.get(), options);
  save_long_script(script, flags.out);
  write_manifest(sidecar_manifest(flags.out), "plan",
                 {{"db", flags.db.string()}, {"scene", flags.scene.string()},
                  {"theme", flags.theme}},
                 "", flags.seed, flags.out);
  out << "styles:";
  for (StyleLabel s : script.styles) out << ' ' << to_string(s);
  out << "\n#   skill   object        instance      style     caption\n";
  for (std::size_t i = 0; i < script.keyframes.size(); ++i) {
    const Keyframe& kf = script.keyframes[i];
    const auto bound = script.scene_binding.find(i);
    out << std::left << std::setw(4) << i << std::setw(8) << to_string(kf.skill)
        << std::setw(14) << kf.object_ref.value_or("-") << std::setw(14)
        << (bound == script.scene_binding.end() ? "-" : bound->second) << std::setw(10)
        << (kf.style ? std::string(to_string(*kf.style)) : "-") << kf.caption.value_or("-")
        << '\n';
  }
  return 0;
}

struct SimulateFlags {
  fs::path scene;
  fs::path script;
  fs::path config;
  std::size_t episodes = 1;
  std::uint64_t seed = 0;
  std::size_t parallel = 1;
  std::optional<int> horizon;
  fs::path out;
};

std::string episode_file(std::size_t i) {
  std::ostringstream name;
  name << "episode_" << std::setw(4) << std::setfill('0') << i << ".jsonl";
  return name.str();
}

int cmd_simulate(const SimulateFlags& flags, std::ostream& out) {
  require_file(flags.scene, "scene");
  require_file(flags.script, "script");
  EpisodeConfig cfg;
  if (!flags.config.empty()) {
    require_file(flags.config, "config");
    cfg = load_episode_config(flags.config);
  } else {
    cfg.horizon = kDefaultHorizon;
  }
  if (flags.horizon) cfg.horizon = *flags.horizon;
  cfg.validate();
  const Scene scene = load_scene(flags.scene);
  const LongScript script = load_long_script(flags.script);
  if (flags.episodes == 0) throw ValidationError("--episodes must be at least 1");

  const KinematicRuntime runtime;
  const auto traces = run_episodes(scene, script, cfg, runtime.view(), flags.seed,
                                   flags.episodes, std::max<std::size_t>(flags.parallel, 1));
  fs::create_directories(flags.out);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    save_trace(traces[i], flags.out / episode_file(i));
    const auto& t = traces[i];
    const auto ok = std::count_if(t.outcomes.begin(), t.outcomes.end(),
                                  [](const KeyframeOutcome& o) { return o.success; });
    out << "episode " << i << " seed " << t.seed << ": " << to_string(t.termination) << ", "
        << t.ticks() << " ticks, " << ok << "/" << t.outcomes.size() << " keyframes";
    if (!t.message.empty()) out << " (" << t.message << ")";
    out << '\n';
  }
  write_manifest(flags.out / "manifest.json", "simulate",
                 {{"scene", flags.scene.string()}, {"script", flags.script.string()},
                  {"episodes", flags.episodes}, {"parallel", flags.parallel}},
                 flags.config.string(), flags.seed, flags.out);
  return 0;
}

std::vector<ExecutionTrace> load_traces(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("trace directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ExecutionTrace> traces;
  for (const auto& f : files) traces.push_back(load_trace(f));
  return traces;
}

struct EvaluateFlags {
  fs::path traces;
  fs::path reference;
  fs::path db;
  fs::path csv;
  fs::path out;
};

int cmd_evaluate(const EvaluateFlags& flags, const EmbedFlags& embed, std::ostream& out) {
  const auto traces = load_traces(flags.traces);
  if (traces.empty()) {
    throw ValidationError("no traces (*.jsonl) in " + flags.traces.string());
  }
  std::vector<ExecutionTrace> reference;
  if (!flags.reference.empty()) reference = load_traces(flags.reference);
  MetricsReport report = evaluate_traces(traces, reference);
  if (!flags.db.empty()) {
    require_file(flags.db, "database");
    const ScriptDatabase db = load_db(flags.db);
    std::vector<std::string> summaries;
    for (const auto& e : db.entries()) summaries.push_back(e.script.summary);
    if (summaries.size() >= 2) {
      report.diversity = script_diversity(summaries, *make_embedder(embed));
    }
  }
  const std::string text = to_json(report).dump(2);
  if (!flags.out.empty()) {
    std::ofstream f(flags.out);
    if (!f) throw IoError("cannot write " + flags.out.string());
    f << text << '\n';
    write_manifest(sidecar_manifest(flags.out), "evaluate",
                   {{"traces", flags.traces.string()}, {"reference", flags.reference.string()}},
                   "", 0, flags.out);
  }
  if (!flags.csv.empty()) {
    std::ofstream f(flags.csv);
    if (!f) throw IoError("cannot write " + flags.csv.string());
    f << to_csv(report);
  }
  out << text << '\n';
  return 0;
}

struct SceneFlags {
  std::string kind = "apartment";
  std::size_t count = 40;
  double voxel = kDefaultVoxelSize;
  std::uint64_t seed = 0;
  fs::path out;
};

int cmd_gen_scene(const SceneFlags& flags, std::ostream& out) {
  json j;
  if (flags.kind == "apartment") {
    j = synthetic_apartment_json();
  } else if (flags.kind == "boxes") {
    GroundRect bounds;
    bounds.min = Vec2(0.0, 0.0);
    bounds.max = Vec2(20.0, 20.0);
    j = random_box_scene_json(flags.count, flags.voxel, flags.seed, bounds);
  } else {
    throw ValidationError("unknown scene kind '" + flags.kind + "'");
  }
  const Scene scene = scene_from_json(j);
  std::ofstream f(flags.out);
  if (!f) throw IoError("cannot write " + flags.out.string());
  f << j.dump(2) << '\n';
  write_manifest(sidecar_manifest(flags.out), "gen-scene", {{"kind", flags.kind}}, "",
                 flags.seed, flags.out);
  out << "wrote scene with " << scene.objects().size() << " objects and "
      << scene.index().size() << " surface points to " << flags.out.string() << '\n';
  return 0;
}

int cmd_gen_scripts(std::size_t count, std::uint64_t seed, const fs::path& path,
                    std::ostream& out) {
  json arr = json::array();
  for (const auto& s : random_short_scripts(count, seed)) {
    json j = short_script_to_json(s);
    j.erase("id");
    arr.push_back(std::move(j));
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << arr.dump(2) << '\n';
  write_manifest(sidecar_manifest(path), "gen-scripts", {{"count", count}}, "", seed, path);
  out << "wrote " << count << " scripts to " << path.string() << '\n';
  return 0;
}

int exit_code(ErrorCode code) { return static_cast<int>(code); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"stylescene: stylized human-scene interaction harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", STYLESCENE_VERSION);

  EmbedFlags embed;

  fs::path scripts_path, db_out;
  auto* build = app.add_subcommand("build-db", "Validate, embed and store short scripts");
  build->add_option("--scripts", scripts_path, "JSON array of short scripts")->required();
  build->add_option("--out", db_out, "Output .sdb file")->required();
  add_embed_flags(build, embed);

  PlanFlags plan_flags;
  auto* plan_cmd = app.add_subcommand("plan", "Assemble a long script for a theme and scene");
  plan_cmd->add_option("--db", plan_flags.db, "Script database (.sdb)")->required();
  plan_cmd->add_option("--scene", plan_flags.scene, "Scene JSON")->required();
  plan_cmd->add_option("--theme", plan_flags.theme, "Theme sentence")->required();
  plan_cmd->add_option("--m", plan_flags.m, "Styles to select")->capture_default_str();
  plan_cmd->add_option("--k", plan_flags.k, "Scripts per style")->capture_default_str();
  plan_cmd->add_option("--max-scripts", plan_flags.max_scripts, "Scripts kept by the fallback")
      ->capture_default_str();
  plan_cmd->add_flag("--no-llm", plan_flags.no_llm, "Force the deterministic fallback");
  plan_cmd->add_option("--llm-url", plan_flags.llm_url,
                       "Narrative provider base URL (default: $STYLESCENE_LLM_URL)");
  plan_cmd->add_option("--seed", plan_flags.seed, "Planning seed")->capture_default_str();
  plan_cmd->add_option("--out", plan_flags.out, "Output long-script JSON")->required();
  add_embed_flags(plan_cmd, embed);

  SimulateFlags sim_flags;
  int horizon = 0;
  auto* sim = app.add_subcommand("simulate", "Run episodes with the kinematic policies");
  sim->add_option("--scene", sim_flags.scene, "Scene JSON")->required();
  sim->add_option("--script", sim_flags.script, "Long-script JSON")->required();
  sim->add_option("--config", sim_flags.config, "EpisodeConfig JSON");
  sim->add_option("--episodes", sim_flags.episodes, "Episode count")->capture_default_str();
  sim->add_option("--seed", sim_flags.seed, "Base seed")->capture_default_str();
  sim->add_option("--parallel", sim_flags.parallel, "Worker threads")->capture_default_str();
  auto* horizon_opt = sim->add_option("--horizon", horizon, "Ticks per episode");
  sim->add_option("--out", sim_flags.out, "Trace output directory")->required();

  EvaluateFlags eval_flags;
  auto* eval = app.add_subcommand("evaluate", "Compute metrics over a trace directory");
  eval->add_option("--traces", eval_flags.traces, "Trace directory")->required();
  eval->add_option("--reference", eval_flags.reference, "Reference traces for FID");
  eval->add_option("--db", eval_flags.db, "Database whose summaries feed script diversity");
  eval->add_option("--csv", eval_flags.csv, "Per-skill CSV output");
  eval->add_option("--out", eval_flags.out, "JSON report output");
  add_embed_flags(eval, embed);

  SceneFlags scene_flags;
  auto* gen = app.add_subcommand("gen-scene", "Write a synthetic scene");
  gen->add_option("--kind", scene_flags.kind, "apartment | boxes")->capture_default_str();
  gen->add_option("--count", scene_flags.count, "Box count (boxes)")->capture_default_str();
  gen->add_option("--voxel", scene_flags.voxel, "Voxel size (boxes)")->capture_default_str();
  gen->add_option("--seed", scene_flags.seed, "Seed (boxes)")->capture_default_str();
  gen->add_option("--out", scene_flags.out, "Output scene JSON")->required();

  std::size_t script_count = 100;
  std::uint64_t script_seed = 0;
  fs::path scripts_out;
  auto* gen_scripts = app.add_subcommand("gen-scripts", "Write random valid short scripts");
  gen_scripts->add_option("--count", script_count, "Script count")->capture_default_str();
  gen_scripts->add_option("--seed", script_seed, "Seed")->capture_default_str();
  gen_scripts->add_option("--out", scripts_out, "Output JSON")->required();

  std::vector<std::string> argv_store = args;
  argv_store.insert(argv_store.begin(), "stylescene");
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_code(ErrorCode::kValidation);
  }

  try {
    if (*build) return cmd_build_db(scripts_path, db_out, embed, out, err);
    if (*plan_cmd) return cmd_plan(plan_flags, embed, out);
    if (*sim) {
      if (*horizon_opt) sim_flags.horizon = horizon;
      return cmd_simulate(sim_flags, out);
    }
    if (*eval) return cmd_evaluate(eval_flags, embed, out);
    if (*gen) return cmd_gen_scene(scene_flags, out);
    if (*gen_scripts) return cmd_gen_scripts(script_count, script_seed, scripts_out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(ErrorCode::kIo);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(ErrorCode::kValidation);
  }
  return 0;
}

int run(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("stylescene"));
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace stylescene::cli
