// forge: command-line driver for the contradiction benchmark pipeline.
#include <csignal>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "contraforge/annotation_server.hpp"
#include "contraforge/config.hpp"
#include "contraforge/fixtures.hpp"
#include "contraforge/pipeline.hpp"

namespace cf = contraforge;

namespace {

struct Globals {
  std::string config;
  std::string store = "store";
  std::optional<std::uint64_t> seed;
  bool mock = false;
  std::string log_level = "info";
};

cf::PipelineConfig load(const Globals& g) {
  cf::PipelineConfig cfg;
  if (!g.config.empty()) {
    cfg = cf::load_config(g.config);
  } else {
    cfg = cf::parse_config(nlohmann::json::object());
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.mock) cfg.providers.mock = true;
  return cfg;
}

void print_stage_counts(const cf::RunManifest& m, const std::vector<std::string>& stages) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& s : stages) {
    if (m.manifest["counts"].contains(s)) out[s] = m.manifest["counts"][s];
  }
  std::cout << out.dump(2) << "\n";
}

int run_stages(const Globals& g, const std::vector<std::string>& stages) {
  const auto cfg = load(g);
  cf::RunOptions opts;
  opts.store = g.store;
  opts.stages = stages;
  const auto m = cf::run_pipeline(cfg, opts);
  print_stage_counts(m, stages);
  return 0;
}

int serve(const Globals& g, const std::string& host, int port,
          const std::optional<std::string>& token, const std::optional<std::string>& static_dir) {
  const auto cfg = load(g);
  const cf::StoreLayout store{g.store};
  auto gold = cf::load_values<cf::GoldItem>(store.gold());
  std::set<std::string> docs;
  for (const auto& d : cf::load_if_exists<cf::Document>(store.corpus())) docs.insert(d.id);
  cf::AnnotationService service(std::move(gold), store.annotations(), cfg.annotation, docs);

  cf::ServerOptions so;
  so.host = host;
  so.port = port;
  so.token = token;
  if (!token) {
    if (const char* env = std::getenv("FORGE_ANNOTATION_TOKEN")) so.token = env;
  }
  if (static_dir) so.static_dir = *static_dir;

  // Block the stop signals before any thread starts, then wait for one.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  cf::AnnotationServer server(service, so);
  const int bound = server.start();
  spdlog::info("annotation service on http://{}:{} ({} gold items)", host, bound,
               service.consolidated().size());
  std::cout << "listening on " << host << ":" << bound << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  spdlog::info("signal {}; shutting down", sig);
  server.stop();
  return 0;
}

int iaa(const Globals& g, const std::string& mode) {
  const auto cfg = load(g);
  const cf::StoreLayout store{g.store};
  auto gold = cf::load_values<cf::GoldItem>(store.gold());
  cf::AnnotationService service(std::move(gold), store.annotations(), cfg.annotation);
  std::optional<cf::Mode> m;
  if (mode != "all") {
    m = cf::parse_mode(mode);
    if (!m) throw cf::ConfigError("--mode must be self, pairwise or all");
  }
  try {
    std::cout << cf::to_json(service.iaa(m)).dump(2) << "\n";
  } catch (const cf::PreconditionError& e) {
    std::cout << nlohmann::json{{"percent_agreement", nullptr},
                                {"cohen_kappa", nullptr},
                                {"kripp_alpha", nullptr},
                                {"reason", e.what()}}
                     .dump(2)
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: synthetic contradiction benchmark pipeline"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Pipeline config file (JSON)");
  app.add_option("--store", g.store, "Store directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_flag("--mock-providers", g.mock, "Use deterministic offline providers");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")
      ->capture_default_str();

  std::function<int()> action;
  for (const auto& stage : cf::all_stages()) {
    if (stage == "annotate") continue;
    auto* sub = app.add_subcommand(stage, "Run the " + stage + " stage");
    sub->callback([&, stage] { action = [&, stage] { return run_stages(g, {stage}); }; });
  }

  std::string stages_csv;
  auto* run = app.add_subcommand("run", "Run the configured stages in order");
  run->add_option("--stages", stages_csv, "Comma-separated subset of stages");
  run->callback([&] {
    action = [&] {
      if (stages_csv.empty()) {
        const auto cfg = load(g);
        return run_stages(g, cfg.stages);
      }
      std::vector<std::string> stages;
      std::stringstream ss(stages_csv);
      for (std::string s; std::getline(ss, s, ',');) {
        if (!s.empty()) stages.push_back(s);
      }
      return run_stages(g, stages);
    };
  });

  auto* annotate = app.add_subcommand("annotate", "Human annotation");
  annotate->require_subcommand(1);
  auto* serve_cmd = annotate->add_subcommand("serve", "Serve the annotation HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> token;
  std::optional<std::string> static_dir;
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port)->capture_default_str();
  serve_cmd->add_option("--token", token, "Shared token (or FORGE_ANNOTATION_TOKEN)");
  serve_cmd->add_option("--static-dir", static_dir, "Annotation UI bundle to serve at /");
  serve_cmd->callback([&] { action = [&] { return serve(g, host, port, token, static_dir); }; });

  std::string mode = "all";
  auto* iaa_cmd = app.add_subcommand("iaa", "Inter-annotator agreement over the store");
  iaa_cmd->add_option("--mode", mode, "self|pairwise|all")->capture_default_str();
  iaa_cmd->callback([&] { action = [&] { return iaa(g, mode); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  spdlog::set_level(spdlog::level::from_str(g.log_level));
  spdlog::set_default_logger(spdlog::stderr_color_mt("forge"));
  spdlog::set_level(spdlog::level::from_str(g.log_level));
  try {
    return action ? action() : 0;
  } catch (const cf::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return 2;
  } catch (const cf::ProviderError& e) {
    spdlog::error("provider error: {}", e.what());
    return 3;
  } catch (const cf::ValidationError& e) {
    spdlog::error("validation failure: {}", e.what());
    return 4;
  } catch (const cf::StoreError& e) {
    spdlog::error("store error: {}", e.what());
    return 4;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
