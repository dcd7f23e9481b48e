#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>

#include "contraforge/config.hpp"
#include "contraforge/error.hpp"
#include "contraforge/pipeline.hpp"
#include "test_support.hpp"

using namespace contraforge;
using nlohmann::json;
using testing::TempDir;

namespace {

std::filesystem::path mock_config() { return testing::fixtures_dir() / "configs" / "mock_e2e.json"; }

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name == "timings.json") continue;
    out[name] = testing::read_file(e.path());
  }
  return out;
}

int forge(const std::string& args) {
  const std::string cmd = std::string(CONTRAFORGE_FORGE_BIN) + " --log-level off " + args +
                          " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys and bad values") {
  CHECK_THROWS_AS(parse_config(json{{"sed", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"mining", {{"k", 5}, {"theta_x", 1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"stages", {"generate", "paint"}}}), ConfigError);
  const auto cfg = parse_config(json::object());
  CHECK(cfg.seed == 42);
  CHECK(cfg.stages == all_stages());
  const auto snap = config_snapshot(load_config(mock_config()));
  // The snapshot is itself a valid config describing the same run.
  CHECK(config_snapshot(parse_config(snap)) == snap);
}

TEST_CASE("stages refuse to run without their inputs") {
  const auto cfg = load_config(mock_config());
  TempDir dir("gating");
  RunOptions opts;
  opts.store = dir.path();
  opts.stages = std::vector<std::string>{"inject"};
  CHECK_THROWS_AS(run_pipeline(cfg, opts), PreconditionError);
  opts.stages = std::vector<std::string>{"evaluate"};
  CHECK_THROWS_AS(run_pipeline(cfg, opts), ValidationError);
}

TEST_CASE("an interrupted run resumes to byte-identical store files") {
  const auto cfg = load_config(mock_config());
  TempDir clean("clean");
  TempDir resumed("resumed");

  RunOptions full;
  full.store = clean.path();
  const auto m = run_pipeline(cfg, full);

  RunOptions broken;
  broken.store = resumed.path();
  broken.after_document = [](std::size_t slot) {
    if (slot == 4) throw std::runtime_error("interrupted");
  };
  CHECK_THROWS(run_pipeline(cfg, broken));
  RunOptions again;
  again.store = resumed.path();
  run_pipeline(cfg, again);

  const auto a = snapshot(clean.path());
  const auto b = snapshot(resumed.path());
  REQUIRE(a.size() == b.size());
  for (const auto& [name, content] : a) {
    CAPTURE(name);
    CHECK(b.at(name) == content);
  }

  const auto& counts = m.manifest["counts"];
  CHECK(counts["generate"]["generated"] == 10);
  CHECK(counts["inject"]["failed"] == 0);
  CHECK(counts["inject"]["injected"] == counts["inject"]["planned"]);
  CHECK(m.manifest["stages"].size() == all_stages().size());
  CHECK(m.manifest["seeds"]["slots"].size() == 10);
  std::set<std::uint64_t> seeds;
  for (const auto& s : m.manifest["seeds"]["slots"]) seeds.insert(s.get<std::uint64_t>());
  CHECK(seeds.size() == 10);
  CHECK(m.seconds.size() == all_stages().size());
  CHECK(std::filesystem::exists(StoreLayout{clean.path()}.timings()));
}

TEST_CASE("the CLI maps failures to exit codes") {
  TempDir dir("cli");
  const auto store = " --store " + dir.path().string();
  CHECK(forge("--config " + mock_config().string() + store + " run") == 0);
  CHECK(std::filesystem::exists(StoreLayout{dir.path()}.evaluation()));
  CHECK(forge("--config " + mock_config().string() + store + " iaa --mode self") == 0);

  std::ofstream(dir / "bad.json") << R"({"seed": 1, "unknown": true})";
  CHECK(forge("--config " + (dir / "bad.json").string() + store + " generate") == 2);
  CHECK(forge("--no-such-flag run") == 2);

  TempDir empty("cli-empty");
  CHECK(forge("--config " + mock_config().string() + " --store " + empty.path().string() +
              " mine") == 4);

  // Real providers without endpoints is a configuration problem.
  std::ofstream(dir / "http.json") << R"({"documents": 1, "providers": {"mock": false}})";
  CHECK(forge("--config " + (dir / "http.json").string() + store + " generate") == 2);

  // Every endpoint unreachable: provider failure once retries run out.
  const std::string dead = R"({"base_url": "http://127.0.0.1:1/v1", "model": "m"})";
  std::ofstream(dir / "dead.json") << R"({"documents": 1, "providers": {"retries": 0, "base_delay_ms": 1, "chat": )" +
                                          dead + ", \"embeddings\": " + dead + ", \"nli\": " + dead +
                                          ", \"logprobs\": " + dead + "}}";
  TempDir fresh("cli-dead");
  CHECK(forge("--config " + (dir / "dead.json").string() + " --store " + fresh.path().string() +
              " generate") == 3);
}
