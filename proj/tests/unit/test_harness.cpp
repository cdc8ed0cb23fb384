#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "slicesim/checkpoint.hpp"
#include "slicesim/csv.hpp"
#include "slicesim/experiment.hpp"

using namespace slicesim;
namespace fs = std::filesystem;

namespace {

ScenarioConfig small() { return with_user_counts(default_config(), {4, 14, 42}); }

AgentOverrides tiny_agents() {
  AgentOverrides o;
  o.global = {{"hidden", {16, 16}}, {"batch_size", 16}, {"warmup_steps", 20}};
  o.slice = {{"hidden", {16, 16}}, {"batch_size", 16}, {"warmup_steps", 20}};
  return o;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("slicesim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SLICESIM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("csv writer and reader agree") {
  std::ostringstream out;
  CsvWriter w(out, {"a", "b", "c"});
  w.field(0.1).field(std::int64_t(-3)).field("x");
  w.end_row();
  w.field(1e-300).field(true).field(std::string_view("long name"));
  w.end_row();
  CHECK(w.rows() == 2);
  CHECK(out.str() == "a,b,c\n0.1,-3,x\n1e-300,1,long name\n");
  const auto t = CsvTable::parse(out.str());
  CHECK(t.rows.size() == 2);
  CHECK(t.number(1, "a") == 1e-300);
  CHECK(t.rows[1][t.column("c")] == "long name");
  CHECK_THROWS_AS(t.column("d"), std::out_of_range);
  w.field(1.0);
  CHECK_THROWS_AS(w.end_row(), std::logic_error);
}

TEST_CASE("doubles print in their shortest round-trip form") {
  for (double v : {0.1, 1.0 / 3.0, 2e7, -4.5e-21, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("checkpoint round trip keeps bytes and values") {
  Checkpoint c;
  c.meta = {{"algorithm", "td3"}};
  c.put("w", Eigen::VectorXf::LinSpaced(6, -1, 1), {2, 3});
  c.put("d", Eigen::VectorXd::Constant(2, 0.125));
  const auto bytes = c.serialize();
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "SLSMCKPT");
  const auto back = Checkpoint::deserialize(bytes);
  CHECK(back.serialize() == bytes);
  CHECK(back.get_f32("w", 6) == c.get_f32("w"));
  CHECK(back.at("w").shape == std::vector<std::int64_t>{2, 3});
  CHECK(back.meta["algorithm"] == "td3");
  CHECK_THROWS_AS(back.get_f32("d"), CheckpointError);
  CHECK_THROWS_AS(back.get_f32("w", 5), CheckpointError);
  CHECK_THROWS_AS(back.get_f64("missing"), CheckpointError);

  auto broken = bytes;
  broken[0] = 'X';
  CHECK_THROWS_AS(Checkpoint::deserialize(broken), CheckpointError);
  broken = bytes;
  broken.resize(bytes.size() - 4);
  CHECK_THROWS_AS(Checkpoint::deserialize(broken), CheckpointError);
}

TEST_CASE("trained controller survives a checkpoint") {
  const auto cfg = small();
  TrainOptions opt;
  opt.episodes = 2;
  opt.force_trigger_episodes = 1;
  opt.agents = tiny_agents();
  auto r = train(Algorithm::kTd3, cfg, 3, opt);
  const auto dir = scratch("ckpt");
  make_checkpoint(*r.controller, Algorithm::kTd3, cfg, 3, 2, opt.agents)
      .save((dir / "a.ckpt").string());
  const auto ck = Checkpoint::load((dir / "a.ckpt").string());
  auto restored = controller_from_checkpoint(ck);
  SlicingEnv env(cfg);
  env.reset(5);
  CHECK(restored->global_action(env, false) == r.controller->global_action(env, false));
  for (int s = 0; s < 3; ++s) {
    CHECK(restored->slice_action(env, s, false) == r.controller->slice_action(env, s, false));
  }
  CHECK(Checkpoint::read_manifest((dir / "a.ckpt").string())["meta"]["episodes"] == 2);
}

TEST_CASE("user counts scale in the reference proportions") {
  const std::vector<int> ref{20, 70, 210};
  CHECK(scale_user_counts(ref, 300) == ref);
  CHECK(scale_user_counts(ref, 108) == std::vector<int>{7, 25, 76});
  for (int total = 3; total <= 400; ++total) {
    const auto v = scale_user_counts(ref, total);
    REQUIRE(v[0] + v[1] + v[2] == total);
  }
}

TEST_CASE("training curve has one row per agent and episode and repeats exactly") {
  const auto cfg = small();
  TrainOptions opt;
  opt.episodes = 3;
  opt.force_trigger_episodes = 2;
  opt.agents = tiny_agents();
  const auto a = train(Algorithm::kDdpg, cfg, 11, opt);
  const auto b = train(Algorithm::kDdpg, cfg, 11, opt);
  REQUIRE(a.curve.size() == 3 * (1 + 3));
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].agent == b.curve[i].agent);
    CHECK(a.curve[i].cumulative_reward == b.curve[i].cumulative_reward);
    CHECK(a.curve[i].transitions == b.curve[i].transitions);
  }
}

TEST_CASE("staged episodes train only the slice agents") {
  const auto cfg = small();
  TrainOptions opt;
  opt.episodes = 3;
  opt.force_trigger_episodes = 3;
  opt.staged_episodes = 2;
  opt.agents = tiny_agents();
  auto r = train(Algorithm::kTd3, cfg, 5, opt);
  CHECK(r.controller->global_agent().transitions_seen() == 50);
  CHECK(r.controller->slice_agent(0).transitions_seen() == 150);

  ExperimentSpec spec;
  spec.episodes = 4;
  spec.staged_episodes = 5;
  CHECK_THROWS_AS(validate(spec), ConfigError);
}

TEST_CASE("summary statistics come straight from the realizations") {
  const auto cfg = small();
  const auto rs = evaluate(Algorithm::kRssiIp, cfg, nullptr, {1, 2}, 3);
  REQUIRE(rs.size() == 6);
  const auto rows = summarize(rs, cfg);
  double sum = 0;
  for (const auto& r : rs) {
    for (const auto& mv : realization_metrics(r.episode, cfg)) {
      if (mv.scope == "system" && mv.metric == "objective") sum += mv.value;
    }
  }
  CHECK(std::abs(summary_value(rows, "system", "objective") - sum / 6) < 1e-12);
  CHECK_THROWS_AS(summary_value(rows, "system", "nothing"), std::out_of_range);

  // A single realization averages to itself.
  const auto one = evaluate(Algorithm::kRssiIp, cfg, nullptr, {1}, 1);
  const auto one_rows = summarize(one, cfg);
  for (const auto& mv : realization_metrics(one[0].episode, cfg)) {
    CHECK(summary_value(one_rows, mv.scope, mv.metric) == mv.value);
  }
}

TEST_CASE("parallel evaluation matches serial") {
  const auto cfg = small();
  const auto a = evaluate(Algorithm::kRssiIp, cfg, nullptr, {4}, 4, 1);
  const auto b = evaluate(Algorithm::kRssiIp, cfg, nullptr, {4}, 4, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t t = 0; t < a[i].episode.slots.size(); ++t) {
      CHECK(a[i].episode.slots[t].objective == b[i].episode.slots[t].objective);
    }
  }
}

TEST_CASE("eval outputs follow their schemas") {
  const auto cfg = small();
  const auto dir = scratch("eval");
  const auto rs = evaluate(Algorithm::kRssiIp, cfg, nullptr, {1}, 2);
  write_eval_outputs(dir.string(), Algorithm::kRssiIp, cfg, rs);
  const auto slots = CsvTable::read((dir / "slots.csv").string());
  CHECK(slots.rows.size() == 2 * 50);
  for (std::size_t i = 0; i < slots.rows.size(); ++i) {
    CHECK(slots.number(i, "cost_in_objective") == 0);
    CHECK(slots.number(i, "objective") ==
          doctest::Approx(0.5 * slots.number(i, "system_satisfaction")).epsilon(1e-12));
  }
  CHECK(CsvTable::read((dir / "slices.csv").string()).rows.size() == 2 * 50 * 3);
  CHECK(CsvTable::read((dir / "users.csv").string()).rows.size() == 2 * 60);
  const auto summary = CsvTable::read((dir / "summary.csv").string());
  CHECK(summary.header ==
        std::vector<std::string>{"algorithm", "total_users", "scope", "metric", "mean", "std",
                                 "n"});
  CHECK(summary.rows[0][0] == "rssi-ip");

  const auto again = scratch("eval_again");
  write_eval_outputs(again.string(), Algorithm::kRssiIp, cfg,
                     evaluate(Algorithm::kRssiIp, cfg, nullptr, {1}, 2));
  for (const char* f : {"slots.csv", "slices.csv", "users.csv", "summary.csv"}) {
    CHECK(slurp(dir / f) == slurp(again / f));
  }
}

TEST_CASE("sweep writes one block per population") {
  ExperimentSpec spec;
  spec.scenario = small();
  spec.algorithm = Algorithm::kRssiIp;
  spec.eval_realizations = 1;
  spec.sweep_users = {108, 300};
  spec.output_dir = scratch("sweep").string();
  CHECK(cmd_sweep(spec, "") == 0);
  const auto t = CsvTable::read(spec.output_dir + "/sweep.csv");
  std::set<std::string> totals;
  for (const auto& row : t.rows) totals.insert(row[t.column("total_users")]);
  CHECK(totals == std::set<std::string>{"108", "300"});
  CHECK(fs::exists(spec.output_dir + "/users_108/summary.csv"));
  CHECK(fs::exists(spec.output_dir + "/users_300/summary.csv"));
  CHECK(fs::exists(spec.output_dir + "/manifest.json"));
}

TEST_CASE("spec parsing rejects unknown keys") {
  nlohmann::json j = {{"algorithm", "ppo"}, {"episodes", 5}};
  const auto s = spec_from_json(j);
  CHECK(s.algorithm == Algorithm::kPpo);
  CHECK(s.episodes == 5);
  CHECK(spec_from_json(spec_to_json(s)).episodes == 5);
  j["episdoes"] = 5;
  CHECK_THROWS_AS(spec_from_json(j), ConfigError);
  CHECK_THROWS_AS(spec_from_json({{"agents", {{"global", {{"lr", 1}}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_algorithm("sac"), ConfigError);
  for (auto a : all_algorithms()) CHECK(parse_algorithm(to_string(a)) == a);
}

TEST_CASE("config hash is stable") {
  const auto j = config_to_json(small());
  CHECK(config_hash(j) == config_hash(config_to_json(small())));
  CHECK(config_hash(j).size() == 16);
  CHECK(config_hash(j) != config_hash(config_to_json(default_config())));
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch("cli");
  CHECK(run_cli("eval -a rssi-ip --config " SLICESIM_SOURCE_DIR
                "/configs/desk.json --realizations 1 -o " +
                dir.string()) == 0);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(run_cli("eval -a nonsense -o " + dir.string()) == 2);
  CHECK(run_cli("eval -a td3 -o " + dir.string()) == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("inspect-checkpoint " + (dir / "missing.ckpt").string()) == 3);
}
