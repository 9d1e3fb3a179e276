#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "mtrl/config.hpp"
#include "mtrl/csv.hpp"
#include "mtrl/distribution.hpp"
#include "mtrl/experiments.hpp"
#include "mtrl/rng.hpp"

using namespace mtrl;

namespace {

const char* kTmp = "harness_test_tmp";

std::string tmp_path(const std::string& name) {
  std::filesystem::create_directories(kTmp);
  return (std::filesystem::path(kTmp) / name).string();
}

const NamedFile* find_file(const RunResult& r, const std::string& name) {
  for (const NamedFile& f : r.files)
    if (f.name == name) return &f;
  return nullptr;
}

// Summary row for a path from report_text output: the CSV row following the
// "# summary" header whose first field is the path.
std::vector<std::string> summary_row(const std::string& report,
                                     const std::string& path) {
  auto rows = parse_csv(report.substr(report.find("# summary")));
  for (const auto& row : rows)
    if (!row.empty() && row[0] == path) return row;
  return {};
}

}  // namespace

TEST_CASE("format_double emits shortest exact decimal strings") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(0.0) == "0");
  RandomStream rng = derive_stream(71, 0);
  for (int i = 0; i < 1000; ++i) {
    double x = (rng.uniform01() - 0.5) * std::pow(10.0, double(rng.uniform_int(13)) - 6.0);
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("csv_field quotes exactly when needed") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("CsvWriter enforces the column count and uses LF endings") {
  CsvWriter w({"a", "b"});
  w.cell("x").cell(1);
  w.endrow();
  w.cell(2.5).cell(std::uint64_t(7));
  w.endrow();
  CHECK(w.text() == "a,b\nx,1\n2.5,7\n");
  CHECK(w.text().find('\r') == std::string::npos);

  CsvWriter bad({"a", "b"});
  bad.cell("only one");
  CHECK_THROWS(bad.endrow());
  CsvWriter wide({"a"});
  wide.cell(1);
  CHECK_THROWS(wide.cell(2));
}

TEST_CASE("parse_csv handles quoting, CRLF, and blank lines") {
  std::string text = "a,b,c\r\n1,\"x,y\",\"q\"\"q\"\n\n2,plain,\"nl\nnl\"\n";
  auto rows = parse_csv(text);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(rows[1] == std::vector<std::string>{"1", "x,y", "q\"q"});
  CHECK(rows[2] == std::vector<std::string>{"2", "plain", "nl\nnl"});
}

TEST_CASE("config parsing, aliases, and overrides") {
  ExperimentConfig cfg = config_from_json_text(
      R"({"experiment":"bandit-ucb","instance":{"generator":"prop1","M":3},
          "T":200,"num_seeds":2,"master_seed":5})");
  CHECK(cfg.experiment == "bandit-ucb");
  CHECK(cfg.budget == 200);
  CHECK(cfg.instance.M == 3);

  ExperimentConfig ovr = config_from_json_text(
      R"({"experiment":"omerm","instance":{"generator":"prop1","M":2},"K":10})",
      {"epsilon=0.25", "instance.M=5", "algo.mode=exhaustive"});
  CHECK(ovr.epsilon == 0.25);
  CHECK(ovr.instance.M == 5);
  CHECK(ovr.algo.mode == "exhaustive");
  CHECK(ovr.effective.find("exhaustive") != std::string::npos);

  CHECK_THROWS_AS(config_from_json_text("{"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"experiment":"nope"})"),
                  ConfigError);
  CHECK_THROWS_AS(
      config_from_json_text(
          R"({"experiment":"pce","instance":{"generator":"prop1","M":2}})"),
      ConfigError);  // budget required
  CHECK_THROWS_AS(
      config_from_json_text(
          R"({"experiment":"pce","instance":{"generator":"prop1","M":2},
              "K":10,"T":10})"),
      ConfigError);  // K and T are one field
  CHECK_THROWS_AS(
      config_from_json_text(
          R"({"experiment":"bandit-ratio",
              "instance":{"generator":"prop1","M":2}})"),
      ConfigError);  // needs T_grid
  CHECK_THROWS_AS(
      config_from_json_text(
          R"({"experiment":"validate","instance":{"generator":"prop1","M":2}})"),
      ConfigError);  // validate wants a file
  CHECK_THROWS_AS(
      config_from_json_text(
          R"({"experiment":"pce","instance":{"generator":"prop1","M":2},
              "K":10,"algo":{"delta":0.1}})"),
      ConfigError);  // direct pre-training delta needs its epsilon
  CHECK_THROWS_AS(
      config_from_json_text(
          R"({"experiment":"pce","instance":{"generator":"prop1","M":2},
              "K":10,"epsilon":1.5})"),
      ConfigError);
}

TEST_CASE("generator instances and distribution files materialize") {
  InstanceSpec spec;
  spec.generator = "theorem3";
  spec.M = 4;
  spec.gap = 0.25;
  MdpDistribution d = build_mdp_distribution(spec, 1);
  CHECK(d.size() == 4);
  BanditDistribution bd = build_bandit_distribution(spec, 1);
  CHECK(bd.instances.size() == 4);

  InstanceSpec rt;
  rt.generator = "random-tabular";
  rt.S = 3;
  rt.A = 2;
  rt.H = 2;
  rt.num_mdps = 2;
  MdpDistribution r1 = build_mdp_distribution(rt, 9);
  MdpDistribution r2 = build_mdp_distribution(rt, 9);
  CHECK(distribution_to_json(r1) == distribution_to_json(r2));
  CHECK_THROWS_AS(build_bandit_distribution(rt, 9), ConfigError);

  std::string file = tmp_path("dist.json");
  write_text_file(file, distribution_to_json(gen_proposition1_instance(2)));
  InstanceSpec from_file;
  from_file.file = file;
  CHECK(build_mdp_distribution(from_file, 1).size() == 2);

  InstanceSpec missing;
  missing.file = tmp_path("no_such_file.json");
  CHECK_THROWS_AS(build_mdp_distribution(missing, 1), ConfigError);
}

TEST_CASE("run produces byte-identical outputs for the same config") {
  ExperimentConfig cfg = config_from_json_text(
      R"({"experiment":"bandit-ucb","instance":{"generator":"prop1","M":3},
          "T":200,"num_seeds":3,"master_seed":5})");
  RunResult a = run(cfg);
  RunResult b = run(cfg);
  REQUIRE(a.files.size() == b.files.size());
  REQUIRE(!a.files.empty());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].name == b.files[i].name);
    CHECK(a.files[i].bytes == b.files[i].bytes);
  }
  CHECK(find_file(a, "runs.csv") != nullptr);
}

TEST_CASE("pce run with zero test draws emits pre-training outputs only") {
  ExperimentConfig cfg = config_from_json_text(
      R"({"experiment":"pce","instance":{"generator":"prop1","M":2},
          "K":100,"num_seeds":1,"num_test_draws":0,
          "oracle":{"white_box":true}})");
  RunResult r = run(cfg);
  CHECK(find_file(r, "policy_set_seed0.json") != nullptr);
  CHECK(find_file(r, "regret.csv") == nullptr);
}

TEST_CASE("schedule deviations surface in run results and metadata") {
  ExperimentConfig cfg = config_from_json_text(
      R"({"experiment":"pce","instance":{"generator":"prop1","M":2},
          "K":100,"num_seeds":1,"num_test_draws":1,
          "oracle":{"white_box":true},"algo":{"n_cap":50}})");
  RunResult r = run(cfg);
  REQUIRE(!r.deviations.empty());
  std::string meta = run_metadata_json(cfg, r, 1.5);
  CHECK(meta.find("wall_clock_seconds") != std::string::npos);
  CHECK(meta.find("deviations") != std::string::npos);
  CHECK(meta.find(kVersion) != std::string::npos);
  CHECK(meta.find("stream_layout") != std::string::npos);
  for (const NamedFile& f : r.files)
    CHECK(f.bytes.find("wall_clock") == std::string::npos);
}

TEST_CASE("validate experiment reads an MDP document") {
  MdpDistribution d = gen_proposition1_instance(2);
  std::string good = tmp_path("good_mdp.json");
  write_text_file(good, mdp_to_json(d.member(0), 2));
  ExperimentConfig cfg = config_from_json_text(
      R"({"experiment":"validate","instance":{"file":")" + good + R"("}})");
  RunResult r = run(cfg);
  const NamedFile* v = find_file(r, "validation.txt");
  REQUIRE(v != nullptr);
  CHECK(v->bytes.find("ok") != std::string::npos);

  TabularMdp broken = d.member(0);
  broken.rew(0, 0, 0) = 2.0;
  std::string bad = tmp_path("bad_mdp.json");
  write_text_file(bad, mdp_to_json(broken, 2));
  ExperimentConfig bad_cfg = config_from_json_text(
      R"({"experiment":"validate","instance":{"file":")" + bad + R"("}})");
  CHECK_THROWS_AS(run(bad_cfg), std::runtime_error);
}

TEST_CASE("report fits the synthetic square-root curve") {
  CsvWriter w({"seed", "test_draw", "episode", "phase", "pair_index", "return",
               "inst_regret", "cum_regret"});
  for (int k = 1; k <= 400; ++k) {
    w.cell(0).cell(0).cell(k).cell(1).cell(0).cell(0.0).cell(0.0);
    w.cell(std::sqrt(double(k)));
    w.endrow();
  }
  std::string path = tmp_path("sqrt_regret.csv");
  write_text_file(path, w.text());
  std::string rep = report_text({path});
  std::vector<std::string> row = summary_row(rep, path);
  REQUIRE(row.size() == 8);
  CHECK(row[1] == "regret");
  CHECK(std::abs(std::stod(row[6]) - 0.5) < 0.01);
  CHECK(std::stod(row[5]) == 0.0);  // single run: stderr column all zero
}

TEST_CASE("report pulls C(D) context from sibling metadata") {
  ExperimentConfig cfg = config_from_json_text(
      R"({"experiment":"pce","instance":{"generator":"prop1","M":3},
          "K":100,"num_seeds":1,"num_test_draws":2,
          "oracle":{"white_box":true},
          "out_dir":")" + tmp_path("ctx") + R"("})");
  RunResult r = run(cfg);
  write_run_files(cfg, r, 0.25);
  std::string regret = (std::filesystem::path(cfg.out_dir) / "regret.csv").string();
  REQUIRE(std::filesystem::exists(regret));
  std::string rep = report_text({regret});
  std::vector<std::string> row = summary_row(rep, regret);
  REQUIRE(row.size() == 8);
  CHECK(row[7] == "3");  // all of prop1(3) needed at delta = 0.1

  std::string alone = tmp_path("alone.csv");
  write_text_file(alone, read_text_file(regret));
  std::vector<std::string> bare = summary_row(report_text({alone}), alone);
  REQUIRE(bare.size() == 8);
  CHECK(bare[7].empty());  // no metadata, no context
}

TEST_CASE("report handles empty input and rejects foreign schemas") {
  std::string rep = report_text({});
  CHECK(rep.find("# summary") != std::string::npos);

  std::string foreign = tmp_path("foreign.csv");
  write_text_file(foreign, "alpha,beta\n1,2\n");
  CHECK_THROWS_AS(report_text({foreign}), std::runtime_error);
}

TEST_CASE("loglog_slope on exact power laws") {
  std::vector<std::pair<double, double>> pts;
  for (int k = 1; k <= 50; ++k)
    pts.push_back({double(k), std::pow(double(k), 0.7)});
  CHECK(loglog_slope(pts) == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(std::isnan(loglog_slope({{1.0, 1.0}})));
  CHECK(std::isnan(loglog_slope({{1.0, 1.0}, {2.0, 0.0}})));
}
