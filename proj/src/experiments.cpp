#include "mtrl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "json.hpp"
#include "mtrl/csv.hpp"
#include "mtrl/omerm.hpp"
#include "mtrl/pce.hpp"

namespace mtrl {

const char* kVersion = "0.1.0";

namespace {

using nlohmann::json;

std::string policy_document(const Policy& p) {
  json j{{"S", p.S}, {"A", p.A}, {"H", p.H}};
  j["probs"] = json::parse(policy_to_json_fragment(p));
  return j.dump(2) + "\n";
}

RunResult pce_run(const ExperimentConfig& cfg) {
  MdpDistribution dist = build_mdp_distribution(cfg.instance, cfg.master_seed);
  auto errs = validate_distribution(dist);
  if (!errs.empty())
    throw std::runtime_error("instance invalid: " + errs.front());

  PceExperimentConfig pc;
  pc.K = cfg.budget;
  pc.num_seeds = cfg.num_seeds;
  pc.num_test_draws = cfg.num_test_draws;
  pc.master_seed = cfg.master_seed;
  pc.oracle.white_box = cfg.white_box;
  pc.oracle.C_o = cfg.C_o;
  pc.pre.n_cap = cfg.algo.n_cap;
  pc.pre.max_phases = cfg.algo.max_phases;
  if (cfg.algo.pre_delta > 0.0) {
    pc.pre.delta = cfg.algo.pre_delta;
    pc.pre.epsilon = cfg.algo.pre_epsilon;
  }

  PceExperimentResult res = run_pce_experiment(dist, pc);

  RunResult out;
  for (int s = 0; s < int(res.seeds.size()); ++s) {
    const PolicyValueSet& set = res.seeds[std::size_t(s)].set;
    out.files.push_back({"policy_set_seed" + std::to_string(s) + ".json",
                         pvset_to_json(set, 2) + "\n"});
    if (set.n_capped)
      out.deviations.push_back("seed " + std::to_string(s) +
                               ": task-sample count capped at " +
                               std::to_string(cfg.algo.n_cap));
    if (set.stopped_without_rule)
      out.deviations.push_back("seed " + std::to_string(s) +
                               ": pre-training stopped before the rule held "
                               "(phase or cap limit)");
  }

  if (cfg.num_test_draws > 0) {
    CsvWriter w({"seed", "test_draw", "episode", "phase", "pair_index",
                 "return", "inst_regret", "cum_regret"});
    int fallbacks = 0;
    for (int s = 0; s < int(res.seeds.size()); ++s) {
      const PceSeedResult& sr = res.seeds[std::size_t(s)];
      for (int d = 0; d < int(sr.draws.size()); ++d) {
        const FinetuneResult& fr = sr.draws[std::size_t(d)];
        if (fr.fallback) ++fallbacks;
        for (const RegretRow& r : fr.rows) {
          w.cell(s).cell(d).cell(r.episode).cell(r.phase).cell(r.pair_index);
          w.cell(r.ret).cell(r.inst_regret).cell(r.cum_regret);
          w.endrow();
        }
      }
    }
    out.files.push_back({"regret.csv", w.text()});
    out.notes.push_back("mean final regret " +
                        format_double(res.mean_final_regret) + " +/- " +
                        format_double(res.stderr_final_regret) + " over " +
                        std::to_string(res.seeds.size()) + " seeds x " +
                        std::to_string(cfg.num_test_draws) + " draws");
    if (fallbacks > 0)
      out.notes.push_back(std::to_string(fallbacks) +
                          " draw(s) exhausted the pair set and fell back to "
                          "the from-scratch learner");
  }
  out.notes.push_back("pre-training oracle episodes: " +
                      std::to_string(res.total_pretrain_episodes));
  return out;
}

RunResult omerm_run(const ExperimentConfig& cfg) {
  MdpDistribution dist = build_mdp_distribution(cfg.instance, cfg.master_seed);
  auto errs = validate_distribution(dist);
  if (!errs.empty())
    throw std::runtime_error("instance invalid: " + errs.front());

  ImproveMode mode = cfg.algo.mode == "exhaustive"
                         ? ImproveMode::Exhaustive
                         : ImproveMode::CoordinateAscent;
  RunResult out;
  if (cfg.algo.high_prob) {
    CsvWriter w({"seed", "candidate", "mean_value", "chosen"});
    for (int s = 0; s < cfg.num_seeds; ++s) {
      RandomStream rng =
          derive_stream(cfg.master_seed, stream_id(streams::kOmerm, s));
      HighProbOptions opt;
      opt.C1 = cfg.algo.C1;
      opt.C2 = cfg.algo.C2;
      opt.N_override = cfg.algo.N > 0 ? std::uint64_t(cfg.algo.N) : 0;
      opt.train.mode = mode;
      opt.train.C2 = cfg.algo.C2;
      opt.train.K_override = cfg.budget;
      HighProbResult hp =
          omerm_high_prob(dist, cfg.epsilon, cfg.delta, rng, opt);
      for (int c = 0; c < int(hp.candidate_values.size()); ++c) {
        w.cell(s).cell(c).cell(hp.candidate_values[std::size_t(c)]);
        w.cell(c == hp.chosen ? 1 : 0);
        w.endrow();
      }
      out.files.push_back({"policy_seed" + std::to_string(s) + ".json",
                           policy_document(hp.policy)});
      if (opt.N_override > 0)
        out.deviations.push_back("seed " + std::to_string(s) +
                                 ": task-sample count overridden to " +
                                 std::to_string(hp.N));
      out.notes.push_back("seed " + std::to_string(s) + ": N=" +
                          std::to_string(hp.N) + " N1=" +
                          std::to_string(hp.N1) + " N2=" +
                          std::to_string(hp.N2) + " chose candidate " +
                          std::to_string(hp.chosen));
    }
    out.files.push_back({"candidates.csv", w.text()});
    if (cfg.budget > 0)
      out.deviations.push_back("training iteration count overridden to " +
                               std::to_string(cfg.budget));
    return out;
  }

  int N = cfg.algo.N > 0 ? cfg.algo.N : 4;
  for (int s = 0; s < cfg.num_seeds; ++s) {
    RandomStream draw_rng =
        derive_stream(cfg.master_seed, stream_id(streams::kOmerm, s));
    std::vector<EnvHandle> envs;
    for (int i = 0; i < N; ++i) {
      int idx = sample_index(dist, draw_rng);
      envs.emplace_back(dist.mdps[std::size_t(idx)],
                        derive_stream(cfg.master_seed,
                                      stream_id(streams::kTestEnv, s, i)));
    }
    OmermOptions opt;
    opt.mode = mode;
    opt.C2 = cfg.algo.C2;
    opt.K_override = cfg.budget;
    opt.collect_log = true;
    RandomStream alg_rng =
        derive_stream(cfg.master_seed, stream_id(streams::kTestAlg, s));
    OmermResult res = omerm_train(envs, cfg.epsilon, alg_rng, opt);

    CsvWriter w({"iter_k", "mdp_index", "avg_optimistic_value",
                 "episode_return"});
    for (const OmermLogRow& r : res.log) {
      w.cell(r.iter_k).cell(r.mdp_index).cell(r.avg_optimistic_value);
      w.cell(r.episode_return);
      w.endrow();
    }
    out.files.push_back(
        {"train_log_seed" + std::to_string(s) + ".csv", w.text()});
    out.files.push_back({"policy_seed" + std::to_string(s) + ".json",
                         policy_document(res.policy)});
    out.notes.push_back("seed " + std::to_string(s) + ": K=" +
                        std::to_string(res.K) + ", returned iterate " +
                        std::to_string(res.picked_iterate));
  }
  if (cfg.budget > 0)
    out.deviations.push_back("training iteration count overridden to " +
                             std::to_string(cfg.budget));
  return out;
}

RunResult bandit_ucb_run(const ExperimentConfig& cfg) {
  BanditDistribution bd =
      build_bandit_distribution(cfg.instance, cfg.master_seed);
  auto errs = validate_bandit_distribution(bd);
  if (!errs.empty())
    throw std::runtime_error("instance invalid: " + errs.front());
  CsvWriter w({"T", "seed", "algorithm", "pseudo_regret"});
  double total = 0.0;
  for (int s = 0; s < cfg.num_seeds; ++s) {
    std::uint64_t sid = stream_id(streams::kBandit, s);
    RandomStream rng = derive_stream(cfg.master_seed, sid);
    PullRecord rec = informed_elimination_run(bd, false, cfg.budget, rng);
    RandomStream again = derive_stream(cfg.master_seed, sid);
    int draw = sample_bandit_index(bd, again);
    double reg = pseudo_regret(rec, bd.instances[std::size_t(draw)]);
    total += reg;
    w.cell(cfg.budget).cell(s).cell("ucb").cell(reg).endrow();
  }
  RunResult out;
  out.files.push_back({"runs.csv", w.text()});
  out.notes.push_back(
      "mean pseudo-regret " + format_double(total / double(cfg.num_seeds)) +
      ", bound 9*sqrt(K*T*lnT) = " +
      format_double(ucb_regret_bound(bd.instances.front().arms(),
                                     cfg.budget)));
  return out;
}

RunResult bandit_ratio_run(const ExperimentConfig& cfg) {
  BanditDistribution bd =
      build_bandit_distribution(cfg.instance, cfg.master_seed);
  auto errs = validate_bandit_distribution(bd);
  if (!errs.empty())
    throw std::runtime_error("instance invalid: " + errs.front());
  std::vector<RatioRunRow> runs;
  std::vector<RatioRow> table = asymptotic_ratio_experiment(
      bd, cfg.T_grid, cfg.num_seeds, cfg.master_seed, &runs);

  CsvWriter wt({"T", "mean_informed", "mean_ucb", "ratio"});
  for (const RatioRow& r : table) {
    wt.cell(r.T).cell(r.mean_informed).cell(r.mean_ucb).cell(r.ratio);
    wt.endrow();
  }
  CsvWriter wr({"T", "seed", "algorithm", "pseudo_regret"});
  for (const RatioRunRow& r : runs) {
    wr.cell(r.T).cell(r.seed).cell(r.informed ? "informed" : "ucb");
    wr.cell(r.pseudo_regret);
    wr.endrow();
  }
  RunResult out;
  out.files.push_back({"ratio.csv", wt.text()});
  out.files.push_back({"runs.csv", wr.text()});
  out.notes.push_back(
      "illustrative comparison on one finite instance; the informed baseline "
      "stands in for (and lower-bounds no) optimal distribution-aware play");
  return out;
}

RunResult validate_run(const ExperimentConfig& cfg) {
  std::string text;
  try {
    text = read_text_file(cfg.instance.file);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("instance file is not valid JSON");

  std::ostringstream rep;
  std::vector<std::string> problems;
  if (j.contains("mdps")) {
    MdpDistribution d = distribution_from_json(text);
    problems = validate_distribution(d);
    rep << "distribution with " << d.size() << " members\n";
    for (int i = 0; i < d.size(); ++i)
      rep << "member " << i << ": S=" << d.member(i).S
          << " A=" << d.member(i).A << " H=" << d.member(i).H
          << " U1=" << format_double(assumption1_bound(d.member(i))) << "\n";
  } else {
    TabularMdp m = mdp_from_json(text);
    ValidationReport r = validate_mdp(m);
    problems = r.errors;
    rep << "single task: S=" << m.S << " A=" << m.A << " H=" << m.H
        << " U1=" << format_double(r.u1) << "\n";
  }
  if (!problems.empty()) {
    std::string msg = "validation failed:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::runtime_error(msg);
  }
  rep << "ok\n";
  RunResult out;
  out.files.push_back({"validation.txt", rep.str()});
  out.notes.push_back("instance file is valid");
  return out;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
  if (cfg.experiment == "pce") return pce_run(cfg);
  if (cfg.experiment == "omerm") return omerm_run(cfg);
  if (cfg.experiment == "bandit-ucb") return bandit_ucb_run(cfg);
  if (cfg.experiment == "bandit-ratio") return bandit_ratio_run(cfg);
  if (cfg.experiment == "validate") return validate_run(cfg);
  throw ConfigError("unknown experiment: " + cfg.experiment);
}

std::string run_metadata_json(const ExperimentConfig& cfg,
                              const RunResult& result, double wall_seconds) {
  json j;
  j["version"] = kVersion;
  j["config"] = json::parse(cfg.effective);
  j["deviations"] = result.deviations;
  j["notes"] = result.notes;
  j["files"] = json::array();
  for (const auto& f : result.files) j["files"].push_back(f.name);
  j["stream_layout"] =
      "stream id = role<<40 | seed<<20 | draw; roles: instance-gen 1, "
      "pretrain 2, test-env 3, test-alg 4, baseline-env 5, omerm 6, "
      "bandit 7, eval 8, draw 9";
  j["wall_clock_seconds"] = wall_seconds;
  return j.dump(2) + "\n";
}

void write_run_files(const ExperimentConfig& cfg, const RunResult& result,
                     double wall_seconds) {
  std::filesystem::create_directories(cfg.out_dir);
  for (const auto& f : result.files)
    write_text_file(cfg.out_dir + "/" + f.name, f.bytes);
  write_text_file(cfg.out_dir + "/metadata.json",
                  run_metadata_json(cfg, result, wall_seconds));
}

// ---------------------------------------------------------------- report --

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct Welford {
  std::uint64_t n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
  double stderr_() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / double(n - 1) / double(n));
  }
};

double parse_num(const std::string& s, const std::string& file) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("bad numeric field '" + s + "' in " + file);
  }
}

struct FileSummary {
  std::string path, kind, algorithm;
  double x_final = 0.0;     // final episode or largest T
  double final_mean = 0.0;
  double final_stderr = 0.0;
  double slope = std::nan("");
  int c_of_d = -1;
};

}  // namespace

double loglog_slope(const std::vector<std::pair<double, double>>& xy) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [x, y] : xy) {
    if (!(x > 0.0) || !(y > 0.0)) continue;
    double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  double den = double(n) * sxx - sx * sx;
  if (n < 2 || std::abs(den) < 1e-30) return std::nan("");
  return (double(n) * sxy - sx * sy) / den;
}

std::string report_text(const std::vector<std::string>& csv_paths) {
  std::ostringstream body, summary;
  std::vector<FileSummary> sums;
  bool any_ratio = false;

  for (const std::string& path : csv_paths) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line))
      throw std::runtime_error("empty CSV: " + path);
    std::vector<std::string> header = split_line(line);
    std::string joined;
    for (std::size_t i = 0; i < header.size(); ++i)
      joined += (i ? "," : "") + header[i];

    if (joined ==
        "seed,test_draw,episode,phase,pair_index,return,inst_regret,"
        "cum_regret") {
      std::vector<Welford> per_episode;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_line(line);
        if (f.size() != 8)
          throw std::runtime_error("schema mismatch in " + path);
        std::uint64_t ep = std::uint64_t(parse_num(f[2], path));
        if (ep == 0) throw std::runtime_error("episode 0 in " + path);
        if (per_episode.size() < ep) per_episode.resize(ep);
        per_episode[ep - 1].add(parse_num(f[7], path));
      }
      body << "# file: " << path << "\n";
      body << "episode,mean_cum_regret,stderr\n";
      std::vector<std::pair<double, double>> curve;
      for (std::size_t k = 0; k < per_episode.size(); ++k) {
        const Welford& w = per_episode[k];
        body << (k + 1) << ',' << format_double(w.mean) << ','
             << format_double(w.stderr_()) << "\n";
        curve.push_back({double(k + 1), w.mean});
      }
      FileSummary fs;
      fs.path = path;
      fs.kind = "regret";
      if (!per_episode.empty()) {
        fs.x_final = double(per_episode.size());
        fs.final_mean = per_episode.back().mean;
        fs.final_stderr = per_episode.back().stderr_();
        fs.slope = loglog_slope(curve);
      }
      sums.push_back(fs);
    } else if (joined == "T,seed,algorithm,pseudo_regret") {
      std::map<std::pair<double, std::string>, Welford> groups;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_line(line);
        if (f.size() != 4)
          throw std::runtime_error("schema mismatch in " + path);
        groups[{parse_num(f[0], path), f[2]}].add(parse_num(f[3], path));
      }
      body << "# file: " << path << "\n";
      body << "T,algorithm,mean_pseudo_regret,stderr\n";
      std::map<std::string, std::vector<std::pair<double, double>>> curves;
      for (const auto& [key, w] : groups) {
        body << format_double(key.first) << ',' << key.second << ','
             << format_double(w.mean) << ',' << format_double(w.stderr_())
             << "\n";
        curves[key.second].push_back({key.first, w.mean});
      }
      for (const auto& [alg, curve] : curves) {
        FileSummary fs;
        fs.path = path;
        fs.kind = "bandit";
        fs.algorithm = alg;
        fs.x_final = curve.back().first;
        const Welford& w = groups.at({curve.back().first, alg});
        fs.final_mean = w.mean;
        fs.final_stderr = w.stderr_();
        fs.slope = loglog_slope(curve);
        sums.push_back(fs);
      }
    } else if (joined == "T,mean_informed,mean_ucb,ratio") {
      any_ratio = true;
      body << "# file: " << path << "\n";
      body << "T,mean_informed,mean_ucb,ratio\n";
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        body << line << "\n";
      }
    } else {
      throw std::runtime_error("unrecognized CSV schema in " + path +
                               " (header: " + joined + ")");
    }

    // C(D) context from the sibling metadata document, when present.
    std::filesystem::path meta =
        std::filesystem::path(path).parent_path() / "metadata.json";
    if (!sums.empty() && sums.back().path == path &&
        std::filesystem::exists(meta)) {
      try {
        json mj = json::parse(read_text_file(meta.string()));
        const json& cj = mj.at("config");
        InstanceSpec spec;
        const json& ji = cj.at("instance");
        spec.generator = ji.value("generator", "");
        spec.file = ji.value("file", "");
        spec.M = ji.value("M", 0);
        spec.gap = ji.value("gap", 0.0);
        spec.lambda = ji.value("lambda", 1.0);
        spec.S = ji.value("S", 0);
        spec.A = ji.value("A", 0);
        spec.H = ji.value("H", 0);
        spec.num_mdps = ji.value("num_mdps", 0);
        spec.noise = ji.value("noise", "bernoulli");
        std::uint64_t seed = cj.value("master_seed", std::uint64_t(1));
        double budget = cj.value("K", 0.0);
        if (budget == 0.0) budget = cj.value("T", 0.0);
        if (budget == 0.0 && !sums.empty()) budget = sums.back().x_final;
        if (budget > 0.0) {
          MdpDistribution d = build_mdp_distribution(spec, seed);
          int c = complexity_from_probs(d.probs, 1.0 / std::sqrt(budget));
          for (auto& fsum : sums)
            if (fsum.path == path) fsum.c_of_d = c;
        }
      } catch (const std::exception&) {
        // metadata without a usable instance block: no context column
      }
    }
  }

  std::ostringstream out;
  if (any_ratio)
    out << "# ratio files are an illustration on one finite instance; no "
           "result here simulates the infimum over all algorithms\n";
  out << body.str();
  out << "# summary\n";
  out << "file,kind,algorithm,x_final,final_mean,final_stderr,slope,c_of_d\n";
  std::vector<std::pair<double, double>> cross;
  for (const FileSummary& fs : sums) {
    out << csv_field(fs.path) << ',' << fs.kind << ',' << fs.algorithm << ','
        << format_double(fs.x_final) << ',' << format_double(fs.final_mean)
        << ',' << format_double(fs.final_stderr) << ','
        << (std::isnan(fs.slope) ? std::string() : format_double(fs.slope))
        << ',' << (fs.c_of_d >= 0 ? std::to_string(fs.c_of_d) : std::string())
        << "\n";
    if (fs.kind == "regret") cross.push_back({fs.x_final, fs.final_mean});
  }
  if (cross.size() >= 2) {
    double s = loglog_slope(cross);
    if (!std::isnan(s))
      out << "# cross-file slope of final mean regret vs budget: "
          << format_double(s) << "\n";
  }
  return out.str();
}

}  // namespace mtrl
