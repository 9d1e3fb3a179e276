#include "mtrl/pce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "json_io.hpp"
#include "mtrl/omerm.hpp"

namespace mtrl {

std::vector<int> greedy_cover(const CoverMatrix& A, double delta) {
  int n = A.n;
  if (n == 0) return {};
  for (int i = 0; i < n; ++i)
    if (!A.at(i, i))
      throw std::invalid_argument("greedy_cover: diagonal must be true");
  double target = (1.0 - 3.0 * delta) * double(n);

  std::vector<int> picks;
  std::vector<char> row_alive(n, 1), col_used(n, 0);
  std::vector<int> count(n, 0);  // rows still alive covered by column j
  for (int j = 0; j < n; ++j) {
    int c = 0;
    for (int i = 0; i < n; ++i) c += A.at(i, j);
    count[j] = c;
  }
  std::int64_t covered = 0;
  while (double(covered) < target) {
    int best = -1;
    for (int j = 0; j < n; ++j)
      if (!col_used[j] && (best < 0 || count[j] > count[best])) best = j;
    if (best < 0) break;  // unreachable while the diagonal holds
    picks.push_back(best);
    col_used[best] = 1;
    covered += count[best];
    for (int i = 0; i < n; ++i)
      if (row_alive[i] && A.at(i, best)) {
        row_alive[i] = 0;
        for (int j = 0; j < n; ++j) count[j] -= A.at(i, j);
      }
  }
  return picks;
}

double elimination_threshold(double epsilon, double delta, std::uint64_t K,
                             std::uint64_t n) {
  return 4.0 * epsilon +
         std::sqrt(2.0 * std::log(4.0 * double(K) / delta) / double(n));
}

namespace {

struct PhaseData {
  std::vector<Policy> policies;       // per sampled task j
  std::vector<std::vector<double>> v; // v[i][j]
  std::uint64_t episodes = 0;
};

PhaseData run_phase(const MdpDistribution& dist, const std::vector<int>& idx,
                    double epsilon, double delta,
                    const OracleSettings& oracle, RandomStream& rng) {
  int N = int(idx.size());
  PhaseData out;
  out.v.assign(N, std::vector<double>(N, 0.0));
  double learn_conf = std::log(double(N) / delta);
  double eval_conf = std::log(double(N) * N / delta);

  if (oracle.white_box) {
    // Exact oracles depend only on the support member, so duplicate samples
    // share one oracle call each; results are identical to calling per task.
    std::map<int, int> first;  // support index -> slot
    std::vector<int> slot_of(N);
    std::vector<int> uniq;
    for (int j = 0; j < N; ++j) {
      auto it = first.find(idx[j]);
      if (it == first.end()) {
        first[idx[j]] = int(uniq.size());
        slot_of[j] = int(uniq.size());
        uniq.push_back(idx[j]);
      } else {
        slot_of[j] = it->second;
      }
    }
    int U = int(uniq.size());
    std::vector<Policy> upol(U);
    for (int u = 0; u < U; ++u) {
      EnvHandle env(dist.mdps[uniq[u]], RandomStream(rng.next_u64()));
      upol[u] = learn_policy(env, epsilon / 2.0, learn_conf, rng, oracle).first;
    }
    std::vector<std::vector<double>> uval(U, std::vector<double>(U, 0.0));
    for (int ui = 0; ui < U; ++ui) {
      EnvHandle env(dist.mdps[uniq[ui]], RandomStream(rng.next_u64()));
      for (int uj = 0; uj < U; ++uj)
        uval[ui][uj] =
            evaluate_policy(env, upol[uj], epsilon / 2.0, eval_conf, oracle)
                .first;
    }
    out.policies.resize(N);
    for (int j = 0; j < N; ++j) out.policies[j] = upol[slot_of[j]];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        out.v[i][j] = uval[slot_of[i]][slot_of[j]];
    return out;
  }

  std::vector<EnvHandle> envs;
  envs.reserve(N);
  for (int j = 0; j < N; ++j)
    envs.emplace_back(dist.mdps[idx[j]], RandomStream(rng.next_u64()));
  out.policies.reserve(N);
  for (int j = 0; j < N; ++j) {
    auto [pi, rep] =
        learn_policy(envs[j], epsilon / 2.0, learn_conf, rng, oracle);
    out.policies.push_back(std::move(pi));
    out.episodes += rep.episodes_used;
  }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      auto [v, rep] = evaluate_policy(envs[i], out.policies[j], epsilon / 2.0,
                                      eval_conf, oracle);
      out.v[i][j] = v;
      out.episodes += rep.episodes_used;
    }
  return out;
}

}  // namespace

PolicyValueSet pretrain(const MdpDistribution& dist, const PretrainOptions& opt,
                        const OracleSettings& oracle, RandomStream& rng) {
  double delta, epsilon;
  if (opt.K > 0) {
    if (opt.K < 2) throw std::invalid_argument("pretrain: K >= 2");
    delta = epsilon = 1.0 / std::sqrt(double(opt.K));
  } else {
    delta = opt.delta;
    epsilon = opt.epsilon;
  }
  if (!(delta > 0.0 && delta < 1.0) || !(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("pretrain: need delta in (0,1), eps in (0,1]");

  PolicyValueSet set;
  set.epsilon = epsilon;
  set.delta = delta;
  set.white_box = oracle.white_box;

  std::uint64_t want =
      std::uint64_t(std::ceil(std::log(1.0 / delta) / (delta * delta)));
  std::uint64_t cap = opt.n_cap > 0 ? std::uint64_t(opt.n_cap)
                                    : std::numeric_limits<std::uint64_t>::max();
  if (want > cap) set.n_capped = true;
  std::uint64_t N = std::min(want, cap);

  for (int phase = 0; phase < std::max(1, opt.max_phases); ++phase) {
    std::vector<int> idx(N);
    for (auto& i : idx) i = sample_index(dist, rng);
    PhaseData data = run_phase(dist, idx, epsilon, delta, oracle, rng);
    set.oracle_episodes += data.episodes;

    CoverMatrix A{int(N)};
    for (std::uint64_t i = 0; i < N; ++i)
      for (std::uint64_t j = 0; j < N; ++j)
        A.set(int(i), int(j),
              cnd(data.v[i][j], data.v[i][i], data.v[j][j], epsilon));
    std::vector<int> picks = greedy_cover(A, delta);
    std::uint64_t U = picks.size();
    if (U >= N)
      throw std::runtime_error(
          "pretrain: cover size reached the sample count (degenerate phase)");
    double lhs = std::sqrt(double(U) * std::log(2.0 * double(N) / delta) /
                           double(N - U));
    bool accepted = lhs <= delta;
    set.phases.push_back({int(N), int(U), lhs, accepted});

    bool at_cap = N >= cap;
    bool last = phase + 1 >= std::max(1, opt.max_phases);
    if (accepted || at_cap || last) {
      set.stopped_without_rule = !accepted;
      if (at_cap && !accepted) set.n_capped = true;
      set.pairs.clear();
      for (int j : picks)
        set.pairs.push_back({data.policies[j], data.v[j][j]});
      return set;
    }
    N = std::min(N * 2, cap);
  }
  return set;  // unreachable; loop always returns
}

namespace {

// Shared by the fine-tune fallback and the from-scratch baseline: online
// optimistic value iteration, one policy update per episode.
void run_online_learner(EnvHandle& env, const TabularMdp& model, double vstar,
                        std::uint64_t first_episode, std::uint64_t last_episode,
                        double& cum, FinetuneResult& out) {
  std::uint64_t budget = last_episode - first_episode + 1;
  int S = env.S(), A = env.A(), H = env.H();
  OmermSizes sz{S, A, H, 1, budget};
  std::vector<EmpiricalModel> models;
  models.emplace_back(S, A, H, env.s1());
  Policy pi = Policy::uniform(S, A, H);
  for (std::uint64_t k = first_episode; k <= last_episode; ++k) {
    pi = improve_policy(models, sz, pi, ImproveMode::CoordinateAscent);
    Trajectory tr = env.rollout(pi);
    models[0].update(tr);
    double inst = vstar - exact_value_start(model, pi);
    cum += inst;
    out.rows.push_back({k, -1, -1, tr.total_return, inst, cum});
  }
}

}  // namespace

FinetuneResult finetune(const PolicyValueSet& set, EnvHandle env,
                        std::uint64_t K, double delta, double epsilon) {
  if (K < 1) throw std::invalid_argument("finetune: K >= 1");
  FinetuneResult out;
  out.rows.reserve(K);

  // White-box access below is regret measurement only; decisions depend
  // exclusively on observed returns.
  const TabularMdp& model = env.white_box(WhiteBoxKey{});
  double vstar = optimal_policy(model).second.v(0, model.s1);

  int P = int(set.pairs.size());
  std::vector<char> alive(P, 1);
  double cum = 0.0;
  int phase = 1;

  auto next_live = [&]() {
    int best = -1;
    for (int l = 0; l < P; ++l)
      if (alive[l] && (best < 0 || set.pairs[l].v > set.pairs[best].v))
        best = l;
    return best;
  };

  int l = next_live();
  double v_pol = 0.0;
  if (l >= 0) v_pol = exact_value_start(model, set.pairs[l].policy);
  std::uint64_t k0 = 1;
  double sum = 0.0;

  for (std::uint64_t k = 1; k <= K; ++k) {
    if (l < 0) {
      out.fallback = true;
      out.fallback_episode = k;
      run_online_learner(env, model, vstar, k, K, cum, out);
      break;
    }
    Trajectory tr = env.rollout(set.pairs[l].policy);
    sum += tr.total_return;
    std::uint64_t n = k - k0 + 1;
    double mean = sum / double(n);
    double inst = vstar - v_pol;
    cum += inst;
    out.rows.push_back({k, phase, l, tr.total_return, inst, cum});
    double thr = elimination_threshold(epsilon, delta, K, n);
    if (std::abs(mean - set.pairs[l].v) >= thr) {
      out.events.push_back({k, l, mean, thr});
      alive[l] = 0;
      ++phase;
      k0 = k + 1;
      sum = 0.0;
      l = next_live();
      if (l >= 0) v_pol = exact_value_start(model, set.pairs[l].policy);
    }
  }
  out.total_regret = cum;
  return out;
}

FinetuneResult single_task_baseline(EnvHandle env, std::uint64_t K) {
  FinetuneResult out;
  out.rows.reserve(K);
  const TabularMdp& model = env.white_box(WhiteBoxKey{});
  double vstar = optimal_policy(model).second.v(0, model.s1);
  double cum = 0.0;
  run_online_learner(env, model, vstar, 1, K, cum, out);
  out.total_regret = cum;
  return out;
}

std::string pvset_to_json(const PolicyValueSet& set, int indent) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& pv : set.pairs) {
    nlohmann::json pol = nlohmann::json::array();
    for (int h = 0; h < pv.policy.H; ++h) {
      nlohmann::json hs = nlohmann::json::array();
      for (int s = 0; s < pv.policy.S; ++s) {
        nlohmann::json row = nlohmann::json::array();
        for (int a = 0; a < pv.policy.A; ++a) row.push_back(pv.policy.at(h, s, a));
        hs.push_back(std::move(row));
      }
      pol.push_back(std::move(hs));
    }
    pairs.push_back({{"v", pv.v}, {"policy", pol}});
  }
  nlohmann::json phases = nlohmann::json::array();
  for (const auto& p : set.phases)
    phases.push_back({{"N", p.N},
                      {"cover_size", p.cover_size},
                      {"stop_lhs", p.stop_lhs},
                      {"accepted", p.accepted}});
  nlohmann::json j{{"epsilon", set.epsilon},
                   {"delta", set.delta},
                   {"pairs", pairs},
                   {"meta",
                    {{"phases", phases},
                     {"oracle_episodes", set.oracle_episodes},
                     {"white_box", set.white_box},
                     {"n_capped", set.n_capped},
                     {"stopped_without_rule", set.stopped_without_rule}}}};
  return j.dump(indent);
}

PolicyValueSet pvset_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PolicyValueSet set;
  set.epsilon = j.at("epsilon").get<double>();
  set.delta = j.at("delta").get<double>();
  for (const auto& jp : j.at("pairs")) {
    const auto& pol = jp.at("policy");
    int H = int(pol.size());
    int S = int(pol.at(0).size());
    int A = int(pol.at(0).at(0).size());
    Policy p(S, A, H);
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
          p.at(h, s, a) = pol.at(h).at(s).at(a).get<double>();
    set.pairs.push_back({std::move(p), jp.at("v").get<double>()});
  }
  if (j.contains("meta")) {
    const auto& m = j.at("meta");
    set.oracle_episodes = m.value("oracle_episodes", std::uint64_t(0));
    set.white_box = m.value("white_box", false);
    set.n_capped = m.value("n_capped", false);
    set.stopped_without_rule = m.value("stopped_without_rule", false);
    if (m.contains("phases"))
      for (const auto& jp : m.at("phases"))
        set.phases.push_back({jp.at("N").get<int>(),
                              jp.at("cover_size").get<int>(),
                              jp.at("stop_lhs").get<double>(),
                              jp.at("accepted").get<bool>()});
  }
  return set;
}

PceExperimentResult run_pce_experiment(const MdpDistribution& dist,
                                       const PceExperimentConfig& cfg) {
  PceExperimentResult res;
  std::vector<double> finals;
  for (int seed = 0; seed < cfg.num_seeds; ++seed) {
    PceSeedResult sr;
    RandomStream pre_rng =
        derive_stream(cfg.master_seed, stream_id(streams::kPretrain, seed));
    PretrainOptions pre = cfg.pre;
    if (pre.K == 0 && pre.delta == 0.0) pre.K = cfg.K;
    sr.set = pretrain(dist, pre, cfg.oracle, pre_rng);
    res.total_pretrain_episodes += sr.set.oracle_episodes;

    double delta = 1.0 / std::sqrt(double(cfg.K));
    for (int d = 0; d < cfg.num_test_draws; ++d) {
      RandomStream draw_rng =
          derive_stream(cfg.master_seed, stream_id(streams::kDraw, seed, d));
      int idx = sample_index(dist, draw_rng);
      sr.draw_indices.push_back(idx);
      EnvHandle env(dist.mdps[idx],
                    derive_stream(cfg.master_seed,
                                  stream_id(streams::kTestEnv, seed, d)));
      FinetuneResult fr = finetune(sr.set, env, cfg.K, delta, delta);
      finals.push_back(fr.total_regret);
      sr.draws.push_back(std::move(fr));
    }
    res.seeds.push_back(std::move(sr));
  }
  if (!finals.empty()) {
    double mean = 0.0;
    for (double f : finals) mean += f;
    mean /= double(finals.size());
    double var = 0.0;
    for (double f : finals) var += (f - mean) * (f - mean);
    res.mean_final_regret = mean;
    res.stderr_final_regret =
        finals.size() > 1
            ? std::sqrt(var / double(finals.size() - 1) / double(finals.size()))
            : 0.0;
  }
  return res;
}

}  // namespace mtrl
