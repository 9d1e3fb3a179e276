#include "mtrl/omerm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mtrl {

double omerm_bonus(const OmermSizes& sz, double count) {
  double arg = 8.0 * double(sz.S) * double(sz.A) * double(sz.N) *
               double(sz.H) * double(sz.K);
  double n = count >= 1.0 ? count : 1.0;
  return std::sqrt(8.0 * double(sz.S) * std::log(arg) / n);
}

void EmpiricalModel::update(const Trajectory& tr) {
  if (int(tr.states.size()) != H)
    throw std::invalid_argument("EmpiricalModel::update: bad trajectory");
  for (int h = 0; h < H; ++h) {
    int s = tr.states[h], a = tr.actions[h];
    int s2 = (h + 1 < H) ? tr.states[h + 1] : tr.final_state;
    n_sa[idx(h, s, a)] += 1.0;
    n_sas[tidx(h, s, a, s2)] += 1.0;
    rew_sum[idx(h, s, a)] += tr.rewards[h];
  }
  ++episodes;
}

OptimisticValueTable optimistic_eval(const EmpiricalModel& m,
                                     const Policy& pi, const OmermSizes& sz) {
  if (!pi.same_shape(m.S, m.A, m.H))
    throw std::invalid_argument("optimistic_eval: shape mismatch");
  OptimisticValueTable t;
  t.S = m.S; t.A = m.A; t.H = m.H;
  t.qhat.assign(std::size_t(m.H) * m.S * m.A, 0.0);
  t.vhat.assign(std::size_t(m.H + 1) * m.S, 0.0);
  for (int h = m.H - 1; h >= 0; --h)
    for (int s = 0; s < m.S; ++s) {
      double vs = 0.0;
      for (int a = 0; a < m.A; ++a) {
        double q = m.rhat(h, s, a) + omerm_bonus(sz, m.n_sa[m.idx(h, s, a)]);
        for (int s2 = 0; s2 < m.S; ++s2)
          q += m.phat(h, s, a, s2) * t.vhat[std::size_t(h + 1) * m.S + s2];
        if (q > 1.0) q = 1.0;
        t.qhat[(std::size_t(h) * m.S + s) * m.A + a] = q;
        vs += pi.at(h, s, a) * q;
      }
      t.vhat[std::size_t(h) * m.S + s] = vs;
    }
  return t;
}

namespace {

// Bonus-augmented rewards and normalized transition estimates, flattened for
// the inner enumeration/sweep loops.
struct Tables {
  int S, A, H, s1;
  std::vector<double> rb;    // H*S*A: Rhat + bonus
  std::vector<double> phat;  // H*S*A*S

  Tables(const EmpiricalModel& m, const OmermSizes& sz)
      : S(m.S), A(m.A), H(m.H), s1(m.s1),
        rb(std::size_t(m.H) * m.S * m.A),
        phat(std::size_t(m.H) * m.S * m.A * m.S) {
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          std::size_t i = (std::size_t(h) * S + s) * A + a;
          rb[i] = m.rhat(h, s, a) + omerm_bonus(sz, m.n_sa[i]);
          for (int s2 = 0; s2 < S; ++s2)
            phat[i * S + s2] = m.phat(h, s, a, s2);
        }
  }

  // Start value of a deterministic policy given as actions[h*S+s].
  double eval_actions(const std::vector<int>& actions,
                      std::vector<double>& v, std::vector<double>& vn) const {
    std::fill(vn.begin(), vn.end(), 0.0);
    for (int h = H - 1; h >= 0; --h) {
      for (int s = 0; s < S; ++s) {
        std::size_t i = (std::size_t(h) * S + s) * A + actions[std::size_t(h) * S + s];
        double q = rb[i];
        const double* row = &phat[i * S];
        for (int s2 = 0; s2 < S; ++s2) q += row[s2] * vn[s2];
        v[s] = q > 1.0 ? 1.0 : q;
      }
      std::swap(v, vn);
    }
    return vn[s1];
  }

  // Full Vhat rows under a stochastic policy; vrows has (H+1)*S entries.
  void eval_policy_rows(const Policy& pi, std::vector<double>& vrows) const {
    std::fill(vrows.begin(), vrows.end(), 0.0);
    for (int h = H - 1; h >= 0; --h) refresh_row(pi, h, vrows);
  }

  // Recomputes Vhat row h assuming rows h+1.. are current.
  void refresh_row(const Policy& pi, int h, std::vector<double>& vrows) const {
    for (int s = 0; s < S; ++s) {
      double vs = 0.0;
      for (int a = 0; a < A; ++a) {
        std::size_t i = (std::size_t(h) * S + s) * A + a;
        double q = rb[i];
        const double* row = &phat[i * S];
        for (int s2 = 0; s2 < S; ++s2)
          q += row[s2] * vrows[std::size_t(h + 1) * S + s2];
        if (q > 1.0) q = 1.0;
        vs += pi.at(h, s, a) * q;
      }
      vrows[std::size_t(h) * S + s] = vs;
    }
  }

  double qhat(const std::vector<double>& vrows, int h, int s, int a) const {
    std::size_t i = (std::size_t(h) * S + s) * A + a;
    double q = rb[i];
    const double* row = &phat[i * S];
    for (int s2 = 0; s2 < S; ++s2)
      q += row[s2] * vrows[std::size_t(h + 1) * S + s2];
    return q > 1.0 ? 1.0 : q;
  }
};

double average_start_value(const std::vector<Tables>& tabs, const Policy& pi,
                           std::vector<double>& vrows) {
  double sum = 0.0;
  for (const Tables& t : tabs) {
    t.eval_policy_rows(pi, vrows);
    sum += vrows[t.s1];  // row 0
  }
  return sum / double(tabs.size());
}

Policy exhaustive_improve(const std::vector<Tables>& tabs, int S, int A, int H,
                          double* objective_out) {
  std::uint64_t n = deterministic_policy_count(S, A, H, kExhaustiveCap);
  if (n > kExhaustiveCap)
    throw std::invalid_argument(
        "improve_policy: Exhaustive mode beyond the A^(S*H) cap");
  int cells = S * H;
  std::vector<int> actions(cells, 0), best_actions(cells, 0);
  std::vector<double> v(S), vn(S);
  double best = -1.0;
  for (std::uint64_t rank = 0; rank < n; ++rank) {
    double obj = 0.0;
    for (const Tables& t : tabs) obj += t.eval_actions(actions, v, vn);
    obj /= double(tabs.size());
    if (obj > best) {  // strict: first (lexicographically smallest) wins
      best = obj;
      best_actions = actions;
    }
    // advance the action tuple; last cell varies fastest
    for (int c = cells - 1; c >= 0; --c) {
      if (++actions[c] < A) break;
      actions[c] = 0;
    }
  }
  if (objective_out) *objective_out = best;
  return Policy::from_actions(S, A, H, best_actions);
}

Policy coordinate_ascent_improve(const std::vector<Tables>& tabs, int S, int A,
                                 int H, const Policy& prev,
                                 double* objective_out) {
  Policy cur = prev.same_shape(S, A, H) ? prev : Policy::uniform(S, A, H);
  int N = int(tabs.size());
  std::vector<std::vector<double>> vrows(N,
      std::vector<double>(std::size_t(H + 1) * S, 0.0));
  std::vector<double> scratch(std::size_t(H + 1) * S, 0.0);
  double obj = average_start_value(tabs, cur, scratch);
  const int kMaxSweeps = 50;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    Policy before = cur;
    for (int i = 0; i < N; ++i) tabs[i].eval_policy_rows(cur, vrows[i]);
    bool changed = false;
    for (int h = H - 1; h >= 0; --h) {
      for (int s = 0; s < S; ++s) {
        int best_a = 0;
        double best_q = -1.0;
        for (int a = 0; a < A; ++a) {
          double q = 0.0;
          for (int i = 0; i < N; ++i) q += tabs[i].qhat(vrows[i], h, s, a);
          if (q > best_q) {
            best_q = q;
            best_a = a;
          }
        }
        bool already = cur.at(h, s, best_a) == 1.0;
        if (!already) {
          for (int a = 0; a < A; ++a) cur.at(h, s, a) = (a == best_a) ? 1.0 : 0.0;
          changed = true;
        }
      }
      // later rows are final for this sweep; refresh row h before moving up
      for (int i = 0; i < N; ++i) tabs[i].refresh_row(cur, h, vrows[i]);
    }
    double new_obj = 0.0;
    for (int i = 0; i < N; ++i) new_obj += vrows[i][tabs[i].s1];
    new_obj /= double(N);
    if (new_obj < obj - 1e-12) {
      cur = before;  // unweighted update can regress; keep the invariant
      break;
    }
    obj = new_obj;
    if (!changed) break;
  }
  if (objective_out) *objective_out = obj;
  return cur;
}

}  // namespace

Policy improve_policy(const std::vector<EmpiricalModel>& models,
                      const OmermSizes& sz, const Policy& prev,
                      ImproveMode mode, double* objective_out) {
  if (models.empty())
    throw std::invalid_argument("improve_policy: no models");
  int S = models[0].S, A = models[0].A, H = models[0].H;
  std::vector<Tables> tabs;
  tabs.reserve(models.size());
  for (const auto& m : models) {
    if (m.S != S || m.A != A || m.H != H)
      throw std::invalid_argument("improve_policy: mixed shapes");
    tabs.emplace_back(m, sz);
  }
  if (mode == ImproveMode::Exhaustive)
    return exhaustive_improve(tabs, S, A, H, objective_out);
  return coordinate_ascent_improve(tabs, S, A, H, prev, objective_out);
}

std::uint64_t omerm_schedule(int S, int A, int H, double epsilon, double C2) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("omerm_schedule: epsilon in (0,1]");
  double k = C2 * double(S) * S * A * double(H) * H *
             std::log(double(S) * A * H / epsilon) / (epsilon * epsilon);
  return std::uint64_t(std::ceil(k));
}

OmermResult omerm_train(std::vector<EnvHandle>& envs, double epsilon,
                        RandomStream& rng, const OmermOptions& opt) {
  if (envs.empty()) throw std::invalid_argument("omerm_train: no tasks");
  int S = envs[0].S(), A = envs[0].A(), H = envs[0].H();
  for (const auto& e : envs)
    if (e.S() != S || e.A() != A || e.H() != H)
      throw std::invalid_argument("omerm_train: tasks must share (S,A,H)");
  int N = int(envs.size());

  OmermResult res;
  res.K = opt.K_override ? opt.K_override : omerm_schedule(S, A, H, epsilon, opt.C2);
  res.picked_iterate = 1 + rng.uniform_int(res.K);

  OmermSizes sz{S, A, H, N, res.K};
  std::vector<EmpiricalModel> models;
  models.reserve(envs.size());
  for (const auto& e : envs) models.emplace_back(S, A, H, e.s1());

  Policy pi = Policy::uniform(S, A, H);
  for (std::uint64_t k = 1; k <= res.K; ++k) {
    double avg = 0.0;
    pi = improve_policy(models, sz, pi, opt.mode, &avg);
    for (int i = 0; i < N; ++i) {
      Trajectory tr = envs[i].rollout(pi);
      models[i].update(tr);
      if (opt.collect_log)
        res.log.push_back({k, i, avg, tr.total_return});
    }
    if (k == res.picked_iterate) res.policy = pi;
  }
  return res;
}

HighProbResult omerm_high_prob(const MdpDistribution& dist, double epsilon,
                               double delta, RandomStream& rng,
                               const HighProbOptions& opt) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("omerm_high_prob: eps, delta in (0,1)");
  const TabularMdp& m0 = dist.member(0);
  int S = m0.S, A = m0.A, H = m0.H;

  HighProbResult res;
  double cap_log = opt.log_capacity_override >= 0.0
                       ? opt.log_capacity_override
                       : double(S) * H * A * std::log(12.0 * H / epsilon);
  res.N = opt.N_override
              ? int(opt.N_override)
              : int(std::ceil(opt.C1 * (cap_log + std::log(1.0 / delta)) /
                              (epsilon * epsilon)));
  res.N1 = int(std::ceil(std::log(2.0 / delta) / std::log(6.0)));
  if (res.N1 < 1) res.N1 = 1;
  res.N2 = std::uint64_t(
      std::ceil(opt.C2 * std::log(double(res.N) * res.N1 / delta) /
                (epsilon * epsilon)));

  std::vector<EnvHandle> envs;
  envs.reserve(res.N);
  for (int i = 0; i < res.N; ++i) {
    int idx = sample_index(dist, rng);
    res.task_indices.push_back(idx);
    envs.emplace_back(dist.mdps[idx], RandomStream(rng.next_u64()));
  }

  std::vector<Policy> candidates;
  for (int c = 0; c < res.N1; ++c) {
    OmermResult run = omerm_train(envs, epsilon / 2.0, rng, opt.train);
    candidates.push_back(std::move(run.policy));
  }

  res.chosen = 0;
  double best = -1.0;
  for (int c = 0; c < res.N1; ++c) {
    double total = 0.0;
    for (auto& env : envs) {
      double sum = 0.0;
      for (std::uint64_t e = 0; e < res.N2; ++e)
        sum += env.rollout(candidates[c]).total_return;
      total += sum / double(res.N2);
    }
    double avg = total / double(res.N);
    res.candidate_values.push_back(avg);
    if (avg > best) {
      best = avg;
      res.chosen = c;
    }
  }
  res.policy = candidates[res.chosen];
  return res;
}

double expected_value(const MdpDistribution& dist, const Policy& pi) {
  double v = 0.0;
  for (int i = 0; i < dist.size(); ++i)
    v += dist.probs[i] * exact_value_start(dist.member(i), pi);
  return v;
}

std::pair<Policy, double> best_deterministic_policy(
    const MdpDistribution& dist) {
  const TabularMdp& m0 = dist.member(0);
  std::uint64_t n = deterministic_policy_count(m0.S, m0.A, m0.H, 1000000);
  if (n > 1000000)
    throw std::invalid_argument(
        "best_deterministic_policy: A^(S*H) beyond the enumeration cap");
  Policy best;
  double best_v = -1.0;
  for (std::uint64_t rank = 0; rank < n; ++rank) {
    Policy pi = policy_from_rank(m0.S, m0.A, m0.H, rank);
    double v = expected_value(dist, pi);
    if (v > best_v) {
      best_v = v;
      best = std::move(pi);
    }
  }
  return {std::move(best), best_v};
}

double expected_suboptimality(const MdpDistribution& dist, const Policy& pi) {
  auto [best, best_v] = best_deterministic_policy(dist);
  return best_v - expected_value(dist, pi);
}

}  // namespace mtrl
