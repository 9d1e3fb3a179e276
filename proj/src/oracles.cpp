#include "mtrl/oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mtrl/omerm.hpp"

namespace mtrl {

std::uint64_t learn_schedule(int S, int A, int H, double epsilon,
                             double log_inv_delta, double C_o) {
  double k = C_o * double(S) * S * A * double(H) * H *
             std::log(double(S) * A * H / epsilon) * (log_inv_delta + 1.0) /
             (epsilon * epsilon);
  return std::uint64_t(std::ceil(k));
}

std::uint64_t evaluate_episode_count(double epsilon, double log_inv_delta) {
  return std::uint64_t(
      std::ceil(2.0 * (std::log(2.0) + log_inv_delta) / (epsilon * epsilon)));
}

std::pair<double, OracleBudgetReport> evaluate_policy(
    EnvHandle env, const Policy& pi, double epsilon, double log_inv_delta,
    const OracleSettings& settings) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("evaluate_policy: epsilon in (0,1]");
  OracleBudgetReport rep;
  rep.epsilon = epsilon;
  rep.log_inv_delta = log_inv_delta;
  rep.white_box = settings.white_box;
  if (settings.white_box) {
    double v = exact_value_start(env.white_box(WhiteBoxKey{}), pi);
    return {v, rep};
  }
  std::uint64_t before = env.episodes_used();
  std::uint64_t n = evaluate_episode_count(epsilon, log_inv_delta);
  double sum = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) sum += env.rollout(pi).total_return;
  rep.episodes_used = env.episodes_used() - before;
  return {sum / double(n), rep};
}

std::pair<Policy, OracleBudgetReport> learn_policy(EnvHandle env,
                                                   double epsilon,
                                                   double log_inv_delta,
                                                   RandomStream& rng,
                                                   const OracleSettings& settings) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("learn_policy: epsilon in (0,1]");
  if (!(log_inv_delta > 0.0))
    throw std::invalid_argument("learn_policy: log_inv_delta must be > 0");
  OracleBudgetReport rep;
  rep.epsilon = epsilon;
  rep.log_inv_delta = log_inv_delta;
  rep.white_box = settings.white_box;
  if (settings.white_box) {
    auto [pi, table] = optimal_policy(env.white_box(WhiteBoxKey{}));
    (void)table;
    return {std::move(pi), rep};
  }

  std::uint64_t before = env.episodes_used();
  int S = env.S(), A = env.A(), H = env.H();
  std::uint64_t K =
      learn_schedule(S, A, H, epsilon, log_inv_delta, settings.C_o);

  // Best-of-N1 re-selection; the confidence budget is split so that the
  // iterate draws and the N1 evaluations together stay within delta:
  // ceil(ln(2/delta)/ln 6) draws, each evaluated at delta/(2*N1).
  int N1 = int(std::ceil((std::log(2.0) + log_inv_delta) / std::log(6.0)));
  if (N1 < 1) N1 = 1;
  std::vector<std::uint64_t> picks(N1);
  for (int c = 0; c < N1; ++c) picks[c] = 1 + rng.uniform_int(K);

  OmermSizes sz{S, A, H, 1, K};
  std::vector<EmpiricalModel> models;
  models.emplace_back(S, A, H, env.s1());
  std::vector<Policy> candidates(N1);
  Policy pi = Policy::uniform(S, A, H);
  for (std::uint64_t k = 1; k <= K; ++k) {
    pi = improve_policy(models, sz, pi, ImproveMode::CoordinateAscent);
    models[0].update(env.rollout(pi));
    for (int c = 0; c < N1; ++c)
      if (picks[c] == k) candidates[c] = pi;
  }

  double eval_conf = log_inv_delta + std::log(2.0 * N1);
  int best = 0;
  double best_v = -1e300;
  for (int c = 0; c < N1; ++c) {
    auto [v, erep] =
        evaluate_policy(env, candidates[c], epsilon / 2.0, eval_conf, settings);
    (void)erep;
    if (v > best_v) {
      best_v = v;
      best = c;
    }
  }
  rep.episodes_used = env.episodes_used() - before;
  return {std::move(candidates[best]), rep};
}

}  // namespace mtrl
