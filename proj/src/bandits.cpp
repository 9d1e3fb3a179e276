#include "mtrl/bandits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mtrl/pce.hpp"

namespace mtrl {

namespace {

// Neumaier compensated accumulator; keeps both decomposition sums faithfully
// rounded so the identity check holds far below 1e-12.
struct CompensatedSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

void check_record(const PullRecord& rec, const BanditInstance& b) {
  int K = b.arms();
  if (K < 1) throw std::invalid_argument("pseudo_regret: empty instance");
  if (int(rec.counts.size()) != K || int(rec.sums.size()) != K)
    throw std::invalid_argument("pseudo_regret: record/instance size mismatch");
  if (rec.rewards.size() != rec.arms.size())
    throw std::invalid_argument("pseudo_regret: arm/reward log length mismatch");
  std::vector<std::uint64_t> counts(K, 0);
  for (int a : rec.arms) {
    if (a < 0 || a >= K)
      throw std::invalid_argument("pseudo_regret: arm index out of range");
    ++counts[std::size_t(a)];
  }
  for (int k = 0; k < K; ++k)
    if (counts[k] != rec.counts[k])
      throw std::invalid_argument("pseudo_regret: counts do not match the log");
}

}  // namespace

double BanditInstance::best() const {
  if (means.empty()) throw std::invalid_argument("BanditInstance: no arms");
  return *std::max_element(means.begin(), means.end());
}

std::vector<std::string> validate_bandit(const BanditInstance& b) {
  std::vector<std::string> errs;
  if (b.means.empty()) errs.push_back("no arms");
  for (std::size_t k = 0; k < b.means.size(); ++k)
    if (!(b.means[k] >= 0.0 && b.means[k] <= 1.0))
      errs.push_back("mean " + std::to_string(k) + " outside [0,1]");
  if (!(b.sigma >= 0.0)) errs.push_back("negative sigma");
  return errs;
}

double bandit_pull(const BanditInstance& b, int arm, RandomStream& rng) {
  rng.uniform01();  // action-draw slot of the episode simulator
  double y = b.means[arm];
  if (b.sigma > 0.0) y += b.sigma * rng.normal();
  rng.uniform01();  // state-draw slot of the episode simulator
  return y;
}

void PullRecord::push(int arm, double reward) {
  arms.push_back(arm);
  rewards.push_back(reward);
  ++counts[std::size_t(arm)];
  sums[std::size_t(arm)] += reward;
}

double ucb_index(double mean, std::uint64_t pulls, std::uint64_t t) {
  double lt = std::log(double(t));
  double f = 1.0 + double(t) * lt * lt;
  return mean + std::sqrt(2.0 * std::log(f) / double(pulls));
}

namespace {

// Index-rule steps appended to an existing record; `horizon` is the f(t)
// clock's own step count, starting fresh.
void ucb_steps(const BanditInstance& b, std::uint64_t horizon,
               RandomStream& rng, PullRecord& rec) {
  int K = b.arms();
  std::vector<std::uint64_t> pulls(K, 0);
  std::vector<double> local_sum(K, 0.0);
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    int arm;
    if (t <= std::uint64_t(K)) {
      arm = int(t - 1);
    } else {
      arm = 0;
      double best = ucb_index(local_sum[0] / double(pulls[0]), pulls[0], t);
      for (int k = 1; k < K; ++k) {
        double idx = ucb_index(local_sum[k] / double(pulls[k]), pulls[k], t);
        if (idx > best) {
          best = idx;
          arm = k;
        }
      }
    }
    double y = bandit_pull(b, arm, rng);
    ++pulls[std::size_t(arm)];
    local_sum[std::size_t(arm)] += y;
    rec.push(arm, y);
  }
}

}  // namespace

PullRecord ucb_run(const BanditInstance& b, std::uint64_t T,
                   RandomStream& rng) {
  auto errs = validate_bandit(b);
  if (!errs.empty()) throw std::invalid_argument("ucb_run: " + errs.front());
  if (T < std::uint64_t(b.arms()))
    throw std::invalid_argument("ucb_run: T smaller than the number of arms");
  PullRecord rec(b.arms());
  ucb_steps(b, T, rng, rec);
  return rec;
}

double pseudo_regret(const PullRecord& rec, const BanditInstance& b) {
  check_record(rec, b);
  CompensatedSum acc;
  for (int k = 0; k < b.arms(); ++k) {
    double g = b.gap(k);
    double n = double(rec.counts[std::size_t(k)]);
    double p = g * n;
    acc.add(p);
    acc.add(std::fma(g, n, -p));  // exact product tail
  }
  return acc.value();
}

double pseudo_regret_stepwise(const PullRecord& rec, const BanditInstance& b) {
  check_record(rec, b);
  CompensatedSum acc;
  for (int a : rec.arms) acc.add(b.gap(a));
  return acc.value();
}

double ucb_regret_bound(int K_arms, std::uint64_t T) {
  return 9.0 * std::sqrt(double(K_arms) * double(T) * std::log(double(T)));
}

std::vector<std::string> validate_bandit_distribution(
    const BanditDistribution& d) {
  std::vector<std::string> errs;
  if (d.instances.empty()) errs.push_back("empty support");
  if (d.probs.size() != d.instances.size())
    errs.push_back("probability/instance count mismatch");
  double total = 0.0;
  for (double p : d.probs) {
    if (!(p >= 0.0)) errs.push_back("negative probability");
    total += p;
  }
  if (!d.probs.empty() && std::abs(total - 1.0) > 1e-9)
    errs.push_back("probabilities sum to " + std::to_string(total));
  int K = d.instances.empty() ? 0 : d.instances.front().arms();
  for (const auto& b : d.instances) {
    if (b.arms() != K) errs.push_back("mixed arm counts in support");
    for (const auto& e : validate_bandit(b)) errs.push_back(e);
  }
  return errs;
}

int sample_bandit_index(const BanditDistribution& d, RandomStream& rng) {
  return int(rng.categorical(d.probs));
}

BanditDistribution proposition1_bandits(int M) {
  if (M < 1) throw std::invalid_argument("proposition1_bandits: M >= 1");
  BanditDistribution d;
  d.probs.assign(M, 1.0 / double(M));
  for (int i = 0; i < M; ++i) {
    BanditInstance b;
    b.means.assign(M, 0.0);
    b.means[std::size_t(i)] = 1.0;
    b.sigma = 0.0;
    d.instances.push_back(std::move(b));
  }
  return d;
}

BanditDistribution theorem3_bandits(int M, double gap) {
  if (M < 1) throw std::invalid_argument("theorem3_bandits: M >= 1");
  if (!(gap > 0.0 && gap <= 0.5))
    throw std::invalid_argument("theorem3_bandits: gap must be in (0, 1/2]");
  BanditDistribution d;
  d.probs.assign(M, 1.0 / double(M));
  for (int i = 0; i < M; ++i) {
    BanditInstance b;
    b.means.assign(M, 0.5);
    b.means[std::size_t(i)] = 0.5 + gap;
    d.instances.push_back(std::move(b));
  }
  return d;
}

std::shared_ptr<const TabularMdp> bandit_to_mdp(const BanditInstance& b) {
  auto errs = validate_bandit(b);
  if (!errs.empty())
    throw std::invalid_argument("bandit_to_mdp: " + errs.front());
  auto m = std::make_shared<TabularMdp>();
  m->S = 1;
  m->A = b.arms();
  m->H = 1;
  m->s1 = 0;
  m->P.assign(std::size_t(m->A), 1.0);
  m->r = b.means;
  if (b.sigma > 0.0)
    m->noise = {NoiseKind::Gaussian, b.sigma};
  else
    m->noise = {NoiseKind::Deterministic, 0.0};
  return m;
}

BanditInstance mdp_to_bandit(const TabularMdp& m) {
  if (m.S != 1 || m.H != 1)
    throw std::invalid_argument("mdp_to_bandit: needs S = 1, H = 1");
  BanditInstance b;
  b.means = m.r;
  switch (m.noise.kind) {
    case NoiseKind::Gaussian:
      b.sigma = m.noise.sigma;
      break;
    case NoiseKind::Deterministic:
      b.sigma = 0.0;
      break;
    default:
      throw std::invalid_argument("mdp_to_bandit: unsupported noise kind");
  }
  return b;
}

PullRecord informed_elimination_run(const BanditDistribution& dist,
                                    bool true_dist_known, std::uint64_t T,
                                    RandomStream& rng) {
  auto errs = validate_bandit_distribution(dist);
  if (!errs.empty())
    throw std::invalid_argument("informed_elimination_run: " + errs.front());
  int i_star = sample_bandit_index(dist, rng);
  const BanditInstance& truth = dist.instances[std::size_t(i_star)];
  if (!true_dist_known) return ucb_run(truth, T, rng);
  if (T < 1)
    throw std::invalid_argument("informed_elimination_run: T >= 1");

  int P = dist.size();
  std::vector<int> arm(P);
  std::vector<double> v(P);
  for (int l = 0; l < P; ++l) {
    const auto& means = dist.instances[std::size_t(l)].means;
    int best = 0;
    for (int k = 1; k < int(means.size()); ++k)
      if (means[std::size_t(k)] > means[std::size_t(best)]) best = k;
    arm[std::size_t(l)] = best;
    v[std::size_t(l)] = means[std::size_t(best)];
  }

  double eps = 1.0 / std::sqrt(double(T));
  double delta = eps;
  // The informed player knows D, including its noise scale, so the
  // Hoeffding radius of the elimination rule is scaled by it. sigma = 0
  // support (exact rewards) leaves only the 4*eps slack.
  double sigma = 0.0;
  for (const auto& inst : dist.instances) sigma = std::max(sigma, inst.sigma);
  PullRecord rec(truth.arms());
  std::vector<char> alive(P, 1);
  auto next_live = [&]() {
    int best = -1;
    for (int l = 0; l < P; ++l)
      if (alive[std::size_t(l)] &&
          (best < 0 || v[std::size_t(l)] > v[std::size_t(best)]))
        best = l;
    return best;
  };

  int l = next_live();
  std::uint64_t k0 = 1;
  double sum = 0.0;
  for (std::uint64_t t = 1; t <= T; ++t) {
    if (l < 0) {
      ucb_steps(truth, T - t + 1, rng, rec);
      break;
    }
    double y = bandit_pull(truth, arm[std::size_t(l)], rng);
    rec.push(arm[std::size_t(l)], y);
    sum += y;
    std::uint64_t n = t - k0 + 1;
    double mean = sum / double(n);
    double radius = elimination_threshold(eps, delta, T, n) - 4.0 * eps;
    if (std::abs(mean - v[std::size_t(l)]) >= 4.0 * eps + sigma * radius) {
      alive[std::size_t(l)] = 0;
      l = next_live();
      k0 = t + 1;
      sum = 0.0;
    }
  }
  return rec;
}

std::vector<RatioRow> asymptotic_ratio_experiment(
    const BanditDistribution& dist, const std::vector<std::uint64_t>& T_grid,
    int num_seeds, std::uint64_t master_seed, std::vector<RatioRunRow>* runs) {
  for (std::size_t i = 1; i < T_grid.size(); ++i)
    if (T_grid[i] <= T_grid[i - 1])
      throw std::invalid_argument(
          "asymptotic_ratio_experiment: T grid must ascend");
  if (num_seeds < 1)
    throw std::invalid_argument("asymptotic_ratio_experiment: seeds >= 1");
  std::vector<RatioRow> rows;
  for (std::size_t ti = 0; ti < T_grid.size(); ++ti) {
    RatioRow row;
    row.T = T_grid[ti];
    double inf_sum = 0.0, ucb_sum = 0.0;
    for (int s = 0; s < num_seeds; ++s) {
      // Both arms replay the same stream, so they face the same test draw.
      std::uint64_t sid = stream_id(streams::kBandit, s, int(ti));
      RandomStream a = derive_stream(master_seed, sid);
      RandomStream b = a;
      auto rec_i = informed_elimination_run(dist, true, row.T, a);
      auto rec_u = informed_elimination_run(dist, false, row.T, b);
      int draw = 0;  // recover the shared draw for regret measurement
      {
        RandomStream c = derive_stream(master_seed, sid);
        draw = sample_bandit_index(dist, c);
      }
      const BanditInstance& truth = dist.instances[std::size_t(draw)];
      double reg_i = pseudo_regret(rec_i, truth);
      double reg_u = pseudo_regret(rec_u, truth);
      inf_sum += reg_i;
      ucb_sum += reg_u;
      if (runs) {
        runs->push_back({row.T, s, true, reg_i});
        runs->push_back({row.T, s, false, reg_u});
      }
    }
    row.mean_informed = inf_sum / double(num_seeds);
    row.mean_ucb = ucb_sum / double(num_seeds);
    row.ratio = row.mean_ucb > 0.0 ? row.mean_informed / row.mean_ucb : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mtrl
