#include "mtrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mtrl {

Policy Policy::uniform(int S, int A, int H) {
  Policy p(S, A, H);
  std::fill(p.probs.begin(), p.probs.end(), 1.0 / A);
  return p;
}

Policy Policy::from_actions(int S, int A, int H,
                            const std::vector<int>& actions) {
  if (int(actions.size()) != H * S)
    throw std::invalid_argument("from_actions: need H*S action entries");
  Policy p(S, A, H);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      int a = actions[std::size_t(h) * S + s];
      if (a < 0 || a >= A) throw std::invalid_argument("from_actions: bad action");
      p.at(h, s, a) = 1.0;
    }
  return p;
}

static void check_shapes(const TabularMdp& m, const Policy& pi) {
  if (!pi.same_shape(m.S, m.A, m.H))
    throw std::invalid_argument("policy/mdp dimension mismatch");
}

ValidationReport validate_mdp(const TabularMdp& mdp, double tol) {
  ValidationReport rep;
  auto fail = [&](const std::string& msg) {
    rep.ok = false;
    rep.errors.push_back(msg);
  };
  if (mdp.S < 1 || mdp.A < 1 || mdp.H < 1) {
    fail("sizes must satisfy S,A,H >= 1");
    return rep;
  }
  if (mdp.s1 < 0 || mdp.s1 >= mdp.S) fail("initial state out of range");
  if (mdp.P.size() != std::size_t(mdp.H) * mdp.S * mdp.A * mdp.S)
    fail("transition array has wrong size");
  if (mdp.r.size() != std::size_t(mdp.H) * mdp.S * mdp.A)
    fail("reward array has wrong size");
  if (!rep.ok) return rep;

  for (int h = 0; h < mdp.H; ++h)
    for (int s = 0; s < mdp.S; ++s)
      for (int a = 0; a < mdp.A; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < mdp.S; ++s2) {
          double v = mdp.p(h, s, a, s2);
          if (v < 0.0)
            fail("negative transition probability at (h,s,a,s')=(" +
                 std::to_string(h) + "," + std::to_string(s) + "," +
                 std::to_string(a) + "," + std::to_string(s2) + ")");
          sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
          fail("transition row sum " + std::to_string(sum) + " at (h,s,a)=(" +
               std::to_string(h) + "," + std::to_string(s) + "," +
               std::to_string(a) + ")");
        double mean = mdp.rew(h, s, a);
        if (mean < 0.0)
          fail("negative mean reward at (h,s,a)=(" + std::to_string(h) + "," +
               std::to_string(s) + "," + std::to_string(a) + ")");
        if (mdp.noise.kind == NoiseKind::Bernoulli &&
            (mean < 0.0 || mean > 1.0))
          fail("Bernoulli noise needs mean in [0,1] at (h,s,a)=(" +
               std::to_string(h) + "," + std::to_string(s) + "," +
               std::to_string(a) + ")");
      }
  if (mdp.noise.kind == NoiseKind::Gaussian && mdp.noise.sigma < 0.0)
    fail("negative Gaussian sigma");

  rep.u1 = assumption1_bound(mdp);
  if (rep.u1 > 1.0 + 1e-9)
    fail("Assumption-1 bound violated: U_1(s1) = " + std::to_string(rep.u1));
  return rep;
}

bool normalize_transitions(TabularMdp& mdp, double tol) {
  bool all_ok = true;
  for (int h = 0; h < mdp.H; ++h)
    for (int s = 0; s < mdp.S; ++s)
      for (int a = 0; a < mdp.A; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < mdp.S; ++s2) sum += mdp.p(h, s, a, s2);
        if (std::abs(sum - 1.0) > tol || sum <= 0.0) {
          all_ok = false;
          continue;
        }
        for (int s2 = 0; s2 < mdp.S; ++s2) mdp.p(h, s, a, s2) /= sum;
      }
  return all_ok;
}

ValueTable exact_value(const TabularMdp& m, const Policy& pi) {
  check_shapes(m, pi);
  ValueTable t;
  t.S = m.S; t.A = m.A; t.H = m.H;
  t.V.assign(std::size_t(m.H + 1) * m.S, 0.0);
  t.Q.assign(std::size_t(m.H) * m.S * m.A, 0.0);
  for (int h = m.H - 1; h >= 0; --h)
    for (int s = 0; s < m.S; ++s) {
      double vs = 0.0;
      for (int a = 0; a < m.A; ++a) {
        double q = m.rew(h, s, a);
        for (int s2 = 0; s2 < m.S; ++s2)
          q += m.p(h, s, a, s2) * t.V[std::size_t(h + 1) * m.S + s2];
        t.Q[(std::size_t(h) * m.S + s) * m.A + a] = q;
        vs += pi.at(h, s, a) * q;
      }
      t.V[std::size_t(h) * m.S + s] = vs;
    }
  return t;
}

double exact_value_start(const TabularMdp& m, const Policy& pi) {
  return exact_value(m, pi).v(0, m.s1);
}

std::pair<Policy, ValueTable> optimal_policy(const TabularMdp& m) {
  ValueTable t;
  t.S = m.S; t.A = m.A; t.H = m.H;
  t.V.assign(std::size_t(m.H + 1) * m.S, 0.0);
  t.Q.assign(std::size_t(m.H) * m.S * m.A, 0.0);
  Policy pi(m.S, m.A, m.H);
  for (int h = m.H - 1; h >= 0; --h)
    for (int s = 0; s < m.S; ++s) {
      int best = 0;
      double best_q = -1.0;
      for (int a = 0; a < m.A; ++a) {
        double q = m.rew(h, s, a);
        for (int s2 = 0; s2 < m.S; ++s2)
          q += m.p(h, s, a, s2) * t.V[std::size_t(h + 1) * m.S + s2];
        t.Q[(std::size_t(h) * m.S + s) * m.A + a] = q;
        if (q > best_q) {  // strict: ties stay at the lowest index
          best_q = q;
          best = a;
        }
      }
      pi.at(h, s, best) = 1.0;
      t.V[std::size_t(h) * m.S + s] = best_q;
    }
  return {std::move(pi), std::move(t)};
}

double assumption1_bound(const TabularMdp& m) {
  std::vector<double> u(m.S, 0.0), next(m.S, 0.0);
  for (int h = m.H - 1; h >= 0; --h) {
    for (int s = 0; s < m.S; ++s) {
      double best = 0.0;
      for (int a = 0; a < m.A; ++a) {
        double reach = 0.0;
        if (h < m.H - 1) {
          bool any = false;
          for (int s2 = 0; s2 < m.S; ++s2)
            if (m.p(h, s, a, s2) > 0.0) {
              if (!any || u[s2] > reach) reach = u[s2];
              any = true;
            }
        }
        double cand = m.rew(h, s, a) + reach;
        if (cand > best) best = cand;
      }
      next[s] = best;
    }
    u = next;
  }
  return u[m.s1];
}

Trajectory simulate_episode(const TabularMdp& m, const Policy& pi,
                            RandomStream& rng) {
  check_shapes(m, pi);
  Trajectory tr;
  tr.states.reserve(m.H);
  tr.actions.reserve(m.H);
  tr.rewards.reserve(m.H);
  int s = m.s1;
  std::vector<double> row(m.A);
  std::vector<double> trow(m.S);
  for (int h = 0; h < m.H; ++h) {
    for (int a = 0; a < m.A; ++a) row[a] = pi.at(h, s, a);
    int a = rng.categorical(row);
    double mean = m.rew(h, s, a);
    double reward = mean;
    switch (m.noise.kind) {
      case NoiseKind::Deterministic:
        break;
      case NoiseKind::Gaussian:
        reward = mean + m.noise.sigma * rng.normal();
        break;
      case NoiseKind::Bernoulli:
        reward = (rng.uniform01() < mean) ? 1.0 : 0.0;
        break;
    }
    for (int s2 = 0; s2 < m.S; ++s2) trow[s2] = m.p(h, s, a, s2);
    int s2 = rng.categorical(trow);
    tr.states.push_back(s);
    tr.actions.push_back(a);
    tr.rewards.push_back(reward);
    tr.total_return += reward;
    s = s2;
  }
  tr.final_state = s;
  return tr;
}

double policy_distance(const Policy& a, const Policy& b) {
  if (!a.same_shape(b.S, b.A, b.H))
    throw std::invalid_argument("policy_distance: dimension mismatch");
  double best = 0.0;
  for (int h = 0; h < a.H; ++h)
    for (int s = 0; s < a.S; ++s) {
      double l1 = 0.0;
      for (int ac = 0; ac < a.A; ++ac)
        l1 += std::abs(a.at(h, s, ac) - b.at(h, s, ac));
      if (l1 > best) best = l1;
    }
  return best;
}

std::uint64_t deterministic_policy_count(int S, int A, int H,
                                         std::uint64_t cap) {
  std::uint64_t n = 1;
  for (int c = 0; c < S * H; ++c) {
    if (n > cap / std::uint64_t(A) + 1) return cap + 1;
    n *= std::uint64_t(A);
    if (n > cap) return cap + 1;
  }
  return n;
}

Policy policy_from_rank(int S, int A, int H, std::uint64_t rank) {
  int cells = S * H;
  std::vector<int> actions(cells, 0);
  for (int c = cells - 1; c >= 0; --c) {  // last cell varies fastest
    actions[c] = int(rank % std::uint64_t(A));
    rank /= std::uint64_t(A);
  }
  return Policy::from_actions(S, A, H, actions);
}

// --- JSON ---

using nlohmann::json;

static std::string noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::Deterministic: return "deterministic";
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Bernoulli: return "bernoulli";
  }
  return "deterministic";
}

static NoiseKind noise_from_name(const std::string& n) {
  if (n == "deterministic") return NoiseKind::Deterministic;
  if (n == "gaussian") return NoiseKind::Gaussian;
  if (n == "bernoulli") return NoiseKind::Bernoulli;
  throw std::invalid_argument("unknown noise kind: " + n);
}

json mdp_to_json_obj(const TabularMdp& m) {
  json noise{{"kind", noise_name(m.noise.kind)}};
  if (m.noise.kind == NoiseKind::Gaussian) noise["sigma"] = m.noise.sigma;
  json P = json::array();
  json r = json::array();
  for (int h = 0; h < m.H; ++h) {
    json Ph = json::array(), rh = json::array();
    for (int s = 0; s < m.S; ++s) {
      json Ps = json::array(), rs = json::array();
      for (int a = 0; a < m.A; ++a) {
        json row = json::array();
        for (int s2 = 0; s2 < m.S; ++s2) row.push_back(m.p(h, s, a, s2));
        Ps.push_back(std::move(row));
        rs.push_back(m.rew(h, s, a));
      }
      Ph.push_back(std::move(Ps));
      rh.push_back(std::move(rs));
    }
    P.push_back(std::move(Ph));
    r.push_back(std::move(rh));
  }
  return json{{"S", m.S}, {"A", m.A}, {"H", m.H}, {"s1", m.s1},
              {"noise", noise}, {"P", P}, {"r", r}};
}

TabularMdp mdp_from_json_obj(const json& j) {
  TabularMdp m(j.at("S").get<int>(), j.at("A").get<int>(),
               j.at("H").get<int>(), j.at("s1").get<int>());
  const json& noise = j.at("noise");
  m.noise.kind = noise_from_name(noise.at("kind").get<std::string>());
  if (m.noise.kind == NoiseKind::Gaussian)
    m.noise.sigma = noise.value("sigma", 1.0);
  const json& P = j.at("P");
  const json& r = j.at("r");
  for (int h = 0; h < m.H; ++h)
    for (int s = 0; s < m.S; ++s)
      for (int a = 0; a < m.A; ++a) {
        m.rew(h, s, a) = r.at(h).at(s).at(a).get<double>();
        for (int s2 = 0; s2 < m.S; ++s2)
          m.p(h, s, a, s2) = P.at(h).at(s).at(a).at(s2).get<double>();
      }
  return m;
}

std::string mdp_to_json(const TabularMdp& m, int indent) {
  return mdp_to_json_obj(m).dump(indent);
}

TabularMdp mdp_from_json(const std::string& text) {
  return mdp_from_json_obj(json::parse(text));
}

std::string policy_to_json_fragment(const Policy& p) {
  json arr = json::array();
  for (int h = 0; h < p.H; ++h) {
    json hs = json::array();
    for (int s = 0; s < p.S; ++s) {
      json row = json::array();
      for (int a = 0; a < p.A; ++a) row.push_back(p.at(h, s, a));
      hs.push_back(std::move(row));
    }
    arr.push_back(std::move(hs));
  }
  return arr.dump();
}

}  // namespace mtrl
