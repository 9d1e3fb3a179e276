#pragma once

#include <cstdint>
#include <memory>

#include "mtrl/mdp.hpp"
#include "mtrl/rng.hpp"

namespace mtrl {

// Permission token for reading the hidden model. Only measurement and
// cheat-oracle code paths construct one; algorithm code works through
// rollout() and the shape getters alone.
struct WhiteBoxKey {
  explicit WhiteBoxKey() = default;
};

// Opaque wrapper around one environment: algorithms may observe the shape
// (S, A, H, s1), run episodes, and read the episode counter. Nothing else.
// Copies alias the same underlying environment (counter and stream included),
// so an oracle handed a handle by value still bills the caller's counter.
class EnvHandle {
 public:
  EnvHandle(std::shared_ptr<const TabularMdp> mdp, RandomStream stream) {
    if (!mdp) throw std::invalid_argument("EnvHandle: null mdp");
    state_ = std::make_shared<State>();
    state_->mdp = std::move(mdp);
    state_->stream = stream;
  }

  int S() const { return state_->mdp->S; }
  int A() const { return state_->mdp->A; }
  int H() const { return state_->mdp->H; }
  int s1() const { return state_->mdp->s1; }

  Trajectory rollout(const Policy& pi) {
    ++state_->episodes;
    return simulate_episode(*state_->mdp, pi, state_->stream);
  }

  std::uint64_t episodes_used() const { return state_->episodes; }

  // Hidden-model access, gated by the key type above.
  const TabularMdp& white_box(WhiteBoxKey) const { return *state_->mdp; }
  const std::shared_ptr<const TabularMdp>& shared_model(WhiteBoxKey) const {
    return state_->mdp;
  }

 private:
  struct State {
    std::shared_ptr<const TabularMdp> mdp;
    RandomStream stream;
    std::uint64_t episodes = 0;
  };
  std::shared_ptr<State> state_;
};

}  // namespace mtrl
