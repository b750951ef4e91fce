// Exact ground truth for a game spec: full backward-induction solve, exact
// outcome probabilities under arbitrary stochastic policies, and the soft
// (logit) value recursion used by the structural data-generating process.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "mnklab/game.hpp"

namespace mnklab::oracle {

using game::Action;
using game::GameSpec;
using game::Player;
using game::State;

class ValueTable {
 public:
  const GameSpec& spec() const { return spec_; }
  // Distinct states reachable from the initial position, terminals included.
  long long reachable_states() const { return reachable_states_; }

  bool contains(const State& s) const;
  int value(const State& s) const;  // -1, 0, +1 from player 1's perspective

  // All actions achieving the minimax value for the mover; ties kept.
  std::vector<Action> optimal_actions(const State& s) const;

  const std::unordered_map<std::uint64_t, std::int8_t>& values() const { return values_; }

  // CSV rows (canonical_key,value,optimal_actions) sorted by key; optimal
  // actions are those of the canonical representative, ';'-joined.
  void export_csv(std::ostream& os) const;

 private:
  friend ValueTable solve(const GameSpec&);
  GameSpec spec_;
  long long reachable_states_ = 0;
  std::unordered_map<std::uint64_t, std::int8_t> values_;  // canonical key -> v*
};

// Backward induction over all reachable states, memoized on canonical
// symmetry keys. Rejects specs over the desk-scale cap.
ValueTable solve(const GameSpec& spec);

// A stochastic policy: distribution aligned with legal_actions(s) at every
// reachable non-terminal state.
using PolicyFn = std::function<std::vector<double>(const State&)>;

struct OutcomeProbs {
  double win = 0.0, loss = 0.0, draw = 0.0;  // player-1 perspective
};

class PolicyEvalResult {
 public:
  const GameSpec& spec() const { return spec_; }
  OutcomeProbs root() const;
  OutcomeProbs at(const State& s) const;  // throws for states not reached
  bool contains(const State& s) const;
  const std::unordered_map<std::uint64_t, OutcomeProbs>& table() const { return table_; }

 private:
  friend PolicyEvalResult policy_value(const GameSpec&, const PolicyFn&, const PolicyFn&);
  GameSpec spec_;
  std::unordered_map<std::uint64_t, OutcomeProbs> table_;  // plain key -> probs
};

// Exact outcome probabilities by backward recursion: expectation under pi1 at
// player-1 states and pi2 at player-2 states. Policies need not respect the
// board symmetries, so memoization is on plain (non-canonical) keys.
PolicyEvalResult policy_value(const GameSpec& spec, const PolicyFn& pi1, const PolicyFn& pi2);

// How the choice noise enters continuation values. TransientNoise (default):
// the soft value is the mover's expected child value under the softmax choice
// distribution; the noise never propagates up the tree. LogSumExp: the mover
// additionally collects the expected-maximum noise surplus.
enum class SoftMode { TransientNoise, LogSumExp };

class SoftValueTable {
 public:
  const GameSpec& spec() const { return spec_; }
  double lambda() const { return lambda_; }
  SoftMode mode() const { return mode_; }

  double value(const State& s) const;

  // The mover's softmax choice distribution over legal_actions(s).
  std::vector<double> choice_probs(const State& s) const;

  PolicyFn as_policy() const;

 private:
  friend SoftValueTable soft_solve(const GameSpec&, double, SoftMode);
  GameSpec spec_;
  double lambda_ = 1.0;
  SoftMode mode_ = SoftMode::TransientNoise;
  std::unordered_map<std::uint64_t, double> values_;  // canonical key -> soft value
};

// Logit-equilibrium value recursion: at every non-terminal state the mover
// chooses by softmax(lambda * own-perspective child values).
SoftValueTable soft_solve(const GameSpec& spec, double lambda,
                          SoftMode mode = SoftMode::TransientNoise);

}  // namespace mnklab::oracle
