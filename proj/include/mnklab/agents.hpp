// Agent and policy abstractions shared across the estimators, the search
// engines, and the harness. A Policy exposes a full choice distribution (what
// the econometric machinery consumes); a bare Agent only needs to pick moves
// in simulated games (MCTS lives there).
#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "mnklab/game.hpp"
#include "mnklab/oracle.hpp"
#include "mnklab/rng.hpp"

namespace mnklab::agents {

using game::Action;
using game::GameRecord;
using game::GameSpec;
using game::State;

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  // Must be safe to call concurrently with distinct Rng streams.
  virtual Action choose(const State& s, Rng& rng) const = 0;
};

class Policy : public Agent {
 public:
  // Distribution aligned with legal_actions(s); zero mass on illegal cells is
  // implied by the alignment.
  virtual std::vector<double> action_distribution(const State& s) const = 0;

  Action choose(const State& s, Rng& rng) const override;

  // View of this policy for the exact evaluator. The policy must outlive the
  // returned function.
  oracle::PolicyFn as_policy_fn() const;
};

class UniformRandomPolicy final : public Policy {
 public:
  std::string name() const override { return "random"; }
  std::vector<double> action_distribution(const State& s) const override;
};

// Plays a v*-optimal action at every state. Sampling mode spreads mass
// uniformly over the optimal set (covering every tie-break variant at once);
// deterministic mode always picks the lowest-index optimal action.
class OraclePolicy final : public Policy {
 public:
  enum class TieBreak { UniformOverOptimal, LowestIndex };
  OraclePolicy(std::shared_ptr<const oracle::ValueTable> table,
               TieBreak tie_break = TieBreak::UniformOverOptimal)
      : table_(std::move(table)), tie_break_(tie_break) {}
  std::string name() const override { return "oracle"; }
  std::vector<double> action_distribution(const State& s) const override;

 private:
  std::shared_ptr<const oracle::ValueTable> table_;
  TieBreak tie_break_;
};

// The soft-equilibrium expert: softmax(lambda * own child soft value).
class SoftEquilibriumPolicy final : public Policy {
 public:
  SoftEquilibriumPolicy(std::shared_ptr<const oracle::SoftValueTable> table)
      : table_(std::move(table)) {}
  std::string name() const override;
  std::vector<double> action_distribution(const State& s) const override;

 private:
  std::shared_ptr<const oracle::SoftValueTable> table_;
};

// Argmax of an inner policy's distribution, ties to the lowest cell index.
class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(std::shared_ptr<const Policy> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return "greedy(" + inner_->name() + ")"; }
  std::vector<double> action_distribution(const State& s) const override;

 private:
  std::shared_ptr<const Policy> inner_;
};

// Explicit per-state distributions, keyed on plain state keys. Used for
// RL-improved policies and anything loaded from a policy CSV.
class TablePolicy final : public Policy {
 public:
  TablePolicy(GameSpec spec, std::string name) : spec_(spec), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  std::vector<double> action_distribution(const State& s) const override;

  void set(const State& s, std::vector<double> distribution);
  bool contains(const State& s) const;
  const GameSpec& spec() const { return spec_; }

  // CSV rows (state_key,action,probability), sorted by key then action.
  void export_csv(std::ostream& os) const;
  static TablePolicy import_csv(std::istream& is, std::string name);

 private:
  GameSpec spec_;
  std::string name_;
  std::unordered_map<std::uint64_t, std::vector<double>> table_;
};

// Plays one game between two agents; per-move randomness comes from rng.
GameRecord play_game(const GameSpec& spec, const Agent& p1, const Agent& p2, Rng& rng);

}  // namespace mnklab::agents
