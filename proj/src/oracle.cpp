#include "mnklab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

#include "mnklab/numeric.hpp"

namespace mnklab::oracle {

using game::Cell;
using game::Outcome;

namespace {

int orbit_size(const State& s) {
  const auto& g = game::geometry(s.spec);
  std::set<std::uint64_t> distinct;
  for (std::size_t i = 0; i < g.perms.size(); ++i)
    distinct.insert(game::transform(s, static_cast<int>(i)).packed());
  return static_cast<int>(distinct.size());
}

struct Solver {
  std::unordered_map<std::uint64_t, std::int8_t>& values;
  long long plain_states = 0;

  // s may be any member of its symmetry class; children of the canonical
  // representative cover all child classes.
  int visit(const State& s) {
    game::Canonical can = game::canonicalize(s);
    std::uint64_t key = can.state.packed();
    auto it = values.find(key);
    if (it != values.end()) return it->second;

    plain_states += orbit_size(can.state);
    Outcome o = game::classify(can.state);
    int v;
    if (o != Outcome::Cont) {
      v = game::payoff(can.state, Player::One);
    } else {
      bool maximizing = can.state.mover() == Player::One;
      v = maximizing ? -2 : 2;
      for (Action a : game::legal_actions(can.state)) {
        int child = visit(game::apply(can.state, a));
        v = maximizing ? std::max(v, child) : std::min(v, child);
      }
    }
    values.emplace(key, static_cast<std::int8_t>(v));
    return v;
  }
};

}  // namespace

ValueTable solve(const GameSpec& spec) {
  spec.validate();
  if (spec.cells() > game::kMaxCells)
    throw std::invalid_argument("state space too large for exact solve");
  ValueTable table;
  table.spec_ = spec;
  Solver solver{table.values_};
  solver.visit(State::initial(spec));
  table.reachable_states_ = solver.plain_states;
  return table;
}

bool ValueTable::contains(const State& s) const {
  return values_.count(game::canonical_packed(s)) != 0;
}

int ValueTable::value(const State& s) const {
  auto it = values_.find(game::canonical_packed(s));
  if (it == values_.end())
    throw std::out_of_range("state not in value table (unreachable?): " + game::encode(s));
  return it->second;
}

std::vector<Action> ValueTable::optimal_actions(const State& s) const {
  if (game::classify(s) != Outcome::Cont)
    throw std::logic_error("optimal_actions at a terminal state");
  bool maximizing = s.mover() == Player::One;
  std::vector<Action> acts = game::legal_actions(s);
  std::vector<int> child_values;
  child_values.reserve(acts.size());
  int best = maximizing ? -2 : 2;
  for (Action a : acts) {
    int v = value(game::apply(s, a));
    child_values.push_back(v);
    best = maximizing ? std::max(best, v) : std::min(best, v);
  }
  std::vector<Action> out;
  for (std::size_t i = 0; i < acts.size(); ++i)
    if (child_values[i] == best) out.push_back(acts[i]);
  return out;
}

void ValueTable::export_csv(std::ostream& os) const {
  std::vector<std::uint64_t> keys;
  keys.reserve(values_.size());
  for (const auto& [k, v] : values_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  os << "canonical_key,value,optimal_actions\n";
  for (std::uint64_t k : keys) {
    State s = game::unpack(spec_, k);
    os << game::encode(s) << ',' << static_cast<int>(values_.at(k)) << ',';
    if (game::classify(s) == Outcome::Cont) {
      auto acts = optimal_actions(s);
      for (std::size_t i = 0; i < acts.size(); ++i) os << (i ? ";" : "") << acts[i];
    }
    os << '\n';
  }
}

namespace {

std::vector<double> checked_policy_probs(const PolicyFn& pi, const State& s,
                                         std::size_t n_actions) {
  std::vector<double> p = pi(s);
  if (p.size() != n_actions)
    throw std::invalid_argument(
        "policy distribution length does not match legal action count (mass on "
        "an illegal action?)");
  check_distribution(p, 1e-9);
  return p;
}

struct PolicyEvaluator {
  const PolicyFn& pi1;
  const PolicyFn& pi2;
  std::unordered_map<std::uint64_t, OutcomeProbs>& table;

  OutcomeProbs visit(const State& s) {
    std::uint64_t key = s.packed();
    auto it = table.find(key);
    if (it != table.end()) return it->second;

    OutcomeProbs probs;
    Outcome o = game::classify(s);
    if (o != Outcome::Cont) {
      (o == Outcome::Win ? probs.win : o == Outcome::Loss ? probs.loss : probs.draw) = 1.0;
    } else {
      auto acts = game::legal_actions(s);
      const PolicyFn& pi = s.mover() == Player::One ? pi1 : pi2;
      std::vector<double> p = checked_policy_probs(pi, s, acts.size());
      for (std::size_t i = 0; i < acts.size(); ++i) {
        if (p[i] == 0.0) continue;
        OutcomeProbs sub = visit(game::apply(s, acts[i]));
        probs.win += p[i] * sub.win;
        probs.loss += p[i] * sub.loss;
        probs.draw += p[i] * sub.draw;
      }
    }
    table.emplace(key, probs);
    return probs;
  }
};

}  // namespace

PolicyEvalResult policy_value(const GameSpec& spec, const PolicyFn& pi1, const PolicyFn& pi2) {
  spec.validate();
  PolicyEvalResult result;
  result.spec_ = spec;
  PolicyEvaluator eval{pi1, pi2, result.table_};
  eval.visit(State::initial(spec));
  return result;
}

OutcomeProbs PolicyEvalResult::root() const { return at(State::initial(spec_)); }

bool PolicyEvalResult::contains(const State& s) const { return table_.count(s.packed()) != 0; }

OutcomeProbs PolicyEvalResult::at(const State& s) const {
  auto it = table_.find(s.packed());
  if (it == table_.end())
    throw std::out_of_range("state not reached under these policies: " + game::encode(s));
  return it->second;
}

namespace {

struct SoftSolver {
  double lambda;
  SoftMode mode;
  std::unordered_map<std::uint64_t, double>& values;

  double visit(const State& s) {
    game::Canonical can = game::canonicalize(s);
    std::uint64_t key = can.state.packed();
    auto it = values.find(key);
    if (it != values.end()) return it->second;

    double v;
    Outcome o = game::classify(can.state);
    if (o != Outcome::Cont) {
      v = game::payoff(can.state, Player::One);
    } else {
      double sign = can.state.mover() == Player::One ? 1.0 : -1.0;
      auto acts = game::legal_actions(can.state);
      std::vector<double> child(acts.size());
      for (std::size_t i = 0; i < acts.size(); ++i)
        child[i] = visit(game::apply(can.state, acts[i]));
      if (mode == SoftMode::TransientNoise) {
        std::vector<double> probs(child.size());
        for (std::size_t i = 0; i < child.size(); ++i) probs[i] = sign * child[i];
        softmax_inplace(probs, lambda);
        v = 0.0;
        for (std::size_t i = 0; i < child.size(); ++i) v += probs[i] * child[i];
      } else {
        std::vector<double> scaled(child.size());
        for (std::size_t i = 0; i < child.size(); ++i) scaled[i] = lambda * sign * child[i];
        v = sign * logsumexp(scaled) / lambda;
      }
    }
    values.emplace(key, v);
    return v;
  }
};

}  // namespace

SoftValueTable soft_solve(const GameSpec& spec, double lambda, SoftMode mode) {
  spec.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("soft_solve requires a positive finite lambda");
  SoftValueTable table;
  table.spec_ = spec;
  table.lambda_ = lambda;
  table.mode_ = mode;
  SoftSolver solver{lambda, mode, table.values_};
  solver.visit(State::initial(spec));
  return table;
}

double SoftValueTable::value(const State& s) const {
  auto it = values_.find(game::canonical_packed(s));
  if (it == values_.end())
    throw std::out_of_range("state not in soft value table: " + game::encode(s));
  return it->second;
}

std::vector<double> SoftValueTable::choice_probs(const State& s) const {
  if (game::classify(s) != Outcome::Cont)
    throw std::logic_error("choice_probs at a terminal state");
  double sign = s.mover() == Player::One ? 1.0 : -1.0;
  auto acts = game::legal_actions(s);
  std::vector<double> scaled(acts.size());
  for (std::size_t i = 0; i < acts.size(); ++i)
    scaled[i] = sign * value(game::apply(s, acts[i]));
  softmax_inplace(scaled, lambda_);
  return scaled;
}

PolicyFn SoftValueTable::as_policy() const {
  // Caller keeps the table alive; copies are cheap to share via shared_ptr
  // when needed, but experiments hold tables by value anyway.
  return [this](const State& s) { return choice_probs(s); };
}

}  // namespace mnklab::oracle
