#include "mnklab/agents.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mnklab/numeric.hpp"

namespace mnklab::agents {

using game::Outcome;
using game::Player;

Action Policy::choose(const State& s, Rng& rng) const {
  auto acts = game::legal_actions(s);
  auto probs = action_distribution(s);
  if (probs.size() != acts.size())
    throw std::logic_error("policy distribution length mismatch in " + name());
  return acts[rng.categorical(probs)];
}

oracle::PolicyFn Policy::as_policy_fn() const {
  return [this](const State& s) { return action_distribution(s); };
}

std::vector<double> UniformRandomPolicy::action_distribution(const State& s) const {
  auto n = game::legal_actions(s).size();
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::vector<double> OraclePolicy::action_distribution(const State& s) const {
  auto acts = game::legal_actions(s);
  auto best = table_->optimal_actions(s);
  std::vector<double> p(acts.size(), 0.0);
  if (tie_break_ == TieBreak::LowestIndex) {
    for (std::size_t i = 0; i < acts.size(); ++i)
      if (acts[i] == best.front()) p[i] = 1.0;
  } else {
    double w = 1.0 / static_cast<double>(best.size());
    for (std::size_t i = 0; i < acts.size(); ++i)
      if (std::find(best.begin(), best.end(), acts[i]) != best.end()) p[i] = w;
  }
  return p;
}

std::string SoftEquilibriumPolicy::name() const {
  std::ostringstream os;
  os << "soft(" << table_->lambda() << ")";
  return os.str();
}

std::vector<double> SoftEquilibriumPolicy::action_distribution(const State& s) const {
  return table_->choice_probs(s);
}

std::vector<double> GreedyPolicy::action_distribution(const State& s) const {
  auto probs = inner_->action_distribution(s);
  std::size_t argmax = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[argmax]) argmax = i;
  std::vector<double> p(probs.size(), 0.0);
  p[argmax] = 1.0;
  return p;
}

std::vector<double> TablePolicy::action_distribution(const State& s) const {
  auto it = table_.find(s.packed());
  if (it == table_.end())
    throw std::out_of_range("table policy '" + name_ + "' has no entry for " + game::encode(s));
  return it->second;
}

void TablePolicy::set(const State& s, std::vector<double> distribution) {
  if (distribution.size() != game::legal_actions(s).size())
    throw std::invalid_argument("distribution length must match legal actions");
  check_distribution(distribution, 1e-9);
  table_[s.packed()] = std::move(distribution);
}

bool TablePolicy::contains(const State& s) const { return table_.count(s.packed()) != 0; }

namespace {

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

}  // namespace

void TablePolicy::export_csv(std::ostream& os) const {
  std::vector<std::uint64_t> keys;
  keys.reserve(table_.size());
  for (const auto& [k, v] : table_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  os << "state_key,action,probability\n";
  for (std::uint64_t k : keys) {
    State s = game::unpack(spec_, k);
    auto acts = game::legal_actions(s);
    const auto& probs = table_.at(k);
    for (std::size_t i = 0; i < acts.size(); ++i) {
      if (probs[i] == 0.0) continue;
      os << game::encode(s) << ',' << acts[i] << ',' << format_double(probs[i]) << '\n';
    }
  }
}

TablePolicy TablePolicy::import_csv(std::istream& is, std::string name) {
  std::string line;
  if (!std::getline(is, line) || line != "state_key,action,probability")
    throw std::invalid_argument("policy CSV missing header");
  struct Row {
    Action action;
    double prob;
  };
  std::unordered_map<std::string, std::vector<Row>> rows;
  std::vector<std::string> order;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::invalid_argument("bad policy CSV row: " + line);
    std::string key = line.substr(0, c1);
    if (rows.find(key) == rows.end()) order.push_back(key);
    rows[key].push_back(
        {std::stoi(line.substr(c1 + 1, c2 - c1 - 1)), std::stod(line.substr(c2 + 1))});
  }
  if (order.empty()) throw std::invalid_argument("policy CSV has no rows");
  GameSpec spec = game::decode(order.front()).spec;
  TablePolicy policy(spec, std::move(name));
  for (const auto& key : order) {
    State s = game::decode(key);
    auto acts = game::legal_actions(s);
    std::vector<double> p(acts.size(), 0.0);
    for (const Row& r : rows[key]) {
      auto it = std::find(acts.begin(), acts.end(), r.action);
      if (it == acts.end())
        throw std::invalid_argument("policy CSV puts mass on an illegal action at " + key);
      p[it - acts.begin()] = r.prob;
    }
    policy.set(s, std::move(p));
  }
  return policy;
}

GameRecord play_game(const GameSpec& spec, const Agent& p1, const Agent& p2, Rng& rng) {
  GameRecord rec;
  rec.spec = spec;
  State s = State::initial(spec);
  while (game::classify(s) == Outcome::Cont) {
    const Agent& mover = s.mover() == Player::One ? p1 : p2;
    Action a = mover.choose(s, rng);
    rec.moves.push_back(a);
    s = game::apply(s, a);
  }
  rec.outcome = game::classify(s);
  return rec;
}

}  // namespace mnklab::agents
