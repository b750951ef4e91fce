#include "mnklab/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mnklab/numeric.hpp"
#include "mnklab/parallel.hpp"

namespace mnklab::search {

using game::Cell;
using game::Outcome;
using game::Player;

// --- BackupNode ---------------------------------------------------------------

BackupNode BackupNode::build(const State& s, int remaining_depth,
                             const features::FeatureSchema& schema,
                             double terminal_weight) {
  BackupNode node;
  Outcome o = game::classify(s);
  if (o != Outcome::Cont) {
    node.kind_ = Kind::Terminal;
    node.constant_ = terminal_weight * game::payoff(s, Player::One);
    return node;
  }
  if (remaining_depth == 0) {
    node.kind_ = Kind::Leaf;
    node.features_ = features::features(s, schema);
    return node;
  }
  node.kind_ = Kind::Internal;
  node.maximize_ = s.mover() == Player::One;
  for (Action a : game::legal_actions(s))
    node.children_.push_back(build(game::apply(s, a), remaining_depth - 1, schema,
                                   terminal_weight));
  return node;
}

BackupNode::Eval BackupNode::eval(std::span<const double> theta) const {
  switch (kind_) {
    case Kind::Terminal:
      return {constant_, nullptr};
    case Kind::Leaf:
      return {dot(features_, theta), &features_};
    case Kind::Internal: {
      Eval best = children_.front().eval(theta);
      for (std::size_t i = 1; i < children_.size(); ++i) {
        Eval child = children_[i].eval(theta);
        if (maximize_ ? child.value > best.value : child.value < best.value) best = child;
      }
      return best;
    }
  }
  return {0.0, nullptr};
}

StateBackup StateBackup::build(const State& s, int depth,
                               const features::FeatureSchema& schema,
                               double terminal_weight) {
  if (depth < 1) throw std::invalid_argument("search depth must be at least 1 ply");
  if (game::classify(s) != Outcome::Cont)
    throw std::logic_error("backup requested at a terminal state");
  StateBackup backup;
  backup.actions_ = game::legal_actions(s);
  backup.trees_.reserve(backup.actions_.size());
  for (Action a : backup.actions_)
    backup.trees_.push_back(
        BackupNode::build(game::apply(s, a), depth - 1, schema, terminal_weight));
  return backup;
}

std::vector<double> StateBackup::values(std::span<const double> theta) const {
  std::vector<double> q(trees_.size());
  for (std::size_t i = 0; i < trees_.size(); ++i) q[i] = trees_[i].eval(theta).value;
  return q;
}

std::vector<BackupNode::Eval> StateBackup::evals(std::span<const double> theta) const {
  std::vector<BackupNode::Eval> out(trees_.size());
  for (std::size_t i = 0; i < trees_.size(); ++i) out[i] = trees_[i].eval(theta);
  return out;
}

// --- Tablebase / opening book ---------------------------------------------------

Tablebase Tablebase::build(const oracle::ValueTable& solved, int max_empty) {
  Tablebase tb;
  tb.spec_ = solved.spec();
  tb.max_empty_ = max_empty;
  const int cells = tb.spec_.cells();
  for (const auto& [key, value] : solved.values()) {
    State s = game::unpack(tb.spec_, key);
    if (cells - s.stones <= max_empty) tb.values_.emplace(key, value);
  }
  return tb;
}

std::optional<int> Tablebase::lookup(const State& s) const {
  if (s.spec != spec_) return std::nullopt;
  if (spec_.cells() - s.stones > max_empty_) return std::nullopt;
  auto it = values_.find(game::canonical_packed(s));
  if (it == values_.end()) return std::nullopt;
  return static_cast<int>(it->second);
}

void Tablebase::export_csv(std::ostream& os) const {
  std::vector<std::uint64_t> keys;
  for (const auto& [k, v] : values_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  os << "canonical_key,value\n";
  for (std::uint64_t k : keys)
    os << game::encode(game::unpack(spec_, k)) << ',' << static_cast<int>(values_.at(k))
       << '\n';
}

OpeningBook OpeningBook::build(const oracle::ValueTable& solved, int max_plies) {
  OpeningBook book;
  book.spec_ = solved.spec();
  book.max_plies_ = max_plies;
  for (const auto& [key, value] : solved.values()) {
    State s = game::unpack(book.spec_, key);
    if (s.stones >= max_plies) continue;
    if (game::classify(s) != Outcome::Cont) continue;
    book.moves_.emplace(key, solved.optimal_actions(s).front());
  }
  return book;
}

std::optional<Action> OpeningBook::lookup(const State& s) const {
  if (s.spec != spec_ || s.stones >= max_plies_) return std::nullopt;
  game::Canonical can = game::canonicalize(s);
  auto it = moves_.find(can.state.packed());
  if (it == moves_.end()) return std::nullopt;
  // The stored action belongs to the canonical representative; pull it back
  // through a transform that maps s onto the representative.
  const auto& geom = game::geometry(s.spec);
  int perm = can.perm_indices.front();
  return game::transform_action(can.state, it->second, geom.inverse_perm[perm]);
}

void OpeningBook::export_csv(std::ostream& os) const {
  std::vector<std::uint64_t> keys;
  for (const auto& [k, v] : moves_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  os << "canonical_key,action\n";
  for (std::uint64_t k : keys)
    os << game::encode(game::unpack(spec_, k)) << ',' << moves_.at(k) << '\n';
}

// --- Alpha-beta ------------------------------------------------------------------

namespace {

struct AlphaBeta {
  const features::FeatureSchema& schema;
  std::span<const double> theta;
  double terminal_weight;
  const Tablebase* tablebase;
  bool prune;
  long nodes = 0;

  double visit(const State& s, int remaining, double alpha, double beta) {
    ++nodes;
    Outcome o = game::classify(s);
    if (o != Outcome::Cont) return terminal_weight * game::payoff(s, Player::One);
    if (tablebase != nullptr) {
      if (auto v = tablebase->lookup(s)) return terminal_weight * static_cast<double>(*v);
    }
    if (remaining == 0) return dot(features::features(s, schema), theta);

    bool maximizing = s.mover() == Player::One;
    double best = maximizing ? -std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::infinity();
    for (Action a : game::legal_actions(s)) {
      double v = visit(game::apply(s, a), remaining - 1, alpha, beta);
      if (maximizing) {
        best = std::max(best, v);
        alpha = std::max(alpha, best);
      } else {
        best = std::min(best, v);
        beta = std::min(beta, best);
      }
      if (prune && alpha >= beta) break;
    }
    return best;
  }
};

}  // namespace

SearchResult alphabeta(const State& s, const SearchConfig& cfg,
                       const features::EvalParams& params, const Tablebase* tablebase,
                       const OpeningBook* book, bool prune) {
  if (game::classify(s) != Outcome::Cont)
    throw std::logic_error("search requested at a terminal state");
  if (cfg.depth < 1) throw std::invalid_argument("search depth must be at least 1 ply");

  SearchResult result;
  if (cfg.use_book && book != nullptr) {
    if (auto a = book->lookup(s)) {
      result.best_action = *a;
      result.value = std::numeric_limits<double>::quiet_NaN();
      result.from_book = true;
      return result;
    }
  }

  const auto schema = features::schema_for(s.spec, params.schema_id);
  AlphaBeta ab{schema, params.theta, params.terminal_weight,
               cfg.use_tablebase ? tablebase : nullptr, prune};

  const double inf = std::numeric_limits<double>::infinity();
  bool maximizing = s.mover() == Player::One;
  double best = maximizing ? -inf : inf;
  Action best_action = -1;
  double alpha = -inf, beta = inf;
  // Strict improvement keeps the first (lowest-index) action among ties; with
  // fail-soft windows a tied later child can only come back <= the incumbent,
  // so pruning cannot change the selection.
  for (Action a : game::legal_actions(s)) {
    double v = ab.visit(game::apply(s, a), cfg.depth - 1, alpha, beta);
    if (best_action == -1 || (maximizing ? v > best : v < best)) {
      best = v;
      best_action = a;
    }
    if (prune) {
      if (maximizing)
        alpha = std::max(alpha, best);
      else
        beta = std::min(beta, best);
    }
  }
  result.best_action = best_action;
  result.value = best;
  result.nodes = ab.nodes;
  return result;
}

SearchAgent::SearchAgent(GameSpec spec, features::EvalParams params, SearchConfig cfg,
                         std::shared_ptr<const Tablebase> tablebase,
                         std::shared_ptr<const OpeningBook> book)
    : spec_(spec),
      params_(std::move(params)),
      cfg_(cfg),
      tablebase_(std::move(tablebase)),
      book_(std::move(book)) {
  if (static_cast<int>(params_.theta.size()) !=
      features::schema_for(spec, params_.schema_id).dim())
    throw std::invalid_argument("eval params do not match the spec's feature schema");
}

std::string SearchAgent::name() const {
  return "eval(depth=" + std::to_string(cfg_.depth) + ")";
}

Action SearchAgent::choose(const State& s, Rng&) const {
  return alphabeta(s, cfg_, params_, tablebase_.get(), book_.get()).best_action;
}

// --- Calibration ---------------------------------------------------------------

namespace {

// Seat-balanced measured win-score of `candidate` against `opponent`.
double measure_win_score(const GameSpec& spec, const agents::Agent& candidate,
                         const agents::Agent& opponent, int games, std::uint64_t seed,
                         int workers) {
  std::vector<double> scores(games);
  parallel_for(games, workers, [&](std::size_t g) {
    Rng rng(derive_seed(seed, 101, g));
    bool candidate_first = g % 2 == 0;
    game::GameRecord rec =
        candidate_first ? agents::play_game(spec, candidate, opponent, rng)
                        : agents::play_game(spec, opponent, candidate, rng);
    double p1_score = rec.outcome == Outcome::Win    ? 1.0
                      : rec.outcome == Outcome::Loss ? 0.0
                                                     : 0.5;
    scores[g] = candidate_first ? p1_score : 1.0 - p1_score;
  });
  double total = 0.0;
  for (double v : scores) total += v;
  return total / static_cast<double>(games);
}

}  // namespace

CalibrationResult calibrate(const GameSpec& spec, const features::EvalParams& theta0,
                            const agents::Agent& opponent, int budget_games,
                            std::uint64_t seed, const CalibrateOptions& options) {
  CalibrationResult result;
  result.best = theta0;
  const int dim = static_cast<int>(theta0.theta.size());
  SearchConfig cfg;
  cfg.depth = options.depth;

  int games_left = budget_games;
  auto evaluate = [&](const features::EvalParams& params, std::uint64_t eval_seed) {
    SearchAgent agent(spec, params, cfg);
    double score = measure_win_score(spec, agent, opponent, options.eval_games, eval_seed,
                                     options.workers);
    games_left -= options.eval_games;
    result.games_used += options.eval_games;
    return score;
  };

  if (games_left < options.eval_games) return result;  // nothing measurable

  int candidate_index = 0;
  result.initial_win_score = evaluate(theta0, derive_seed(seed, 7, candidate_index));
  result.best_win_score = result.initial_win_score;
  result.trace.push_back({candidate_index, -1, 0.0, result.initial_win_score, true});

  double step = options.step;
  int coordinate = 0, sign = +1, stale = 0;
  while (games_left >= options.eval_games && dim > 0) {
    ++candidate_index;
    features::EvalParams candidate = result.best;
    candidate.theta[coordinate] += sign * step;
    double measured = evaluate(candidate, derive_seed(seed, 7, candidate_index));
    bool accepted = measured > result.best_win_score;
    result.trace.push_back({candidate_index, coordinate, sign * step, measured, accepted});
    if (accepted) {
      result.best = candidate;
      result.best_win_score = measured;
      stale = 0;
    } else {
      ++stale;
    }
    if (sign == +1) {
      sign = -1;
    } else {
      sign = +1;
      coordinate = (coordinate + 1) % dim;
    }
    if (stale >= 2 * dim) {  // a full rejected sweep: refine the step
      step *= 0.5;
      stale = 0;
    }
  }
  return result;
}

}  // namespace mnklab::search
