// Truncated full-width minimax with alpha-beta pruning over the linear
// evaluation function, exact endgame tablebase, opening book, and a seeded
// coordinate-search calibration loop. Also home of the compiled depth-L
// backup trees that the expert DGP and the NFXP likelihood both evaluate.
#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mnklab/agents.hpp"
#include "mnklab/features.hpp"
#include "mnklab/game.hpp"
#include "mnklab/oracle.hpp"

namespace mnklab::search {

using game::Action;
using game::GameSpec;
using game::State;

struct SearchConfig {
  int depth = 2;  // lookahead in plies; depth 2 = own move plus one reply
  bool use_tablebase = false;
  bool use_book = false;
};

// --- Compiled depth-L backup -------------------------------------------------

// Minimax backup tree whose leaves are either exact terminal constants (+-W)
// or feature vectors scored as theta.x. Evaluating at a given theta walks the
// tree once; the gradient of the backed-up value is the feature vector of the
// deciding leaf (zero for terminal-decided backups). Children are ordered by
// action index and comparisons are strict, matching the engine's tie-break.
class BackupNode {
 public:
  struct Eval {
    double value;
    const std::vector<double>* leaf_features;  // nullptr when terminal-decided
  };

  static BackupNode build(const State& s, int remaining_depth,
                          const features::FeatureSchema& schema, double terminal_weight);

  Eval eval(std::span<const double> theta) const;

 private:
  enum class Kind { Terminal, Leaf, Internal };
  Kind kind_ = Kind::Terminal;
  double constant_ = 0.0;          // Terminal
  std::vector<double> features_;   // Leaf
  bool maximize_ = true;           // Internal: mover is player 1
  std::vector<BackupNode> children_;
};

// Backup trees for every legal action of one state: q(a) is the depth-(L-1)
// backup from apply(s, a), player-1 perspective.
class StateBackup {
 public:
  static StateBackup build(const State& s, int depth,
                           const features::FeatureSchema& schema, double terminal_weight);

  const std::vector<Action>& actions() const { return actions_; }
  std::vector<double> values(std::span<const double> theta) const;
  std::vector<BackupNode::Eval> evals(std::span<const double> theta) const;

 private:
  std::vector<Action> actions_;
  std::vector<BackupNode> trees_;
};

// --- Databases ---------------------------------------------------------------

// Exact values for every reachable state with at most max_empty empty cells;
// definitionally a filtered copy of the full solve.
class Tablebase {
 public:
  static Tablebase build(const oracle::ValueTable& solved, int max_empty);

  const GameSpec& spec() const { return spec_; }
  int max_empty() const { return max_empty_; }
  std::size_t size() const { return values_.size(); }
  std::optional<int> lookup(const State& s) const;

  void export_csv(std::ostream& os) const;  // canonical_key,value

 private:
  GameSpec spec_;
  int max_empty_ = 0;
  std::unordered_map<std::uint64_t, std::int8_t> values_;
};

// Optimal first moves for every state within the first max_plies plies
// (i.e. states with fewer than max_plies stones).
class OpeningBook {
 public:
  static OpeningBook build(const oracle::ValueTable& solved, int max_plies);

  const GameSpec& spec() const { return spec_; }
  std::size_t size() const { return moves_.size(); }
  std::optional<Action> lookup(const State& s) const;

  void export_csv(std::ostream& os) const;  // canonical_key,action

 private:
  GameSpec spec_;
  int max_plies_ = 0;
  std::unordered_map<std::uint64_t, Action> moves_;  // canonical key -> action
};

// --- Search ------------------------------------------------------------------

struct SearchResult {
  Action best_action = -1;
  double value = 0.0;  // player-1 perspective, terminal scale +-W
  bool from_book = false;
  long nodes = 0;
};

// Full-width minimax to cfg.depth with alpha-beta pruning. Leaf values are
// exact +-W at terminals, W * v* at tablebase hits, linear_eval otherwise.
// Root ties break to the lowest cell index; pruning never changes the result.
SearchResult alphabeta(const State& s, const SearchConfig& cfg,
                       const features::EvalParams& params,
                       const Tablebase* tablebase = nullptr,
                       const OpeningBook* book = nullptr, bool prune = true);

class SearchAgent final : public agents::Agent {
 public:
  SearchAgent(GameSpec spec, features::EvalParams params, SearchConfig cfg,
              std::shared_ptr<const Tablebase> tablebase = nullptr,
              std::shared_ptr<const OpeningBook> book = nullptr);
  std::string name() const override;
  Action choose(const State& s, Rng& rng) const override;  // deterministic

  const features::EvalParams& params() const { return params_; }

 private:
  GameSpec spec_;
  features::EvalParams params_;
  SearchConfig cfg_;
  std::shared_ptr<const Tablebase> tablebase_;
  std::shared_ptr<const OpeningBook> book_;
};

// --- Calibration ---------------------------------------------------------------

struct CalibrateOptions {
  int depth = 2;
  int eval_games = 200;  // per candidate measurement, seat-balanced
  double step = 1.0;     // coordinate perturbation size
  int workers = 1;
};

struct CalibrationTraceRow {
  int candidate_index;  // 0 is theta0 itself
  int coordinate;       // -1 for theta0
  double delta;
  double measured_win_score;
  bool accepted;
};

struct CalibrationResult {
  features::EvalParams best;
  double best_win_score = 0.0;     // measured for the returned theta
  double initial_win_score = 0.0;  // measured for theta0
  int games_used = 0;
  std::vector<CalibrationTraceRow> trace;
};

// Coordinate-perturbation hill climbing on the measured win-score against a
// fixed opponent: cycles through coordinates with +-step proposals, keeps a
// candidate only when its measurement strictly beats the incumbent's, and
// stops when the game budget is spent. Returns the best-measured theta, so
// the result never scores below theta0's own measurement.
CalibrationResult calibrate(const GameSpec& spec, const features::EvalParams& theta0,
                            const agents::Agent& opponent, int budget_games,
                            std::uint64_t seed, const CalibrateOptions& options = {});

}  // namespace mnklab::search
