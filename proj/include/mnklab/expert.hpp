// The structural data-generating process: simulated experts choosing by
// logit over backed-up values. Produces every dataset the estimators consume,
// including the heterogeneity variants (per-player logit scales, and a scale
// drift across game indices).
#pragma once

#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mnklab/features.hpp"
#include "mnklab/game.hpp"
#include "mnklab/oracle.hpp"
#include "mnklab/rng.hpp"
#include "mnklab/search.hpp"

namespace mnklab::expert {

using game::Action;
using game::GameRecord;
using game::GameSpec;
using game::Player;
using game::State;

enum class ExpertMode { DepthLogit, SoftEquilibrium };

// Drift of the logit scale across game indices (inter-temporal heterogeneity):
// game g of n uses scale lerp(from, to, g/(n-1)). DepthLogit mode only.
struct LambdaDrift {
  bool active = false;
  double from = 1.0;
  double to = 1.0;
};

struct ExpertModel {
  ExpertMode mode = ExpertMode::DepthLogit;
  features::EvalParams theta_star;  // true evaluation weights (DepthLogit)
  int depth = 2;                    // L in plies; 2 = own move plus one reply
  double lambda = 1.0;
  // Cross-sectional heterogeneity: fixed per-player scales overriding lambda.
  std::optional<std::pair<double, double>> per_player_scales;
  LambdaDrift drift;

  double lambda_for(Player p, long game_index, long n_games) const;
  std::string to_json() const;
  static ExpertModel from_json(const std::string& text);
};

// softmax(lambda * own-perspective q) where q is player-1 perspective.
std::vector<double> logit_choice(std::span<const double> q, Player mover, double lambda);

struct Observation {
  int game_id = 0;
  int turn = 0;  // 1-based; state is the position *before* the move
  State state;
  Action action = -1;
  Player player = Player::One;
};

struct Dataset {
  GameSpec spec;
  bool augmented = false;
  std::uint64_t seed = 0;
  std::string model_json;  // config echo written to the file header
  std::vector<GameRecord> games;
  std::vector<Observation> observations;

  // JSONL: one header object, then one object per observation.
  void write_jsonl(std::ostream& os) const;
  static Dataset read_jsonl(std::istream& is);
};

// Holds the model plus per-state caches of backed-up values, so bulk
// simulation does not rebuild search trees. Thread-safe; cache contents never
// affect results.
class ExpertSampler {
 public:
  ExpertSampler(GameSpec spec, ExpertModel model);

  const ExpertModel& model() const { return model_; }
  const GameSpec& spec() const { return spec_; }

  std::vector<double> choice_probs(const State& s, long game_index = 0,
                                   long n_games = 1) const;

  // Both movers sample from choice_probs until terminal; a pure function of
  // the seed (and the game index when a drift schedule is active).
  GameRecord simulate_game(std::uint64_t seed, long game_index = 0,
                           long n_games = 1) const;

  Dataset generate_dataset(long n_games, bool augment, std::uint64_t seed,
                           int workers = 1) const;

  // Policy view at fixed game index 0 (no drift).
  oracle::PolicyFn as_policy_fn() const;

 private:
  std::span<const double> q_values(const State& s) const;

  GameSpec spec_;
  ExpertModel model_;
  features::FeatureSchema schema_;
  std::shared_ptr<const oracle::SoftValueTable> soft_;  // SoftEquilibrium mode
  mutable std::mutex mu_;
  mutable std::unordered_map<std::uint64_t, std::vector<double>> q_cache_;
};

// Convenience wrapper for one-off queries; bulk callers use ExpertSampler.
std::vector<double> expert_choice_probs(const State& s, const ExpertModel& model);

}  // namespace mnklab::expert
