// The Bonanza analog: maximum-likelihood estimation of the evaluation
// weights with a nested truncated-tree solve per state. The logit scale is
// normalized to 1 and the terminal weight W is held fixed, so the softmax
// sharpness loads onto the norm of theta.
#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mnklab/expert.hpp"
#include "mnklab/features.hpp"
#include "mnklab/game.hpp"
#include "mnklab/optimize.hpp"

namespace mnklab::nfxp {

using game::Action;
using game::Player;
using game::State;

struct NfxpConfig {
  int depth = 2;  // must match the DGP's L in recovery experiments
  std::string schema_id = "mnk-lines-v1";
  double terminal_weight = 1000.0;  // fixed, not estimated
  double ridge = 0.0;               // optional stabilization, default off
  int max_iterations = 300;
  double gradient_tolerance = 1e-6;
  double divergence_norm = 1e4;
  int chunk_size = 256;  // states per reduction chunk (deterministic order)
  int workers = 1;
};

// Model-predicted CCP at one state: the same backup-and-logit path as the
// expert DGP, with lambda pinned to 1.
std::vector<double> choice_probs(const State& s, std::span<const double> theta,
                                 const NfxpConfig& cfg);

// Dataset observations grouped by distinct state with their backup trees
// compiled once, so each likelihood evaluation is a tree walk per state
// instead of a search per observation.
class CompiledLikelihood {
 public:
  CompiledLikelihood(const expert::Dataset& data, const NfxpConfig& cfg,
                     std::optional<Player> only_player = std::nullopt);

  int dim() const { return dim_; }
  long n_observations() const { return n_observations_; }

  double loglik(std::span<const double> theta) const;
  // Fills grad (length dim) and returns the log-likelihood.
  double loglik_grad(std::span<const double> theta, std::span<double> grad) const;

  // Outer-product-of-scores covariance of theta_hat (row-major dim x dim).
  std::vector<double> opg_covariance(std::span<const double> theta) const;

 private:
  struct StateGroup {
    search::StateBackup backup;
    std::vector<std::pair<int, double>> action_counts;  // (action index, count)
    double total = 0.0;
    double sign = 1.0;  // +1 when player 1 moves at this state, else -1
  };
  NfxpConfig cfg_;
  int dim_ = 0;
  long n_observations_ = 0;
  std::vector<StateGroup> groups_;  // sorted by state key for stable reduction
};

struct FitResult {
  features::EvalParams theta_hat;
  double loglik = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  bool diverged = false;
  std::string message;
  long n_observations = 0;
  std::vector<double> standard_errors;  // OPG; empty when not computable
  std::vector<opt::IterationRow> trace;
  NfxpConfig config;

  std::string to_json() const;
  static FitResult from_json(const std::string& text);
};

FitResult fit(const expert::Dataset& data, const NfxpConfig& cfg,
              const features::EvalParams& theta_init,
              std::optional<Player> only_player = std::nullopt);

// Pooled-versus-split diagnosis for cross-sectional heterogeneity: fits one
// homogeneous model and one model per player, then compares the fitted theta
// norms. With lambda normalized, a player's logit scale loads onto |theta|.
struct MisspecReport {
  double pooled_norm = 0.0;
  double p1_norm = 0.0;
  double p2_norm = 0.0;
  double norm_ratio = 0.0;  // max(split) / min(split)
  double log_ratio = 0.0;   // log(p1_norm / p2_norm)
  double log_ratio_se = 0.0;
  // |log ratio| > 3 se and max/min ratio > 1.5 (3-sigma rule plus a
  // practical-size floor so tiny-SE runs cannot flag noise).
  bool heterogeneity_significant = false;
  bool pooled_between_split = false;
  bool all_converged = false;

  void write_csv(std::ostream& os) const;
  static MisspecReport read_csv(std::istream& is);
};

struct MisspecResult {
  MisspecReport report;
  FitResult pooled;
  FitResult p1_only;
  FitResult p2_only;
};

MisspecResult misspecification_experiment(const expert::Dataset& data,
                                          const NfxpConfig& cfg);

}  // namespace mnklab::nfxp
