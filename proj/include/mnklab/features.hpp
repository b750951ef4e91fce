// Board feature extraction and the linear evaluation function. The default
// schema counts "open lines": k-length windows holding exactly j of one
// player's stones and none of the opponent's, for j = 1..k-1, per player,
// plus a center-occupancy indicator. All entries are signed from player 1's
// perspective (opponent counts enter negatively), so a positive weight vector
// scores positions well for player 1.
#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mnklab/game.hpp"

namespace mnklab::features {

using game::GameSpec;
using game::State;

struct FeatureSchema {
  std::string id;
  std::vector<std::string> names;
  int dim() const { return static_cast<int>(names.size()); }
};

// "mnk-lines-v1" (default): [p1_open_j]_j, [-p2_open_j]_j, center sign.
// "mnk-lines-diff-v1": [p1_open_j - p2_open_j]_j, center sign.
// Unknown ids throw.
FeatureSchema schema_for(const GameSpec& spec, const std::string& id = "mnk-lines-v1");

std::vector<double> features(const State& s, const FeatureSchema& schema);

struct EvalParams {
  std::string schema_id = "mnk-lines-v1";
  std::vector<double> theta;
  double terminal_weight = 1000.0;  // W; dominates any achievable feature score

  static EvalParams zeros(const GameSpec& spec, const std::string& schema_id = "mnk-lines-v1");
};

double linear_eval(const State& s, const EvalParams& params);
double linear_eval(const State& s, const FeatureSchema& schema,
                   std::span<const double> theta);

// CSV with a comment header carrying schema id and W:
//   # schema=<id> W=<value>
//   feature_name,weight
void write_eval_params_csv(std::ostream& os, const EvalParams& params,
                           const FeatureSchema& schema);
EvalParams read_eval_params_csv(std::istream& is);

}  // namespace mnklab::features
