#include "mnklab/expert.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mnklab/numeric.hpp"
#include "mnklab/parallel.hpp"

namespace mnklab::expert {

using game::Outcome;
using json = nlohmann::json;

double ExpertModel::lambda_for(Player p, long game_index, long n_games) const {
  if (per_player_scales) return p == Player::One ? per_player_scales->first
                                                 : per_player_scales->second;
  if (drift.active) {
    double frac = n_games > 1 ? static_cast<double>(game_index) /
                                    static_cast<double>(n_games - 1)
                              : 0.0;
    return drift.from + (drift.to - drift.from) * frac;
  }
  return lambda;
}

std::string ExpertModel::to_json() const {
  json j;
  j["mode"] = mode == ExpertMode::DepthLogit ? "depth_logit" : "soft_equilibrium";
  j["depth"] = depth;
  j["lambda"] = lambda;
  j["schema"] = theta_star.schema_id;
  j["theta"] = theta_star.theta;
  j["terminal_weight"] = theta_star.terminal_weight;
  if (per_player_scales)
    j["per_player_scales"] = {per_player_scales->first, per_player_scales->second};
  if (drift.active) j["lambda_drift"] = {{"from", drift.from}, {"to", drift.to}};
  return j.dump();
}

ExpertModel ExpertModel::from_json(const std::string& text) {
  json j = json::parse(text);
  ExpertModel m;
  std::string mode = j.at("mode").get<std::string>();
  if (mode == "depth_logit")
    m.mode = ExpertMode::DepthLogit;
  else if (mode == "soft_equilibrium")
    m.mode = ExpertMode::SoftEquilibrium;
  else
    throw std::invalid_argument("unknown expert mode: " + mode);
  m.depth = j.at("depth").get<int>();
  m.lambda = j.at("lambda").get<double>();
  m.theta_star.schema_id = j.at("schema").get<std::string>();
  m.theta_star.theta = j.at("theta").get<std::vector<double>>();
  m.theta_star.terminal_weight = j.at("terminal_weight").get<double>();
  if (j.contains("per_player_scales")) {
    auto v = j.at("per_player_scales").get<std::vector<double>>();
    m.per_player_scales = {v.at(0), v.at(1)};
  }
  if (j.contains("lambda_drift")) {
    m.drift.active = true;
    m.drift.from = j.at("lambda_drift").at("from").get<double>();
    m.drift.to = j.at("lambda_drift").at("to").get<double>();
  }
  return m;
}

std::vector<double> logit_choice(std::span<const double> q, Player mover, double lambda) {
  double sign = mover == Player::One ? 1.0 : -1.0;
  std::vector<double> probs(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) probs[i] = sign * q[i];
  softmax_inplace(probs, lambda);
  return probs;
}

ExpertSampler::ExpertSampler(GameSpec spec, ExpertModel model)
    : spec_(spec), model_(std::move(model)) {
  spec_.validate();
  if (model_.mode == ExpertMode::DepthLogit) {
    schema_ = features::schema_for(spec_, model_.theta_star.schema_id);
    if (static_cast<int>(model_.theta_star.theta.size()) != schema_.dim())
      throw std::invalid_argument("theta_star does not match the feature schema");
    if (model_.depth < 1) throw std::invalid_argument("expert depth must be >= 1 ply");
  } else {
    if (model_.per_player_scales || model_.drift.active)
      throw std::invalid_argument(
          "soft-equilibrium mode does not support per-player scales or drift");
    soft_ = std::make_shared<oracle::SoftValueTable>(
        oracle::soft_solve(spec_, model_.lambda));
  }
  if (!(model_.lambda > 0.0))
    throw std::invalid_argument("expert lambda must be positive");
}

std::span<const double> ExpertSampler::q_values(const State& s) const {
  std::uint64_t key = s.packed();
  std::lock_guard<std::mutex> lock(mu_);
  auto it = q_cache_.find(key);
  if (it == q_cache_.end()) {
    auto backup = search::StateBackup::build(s, model_.depth, schema_,
                                             model_.theta_star.terminal_weight);
    it = q_cache_.emplace(key, backup.values(model_.theta_star.theta)).first;
  }
  return it->second;
}

std::vector<double> ExpertSampler::choice_probs(const State& s, long game_index,
                                                long n_games) const {
  if (game::classify(s) != Outcome::Cont)
    throw std::logic_error("expert choice probabilities at a terminal state");
  if (model_.mode == ExpertMode::SoftEquilibrium) return soft_->choice_probs(s);
  double lambda = model_.lambda_for(s.mover(), game_index, n_games);
  return logit_choice(q_values(s), s.mover(), lambda);
}

GameRecord ExpertSampler::simulate_game(std::uint64_t seed, long game_index,
                                        long n_games) const {
  Rng rng(seed);
  GameRecord rec;
  rec.spec = spec_;
  State s = State::initial(spec_);
  while (game::classify(s) == Outcome::Cont) {
    auto acts = game::legal_actions(s);
    auto probs = choice_probs(s, game_index, n_games);
    Action a = acts[rng.categorical(probs)];
    rec.moves.push_back(a);
    s = game::apply(s, a);
  }
  rec.outcome = game::classify(s);
  return rec;
}

Dataset ExpertSampler::generate_dataset(long n_games, bool augment, std::uint64_t seed,
                                        int workers) const {
  if (n_games < 1) throw std::invalid_argument("n_games must be >= 1");
  Dataset data;
  data.spec = spec_;
  data.augmented = augment;
  data.seed = seed;
  data.model_json = model_.to_json();
  data.games.resize(n_games);
  parallel_for(n_games, workers, [&](std::size_t g) {
    data.games[g] = simulate_game(derive_seed(seed, 11, g), static_cast<long>(g), n_games);
  });

  const auto& geom = game::geometry(spec_);
  const int n_transforms = static_cast<int>(geom.perms.size());
  for (long g = 0; g < n_games; ++g) {
    State s = State::initial(spec_);
    int turn = 1;
    for (Action a : data.games[g].moves) {
      if (!augment) {
        data.observations.push_back(
            {static_cast<int>(g), turn, s, a, s.mover()});
      } else {
        for (int p = 0; p < n_transforms; ++p) {
          data.observations.push_back({static_cast<int>(g), turn, game::transform(s, p),
                                       game::transform_action(s, a, p), s.mover()});
        }
      }
      s = game::apply(s, a);
      ++turn;
    }
  }
  return data;
}

oracle::PolicyFn ExpertSampler::as_policy_fn() const {
  return [this](const State& s) { return choice_probs(s); };
}

std::vector<double> expert_choice_probs(const State& s, const ExpertModel& model) {
  ExpertSampler sampler(s.spec, model);
  return sampler.choice_probs(s);
}

void Dataset::write_jsonl(std::ostream& os) const {
  json header;
  header["type"] = "mnk-dataset";
  header["version"] = 1;
  header["spec"] = {{"m", spec.rows}, {"n", spec.cols}, {"k", spec.win_length}};
  header["n_games"] = games.size();
  header["augment"] = augmented;
  header["seed"] = seed;
  header["model"] = model_json.empty() ? json() : json::parse(model_json);
  os << header.dump() << '\n';
  for (const Observation& obs : observations) {
    json j;
    j["game_id"] = obs.game_id;
    j["turn"] = obs.turn;
    j["state_key"] = game::encode(obs.state);
    j["action"] = obs.action;
    j["player"] = obs.player == Player::One ? 1 : 2;
    os << j.dump() << '\n';
  }
}

Dataset Dataset::read_jsonl(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty dataset file");
  json header = json::parse(line);
  if (header.at("type") != "mnk-dataset")
    throw std::invalid_argument("not a dataset file");
  Dataset data;
  data.spec.rows = header.at("spec").at("m").get<int>();
  data.spec.cols = header.at("spec").at("n").get<int>();
  data.spec.win_length = header.at("spec").at("k").get<int>();
  data.spec.validate();
  data.augmented = header.at("augment").get<bool>();
  data.seed = header.at("seed").get<std::uint64_t>();
  if (!header.at("model").is_null()) data.model_json = header.at("model").dump();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    Observation obs;
    obs.game_id = j.at("game_id").get<int>();
    obs.turn = j.at("turn").get<int>();
    obs.state = game::decode(j.at("state_key").get<std::string>());
    obs.action = j.at("action").get<Action>();
    obs.player = j.at("player").get<int>() == 1 ? Player::One : Player::Two;
    if (!game::is_legal(obs.state, obs.action))
      throw std::invalid_argument("dataset observation with illegal action");
    data.observations.push_back(std::move(obs));
  }
  return data;
}

}  // namespace mnklab::expert
