#include "mnklab/nfxp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mnklab/numeric.hpp"
#include "mnklab/parallel.hpp"

namespace mnklab::nfxp {

using json = nlohmann::json;

std::vector<double> choice_probs(const State& s, std::span<const double> theta,
                                 const NfxpConfig& cfg) {
  auto schema = features::schema_for(s.spec, cfg.schema_id);
  auto backup = search::StateBackup::build(s, cfg.depth, schema, cfg.terminal_weight);
  return expert::logit_choice(backup.values(theta), s.mover(), 1.0);
}

CompiledLikelihood::CompiledLikelihood(const expert::Dataset& data, const NfxpConfig& cfg,
                                       std::optional<Player> only_player)
    : cfg_(cfg) {
  auto schema = features::schema_for(data.spec, cfg.schema_id);
  dim_ = schema.dim();

  // Group observation counts by distinct state; the ordered map fixes the
  // reduction order regardless of how the dataset file was ordered.
  std::map<std::uint64_t, std::map<Action, double>> counts;
  std::map<std::uint64_t, State> states;
  for (const auto& obs : data.observations) {
    if (only_player && obs.player != *only_player) continue;
    std::uint64_t key = obs.state.packed();
    counts[key][obs.action] += 1.0;
    states.emplace(key, obs.state);
    ++n_observations_;
  }
  if (n_observations_ == 0) throw std::invalid_argument("empty dataset");

  groups_.reserve(counts.size());
  for (auto& [key, by_action] : counts) {
    const State& s = states.at(key);
    StateGroup group;
    group.backup = search::StateBackup::build(s, cfg.depth, schema, cfg.terminal_weight);
    group.sign = s.mover() == Player::One ? 1.0 : -1.0;
    const auto& acts = group.backup.actions();
    for (const auto& [action, count] : by_action) {
      auto it = std::find(acts.begin(), acts.end(), action);
      if (it == acts.end())
        throw std::invalid_argument("dataset observation with illegal action");
      group.action_counts.emplace_back(static_cast<int>(it - acts.begin()), count);
      group.total += count;
    }
    groups_.push_back(std::move(group));
  }
}

double CompiledLikelihood::loglik(std::span<const double> theta) const {
  const std::size_t chunk_size = static_cast<std::size_t>(cfg_.chunk_size);
  const std::size_t n_chunks = (groups_.size() + chunk_size - 1) / chunk_size;
  std::vector<double> partial(n_chunks, 0.0);
  parallel_for(n_chunks, cfg_.workers, [&](std::size_t chunk) {
    double acc = 0.0;
    std::vector<double> scaled;
    std::size_t lo = chunk * chunk_size;
    std::size_t hi = std::min(groups_.size(), lo + chunk_size);
    for (std::size_t gi = lo; gi < hi; ++gi) {
      const StateGroup& group = groups_[gi];
      auto q = group.backup.values(theta);
      scaled.assign(q.begin(), q.end());
      for (double& v : scaled) v *= group.sign;
      double lse = logsumexp(scaled);
      for (const auto& [idx, count] : group.action_counts)
        acc += count * (scaled[idx] - lse);
    }
    partial[chunk] = acc;
  });
  double total = 0.0;
  for (double v : partial) total += v;  // fixed chunk order: bit-stable
  if (cfg_.ridge > 0.0) total -= 0.5 * cfg_.ridge * dot(theta, theta);
  return total;
}

double CompiledLikelihood::loglik_grad(std::span<const double> theta,
                                       std::span<double> grad) const {
  if (static_cast<int>(grad.size()) != dim_)
    throw std::invalid_argument("gradient buffer has wrong dimension");
  const std::size_t chunk_size = static_cast<std::size_t>(cfg_.chunk_size);
  const std::size_t n_chunks = (groups_.size() + chunk_size - 1) / chunk_size;
  std::vector<double> partial_ll(n_chunks, 0.0);
  std::vector<std::vector<double>> partial_grad(n_chunks);

  parallel_for(n_chunks, cfg_.workers, [&](std::size_t chunk) {
    double acc = 0.0;
    std::vector<double> g(dim_, 0.0), scaled, probs, expected(dim_);
    std::size_t lo = chunk * chunk_size;
    std::size_t hi = std::min(groups_.size(), lo + chunk_size);
    for (std::size_t gi = lo; gi < hi; ++gi) {
      const StateGroup& group = groups_[gi];
      auto evals = group.backup.evals(theta);
      scaled.resize(evals.size());
      for (std::size_t i = 0; i < evals.size(); ++i)
        scaled[i] = group.sign * evals[i].value;
      double lse = logsumexp(scaled);
      probs.resize(evals.size());
      for (std::size_t i = 0; i < evals.size(); ++i)
        probs[i] = std::exp(scaled[i] - lse);

      std::fill(expected.begin(), expected.end(), 0.0);
      for (std::size_t i = 0; i < evals.size(); ++i) {
        if (evals[i].leaf_features == nullptr || probs[i] == 0.0) continue;
        const auto& x = *evals[i].leaf_features;
        for (int d = 0; d < dim_; ++d) expected[d] += probs[i] * x[d];
      }
      for (const auto& [idx, count] : group.action_counts) {
        acc += count * (scaled[idx] - lse);
        // d loglik / d theta = sign * (x_chosen - E[x]) per observation
        if (evals[idx].leaf_features != nullptr) {
          const auto& x = *evals[idx].leaf_features;
          for (int d = 0; d < dim_; ++d)
            g[d] += count * group.sign * (x[d] - expected[d]);
        } else {
          for (int d = 0; d < dim_; ++d) g[d] -= count * group.sign * expected[d];
        }
      }
    }
    partial_ll[chunk] = acc;
    partial_grad[chunk] = std::move(g);
  });

  double total = 0.0;
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    total += partial_ll[c];
    for (int d = 0; d < dim_; ++d) grad[d] += partial_grad[c][d];
  }
  if (cfg_.ridge > 0.0) {
    total -= 0.5 * cfg_.ridge * dot(theta, theta);
    for (int d = 0; d < dim_; ++d) grad[d] -= cfg_.ridge * theta[d];
  }
  return total;
}

std::vector<double> CompiledLikelihood::opg_covariance(std::span<const double> theta) const {
  std::vector<double> opg(dim_ * dim_, 0.0);
  std::vector<double> scaled, probs, expected(dim_), score(dim_);
  for (const StateGroup& group : groups_) {
    auto evals = group.backup.evals(theta);
    scaled.resize(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) scaled[i] = group.sign * evals[i].value;
    double lse = logsumexp(scaled);
    probs.resize(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) probs[i] = std::exp(scaled[i] - lse);
    std::fill(expected.begin(), expected.end(), 0.0);
    for (std::size_t i = 0; i < evals.size(); ++i) {
      if (evals[i].leaf_features == nullptr || probs[i] == 0.0) continue;
      const auto& x = *evals[i].leaf_features;
      for (int d = 0; d < dim_; ++d) expected[d] += probs[i] * x[d];
    }
    for (const auto& [idx, count] : group.action_counts) {
      for (int d = 0; d < dim_; ++d) {
        double xd = evals[idx].leaf_features ? (*evals[idx].leaf_features)[d] : 0.0;
        score[d] = group.sign * (xd - expected[d]);
      }
      for (int r = 0; r < dim_; ++r)
        for (int c = 0; c < dim_; ++c) opg[r * dim_ + c] += count * score[r] * score[c];
    }
  }
  return opt::invert_matrix(std::move(opg), dim_);
}

std::string FitResult::to_json() const {
  json j;
  j["theta"] = theta_hat.theta;
  j["schema"] = theta_hat.schema_id;
  j["terminal_weight"] = theta_hat.terminal_weight;
  j["loglik"] = loglik;
  j["gradient_norm"] = gradient_norm;
  j["converged"] = converged;
  j["diverged"] = diverged;
  j["message"] = message;
  j["n_observations"] = n_observations;
  j["standard_errors"] = standard_errors;
  json trace_rows = json::array();
  for (const auto& row : trace)
    trace_rows.push_back({{"iteration", row.iteration},
                          {"loglik", row.value},
                          {"gradient_norm", row.gradient_norm},
                          {"step", row.step}});
  j["trace"] = trace_rows;
  j["config"] = {{"depth", config.depth},
                 {"schema", config.schema_id},
                 {"terminal_weight", config.terminal_weight},
                 {"ridge", config.ridge},
                 {"max_iterations", config.max_iterations},
                 {"gradient_tolerance", config.gradient_tolerance}};
  return j.dump(2);
}

FitResult FitResult::from_json(const std::string& text) {
  json j = json::parse(text);
  FitResult r;
  r.theta_hat.theta = j.at("theta").get<std::vector<double>>();
  r.theta_hat.schema_id = j.at("schema").get<std::string>();
  r.theta_hat.terminal_weight = j.at("terminal_weight").get<double>();
  r.loglik = j.at("loglik").get<double>();
  r.gradient_norm = j.at("gradient_norm").get<double>();
  r.converged = j.at("converged").get<bool>();
  r.diverged = j.at("diverged").get<bool>();
  r.message = j.at("message").get<std::string>();
  r.n_observations = j.at("n_observations").get<long>();
  r.standard_errors = j.at("standard_errors").get<std::vector<double>>();
  for (const auto& row : j.at("trace"))
    r.trace.push_back({row.at("iteration").get<int>(), row.at("loglik").get<double>(),
                       row.at("gradient_norm").get<double>(), row.at("step").get<double>()});
  r.config.depth = j.at("config").at("depth").get<int>();
  r.config.schema_id = j.at("config").at("schema").get<std::string>();
  r.config.terminal_weight = j.at("config").at("terminal_weight").get<double>();
  r.config.ridge = j.at("config").at("ridge").get<double>();
  r.config.max_iterations = j.at("config").at("max_iterations").get<int>();
  r.config.gradient_tolerance = j.at("config").at("gradient_tolerance").get<double>();
  return r;
}

FitResult fit(const expert::Dataset& data, const NfxpConfig& cfg,
              const features::EvalParams& theta_init, std::optional<Player> only_player) {
  CompiledLikelihood compiled(data, cfg, only_player);
  if (static_cast<int>(theta_init.theta.size()) != compiled.dim())
    throw std::invalid_argument("theta_init dimension does not match the schema");
  if (!all_finite(theta_init.theta))
    throw std::invalid_argument("theta_init must be finite");

  opt::Options options;
  options.max_iterations = cfg.max_iterations;
  options.gradient_tolerance = cfg.gradient_tolerance;
  options.divergence_norm = cfg.divergence_norm;
  auto objective = [&compiled](std::span<const double> x, std::span<double> g) {
    return compiled.loglik_grad(x, g);
  };
  opt::Result opt_result = opt::maximize(objective, theta_init.theta, options);

  FitResult result;
  result.theta_hat.schema_id = cfg.schema_id;
  result.theta_hat.terminal_weight = cfg.terminal_weight;
  result.theta_hat.theta = opt_result.x;
  result.loglik = opt_result.value;
  result.gradient_norm = opt_result.gradient_norm;
  result.converged = opt_result.converged;
  result.diverged = opt_result.diverged;
  result.message = opt_result.message;
  result.n_observations = compiled.n_observations();
  result.trace = std::move(opt_result.trace);
  result.config = cfg;
  if (result.converged) {
    try {
      auto cov = compiled.opg_covariance(result.theta_hat.theta);
      result.standard_errors.resize(compiled.dim());
      for (int d = 0; d < compiled.dim(); ++d)
        result.standard_errors[d] = std::sqrt(std::max(0.0, cov[d * compiled.dim() + d]));
    } catch (const std::exception& e) {
      result.message += std::string("; standard errors unavailable: ") + e.what();
    }
  }
  return result;
}

void MisspecReport::write_csv(std::ostream& os) const {
  os << "metric,value\n";
  auto row = [&os](const char* name, double v) {
    std::ostringstream tmp;
    tmp.precision(17);
    tmp << v;
    os << name << ',' << tmp.str() << '\n';
  };
  row("pooled_norm", pooled_norm);
  row("p1_norm", p1_norm);
  row("p2_norm", p2_norm);
  row("norm_ratio", norm_ratio);
  row("log_ratio", log_ratio);
  row("log_ratio_se", log_ratio_se);
  os << "heterogeneity_significant," << (heterogeneity_significant ? 1 : 0) << '\n';
  os << "pooled_between_split," << (pooled_between_split ? 1 : 0) << '\n';
  os << "all_converged," << (all_converged ? 1 : 0) << '\n';
}

MisspecReport MisspecReport::read_csv(std::istream& is) {
  MisspecReport r;
  std::string line;
  if (!std::getline(is, line) || line != "metric,value")
    throw std::invalid_argument("misspec report CSV missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("bad report row: " + line);
    std::string name = line.substr(0, comma);
    double v = std::stod(line.substr(comma + 1));
    if (name == "pooled_norm") r.pooled_norm = v;
    else if (name == "p1_norm") r.p1_norm = v;
    else if (name == "p2_norm") r.p2_norm = v;
    else if (name == "norm_ratio") r.norm_ratio = v;
    else if (name == "log_ratio") r.log_ratio = v;
    else if (name == "log_ratio_se") r.log_ratio_se = v;
    else if (name == "heterogeneity_significant") r.heterogeneity_significant = v != 0;
    else if (name == "pooled_between_split") r.pooled_between_split = v != 0;
    else if (name == "all_converged") r.all_converged = v != 0;
    else throw std::invalid_argument("unknown report metric: " + name);
  }
  return r;
}

namespace {

// Delta-method standard error of log|theta|: grad is theta / |theta|^2.
double log_norm_se(const FitResult& fit, const CompiledLikelihood& compiled) {
  const int k = compiled.dim();
  auto cov = compiled.opg_covariance(fit.theta_hat.theta);
  double norm_sq = dot(fit.theta_hat.theta, fit.theta_hat.theta);
  double var = 0.0;
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c)
      var += fit.theta_hat.theta[r] * cov[r * k + c] * fit.theta_hat.theta[c];
  return std::sqrt(std::max(0.0, var)) / norm_sq;
}

}  // namespace

MisspecResult misspecification_experiment(const expert::Dataset& data,
                                          const NfxpConfig& cfg) {
  features::EvalParams init = features::EvalParams::zeros(data.spec, cfg.schema_id);
  init.terminal_weight = cfg.terminal_weight;

  MisspecResult out;
  out.pooled = fit(data, cfg, init);
  out.p1_only = fit(data, cfg, init, Player::One);
  out.p2_only = fit(data, cfg, init, Player::Two);

  MisspecReport& rep = out.report;
  rep.pooled_norm = norm2(out.pooled.theta_hat.theta);
  rep.p1_norm = norm2(out.p1_only.theta_hat.theta);
  rep.p2_norm = norm2(out.p2_only.theta_hat.theta);
  double hi = std::max(rep.p1_norm, rep.p2_norm);
  double lo = std::min(rep.p1_norm, rep.p2_norm);
  rep.norm_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  rep.log_ratio = std::log(rep.p1_norm / rep.p2_norm);
  rep.all_converged = out.pooled.converged && out.p1_only.converged && out.p2_only.converged;

  if (rep.all_converged) {
    CompiledLikelihood c1(data, cfg, Player::One);
    CompiledLikelihood c2(data, cfg, Player::Two);
    double se1 = log_norm_se(out.p1_only, c1);
    double se2 = log_norm_se(out.p2_only, c2);
    rep.log_ratio_se = std::sqrt(se1 * se1 + se2 * se2);
    rep.heterogeneity_significant =
        std::abs(rep.log_ratio) > 3.0 * rep.log_ratio_se && rep.norm_ratio > 1.5;
  }
  rep.pooled_between_split =
      rep.pooled_norm >= lo - 1e-12 && rep.pooled_norm <= hi + 1e-12;
  return out;
}

}  // namespace mnklab::nfxp
