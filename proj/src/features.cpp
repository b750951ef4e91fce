#include "mnklab/features.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mnklab/numeric.hpp"

namespace mnklab::features {

using game::Cell;

FeatureSchema schema_for(const GameSpec& spec, const std::string& id) {
  spec.validate();
  FeatureSchema schema;
  schema.id = id;
  const int k = spec.win_length;
  if (id == "mnk-lines-v1") {
    for (int j = 1; j < k; ++j) schema.names.push_back("p1_open" + std::to_string(j));
    for (int j = 1; j < k; ++j) schema.names.push_back("p2_open" + std::to_string(j));
    schema.names.push_back("center");
  } else if (id == "mnk-lines-diff-v1") {
    for (int j = 1; j < k; ++j) schema.names.push_back("open" + std::to_string(j) + "_diff");
    schema.names.push_back("center");
  } else {
    throw std::invalid_argument("unknown feature schema id: " + id);
  }
  return schema;
}

std::vector<double> features(const State& s, const FeatureSchema& schema) {
  const auto& geom = game::geometry(s.spec);
  const int k = s.spec.win_length;
  std::vector<int> open1(k, 0), open2(k, 0);  // index j = stone count in window
  for (const auto& w : geom.windows) {
    int n1 = 0, n2 = 0;
    for (int cell : w) {
      Cell c = s.cells[cell];
      n1 += c == Cell::P1;
      n2 += c == Cell::P2;
    }
    if (n2 == 0 && n1 >= 1 && n1 < k) ++open1[n1];
    if (n1 == 0 && n2 >= 1 && n2 < k) ++open2[n2];
  }
  double center = 0.0;
  if (geom.center_cell >= 0) {
    Cell c = s.cells[geom.center_cell];
    center = c == Cell::P1 ? 1.0 : c == Cell::P2 ? -1.0 : 0.0;
  }

  std::vector<double> x;
  x.reserve(schema.names.size());
  if (schema.id == "mnk-lines-v1") {
    for (int j = 1; j < k; ++j) x.push_back(open1[j]);
    for (int j = 1; j < k; ++j) x.push_back(-open2[j]);
    x.push_back(center);
  } else if (schema.id == "mnk-lines-diff-v1") {
    for (int j = 1; j < k; ++j) x.push_back(open1[j] - open2[j]);
    x.push_back(center);
  } else {
    throw std::invalid_argument("unknown feature schema id: " + schema.id);
  }
  return x;
}

EvalParams EvalParams::zeros(const GameSpec& spec, const std::string& schema_id) {
  EvalParams p;
  p.schema_id = schema_id;
  p.theta.assign(schema_for(spec, schema_id).dim(), 0.0);
  return p;
}

double linear_eval(const State& s, const FeatureSchema& schema,
                   std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != schema.dim())
    throw std::invalid_argument("theta dimension does not match feature schema");
  std::vector<double> x = features(s, schema);
  return dot(x, theta);
}

double linear_eval(const State& s, const EvalParams& params) {
  return linear_eval(s, schema_for(s.spec, params.schema_id), params.theta);
}

namespace {

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

}  // namespace

void write_eval_params_csv(std::ostream& os, const EvalParams& params,
                           const FeatureSchema& schema) {
  if (static_cast<int>(params.theta.size()) != schema.dim())
    throw std::invalid_argument("theta dimension does not match feature schema");
  os << "# schema=" << schema.id << " W=" << format_double(params.terminal_weight) << '\n';
  os << "feature_name,weight\n";
  for (int i = 0; i < schema.dim(); ++i)
    os << schema.names[i] << ',' << format_double(params.theta[i]) << '\n';
}

EvalParams read_eval_params_csv(std::istream& is) {
  EvalParams params;
  params.theta.clear();
  std::string line;
  if (!std::getline(is, line) || line.rfind("# schema=", 0) != 0)
    throw std::invalid_argument("eval params file missing '# schema=' header");
  std::istringstream header(line.substr(2));
  std::string field;
  while (header >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "schema")
      params.schema_id = value;
    else if (key == "W")
      params.terminal_weight = std::stod(value);
  }
  if (!std::getline(is, line) || line != "feature_name,weight")
    throw std::invalid_argument("eval params file missing column header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("bad eval params row: " + line);
    params.theta.push_back(std::stod(line.substr(comma + 1)));
  }
  if (!std::isfinite(params.terminal_weight) || params.terminal_weight <= 0.0)
    throw std::invalid_argument("terminal weight must be positive and finite");
  return params;
}

}  // namespace mnklab::features
