#include "mnklab/game.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mnklab::game {

using json = nlohmann::json;

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Cont: return "cont";
    case Outcome::Win: return "win";
    case Outcome::Loss: return "loss";
    case Outcome::Draw: return "draw";
  }
  return "?";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "cont") return Outcome::Cont;
  if (s == "win") return Outcome::Win;
  if (s == "loss") return Outcome::Loss;
  if (s == "draw") return Outcome::Draw;
  throw std::invalid_argument("unknown outcome '" + s + "'");
}

void GameSpec::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("board dimensions must be positive");
  if (rows * cols > kMaxCells)
    throw std::invalid_argument("board exceeds the 25-cell desk-scale cap");
  if (win_length < 3) throw std::invalid_argument("win_length must be at least 3");
  if (win_length > std::max(rows, cols))
    throw std::invalid_argument("win_length exceeds both board dimensions");
}

GameSpec GameSpec::parse(const std::string& text) {
  GameSpec spec;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> spec.rows >> c1 >> spec.cols >> c2 >> spec.win_length) || c1 != ',' || c2 != ',')
    throw std::invalid_argument("expected game spec as 'm,n,k', got '" + text + "'");
  spec.validate();
  return spec;
}

std::string GameSpec::to_text() const {
  return std::to_string(rows) + "," + std::to_string(cols) + "," + std::to_string(win_length);
}

State State::initial(const GameSpec& spec) {
  spec.validate();
  State s;
  s.spec = spec;
  return s;
}

std::uint64_t State::packed() const {
  std::uint64_t key = 0;
  for (int i = 0; i < spec.cells(); ++i)
    key = (key << 2) | static_cast<std::uint64_t>(cells[i]);
  return key;
}

namespace {

std::array<int, kMaxCells> make_perm(const GameSpec& spec, int which) {
  // which encodes rotation count (0..3) plus an optional transpose-flavored
  // flip; non-square boards only admit the 180-degree subgroup.
  std::array<int, kMaxCells> perm{};
  const int m = spec.rows, n = spec.cols;
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) {
      int rr = r, cc = c;
      switch (which) {
        case 0: break;                              // identity
        case 1: rr = m - 1 - r; cc = n - 1 - c; break;  // rotate 180
        case 2: cc = n - 1 - c; break;              // flip horizontally
        case 3: rr = m - 1 - r; break;              // flip vertically
        case 4: rr = c; cc = r; break;              // transpose (square only)
        case 5: rr = n - 1 - c; cc = r; break;      // rotate 90
        case 6: rr = c; cc = m - 1 - r; break;      // rotate 270
        case 7: rr = n - 1 - c; cc = m - 1 - r; break;  // anti-transpose
      }
      perm[r * n + c] = rr * n + cc;  // transpose cases only occur when m == n
    }
  }
  return perm;
}

std::unique_ptr<Geometry> build_geometry(const GameSpec& spec) {
  spec.validate();
  auto g = std::make_unique<Geometry>();
  g->spec = spec;
  const int m = spec.rows, n = spec.cols, k = spec.win_length;

  auto add_window = [&](int r, int c, int dr, int dc) {
    std::vector<int> w;
    for (int i = 0; i < k; ++i) w.push_back((r + i * dr) * n + (c + i * dc));
    g->windows.push_back(std::move(w));
  };
  for (int r = 0; r < m; ++r)
    for (int c = 0; c + k <= n; ++c) add_window(r, c, 0, 1);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r + k <= m; ++r) add_window(r, c, 1, 0);
  for (int r = 0; r + k <= m; ++r)
    for (int c = 0; c + k <= n; ++c) add_window(r, c, 1, 1);
  for (int r = 0; r + k <= m; ++r)
    for (int c = k - 1; c < n; ++c) add_window(r, c, 1, -1);

  g->windows_through.resize(spec.cells());
  for (std::size_t w = 0; w < g->windows.size(); ++w)
    for (int cell : g->windows[w]) g->windows_through[cell].push_back(static_cast<int>(w));

  const int n_perms = spec.square() ? 8 : 4;
  for (int which = 0; which < n_perms; ++which) g->perms.push_back(make_perm(spec, which));
  g->inverse_perm.resize(g->perms.size());
  for (std::size_t a = 0; a < g->perms.size(); ++a) {
    for (std::size_t b = 0; b < g->perms.size(); ++b) {
      bool inverse = true;
      for (int i = 0; i < spec.cells() && inverse; ++i)
        inverse = g->perms[b][g->perms[a][i]] == i;
      if (inverse) {
        g->inverse_perm[a] = static_cast<int>(b);
        break;
      }
    }
  }

  if (m % 2 == 1 && n % 2 == 1) g->center_cell = (m / 2) * n + n / 2;
  return g;
}

}  // namespace

const Geometry& geometry(const GameSpec& spec) {
  struct Key {
    int m, n, k;
    bool operator<(const Key& o) const { return std::tie(m, n, k) < std::tie(o.m, o.n, o.k); }
  };
  static std::mutex mu;
  static std::map<Key, std::unique_ptr<Geometry>> cache;
  thread_local const Geometry* last = nullptr;
  if (last != nullptr && last->spec == spec) return *last;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[Key{spec.rows, spec.cols, spec.win_length}];
  if (!slot) slot = build_geometry(spec);
  last = slot.get();
  return *slot;
}

Outcome classify(const State& s) {
  const Geometry& g = geometry(s.spec);
  bool p1_line = false, p2_line = false;
  for (const auto& w : g.windows) {
    Cell first = s.cells[w[0]];
    if (first == Cell::Empty) continue;
    bool full = true;
    for (std::size_t i = 1; i < w.size() && full; ++i) full = s.cells[w[i]] == first;
    if (!full) continue;
    (first == Cell::P1 ? p1_line : p2_line) = true;
  }
  if (p1_line && p2_line)
    throw std::logic_error("unreachable state: both players have completed lines");
  if (p1_line) return Outcome::Win;
  if (p2_line) return Outcome::Loss;
  return s.stones == s.spec.cells() ? Outcome::Draw : Outcome::Cont;
}

std::vector<Action> legal_actions(const State& s) {
  if (classify(s) != Outcome::Cont)
    throw std::logic_error("no actions at terminal state");
  std::vector<Action> acts;
  acts.reserve(s.spec.cells() - s.stones);
  for (int i = 0; i < s.spec.cells(); ++i)
    if (s.cells[i] == Cell::Empty) acts.push_back(i);
  return acts;
}

bool is_legal(const State& s, Action a) {
  return a >= 0 && a < s.spec.cells() && s.cells[a] == Cell::Empty &&
         classify(s) == Outcome::Cont;
}

State apply(const State& s, Action a) {
  if (a < 0 || a >= s.spec.cells() || s.cells[a] != Cell::Empty)
    throw std::invalid_argument("illegal move: cell " + std::to_string(a));
  State next = s;
  next.cells[a] = s.mover() == Player::One ? Cell::P1 : Cell::P2;
  next.stones = s.stones + 1;
  return next;
}

int payoff(const State& s, Player who) {
  Outcome o = classify(s);
  if (o == Outcome::Cont) throw std::logic_error("payoff requested at a non-terminal state");
  int u1 = o == Outcome::Win ? 1 : o == Outcome::Loss ? -1 : 0;
  return who == Player::One ? u1 : -u1;
}

State transform(const State& s, int perm_index) {
  const Geometry& g = geometry(s.spec);
  const auto& perm = g.perms.at(perm_index);
  State t = s;
  for (int i = 0; i < s.spec.cells(); ++i) t.cells[perm[i]] = s.cells[i];
  return t;
}

Action transform_action(const State& s, Action a, int perm_index) {
  return geometry(s.spec).perms.at(perm_index)[a];
}

std::vector<State> symmetries(const State& s, bool deduplicate) {
  const Geometry& g = geometry(s.spec);
  std::vector<State> orbit;
  orbit.reserve(g.perms.size());
  for (std::size_t i = 0; i < g.perms.size(); ++i) {
    State t = transform(s, static_cast<int>(i));
    if (deduplicate && std::find(orbit.begin(), orbit.end(), t) != orbit.end()) continue;
    orbit.push_back(std::move(t));
  }
  return orbit;
}

std::uint64_t canonical_packed(const State& s) {
  const Geometry& g = geometry(s.spec);
  std::uint64_t best = s.packed();
  for (std::size_t i = 1; i < g.perms.size(); ++i)
    best = std::min(best, transform(s, static_cast<int>(i)).packed());
  return best;
}

State unpack(const GameSpec& spec, std::uint64_t key) {
  State s = State::initial(spec);
  for (int i = spec.cells() - 1; i >= 0; --i) {
    auto bits = key & 3ULL;
    if (bits == 3ULL) throw std::invalid_argument("malformed packed state key");
    s.cells[i] = static_cast<Cell>(bits);
    if (bits != 0) ++s.stones;
    key >>= 2;
  }
  return s;
}

Canonical canonicalize(const State& s) {
  const Geometry& g = geometry(s.spec);
  Canonical result;
  std::uint64_t best = ~0ULL;
  std::vector<State> transformed;
  transformed.reserve(g.perms.size());
  for (std::size_t i = 0; i < g.perms.size(); ++i) {
    transformed.push_back(transform(s, static_cast<int>(i)));
    best = std::min(best, transformed.back().packed());
  }
  for (std::size_t i = 0; i < g.perms.size(); ++i) {
    if (transformed[i].packed() == best) {
      if (result.perm_indices.empty()) result.state = transformed[i];
      result.perm_indices.push_back(static_cast<int>(i));
    }
  }
  return result;
}

std::string encode(const State& s, bool canonical) {
  const State& rep = canonical ? canonicalize(s).state : s;
  std::string out = "mnk:" + s.spec.to_text() + ":";
  for (int i = 0; i < s.spec.cells(); ++i) {
    Cell c = rep.cells[i];
    out += c == Cell::Empty ? '.' : c == Cell::P1 ? 'X' : 'O';
  }
  return out;
}

State decode(const std::string& key) {
  if (key.rfind("mnk:", 0) != 0) throw std::invalid_argument("malformed state key: " + key);
  auto sep = key.find(':', 4);
  if (sep == std::string::npos) throw std::invalid_argument("malformed state key: " + key);
  GameSpec spec = GameSpec::parse(key.substr(4, sep - 4));
  std::string cells = key.substr(sep + 1);
  if (static_cast<int>(cells.size()) != spec.cells())
    throw std::invalid_argument("state key has wrong cell count: " + key);
  State s = State::initial(spec);
  int n1 = 0, n2 = 0;
  for (int i = 0; i < spec.cells(); ++i) {
    switch (cells[i]) {
      case '.': s.cells[i] = Cell::Empty; break;
      case 'X': s.cells[i] = Cell::P1; ++n1; break;
      case 'O': s.cells[i] = Cell::P2; ++n2; break;
      default: throw std::invalid_argument("bad cell character in key: " + key);
    }
  }
  s.stones = n1 + n2;
  if (n1 - n2 != 0 && n1 - n2 != 1)
    throw std::invalid_argument("state key violates move alternation: " + key);
  return s;
}

std::string GameRecord::to_json_line() const {
  json j;
  j["spec"] = {{"m", spec.rows}, {"n", spec.cols}, {"k", spec.win_length}};
  j["moves"] = moves;
  j["outcome"] = to_string(outcome);
  return j.dump();
}

GameRecord GameRecord::from_json_line(const std::string& line) {
  json j = json::parse(line);
  GameRecord rec;
  rec.spec.rows = j.at("spec").at("m").get<int>();
  rec.spec.cols = j.at("spec").at("n").get<int>();
  rec.spec.win_length = j.at("spec").at("k").get<int>();
  rec.spec.validate();
  rec.moves = j.at("moves").get<std::vector<Action>>();
  rec.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  return rec;
}

State GameRecord::replay() const {
  State s = State::initial(spec);
  for (Action a : moves) {
    if (classify(s) != Outcome::Cont)
      throw std::logic_error("record continues past a terminal state");
    s = apply(s, a);
  }
  if (classify(s) != outcome)
    throw std::logic_error("recorded outcome disagrees with replay");
  return s;
}

std::ostream& operator<<(std::ostream& os, const State& s) {
  for (int r = 0; r < s.spec.rows; ++r) {
    for (int c = 0; c < s.spec.cols; ++c) {
      Cell cell = s.at(r, c);
      os << (cell == Cell::Empty ? '.' : cell == Cell::P1 ? 'X' : 'O');
    }
    os << '\n';
  }
  return os;
}

}  // namespace mnklab::game
