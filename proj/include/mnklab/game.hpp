// Finite two-player alternating-move zero-sum board game family: m,n,k-games.
// Players alternately place a stone on an empty cell of an m x n board; the
// first to align win_length stones (row, column, or diagonal) wins. All types
// are immutable values and all operations pure, so they are safe to share
// across workers.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mnklab::game {

inline constexpr int kMaxCells = 25;  // desk-scale cap; keeps exact solves cheap

enum class Player : std::int8_t { One = 1, Two = 2 };

inline Player other(Player p) { return p == Player::One ? Player::Two : Player::One; }

enum class Cell : std::int8_t { Empty = 0, P1 = 1, P2 = 2 };

enum class Outcome : std::int8_t { Cont, Win, Loss, Draw };  // win/loss for player 1

const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct GameSpec {
  int rows = 3;
  int cols = 3;
  int win_length = 3;

  int cells() const { return rows * cols; }
  bool square() const { return rows == cols; }
  bool operator==(const GameSpec&) const = default;

  // Throws std::invalid_argument when outside the supported family:
  // rows*cols <= 25, win_length >= 3, win_length <= max(rows, cols).
  void validate() const;

  static GameSpec parse(const std::string& text);  // "m,n,k"
  std::string to_text() const;
};

using Action = int;  // cell index in [0, rows*cols)

struct State {
  GameSpec spec;
  std::array<Cell, kMaxCells> cells{};
  int stones = 0;

  static State initial(const GameSpec& spec);

  Player mover() const {  // player 1 moves on odd turns (stones even)
    return stones % 2 == 0 ? Player::One : Player::Two;
  }
  int turn() const { return stones + 1; }
  Cell at(int r, int c) const { return cells[r * spec.cols + c]; }

  bool operator==(const State& o) const {
    if (spec != o.spec) return false;
    for (int i = 0; i < spec.cells(); ++i)
      if (cells[i] != o.cells[i]) return false;
    return true;
  }

  // Cells packed 2 bits each, cell 0 in the most significant position, so
  // numeric order on keys is lexicographic order on the cell sequence with
  // Empty < P1 < P2. Only meaningful between states of the same spec.
  std::uint64_t packed() const;
};

// Board geometry shared by every state of one spec: the k-length windows,
// the dihedral symmetry permutations, and the center cell. Cached per spec.
struct Geometry {
  GameSpec spec;
  std::vector<std::vector<int>> windows;          // all k-in-a-row windows
  std::vector<std::vector<int>> windows_through;  // per cell: window indices
  // Cell permutations: perm[i] = image of cell i. perms[0] is the identity.
  // 8 transforms for square boards, 4 otherwise.
  std::vector<std::array<int, kMaxCells>> perms;
  std::vector<int> inverse_perm;  // index of each perm's inverse
  int center_cell = -1;           // -1 unless both dimensions are odd
};

const Geometry& geometry(const GameSpec& spec);

// --- Rules -----------------------------------------------------------------

Outcome classify(const State& s);  // throws on a board with two winners

std::vector<Action> legal_actions(const State& s);  // throws at terminal states

bool is_legal(const State& s, Action a);

State apply(const State& s, Action a);  // throws "illegal move"

// Terminal payoff for one player: +1 win, -1 loss, 0 draw. Throws on cont.
int payoff(const State& s, Player who);

// --- Symmetries --------------------------------------------------------------

State transform(const State& s, int perm_index);
Action transform_action(const State& s, Action a, int perm_index);

// The dihedral orbit of s, in transform order. Duplicates are kept unless
// deduplicate is set (the data-augmentation path wants the full orbit).
std::vector<State> symmetries(const State& s, bool deduplicate = false);

// Packed key minimized over the symmetry orbit (same-spec context only).
std::uint64_t canonical_packed(const State& s);

// Rebuilds a state from its packed key.
State unpack(const GameSpec& spec, std::uint64_t key);

struct Canonical {
  State state;                    // the minimizing representative
  std::vector<int> perm_indices;  // every transform mapping s onto it
};
Canonical canonicalize(const State& s);

// --- Keys --------------------------------------------------------------------

// Text key "mnk:<m>,<n>,<k>:<cells>", cells row-major with '.', 'X', 'O'.
// With canonical set, the cell sequence is the orbit minimum (Empty < P1 < P2).
std::string encode(const State& s, bool canonical = false);
State decode(const std::string& key);  // throws on malformed keys

// --- Game records --------------------------------------------------------------

struct GameRecord {
  GameSpec spec;
  std::vector<Action> moves;
  Outcome outcome = Outcome::Draw;

  // One JSON object per game: {"moves":[...],"outcome":"...","spec":{...}}.
  std::string to_json_line() const;
  static GameRecord from_json_line(const std::string& line);

  // Replays the moves through the rules; throws if any move is illegal or the
  // recorded outcome disagrees. Returns the final state.
  State replay() const;
};

std::ostream& operator<<(std::ostream& os, const State& s);

}  // namespace mnklab::game

template <>
struct std::hash<mnklab::game::State> {
  std::size_t operator()(const mnklab::game::State& s) const noexcept {
    std::uint64_t x = s.packed() ^ (static_cast<std::uint64_t>(s.spec.rows) << 58) ^
                      (static_cast<std::uint64_t>(s.spec.cols) << 53);
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return static_cast<std::size_t>(x);
  }
};
