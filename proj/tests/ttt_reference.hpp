// Standalone 3x3 tic-tac-toe reference: brute-force BFS enumeration and a
// naive, memo-free-interface minimax. Written before (and kept independent
// of) the main solver so the two can be checked against each other. Uses its
// own board representation; nothing here includes project headers.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace ttt_ref {

using Board = std::array<int, 9>;  // 0 empty, 1 = first mover, 2 = second

inline const std::array<std::array<int, 3>, 8> kLines = {{{0, 1, 2},
                                                          {3, 4, 5},
                                                          {6, 7, 8},
                                                          {0, 3, 6},
                                                          {1, 4, 7},
                                                          {2, 5, 8},
                                                          {0, 4, 8},
                                                          {2, 4, 6}}};

inline bool has_line(const Board& b, int p) {
  for (const auto& ln : kLines) {
    if (b[ln[0]] == p && b[ln[1]] == p && b[ln[2]] == p) return true;
  }
  return false;
}

inline int stone_count(const Board& b) {
  int n = 0;
  for (int c : b) n += (c != 0);
  return n;
}

inline int mover(const Board& b) { return stone_count(b) % 2 == 0 ? 1 : 2; }

// +1 first-mover win, -1 second-mover win, 0 draw, 2 still running.
inline int status(const Board& b) {
  bool w1 = has_line(b, 1), w2 = has_line(b, 2);
  if (w1 && w2) throw std::logic_error("unreachable board");
  if (w1) return 1;
  if (w2) return -1;
  if (stone_count(b) == 9) return 0;
  return 2;
}

// All states reachable from the empty board by legal alternating play,
// including terminal states. Expansion stops at terminals.
inline std::set<Board> enumerate_reachable() {
  std::set<Board> seen;
  std::vector<Board> frontier;
  Board empty{};
  seen.insert(empty);
  frontier.push_back(empty);
  while (!frontier.empty()) {
    Board b = frontier.back();
    frontier.pop_back();
    if (status(b) != 2) continue;
    int p = mover(b);
    for (int c = 0; c < 9; ++c) {
      if (b[c] != 0) continue;
      Board nb = b;
      nb[c] = p;
      if (seen.insert(nb).second) frontier.push_back(nb);
    }
  }
  return seen;
}

// Plain minimax, value from the first mover's perspective.
inline int minimax(const Board& b, std::map<Board, int>& memo) {
  int st = status(b);
  if (st != 2) return st;
  auto it = memo.find(b);
  if (it != memo.end()) return it->second;
  int p = mover(b);
  int best = p == 1 ? -2 : 2;
  for (int c = 0; c < 9; ++c) {
    if (b[c] != 0) continue;
    Board nb = b;
    nb[c] = p;
    int v = minimax(nb, memo);
    if (p == 1)
      best = v > best ? v : best;
    else
      best = v < best ? v : best;
  }
  memo[b] = best;
  return best;
}

inline int root_value() {
  std::map<Board, int> memo;
  Board empty{};
  return minimax(empty, memo);
}

struct OutcomeProbs {
  double win = 0.0, loss = 0.0, draw = 0.0;
};

// Exact outcome distribution when both sides pick uniformly among empty
// cells. Independent check for the main policy-evaluation oracle.
inline OutcomeProbs uniform_random_outcome(const Board& b,
                                           std::map<Board, OutcomeProbs>& memo) {
  int st = status(b);
  if (st != 2) {
    OutcomeProbs o;
    (st == 1 ? o.win : st == -1 ? o.loss : o.draw) = 1.0;
    return o;
  }
  auto it = memo.find(b);
  if (it != memo.end()) return it->second;
  std::vector<int> moves;
  for (int c = 0; c < 9; ++c)
    if (b[c] == 0) moves.push_back(c);
  OutcomeProbs acc;
  double w = 1.0 / static_cast<double>(moves.size());
  int p = mover(b);
  for (int c : moves) {
    Board nb = b;
    nb[c] = p;
    OutcomeProbs sub = uniform_random_outcome(nb, memo);
    acc.win += w * sub.win;
    acc.loss += w * sub.loss;
    acc.draw += w * sub.draw;
  }
  memo[b] = acc;
  return acc;
}

inline OutcomeProbs uniform_random_root_outcome() {
  std::map<Board, OutcomeProbs> memo;
  Board empty{};
  return uniform_random_outcome(empty, memo);
}

}  // namespace ttt_ref
