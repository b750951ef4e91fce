#include "mnklab/game.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <unordered_set>

#include "mnklab/rng.hpp"
#include "ttt_reference.hpp"

using namespace mnklab;
using namespace mnklab::game;

namespace {

const GameSpec kTtt{3, 3, 3};

State state_from(const char* cells) {
  std::string key = "mnk:" + kTtt.to_text() + ":" + cells;
  return decode(key);
}

// Every reachable state of a spec, BFS from the initial position.
std::vector<State> enumerate_states(const GameSpec& spec) {
  std::vector<State> all;
  std::unordered_set<std::uint64_t> seen;
  std::vector<State> frontier{State::initial(spec)};
  seen.insert(frontier.front().packed());
  while (!frontier.empty()) {
    State s = frontier.back();
    frontier.pop_back();
    all.push_back(s);
    if (classify(s) != Outcome::Cont) continue;
    for (Action a : legal_actions(s)) {
      State nb = apply(s, a);
      if (seen.insert(nb.packed()).second) frontier.push_back(nb);
    }
  }
  return all;
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_NOTHROW(GameSpec{3, 3, 3}.validate());
  CHECK_NOTHROW(GameSpec{4, 4, 3}.validate());
  CHECK_NOTHROW(GameSpec{5, 5, 4}.validate());
  CHECK_THROWS(GameSpec{6, 5, 4}.validate());   // 30 cells over the cap
  CHECK_THROWS(GameSpec{3, 3, 2}.validate());   // k < 3
  CHECK_THROWS(GameSpec{3, 3, 4}.validate());   // k > max(m, n)
  CHECK(GameSpec::parse("4,4,3") == GameSpec{4, 4, 3});
  CHECK_THROWS(GameSpec::parse("4x4x3"));
}

TEST_CASE("legal actions") {
  State root = State::initial(kTtt);
  CHECK(legal_actions(root).size() == 9);

  // One empty cell, no line complete.
  State s = state_from("XOXXOOOX.");
  CHECK(classify(s) == Outcome::Cont);
  auto acts = legal_actions(s);
  REQUIRE(acts.size() == 1);
  CHECK(acts[0] == 8);

  State won = state_from("XXXOO....");
  CHECK_THROWS_WITH(legal_actions(won), doctest::Contains("no actions"));
}

TEST_CASE("legal action count equals empty cells at every reachable state") {
  for (const State& s : enumerate_states(kTtt)) {
    if (classify(s) != Outcome::Cont) continue;
    // |A(s)| = m*n - t + 1 at turn t.
    CHECK(static_cast<int>(legal_actions(s).size()) == kTtt.cells() - s.turn() + 1);
  }
}

TEST_CASE("apply places the mover's stone and alternates") {
  State root = State::initial(kTtt);
  State s1 = apply(root, 4);
  CHECK(s1.cells[4] == Cell::P1);
  CHECK(s1.mover() == Player::Two);
  for (int i = 0; i < 9; ++i)
    if (i != 4) CHECK(s1.cells[i] == Cell::Empty);

  CHECK_THROWS_WITH(apply(s1, 4), doctest::Contains("illegal move"));
}

TEST_CASE("classify") {
  CHECK(classify(state_from("XXXOO....")) == Outcome::Win);
  CHECK(classify(state_from("OO.XXX...")) == Outcome::Win);
  CHECK(classify(state_from("XX.OOO.XX")) == Outcome::Loss);
  CHECK(classify(state_from("XOXXOOOXX")) == Outcome::Draw);
  CHECK(classify(State::initial(kTtt)) == Outcome::Cont);
  // Both players with completed lines is unreachable.
  CHECK_THROWS_WITH(classify(state_from("XXXOOO.X.")), doctest::Contains("unreachable"));
}

TEST_CASE("all 5478 reachable states classify into exactly one tag") {
  auto states = enumerate_states(kTtt);
  CHECK(states.size() == 5478);  // frozen from the standalone reference
  int cont = 0, win = 0, loss = 0, draw = 0;
  for (const State& s : states) {
    switch (classify(s)) {
      case Outcome::Cont: ++cont; break;
      case Outcome::Win: ++win; break;
      case Outcome::Loss: ++loss; break;
      case Outcome::Draw: ++draw; break;
    }
  }
  CHECK(cont + win + loss + draw == 5478);
  CHECK(cont == 4520);  // frozen from the standalone reference
  CHECK(win > 0);
  CHECK(loss > 0);
  CHECK(draw > 0);
}

TEST_CASE("payoffs are zero-sum at every reachable terminal") {
  State win = state_from("XXXOO....");
  CHECK(payoff(win, Player::One) == 1);
  CHECK(payoff(win, Player::Two) == -1);
  State draw = state_from("XOXXOOOXX");
  CHECK(payoff(draw, Player::One) == 0);
  CHECK(payoff(draw, Player::Two) == 0);
  CHECK_THROWS(payoff(State::initial(kTtt), Player::One));

  for (const State& s : enumerate_states(kTtt)) {
    if (classify(s) == Outcome::Cont) continue;
    CHECK(payoff(s, Player::One) + payoff(s, Player::Two) == 0);
  }
}

TEST_CASE("symmetries") {
  State generic = state_from("X.O.X.O..");
  CHECK(symmetries(generic).size() == 8);
  CHECK(symmetries(State::initial(kTtt), /*deduplicate=*/true).size() == 1);

  GameSpec rect{2, 5, 3};
  CHECK(symmetries(State::initial(rect)).size() == 4);

  // classify commutes with every transform at every reachable state.
  for (const State& s : enumerate_states(kTtt)) {
    Outcome o = classify(s);
    for (const State& t : symmetries(s)) CHECK(classify(t) == o);
  }
}

TEST_CASE("legal actions commute with transforms") {
  Rng rng(11);
  auto states = enumerate_states(kTtt);
  for (int trial = 0; trial < 200; ++trial) {
    const State& s = states[rng.next_below(states.size())];
    if (classify(s) != Outcome::Cont) continue;
    auto acts = legal_actions(s);
    for (int p = 0; p < 8; ++p) {
      State t = transform(s, p);
      std::set<Action> expect;
      for (Action a : acts) expect.insert(transform_action(s, a, p));
      auto tacts = legal_actions(t);
      CHECK(std::set<Action>(tacts.begin(), tacts.end()) == expect);
    }
  }
}

TEST_CASE("encode/decode round-trips on 1000 random reachable states") {
  auto states = enumerate_states(kTtt);
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const State& s = states[rng.next_below(states.size())];
    CHECK(decode(encode(s)) == s);
  }
  CHECK_THROWS(decode("mnk:3,3,3:XXXXXXXXX"));  // alternation violated
  CHECK_THROWS(decode("mnk:3,3,3:X?......."));
  CHECK_THROWS(decode("mnk:3,3,3:X..."));
  CHECK_THROWS(decode("nope"));
}

TEST_CASE("encode is injective over the full enumeration") {
  std::set<std::string> keys;
  auto states = enumerate_states(kTtt);
  for (const State& s : states) keys.insert(encode(s));
  CHECK(keys.size() == states.size());
}

TEST_CASE("canonical key is identical across the symmetry orbit") {
  auto states = enumerate_states(kTtt);
  Rng rng(23);
  for (int i = 0; i < 300; ++i) {
    const State& s = states[rng.next_below(states.size())];
    std::string canon = encode(s, /*canonical=*/true);
    for (const State& t : symmetries(s)) CHECK(encode(t, true) == canon);
    // The canonical representative is in the orbit and is the packed minimum.
    CHECK(decode(canon) == canonicalize(s).state);
    CHECK(canonical_packed(s) == canonicalize(s).state.packed());
  }
}

TEST_CASE("canonicalize returns every transform reaching the representative") {
  State root = State::initial(kTtt);
  CHECK(canonicalize(root).perm_indices.size() == 8);  // full stabilizer
  State generic = state_from("XXO.OX.O.");
  auto can = canonicalize(generic);
  for (int p : can.perm_indices) CHECK(transform(generic, p) == can.state);
}

TEST_CASE("game record round-trip is bit-exact and replays legally") {
  GameRecord rec;
  rec.spec = kTtt;
  State s = State::initial(kTtt);
  for (Action a : {0, 3, 1, 4, 2}) {  // X completes the top row
    rec.moves.push_back(a);
    s = apply(s, a);
  }
  rec.outcome = classify(s);
  CHECK(rec.outcome == Outcome::Win);
  CHECK(rec.replay() == s);

  std::string line = rec.to_json_line();
  GameRecord back = GameRecord::from_json_line(line);
  CHECK(back.to_json_line() == line);
  CHECK(back.replay() == s);

  // Outcome mismatch and continuing past terminal are rejected.
  GameRecord bad = rec;
  bad.outcome = Outcome::Draw;
  if (rec.outcome != Outcome::Draw) CHECK_THROWS(bad.replay());
}

TEST_CASE("agreement with the standalone tic-tac-toe reference") {
  // Cross-check the enumeration against the independent implementation.
  auto ref = ttt_ref::enumerate_reachable();
  auto states = enumerate_states(kTtt);
  CHECK(states.size() == ref.size());
  for (const State& s : states) {
    ttt_ref::Board b{};
    for (int i = 0; i < 9; ++i)
      b[i] = s.cells[i] == Cell::Empty ? 0 : s.cells[i] == Cell::P1 ? 1 : 2;
    CHECK(ref.count(b) == 1);
    int st = ttt_ref::status(b);
    Outcome o = classify(s);
    CHECK((st == 2) == (o == Outcome::Cont));
    if (st == 1) CHECK(o == Outcome::Win);
    if (st == -1) CHECK(o == Outcome::Loss);
    if (st == 0) CHECK(o == Outcome::Draw);
  }
}
