#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "twt/compile.hpp"
#include "twt/machine.hpp"
#include "twt/simulate.hpp"

using namespace twt;

namespace {

std::vector<std::string> words(const std::string& sigma, int maxlen,
                               int minlen = 0) {
  std::vector<std::string> out;
  std::vector<std::string> layer = {""};
  for (int len = 0; len <= maxlen; ++len) {
    if (len >= minlen)
      for (const auto& w : layer) out.push_back(w);
    std::vector<std::string> next;
    for (const auto& w : layer)
      for (char c : sigma) next.push_back(w + c);
    layer = next;
  }
  return out;
}

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(FIXTURES_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Machine fixture_machine(const std::string& name) {
  return Machine::from_text(read_fixture(name));
}

// Reference for the doubled-segments function realized by the block_doubler
// fixtures: every maximal a-block followed by a b becomes a^k b^k, a
// trailing a-block is copied, b's vanish.
std::string doubled_segments(const std::string& w) {
  std::string out;
  size_t i = 0;
  while (i < w.size()) {
    if (w[i] == 'b') {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < w.size() && w[j] == 'a') ++j;
    out.append(j - i, 'a');
    if (j < w.size()) out.append(j - i, 'b');
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Independent reference semantics for classical one-branch rules, stepping a
// (state, position) configuration directly on the marked tape. This is the
// oracle the production machinery is compared against.

struct Rule {
  std::string p;
  char sym;
  std::string q;
  std::string out;
  int eps;
};

std::optional<std::string> ref_run(const std::vector<Rule>& rules,
                                   const std::string& initial,
                                   const std::string& final_st,
                                   const std::string& w) {
  std::string tape = "L" + w + "R";
  std::string state = initial;
  int pos = 0;
  std::string out;
  std::set<std::pair<std::string, int>> seen;
  while (true) {
    if (state == final_st) return out;
    if (!seen.insert({state, pos}).second) return std::nullopt;
    const Rule* hit = nullptr;
    for (const auto& r : rules)
      if (r.p == state && r.sym == tape[pos]) {
        if (hit) return std::nullopt;  // not deterministic: treat as stuck
        hit = &r;
      }
    if (!hit) return std::nullopt;
    out += hit->out;
    int next = pos + hit->eps;
    if (next < 0 || next >= (int)tape.size()) return std::nullopt;
    state = hit->q;
    pos = next;
  }
}

void ref_enum_dfs(const std::vector<Rule>& rules, const std::string& final_st,
                  const std::string& tape, const std::string& state, int pos,
                  int k, std::vector<int>& visits, std::string& out,
                  std::map<std::pair<std::string, int>, std::set<size_t>>& occ,
                  std::set<std::string>& results) {
  if (visits[pos] + 1 > k) return;
  auto key = std::make_pair(state, pos);
  if (occ[key].count(out.size())) return;  // silent cycle: already explored
  occ[key].insert(out.size());
  ++visits[pos];
  if (state == final_st) {
    results.insert(out);
  } else {
    for (const auto& r : rules) {
      if (r.p != state || r.sym != tape[pos]) continue;
      int next = pos + r.eps;
      if (next < 0 || next >= (int)tape.size()) continue;
      out += r.out;
      ref_enum_dfs(rules, final_st, tape, r.q, next, k, visits, out, occ,
                   results);
      out.resize(out.size() - r.out.size());
    }
  }
  --visits[pos];
  occ[key].erase(out.size());
}

std::set<std::string> ref_enumerate(const std::vector<Rule>& rules,
                                    const std::string& initial,
                                    const std::string& final_st,
                                    const std::string& w, int k) {
  std::string tape = "L" + w + "R";
  std::vector<int> visits(tape.size(), 0);
  std::string out;
  std::map<std::pair<std::string, int>, std::set<size_t>> occ;
  std::set<std::string> results;
  ref_enum_dfs(rules, final_st, tape, initial, 0, k, visits, out, occ, results);
  return results;
}

std::vector<FiveTuple> as_five_tuples(const std::vector<Rule>& rules) {
  std::vector<FiveTuple> out;
  for (const auto& r : rules)
    out.push_back({r.p, std::string(1, r.sym), r.q, r.out, r.eps});
  return out;
}

// Specialized deterministic interpreter for rewriting machines, reading the
// Machine struct directly but sharing no code with the production runner.
std::optional<std::string> ref_hennie_det(const Machine& m,
                                          const std::string& w) {
  std::string tape = "L" + w + "R";
  std::map<std::string, const Instruction*> inst_of;
  for (const auto& i : m.instructions) {
    REQUIRE(!inst_of.count(i.p));
    inst_of[i.p] = &i;
  }
  std::string state = m.initial;
  int pos = 0;
  std::string out;
  std::vector<int> visits(tape.size(), 0);
  std::set<std::tuple<std::string, int, std::string>> seen;
  while (true) {
    if (++visits[pos] > m.visits) return std::nullopt;
    if (state == m.final_state) return out;
    if (!seen.insert({state, pos, tape}).second) return std::nullopt;
    auto it = inst_of.find(state);
    if (it == inst_of.end()) return std::nullopt;
    const Instruction& inst = *it->second;
    const Branch& b =
        tape[pos] == inst.test.sym[0] ? inst.then_b : inst.else_b;
    if (!b.rewrite.empty()) {
      if (pos == 0 || pos == (int)tape.size() - 1) return std::nullopt;
      tape[pos] = b.rewrite[0];
    }
    out += b.out;
    int next = pos + b.move.step;
    if (next < 0 || next >= (int)tape.size()) return std::nullopt;
    state = b.q;
    pos = next;
  }
}

// The rearrangement machine's classical rule matrix: rows per tape symbol,
// one rule per (state, symbol).
std::vector<Rule> rearranger_rules() {
  return {
      {"1", 'L', "1", "", 1},  {"1", 'a', "1", "a", 1}, {"1", 'b', "2", "", -1},
      {"1", 'R', "2", "c", 0}, {"2", 'L', "3", "b", 0}, {"2", 'a', "2", "a", -1},
      {"2", 'b', "4", "", -1}, {"2", 'R', "2", "", -1}, {"3", 'L', "3", "", 1},
      {"3", 'a', "3", "a", 1}, {"3", 'b', "1", "", 1},  {"3", 'R', "4", "c", 0},
      {"4", 'L', "5", "b", 0}, {"4", 'a', "4", "a", -1}, {"4", 'b', "5", "", 1},
      {"4", 'R', "4", "", -1}, {"5", 'L', "5", "", 1},  {"5", 'a', "5", "a", 1},
      {"5", 'b', "3", "", 1},  {"5", 'R', "6", "", 0},
  };
}

// Nondeterministic repeater: emits one copy of a^n per pass and chooses at
// the right marker between stopping and rewinding, realizing (a^n, a^{mn}).
Machine repeater() {
  return Machine::from_text(R"(machine repeater
kind gsm
input a
output a
states 0 1 2 f
initial 0
final f
inst 0 sym L => 1 - +1 / 0 - 0
inst 1 sym a => 1 a +1 / 1 - 0
inst 1 sym R => f - 0 / 1 - 0
inst 1 sym R => 2 - -1 / 1 - 0
inst 2 sym a => 2 - -1 / 2 - 0
inst 2 sym L => 1 - +1 / 2 - 0
)");
}

}  // namespace

TEST_CASE("machine text round-trips through to_text") {
  for (const auto& name :
       {"block_doubler.machine", "block_doubler_mso.machine",
        "rearranger.machine", "two_pass_copy.machine"}) {
    std::string text = read_fixture(name);
    Machine m = Machine::from_text(text);
    CHECK(m.to_text() == text);
    Machine again = Machine::from_text(m.to_text());
    CHECK(again.to_text() == text);
  }
}

TEST_CASE("structural checks reject malformed machines") {
  std::string good = read_fixture("block_doubler.machine");
  auto broken = [&](const std::string& from, const std::string& to) {
    std::string t = good;
    auto at = t.find(from);
    REQUIRE(at != std::string::npos);
    t.replace(at, from.size(), to);
    return t;
  };
  // instruction out of the final state
  CHECK_THROWS_AS(Machine::from_text(broken("inst 4", "inst 5")), ParseError);
  // branch to an undeclared state
  CHECK_THROWS_AS(Machine::from_text(broken("=> 1 - +1", "=> 9 - +1")),
                  ParseError);
  // output symbol outside the output alphabet
  CHECK_THROWS_AS(Machine::from_text(broken("1 a +1", "1 c +1")), ParseError);
  // malformed move
  CHECK_THROWS_AS(Machine::from_text(broken("=> 1 - +1", "=> 1 - +2")),
                  ParseError);
  // rewriting clause outside a rewriting machine
  CHECK_THROWS_AS(Machine::from_text(broken("=> 1 a +1", "=> 1 a +1 rw b")),
                  ParseError);
  // formula test in a symbol machine
  CHECK_THROWS_AS(Machine::from_text(broken("sym b", "mso true")), ParseError);
  // missing final line
  CHECK_THROWS_AS(Machine::from_text(broken("final 5\n", "")), ParseError);
  // duplicate state names
  CHECK_THROWS_AS(Machine::from_text(broken("states 0 1", "states 1 1")),
                  ParseError);
  // work alphabet must cover the input alphabet
  std::string hennie = read_fixture("two_pass_copy.machine");
  auto at = hennie.find("work a b");
  CHECK_THROWS_AS(
      Machine::from_text(std::string(hennie).replace(at, 8, "work b c")),
      ParseError);
}

TEST_CASE("validate reports determinism and output chunk lengths") {
  ValidationReport fine = validate(fixture_machine("block_doubler.machine"));
  CHECK(fine.deterministic);
  CHECK(fine.short_outputs);
  CHECK(fine.notes.empty());

  ValidationReport nondet = validate(fixture_machine("rearranger.machine"));
  CHECK_FALSE(nondet.deterministic);
  CHECK(nondet.short_outputs);

  Machine longout = Machine::from_text(R"(machine longout
kind gsm
input a
output b
states 0 f
initial 0
final f
inst 0 sym a => f bb +1 / f - 0
)");
  CHECK_FALSE(validate(longout).short_outputs);
}

TEST_CASE("validate flags non-functional jump formulas") {
  Machine m = Machine::from_text(R"(machine wildjump
kind mso
input a b
output a
states 0 f
initial 0
final f
inst 0 sym L => f - mso (path x y) / f - 0
)");
  ValidationReport rep = validate(m);
  auto cex = functional_counterexample(parse_formula("(path x y)"), "x", "y",
                                       m.input.symbols());
  REQUIRE(cex.has_value());
  CHECK_FALSE(rep.mso_moves_functional);
  CHECK_THROWS_AS(run_deterministic(m, "a"), std::invalid_argument);

  Machine ok = Machine::from_text(R"(machine nextjump
kind mso
input a b
output a
states 0 f
initial 0
final f
inst 0 sym L => f - mso (edge * x y) / f - 0
)");
  CHECK(functional_counterexample(parse_formula("(edge * x y)"), "x", "y",
                                  "ab") == std::nullopt);
  CHECK(validate(ok).mso_moves_functional);
}

TEST_CASE("deterministic run doubles a-blocks before b") {
  Machine m = fixture_machine("block_doubler.machine");
  RunResult r = run_deterministic(m, "aaabbaba");
  REQUIRE(r.defined);
  CHECK(r.output == "aaabbbaba");

  RunResult empty = run_deterministic(m, "");
  REQUIRE(empty.defined);
  CHECK(empty.output == "");

  for (const auto& w : words("ab", 5)) {
    RunResult rr = run_deterministic(m, w);
    REQUIRE(rr.defined);
    CHECK(rr.output == doubled_segments(w));
  }
}

TEST_CASE("formula-driven variant agrees with the symbol machine") {
  Machine mso = fixture_machine("block_doubler_mso.machine");
  RunResult r = run_deterministic(mso, "aaabbaba");
  REQUIRE(r.defined);
  CHECK(r.output == "aaabbbaba");

  for (const auto& w : words("ab", 5)) {
    RunResult rr = run_deterministic(mso, w);
    REQUIRE(rr.defined);
    CHECK(rr.output == doubled_segments(w));
  }
}

TEST_CASE("compiled formula evaluation matches direct evaluation") {
  Machine mso = fixture_machine("block_doubler_mso.machine");
  SimOptions naive{MsoEval::naive}, compiled{MsoEval::compiled};
  for (const auto& w : words("ab", 4)) {
    RunResult a = run_deterministic(mso, w, naive);
    RunResult b = run_deterministic(mso, w, compiled);
    REQUIRE(a.defined == b.defined);
    CHECK(a.output == b.output);
  }
  // long input: the automatic switch uses the compiled path
  std::string long_w = "aabab";
  long_w += long_w;
  long_w += "ab";  // 12 letters
  RunResult c = run_deterministic(mso, long_w);
  REQUIRE(c.defined);
  CHECK(c.output == doubled_segments(long_w));
}

TEST_CASE("jump without a target leaves the run undefined") {
  Machine m = Machine::from_text(R"(machine nowhere
kind mso
input a b
output a
states 0 f
initial 0
final f
inst 0 sym L => f - mso (and (lab a y) (lab b y)) / f - 0
)");
  CHECK_FALSE(run_deterministic(m, "ab").defined);
}

TEST_CASE("look-around tests refine symbol tests") {
  // Marks each a by whether some b occurs strictly to its right.
  Machine m = Machine::from_text(R"(machine marks_before_b
kind rla
input a b
output b x y
states m0 m1 m2 m3 mf
initial m0
final mf
inst m0 sym L => m1 - +1 / m0 - 0
inst m1 rla L(a|b)* a (a|b)*b(a|b)*R => m1 x +1 / m2 - 0
inst m2 rla L(a|b)* a (a|b)*R => m1 y +1 / m3 - 0
inst m3 sym b => m1 b +1 / mf - 0
)");
  CHECK(validate(m).rla_normalized);
  for (const auto& w : words("ab", 5)) {
    std::string expect;
    for (size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 'b')
        expect += 'b';
      else
        expect += w.find('b', i + 1) != std::string::npos ? 'x' : 'y';
    }
    RunResult r = run_deterministic(m, w);
    REQUIRE(r.defined);
    CHECK(r.output == expect);
  }
}

TEST_CASE("trivial look-around tests reproduce the symbol machine") {
  Machine gsm = fixture_machine("block_doubler.machine");
  Machine rla = gsm;
  rla.name = "block_doubler_rla";
  rla.kind = MachineKind::rla;
  TokenAlphabet ta = TokenAlphabet::chars(gsm.input.with_markers());
  for (auto& inst : rla.instructions) {
    Test t;
    t.type = Test::Type::rla;
    t.sym = inst.test.sym;
    t.left_re = "(a|b|L|R)*";
    t.right_re = "(a|b|L|R)*";
    t.left = regex_to_dfa(t.left_re, ta);
    t.right = regex_to_dfa(t.right_re, ta);
    inst.test = normalize_rla_test(t, rla.input);
  }
  rla.check();
  for (const auto& w : words("ab", 5)) {
    RunResult a = run_deterministic(gsm, w);
    RunResult b = run_deterministic(rla, w);
    REQUIRE(a.defined == b.defined);
    CHECK(a.output == b.output);
  }
}

TEST_CASE("look-around normalization clips to the marked tape languages") {
  TokenAlphabet ta = TokenAlphabet::chars(Alphabet("ab").with_markers());
  Test t;
  t.type = Test::Type::rla;
  t.sym = "a";
  t.left = regex_to_dfa("(a|b|L)*", ta);
  t.right = regex_to_dfa("(a|b|R)*", ta);
  Test n = normalize_rla_test(t, Alphabet("ab"));
  CHECK(dfa_equal(n.left, regex_to_dfa("L(a|b)*", ta)));
  CHECK(dfa_equal(n.right, regex_to_dfa("(a|b)*R", ta)));
  // idempotent
  Test nn = normalize_rla_test(n, Alphabet("ab"));
  CHECK(dfa_equal(nn.left, n.left));
  CHECK(dfa_equal(nn.right, n.right));
  // marker centre symbols force empty sides
  Test at_left = t;
  at_left.sym = "L";
  Test nl = normalize_rla_test(at_left, Alphabet("ab"));
  CHECK(dfa_equal(nl.left, regex_to_dfa("%", ta)));
}

TEST_CASE("short-output normalization chains long chunks through fresh states") {
  Machine longout = Machine::from_text(R"(machine longout
kind gsm
input a
output b
states 0 1 f
initial 0
final f
inst 0 sym L => 1 - +1 / 0 - 0
inst 1 sym a => 1 bb +1 / f - 0
)");
  Machine norm = normalize_short_output(longout);
  CHECK(validate(norm).short_outputs);
  CHECK(norm.states.size() == longout.states.size() + 1);
  for (const auto& w : words("a", 4)) {
    RunResult a = run_deterministic(longout, w);
    RunResult b = run_deterministic(norm, w);
    REQUIRE(a.defined == b.defined);
    if (a.defined) CHECK(a.output == b.output);
  }
  // already-normalized machines pass through untouched
  Machine m = fixture_machine("block_doubler.machine");
  CHECK(normalize_short_output(m).to_text() == m.to_text());
}

TEST_CASE("separating the final state preserves the transduction") {
  Machine m = fixture_machine("block_doubler.machine");
  CHECK(separate_final_state(m).to_text() == m.to_text());

  Machine everything = Machine::from_text(R"(machine everything
kind gsm
input a b
output a
states s
initial s
final s
)");
  Machine sep = separate_final_state(everything);
  CHECK(sep.initial != sep.final_state);
  for (const auto& w : words("ab", 4)) {
    RunResult a = run_deterministic(everything, w);
    RunResult b = run_deterministic(sep, w);
    REQUIRE(a.defined);
    REQUIRE(b.defined);
    CHECK(a.output == b.output);
    CHECK(b.output == "");
  }
}

TEST_CASE("classical rules become branching instructions") {
  // dummy else-branches reproduce the published instruction list
  Machine m = to_eight_tuple("rearranger", as_five_tuples(rearranger_rules()),
                             false, Alphabet("ab"), Alphabet("abc"), "1", "6");
  CHECK(m.to_text() == read_fixture("rearranger.machine"));

  // single rule
  Machine single = to_eight_tuple("single", {{"0", "a", "f", "x", 1}}, false,
                                  Alphabet("a"), Alphabet("x"), "0", "f");
  REQUIRE(single.instructions.size() == 1);
  CHECK(single.instructions[0].else_b.q == "0");
  CHECK(single.instructions[0].else_b.out == "");
  CHECK(single.instructions[0].else_b.move.step == 0);

  // deterministic chaining probes alternatives through fresh copies
  Machine chained = to_eight_tuple(
      "chained",
      {{"p", "a", "q", "x", 1}, {"p", "b", "q", "y", 1}, {"q", "R", "f", "", 0},
       {"q", "a", "q", "", 1}, {"q", "b", "q", "", 1}},
      true, Alphabet("ab"), Alphabet("xy"), "p", "f");
  int p_copies = 0;
  for (const auto& s : chained.states)
    if (s == "p" || s.rfind("p^", 0) == 0) ++p_copies;
  CHECK(p_copies == 3);
  CHECK(validate(chained).deterministic);

  // two rules on the same (state, symbol) cannot be chained
  CHECK_THROWS_AS(
      to_eight_tuple("dup", {{"p", "a", "q", "", 1}, {"p", "a", "q", "", 0}},
                     true, Alphabet("a"), Alphabet(""), "p", "q"),
      std::invalid_argument);
}

TEST_CASE("deterministic chaining of the rearrangement matrix") {
  Machine det = to_eight_tuple("rearranger_det",
                               as_five_tuples(rearranger_rules()), true,
                               Alphabet("ab"), Alphabet("abc"), "1", "6");
  REQUIRE(validate(det).deterministic);
  RunResult r = run_deterministic(det, "aaaaa");
  REQUIRE(r.defined);
  CHECK(r.output == "aaaaacaaaaabaaaaacaaaaabaaaaa");
  for (const auto& w : words("ab", 4)) {
    auto expect = ref_run(rearranger_rules(), "1", "6", w);
    RunResult rr = run_deterministic(det, w);
    REQUIRE(rr.defined == expect.has_value());
    if (expect) CHECK(rr.output == *expect);
  }
}

TEST_CASE("bounded enumeration reproduces the rearrangement outputs") {
  Machine m = fixture_machine("rearranger.machine");
  CHECK_THROWS_AS(run_deterministic(m, "a"), std::invalid_argument);

  using S = std::set<std::string>;
  CHECK(enumerate_nondeterministic(m, "aaaaa", 6) ==
        S{"aaaaacaaaaabaaaaacaaaaabaaaaa"});
  CHECK(enumerate_nondeterministic(m, "aaabaa", 6) ==
        S{"aaaaaabaaaaacaaaaabaaaaacaaaa"});
  CHECK(enumerate_nondeterministic(m, "aaabbaa", 6) ==
        S{"aaaaaabaaaaaabaaaaacaaaacaaaa"});
}

TEST_CASE("enumeration of a deterministic machine is its run") {
  Machine m = fixture_machine("block_doubler.machine");
  int k = (int)m.states.size();
  for (const auto& w : words("ab", 4)) {
    RunResult r = run_deterministic(m, w);
    REQUIRE(r.defined);
    CHECK(enumerate_nondeterministic(m, w, k) ==
          std::set<std::string>{r.output});
  }
}

TEST_CASE("enumeration grows monotonically with the visit bound") {
  Machine rep = repeater();
  for (const auto& w : words("a", 3)) {
    std::set<std::string> prev;
    for (int k = 1; k <= 7; ++k) {
      std::set<std::string> cur = enumerate_nondeterministic(rep, w, k);
      for (const auto& s : prev) CHECK(cur.count(s));
      prev = cur;
    }
  }
  // The repeater realizes (a^n, a^{mn}); a cell of a^2 takes 2m-1 visits for
  // m passes (m scans plus m-1 rewinds), so k=3 allows two passes and k=5
  // three.
  CHECK(enumerate_nondeterministic(rep, "aa", 3) ==
        std::set<std::string>{"aa", "aaaa"});
  CHECK(enumerate_nondeterministic(rep, "aa", 5) ==
        std::set<std::string>{"aa", "aaaa", "aaaaaa"});
}

TEST_CASE("branching-instruction form preserves the realized relation") {
  std::mt19937 rng(20240817);
  std::vector<std::string> states = {"p0", "p1", "p2", "p3"};
  std::string tape_syms = "LabR";
  std::vector<std::string> outs = {"", "a", "b", "ab"};
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Rule> rules;
    int n_rules = 6 + (int)(rng() % 5);
    for (int i = 0; i < n_rules; ++i)
      rules.push_back({states[rng() % 3],            // source, never the final
                       tape_syms[rng() % 4],
                       states[rng() % 4],
                       outs[rng() % 4],
                       (int)(rng() % 3) - 1});
    Machine m = to_eight_tuple("random" + std::to_string(trial), as_five_tuples(rules), false,
                               Alphabet("ab"), Alphabet("ab"), "p0", "p3");
    int k = (int)m.states.size() + 2;
    for (const auto& w : words("ab", 4)) {
      CHECK(enumerate_nondeterministic(m, w, k) ==
            ref_enumerate(rules, "p0", "p3", w, k));
    }

    // deterministic flavour on the (p, symbol)-deduplicated rules
    std::vector<Rule> det_rules;
    std::set<std::pair<std::string, char>> used;
    for (const auto& r : rules)
      if (used.insert({r.p, r.sym}).second) det_rules.push_back(r);
    Machine det = to_eight_tuple("randomdet" + std::to_string(trial),
                                 as_five_tuples(det_rules), true, Alphabet("ab"),
                                 Alphabet("ab"), "p0", "p3");
    for (const auto& w : words("ab", 4)) {
      auto expect = ref_run(det_rules, "p0", "p3", w);
      RunResult r = run_deterministic(det, w);
      CHECK(r.defined == expect.has_value());
      if (expect && r.defined) CHECK(r.output == *expect);
    }
  }
}

TEST_CASE("accepting deterministic runs visit no cell more than |Q| times") {
  for (const auto& name : {"block_doubler.machine", "block_doubler_mso.machine"}) {
    Machine m = fixture_machine(name);
    for (const auto& w : words("ab", 5)) {
      RunResult r = run_deterministic(m, w);
      if (!r.defined) continue;
      for (int c : r.visit_counts) CHECK(c <= (int)m.states.size());
    }
  }
  Machine det = to_eight_tuple("rearranger_det",
                               as_five_tuples(rearranger_rules()), true,
                               Alphabet("ab"), Alphabet("abc"), "1", "6");
  for (const auto& w : words("ab", 5)) {
    RunResult r = run_deterministic(det, w);
    if (!r.defined) continue;
    for (int c : r.visit_counts) CHECK(c <= (int)det.states.size());
  }
}

TEST_CASE("bounded outputs respect the visit-length bound") {
  Machine m = fixture_machine("rearranger.machine");
  Machine norm = normalize_short_output(m);
  int k = 6;
  for (const auto& w : words("ab", 4))
    for (const auto& out : enumerate_nondeterministic(norm, w, k))
      CHECK(out.size() <= (size_t)k * (w.size() + 2));
  Machine rep = repeater();
  for (const auto& w : words("a", 4))
    for (const auto& out : enumerate_nondeterministic(rep, w, 6))
      CHECK(out.size() <= (size_t)6 * (w.size() + 2));
}

TEST_CASE("rewriting machine guesses a word and copies it") {
  Machine h = fixture_machine("two_pass_copy.machine");
  CHECK(run_hennie(h, "") == std::set<std::string>{"#"});
  CHECK(run_hennie(h, "a") == std::set<std::string>{"a#a", "b#b"});
  CHECK(run_hennie(h, "aa") ==
        std::set<std::string>{"aa#aa", "ab#ab", "ba#ba", "bb#bb"});
  for (int n = 0; n <= 3; ++n) {
    std::set<std::string> expect;
    for (const auto& u : words("ab", n, n)) expect.insert(u + "#" + u);
    CHECK(run_hennie(h, std::string(n, 'a')) == expect);
  }
  // a bound too small to finish both passes accepts nothing
  Machine tight = h;
  tight.visits = 2;
  CHECK(run_hennie(tight, "a").empty());
}

TEST_CASE("a rewriting machine that never rewrites is a plain machine") {
  Machine gsm = fixture_machine("block_doubler.machine");
  Machine h = gsm;
  h.kind = MachineKind::hennie;
  h.work = h.input;
  h.visits = (int)h.states.size();
  h.check();
  for (const auto& w : words("ab", 4)) {
    RunResult r = run_deterministic(gsm, w);
    REQUIRE(r.defined);
    CHECK(run_hennie(h, w) == std::set<std::string>{r.output});
  }
}

TEST_CASE("deterministic rewriting runs match a specialized interpreter") {
  Machine m = Machine::from_text(R"(machine flip_copy
kind hennie
input a
output a b
work a b
visits 3
states h0 h1 h2 h3 hf
initial h0
final hf
inst h0 sym L => h1 - +1 / h0 - 0
inst h1 sym a => h1 a +1 rw b / h2 - -1
inst h2 sym L => h3 - +1 / h2 - -1
inst h3 sym b => h3 b +1 / hf - 0
)");
  REQUIRE(validate(m).deterministic);
  for (const auto& w : words("a", 5)) {
    auto expect = ref_hennie_det(m, w);
    RunResult r = run_deterministic(m, w);
    CHECK(r.defined == expect.has_value());
    if (expect && r.defined) CHECK(r.output == *expect);
    std::set<std::string> viaEnum = run_hennie(m, w);
    if (expect)
      CHECK(viaEnum == std::set<std::string>{*expect});
    else
      CHECK(viaEnum.empty());
  }
  RunResult r = run_deterministic(m, "aaa");
  REQUIRE(r.defined);
  CHECK(r.output == "aaabbb");
}

TEST_CASE("output loops are detected exactly on pumping configurations") {
  Machine rep = repeater();
  CHECK(detect_output_loop(rep, "a"));
  CHECK(detect_output_loop(rep, "aa"));
  // the rewind cycle on the empty word emits nothing
  CHECK_FALSE(detect_output_loop(rep, ""));

  Machine m = fixture_machine("block_doubler.machine");
  for (const auto& w : words("ab", 5)) CHECK_FALSE(detect_output_loop(m, w));
  // loop-free machines have stable bounded output sets
  int q = (int)m.states.size();
  for (const auto& w : words("ab", 4))
    CHECK(enumerate_nondeterministic(m, w, q) ==
          enumerate_nondeterministic(m, w, q + 2));

  Machine none = Machine::from_text(R"(machine none
kind gsm
input a
output a
states s f
initial s
final f
)");
  CHECK_FALSE(detect_output_loop(none, "a"));
}
