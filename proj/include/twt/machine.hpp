#pragma once
// Two-way finite-state transducers over a read-only tape L w R, with three
// test/move styles (single symbol, regular look-around, MSO formulas) plus a
// rewriting variant whose cells can be overwritten within a declared visit
// bound. Each instruction carries an if-branch and an else-branch; the test
// decides which one fires.

#include <optional>
#include <string>
#include <vector>

#include "twt/automata.hpp"
#include "twt/formula.hpp"
#include "twt/graph.hpp"

namespace twt {

enum class MachineKind { gsm, rla, mso, hennie };

std::string kind_name(MachineKind k);
MachineKind parse_kind(const std::string& s);

struct Test {
  enum class Type { sym, rla, mso } type = Type::sym;
  std::string sym;        // sym tests and the centre symbol of rla tests
  Dfa left, right;        // rla: prefix/suffix languages, stored normalized
  std::string left_re, right_re;  // original regex spellings, for printing
  FormulaPtr formula;     // mso: one free node variable x
};

struct Move {
  bool is_step = true;
  int step = 0;           // -1, 0, +1
  FormulaPtr formula;     // mso jump: free node variables x (from), y (to)
};

struct Branch {
  std::string q;          // target state
  std::string out;        // output chunk over the output alphabet ("" = none)
  Move move;
  std::string rewrite;    // rewriting machines: symbol written to the cell
                          // before moving ("" = leave unchanged)
};

struct Instruction {
  std::string p;          // source state
  Test test;
  Branch then_b, else_b;
};

struct Machine {
  std::string name;
  MachineKind kind = MachineKind::gsm;
  Alphabet input, output;
  Alphabet work;          // rewriting machines: tape alphabet, superset of input
  int visits = 0;         // rewriting machines: declared visit bound
  std::vector<std::string> states;
  std::string initial, final_state;
  std::vector<Instruction> instructions;

  // Structural soundness: declared states/symbols only, no instruction out
  // of the final state, kind-specific test/move styles, rla normalization
  // possible. Throws ParseError.
  void check() const;

  std::string to_text() const;
  static Machine from_text(const std::string& text);
};

// Semantic findings that are reported rather than enforced.
struct ValidationReport {
  bool deterministic = true;        // at most one instruction per state
  bool short_outputs = true;        // every |out| <= 1
  bool rla_normalized = true;       // tests already within L Sigma* / Sigma* R
  bool mso_moves_functional = true; // every jump formula picks <= 1 target
  std::vector<std::string> notes;
};
ValidationReport validate(const Machine& m);

// The prefix/suffix languages a look-around test can actually meet: the
// prefix of a tape position is either empty (at L) or starts with L, and
// dually for the suffix. Returns the test unchanged when already normalized.
Test normalize_rla_test(const Test& t, const Alphabet& input);

// Equivalent machine writing at most one symbol per step, chaining longer
// chunks through fresh stay-put states.
Machine normalize_short_output(const Machine& m);

// Equivalent machine whose initial and final states differ.
Machine separate_final_state(const Machine& m);

// A one-branch transition in the classical style: in state p reading sigma,
// go to q, emit out, move eps.
struct FiveTuple {
  std::string p;
  std::string sym;   // single symbol, possibly L or R
  std::string q;
  std::string out;
  int eps = 0;
};

// Builds the branching-instruction machine from classical one-branch rules.
// Nondeterministic flavour: each rule gets a dummy else-branch staying put in
// the source state. Deterministic flavour (requires at most one rule per
// (state, symbol)): the rules of each state are probed sequentially through
// fresh chained states, so the result stays deterministic.
Machine to_eight_tuple(const std::string& name, const std::vector<FiveTuple>& rules,
                       bool deterministic, const Alphabet& input,
                       const Alphabet& output, const std::string& initial,
                       const std::string& final_state);

}  // namespace twt
