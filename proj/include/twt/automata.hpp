#pragma once
// Finite automata over "flagged" alphabets: each token is a symbol combined
// with one 0/1 flag per logical variable. With no variables this degenerates
// to an ordinary alphabet of single-character symbols.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "twt/graph.hpp"

namespace twt {

struct TokenAlphabet {
  std::vector<std::string> syms;  // symbol components, unique
  std::vector<std::string> vars;  // variable names, sorted; one flag bit each

  int size() const { return (int)syms.size() << vars.size(); }
  int token(int sym_idx, uint32_t flags) const {
    return (sym_idx << vars.size()) | (int)flags;
  }
  int sym_of(int t) const { return t >> vars.size(); }
  uint32_t flags_of(int t) const { return t & ((1u << vars.size()) - 1); }
  bool flag(int t, int var_idx) const { return flags_of(t) >> var_idx & 1; }
  int sym_index(const std::string& s) const;
  int var_index(const std::string& v) const;
  std::string render(int t) const;  // e.g. "a" or "a:01"
  bool operator==(const TokenAlphabet&) const = default;

  static TokenAlphabet chars(const std::string& symbols);  // no variables
};

// Deterministic automaton with a total transition table.
struct Dfa {
  TokenAlphabet alpha;
  int initial = 0;
  std::vector<char> accepting;          // per state
  std::vector<std::vector<int>> next;   // [state][token]

  int states() const { return (int)accepting.size(); }
  int run(const std::vector<int>& tokens) const;
  bool accepts(const std::vector<int>& tokens) const;
  // Variable-free membership for a plain string; symbols not in the
  // alphabet make the word rejected.
  bool accepts_chars(const std::string& w) const;

  std::string to_text() const;
  static Dfa from_text(const std::string& text);
};

struct Nfa {
  TokenAlphabet alpha;
  std::set<int> initial;
  std::set<int> accepting;
  std::vector<std::map<int, std::set<int>>> next;  // [state][token] -> states
  std::vector<std::set<int>> eps;                  // epsilon moves

  int states() const { return (int)next.size(); }
  int add_state();
  void add_edge(int s, int token, int t) { next[s][token].insert(t); }
  void add_eps(int s, int t) { eps[s].insert(t); }
};

// Whole/empty languages over an alphabet.
Dfa dfa_all(const TokenAlphabet& alpha);
Dfa dfa_none(const TokenAlphabet& alpha);

// Boolean combinations; alphabets must agree.
Dfa dfa_product(const Dfa& a, const Dfa& b, const std::function<bool(bool, bool)>& keep);
Dfa dfa_intersect(const Dfa& a, const Dfa& b);
Dfa dfa_union(const Dfa& a, const Dfa& b);
Dfa dfa_complement(const Dfa& a);

Dfa dfa_minimize(const Dfa& a);
Dfa nfa_determinize(const Nfa& n);
Nfa dfa_to_nfa(const Dfa& a);

// Language-preserving alphabet change: the new alphabet has the same symbols
// plus additional variables, whose flags the language does not constrain.
Dfa dfa_extend(const Dfa& a, const TokenAlphabet& bigger);
// Erases one variable's flag; the result is nondeterministic.
Nfa nfa_project(const Dfa& a, const std::string& var);

// Shortest accepted token word, if any. Language emptiness = !has_value().
std::optional<std::vector<int>> shortest_accepted(const Dfa& a);
bool dfa_equal(const Dfa& a, const Dfa& b);

// Left-to-right reversal of the language (used to track a segment language
// while walking leftwards).
Dfa dfa_reverse(const Dfa& a);

// Regular expressions over single characters: literals, concatenation, |, *,
// parentheses, % for the empty word, ! for the empty language. The alphabet
// must be variable-free and
// lists every character the machine may ever look at.
Dfa regex_to_dfa(const std::string& rx, const TokenAlphabet& alpha);
// Inverse direction via state elimination; the output parses back to an
// equivalent automaton but is not normalised in any way.
std::string dfa_to_regex(const Dfa& a);

}  // namespace twt
