#pragma once
// Translation of monadic second-order formulas on string graphs into finite
// automata over flagged alphabets, one flag per free variable. The automaton
// accepts exactly the flagged renderings of (word, valuation) pairs that
// satisfy the formula, with every node variable flagged exactly once.

#include <optional>
#include <string>
#include <vector>

#include "twt/automata.hpp"
#include "twt/formula.hpp"
#include "twt/graph.hpp"

namespace twt {

// The extra token closing an edge-labelled rendering: it carries the flags of
// the final node, which has no outgoing edge of its own.
inline const std::string kEndSym = "$";

// Token alphabet for an encoding. `symbols` are the plain input symbols; the
// tape alphabet gains L and R, the edge-labelled one gains the end token.
TokenAlphabet token_alphabet(const std::string& symbols, Encoding enc,
                             const std::set<std::string>& vars);

// Flagged rendering of a chain graph with a valuation. Node-labelled (and
// tape) graphs yield one token per node; edge-labelled graphs yield one token
// per edge plus the end token. Throws DecodeError on non-chain graphs and
// ParseError when a label or variable is missing from the alphabet.
std::vector<int> render_tokens(const Graph& g,
                               const std::map<std::string, std::set<NodeId>>& nu,
                               Encoding enc, const TokenAlphabet& alpha);

// Words that are renderings of some (graph, valuation) for the encoding:
// L.Sigma*.R for tapes, Sigma*.$ for edge-labelled graphs, Sigma* otherwise.
Dfa encoding_shape_dfa(const TokenAlphabet& alpha, Encoding enc);

// The compiler. The result is minimal and ranges over
// token_alphabet(symbols, enc, free_vars(f)).
Dfa compile(const FormulaPtr& f, const std::string& symbols, Encoding enc);

// Does f(x, y) pick at most one y per x on every tape over `symbols`?
// Returns the shortest (then lexicographically least) word witnessing a
// violation, or nothing when the formula is functional.
std::optional<std::string> functional_counterexample(const FormulaPtr& f,
                                                     const std::string& xvar,
                                                     const std::string& yvar,
                                                     const std::string& symbols);
bool check_functional(const FormulaPtr& f, const std::string& xvar,
                      const std::string& yvar, const std::string& symbols);

// Decomposition of a language whose words each contain exactly one symbol
// from `delta`: a disjoint union of left.d.right pieces with marker-free
// sides, one piece per useful d-transition of the minimal automaton.
// Throws std::invalid_argument when some accepted word does not contain
// exactly one delta symbol.
struct SplitPiece {
  Dfa left;
  std::string delta;
  Dfa right;
};
std::vector<SplitPiece> split_single_occurrence(const Dfa& d,
                                                const std::string& delta_syms);

// Same decomposition with an arbitrary token class as the marker set.
struct TokenSplitPiece {
  Dfa left;
  int delta_token;
  Dfa right;
};
std::vector<TokenSplitPiece> split_single_token(
    const Dfa& d, const std::function<bool(int)>& is_delta);

// A formula with one free node variable, true on a chain graph at position x
// exactly when the node labels strictly left (or right) of x spell a word in
// L(d). The automaton must be variable-free over single-character symbols.
FormulaPtr chain_language_formula(const Dfa& d, const std::string& var,
                                  Side side);

// left.delta.right as one automaton (used to recombine split pieces).
Dfa dfa_join(const Dfa& left, const std::string& delta, const Dfa& right);

}  // namespace twt
