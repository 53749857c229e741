#pragma once
// Graph transductions defined by monadic second-order formulas: a finite set
// of copies of the input node set, a keep/label formula per (copy, label), an
// edge formula per (copy, copy, label), all guarded by a domain formula, and
// optionally parameterised by free set variables. Each satisfying parameter
// valuation contributes one output graph.

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "twt/formula.hpp"
#include "twt/graph.hpp"

namespace twt {

struct MsoTransduction {
  std::string name;
  std::vector<std::string> params;  // set variables, e.g. "Xa"
  std::vector<std::string> copies;  // copy names, order fixes output node order
  std::vector<std::string> in_node_labels, in_edge_labels;
  std::vector<std::string> out_node_labels, out_edge_labels;
  FormulaPtr domain;  // free variables within params
  // node formulas have free variables within params + {x}; a node is kept in
  // a copy exactly when one label formula holds (none or several drop it)
  std::map<std::pair<std::string, std::string>, FormulaPtr> node_formulas;
  // edge formulas have free variables within params + {x, y}
  std::map<std::tuple<std::string, std::string, std::string>, FormulaPtr>
      edge_formulas;

  void validate() const;  // throws ParseError on structural problems
  std::string to_text() const;
  static MsoTransduction from_text(const std::string& text);
};

// All outputs of t on the input graph, one per satisfying parameter
// valuation, in valuation enumeration order (possibly with repeats). Throws
// std::invalid_argument when the input carries labels outside the declared
// input signature.
std::vector<Graph> apply(const MsoTransduction& t, const Graph& input);

// String-level view: encode, apply, decode every output that is a string
// graph of the requested encoding (outputs that are not are skipped).
std::set<std::string> apply_string(const MsoTransduction& t,
                                   const std::string& w, Encoding in_enc,
                                   Encoding out_enc);

// The union of two transductions as relations, realized with a fresh
// selector parameter (all-nodes = first branch, empty = second).
MsoTransduction transduction_union(const MsoTransduction& a,
                                   const MsoTransduction& b);

// Nondeterministic node relabelling: each sigma node may become any tau in
// allowed[sigma]. Edge labels pass through unchanged.
MsoTransduction relabelling_to_mso(
    const std::map<std::string, std::set<std::string>>& allowed,
    const std::vector<std::string>& edge_labels);
// Same on edge-labelled strings: the label of the edge leaving a node is
// rewritten according to a parameter choice at that node.
MsoTransduction edge_relabelling_to_mso(
    const std::map<std::string, std::set<std::string>>& allowed);

// Fixed encoding translations over a plain alphabet.
MsoTransduction t_edges_to_nodes(const std::string& sigma);  // egr -> ngr
MsoTransduction t_nodes_to_edges(const std::string& sigma);  // ngr -> egr (undefined on the empty word)
MsoTransduction t_tape_to_edges(const std::string& sigma);   // tape -> egr
MsoTransduction t_mark_ends(const std::string& sigma);       // egr(w) -> egr(LwR)

// A chain of transductions with declared outer encodings.
struct Pipeline {
  std::string name;
  Encoding in_enc = Encoding::ngr;
  Encoding out_enc = Encoding::ngr;
  std::vector<MsoTransduction> stages;

  std::string to_text() const;
  static Pipeline from_text(const std::string& text);
};

// All outputs across every stage-wise combination of parameter choices.
std::vector<Graph> apply_pipeline(const Pipeline& p, const Graph& input);
std::set<std::string> apply_pipeline_string(const Pipeline& p,
                                            const std::string& w);

}  // namespace twt
