#pragma once
// Monadic second-order formulas over labelled graphs.
//
// Text syntax (prefix, fully parenthesised):
//   true | false
//   (lab <label> <x>)          node x carries <label>
//   (edge <label> <x> <y>)     edge labelled <label> from x to y
//   (= <x> <y>)  (in <x> <X>)
//   (not f) (and f g) (or f g) (imp f g)
//   (ex <x> f) (all <x> f)     node quantifiers
//   (exS <X> f) (allS <X> f)   node-set quantifiers
//   (path <x> <y>)             directed path, possibly empty
//   (path+ <x> <y>)            nonempty directed path
//   (pathvia <label> <x> <y>)  path using only <label>-edges
// Lower-case names are node variables, upper-case names set variables.

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "twt/graph.hpp"

namespace twt {

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind {
    True, False, Lab, Edge, Eq, In,
    Not, And, Or, Imp,
    Exists, Forall, ExistsSet, ForallSet,
    Path
  };
  Kind kind;
  std::string label;   // Lab/Edge label; Path: edge-label restriction ("" = any)
  bool strict = false; // Path only: require at least one step
  std::string v1, v2;  // variables (v1 = bound var for quantifiers)
  FormulaPtr a, b;     // subformulas
};

// Constructors.
namespace F {
FormulaPtr tru();
FormulaPtr fls();
FormulaPtr lab(const std::string& label, const std::string& x);
FormulaPtr edge(const std::string& label, const std::string& x, const std::string& y);
FormulaPtr eq(const std::string& x, const std::string& y);
FormulaPtr in(const std::string& x, const std::string& X);
FormulaPtr lnot(FormulaPtr f);
FormulaPtr land(FormulaPtr a, FormulaPtr b);
FormulaPtr lor(FormulaPtr a, FormulaPtr b);
FormulaPtr imp(FormulaPtr a, FormulaPtr b);
FormulaPtr iff(FormulaPtr a, FormulaPtr b);
FormulaPtr ex(const std::string& x, FormulaPtr f);
FormulaPtr all(const std::string& x, FormulaPtr f);
FormulaPtr exS(const std::string& X, FormulaPtr f);
FormulaPtr allS(const std::string& X, FormulaPtr f);
FormulaPtr path(const std::string& x, const std::string& y);       // reflexive
FormulaPtr path_strict(const std::string& x, const std::string& y);
FormulaPtr path_via(const std::string& label, const std::string& x, const std::string& y);
// Folds: empty conjunction is true, empty disjunction false.
FormulaPtr and_all(const std::vector<FormulaPtr>& fs);
FormulaPtr or_all(const std::vector<FormulaPtr>& fs);
}  // namespace F

std::string to_text(const FormulaPtr& f);
FormulaPtr parse_formula(const std::string& text);
// Parses one formula from a token stream starting at pos; advances pos.
FormulaPtr parse_formula(const std::vector<std::string>& tokens, size_t& pos);

std::set<std::string> free_vars(const FormulaPtr& f);
std::set<std::string> all_vars(const FormulaPtr& f);
bool contains_set_quantifier(const FormulaPtr& f);
std::set<std::string> mentioned_labels(const FormulaPtr& f);

// Capture-avoiding renaming of a free variable.
FormulaPtr rename_free(const FormulaPtr& f, const std::string& from, const std::string& to);
// A variable name not occurring in f, derived from base.
std::string fresh_var(const FormulaPtr& f, const std::string& base);

// Replaces every path atom by its second-order definition
// (allS X (imp (and (in x X) closed(X)) (in y X))), with closed(X) quantifying
// over the given edge labels. Used to cross-check the primitive treatment.
FormulaPtr expand_paths(const FormulaPtr& f, const std::vector<std::string>& edge_labels);

// Restricts all quantifiers of a closed formula to the strict prefix
// (side = left) or strict suffix (side = right) of position x.
enum class Side { left, right };
FormulaPtr relativize(const FormulaPtr& f, Side side, const std::string& x);

// Common shapes.
// The one-line graph property over the given edge labels: functional edges
// plus an initial node reaching everything and a final node reached from
// everything (vacuous on the empty graph).
FormulaPtr string_shape(const std::vector<std::string>& edge_labels);
// Shape of an encoded machine tape L w R: nonempty line whose source is the
// unique L-node and whose sink is the unique R-node.
FormulaPtr tape_shape();
// Nonempty line. Domain formula for edge-labelled string graphs.
FormulaPtr egr_shape(const std::vector<std::string>& edge_labels);
// Every node lies in exactly one of the given sets.
FormulaPtr partition_of(const std::vector<std::string>& set_vars);

}  // namespace twt
