#pragma once
// Direct recursive evaluation of MSO formulas on a concrete graph.
//
// Node quantifiers enumerate the node list; set quantifiers enumerate all
// subsets and are therefore only allowed on small graphs (at most
// kSetQuantifierNodeLimit nodes). Path atoms are evaluated by reachability,
// which coincides with their second-order definition (the least set closed
// under edges that contains the source is exactly the set of reachable
// nodes); the expanded form is kept around for cross-checking.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "twt/formula.hpp"
#include "twt/graph.hpp"

namespace twt {

inline constexpr int kSetQuantifierNodeLimit = 14;

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Environment mapping free variables to nodes / node sets.
struct Env {
  std::map<std::string, NodeId> nodes;
  std::map<std::string, std::set<NodeId>> sets;
};

// Evaluator with per-graph caches (adjacency, label buckets, reachability).
// Build once per graph, evaluate many formulas/environments against it.
class Evaluator {
 public:
  explicit Evaluator(const Graph& g);

  bool eval(const FormulaPtr& f, const Env& env) const;

  const Graph& graph() const { return *g_; }

 private:
  struct Adj {
    std::vector<std::pair<std::string, NodeId>> out, in;
  };
  bool rec(const Formula& f, Env& env) const;
  bool reachable(NodeId from, NodeId to, const std::string& via) const;
  std::vector<NodeId> candidates(const Formula& body, const std::string& var,
                                 const Env& env) const;

  const Graph* g_;
  std::vector<NodeId> nodes_;
  std::map<NodeId, Adj> adj_;
  std::map<std::string, std::vector<NodeId>> label_bucket_;
  // reach_[via][from] = set of nodes reachable via edges labelled `via`
  // ("" = any label). Filled lazily.
  mutable std::map<std::string, std::map<NodeId, std::set<NodeId>>> reach_;
};

// One-shot convenience wrappers.
bool eval_formula(const Graph& g, const FormulaPtr& f, const Env& env = {});
bool eval_formula(const ValuatedGraph& g, const FormulaPtr& f);

}  // namespace twt
