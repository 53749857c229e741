#include "twt/eval.hpp"

#include <algorithm>

namespace twt {

using K = Formula::Kind;

Evaluator::Evaluator(const Graph& g) : g_(&g), nodes_(g.nodes()) {
  for (NodeId id : nodes_) {
    adj_[id];  // ensure entry
    label_bucket_[g.label(id)].push_back(id);
  }
  for (auto& e : g.edges()) {
    adj_[e.src].out.push_back({e.label, e.dst});
    adj_[e.dst].in.push_back({e.label, e.src});
  }
}

bool Evaluator::reachable(NodeId from, NodeId to, const std::string& via) const {
  auto& per_from = reach_[via];
  auto it = per_from.find(from);
  if (it == per_from.end()) {
    std::set<NodeId> seen{from};
    std::vector<NodeId> stack{from};
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (auto& [lab, v] : adj_.at(u).out) {
        if (!via.empty() && lab != via) continue;
        if (seen.insert(v).second) stack.push_back(v);
      }
    }
    it = per_from.emplace(from, std::move(seen)).first;
  }
  return it->second.count(to) != 0;
}

// Candidate nodes for an existential over `var`: if the quantified body is a
// conjunction whose first conjuncts pin the variable down (an incident edge,
// an equality, a label, set membership), only those nodes are tried.
std::vector<NodeId> Evaluator::candidates(const Formula& body, const std::string& var,
                                          const Env& env) const {
  const Formula* f = &body;
  std::vector<const Formula*> todo{f};
  while (!todo.empty()) {
    const Formula* cur = todo.back();
    todo.pop_back();
    if (cur->kind == K::And) {
      todo.push_back(cur->a.get());
      todo.push_back(cur->b.get());
      continue;
    }
    if (cur->kind == K::Edge) {
      if (cur->v1 == var && cur->v2 != var && env.nodes.count(cur->v2)) {
        std::vector<NodeId> cs;
        for (auto& [lab, u] : adj_.at(env.nodes.at(cur->v2)).in)
          if (lab == cur->label) cs.push_back(u);
        return cs;
      }
      if (cur->v2 == var && cur->v1 != var && env.nodes.count(cur->v1)) {
        std::vector<NodeId> cs;
        for (auto& [lab, u] : adj_.at(env.nodes.at(cur->v1)).out)
          if (lab == cur->label) cs.push_back(u);
        return cs;
      }
    }
    if (cur->kind == K::Eq) {
      if (cur->v1 == var && cur->v2 != var && env.nodes.count(cur->v2))
        return {env.nodes.at(cur->v2)};
      if (cur->v2 == var && cur->v1 != var && env.nodes.count(cur->v1))
        return {env.nodes.at(cur->v1)};
    }
    if (cur->kind == K::Lab && cur->v1 == var) {
      auto it = label_bucket_.find(cur->label);
      return it == label_bucket_.end() ? std::vector<NodeId>{} : it->second;
    }
    if (cur->kind == K::In && cur->v1 == var && env.sets.count(cur->v2)) {
      auto& s = env.sets.at(cur->v2);
      return std::vector<NodeId>(s.begin(), s.end());
    }
  }
  return nodes_;
}

bool Evaluator::rec(const Formula& f, Env& env) const {
  switch (f.kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Lab: {
      auto it = env.nodes.find(f.v1);
      if (it == env.nodes.end()) throw EvalError("unbound node variable " + f.v1);
      return g_->label(it->second) == f.label;
    }
    case K::Edge: {
      auto ix = env.nodes.find(f.v1), iy = env.nodes.find(f.v2);
      if (ix == env.nodes.end() || iy == env.nodes.end())
        throw EvalError("unbound node variable in edge atom");
      return g_->has_edge(ix->second, f.label, iy->second);
    }
    case K::Eq:
      return env.nodes.at(f.v1) == env.nodes.at(f.v2);
    case K::In: {
      auto is = env.sets.find(f.v2);
      if (is == env.sets.end()) throw EvalError("unbound set variable " + f.v2);
      return is->second.count(env.nodes.at(f.v1)) != 0;
    }
    case K::Path: {
      // path+ is path with x != y, matching the definition "x before y".
      NodeId x = env.nodes.at(f.v1), y = env.nodes.at(f.v2);
      if (x == y) return !f.strict;
      return reachable(x, y, f.label);
    }
    case K::Not: return !rec(*f.a, env);
    case K::And: return rec(*f.a, env) && rec(*f.b, env);
    case K::Or: return rec(*f.a, env) || rec(*f.b, env);
    case K::Imp: return !rec(*f.a, env) || rec(*f.b, env);
    case K::Exists: case K::Forall: {
      bool exists = f.kind == K::Exists;
      // For foralls of the shape (all v (imp A B)) the guard A restricts the
      // candidate nodes the same way a conjunction does for exists.
      const Formula* guard = nullptr;
      if (!exists && f.a->kind == K::Imp) guard = f.a->a.get();
      // Skipping non-candidates is sound for the forall case too: outside
      // the candidate list the guard is false and the implication holds.
      std::vector<NodeId> cs = exists ? candidates(*f.a, f.v1, env)
                             : guard  ? candidates(*guard, f.v1, env)
                                      : nodes_;
      auto saved = env.nodes.find(f.v1) != env.nodes.end()
                       ? std::optional<NodeId>(env.nodes[f.v1])
                       : std::nullopt;
      bool result = !exists;
      for (NodeId n : cs) {
        env.nodes[f.v1] = n;
        bool v = rec(*f.a, env);
        if (exists && v) { result = true; break; }
        if (!exists && !v) { result = false; break; }
      }
      if (saved) env.nodes[f.v1] = *saved; else env.nodes.erase(f.v1);
      return result;
    }
    case K::ExistsSet: case K::ForallSet: {
      size_t n = nodes_.size();
      if (n > (size_t)kSetQuantifierNodeLimit)
        throw EvalError("set quantifier on a graph with " + std::to_string(n) +
                        " nodes (limit " + std::to_string(kSetQuantifierNodeLimit) + ")");
      bool exists = f.kind == K::ExistsSet;
      auto saved = env.sets.find(f.v1) != env.sets.end()
                       ? std::optional<std::set<NodeId>>(env.sets[f.v1])
                       : std::nullopt;
      bool result = !exists;
      for (uint64_t mask = 0; mask < (uint64_t(1) << n); ++mask) {
        std::set<NodeId> s;
        for (size_t i = 0; i < n; ++i)
          if (mask & (uint64_t(1) << i)) s.insert(nodes_[i]);
        env.sets[f.v1] = std::move(s);
        bool v = rec(*f.a, env);
        if (exists && v) { result = true; break; }
        if (!exists && !v) { result = false; break; }
      }
      if (saved) env.sets[f.v1] = *saved; else env.sets.erase(f.v1);
      return result;
    }
  }
  throw std::logic_error("bad formula kind");
}

bool Evaluator::eval(const FormulaPtr& f, const Env& env) const {
  Env e = env;
  return rec(*f, e);
}

bool eval_formula(const Graph& g, const FormulaPtr& f, const Env& env) {
  return Evaluator(g).eval(f, env);
}

bool eval_formula(const ValuatedGraph& g, const FormulaPtr& f) {
  Env env;
  for (auto& [v, s] : g.nu) {
    if (is_node_var(v))
      env.nodes[v] = *s.begin();
    else
      env.sets[v] = s;
  }
  return eval_formula(g.graph, f, env);
}

}  // namespace twt
