#include "twt/simulate.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>

#include "twt/compile.hpp"
#include "twt/eval.hpp"

namespace twt {

namespace {

// Per (machine, word) evaluation context. Symbol and look-around tests read
// the (possibly rewritten) tape directly; formula tests and moves evaluate
// on the tape graph of the original word, either by direct recursion or
// through a compiled automaton with the position as a flagged token.
struct Runtime {
  const Machine& m;
  std::string w;
  std::string tape;  // L w R, mutated by rewriting machines
  int len;           // tape length = |w| + 2
  bool use_compiled;

  Graph tape_graph;
  std::unique_ptr<Evaluator> ev;
  std::vector<NodeId> node_at;

  struct CompiledFormula {
    TokenAlphabet alpha;
    Dfa dfa;
    bool has_x = false, has_y = false;
    std::vector<int> sym_tok;             // plain token per position
    std::vector<int> fwd;                 // state after plain prefix [0, j)
    std::vector<std::vector<char>> acc;   // acc[j][s]: plain suffix [j, end)
                                          // from s reaches acceptance
  };
  std::map<const Formula*, CompiledFormula> cache;

  Runtime(const Machine& machine, const std::string& word,
          const SimOptions& opts)
      : m(machine), w(word) {
    tape = std::string(1, kLeftMarker) + w + std::string(1, kRightMarker);
    len = (int)tape.size();
    use_compiled = opts.mso == MsoEval::compiled ||
                   (opts.mso == MsoEval::autoselect && (int)w.size() > 10);
    if (m.kind == MachineKind::mso && !use_compiled) {
      tape_graph = encode_tape(w);
      node_at = tape_graph.nodes();
      ev = std::make_unique<Evaluator>(tape_graph);
    }
  }

  std::string sym_at(int pos) const {
    // Formula evaluation always sees the original word; only rewriting
    // machines mutate the tape, and they have no formulas.
    if (pos == 0) return std::string(1, kLeftMarker);
    if (pos == len - 1) return std::string(1, kRightMarker);
    return std::string(1, w[pos - 1]);
  }

  const CompiledFormula& compiled(const FormulaPtr& f) {
    auto it = cache.find(f.get());
    if (it != cache.end()) return it->second;
    CompiledFormula c;
    auto vars = free_vars(f);
    c.has_x = vars.count("x") > 0;
    c.has_y = vars.count("y") > 0;
    c.alpha = token_alphabet(m.input.symbols(), Encoding::tape,
                             {vars.begin(), vars.end()});
    c.dfa = compile(f, m.input.symbols(), Encoding::tape);
    c.sym_tok.resize(len);
    for (int j = 0; j < len; ++j)
      c.sym_tok[j] = c.alpha.token(c.alpha.sym_index(sym_at(j)), 0);
    c.fwd.resize(len + 1);
    c.fwd[0] = c.dfa.initial;
    for (int j = 0; j < len; ++j)
      c.fwd[j + 1] = c.dfa.next[c.fwd[j]][c.sym_tok[j]];
    c.acc.assign(len + 1, std::vector<char>(c.dfa.states(), 0));
    for (int s = 0; s < c.dfa.states(); ++s) c.acc[len][s] = c.dfa.accepting[s];
    for (int j = len - 1; j >= 0; --j)
      for (int s = 0; s < c.dfa.states(); ++s)
        c.acc[j][s] = c.acc[j + 1][c.dfa.next[s][c.sym_tok[j]]];
    return cache.emplace(f.get(), std::move(c)).first->second;
  }

  int flagged(const CompiledFormula& c, int pos, uint32_t flags) const {
    return c.alpha.token(c.alpha.sym_of(c.sym_tok[pos]), flags);
  }

  bool formula_at(const FormulaPtr& f, int pos) {
    if (use_compiled) {
      const CompiledFormula& c = compiled(f);
      if (!c.has_x) return c.acc[0][c.fwd[0]];
      uint32_t fx = 1u << c.alpha.var_index("x");
      int s = c.dfa.next[c.fwd[pos]][flagged(c, pos, fx)];
      return c.acc[pos + 1][s];
    }
    Env env;
    if (free_vars(f).count("x")) env.nodes["x"] = node_at[pos];
    return ev->eval(f, env);
  }

  std::vector<int> move_targets(const FormulaPtr& f, int pos) {
    std::vector<int> out;
    if (!use_compiled) {
      auto vars = free_vars(f);
      for (int j = 0; j < len; ++j) {
        Env env;
        if (vars.count("x")) env.nodes["x"] = node_at[pos];
        env.nodes["y"] = node_at[j];
        if (ev->eval(f, env)) out.push_back(j);
      }
      return out;
    }
    const CompiledFormula& c = compiled(f);
    if (!c.has_y) {
      // The formula does not constrain the target: every position qualifies
      // when it holds, none otherwise.
      if (formula_at(f, pos))
        for (int j = 0; j < len; ++j) out.push_back(j);
      return out;
    }
    uint32_t fy = 1u << c.alpha.var_index("y");
    if (!c.has_x) {
      for (int j = 0; j < len; ++j) {
        int s = c.dfa.next[c.fwd[j]][flagged(c, j, fy)];
        if (c.acc[j + 1][s]) out.push_back(j);
      }
      return out;
    }
    uint32_t fx = 1u << c.alpha.var_index("x");
    // y strictly left of x
    for (int j = 0; j < pos; ++j) {
      int s = c.dfa.next[c.fwd[j]][flagged(c, j, fy)];
      for (int t = j + 1; t < pos; ++t) s = c.dfa.next[s][c.sym_tok[t]];
      s = c.dfa.next[s][flagged(c, pos, fx)];
      if (c.acc[pos + 1][s]) out.push_back(j);
    }
    // y = x
    {
      int s = c.dfa.next[c.fwd[pos]][flagged(c, pos, fx | fy)];
      if (c.acc[pos + 1][s]) out.push_back(pos);
    }
    // y strictly right of x
    int s0 = c.dfa.next[c.fwd[pos]][flagged(c, pos, fx)];
    for (int j = pos + 1; j < len; ++j) {
      int s = c.dfa.next[s0][flagged(c, j, fy)];
      if (c.acc[j + 1][s]) out.push_back(j);
      s0 = c.dfa.next[s0][c.sym_tok[j]];
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool test(const Test& t, int pos) {
    switch (t.type) {
      case Test::Type::sym:
        return tape[pos] == t.sym[0];
      case Test::Type::rla: {
        if (tape[pos] != t.sym[0]) return false;
        std::vector<int> pre, suf;
        for (int j = 0; j < pos; ++j)
          pre.push_back(t.left.alpha.sym_index(std::string(1, tape[j])));
        for (int j = pos + 1; j < len; ++j)
          suf.push_back(t.right.alpha.sym_index(std::string(1, tape[j])));
        return t.left.accepts(pre) && t.right.accepts(suf);
      }
      case Test::Type::mso:
        return formula_at(t.formula, pos);
    }
    return false;
  }
};

struct Successor {
  Configuration c;
  Step s;
};

// All successors of (p, pos), in canonical order: instruction list order,
// then ascending jump targets.
std::vector<Successor> successors(Runtime& rt,
                                  const std::vector<int>& insts_of_p, int pos) {
  std::vector<Successor> out;
  for (int idx : insts_of_p) {
    const Instruction& inst = rt.m.instructions[idx];
    bool holds = rt.test(inst.test, pos);
    const Branch& b = holds ? inst.then_b : inst.else_b;
    if (!b.rewrite.empty() && (pos == 0 || pos == rt.len - 1))
      continue;  // markers cannot be overwritten
    Step step;
    step.inst = idx;
    step.took_then = holds;
    step.out = b.out;
    step.read = rt.tape[pos];
    step.wrote = b.rewrite.empty() ? rt.tape[pos] : b.rewrite[0];
    if (b.move.is_step) {
      int j = pos + b.move.step;
      if (j < 0 || j >= rt.len) continue;  // off the tape: branch fails
      out.push_back({Configuration{b.q, j}, step});
    } else {
      for (int j : rt.move_targets(b.move.formula, pos))
        out.push_back({Configuration{b.q, j}, step});
    }
  }
  return out;
}

std::map<std::string, std::vector<int>> instructions_by_state(const Machine& m) {
  std::map<std::string, std::vector<int>> by_state;
  for (int i = 0; i < (int)m.instructions.size(); ++i)
    by_state[m.instructions[i].p].push_back(i);
  return by_state;
}

}  // namespace

std::string Computation::output() const {
  std::string out;
  for (const auto& s : steps) out += s.out;
  return out;
}

bool Computation::accepting(const Machine& m) const {
  return !configs.empty() && configs.back().state == m.final_state;
}

int Computation::max_visits() const {
  std::map<int, int> counts;
  int best = 0;
  for (const auto& c : configs) best = std::max(best, ++counts[c.pos]);
  return best;
}

RunResult run_deterministic(const Machine& m, const std::string& w,
                            const SimOptions& opts) {
  ValidationReport rep = validate(m);
  if (!rep.deterministic)
    throw std::invalid_argument(m.name + ": not deterministic");
  if (m.kind == MachineKind::mso && !rep.mso_moves_functional)
    throw std::invalid_argument(m.name + ": jump formulas are not functional");

  Runtime rt(m, w, opts);
  auto by_state = instructions_by_state(m);

  RunResult r;
  r.comp.word = w;
  r.visit_counts.assign(rt.len, 0);
  std::set<std::pair<Configuration, std::string>> seen;

  Configuration cur{m.initial, 0};
  r.comp.configs.push_back(cur);
  while (true) {
    int count = ++r.visit_counts[cur.pos];
    if (m.kind == MachineKind::hennie && count > m.visits) return r;
    if (cur.state == m.final_state) {
      r.defined = true;
      r.output = r.comp.output();
      return r;
    }
    if (!seen.insert({cur, rt.tape}).second) return r;  // loop
    auto it = by_state.find(cur.state);
    if (it == by_state.end()) return r;  // no instruction: stuck
    auto succ = successors(rt, it->second, cur.pos);
    if (succ.empty()) return r;  // off-tape or jump without target
    if (succ.size() > 1) return r;  // jump formula picked several targets
    rt.tape[cur.pos] = succ[0].s.wrote;
    r.comp.steps.push_back(succ[0].s);
    cur = succ[0].c;
    r.comp.configs.push_back(cur);
  }
}

std::vector<Computation> enumerate_computations(const Machine& m,
                                                const std::string& w, int k,
                                                const SimOptions& opts) {
  if (k < 1) throw std::invalid_argument("visit bound must be >= 1");
  Runtime rt(m, w, opts);
  auto by_state = instructions_by_state(m);

  std::vector<Computation> results;
  Computation cur;
  cur.word = w;
  std::vector<int> visits(rt.len, 0);
  size_t out_len = 0;
  // Occurrences of a configuration (with tape contents) at a given output
  // length: stepping into a repeat without output in between is pruned.
  // Any computation reduces to one without such silent cycles, with the
  // same output and no more visits, so the output set is unchanged and the
  // computation list keeps one canonical representative per output route.
  std::map<std::string, std::multiset<size_t>> occurrences;
  auto key = [&](const Configuration& c) {
    return c.state + "@" + std::to_string(c.pos) + "|" + rt.tape;
  };

  auto dfs = [&](auto&& self, const Configuration& c) -> void {
    if (visits[c.pos] + 1 > k) return;
    std::string ck = key(c);
    auto& occ = occurrences[ck];
    if (occ.count(out_len)) return;
    occ.insert(out_len);
    ++visits[c.pos];
    cur.configs.push_back(c);

    if (c.state == m.final_state) {
      results.push_back(cur);
    } else if (auto it = by_state.find(c.state); it != by_state.end()) {
      for (const auto& s : successors(rt, it->second, c.pos)) {
        char saved = rt.tape[c.pos];
        rt.tape[c.pos] = s.s.wrote;
        cur.steps.push_back(s.s);
        out_len += s.s.out.size();
        self(self, s.c);
        out_len -= s.s.out.size();
        cur.steps.pop_back();
        rt.tape[c.pos] = saved;
      }
    }

    cur.configs.pop_back();
    --visits[c.pos];
    occurrences[ck].erase(occurrences[ck].find(out_len));
  };
  dfs(dfs, Configuration{m.initial, 0});
  return results;
}

std::set<std::string> enumerate_nondeterministic(const Machine& m,
                                                 const std::string& w, int k,
                                                 const SimOptions& opts) {
  std::set<std::string> out;
  for (const auto& c : enumerate_computations(m, w, k, opts))
    out.insert(c.output());
  return out;
}

std::set<std::string> run_hennie(const Machine& m, const std::string& w) {
  if (m.kind != MachineKind::hennie)
    throw std::invalid_argument(m.name + ": not a rewriting machine");
  return enumerate_nondeterministic(m, w, m.visits);
}

bool detect_output_loop(const Machine& m, const std::string& w) {
  if (m.kind == MachineKind::hennie)
    throw std::invalid_argument(m.name + ": loop detection needs a read-only tape");
  Runtime rt(m, w, {});
  auto by_state = instructions_by_state(m);

  std::map<std::string, int> state_id;
  for (int i = 0; i < (int)m.states.size(); ++i) state_id[m.states[i]] = i;
  int n_nodes = (int)m.states.size() * rt.len;
  auto node = [&](const Configuration& c) {
    return state_id[c.state] * rt.len + c.pos;
  };

  struct EdgeTo {
    int to;
    bool output;
  };
  std::vector<std::vector<EdgeTo>> adj(n_nodes), radj(n_nodes);
  for (const auto& [state, insts] : by_state) {
    if (state == m.final_state) continue;
    for (int pos = 0; pos < rt.len; ++pos) {
      int u = state_id[state] * rt.len + pos;
      for (const auto& s : successors(rt, insts, pos)) {
        int v = node(s.c);
        adj[u].push_back({v, !s.s.out.empty()});
        radj[v].push_back({u, !s.s.out.empty()});
      }
    }
  }

  auto closure = [&](std::vector<int> frontier,
                     const std::vector<std::vector<EdgeTo>>& g) {
    std::vector<char> seen(n_nodes, 0);
    for (int s : frontier) seen[s] = 1;
    while (!frontier.empty()) {
      int u = frontier.back();
      frontier.pop_back();
      for (const auto& e : g[u])
        if (!seen[e.to]) {
          seen[e.to] = 1;
          frontier.push_back(e.to);
        }
    }
    return seen;
  };
  std::vector<char> reach = closure({node({m.initial, 0})}, adj);
  std::vector<int> finals;
  for (int pos = 0; pos < rt.len; ++pos)
    finals.push_back(state_id[m.final_state] * rt.len + pos);
  std::vector<char> coreach = closure(finals, radj);

  // Strongly connected components by two depth-first passes.
  std::vector<int> order, comp(n_nodes, -1);
  std::vector<char> seen(n_nodes, 0);
  for (int s = 0; s < n_nodes; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<int, size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [u, i] = stack.back();
      if (i < adj[u].size()) {
        int v = adj[u][i++].to;
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back({v, 0});
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }
  int n_comp = 0;
  for (int i = n_nodes - 1; i >= 0; --i) {
    int s = order[i];
    if (comp[s] != -1) continue;
    std::vector<int> stack{s};
    comp[s] = n_comp;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const auto& e : radj[u])
        if (comp[e.to] == -1) {
          comp[e.to] = n_comp;
          stack.push_back(e.to);
        }
    }
    ++n_comp;
  }

  for (int u = 0; u < n_nodes; ++u) {
    if (!reach[u] || !coreach[u]) continue;
    for (const auto& e : adj[u])
      if (e.output && comp[e.to] == comp[u] && reach[e.to] && coreach[e.to])
        return true;
  }
  return false;
}

}  // namespace twt
