#include "twt/compile.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace twt {

namespace {

// Dedicated dead state keeps the hand-built atom automata total.
struct Builder {
  Dfa d;
  int dead;

  explicit Builder(const TokenAlphabet& alpha, int nstates) {
    d.alpha = alpha;
    d.accepting.assign(nstates + 1, 0);
    dead = nstates;
    d.next.assign(nstates + 1, std::vector<int>(alpha.size(), dead));
    d.initial = 0;
  }
  // Route tokens satisfying `pred` from s to t (later calls do not override).
  template <typename Pred>
  void route(int s, Pred pred, int t) {
    for (int tok = 0; tok < d.alpha.size(); ++tok)
      if (d.next[s][tok] == dead && pred(tok)) d.next[s][tok] = t;
  }
  Dfa take(std::vector<int> accepting) {
    for (int s : accepting) d.accepting[s] = 1;
    return dfa_minimize(d);
  }
};

bool is_marker_sym(const std::string& s) {
  return s == std::string(1, kLeftMarker) || s == std::string(1, kRightMarker) ||
         s == kEndSym;
}

// Exactly one position flagged for `var`, no other constraint.
Dfa exactly_one(const TokenAlphabet& alpha, const std::string& var) {
  int v = alpha.var_index(var);
  Builder b(alpha, 2);
  b.route(0, [&](int t) { return !alpha.flag(t, v); }, 0);
  b.route(0, [&](int t) { return alpha.flag(t, v); }, 1);
  b.route(1, [&](int t) { return !alpha.flag(t, v); }, 1);
  return b.take({1});
}

// All node variables of the alphabet flagged exactly once each.
Dfa valid_dfa(const TokenAlphabet& alpha) {
  Dfa d = dfa_all(alpha);
  for (const auto& v : alpha.vars)
    if (is_node_var(v)) d = dfa_minimize(dfa_intersect(d, exactly_one(alpha, v)));
  return d;
}

TokenAlphabet alpha_for(const std::string& symbols, Encoding enc,
                        const std::set<std::string>& vars) {
  TokenAlphabet a = TokenAlphabet::chars(symbols);
  if (enc == Encoding::tape) {
    a.syms.push_back(std::string(1, kLeftMarker));
    a.syms.push_back(std::string(1, kRightMarker));
  } else if (enc == Encoding::egr) {
    a.syms.push_back(kEndSym);
  }
  a.vars.assign(vars.begin(), vars.end());
  std::sort(a.vars.begin(), a.vars.end());
  return a;
}

// Language-level conjunction of validity with a language: every composite
// operation keeps results inside the valid set for their own variables.
Dfa clip_valid(const Dfa& d) { return dfa_minimize(dfa_intersect(d, valid_dfa(d.alpha))); }

// Extend d to the bigger variable set, constraining new node variables to be
// flagged exactly once (set variables stay free).
Dfa align(const Dfa& d, const TokenAlphabet& bigger) {
  if (d.alpha == bigger) return d;
  Dfa e = dfa_extend(d, bigger);
  for (const auto& v : bigger.vars)
    if (is_node_var(v) && d.alpha.var_index(v) < 0)
      e = dfa_minimize(dfa_intersect(e, exactly_one(bigger, v)));
  return e;
}

struct Compiler {
  std::string symbols;
  Encoding enc;

  TokenAlphabet alpha_of(const FormulaPtr& f) const {
    return alpha_for(symbols, enc, free_vars(f));
  }

  Dfa rec(const FormulaPtr& f) const {
    const TokenAlphabet alpha = alpha_of(f);
    switch (f->kind) {
      case Formula::Kind::True:
        return dfa_all(alpha);
      case Formula::Kind::False:
        return dfa_none(alpha);
      case Formula::Kind::Lab:
        return clip_valid(atom_lab(alpha, f->label, f->v1));
      case Formula::Kind::Edge:
        return clip_valid(atom_edge(alpha, f->label, f->v1, f->v2));
      case Formula::Kind::Eq:
        return clip_valid(atom_eq(alpha, f->v1, f->v2));
      case Formula::Kind::In:
        return clip_valid(atom_in(alpha, f->v1, f->v2));
      case Formula::Kind::Path:
        return clip_valid(atom_path(alpha, f->label, f->strict, f->v1, f->v2));
      case Formula::Kind::Not:
        return clip_valid(dfa_complement(align(rec(f->a), alpha)));
      case Formula::Kind::And:
        return dfa_minimize(
            dfa_intersect(align(rec(f->a), alpha), align(rec(f->b), alpha)));
      case Formula::Kind::Or:
        return dfa_minimize(
            dfa_union(align(rec(f->a), alpha), align(rec(f->b), alpha)));
      case Formula::Kind::Imp: {
        Dfa na = clip_valid(dfa_complement(align(rec(f->a), alpha)));
        return dfa_minimize(dfa_union(na, align(rec(f->b), alpha)));
      }
      case Formula::Kind::Exists:
      case Formula::Kind::ExistsSet:
        return project(f);
      case Formula::Kind::Forall:
        // forall v b == not exists v not b
        return clip_valid(
            dfa_complement(align(rec(F::ex(f->v1, F::lnot(f->a))), alpha)));
      case Formula::Kind::ForallSet:
        return clip_valid(
            dfa_complement(align(rec(F::exS(f->v1, F::lnot(f->a))), alpha)));
    }
    throw std::logic_error("unhandled formula kind");
  }

  Dfa project(const FormulaPtr& f) const {
    std::set<std::string> inner_vars = free_vars(f->a);
    inner_vars.insert(f->v1);
    Dfa body = align(rec(f->a), alpha_for(symbols, enc, inner_vars));
    return dfa_minimize(nfa_determinize(nfa_project(body, f->v1)));
  }

  // --- atoms ------------------------------------------------------------

  using P = std::function<bool(int)>;

  Dfa with_one_var(const TokenAlphabet& alpha, const std::string& x,
                   const P& at_x) const {
    int xi = alpha.var_index(x);
    Builder b(alpha, 2);
    auto none = [&](int t) { return !alpha.flag(t, xi); };
    b.route(0, [&](int t) { return alpha.flag(t, xi) && at_x(t); }, 1);
    b.route(0, none, 0);
    b.route(1, none, 1);
    return b.take({1});
  }

  Dfa atom_lab(const TokenAlphabet& alpha, const std::string& sigma,
               const std::string& x) const {
    if (enc == Encoding::egr) {
      // nodes of an edge-labelled graph carry no label
      if (sigma != std::string(1, kUnlabelled)) return dfa_none(alpha);
      return with_one_var(alpha, x, [](int) { return true; });
    }
    int si = alpha.sym_index(sigma);
    if (si < 0) return dfa_none(alpha);
    return with_one_var(alpha, x,
                        [&alpha, si](int t) { return alpha.sym_of(t) == si; });
  }

  Dfa atom_eq(const TokenAlphabet& alpha, const std::string& x,
              const std::string& y) const {
    if (x == y) return valid_dfa(alpha);
    int yi = alpha.var_index(y);
    return with_one_var(alpha, x,
                        [&alpha, yi](int t) { return alpha.flag(t, yi); });
  }

  Dfa atom_in(const TokenAlphabet& alpha, const std::string& x,
              const std::string& X) const {
    int Xi = alpha.var_index(X);
    return with_one_var(alpha, x,
                        [&alpha, Xi](int t) { return alpha.flag(t, Xi); });
  }

  Dfa atom_edge(const TokenAlphabet& alpha, const std::string& gamma,
                const std::string& x, const std::string& y) const {
    int xi = alpha.var_index(x), yi = alpha.var_index(y);
    if (x == y) return dfa_none(alpha);  // chain graphs have no self loops
    P at_x;
    if (enc == Encoding::egr) {
      int gi = alpha.sym_index(gamma);
      if (gi < 0 || gamma == kEndSym) return dfa_none(alpha);
      at_x = [&alpha, gi](int t) { return alpha.sym_of(t) == gi; };
    } else {
      if (gamma != std::string(1, kUnlabelled)) return dfa_none(alpha);
      at_x = [](int) { return true; };
    }
    Builder b(alpha, 3);
    auto fx = [&](int t) { return alpha.flag(t, xi); };
    auto fy = [&](int t) { return alpha.flag(t, yi); };
    b.route(0, [&](int t) { return fx(t) && !fy(t) && at_x(t); }, 1);
    b.route(0, [&](int t) { return !fx(t) && !fy(t); }, 0);
    b.route(1, [&](int t) { return fy(t) && !fx(t); }, 2);
    b.route(2, [&](int t) { return !fx(t) && !fy(t); }, 2);
    return b.take({2});
  }

  Dfa atom_path(const TokenAlphabet& alpha, const std::string& via, bool strict,
                const std::string& x, const std::string& y) const {
    int xi = alpha.var_index(x), yi = alpha.var_index(y);
    if (x == y) return strict ? dfa_none(alpha) : valid_dfa(alpha);
    // which tokens may appear between x and y (the step constraint)
    P step_ok;
    if (via.empty()) {
      step_ok = [](int) { return true; };
    } else if (enc == Encoding::egr) {
      int gi = alpha.sym_index(via);
      if (gi < 0) step_ok = [](int) { return false; };
      else step_ok = [&alpha, gi](int t) { return alpha.sym_of(t) == gi; };
    } else if (via != std::string(1, kUnlabelled)) {
      // node-labelled chains only have '*' edges, so a restricted path can
      // only be the empty one
      if (strict) return dfa_none(alpha);
      return atom_eq(alpha, x, y);
    } else {
      step_ok = [](int) { return true; };
    }
    Builder b(alpha, 4);
    auto fx = [&](int t) { return alpha.flag(t, xi); };
    auto fy = [&](int t) { return alpha.flag(t, yi); };
    // 0: before x; 1: between; 2: after y (accepting)
    b.route(0, [&](int t) { return !fx(t) && !fy(t); }, 0);
    if (!strict) b.route(0, [&](int t) { return fx(t) && fy(t); }, 2);
    if (enc == Encoding::egr) {
      // the token at x carries the edge leaving x, which lies on the path
      b.route(0, [&](int t) { return fx(t) && !fy(t) && step_ok(t); }, 1);
      b.route(1, [&](int t) { return !fx(t) && !fy(t) && step_ok(t); }, 1);
      b.route(1, [&](int t) { return fy(t) && !fx(t); }, 2);
    } else {
      // steps are checked on the tokens strictly between x and y
      b.route(0, [&](int t) { return fx(t) && !fy(t); }, 1);
      b.route(1, [&](int t) { return !fx(t) && !fy(t) && step_ok(t); }, 1);
      b.route(1, [&](int t) { return fy(t) && !fx(t); }, 2);
    }
    b.route(2, [&](int t) { return !fx(t) && !fy(t); }, 2);
    return b.take({2});
  }
};

}  // namespace

TokenAlphabet token_alphabet(const std::string& symbols, Encoding enc,
                             const std::set<std::string>& vars) {
  return alpha_for(symbols, enc, vars);
}

std::vector<int> render_tokens(const Graph& g,
                               const std::map<std::string, std::set<NodeId>>& nu,
                               Encoding enc, const TokenAlphabet& alpha) {
  std::vector<NodeId> chain = chain_nodes(g);
  auto flags_of = [&](NodeId n) {
    uint32_t fl = 0;
    for (size_t i = 0; i < alpha.vars.size(); ++i) {
      auto it = nu.find(alpha.vars[i]);
      if (it != nu.end() && it->second.count(n)) fl |= 1u << i;
    }
    return fl;
  };
  std::vector<int> toks;
  if (enc == Encoding::egr) {
    for (size_t i = 0; i + 1 < chain.size(); ++i) {
      Edge e = *g.edges().begin();
      // locate the unique edge out of chain[i]
      bool found = false;
      for (const auto& ed : g.edges())
        if (ed.src == chain[i]) { e = ed; found = true; break; }
      if (!found) throw DecodeError("broken chain");
      int si = alpha.sym_index(e.label);
      if (si < 0) throw ParseError("edge label outside alphabet: " + e.label);
      toks.push_back(alpha.token(si, flags_of(chain[i])));
    }
    if (chain.empty()) throw DecodeError("edge-labelled rendering needs a node");
    toks.push_back(alpha.token(alpha.sym_index(kEndSym), flags_of(chain.back())));
  } else {
    for (NodeId n : chain) {
      int si = alpha.sym_index(g.label(n));
      if (si < 0) throw ParseError("node label outside alphabet: " + g.label(n));
      toks.push_back(alpha.token(si, flags_of(n)));
    }
  }
  return toks;
}

Dfa encoding_shape_dfa(const TokenAlphabet& alpha, Encoding enc) {
  if (enc == Encoding::ngr) {
    // any word over the plain symbols (markers and end token never appear)
    Builder b(alpha, 1);
    b.route(0, [&](int t) { return !is_marker_sym(alpha.syms[alpha.sym_of(t)]); }, 0);
    return b.take({0});
  }
  if (enc == Encoding::tape) {
    int li = alpha.sym_index(std::string(1, kLeftMarker));
    int ri = alpha.sym_index(std::string(1, kRightMarker));
    Builder b(alpha, 3);
    b.route(0, [&](int t) { return alpha.sym_of(t) == li; }, 1);
    b.route(1, [&](int t) {
      return alpha.sym_of(t) != li && alpha.sym_of(t) != ri; }, 1);
    b.route(1, [&](int t) { return alpha.sym_of(t) == ri; }, 2);
    return b.take({2});
  }
  int ei = alpha.sym_index(kEndSym);
  Builder b(alpha, 2);
  b.route(0, [&](int t) { return alpha.sym_of(t) != ei; }, 0);
  b.route(0, [&](int t) { return alpha.sym_of(t) == ei; }, 1);
  return b.take({1});
}

Dfa compile(const FormulaPtr& f, const std::string& symbols, Encoding enc) {
  Compiler c{symbols, enc};
  Dfa d = c.rec(f);
  d = clip_valid(d);
  return dfa_minimize(dfa_intersect(d, encoding_shape_dfa(d.alpha, enc)));
}

std::optional<std::string> functional_counterexample(const FormulaPtr& f,
                                                     const std::string& xvar,
                                                     const std::string& yvar,
                                                     const std::string& symbols) {
  // Simulating a formula-move machine re-checks functionality of the same
  // shared formula objects on every run; cache per (formula, vars, symbols).
  // Keeping a FormulaPtr in the cache pins the address used in the key.
  using CacheKey = std::tuple<std::uintptr_t, std::string, std::string, std::string>;
  static std::map<CacheKey, std::pair<FormulaPtr, std::optional<std::string>>> cache;
  static std::mutex cache_mu;
  CacheKey key{reinterpret_cast<std::uintptr_t>(f.get()), xvar, yvar, symbols};
  {
    std::scoped_lock lock(cache_mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second.second;
  }
  using namespace F;
  std::string y1 = fresh_var(f, yvar);
  FormulaPtr f1 = rename_free(f, yvar, y1);
  std::string y2 = fresh_var(F::land(f, f1), yvar);
  FormulaPtr f2 = rename_free(f, yvar, y2);
  FormulaPtr bad = ex(xvar, ex(y1, ex(y2, and_all({f1, f2, lnot(eq(y1, y2))}))));
  Dfa d = compile(bad, symbols, Encoding::tape);
  auto w = shortest_accepted(d);
  std::optional<std::string> result;
  if (w) {
    std::string out;
    for (int t : *w) out += d.alpha.syms[d.alpha.sym_of(t)];
    // strip the end markers
    result = out.substr(1, out.size() - 2);
  }
  {
    std::scoped_lock lock(cache_mu);
    cache.emplace(key, std::pair{f, result});
  }
  return result;
}

bool check_functional(const FormulaPtr& f, const std::string& xvar,
                      const std::string& yvar, const std::string& symbols) {
  return !functional_counterexample(f, xvar, yvar, symbols).has_value();
}

std::vector<TokenSplitPiece> split_single_token(
    const Dfa& d, const std::function<bool(int)>& is_delta) {
  // precondition: every accepted word has exactly one marked token
  {
    Builder b(d.alpha, 2);
    b.route(0, [&](int t) { return !is_delta(t); }, 0);
    b.route(0, [&](int t) { return is_delta(t); }, 1);
    b.route(1, [&](int t) { return !is_delta(t); }, 1);
    Dfa one = b.take({1});
    if (shortest_accepted(dfa_intersect(d, dfa_complement(one))))
      throw std::invalid_argument(
          "language has words without exactly one marked symbol");
  }
  Dfa m = dfa_minimize(d);
  // restrict a copy of m to unmarked tokens, rerouting marked ones to a dead
  // state, with the given initial/accepting roles
  auto side = [&](int initial, const std::set<int>& accepting) {
    Dfa s;
    s.alpha = m.alpha;
    s.initial = initial;
    int dead = m.states();
    s.accepting.assign(m.states() + 1, 0);
    for (int q : accepting) s.accepting[q] = 1;
    s.next.assign(m.states() + 1, std::vector<int>(m.alpha.size(), dead));
    for (int q = 0; q < m.states(); ++q)
      for (int t = 0; t < m.alpha.size(); ++t)
        if (!is_delta(t)) s.next[q][t] = m.next[q][t];
    return dfa_minimize(s);
  };
  std::set<int> acc;
  for (int q = 0; q < m.states(); ++q)
    if (m.accepting[q]) acc.insert(q);
  std::vector<TokenSplitPiece> out;
  for (int p = 0; p < m.states(); ++p)
    for (int t = 0; t < m.alpha.size(); ++t) {
      if (!is_delta(t)) continue;
      int q = m.next[p][t];
      Dfa left = side(m.initial, {p});
      Dfa right = side(q, acc);
      if (!shortest_accepted(left) || !shortest_accepted(right)) continue;
      out.push_back({left, t, right});
    }
  return out;
}

std::vector<SplitPiece> split_single_occurrence(const Dfa& d,
                                                const std::string& delta_syms) {
  if (!d.alpha.vars.empty())
    throw std::invalid_argument("split needs a variable-free automaton");
  std::set<int> delta;
  for (char c : delta_syms) {
    int i = d.alpha.sym_index(std::string(1, c));
    if (i >= 0) delta.insert(i);
  }
  auto pieces = split_single_token(
      d, [&](int t) { return delta.count(d.alpha.sym_of(t)) != 0; });
  std::vector<SplitPiece> out;
  for (auto& p : pieces)
    out.push_back({p.left, d.alpha.syms[d.alpha.sym_of(p.delta_token)], p.right});
  return out;
}

Dfa dfa_join(const Dfa& left, const std::string& delta, const Dfa& right) {
  if (!(left.alpha == right.alpha))
    throw std::invalid_argument("dfa_join alphabet mismatch");
  int di = left.alpha.sym_index(delta);
  if (di < 0) throw std::invalid_argument("join symbol outside alphabet");
  Nfa n;
  n.alpha = left.alpha;
  int off = left.states();
  for (int i = 0; i < left.states() + right.states(); ++i) n.add_state();
  n.initial = {left.initial};
  for (int s = 0; s < left.states(); ++s)
    for (int t = 0; t < left.alpha.size(); ++t)
      n.add_edge(s, t, left.next[s][t]);
  int dtok = left.alpha.token(di, 0);
  for (int s = 0; s < left.states(); ++s)
    if (left.accepting[s]) n.add_edge(s, dtok, off + right.initial);
  for (int s = 0; s < right.states(); ++s)
    for (int t = 0; t < right.alpha.size(); ++t)
      n.add_edge(off + s, t, off + right.next[s][t]);
  for (int s = 0; s < right.states(); ++s)
    if (right.accepting[s]) n.accepting.insert(off + s);
  return dfa_minimize(nfa_determinize(n));
}

FormulaPtr chain_language_formula(const Dfa& d0, const std::string& var,
                                  Side side) {
  using namespace F;
  if (!d0.alpha.vars.empty())
    throw std::invalid_argument("chain_language_formula needs a variable-free automaton");
  // mirror once so both sides read outward-in with the same clause shapes
  Dfa d = dfa_minimize(side == Side::left ? d0 : dfa_reverse(d0));
  bool eps_in = d.accepting[d.initial] != 0;

  // one set variable per state; bound names derived from var to dodge clashes
  std::vector<std::string> sets;
  for (int q = 0; q < d.states(); ++q)
    sets.push_back("Q" + var + std::to_string(q));
  const std::string p = var + "p", r = var + "r", t = var + "t";

  // orient: for Side::left, the "outer" end is the chain source and we scan
  // rightwards towards var; for Side::right we scan leftwards from the sink.
  auto step_edge = [&](const std::string& a, const std::string& b) {
    // a is one step further out than b
    return side == Side::left ? edge(std::string(1, kUnlabelled), a, b)
                              : edge(std::string(1, kUnlabelled), b, a);
  };
  auto in_region = [&](const std::string& u) {
    return side == Side::left ? path_strict(u, var) : path_strict(var, u);
  };
  auto is_outermost = [&](const std::string& u) {
    return lnot(ex(t, step_edge(t, u)));
  };

  std::vector<FormulaPtr> clauses;
  // region nodes carry exactly one state, others none
  {
    std::vector<FormulaPtr> any, excl, none;
    for (int q = 0; q < d.states(); ++q) any.push_back(in(p, sets[q]));
    for (int q = 0; q < d.states(); ++q)
      for (int q2 = q + 1; q2 < d.states(); ++q2)
        excl.push_back(lnot(land(in(p, sets[q]), in(p, sets[q2]))));
    for (int q = 0; q < d.states(); ++q) none.push_back(lnot(in(p, sets[q])));
    clauses.push_back(
        all(p, imp(in_region(p), land(or_all(any), and_all(excl)))));
    clauses.push_back(all(p, imp(lnot(in_region(p)), and_all(none))));
  }
  // outermost region node: its state is delta(initial, its label)
  {
    std::vector<FormulaPtr> cs;
    for (int tok = 0; tok < d.alpha.size(); ++tok)
      cs.push_back(imp(lab(d.alpha.syms[tok], p),
                       in(p, sets[d.next[d.initial][tok]])));
    clauses.push_back(
        all(p, imp(land(in_region(p), is_outermost(p)), and_all(cs))));
  }
  // inner steps: state(r) = delta(state(p), label(r))
  {
    std::vector<FormulaPtr> cs;
    for (int q = 0; q < d.states(); ++q)
      for (int tok = 0; tok < d.alpha.size(); ++tok)
        cs.push_back(imp(land(in(p, sets[q]), lab(d.alpha.syms[tok], r)),
                         in(r, sets[d.next[q][tok]])));
    clauses.push_back(all(
        p, all(r, imp(and_all({in_region(p), in_region(r), step_edge(p, r)}),
                      and_all(cs)))));
  }
  // acceptance at the region node adjacent to var; empty region reads epsilon
  {
    std::vector<FormulaPtr> fin_any;
    for (int q = 0; q < d.states(); ++q)
      if (d.accepting[q]) fin_any.push_back(in(p, sets[q]));
    clauses.push_back(all(p, imp(step_edge(p, var), or_all(fin_any))));
    FormulaPtr no_neighbour = lnot(ex(p, step_edge(p, var)));
    clauses.push_back(imp(no_neighbour, eps_in ? tru() : fls()));
  }

  FormulaPtr body = and_all(clauses);
  for (int q = d.states() - 1; q >= 0; --q) body = exS(sets[q], body);
  return body;
}

}  // namespace twt
