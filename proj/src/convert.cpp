#include "twt/convert.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "twt/compile.hpp"

namespace twt {

namespace {

Move stay() { return Move{true, 0, nullptr}; }
Move step_move(int eps) { return Move{true, eps, nullptr}; }
Move formula_move(FormulaPtr f) { return Move{false, 0, std::move(f)}; }

Test sym_test(const std::string& s) {
  Test t;
  t.type = Test::Type::sym;
  t.sym = s;
  return t;
}

Test mso_test(FormulaPtr f) {
  Test t;
  t.type = Test::Type::mso;
  t.formula = std::move(f);
  return t;
}

Test rla_test(Dfa left, const std::string& sym, Dfa right,
              const Alphabet& input) {
  Test t;
  t.type = Test::Type::rla;
  t.sym = sym;
  t.left = std::move(left);
  t.right = std::move(right);
  return normalize_rla_test(t, input);
}

// (a|b|...)* over the plain input symbols; the empty word for no symbols.
std::string alternation_star(const std::string& syms) {
  if (syms.empty()) return "%";
  std::string r = "(";
  for (size_t i = 0; i < syms.size(); ++i) {
    if (i) r += "|";
    r += syms[i];
  }
  return r + ")*";
}

std::string fresh_name(std::set<std::string>& used, std::string base) {
  while (used.count(base)) base += "'";
  used.insert(base);
  return base;
}

// Forgets the variable flags of an automaton whose language only uses
// unflagged tokens, producing an automaton over the plain character alphabet.
Dfa strip_flags(const Dfa& d, const TokenAlphabet& chars) {
  Dfa r;
  r.alpha = chars;
  r.initial = d.initial;
  r.accepting = d.accepting;
  r.next.assign(d.states(), std::vector<int>(chars.size(), 0));
  for (int s = 0; s < d.states(); ++s)
    for (int c = 0; c < (int)chars.syms.size(); ++c) {
      int sym = d.alpha.sym_index(chars.syms[c]);
      r.next[s][c] = d.next[s][d.alpha.token(sym, 0)];
    }
  return dfa_minimize(r);
}

// Decomposition of a one-free-variable formula into look-around pieces:
// (prefix language, symbol at the position, suffix language), a disjoint
// union covering exactly the satisfying (tape, position) pairs.
struct UPiece {
  Dfa left;
  std::string sym;
  Dfa right;
};

std::vector<UPiece> unary_pieces(FormulaPtr f, const std::string& syms,
                                 const TokenAlphabet& chars) {
  if (!free_vars(f).count("x")) f = F::land(std::move(f), F::eq("x", "x"));
  Dfa d = compile(f, syms, Encoding::tape);
  std::vector<UPiece> out;
  for (const auto& p : split_single_token(
           d, [&](int t) { return d.alpha.flags_of(t) != 0; }))
    out.push_back({strip_flags(p.left, chars),
                   d.alpha.syms[d.alpha.sym_of(p.delta_token)],
                   strip_flags(p.right, chars)});
  return out;
}

// One decomposition piece of a directed jump formula: the pre test confirms
// at the source position that a matching target exists in the walking
// direction; the walk then tracks the in-between language (in walking order)
// with `seg` and recognizes the target with the found test.
struct JumpPiece {
  Dfa pre_left, pre_right;
  std::string pre_sym;
  Dfa seg;
  Dfa found_left, found_right;
  std::string found_sym;
};

std::vector<JumpPiece> jump_pieces(const FormulaPtr& psi, int dir,
                                   const std::string& syms,
                                   const TokenAlphabet& chars) {
  FormulaPtr g = dir < 0 ? F::land(F::path_strict("y", "x"), psi)
                         : F::land(F::path_strict("x", "y"), psi);
  Dfa d = compile(g, syms, Encoding::tape);
  uint32_t mx = 1u << d.alpha.var_index("x");
  uint32_t my = 1u << d.alpha.var_index("y");
  uint32_t first = dir < 0 ? my : mx;  // flag met first, left to right
  uint32_t second = (mx | my) & ~first;
  std::vector<JumpPiece> out;
  for (const auto& p1 : split_single_token(
           d, [&](int t) { return d.alpha.flags_of(t) == first; })) {
    std::string s1 = d.alpha.syms[d.alpha.sym_of(p1.delta_token)];
    Dfa a = strip_flags(p1.left, chars);
    for (const auto& p2 : split_single_token(
             p1.right, [&](int t) { return d.alpha.flags_of(t) == second; })) {
      std::string s2 = d.alpha.syms[d.alpha.sym_of(p2.delta_token)];
      Dfa mid = strip_flags(p2.left, chars);
      Dfa c = strip_flags(p2.right, chars);
      JumpPiece jp;
      if (dir < 0) {
        // Reading order around y < x: a . s1@y . mid . s2@x . c
        jp.pre_left = dfa_join(a, s1, mid);
        jp.pre_sym = s2;
        jp.pre_right = c;
        jp.seg = dfa_minimize(dfa_reverse(mid));  // walked right-to-left
        jp.found_left = a;
        jp.found_sym = s1;
        jp.found_right = dfa_all(chars);
      } else {
        // Reading order around x < y: a . s1@x . mid . s2@y . c
        jp.pre_left = a;
        jp.pre_sym = s1;
        jp.pre_right = dfa_join(mid, s2, c);
        jp.seg = dfa_minimize(mid);
        jp.found_left = dfa_all(chars);
        jp.found_sym = s2;
        jp.found_right = c;
      }
      out.push_back(std::move(jp));
    }
  }
  return out;
}

}  // namespace

Machine gsm_to_rla(const Machine& m) {
  if (m.kind != MachineKind::gsm)
    throw std::invalid_argument(
        m.name + ": look-around upgrade starts from a symbol-test machine");
  Machine r = m;
  r.kind = MachineKind::rla;
  TokenAlphabet chars = TokenAlphabet::chars(m.input.with_markers());
  std::string star = alternation_star(m.input.symbols());
  Dfa univ = dfa_all(chars);
  for (auto& inst : r.instructions) {
    Test t;
    t.type = Test::Type::rla;
    t.sym = inst.test.sym;
    t.left = univ;
    t.right = univ;
    t = normalize_rla_test(t, m.input);
    t.left_re = t.sym == std::string(1, kLeftMarker) ? "%" : "L" + star;
    t.right_re = t.sym == std::string(1, kRightMarker) ? "%" : star + "R";
    inst.test = t;
  }
  r.check();
  return r;
}

Machine rla_to_mso(const Machine& m) {
  if (m.kind != MachineKind::rla)
    throw std::invalid_argument(
        m.name + ": formula upgrade starts from a look-around machine");
  Machine r = m;
  r.kind = MachineKind::mso;
  TokenAlphabet chars = TokenAlphabet::chars(m.input.with_markers());
  std::string star = alternation_star(m.input.symbols());
  Dfa none = dfa_none(chars);
  auto clip = [&](const std::string& sym, Side side) {
    std::string re =
        side == Side::left
            ? (sym == std::string(1, kLeftMarker) ? "%" : "L" + star)
            : (sym == std::string(1, kRightMarker) ? "%" : star + "R");
    return dfa_minimize(regex_to_dfa(re, chars));
  };
  auto side_formula = [&](const Dfa& d, const std::string& sym,
                          Side side) -> FormulaPtr {
    if (dfa_equal(d, clip(sym, side))) return F::tru();
    if (dfa_equal(d, none)) return F::fls();
    return chain_language_formula(d, "x", side);
  };
  for (auto& inst : r.instructions) {
    FormulaPtr tf;
    if (inst.test.type == Test::Type::sym) {
      tf = F::lab(inst.test.sym, "x");
    } else {
      tf = F::land(
          F::land(side_formula(inst.test.left, inst.test.sym, Side::left),
                  F::lab(inst.test.sym, "x")),
          side_formula(inst.test.right, inst.test.sym, Side::right));
    }
    inst.test = mso_test(tf);
    for (Branch* b : {&inst.then_b, &inst.else_b}) {
      FormulaPtr mf = b->move.step == 1    ? F::edge("*", "x", "y")
                      : b->move.step == -1 ? F::edge("*", "y", "x")
                                           : F::eq("x", "y");
      b->move = formula_move(mf);
    }
  }
  r.check();
  return r;
}

Machine mso_to_rla(const Machine& m) {
  if (m.kind != MachineKind::mso)
    throw std::invalid_argument(
        m.name + ": look-around downgrade starts from a formula machine");
  const std::string syms = m.input.symbols();
  for (const auto& inst : m.instructions)
    for (const Branch* b : {&inst.then_b, &inst.else_b})
      if (!b->move.is_step)
        if (auto cex =
                functional_counterexample(b->move.formula, "x", "y", syms))
          throw std::invalid_argument(
              m.name + ": move formula " + to_text(b->move.formula) +
              " picks several targets on the tape of \"" + *cex + "\"");

  TokenAlphabet chars = TokenAlphabet::chars(m.input.with_markers());
  Machine r;
  r.name = m.name;
  r.kind = MachineKind::rla;
  r.input = m.input;
  r.output = m.output;
  r.states = m.states;
  r.initial = m.initial;
  r.final_state = m.final_state;

  std::set<std::string> used(m.states.begin(), m.states.end());
  auto add_state = [&](const std::string& base) {
    std::string s = fresh_name(used, base);
    r.states.push_back(s);
    return s;
  };
  std::string dead_state;
  auto dead_branch = [&]() {
    if (dead_state.empty()) dead_state = add_state("stuck");
    return Branch{dead_state, "", stay(), ""};
  };
  Dfa none = dfa_none(chars);
  auto probe = [&](const UPiece& pc) {
    return rla_test(pc.left, pc.sym, pc.right, m.input);
  };

  // Offer the alternatives consecutively: the first test sits on `entry`,
  // a miss falls through to the next alternative in a fresh stay-put state,
  // the last miss takes `last_else`.
  auto chain = [&](const std::string& entry,
                   const std::vector<std::pair<Test, Branch>>& alts,
                   const Branch& last_else) {
    if (alts.empty()) {
      r.instructions.push_back(
          {entry, rla_test(none, std::string(1, kLeftMarker), none, m.input),
           last_else, last_else});
      return;
    }
    std::string cur = entry;
    for (size_t i = 0; i < alts.size(); ++i) {
      Branch miss = last_else;
      if (i + 1 < alts.size())
        miss = Branch{add_state(entry + ".n" + std::to_string(i + 1)), "",
                      stay(), ""};
      r.instructions.push_back({cur, alts[i].first, alts[i].second, miss});
      cur = miss.q;
    }
  };

  // Walking search for the target of a jump piece: step through the tape in
  // direction `dir`, tracking the in-between language with the segment
  // automaton in the control; whenever the segment read so far is complete,
  // probe the found test before walking on. Returns the entry state, which
  // expects to already stand on the first candidate.
  auto walk_chain = [&](const JumpPiece& jp, int dir, const std::string& tag,
                        const Branch& arrive) {
    auto tok = [&](char c) {
      return jp.seg.alpha.token(jp.seg.alpha.sym_index(std::string(1, c)), 0);
    };
    std::map<int, std::string> name;
    std::vector<int> order;
    auto visit = [&](int s) {
      if (!name.count(s)) {
        name[s] = add_state(tag + ".w" + std::to_string(s));
        order.push_back(s);
      }
    };
    visit(jp.seg.initial);
    for (size_t i = 0; i < order.size(); ++i)
      for (char c : syms) visit(jp.seg.next[order[i]][tok(c)]);
    for (size_t i = 0; i < order.size(); ++i) {
      int s = order[i];
      std::string hold = name[s];
      if (jp.seg.accepting[s]) {
        std::string nxt = add_state(hold + ".m");
        r.instructions.push_back(
            {hold,
             rla_test(jp.found_left, jp.found_sym, jp.found_right, m.input),
             arrive, Branch{nxt, "", stay(), ""}});
        hold = nxt;
      }
      for (size_t k = 0; k < syms.size(); ++k) {
        std::string cs(1, syms[k]);
        Branch go{name[jp.seg.next[s][tok(syms[k])]], "", step_move(dir), ""};
        if (k + 1 < syms.size()) {
          std::string nxt = add_state(hold + ".m");
          r.instructions.push_back(
              {hold, sym_test(cs), go, Branch{nxt, "", stay(), ""}});
          hold = nxt;
        } else {
          r.instructions.push_back({hold, sym_test(cs), go, dead_branch()});
        }
      }
    }
    return name.at(jp.seg.initial);
  };

  int counter = 0;
  auto expand = [&](const Branch& b) {
    if (b.move.is_step) return Branch{b.q, b.out, b.move, ""};
    std::string tag = "go" + std::to_string(++counter);
    std::string entry = add_state(tag);
    std::vector<std::pair<Test, Branch>> alts;
    Branch arrive{b.q, "", stay(), ""};
    for (const auto& pc :
         unary_pieces(rename_free(b.move.formula, "y", "x"), syms, chars))
      alts.push_back({probe(pc), arrive});
    for (int dir : {-1, +1}) {
      auto pieces = jump_pieces(b.move.formula, dir, syms, chars);
      for (size_t i = 0; i < pieces.size(); ++i) {
        const JumpPiece& jp = pieces[i];
        std::string wtag =
            tag + (dir < 0 ? ".l" : ".r") + std::to_string(i);
        std::string wentry = walk_chain(jp, dir, wtag, arrive);
        alts.push_back(
            {rla_test(jp.pre_left, jp.pre_sym, jp.pre_right, m.input),
             Branch{wentry, "", step_move(dir), ""}});
      }
    }
    chain(entry, alts, dead_branch());
    return Branch{entry, b.out, stay(), ""};
  };

  for (const auto& inst : m.instructions) {
    Branch then_b = expand(inst.then_b);
    Branch else_b = expand(inst.else_b);
    if (inst.test.type == Test::Type::sym) {
      r.instructions.push_back({inst.p, inst.test, then_b, else_b});
    } else {
      std::vector<std::pair<Test, Branch>> alts;
      for (const auto& pc : unary_pieces(inst.test.formula, syms, chars))
        alts.push_back({probe(pc), then_b});
      chain(inst.p, alts, else_b);
    }
  }
  r.check();
  return r;
}

MsoTransduction computation_space_stage(const Machine& m) {
  if (m.kind != MachineKind::gsm)
    throw std::invalid_argument(
        m.name + ": computation spaces start from a symbol-test machine");
  ValidationReport rep = validate(m);
  if (!rep.deterministic)
    throw std::invalid_argument(m.name +
                                ": computation spaces need determinism");
  if (!rep.short_outputs)
    throw std::invalid_argument(
        m.name + ": outputs longer than one symbol; normalize first");
  if (m.initial == m.final_state)
    throw std::invalid_argument(
        m.name + ": initial state equals final state; separate them first");

  const std::string tape_syms = m.input.with_markers();
  MsoTransduction t;
  t.name = m.name + ".space";
  t.copies = m.states;
  for (char c : tape_syms) t.in_node_labels.push_back(std::string(1, c));
  t.in_edge_labels = {"*"};
  t.out_node_labels = {"*", "init", "fin"};
  for (char c : m.output.symbols()) t.out_edge_labels.push_back(std::string(1, c));
  t.out_edge_labels.push_back(kSilentEdge);
  t.domain = tape_shape();
  for (const auto& q : m.states) {
    FormulaPtr init_f = q == m.initial ? F::lab("L", "x") : F::fls();
    FormulaPtr fin_f = q == m.final_state ? F::tru() : F::fls();
    t.node_formulas[{q, "init"}] = init_f;
    t.node_formulas[{q, "fin"}] = fin_f;
    t.node_formulas[{q, "*"}] = F::land(F::lnot(init_f), F::lnot(fin_f));
  }
  // Group the branches: which symbols under the cursor make the step
  // (source, target, written, direction) happen?
  std::map<std::tuple<std::string, std::string, std::string, int>,
           std::vector<FormulaPtr>>
      steps;
  for (const auto& inst : m.instructions) {
    auto lbl = [](const std::string& out) {
      return out.empty() ? kSilentEdge : out;
    };
    steps[{inst.p, inst.then_b.q, lbl(inst.then_b.out), inst.then_b.move.step}]
        .push_back(F::lab(inst.test.sym, "x"));
    for (char c : tape_syms)
      if (std::string(1, c) != inst.test.sym)
        steps[{inst.p, inst.else_b.q, lbl(inst.else_b.out),
               inst.else_b.move.step}]
            .push_back(F::lab(std::string(1, c), "x"));
  }
  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<FormulaPtr>>
      grouped;
  for (const auto& [key, labs] : steps) {
    const auto& [p, q, written, eps] = key;
    FormulaPtr geom = eps == 1    ? F::edge("*", "x", "y")
                      : eps == -1 ? F::edge("*", "y", "x")
                                  : F::eq("x", "y");
    grouped[{p, q, written}].push_back(F::land(geom, F::or_all(labs)));
  }
  for (const auto& [key, parts] : grouped)
    t.edge_formulas[key] = F::or_all(parts);
  t.validate();
  return t;
}

const MsoTransduction& path_selection_stage(const std::string& out_syms) {
  static std::mutex mu;
  static std::map<std::string, MsoTransduction> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(out_syms);
  if (it != cache.end()) return it->second;
  MsoTransduction t;
  t.name = out_syms.empty() ? "walkselect" : "walkselect." + out_syms;
  t.copies = {"1"};
  t.in_node_labels = {"*", "init", "fin"};
  for (char c : out_syms) t.in_edge_labels.push_back(std::string(1, c));
  t.in_edge_labels.push_back(kSilentEdge);
  t.out_node_labels = {"*"};
  t.out_edge_labels = t.in_edge_labels;
  t.domain = F::ex(
      "x", F::ex("y", F::and_all({F::lab("init", "x"), F::lab("fin", "y"),
                                  F::path("x", "y")})));
  t.node_formulas[{"1", "*"}] = F::ex(
      "y", F::ex("z", F::and_all({F::lab("init", "y"), F::path("y", "x"),
                                  F::lab("fin", "z"), F::path("x", "z")})));
  for (const auto& a : t.in_edge_labels)
    t.edge_formulas[{"1", "1", a}] = F::edge(a, "x", "y");
  t.validate();
  return cache.emplace(out_syms, std::move(t)).first->second;
}

const MsoTransduction& silent_contraction_stage(const std::string& out_syms) {
  static std::mutex mu;
  static std::map<std::string, MsoTransduction> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(out_syms);
  if (it != cache.end()) return it->second;
  MsoTransduction t;
  t.name = out_syms.empty() ? "desilence" : "desilence." + out_syms;
  t.copies = {"1"};
  t.in_node_labels = {"*"};
  for (char c : out_syms) {
    t.in_edge_labels.push_back(std::string(1, c));
    t.out_edge_labels.push_back(std::string(1, c));
  }
  t.in_edge_labels.push_back(kSilentEdge);
  t.out_node_labels = {"*"};
  t.domain = F::tru();
  t.node_formulas[{"1", "*"}] =
      F::lnot(F::ex("y", F::edge(kSilentEdge, "x", "y")));
  for (char c : out_syms) {
    std::string s(1, c);
    t.edge_formulas[{"1", "1", s}] = F::ex(
        "z", F::land(F::edge(s, "x", "z"), F::path_via(kSilentEdge, "z", "y")));
  }
  t.validate();
  return cache.emplace(out_syms, std::move(t)).first->second;
}

Pipeline dgsm_to_mso_pipeline(const Machine& m) {
  Pipeline p;
  p.name = m.name + ".pipeline";
  p.in_enc = Encoding::tape;
  p.out_enc = Encoding::egr;
  p.stages.push_back(computation_space_stage(m));
  p.stages.push_back(path_selection_stage(m.output.symbols()));
  p.stages.push_back(silent_contraction_stage(m.output.symbols()));
  return p;
}

Machine mso_to_dgsm_mso(const MsoTransduction& t) {
  t.validate();
  if (!t.params.empty())
    throw std::invalid_argument(t.name +
                                ": edge following needs a parameterless "
                                "transduction");
  std::string in_syms, out_syms;
  bool saw_l = false, saw_r = false;
  for (const auto& l : t.in_node_labels) {
    if (l.size() != 1)
      throw std::invalid_argument(t.name + ": input node label '" + l +
                                  "' is not a tape symbol");
    if (l[0] == kLeftMarker)
      saw_l = true;
    else if (l[0] == kRightMarker)
      saw_r = true;
    else
      in_syms += l[0];
  }
  if (!saw_l || !saw_r)
    throw std::invalid_argument(t.name +
                                ": input signature lacks the tape markers");
  for (const auto& l : t.in_edge_labels)
    if (l != "*")
      throw std::invalid_argument(t.name + ": input edges must be unlabelled");
  for (const auto& l : t.out_node_labels)
    if (l != "*")
      throw std::invalid_argument(t.name +
                                  ": output nodes must be unlabelled");
  for (const auto& l : t.out_edge_labels) {
    if (l.size() != 1 || l == "*")
      throw std::invalid_argument(t.name + ": output edge label '" + l +
                                  "' is not a plain symbol");
    out_syms += l[0];
  }

  Machine r;
  r.name = t.name;
  r.kind = MachineKind::mso;
  r.input = Alphabet(in_syms);
  r.output = Alphabet(out_syms);
  std::set<std::string> used(t.copies.begin(), t.copies.end());
  r.states = t.copies;
  auto add_state = [&](const std::string& base) {
    std::string s = fresh_name(used, base);
    r.states.push_back(s);
    return s;
  };
  const std::string q_in = add_state("in");
  const std::string q_fin = add_state("fin");
  const std::string q_dead = add_state("none");
  r.initial = q_in;
  r.final_state = q_fin;

  FormulaPtr dom = t.domain;
  std::map<std::string, FormulaPtr> keep;
  for (const auto& c : t.copies) {
    auto it = t.node_formulas.find({c, "*"});
    keep[c] = it != t.node_formulas.end() ? it->second : F::fls();
  }
  struct Alt {
    std::string c2, sym;
    FormulaPtr psi;
  };
  std::map<std::string, std::vector<Alt>> alts;
  std::map<std::string, std::vector<FormulaPtr>> incoming;
  for (const auto& c1 : t.copies)
    for (const auto& c2 : t.copies)
      for (const auto& sym : t.out_edge_labels) {
        auto it = t.edge_formulas.find({c1, c2, sym});
        if (it == t.edge_formulas.end()) continue;
        FormulaPtr psi = F::and_all(
            {it->second, keep[c1], rename_free(keep[c2], "x", "y"), dom});
        alts[c1].push_back({c2, sym, psi});
        incoming[c2].push_back(rename_free(psi, "x", "z"));
      }
  // From each copy state, probe the outgoing edge alternatives in turn; if
  // none fires the walk is over and the machine accepts.
  for (const auto& c1 : t.copies) {
    const auto& v = alts[c1];
    Branch done{q_fin, "", stay(), ""};
    if (v.empty()) {
      r.instructions.push_back({c1, mso_test(F::tru()), done, done});
      continue;
    }
    std::string cur = c1;
    for (size_t i = 0; i < v.size(); ++i) {
      Branch then_b{v[i].c2, v[i].sym, formula_move(v[i].psi), ""};
      Branch miss = done;
      if (i + 1 < v.size())
        miss = Branch{add_state(c1 + ".n" + std::to_string(i + 1)), "", stay(),
                      ""};
      r.instructions.push_back(
          {cur, mso_test(F::ex("y", v[i].psi)), then_b, miss});
      cur = miss.q;
    }
  }
  // The initial search: land on the kept node of some copy that no edge
  // enters; misses fall through to a stuck state, so tapes outside the
  // domain reject.
  {
    std::string cur = q_in;
    for (size_t i = 0; i < t.copies.size(); ++i) {
      const std::string& c2 = t.copies[i];
      FormulaPtr inco = incoming[c2].empty()
                            ? F::fls()
                            : F::ex("z", F::or_all(incoming[c2]));
      FormulaPtr chi = F::and_all(
          {dom, rename_free(keep[c2], "x", "y"), F::lnot(inco)});
      Branch then_b{c2, "", formula_move(chi), ""};
      Branch miss{q_dead, "", stay(), ""};
      if (i + 1 < t.copies.size())
        miss = Branch{add_state("in.n" + std::to_string(i + 1)), "", stay(),
                      ""};
      r.instructions.push_back({cur, mso_test(F::ex("y", chi)), then_b, miss});
      cur = miss.q;
    }
  }
  r.check();
  return r;
}

MsoTransduction egr_input_to_tape_input(const MsoTransduction& t) {
  for (const auto& l : t.in_node_labels)
    if (l != "*")
      throw std::invalid_argument(t.name +
                                  ": edge-labelled input carries node label '" +
                                  l + "'");
  std::set<std::string> esyms;
  for (const auto& l : t.in_edge_labels) {
    if (l.size() != 1 || l == "*" || l[0] == kLeftMarker ||
        l[0] == kRightMarker)
      throw std::invalid_argument(t.name + ": input edge label '" + l +
                                  "' is not a plain symbol");
    esyms.insert(l);
  }
  const std::string rlab(1, kRightMarker);
  auto not_r = [&](const std::string& v) { return F::lnot(F::lab(rlab, v)); };
  auto set_guard = [&](const std::string& v) {
    return F::all("u", F::imp(F::in("u", v), F::lnot(F::lab(rlab, "u"))));
  };
  auto fresh_not = [](std::string base, const std::set<std::string>& avoid) {
    while (avoid.count(base)) base += "0";
    return base;
  };
  // sigma-step from u to v on the tape: successor whose label is sigma.
  auto step = [&](const std::string& lbl, const std::string& u,
                  const std::string& v) {
    return F::land(F::edge("*", u, v), F::lab(lbl, v));
  };
  // Reflexive closure of the sigma-step, as set containment.
  auto closure = [&](const std::string& lbl, const std::string& from,
                     const std::string& to) {
    std::string u = fresh_not("u", {from, to});
    std::string v = fresh_not("v", {from, to, u});
    FormulaPtr closed = F::all(
        u, F::all(v, F::imp(F::land(F::in(u, "X"), step(lbl, u, v)),
                            F::in(v, "X"))));
    return F::allS(
        "X", F::imp(F::land(F::in(from, "X"), closed), F::in(to, "X")));
  };

  std::function<FormulaPtr(const FormulaPtr&)> rw =
      [&](const FormulaPtr& f) -> FormulaPtr {
    using K = Formula::Kind;
    switch (f->kind) {
      case K::True:
      case K::False:
      case K::Eq:
      case K::In:
        return f;
      case K::Lab:
        return f->label == "*" ? F::tru() : F::fls();
      case K::Edge:
        if (esyms.count(f->label))
          return F::land(F::edge("*", f->v1, f->v2), F::lab(f->label, f->v2));
        return F::fls();
      case K::Not:
        return F::lnot(rw(f->a));
      case K::And:
        return F::land(rw(f->a), rw(f->b));
      case K::Or:
        return F::lor(rw(f->a), rw(f->b));
      case K::Imp:
        return F::imp(rw(f->a), rw(f->b));
      case K::Exists:
        return F::ex(f->v1, F::land(not_r(f->v1), rw(f->a)));
      case K::Forall:
        return F::all(f->v1, F::imp(not_r(f->v1), rw(f->a)));
      case K::ExistsSet:
        return F::exS(f->v1, F::land(set_guard(f->v1), rw(f->a)));
      case K::ForallSet:
        return F::allS(f->v1, F::imp(set_guard(f->v1), rw(f->a)));
      case K::Path: {
        if (f->label.empty()) return f;
        if (!esyms.count(f->label))
          return f->strict ? F::fls() : F::eq(f->v1, f->v2);
        if (!f->strict) return closure(f->label, f->v1, f->v2);
        std::string z = fresh_not("z", {f->v1, f->v2});
        return F::ex(z, F::land(step(f->label, f->v1, z),
                                closure(f->label, z, f->v2)));
      }
    }
    throw std::logic_error("unhandled formula kind");
  };

  MsoTransduction r = t;
  r.name = t.name + ".tape";
  r.in_node_labels = t.in_edge_labels;
  r.in_node_labels.push_back(std::string(1, kLeftMarker));
  r.in_node_labels.push_back(rlab);
  r.in_edge_labels = {"*"};
  std::vector<FormulaPtr> dom_parts{tape_shape()};
  for (const auto& p : t.params) dom_parts.push_back(set_guard(p));
  dom_parts.push_back(rw(t.domain));
  r.domain = F::and_all(dom_parts);
  for (auto& [key, f] : r.node_formulas) f = F::land(not_r("x"), rw(f));
  for (auto& [key, f] : r.edge_formulas)
    f = F::and_all({not_r("x"), not_r("y"), rw(f)});
  r.validate();
  return r;
}

Pipeline dgsm_to_msoe(const Machine& m) {
  Machine n = separate_final_state(normalize_short_output(m));
  Pipeline p;
  p.name = m.name + ".sandwich";
  p.in_enc = Encoding::egr;
  p.out_enc = Encoding::egr;
  p.stages.push_back(t_mark_ends(m.input.symbols()));
  p.stages.push_back(t_edges_to_nodes(m.input.with_markers()));
  for (auto& s : dgsm_to_mso_pipeline(n).stages)
    p.stages.push_back(std::move(s));
  return p;
}

Machine msoe_to_dgsm(const MsoTransduction& t) {
  return mso_to_dgsm_mso(egr_input_to_tape_input(t));
}

}  // namespace twt
