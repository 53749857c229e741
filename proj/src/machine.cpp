#include "twt/machine.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "twt/compile.hpp"

namespace twt {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

std::string join(const std::vector<std::string>& ts, size_t from = 0) {
  std::string out;
  for (size_t i = from; i < ts.size(); ++i) {
    if (i > from) out += ' ';
    out += ts[i];
  }
  return out;
}

bool comment_line(const std::string& line) {
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '#';
  }
  return false;
}

// Consumes one formula from whitespace tokens: either a bare true/false or a
// parenthesis-balanced span. The span is re-lexed by the formula parser.
FormulaPtr take_formula(const std::vector<std::string>& toks, size_t& i) {
  if (i >= toks.size()) throw ParseError("missing formula");
  int balance = 0;
  size_t start = i;
  do {
    if (i >= toks.size()) throw ParseError("unbalanced formula");
    for (char c : toks[i]) {
      if (c == '(') ++balance;
      if (c == ')') --balance;
    }
    ++i;
  } while (balance > 0);
  if (balance < 0) throw ParseError("unbalanced formula");
  return parse_formula(join({toks.begin() + start, toks.begin() + i}));
}

std::string marker_regex_star(const Alphabet& input) {
  std::string alt;
  for (char c : input.symbols()) {
    if (!alt.empty()) alt += '|';
    alt += c;
  }
  return alt.empty() ? std::string() : "(" + alt + ")*";
}

std::string render_move(const Move& m) {
  if (!m.is_step) return "mso " + to_text(m.formula);
  if (m.step > 0) return "+1";
  if (m.step < 0) return "-1";
  return "0";
}

std::string render_branch(const Branch& b) {
  std::string s = b.q + " " + (b.out.empty() ? "-" : b.out) + " " +
                  render_move(b.move);
  if (!b.rewrite.empty()) s += " rw " + b.rewrite;
  return s;
}

std::string render_test(const Test& t) {
  switch (t.type) {
    case Test::Type::sym:
      return "sym " + t.sym;
    case Test::Type::rla:
      return "rla " +
             (t.left_re.empty() ? dfa_to_regex(t.left) : t.left_re) + " " +
             t.sym + " " +
             (t.right_re.empty() ? dfa_to_regex(t.right) : t.right_re);
    case Test::Type::mso:
      return "mso " + to_text(t.formula);
  }
  return "?";
}

Move parse_move(const std::vector<std::string>& toks, size_t& i) {
  Move m;
  if (i >= toks.size()) throw ParseError("missing move");
  if (toks[i] == "mso") {
    ++i;
    m.is_step = false;
    m.formula = take_formula(toks, i);
    return m;
  }
  m.is_step = true;
  if (toks[i] == "-1")
    m.step = -1;
  else if (toks[i] == "0")
    m.step = 0;
  else if (toks[i] == "+1")
    m.step = 1;
  else
    throw ParseError("bad move: " + toks[i]);
  ++i;
  return m;
}

Branch parse_branch(const std::vector<std::string>& toks, size_t& i) {
  Branch b;
  if (i + 1 >= toks.size()) throw ParseError("truncated branch");
  b.q = toks[i++];
  b.out = toks[i++];
  if (b.out == "-") b.out.clear();
  b.move = parse_move(toks, i);
  if (i < toks.size() && toks[i] == "rw") {
    if (i + 1 >= toks.size()) throw ParseError("rw needs a symbol");
    b.rewrite = toks[i + 1];
    i += 2;
  }
  return b;
}

}  // namespace

std::string kind_name(MachineKind k) {
  switch (k) {
    case MachineKind::gsm: return "gsm";
    case MachineKind::rla: return "rla";
    case MachineKind::mso: return "mso";
    case MachineKind::hennie: return "hennie";
  }
  return "?";
}

MachineKind parse_kind(const std::string& s) {
  if (s == "gsm") return MachineKind::gsm;
  if (s == "rla") return MachineKind::rla;
  if (s == "mso") return MachineKind::mso;
  if (s == "hennie") return MachineKind::hennie;
  throw ParseError("unknown machine kind: " + s);
}

void Machine::check() const {
  if (name.empty()) throw ParseError("machine needs a name");
  std::set<std::string> st(states.begin(), states.end());
  if (st.size() != states.size())
    throw ParseError(name + ": duplicate state names");
  for (const auto& s : states)
    if (s.empty() || s == "/" || s == "=>")
      throw ParseError(name + ": unusable state name '" + s + "'");
  if (!st.count(initial)) throw ParseError(name + ": unknown initial state");
  if (!st.count(final_state)) throw ParseError(name + ": unknown final state");
  for (char c : output.symbols())
    if (c == '-' || c == '/')
      throw ParseError(name + ": output symbol collides with syntax: " +
                       std::string(1, c));

  const bool rewriting = kind == MachineKind::hennie;
  if (rewriting) {
    if (visits < 1)
      throw ParseError(name + ": rewriting machine needs a visit bound >= 1");
    for (char c : input.symbols())
      if (!work.contains(c))
        throw ParseError(name + ": work alphabet must contain the input alphabet");
  } else {
    if (work.size() != 0 || visits != 0)
      throw ParseError(name + ": work alphabet/visit bound are for rewriting machines");
  }
  const Alphabet& tape_alpha = rewriting ? work : input;

  for (const auto& inst : instructions) {
    if (!st.count(inst.p))
      throw ParseError(name + ": instruction from unknown state " + inst.p);
    if (inst.p == final_state)
      throw ParseError(name + ": instruction out of the final state");

    switch (inst.test.type) {
      case Test::Type::sym: {
        const std::string& s = inst.test.sym;
        if (s.size() != 1 ||
            !(s[0] == kLeftMarker || s[0] == kRightMarker ||
              tape_alpha.contains(s[0])))
          throw ParseError(name + ": test symbol '" + s + "' not on the tape");
        break;
      }
      case Test::Type::rla: {
        if (kind != MachineKind::rla)
          throw ParseError(name + ": look-around test in a " + kind_name(kind) +
                           " machine");
        const std::string& s = inst.test.sym;
        if (s.size() != 1 ||
            !(s[0] == kLeftMarker || s[0] == kRightMarker ||
              input.contains(s[0])))
          throw ParseError(name + ": test symbol '" + s + "' not on the tape");
        if (inst.test.left.states() == 0 || inst.test.right.states() == 0)
          throw ParseError(name + ": look-around test without automata");
        break;
      }
      case Test::Type::mso: {
        if (kind != MachineKind::mso)
          throw ParseError(name + ": formula test in a " + kind_name(kind) +
                           " machine");
        for (const auto& v : free_vars(inst.test.formula))
          if (v != "x")
            throw ParseError(name + ": test formula with free variable " + v);
        break;
      }
    }

    for (const Branch* b : {&inst.then_b, &inst.else_b}) {
      if (!st.count(b->q))
        throw ParseError(name + ": branch to unknown state " + b->q);
      for (char c : b->out)
        if (!output.contains(c))
          throw ParseError(name + ": output symbol '" + std::string(1, c) +
                           "' outside the output alphabet");
      if (!b->move.is_step) {
        if (kind != MachineKind::mso)
          throw ParseError(name + ": formula move in a " + kind_name(kind) +
                           " machine");
        for (const auto& v : free_vars(b->move.formula))
          if (v != "x" && v != "y")
            throw ParseError(name + ": move formula with free variable " + v);
      } else if (b->move.step < -1 || b->move.step > 1) {
        throw ParseError(name + ": step must be -1, 0 or +1");
      }
      if (!b->rewrite.empty()) {
        if (!rewriting)
          throw ParseError(name + ": rewrite outside a rewriting machine");
        if (b->rewrite.size() != 1 || !work.contains(b->rewrite[0]))
          throw ParseError(name + ": rewrite symbol '" + b->rewrite +
                           "' outside the work alphabet");
      }
    }
  }
}

std::string Machine::to_text() const {
  std::ostringstream out;
  out << "machine " << name << "\n";
  out << "kind " << kind_name(kind) << "\n";
  out << "input";
  for (char c : input.symbols()) out << ' ' << c;
  out << "\noutput";
  for (char c : output.symbols()) out << ' ' << c;
  out << "\n";
  if (kind == MachineKind::hennie) {
    out << "work";
    for (char c : work.symbols()) out << ' ' << c;
    out << "\nvisits " << visits << "\n";
  }
  out << "states";
  for (const auto& s : states) out << ' ' << s;
  out << "\ninitial " << initial << "\nfinal " << final_state << "\n";
  for (const auto& inst : instructions)
    out << "inst " << inst.p << " " << render_test(inst.test) << " => "
        << render_branch(inst.then_b) << " / " << render_branch(inst.else_b)
        << "\n";
  return out.str();
}

Machine Machine::from_text(const std::string& text) {
  Machine m;
  bool saw_name = false, saw_initial = false, saw_final = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (comment_line(line)) continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0];
    if (head == "machine") {
      if (toks.size() != 2) throw ParseError("machine line needs a name");
      m.name = toks[1];
      saw_name = true;
    } else if (head == "kind") {
      if (toks.size() != 2) throw ParseError("kind line needs one kind");
      m.kind = parse_kind(toks[1]);
    } else if (head == "input" || head == "output" || head == "work") {
      std::string syms;
      for (size_t i = 1; i < toks.size(); ++i) {
        if (toks[i].size() != 1)
          throw ParseError("alphabet symbols are single characters: " + toks[i]);
        syms += toks[i];
      }
      Alphabet a(syms);
      (head == "input" ? m.input : head == "output" ? m.output : m.work) = a;
    } else if (head == "visits") {
      if (toks.size() != 2) throw ParseError("visits line needs one number");
      m.visits = std::stoi(toks[1]);
    } else if (head == "states") {
      m.states.assign(toks.begin() + 1, toks.end());
    } else if (head == "initial") {
      if (toks.size() != 2) throw ParseError("initial line needs one state");
      m.initial = toks[1];
      saw_initial = true;
    } else if (head == "final") {
      if (toks.size() != 2) throw ParseError("final line needs one state");
      m.final_state = toks[1];
      saw_final = true;
    } else if (head == "inst") {
      if (toks.size() < 4) throw ParseError("truncated instruction line");
      Instruction inst;
      inst.p = toks[1];
      size_t i = 2;
      if (toks[i] == "sym") {
        inst.test.type = Test::Type::sym;
        if (i + 1 >= toks.size()) throw ParseError("sym test needs a symbol");
        inst.test.sym = toks[i + 1];
        i += 2;
      } else if (toks[i] == "rla") {
        inst.test.type = Test::Type::rla;
        if (i + 3 >= toks.size())
          throw ParseError("rla test needs two expressions and a symbol");
        inst.test.left_re = toks[i + 1];
        inst.test.sym = toks[i + 2];
        inst.test.right_re = toks[i + 3];
        TokenAlphabet ta = TokenAlphabet::chars(m.input.with_markers());
        inst.test.left = regex_to_dfa(inst.test.left_re, ta);
        inst.test.right = regex_to_dfa(inst.test.right_re, ta);
        inst.test = normalize_rla_test(inst.test, m.input);
        i += 4;
      } else if (toks[i] == "mso") {
        inst.test.type = Test::Type::mso;
        ++i;
        inst.test.formula = take_formula(toks, i);
      } else {
        throw ParseError("unknown test kind: " + toks[i]);
      }
      if (i >= toks.size() || toks[i] != "=>")
        throw ParseError("instruction needs '=>' after the test");
      ++i;
      inst.then_b = parse_branch(toks, i);
      if (i >= toks.size() || toks[i] != "/")
        throw ParseError("instruction needs '/' between branches");
      ++i;
      inst.else_b = parse_branch(toks, i);
      if (i != toks.size())
        throw ParseError("trailing tokens on instruction line: " + join(toks, i));
      m.instructions.push_back(std::move(inst));
    } else {
      throw ParseError("unknown machine directive: " + head);
    }
  }
  if (!saw_name || !saw_initial || !saw_final)
    throw ParseError("machine file missing a required section");
  m.check();
  return m;
}

Test normalize_rla_test(const Test& t, const Alphabet& input) {
  TokenAlphabet ta = TokenAlphabet::chars(input.with_markers());
  std::string star = marker_regex_star(input);
  std::string prefix_re =
      t.sym == std::string(1, kLeftMarker) ? "%" : "L" + star;
  std::string suffix_re =
      t.sym == std::string(1, kRightMarker) ? "%" : star + "R";
  Test out = t;
  out.left = dfa_minimize(dfa_intersect(t.left, regex_to_dfa(prefix_re, ta)));
  out.right = dfa_minimize(dfa_intersect(t.right, regex_to_dfa(suffix_re, ta)));
  return out;
}

ValidationReport validate(const Machine& m) {
  ValidationReport r;
  std::map<std::string, int> per_state;
  for (const auto& inst : m.instructions) {
    if (++per_state[inst.p] > 1) {
      r.deterministic = false;
      r.notes.push_back("state " + inst.p + " has several instructions");
    }
    for (const Branch* b : {&inst.then_b, &inst.else_b}) {
      if (b->out.size() > 1) {
        r.short_outputs = false;
        r.notes.push_back("state " + inst.p + " writes \"" + b->out + "\"");
      }
      if (!b->move.is_step) {
        auto cex = functional_counterexample(b->move.formula, "x", "y",
                                             m.input.symbols());
        if (cex) {
          r.mso_moves_functional = false;
          r.notes.push_back("move " + to_text(b->move.formula) +
                            " is not functional on \"" + *cex + "\"");
        }
      }
    }
    if (inst.test.type == Test::Type::rla) {
      Test n = normalize_rla_test(inst.test, m.input);
      if (!dfa_equal(n.left, inst.test.left) ||
          !dfa_equal(n.right, inst.test.right)) {
        r.rla_normalized = false;
        r.notes.push_back("state " + inst.p + " has a non-normalized test");
      }
    }
  }
  return r;
}

Machine normalize_short_output(const Machine& m) {
  bool needed = false;
  for (const auto& inst : m.instructions)
    if (inst.then_b.out.size() > 1 || inst.else_b.out.size() > 1) needed = true;
  if (!needed) return m;

  Machine out = m;
  out.instructions.clear();
  std::set<std::string> used(m.states.begin(), m.states.end());
  int counter = 0;
  auto fresh = [&] {
    std::string s;
    do s = "w" + std::to_string(counter++);
    while (used.count(s));
    used.insert(s);
    out.states.push_back(s);
    return s;
  };
  // An instruction whose branches agree fires the same way whatever the test
  // says, which is how a chain state acts unconditionally.
  auto unconditional = [&](const std::string& p, const Branch& b) {
    Instruction inst;
    inst.p = p;
    inst.test.type = Test::Type::sym;
    inst.test.sym = std::string(1, kLeftMarker);
    inst.then_b = b;
    inst.else_b = b;
    out.instructions.push_back(std::move(inst));
  };
  auto shorten = [&](Branch b) {
    if (b.out.size() <= 1) return b;
    std::string chunk = b.out;
    // first symbol now; the rest through fresh stay-put states
    std::vector<std::string> chain;
    for (size_t i = 1; i < chunk.size(); ++i) chain.push_back(fresh());
    for (size_t i = 1; i < chunk.size(); ++i) {
      Branch step;
      step.out = std::string(1, chunk[i]);
      if (i + 1 < chunk.size()) {
        step.q = chain[i];
        step.move.is_step = true;
        step.move.step = 0;
      } else {
        step.q = b.q;
        step.move = b.move;
      }
      unconditional(chain[i - 1], step);
    }
    b.q = chain[0];
    b.out = std::string(1, chunk[0]);
    b.move.is_step = true;
    b.move.step = 0;
    b.move.formula = nullptr;
    return b;
  };
  for (const auto& inst : m.instructions) {
    Instruction ni = inst;
    ni.then_b = shorten(inst.then_b);
    ni.else_b = shorten(inst.else_b);
    out.instructions.push_back(std::move(ni));
  }
  out.check();
  return out;
}

Machine separate_final_state(const Machine& m) {
  if (m.initial != m.final_state) return m;
  Machine out = m;
  std::set<std::string> used(m.states.begin(), m.states.end());
  std::string f = "f";
  int counter = 0;
  while (used.count(f)) f = "f" + std::to_string(counter++);
  out.states.push_back(f);
  out.final_state = f;
  // The old shared state had no instructions (none may leave the final
  // state), so the machine accepted everything immediately with no output;
  // jump to the new final state unconditionally to keep that behavior.
  Instruction inst;
  inst.p = m.initial;
  inst.test.type = Test::Type::sym;
  inst.test.sym = std::string(1, kLeftMarker);
  inst.then_b = Branch{f, "", Move{true, 0, nullptr}, ""};
  inst.else_b = inst.then_b;
  out.instructions.push_back(std::move(inst));
  out.check();
  return out;
}

Machine to_eight_tuple(const std::string& name,
                       const std::vector<FiveTuple>& rules, bool deterministic,
                       const Alphabet& input, const Alphabet& output,
                       const std::string& initial,
                       const std::string& final_state) {
  Machine m;
  m.name = name;
  m.kind = MachineKind::gsm;
  m.input = input;
  m.output = output;
  m.initial = initial;
  m.final_state = final_state;

  std::vector<std::string> order;
  std::set<std::string> seen;
  auto add_state = [&](const std::string& s) {
    if (seen.insert(s).second) order.push_back(s);
  };
  add_state(initial);
  for (const auto& r : rules) add_state(r.p);
  for (const auto& r : rules) add_state(r.q);
  add_state(final_state);

  if (!deterministic) {
    for (const auto& r : rules) {
      Instruction inst;
      inst.p = r.p;
      inst.test.type = Test::Type::sym;
      inst.test.sym = r.sym;
      inst.then_b = Branch{r.q, r.out, Move{true, r.eps, nullptr}, ""};
      inst.else_b = Branch{r.p, "", Move{true, 0, nullptr}, ""};
      m.instructions.push_back(std::move(inst));
    }
    m.states = order;
    m.check();
    return m;
  }

  // Group the rules per source state, keeping list order, and probe them
  // sequentially through chained copies; the last copy has no instructions,
  // so a symbol matching no rule rejects by sticking.
  std::map<std::string, std::vector<const FiveTuple*>> by_state;
  std::vector<std::string> state_order;
  for (const auto& r : rules) {
    auto& v = by_state[r.p];
    for (const auto* prev : v)
      if (prev->sym == r.sym)
        throw std::invalid_argument(
            name + ": two rules for (" + r.p + ", " + r.sym +
            ") cannot be chained deterministically");
    if (v.empty()) state_order.push_back(r.p);
    v.push_back(&r);
  }
  m.states = order;
  for (const auto& p : state_order) {
    const auto& v = by_state[p];
    std::vector<std::string> copies = {p};
    for (size_t i = 1; i < v.size(); ++i) {
      std::string c = p + "^" + std::to_string(i + 1);
      while (seen.count(c)) c += "'";
      seen.insert(c);
      m.states.push_back(c);
      copies.push_back(c);
    }
    std::string stuck = p + "^" + std::to_string(v.size() + 1);
    while (seen.count(stuck)) stuck += "'";
    seen.insert(stuck);
    m.states.push_back(stuck);
    copies.push_back(stuck);
    for (size_t i = 0; i < v.size(); ++i) {
      Instruction inst;
      inst.p = copies[i];
      inst.test.type = Test::Type::sym;
      inst.test.sym = v[i]->sym;
      inst.then_b = Branch{v[i]->q, v[i]->out, Move{true, v[i]->eps, nullptr}, ""};
      inst.else_b = Branch{copies[i + 1], "", Move{true, 0, nullptr}, ""};
      m.instructions.push_back(std::move(inst));
    }
  }
  m.check();
  return m;
}

}  // namespace twt
