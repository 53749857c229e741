#include "twt/automata.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace twt {

int TokenAlphabet::sym_index(const std::string& s) const {
  for (size_t i = 0; i < syms.size(); ++i)
    if (syms[i] == s) return (int)i;
  return -1;
}

int TokenAlphabet::var_index(const std::string& v) const {
  for (size_t i = 0; i < vars.size(); ++i)
    if (vars[i] == v) return (int)i;
  return -1;
}

std::string TokenAlphabet::render(int t) const {
  std::string s = syms[sym_of(t)];
  if (!vars.empty()) {
    s += ':';
    for (size_t i = 0; i < vars.size(); ++i) s += flag(t, (int)i) ? '1' : '0';
  }
  return s;
}

TokenAlphabet TokenAlphabet::chars(const std::string& symbols) {
  TokenAlphabet a;
  std::set<char> seen;
  for (char c : symbols)
    if (seen.insert(c).second) a.syms.push_back(std::string(1, c));
  return a;
}

int Dfa::run(const std::vector<int>& tokens) const {
  int s = initial;
  for (int t : tokens) s = next[s][t];
  return s;
}

bool Dfa::accepts(const std::vector<int>& tokens) const {
  return accepting[run(tokens)] != 0;
}

bool Dfa::accepts_chars(const std::string& w) const {
  if (!alpha.vars.empty())
    throw std::logic_error("accepts_chars needs a variable-free alphabet");
  std::vector<int> toks;
  for (char c : w) {
    int i = alpha.sym_index(std::string(1, c));
    if (i < 0) return false;
    toks.push_back(i);
  }
  return accepts(toks);
}

std::string Dfa::to_text() const {
  std::ostringstream os;
  os << "dfa\n";
  os << "symbols";
  for (auto& s : alpha.syms) os << ' ' << s;
  os << "\nvars";
  for (auto& v : alpha.vars) os << ' ' << v;
  os << "\nstates " << states() << "\ninitial " << initial << "\naccepting";
  for (int s = 0; s < states(); ++s)
    if (accepting[s]) os << ' ' << s;
  os << '\n';
  for (int s = 0; s < states(); ++s)
    for (int t = 0; t < alpha.size(); ++t)
      os << "trans " << s << ' ' << alpha.render(t) << ' ' << next[s][t] << '\n';
  return os.str();
}

Dfa Dfa::from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  Dfa d;
  int nstates = -1;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw == "dfa") continue;
    if (kw == "symbols") {
      std::string s;
      while (ls >> s) d.alpha.syms.push_back(s);
    } else if (kw == "vars") {
      std::string v;
      while (ls >> v) d.alpha.vars.push_back(v);
    } else if (kw == "states") {
      ls >> nstates;
      d.accepting.assign(nstates, 0);
      d.next.assign(nstates, std::vector<int>(d.alpha.size(), 0));
    } else if (kw == "initial") {
      ls >> d.initial;
    } else if (kw == "accepting") {
      int s;
      while (ls >> s) d.accepting[s] = 1;
    } else if (kw == "trans") {
      int s, t;
      std::string tok;
      ls >> s >> tok >> t;
      std::string sym = tok;
      uint32_t flags = 0;
      if (auto p = tok.rfind(':'); !d.alpha.vars.empty() && p != std::string::npos) {
        sym = tok.substr(0, p);
        std::string bits = tok.substr(p + 1);
        for (size_t i = 0; i < bits.size(); ++i)
          if (bits[i] == '1') flags |= 1u << i;
      }
      int si = d.alpha.sym_index(sym);
      if (si < 0) throw ParseError("unknown symbol in dfa: " + sym);
      d.next[s][d.alpha.token(si, flags)] = t;
    } else {
      throw ParseError("unknown dfa line: " + line);
    }
  }
  if (nstates < 0) throw ParseError("dfa without states line");
  return d;
}

int Nfa::add_state() {
  next.emplace_back();
  eps.emplace_back();
  return (int)next.size() - 1;
}

Dfa dfa_all(const TokenAlphabet& alpha) {
  Dfa d;
  d.alpha = alpha;
  d.accepting = {1};
  d.next = {std::vector<int>(alpha.size(), 0)};
  return d;
}

Dfa dfa_none(const TokenAlphabet& alpha) {
  Dfa d = dfa_all(alpha);
  d.accepting[0] = 0;
  return d;
}

Dfa dfa_product(const Dfa& a, const Dfa& b,
                const std::function<bool(bool, bool)>& keep) {
  if (!(a.alpha == b.alpha))
    throw std::logic_error("product of automata over different alphabets");
  int nt = a.alpha.size();
  std::map<std::pair<int, int>, int> idx;
  std::deque<std::pair<int, int>> todo;
  Dfa d;
  d.alpha = a.alpha;
  auto state = [&](int x, int y) {
    auto [it, fresh] = idx.try_emplace({x, y}, (int)idx.size());
    if (fresh) {
      todo.push_back({x, y});
      d.accepting.push_back(keep(a.accepting[x], b.accepting[y]) ? 1 : 0);
      d.next.emplace_back(nt, 0);
    }
    return it->second;
  };
  d.initial = state(a.initial, b.initial);
  while (!todo.empty()) {
    auto [x, y] = todo.front();
    todo.pop_front();
    int s = idx.at({x, y});
    for (int t = 0; t < nt; ++t) d.next[s][t] = state(a.next[x][t], b.next[y][t]);
  }
  return d;
}

Dfa dfa_intersect(const Dfa& a, const Dfa& b) {
  return dfa_product(a, b, [](bool x, bool y) { return x && y; });
}
Dfa dfa_union(const Dfa& a, const Dfa& b) {
  return dfa_product(a, b, [](bool x, bool y) { return x || y; });
}
Dfa dfa_complement(const Dfa& a) {
  Dfa d = a;
  for (auto& acc : d.accepting) acc = acc ? 0 : 1;
  return d;
}

Dfa dfa_minimize(const Dfa& a) {
  // Drop unreachable states first.
  std::vector<int> order{a.initial};
  std::map<int, int> remap{{a.initial, 0}};
  for (size_t i = 0; i < order.size(); ++i)
    for (int t : a.next[order[i]])
      if (remap.try_emplace(t, (int)remap.size()).second) order.push_back(t);
  int n = (int)order.size(), nt = a.alpha.size();
  std::vector<int> cls(n);
  for (int i = 0; i < n; ++i) cls[i] = a.accepting[order[i]] ? 1 : 0;
  // Moore refinement.
  for (;;) {
    std::map<std::vector<int>, int> sig_ids;
    std::vector<int> next_cls(n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> sig{cls[i]};
      for (int t = 0; t < nt; ++t) sig.push_back(cls[remap.at(a.next[order[i]][t])]);
      next_cls[i] = sig_ids.try_emplace(sig, (int)sig_ids.size()).first->second;
    }
    if (next_cls == cls) break;
    cls = next_cls;
  }
  int m = *std::max_element(cls.begin(), cls.end()) + 1;
  Dfa d;
  d.alpha = a.alpha;
  d.initial = cls[0];
  d.accepting.assign(m, 0);
  d.next.assign(m, std::vector<int>(nt, 0));
  for (int i = 0; i < n; ++i) {
    d.accepting[cls[i]] = a.accepting[order[i]];
    for (int t = 0; t < nt; ++t)
      d.next[cls[i]][t] = cls[remap.at(a.next[order[i]][t])];
  }
  return d;
}

static std::set<int> eps_closure(const Nfa& n, std::set<int> s) {
  std::vector<int> todo(s.begin(), s.end());
  while (!todo.empty()) {
    int x = todo.back();
    todo.pop_back();
    for (int y : n.eps[x])
      if (s.insert(y).second) todo.push_back(y);
  }
  return s;
}

Dfa nfa_determinize(const Nfa& n) {
  int nt = n.alpha.size();
  std::map<std::set<int>, int> idx;
  std::deque<std::set<int>> todo;
  Dfa d;
  d.alpha = n.alpha;
  auto state = [&](std::set<int> s) {
    s = eps_closure(n, std::move(s));
    auto [it, fresh] = idx.try_emplace(s, (int)idx.size());
    if (fresh) {
      todo.push_back(s);
      bool acc = false;
      for (int x : s) acc = acc || n.accepting.count(x);
      d.accepting.push_back(acc ? 1 : 0);
      d.next.emplace_back(nt, 0);
    }
    return it->second;
  };
  d.initial = state(n.initial);
  while (!todo.empty()) {
    std::set<int> s = todo.front();
    todo.pop_front();
    int si = idx.at(eps_closure(n, s));
    for (int t = 0; t < nt; ++t) {
      std::set<int> succ;
      for (int x : s) {
        auto it = n.next[x].find(t);
        if (it != n.next[x].end()) succ.insert(it->second.begin(), it->second.end());
      }
      d.next[si][t] = state(std::move(succ));
    }
  }
  return d;
}

Nfa dfa_to_nfa(const Dfa& a) {
  Nfa n;
  n.alpha = a.alpha;
  n.next.assign(a.states(), {});
  n.eps.assign(a.states(), {});
  n.initial = {a.initial};
  for (int s = 0; s < a.states(); ++s) {
    if (a.accepting[s]) n.accepting.insert(s);
    for (int t = 0; t < a.alpha.size(); ++t) n.add_edge(s, t, a.next[s][t]);
  }
  return n;
}

Dfa dfa_extend(const Dfa& a, const TokenAlphabet& bigger) {
  if (bigger.syms != a.alpha.syms)
    throw std::logic_error("dfa_extend must keep the symbol set");
  // Every old var must appear in the bigger alphabet.
  std::vector<int> old_bit(a.alpha.vars.size());
  for (size_t i = 0; i < a.alpha.vars.size(); ++i) {
    int j = bigger.var_index(a.alpha.vars[i]);
    if (j < 0) throw std::logic_error("dfa_extend dropped a variable");
    old_bit[i] = j;
  }
  Dfa d;
  d.alpha = bigger;
  d.initial = a.initial;
  d.accepting = a.accepting;
  d.next.assign(a.states(), std::vector<int>(bigger.size(), 0));
  for (int s = 0; s < a.states(); ++s)
    for (int t = 0; t < bigger.size(); ++t) {
      uint32_t of = 0;
      for (size_t i = 0; i < old_bit.size(); ++i)
        if (bigger.flag(t, old_bit[i])) of |= 1u << i;
      d.next[s][t] = a.next[s][a.alpha.token(bigger.sym_of(t), of)];
    }
  return d;
}

Nfa nfa_project(const Dfa& a, const std::string& var) {
  int vi = a.alpha.var_index(var);
  if (vi < 0) throw std::logic_error("projecting a variable not in the alphabet");
  TokenAlphabet smaller;
  smaller.syms = a.alpha.syms;
  for (auto& v : a.alpha.vars)
    if (v != var) smaller.vars.push_back(v);
  Nfa n;
  n.alpha = smaller;
  n.next.assign(a.states(), {});
  n.eps.assign(a.states(), {});
  n.initial = {a.initial};
  for (int s = 0; s < a.states(); ++s) {
    if (a.accepting[s]) n.accepting.insert(s);
    for (int t = 0; t < a.alpha.size(); ++t) {
      uint32_t f = a.alpha.flags_of(t);
      uint32_t low = f & ((1u << vi) - 1);
      uint32_t high = (f >> (vi + 1)) << vi;
      n.add_edge(s, smaller.token(a.alpha.sym_of(t), high | low), a.next[s][t]);
    }
  }
  return n;
}

std::optional<std::vector<int>> shortest_accepted(const Dfa& a) {
  std::vector<int> from(a.states(), -2);  // -2 unseen, -1 initial
  std::vector<int> via(a.states(), -1);
  std::deque<int> todo{a.initial};
  from[a.initial] = -1;
  while (!todo.empty()) {
    int s = todo.front();
    todo.pop_front();
    if (a.accepting[s]) {
      std::vector<int> w;
      for (int x = s; from[x] != -1; x = from[x]) w.push_back(via[x]);
      std::reverse(w.begin(), w.end());
      return w;
    }
    for (int t = 0; t < a.alpha.size(); ++t) {
      int y = a.next[s][t];
      if (from[y] == -2) {
        from[y] = s;
        via[y] = t;
        todo.push_back(y);
      }
    }
  }
  return std::nullopt;
}

bool dfa_equal(const Dfa& a, const Dfa& b) {
  Dfa diff = dfa_product(a, b, [](bool x, bool y) { return x != y; });
  return !shortest_accepted(diff).has_value();
}

Dfa dfa_reverse(const Dfa& a) {
  Nfa n;
  n.alpha = a.alpha;
  n.next.assign(a.states(), {});
  n.eps.assign(a.states(), {});
  n.accepting = {a.initial};
  for (int s = 0; s < a.states(); ++s) {
    if (a.accepting[s]) n.initial.insert(s);
    for (int t = 0; t < a.alpha.size(); ++t) n.add_edge(a.next[s][t], t, s);
  }
  return dfa_minimize(nfa_determinize(n));
}

// ---- regular expressions ----

namespace {

struct Frag {  // Thompson fragment
  int start, end;
};

struct RegexBuilder {
  Nfa n;
  const std::string& rx;
  size_t pos = 0;

  explicit RegexBuilder(const std::string& s, const TokenAlphabet& alpha) : rx(s) {
    n.alpha = alpha;
  }

  bool peek(char c) const { return pos < rx.size() && rx[pos] == c; }
  bool done() const { return pos >= rx.size(); }

  Frag atom() {
    if (peek('(')) {
      ++pos;
      Frag f = alt();
      if (!peek(')')) throw ParseError("unbalanced ( in regex: " + rx);
      ++pos;
      return f;
    }
    int s = n.add_state(), e = n.add_state();
    if (peek('%')) {  // empty word
      ++pos;
      n.add_eps(s, e);
      return {s, e};
    }
    if (peek('!')) {  // empty language: no connection at all
      ++pos;
      return {s, e};
    }
    if (done() || peek(')') || peek('|') || peek('*'))
      throw ParseError("expected symbol in regex: " + rx);
    int si = n.alpha.sym_index(std::string(1, rx[pos]));
    if (si < 0)
      throw ParseError(std::string("regex symbol outside alphabet: ") + rx[pos]);
    ++pos;
    n.add_edge(s, n.alpha.token(si, 0), e);
    return {s, e};
  }

  Frag rep() {
    Frag f = atom();
    while (peek('*')) {
      ++pos;
      int s = n.add_state(), e = n.add_state();
      n.add_eps(s, f.start);
      n.add_eps(s, e);
      n.add_eps(f.end, f.start);
      n.add_eps(f.end, e);
      f = {s, e};
    }
    return f;
  }

  Frag cat() {
    Frag f = rep();
    while (!done() && !peek('|') && !peek(')')) {
      Frag g = rep();
      n.add_eps(f.end, g.start);
      f = {f.start, g.end};
    }
    return f;
  }

  Frag alt() {
    Frag f = cat();
    while (peek('|')) {
      ++pos;
      Frag g = cat();
      int s = n.add_state(), e = n.add_state();
      n.add_eps(s, f.start);
      n.add_eps(s, g.start);
      n.add_eps(f.end, e);
      n.add_eps(g.end, e);
      f = {s, e};
    }
    return f;
  }
};

}  // namespace

Dfa regex_to_dfa(const std::string& rx, const TokenAlphabet& alpha) {
  if (!alpha.vars.empty())
    throw std::logic_error("regexes are over variable-free alphabets");
  RegexBuilder b(rx, alpha);
  Frag f = b.alt();
  if (!b.done()) throw ParseError("trailing characters in regex: " + rx);
  b.n.initial = {f.start};
  b.n.accepting = {f.end};
  return dfa_minimize(nfa_determinize(b.n));
}

// State elimination on a generalised NFA whose edges carry regex strings.
std::string dfa_to_regex(const Dfa& a) {
  if (!a.alpha.vars.empty())
    throw std::logic_error("dfa_to_regex needs a variable-free alphabet");
  auto wrap = [](const std::string& s) {
    if (s.size() == 1) return s;
    return "(" + s + ")";
  };
  auto cat = [&](const std::string& x, const std::string& y) -> std::string {
    if (x == "%") return y;
    if (y == "%") return x;
    std::string l = x.find('|') != std::string::npos ? wrap(x) : x;
    std::string r = y.find('|') != std::string::npos ? wrap(y) : y;
    return l + r;
  };
  auto star = [&](const std::string& x) -> std::string {
    if (x == "%") return "%";
    return wrap(x) + "*";
  };
  auto join = [](std::optional<std::string>& acc, const std::string& s) {
    if (!acc) acc = s;
    else if (*acc != s) acc = *acc + "|" + s;
  };

  int n = a.states();
  int init = n, fin = n + 1;
  std::map<std::pair<int, int>, std::optional<std::string>> e;
  e[{init, a.initial}] = "%";
  for (int s = 0; s < n; ++s) {
    if (a.accepting[s]) e[{s, fin}] = "%";
    for (int t = 0; t < a.alpha.size(); ++t)
      join(e[{s, a.next[s][t]}], a.alpha.syms[a.alpha.sym_of(t)]);
  }
  auto get = [&](int i, int j) -> std::optional<std::string> {
    auto it = e.find({i, j});
    return it == e.end() ? std::nullopt : it->second;
  };
  for (int k = 0; k < n; ++k) {
    std::optional<std::string> loop = get(k, k);
    std::string mid = loop ? star(*loop) : "%";
    for (int i = 0; i <= n + 1; ++i) {
      if (i == k) continue;
      auto ik = get(i, k);
      if (!ik) continue;
      for (int j = 0; j <= n + 1; ++j) {
        if (j == k) continue;
        auto kj = get(k, j);
        if (!kj) continue;
        join(e[{i, j}], cat(cat(*ik, mid), *kj));
      }
    }
    for (int i = 0; i <= n + 1; ++i) {
      e.erase({i, k});
      e.erase({k, i});
    }
  }
  auto res = get(init, fin);
  if (!res) return "!";  // empty language literal
  return *res;
}

}  // namespace twt
