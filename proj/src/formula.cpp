#include "twt/formula.hpp"

#include <sstream>

namespace twt {

using K = Formula::Kind;

static FormulaPtr mk(Formula f) { return std::make_shared<Formula>(std::move(f)); }

namespace F {
FormulaPtr tru() { return mk({.kind = K::True}); }
FormulaPtr fls() { return mk({.kind = K::False}); }
FormulaPtr lab(const std::string& l, const std::string& x) {
  return mk({.kind = K::Lab, .label = l, .v1 = x});
}
FormulaPtr edge(const std::string& l, const std::string& x, const std::string& y) {
  return mk({.kind = K::Edge, .label = l, .v1 = x, .v2 = y});
}
FormulaPtr eq(const std::string& x, const std::string& y) {
  return mk({.kind = K::Eq, .v1 = x, .v2 = y});
}
FormulaPtr in(const std::string& x, const std::string& X) {
  return mk({.kind = K::In, .v1 = x, .v2 = X});
}
FormulaPtr lnot(FormulaPtr f) { return mk({.kind = K::Not, .a = std::move(f)}); }
FormulaPtr land(FormulaPtr a, FormulaPtr b) {
  return mk({.kind = K::And, .a = std::move(a), .b = std::move(b)});
}
FormulaPtr lor(FormulaPtr a, FormulaPtr b) {
  return mk({.kind = K::Or, .a = std::move(a), .b = std::move(b)});
}
FormulaPtr imp(FormulaPtr a, FormulaPtr b) {
  return mk({.kind = K::Imp, .a = std::move(a), .b = std::move(b)});
}
FormulaPtr iff(FormulaPtr a, FormulaPtr b) { return land(imp(a, b), imp(b, a)); }
FormulaPtr ex(const std::string& x, FormulaPtr f) {
  return mk({.kind = K::Exists, .v1 = x, .a = std::move(f)});
}
FormulaPtr all(const std::string& x, FormulaPtr f) {
  return mk({.kind = K::Forall, .v1 = x, .a = std::move(f)});
}
FormulaPtr exS(const std::string& X, FormulaPtr f) {
  return mk({.kind = K::ExistsSet, .v1 = X, .a = std::move(f)});
}
FormulaPtr allS(const std::string& X, FormulaPtr f) {
  return mk({.kind = K::ForallSet, .v1 = X, .a = std::move(f)});
}
FormulaPtr path(const std::string& x, const std::string& y) {
  return mk({.kind = K::Path, .v1 = x, .v2 = y});
}
FormulaPtr path_strict(const std::string& x, const std::string& y) {
  return mk({.kind = K::Path, .strict = true, .v1 = x, .v2 = y});
}
FormulaPtr path_via(const std::string& l, const std::string& x, const std::string& y) {
  return mk({.kind = K::Path, .label = l, .v1 = x, .v2 = y});
}
FormulaPtr and_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return tru();
  FormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = land(acc, fs[i]);
  return acc;
}
FormulaPtr or_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return fls();
  FormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = lor(acc, fs[i]);
  return acc;
}
}  // namespace F

std::string to_text(const FormulaPtr& f) {
  switch (f->kind) {
    case K::True: return "true";
    case K::False: return "false";
    case K::Lab: return "(lab " + f->label + " " + f->v1 + ")";
    case K::Edge: return "(edge " + f->label + " " + f->v1 + " " + f->v2 + ")";
    case K::Eq: return "(= " + f->v1 + " " + f->v2 + ")";
    case K::In: return "(in " + f->v1 + " " + f->v2 + ")";
    case K::Not: return "(not " + to_text(f->a) + ")";
    case K::And: return "(and " + to_text(f->a) + " " + to_text(f->b) + ")";
    case K::Or: return "(or " + to_text(f->a) + " " + to_text(f->b) + ")";
    case K::Imp: return "(imp " + to_text(f->a) + " " + to_text(f->b) + ")";
    case K::Exists: return "(ex " + f->v1 + " " + to_text(f->a) + ")";
    case K::Forall: return "(all " + f->v1 + " " + to_text(f->a) + ")";
    case K::ExistsSet: return "(exS " + f->v1 + " " + to_text(f->a) + ")";
    case K::ForallSet: return "(allS " + f->v1 + " " + to_text(f->a) + ")";
    case K::Path:
      if (!f->label.empty())
        return "(pathvia " + f->label + " " + f->v1 + " " + f->v2 + ")";
      return std::string("(path") + (f->strict ? "+" : "") + " " + f->v1 + " " + f->v2 + ")";
  }
  throw std::logic_error("bad formula kind");
}

static std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == ')') {
      if (!cur.empty()) out.push_back(cur), cur.clear();
      out.push_back(std::string(1, c));
    } else if (std::isspace((unsigned char)c)) {
      if (!cur.empty()) out.push_back(cur), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

static const std::string& need(const std::vector<std::string>& t, size_t& pos,
                               const char* what) {
  if (pos >= t.size()) throw ParseError(std::string("formula ended while reading ") + what);
  return t[pos++];
}

static std::string need_node_var(const std::vector<std::string>& t, size_t& pos) {
  const std::string& v = need(t, pos, "node variable");
  if (!is_node_var(v)) throw ParseError("expected node variable, got " + v);
  return v;
}
static std::string need_set_var(const std::vector<std::string>& t, size_t& pos) {
  const std::string& v = need(t, pos, "set variable");
  if (!is_set_var(v)) throw ParseError("expected set variable, got " + v);
  return v;
}

FormulaPtr parse_formula(const std::vector<std::string>& t, size_t& pos) {
  const std::string& tok = need(t, pos, "formula");
  if (tok == "true") return F::tru();
  if (tok == "false") return F::fls();
  if (tok != "(") throw ParseError("expected formula, got " + tok);
  const std::string& op = need(t, pos, "operator");
  FormulaPtr r;
  if (op == "lab") {
    std::string l = need(t, pos, "label");
    r = F::lab(l, need_node_var(t, pos));
  } else if (op == "edge") {
    std::string l = need(t, pos, "label");
    std::string x = need_node_var(t, pos);
    r = F::edge(l, x, need_node_var(t, pos));
  } else if (op == "=") {
    std::string x = need_node_var(t, pos);
    r = F::eq(x, need_node_var(t, pos));
  } else if (op == "in") {
    std::string x = need_node_var(t, pos);
    r = F::in(x, need_set_var(t, pos));
  } else if (op == "not") {
    r = F::lnot(parse_formula(t, pos));
  } else if (op == "and" || op == "or") {
    std::vector<FormulaPtr> parts;
    while (pos < t.size() && t[pos] != ")") parts.push_back(parse_formula(t, pos));
    if (parts.size() < 2)
      throw ParseError("(" + op + " ...) needs at least two subformulas");
    r = op == "and" ? F::and_all(parts) : F::or_all(parts);
  } else if (op == "imp") {
    FormulaPtr a = parse_formula(t, pos);
    FormulaPtr b = parse_formula(t, pos);
    r = F::imp(a, b);
  } else if (op == "ex" || op == "all") {
    std::string x = need_node_var(t, pos);
    FormulaPtr a = parse_formula(t, pos);
    r = op == "ex" ? F::ex(x, a) : F::all(x, a);
  } else if (op == "exS" || op == "allS") {
    std::string X = need_set_var(t, pos);
    FormulaPtr a = parse_formula(t, pos);
    r = op == "exS" ? F::exS(X, a) : F::allS(X, a);
  } else if (op == "path" || op == "path+") {
    std::string x = need_node_var(t, pos);
    std::string y = need_node_var(t, pos);
    r = op == "path" ? F::path(x, y) : F::path_strict(x, y);
  } else if (op == "pathvia") {
    std::string l = need(t, pos, "label");
    std::string x = need_node_var(t, pos);
    r = F::path_via(l, x, need_node_var(t, pos));
  } else if (op == "tape-shape") {
    r = tape_shape();
  } else if (op == "string-shape" || op == "egr-shape") {
    std::vector<std::string> ls;
    while (pos < t.size() && t[pos] != ")") ls.push_back(t[pos++]);
    r = op == "string-shape" ? string_shape(ls) : egr_shape(ls);
  } else if (op == "partition") {
    std::vector<std::string> vs;
    while (pos < t.size() && t[pos] != ")") {
      if (!is_set_var(t[pos])) throw ParseError("partition needs set variables");
      vs.push_back(t[pos++]);
    }
    r = partition_of(vs);
  } else {
    throw ParseError("unknown formula operator " + op);
  }
  if (need(t, pos, "closing paren") != ")")
    throw ParseError("expected ) after " + op);
  return r;
}

FormulaPtr parse_formula(const std::string& text) {
  std::vector<std::string> t = tokenize(text);
  size_t pos = 0;
  FormulaPtr f = parse_formula(t, pos);
  if (pos != t.size()) throw ParseError("trailing tokens after formula: " + t[pos]);
  return f;
}

static void collect_vars(const FormulaPtr& f, std::set<std::string>& bound,
                         std::set<std::string>* free, std::set<std::string>* all) {
  auto var = [&](const std::string& v) {
    if (all) all->insert(v);
    if (free && !bound.count(v)) free->insert(v);
  };
  switch (f->kind) {
    case K::True: case K::False: return;
    case K::Lab: var(f->v1); return;
    case K::Edge: case K::Eq: case K::In: case K::Path:
      var(f->v1); var(f->v2); return;
    case K::Not: collect_vars(f->a, bound, free, all); return;
    case K::And: case K::Or: case K::Imp:
      collect_vars(f->a, bound, free, all);
      collect_vars(f->b, bound, free, all);
      return;
    case K::Exists: case K::Forall: case K::ExistsSet: case K::ForallSet: {
      if (all) all->insert(f->v1);
      bool added = bound.insert(f->v1).second;
      collect_vars(f->a, bound, free, all);
      if (added) bound.erase(f->v1);
      return;
    }
  }
}

std::set<std::string> free_vars(const FormulaPtr& f) {
  std::set<std::string> bound, free;
  collect_vars(f, bound, &free, nullptr);
  return free;
}

std::set<std::string> all_vars(const FormulaPtr& f) {
  std::set<std::string> bound, all;
  collect_vars(f, bound, nullptr, &all);
  return all;
}

bool contains_set_quantifier(const FormulaPtr& f) {
  switch (f->kind) {
    case K::ExistsSet: case K::ForallSet: return true;
    case K::Not: case K::Exists: case K::Forall:
      return contains_set_quantifier(f->a);
    case K::And: case K::Or: case K::Imp:
      return contains_set_quantifier(f->a) || contains_set_quantifier(f->b);
    default: return false;
  }
}

std::set<std::string> mentioned_labels(const FormulaPtr& f) {
  std::set<std::string> out;
  if (f->kind == K::Lab || f->kind == K::Edge) out.insert(f->label);
  if (f->kind == K::Path && !f->label.empty()) out.insert(f->label);
  if (f->a) for (auto& l : mentioned_labels(f->a)) out.insert(l);
  if (f->b) for (auto& l : mentioned_labels(f->b)) out.insert(l);
  return out;
}

std::string fresh_var(const FormulaPtr& f, const std::string& base) {
  std::set<std::string> used = all_vars(f);
  if (!used.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string cand = base + std::to_string(i);
    if (!used.count(cand)) return cand;
  }
}

FormulaPtr rename_free(const FormulaPtr& f, const std::string& from,
                       const std::string& to) {
  auto ren = [&](const std::string& v) { return v == from ? to : v; };
  switch (f->kind) {
    case K::True: case K::False: return f;
    case K::Lab: return F::lab(f->label, ren(f->v1));
    case K::Edge: return F::edge(f->label, ren(f->v1), ren(f->v2));
    case K::Eq: return F::eq(ren(f->v1), ren(f->v2));
    case K::In: return F::in(ren(f->v1), ren(f->v2));
    case K::Path: {
      Formula g = *f;
      g.v1 = ren(f->v1);
      g.v2 = ren(f->v2);
      return std::make_shared<Formula>(g);
    }
    case K::Not: return F::lnot(rename_free(f->a, from, to));
    case K::And: return F::land(rename_free(f->a, from, to), rename_free(f->b, from, to));
    case K::Or: return F::lor(rename_free(f->a, from, to), rename_free(f->b, from, to));
    case K::Imp: return F::imp(rename_free(f->a, from, to), rename_free(f->b, from, to));
    case K::Exists: case K::Forall: case K::ExistsSet: case K::ForallSet: {
      if (f->v1 == from) return f;  // shadowed, nothing free below
      FormulaPtr body = f->a;
      std::string bv = f->v1;
      if (bv == to) {  // avoid capture: rename the binder first
        std::string nb = fresh_var(F::land(f, F::eq(to, to)), bv);
        body = rename_free(body, bv, nb);
        bv = nb;
      }
      body = rename_free(body, from, to);
      Formula g = *f;
      g.v1 = bv;
      g.a = body;
      g.b = nullptr;
      return std::make_shared<Formula>(g);
    }
  }
  throw std::logic_error("bad formula kind");
}

FormulaPtr expand_paths(const FormulaPtr& f, const std::vector<std::string>& edge_labels) {
  switch (f->kind) {
    case K::Path: {
      std::vector<std::string> labs =
          f->label.empty() ? edge_labels : std::vector<std::string>{f->label};
      std::string X = fresh_var(f, "P");
      std::string z1 = fresh_var(f, "u");
      std::string z2 = fresh_var(f, "v");
      std::vector<FormulaPtr> steps;
      for (auto& l : labs) steps.push_back(F::edge(l, z1, z2));
      FormulaPtr closed = F::all(
          z1, F::all(z2, F::imp(F::land(F::in(z1, X), F::or_all(steps)), F::in(z2, X))));
      FormulaPtr reach = F::allS(
          X, F::imp(F::land(F::in(f->v1, X), closed), F::in(f->v2, X)));
      if (f->strict) reach = F::land(reach, F::lnot(F::eq(f->v1, f->v2)));
      return reach;
    }
    case K::Not: return F::lnot(expand_paths(f->a, edge_labels));
    case K::And: return F::land(expand_paths(f->a, edge_labels), expand_paths(f->b, edge_labels));
    case K::Or: return F::lor(expand_paths(f->a, edge_labels), expand_paths(f->b, edge_labels));
    case K::Imp: return F::imp(expand_paths(f->a, edge_labels), expand_paths(f->b, edge_labels));
    case K::Exists: case K::Forall: case K::ExistsSet: case K::ForallSet: {
      Formula g = *f;
      g.a = expand_paths(f->a, edge_labels);
      return std::make_shared<Formula>(g);
    }
    default: return f;
  }
}

// Quantifier relativization: node quantifiers range over nodes strictly
// before (left) or after (right) x, set quantifiers over subsets of that
// region. Atoms are untouched.
FormulaPtr relativize(const FormulaPtr& f, Side side, const std::string& x) {
  auto before = [&](const std::string& y) {
    return side == Side::left ? F::path_strict(y, x) : F::path_strict(x, y);
  };
  switch (f->kind) {
    case K::Not: return F::lnot(relativize(f->a, side, x));
    case K::And: return F::land(relativize(f->a, side, x), relativize(f->b, side, x));
    case K::Or: return F::lor(relativize(f->a, side, x), relativize(f->b, side, x));
    case K::Imp: return F::imp(relativize(f->a, side, x), relativize(f->b, side, x));
    case K::Exists: case K::Forall: {
      std::string bv = f->v1;
      FormulaPtr body = f->a;
      if (bv == x) {  // binder would capture the pivot; rename it away
        std::string nb = fresh_var(F::land(f, F::eq(x, x)), bv);
        body = rename_free(body, bv, nb);
        bv = nb;
      }
      body = relativize(body, side, x);
      return f->kind == K::Exists ? F::ex(bv, F::land(before(bv), body))
                                  : F::all(bv, F::imp(before(bv), body));
    }
    case K::ExistsSet: case K::ForallSet: {
      FormulaPtr body = relativize(f->a, side, x);
      std::string z = fresh_var(F::land(f, F::eq(x, x)), "w");
      FormulaPtr inside =
          F::all(z, F::imp(F::in(z, f->v1), before(z)));
      return f->kind == K::ExistsSet ? F::exS(f->v1, F::land(inside, body))
                                     : F::allS(f->v1, F::imp(inside, body));
    }
    default: return f;
  }
}

static FormulaPtr edge_some(const std::vector<std::string>& labels,
                            const std::string& x, const std::string& y) {
  std::vector<FormulaPtr> fs;
  for (auto& l : labels) fs.push_back(F::edge(l, x, y));
  return F::or_all(fs);
}

FormulaPtr string_shape(const std::vector<std::string>& edge_labels) {
  using namespace F;
  FormulaPtr nonempty = ex("s", tru());
  FormulaPtr initial =
      ex("s", all("t", land(path("s", "t"), lnot(path_strict("t", "s")))));
  FormulaPtr final_ =
      ex("s", all("t", land(path("t", "s"), lnot(path_strict("s", "t")))));
  FormulaPtr functional = all(
      "s", all("t", all("u", imp(land(edge_some(edge_labels, "s", "t"),
                                      edge_some(edge_labels, "s", "u")),
                                 eq("t", "u")))));
  FormulaPtr no_loop = all("s", lnot(edge_some(edge_labels, "s", "s")));
  // at most one label per consecutive pair
  std::vector<FormulaPtr> excl;
  for (size_t i = 0; i < edge_labels.size(); ++i)
    for (size_t j = i + 1; j < edge_labels.size(); ++j)
      excl.push_back(all("s", all("t", lnot(land(edge(edge_labels[i], "s", "t"),
                                                 edge(edge_labels[j], "s", "t"))))));
  return and_all({imp(nonempty, initial), imp(nonempty, final_), functional,
                  no_loop, and_all(excl)});
}

FormulaPtr tape_shape() {
  using namespace F;
  std::string star(1, kUnlabelled);
  std::string lm(1, kLeftMarker), rm(1, kRightMarker);
  FormulaPtr src_is_L =
      all("s", iff(lab(lm, "s"), lnot(ex("t", edge(star, "t", "s")))));
  FormulaPtr snk_is_R =
      all("s", iff(lab(rm, "s"), lnot(ex("t", edge(star, "s", "t")))));
  return and_all({string_shape({star}), ex("s", tru()), src_is_L, snk_is_R});
}

FormulaPtr egr_shape(const std::vector<std::string>& edge_labels) {
  using namespace F;
  FormulaPtr unlabelled = all("s", lab(std::string(1, kUnlabelled), "s"));
  return and_all({string_shape(edge_labels), ex("s", tru()), unlabelled});
}

FormulaPtr partition_of(const std::vector<std::string>& set_vars) {
  using namespace F;
  std::vector<FormulaPtr> any, excl;
  for (auto& X : set_vars) any.push_back(in("p", X));
  for (size_t i = 0; i < set_vars.size(); ++i)
    for (size_t j = i + 1; j < set_vars.size(); ++j)
      excl.push_back(lnot(land(in("p", set_vars[i]), in("p", set_vars[j]))));
  return all("p", land(or_all(any), and_all(excl)));
}

}  // namespace twt
