#include "twt/transduction.hpp"

#include <cctype>
#include <cstdint>
#include <sstream>
#include <stdexcept>

#include "twt/eval.hpp"

namespace twt {

namespace {

bool plain_token(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '/') return false;
  return true;
}

void check_labels(const std::vector<std::string>& ls, const std::string& what) {
  std::set<std::string> seen;
  for (const auto& l : ls) {
    if (!plain_token(l)) throw ParseError("bad " + what + " label: '" + l + "'");
    if (!seen.insert(l).second)
      throw ParseError("duplicate " + what + " label: " + l);
  }
}

void check_formula_vars(const FormulaPtr& f, const std::set<std::string>& allowed,
                        const std::string& where) {
  for (const auto& v : free_vars(f))
    if (!allowed.count(v))
      throw ParseError("free variable " + v + " not allowed in " + where);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

std::string join(const std::vector<std::string>& ts) {
  std::string out;
  for (size_t i = 0; i < ts.size(); ++i) {
    if (i) out += ' ';
    out += ts[i];
  }
  return out;
}

// Splits "n1 n2 / e1 e2" into node and edge label lists.
std::pair<std::vector<std::string>, std::vector<std::string>> parse_label_line(
    const std::vector<std::string>& toks) {
  std::vector<std::string> nodes, edges;
  bool after = false;
  for (const auto& t : toks) {
    if (t == "/") {
      if (after) throw ParseError("two '/' separators in label line");
      after = true;
    } else {
      (after ? edges : nodes).push_back(t);
    }
  }
  if (!after) throw ParseError("label line needs a '/' separator");
  return {nodes, edges};
}

const char* enc_name(Encoding e) {
  switch (e) {
    case Encoding::ngr: return "ngr";
    case Encoding::egr: return "egr";
    case Encoding::tape: return "tape";
  }
  return "?";
}

Encoding parse_enc(const std::string& s) {
  if (s == "ngr") return Encoding::ngr;
  if (s == "egr") return Encoding::egr;
  if (s == "tape") return Encoding::tape;
  throw ParseError("unknown encoding: " + s);
}

// Every node may appear in a parameter set or not, independently, so the
// valuation count is 2^(params * nodes); keep that within a sane bound.
constexpr int kParamBitsLimit = 22;

// A line is a comment when its first non-blank character is '#'. There is no
// inline comment syntax: '#' is a legitimate edge label.
bool comment_line(const std::string& line) {
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '#';
  }
  return false;
}

std::vector<std::string> labels_of(const std::set<std::string>& s) {
  return {s.begin(), s.end()};
}

FormulaPtr edge_some(const std::vector<std::string>& labels,
                     const std::string& x, const std::string& y) {
  std::vector<FormulaPtr> ds;
  for (const auto& l : labels) ds.push_back(F::edge(l, x, y));
  return F::or_all(ds);
}

}  // namespace

void MsoTransduction::validate() const {
  if (!plain_token(name)) throw ParseError("transduction needs a plain name");
  if (copies.empty()) throw ParseError(name + ": needs at least one copy");
  std::set<std::string> copy_set;
  for (const auto& c : copies) {
    if (!plain_token(c)) throw ParseError(name + ": bad copy name '" + c + "'");
    if (!copy_set.insert(c).second)
      throw ParseError(name + ": duplicate copy " + c);
  }
  std::set<std::string> param_set;
  for (const auto& p : params) {
    if (!is_set_var(p))
      throw ParseError(name + ": parameter " + p + " must be a set variable");
    if (!param_set.insert(p).second)
      throw ParseError(name + ": duplicate parameter " + p);
  }
  check_labels(in_node_labels, name + " input node");
  check_labels(in_edge_labels, name + " input edge");
  check_labels(out_node_labels, name + " output node");
  check_labels(out_edge_labels, name + " output edge");

  if (!domain) throw ParseError(name + ": missing domain formula");
  check_formula_vars(domain, param_set, name + " domain");

  std::set<std::string> node_ok = param_set, edge_ok = param_set;
  node_ok.insert("x");
  edge_ok.insert("x");
  edge_ok.insert("y");
  std::set<std::string> out_nl(out_node_labels.begin(), out_node_labels.end());
  std::set<std::string> out_el(out_edge_labels.begin(), out_edge_labels.end());
  for (const auto& [key, f] : node_formulas) {
    const auto& [c, l] = key;
    if (!copy_set.count(c))
      throw ParseError(name + ": node formula for unknown copy " + c);
    if (!out_nl.count(l))
      throw ParseError(name + ": node formula for undeclared label " + l);
    if (!f) throw ParseError(name + ": null node formula");
    check_formula_vars(f, node_ok, name + " node formula " + c + "/" + l);
  }
  for (const auto& [key, f] : edge_formulas) {
    const auto& [c1, c2, l] = key;
    if (!copy_set.count(c1) || !copy_set.count(c2))
      throw ParseError(name + ": edge formula for unknown copy");
    if (!out_el.count(l))
      throw ParseError(name + ": edge formula for undeclared label " + l);
    if (!f) throw ParseError(name + ": null edge formula");
    check_formula_vars(f, edge_ok,
                       name + " edge formula " + c1 + "/" + c2 + "/" + l);
  }
}

std::string MsoTransduction::to_text() const {
  std::ostringstream out;
  out << "transduction " << name << "\n";
  if (!params.empty()) out << "params " << join(params) << "\n";
  out << "copies " << join(copies) << "\n";
  out << "input-labels " << join(in_node_labels) << " / "
      << join(in_edge_labels) << "\n";
  out << "output-labels " << join(out_node_labels) << " / "
      << join(out_edge_labels) << "\n";
  out << "domain " << twt::to_text(domain) << "\n";
  for (const auto& [key, f] : node_formulas)
    out << "node " << key.first << " " << key.second << " " << twt::to_text(f)
        << "\n";
  for (const auto& [key, f] : edge_formulas)
    out << "edge " << std::get<0>(key) << " " << std::get<1>(key) << " "
        << std::get<2>(key) << " " << twt::to_text(f) << "\n";
  return out.str();
}

MsoTransduction MsoTransduction::from_text(const std::string& text) {
  MsoTransduction t;
  bool saw_name = false, saw_copies = false, saw_in = false, saw_out = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (comment_line(line)) continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0];
    std::vector<std::string> rest(toks.begin() + 1, toks.end());
    if (head == "transduction") {
      if (rest.size() != 1) throw ParseError("transduction line needs a name");
      t.name = rest[0];
      saw_name = true;
    } else if (head == "params") {
      t.params = rest;
    } else if (head == "copies") {
      t.copies = rest;
      saw_copies = true;
    } else if (head == "input-labels" || head == "output-labels") {
      auto [nl, el] = parse_label_line(rest);
      if (head == "input-labels") {
        t.in_node_labels = nl;
        t.in_edge_labels = el;
        saw_in = true;
      } else {
        t.out_node_labels = nl;
        t.out_edge_labels = el;
        saw_out = true;
      }
    } else if (head == "domain") {
      t.domain = parse_formula(join(rest));
    } else if (head == "node") {
      if (rest.size() < 3) throw ParseError("node line: copy label formula");
      auto f = parse_formula(
          join({rest.begin() + 2, rest.end()}));
      auto key = std::make_pair(rest[0], rest[1]);
      if (t.node_formulas.count(key))
        throw ParseError("duplicate node formula " + rest[0] + "/" + rest[1]);
      t.node_formulas[key] = f;
    } else if (head == "edge") {
      if (rest.size() < 4)
        throw ParseError("edge line: copy copy label formula");
      auto f = parse_formula(
          join({rest.begin() + 3, rest.end()}));
      auto key = std::make_tuple(rest[0], rest[1], rest[2]);
      if (t.edge_formulas.count(key))
        throw ParseError("duplicate edge formula " + rest[0] + "/" + rest[1] +
                         "/" + rest[2]);
      t.edge_formulas[key] = f;
    } else {
      throw ParseError("unknown transduction directive: " + head);
    }
  }
  if (!saw_name || !saw_copies || !saw_in || !saw_out || !t.domain)
    throw ParseError("transduction file missing a required section");
  t.validate();
  return t;
}

std::vector<Graph> apply(const MsoTransduction& t, const Graph& input) {
  t.validate();
  std::set<std::string> in_nl(t.in_node_labels.begin(), t.in_node_labels.end());
  std::set<std::string> in_el(t.in_edge_labels.begin(), t.in_edge_labels.end());
  for (NodeId v : input.nodes())
    if (!in_nl.count(input.label(v)))
      throw std::invalid_argument(t.name + ": input node label '" +
                                  input.label(v) + "' outside signature");
  for (const Edge& e : input.edges())
    if (!in_el.count(e.label))
      throw std::invalid_argument(t.name + ": input edge label '" + e.label +
                                  "' outside signature");

  const auto& ns = input.nodes();
  const size_t n = ns.size();
  const size_t np = t.params.size();
  if (np * n > kParamBitsLimit)
    throw std::invalid_argument(t.name +
                                ": too many parameter valuations to enumerate");

  Evaluator ev(input);
  std::vector<Graph> outputs;
  const uint64_t total = uint64_t{1} << (np * n);
  for (uint64_t mask = 0; mask < total; ++mask) {
    Env env;
    for (size_t i = 0; i < np; ++i) {
      std::set<NodeId>& s = env.sets[t.params[i]];
      for (size_t j = 0; j < n; ++j)
        if (mask >> (i * n + j) & 1) s.insert(ns[j]);
    }
    if (!ev.eval(t.domain, env)) continue;

    // Kept nodes per copy, with the unique output label that holds.
    std::map<std::pair<std::string, NodeId>, std::string> kept;
    for (const auto& c : t.copies) {
      for (NodeId v : ns) {
        Env e1 = env;
        e1.nodes["x"] = v;
        std::string chosen;
        int hits = 0;
        for (const auto& l : t.out_node_labels) {
          auto it = t.node_formulas.find({c, l});
          if (it == t.node_formulas.end()) continue;
          if (ev.eval(it->second, e1)) {
            ++hits;
            chosen = l;
          }
        }
        if (hits == 1) kept[{c, v}] = chosen;
      }
    }

    Graph out;
    std::map<std::pair<std::string, NodeId>, NodeId> id_of;
    NodeId next_id = 0;
    for (const auto& c : t.copies)
      for (NodeId v : ns) {
        auto it = kept.find({c, v});
        if (it == kept.end()) continue;
        id_of[{c, v}] = next_id;
        out.add_node(next_id, it->second);
        ++next_id;
      }
    for (const auto& [key, f] : t.edge_formulas) {
      const auto& [c1, c2, gamma] = key;
      for (NodeId x : ns) {
        if (!kept.count({c1, x})) continue;
        for (NodeId y : ns) {
          if (!kept.count({c2, y})) continue;
          Env e2 = env;
          e2.nodes["x"] = x;
          e2.nodes["y"] = y;
          if (ev.eval(f, e2))
            out.add_edge(id_of[{c1, x}], gamma, id_of[{c2, y}]);
        }
      }
    }
    outputs.push_back(std::move(out));
  }
  return outputs;
}

std::set<std::string> apply_string(const MsoTransduction& t,
                                   const std::string& w, Encoding in_enc,
                                   Encoding out_enc) {
  std::set<std::string> res;
  for (const Graph& g : apply(t, encode(w, in_enc))) {
    try {
      res.insert(decode(g, out_enc));
    } catch (const DecodeError&) {
      // output graph is not a string of the requested encoding; skip
    }
  }
  return res;
}

MsoTransduction transduction_union(const MsoTransduction& a,
                                   const MsoTransduction& b) {
  a.validate();
  b.validate();
  MsoTransduction u;
  u.name = a.name + "+" + b.name;

  // Rename b's parameters away from a's, then add a fresh selector.
  std::set<std::string> taken(a.params.begin(), a.params.end());
  std::map<std::string, std::string> ren;
  for (const auto& p : b.params) {
    std::string q = p;
    int k = 0;
    while (taken.count(q)) q = p + std::to_string(k++);
    ren[p] = q;
    taken.insert(q);
  }
  std::string sel = "U";
  {
    int k = 0;
    while (taken.count(sel)) sel = "U" + std::to_string(k++);
    taken.insert(sel);
  }
  auto rename_b = [&](FormulaPtr f) {
    for (const auto& [from, to] : ren)
      if (from != to) f = rename_free(f, from, to);
    return f;
  };

  u.params = a.params;
  for (const auto& p : b.params) u.params.push_back(ren[p]);
  u.params.push_back(sel);

  auto merge = [](const std::vector<std::string>& xs,
                  const std::vector<std::string>& ys) {
    std::vector<std::string> out = xs;
    std::set<std::string> seen(xs.begin(), xs.end());
    for (const auto& y : ys)
      if (seen.insert(y).second) out.push_back(y);
    return out;
  };
  u.in_node_labels = merge(a.in_node_labels, b.in_node_labels);
  u.in_edge_labels = merge(a.in_edge_labels, b.in_edge_labels);
  u.out_node_labels = merge(a.out_node_labels, b.out_node_labels);
  u.out_edge_labels = merge(a.out_edge_labels, b.out_edge_labels);

  // Selector full = first branch, selector empty = second. On the empty
  // input both guards hold, but there both branches output the empty graph.
  std::string gv = "g";
  FormulaPtr guard_a = F::all(gv, F::in(gv, sel));
  FormulaPtr guard_b = F::all(gv, F::lnot(F::in(gv, sel)));
  u.domain = F::lor(F::land(guard_a, a.domain),
                    F::land(guard_b, rename_b(b.domain)));

  for (const auto& c : a.copies) u.copies.push_back("a." + c);
  for (const auto& c : b.copies) u.copies.push_back("b." + c);
  for (const auto& [key, f] : a.node_formulas)
    u.node_formulas[{"a." + key.first, key.second}] = F::land(guard_a, f);
  for (const auto& [key, f] : b.node_formulas)
    u.node_formulas[{"b." + key.first, key.second}] =
        F::land(guard_b, rename_b(f));
  for (const auto& [key, f] : a.edge_formulas)
    u.edge_formulas[{"a." + std::get<0>(key), "a." + std::get<1>(key),
                     std::get<2>(key)}] = F::land(guard_a, f);
  for (const auto& [key, f] : b.edge_formulas)
    u.edge_formulas[{"b." + std::get<0>(key), "b." + std::get<1>(key),
                     std::get<2>(key)}] = F::land(guard_b, rename_b(f));
  u.validate();
  return u;
}

MsoTransduction relabelling_to_mso(
    const std::map<std::string, std::set<std::string>>& allowed,
    const std::vector<std::string>& edge_labels) {
  MsoTransduction t;
  t.name = "relabel";
  t.copies = {"1"};
  std::set<std::string> outs;
  for (const auto& [sigma, taus] : allowed) {
    t.in_node_labels.push_back(sigma);
    outs.insert(taus.begin(), taus.end());
  }
  t.out_node_labels = labels_of(outs);
  t.in_edge_labels = edge_labels;
  t.out_edge_labels = edge_labels;
  for (const auto& tau : t.out_node_labels) t.params.push_back("X" + tau);

  std::vector<FormulaPtr> dom = {partition_of(t.params)};
  for (const auto& [sigma, taus] : allowed) {
    std::vector<FormulaPtr> choice;
    for (const auto& tau : taus) choice.push_back(F::in("p", "X" + tau));
    dom.push_back(
        F::all("p", F::imp(F::lab(sigma, "p"), F::or_all(choice))));
  }
  t.domain = F::and_all(dom);
  for (const auto& tau : t.out_node_labels)
    t.node_formulas[{"1", tau}] = F::in("x", "X" + tau);
  for (const auto& g : edge_labels)
    t.edge_formulas[{"1", "1", g}] = F::edge(g, "x", "y");
  t.validate();
  return t;
}

MsoTransduction edge_relabelling_to_mso(
    const std::map<std::string, std::set<std::string>>& allowed) {
  MsoTransduction t;
  t.name = "edge-relabel";
  t.copies = {"1"};
  t.in_node_labels = {"*"};
  t.out_node_labels = {"*"};
  std::set<std::string> outs;
  for (const auto& [sigma, taus] : allowed) {
    t.in_edge_labels.push_back(sigma);
    outs.insert(taus.begin(), taus.end());
  }
  t.out_edge_labels = labels_of(outs);
  for (const auto& tau : t.out_edge_labels) t.params.push_back("X" + tau);

  std::vector<FormulaPtr> dom = {partition_of(t.params)};
  for (const auto& [sigma, taus] : allowed) {
    std::vector<FormulaPtr> choice;
    for (const auto& tau : taus) choice.push_back(F::in("p", "X" + tau));
    dom.push_back(F::all(
        "p", F::imp(F::ex("q", F::edge(sigma, "p", "q")), F::or_all(choice))));
  }
  t.domain = F::and_all(dom);
  t.node_formulas[{"1", "*"}] = F::tru();
  for (const auto& tau : t.out_edge_labels) {
    std::vector<FormulaPtr> cases;
    for (const auto& [sigma, taus] : allowed)
      if (taus.count(tau))
        cases.push_back(F::land(F::edge(sigma, "x", "y"), F::in("x", "X" + tau)));
    t.edge_formulas[{"1", "1", tau}] = F::or_all(cases);
  }
  t.validate();
  return t;
}

MsoTransduction t_edges_to_nodes(const std::string& sigma) {
  MsoTransduction t;
  t.name = "ed2nd";
  t.copies = {"1"};
  t.in_node_labels = {"*"};
  t.out_edge_labels = {"*"};
  for (char c : sigma) {
    t.in_edge_labels.push_back(std::string(1, c));
    t.out_node_labels.push_back(std::string(1, c));
  }
  t.domain = egr_shape(t.in_edge_labels);
  for (const auto& s : t.out_node_labels)
    t.node_formulas[{"1", s}] = F::ex("y", F::edge(s, "x", "y"));
  t.edge_formulas[{"1", "1", "*"}] = edge_some(t.in_edge_labels, "x", "y");
  t.validate();
  return t;
}

MsoTransduction t_nodes_to_edges(const std::string& sigma) {
  MsoTransduction t;
  t.name = "nd2ed";
  t.copies = {"1", "2"};
  t.in_edge_labels = {"*"};
  t.out_node_labels = {"*"};
  for (char c : sigma) {
    t.in_node_labels.push_back(std::string(1, c));
    t.out_edge_labels.push_back(std::string(1, c));
  }
  // The extra end node is spawned from the last letter, so the empty word
  // (no nodes at all) has no image here.
  t.domain = F::land(string_shape({"*"}), F::ex("p", F::tru()));
  t.node_formulas[{"1", "*"}] = F::tru();
  t.node_formulas[{"2", "*"}] = F::lnot(F::ex("y", F::edge("*", "x", "y")));
  for (const auto& s : t.out_edge_labels) {
    t.edge_formulas[{"1", "1", s}] =
        F::land(F::edge("*", "x", "y"), F::lab(s, "x"));
    t.edge_formulas[{"1", "2", s}] = F::land(F::eq("x", "y"), F::lab(s, "x"));
  }
  t.validate();
  return t;
}

MsoTransduction t_tape_to_edges(const std::string& sigma) {
  MsoTransduction t;
  t.name = "tape2ed";
  t.copies = {"1"};
  t.in_node_labels = {"L", "R"};
  t.in_edge_labels = {"*"};
  t.out_node_labels = {"*"};
  for (char c : sigma) {
    t.in_node_labels.push_back(std::string(1, c));
    t.out_edge_labels.push_back(std::string(1, c));
  }
  t.domain = tape_shape();
  // Every tape position except the right marker becomes an output node; the
  // letter on the target of a tape edge becomes the edge label.
  t.node_formulas[{"1", "*"}] = F::lnot(F::lab("R", "x"));
  for (const auto& s : t.out_edge_labels)
    t.edge_formulas[{"1", "1", s}] =
        F::land(F::edge("*", "x", "y"), F::lab(s, "y"));
  t.validate();
  return t;
}

MsoTransduction t_mark_ends(const std::string& sigma) {
  MsoTransduction t;
  t.name = "markends";
  t.copies = {"0", "1", "2"};
  t.in_node_labels = {"*"};
  t.out_node_labels = {"*"};
  for (char c : sigma) t.in_edge_labels.push_back(std::string(1, c));
  t.out_edge_labels = t.in_edge_labels;
  t.out_edge_labels.push_back("L");
  t.out_edge_labels.push_back("R");
  t.domain = egr_shape(t.in_edge_labels);
  FormulaPtr no_pred = F::lnot(F::ex("z", edge_some(t.in_edge_labels, "z", "x")));
  FormulaPtr no_succ = F::lnot(F::ex("z", edge_some(t.in_edge_labels, "x", "z")));
  t.node_formulas[{"0", "*"}] = no_pred;
  t.node_formulas[{"1", "*"}] = F::tru();
  t.node_formulas[{"2", "*"}] = no_succ;
  t.edge_formulas[{"0", "1", "L"}] = F::land(F::eq("x", "y"), no_pred);
  t.edge_formulas[{"1", "2", "R"}] = F::land(F::eq("x", "y"), no_succ);
  for (const auto& g : t.in_edge_labels)
    t.edge_formulas[{"1", "1", g}] = F::edge(g, "x", "y");
  t.validate();
  return t;
}

std::string Pipeline::to_text() const {
  std::ostringstream out;
  out << "pipeline " << name << "\n";
  out << "in-enc " << enc_name(in_enc) << "\n";
  out << "out-enc " << enc_name(out_enc) << "\n";
  for (const auto& s : stages) out << "\n" << s.to_text();
  return out.str();
}

Pipeline Pipeline::from_text(const std::string& text) {
  Pipeline p;
  bool saw_name = false;
  std::istringstream in(text);
  std::string line, block;
  auto flush = [&] {
    if (!block.empty()) p.stages.push_back(MsoTransduction::from_text(block));
    block.clear();
  };
  bool in_block = false;
  while (std::getline(in, line)) {
    if (comment_line(line)) continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "pipeline") {
      if (toks.size() != 2) throw ParseError("pipeline line needs a name");
      p.name = toks[1];
      saw_name = true;
    } else if (toks[0] == "in-enc" && !in_block) {
      if (toks.size() != 2) throw ParseError("in-enc needs one encoding");
      p.in_enc = parse_enc(toks[1]);
    } else if (toks[0] == "out-enc" && !in_block) {
      if (toks.size() != 2) throw ParseError("out-enc needs one encoding");
      p.out_enc = parse_enc(toks[1]);
    } else if (toks[0] == "transduction") {
      flush();
      in_block = true;
      block = line + "\n";
    } else if (in_block) {
      block += line + "\n";
    } else {
      throw ParseError("unknown pipeline directive: " + toks[0]);
    }
  }
  flush();
  if (!saw_name) throw ParseError("pipeline file missing its name line");
  return p;
}

std::vector<Graph> apply_pipeline(const Pipeline& p, const Graph& input) {
  std::map<std::string, Graph> cur;
  cur.emplace(input.canonical_key(), input);
  for (const auto& stage : p.stages) {
    std::map<std::string, Graph> next;
    for (const auto& [key, g] : cur)
      for (Graph& out : apply(stage, g)) {
        std::string k = out.canonical_key();
        next.emplace(std::move(k), std::move(out));
      }
    cur = std::move(next);
  }
  std::vector<Graph> res;
  for (auto& [key, g] : cur) res.push_back(std::move(g));
  return res;
}

std::set<std::string> apply_pipeline_string(const Pipeline& p,
                                            const std::string& w) {
  std::set<std::string> res;
  for (const Graph& g : apply_pipeline(p, encode(w, p.in_enc))) {
    try {
      res.insert(decode(g, p.out_enc));
    } catch (const DecodeError&) {
    }
  }
  return res;
}

}  // namespace twt
