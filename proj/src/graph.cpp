#include "twt/graph.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace twt {

Alphabet::Alphabet(const std::string& symbols) {
  std::set<char> seen;
  for (char c : symbols) {
    if (c == ' ') continue;
    if (c == kLeftMarker || c == kRightMarker || c == kUnlabelled)
      throw ParseError(std::string("reserved symbol in alphabet: ") + c);
    if (!seen.insert(c).second)
      throw ParseError(std::string("duplicate symbol in alphabet: ") + c);
  }
  syms_.assign(seen.begin(), seen.end());
}

bool Alphabet::contains(char c) const {
  return syms_.find(c) != std::string::npos;
}

std::string Alphabet::with_markers() const {
  return syms_ + kLeftMarker + kRightMarker;
}

void Graph::add_node(NodeId id, const std::string& label) {
  if (labels_.count(id)) throw ParseError("duplicate node id " + std::to_string(id));
  order_.push_back(id);
  labels_[id] = label;
}

void Graph::add_edge(NodeId src, const std::string& label, NodeId dst) {
  if (!has_node(src) || !has_node(dst))
    throw ParseError("edge endpoint not declared: " + std::to_string(src) + " -> " +
                     std::to_string(dst));
  edges_.insert({src, label, dst});
}

const std::string& Graph::label(NodeId id) const {
  auto it = labels_.find(id);
  if (it == labels_.end()) throw ParseError("unknown node id " + std::to_string(id));
  return it->second;
}

std::set<std::string> Graph::node_label_set() const {
  std::set<std::string> out;
  for (auto& [id, lab] : labels_) out.insert(lab);
  return out;
}

std::set<std::string> Graph::edge_label_set() const {
  std::set<std::string> out;
  for (auto& e : edges_) out.insert(e.label);
  return out;
}

std::string Graph::to_text() const {
  std::ostringstream os;
  os << "graph\n";
  for (NodeId id : order_) os << "node " << id << ' ' << labels_.at(id) << '\n';
  for (auto& e : edges_) os << "edge " << e.src << ' ' << e.label << ' ' << e.dst << '\n';
  return os.str();
}

Graph Graph::from_text(const std::string& text) {
  Graph g;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;  // blank line
    if (kw == "//") continue;
    if (!header) {
      if (kw != "graph") throw ParseError("expected 'graph' header, got: " + line);
      header = true;
      continue;
    }
    if (kw == "node") {
      NodeId id;
      std::string lab;
      if (!(ls >> id >> lab)) throw ParseError("bad node line: " + line);
      g.add_node(id, lab);
    } else if (kw == "edge") {
      NodeId src, dst;
      std::string lab;
      if (!(ls >> src >> lab >> dst)) throw ParseError("bad edge line: " + line);
      g.add_edge(src, lab, dst);
    } else {
      throw ParseError("unknown graph line: " + line);
    }
  }
  if (!header) throw ParseError("missing 'graph' header");
  return g;
}

// Canonical renumbering: iteratively refine a structural signature for every
// node (label + signatures across in/out edges), then renumber in signature
// order. Sources come first because their refined signatures embed the
// whole reachable shape; for the line-like graphs this project manipulates
// the order is unique.
Graph Graph::canonical() const {
  std::map<NodeId, std::string> sig;
  for (NodeId id : order_) sig[id] = labels_.at(id);
  size_t rounds = order_.size() < 8 ? order_.size() + 1 : 8;
  for (size_t r = 0; r < rounds; ++r) {
    std::map<NodeId, std::string> next;
    for (NodeId id : order_) {
      std::vector<std::string> outs, ins;
      for (auto& e : edges_) {
        if (e.src == id) outs.push_back(e.label + ">" + sig.at(e.dst));
        if (e.dst == id) ins.push_back(e.label + "<" + sig.at(e.src));
      }
      std::sort(outs.begin(), outs.end());
      std::sort(ins.begin(), ins.end());
      std::string s = "(" + sig.at(id);
      for (auto& o : outs) s += "|" + o;
      s += ";";
      for (auto& i : ins) s += "|" + i;
      next[id] = s + ")";
    }
    sig = std::move(next);
  }
  std::vector<NodeId> ord = order_;
  std::stable_sort(ord.begin(), ord.end(),
                   [&](NodeId a, NodeId b) { return sig.at(a) < sig.at(b); });
  std::map<NodeId, NodeId> renum;
  for (size_t i = 0; i < ord.size(); ++i) renum[ord[i]] = (NodeId)i;
  Graph out;
  for (size_t i = 0; i < ord.size(); ++i) out.add_node((NodeId)i, labels_.at(ord[i]));
  for (auto& e : edges_) out.add_edge(renum.at(e.src), e.label, renum.at(e.dst));
  return out;
}

Graph encode_ngr(const std::string& w) {
  Graph g;
  for (size_t i = 0; i < w.size(); ++i) g.add_node((NodeId)i, std::string(1, w[i]));
  for (size_t i = 0; i + 1 < w.size(); ++i)
    g.add_edge((NodeId)i, std::string(1, kUnlabelled), (NodeId)(i + 1));
  return g;
}

Graph encode_egr(const std::string& w) {
  Graph g;
  for (size_t i = 0; i <= w.size(); ++i)
    g.add_node((NodeId)i, std::string(1, kUnlabelled));
  for (size_t i = 0; i < w.size(); ++i)
    g.add_edge((NodeId)i, std::string(1, w[i]), (NodeId)(i + 1));
  return g;
}

Graph encode_tape(const std::string& w) {
  return encode_ngr(kLeftMarker + w + kRightMarker);
}

Graph encode(const std::string& w, Encoding enc) {
  switch (enc) {
    case Encoding::ngr: return encode_ngr(w);
    case Encoding::egr: return encode_egr(w);
    case Encoding::tape: return encode_tape(w);
  }
  throw std::logic_error("bad encoding");
}

// Walks the unique source-to-sink chain, checking linearity as it goes.
std::vector<NodeId> chain_nodes(const Graph& g) {
  std::map<NodeId, int> indeg, outdeg;
  std::map<NodeId, NodeId> succ;
  for (auto& e : g.edges()) {
    outdeg[e.src]++;
    indeg[e.dst]++;
    succ[e.src] = e.dst;
  }
  for (auto& [id, d] : outdeg)
    if (d > 1) throw DecodeError("node has several outgoing edges");
  for (auto& [id, d] : indeg)
    if (d > 1) throw DecodeError("node has several incoming edges");
  std::vector<NodeId> sources;
  for (NodeId id : g.nodes())
    if (!indeg.count(id)) sources.push_back(id);
  if (g.node_count() == 0) return {};
  if (sources.size() != 1) throw DecodeError("graph does not have a unique source");
  std::vector<NodeId> chain{sources[0]};
  while (succ.count(chain.back())) chain.push_back(succ.at(chain.back()));
  if (chain.size() != g.node_count())
    throw DecodeError("graph is not a single chain");
  return chain;
}

std::string decode(const Graph& g, Encoding enc) {
  if (enc == Encoding::tape) {
    std::string s = decode(g, Encoding::ngr);
    if (s.size() < 2 || s.front() != kLeftMarker || s.back() != kRightMarker)
      throw DecodeError("tape string is not of the form L...R");
    return s.substr(1, s.size() - 2);
  }
  std::vector<NodeId> chain = chain_nodes(g);
  std::string w;
  if (enc == Encoding::ngr) {
    for (NodeId id : chain) {
      const std::string& lab = g.label(id);
      if (lab.size() != 1 || lab[0] == kUnlabelled)
        throw DecodeError("node label is not a symbol: " + lab);
      w += lab;
    }
    for (auto& e : g.edges())
      if (e.label != std::string(1, kUnlabelled))
        throw DecodeError("labelled edge in a node-labelled string graph");
  } else {
    if (chain.empty()) throw DecodeError("edge-labelled string graph cannot be empty");
    for (NodeId id : chain)
      if (g.label(id) != std::string(1, kUnlabelled))
        throw DecodeError("labelled node in an edge-labelled string graph");
    for (size_t i = 0; i + 1 < chain.size(); ++i) {
      for (auto& e : g.edges())
        if (e.src == chain[i]) {
          if (e.label.size() != 1 || e.label[0] == kUnlabelled)
            throw DecodeError("edge label is not a symbol: " + e.label);
          w += e.label;
        }
    }
  }
  return w;
}

bool is_node_var(const std::string& v) {
  return !v.empty() && std::islower((unsigned char)v[0]);
}
bool is_set_var(const std::string& v) {
  return !v.empty() && std::isupper((unsigned char)v[0]);
}

std::string ValuatedGraph::composite_label(NodeId id) const {
  std::string s = graph.label(id);
  if (!vars.empty()) {
    s += ':';
    for (auto& v : vars) s += nu.at(v).count(id) ? '1' : '0';
  }
  return s;
}

ValuatedGraph valuate(const Graph& g,
                      const std::map<std::string, std::set<NodeId>>& nu) {
  ValuatedGraph vg;
  vg.graph = g;
  for (auto& [v, s] : nu) {
    vg.vars.push_back(v);
    for (NodeId id : s)
      if (!g.has_node(id))
        throw ParseError("valuation mentions unknown node " + std::to_string(id));
    if (is_node_var(v) && s.size() != 1)
      throw ParseError("node variable " + v + " must be valuated by exactly one node");
    vg.nu[v] = s;
  }
  return vg;
}

}  // namespace twt
