#pragma once
// Directed labelled graphs used to encode strings, plus the two classical
// encodings: node-labelled (one node per letter) and edge-labelled (one edge
// per letter, one extra node at the end).

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace twt {

using NodeId = int;

// Reserved rendering tokens. 'L' and 'R' stand for the left/right end
// markers of a machine tape, '*' is the "no label" token. None of them may
// appear in a plain input/output alphabet.
inline constexpr char kLeftMarker = 'L';
inline constexpr char kRightMarker = 'R';
inline constexpr char kUnlabelled = '*';

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A plain alphabet: an ordered set of single-character symbols.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(const std::string& symbols);

  bool contains(char c) const;
  const std::string& symbols() const { return syms_; }
  size_t size() const { return syms_.size(); }

  // Symbols plus the tape end markers, in that order. Handy for look-around
  // languages and tape formulas.
  std::string with_markers() const;

 private:
  std::string syms_;  // sorted, unique
};

struct Edge {
  NodeId src;
  std::string label;
  NodeId dst;
  auto operator<=>(const Edge&) const = default;
};

// Node/edge labelled directed graph. Node ids are arbitrary ints but the
// node list keeps insertion order, which all encoders use as position order.
class Graph {
 public:
  void add_node(NodeId id, const std::string& label);
  void add_edge(NodeId src, const std::string& label, NodeId dst);

  bool has_node(NodeId id) const { return labels_.count(id) != 0; }
  const std::string& label(NodeId id) const;
  const std::vector<NodeId>& nodes() const { return order_; }
  const std::set<Edge>& edges() const { return edges_; }
  size_t node_count() const { return order_.size(); }
  bool has_edge(NodeId src, const std::string& label, NodeId dst) const {
    return edges_.count({src, label, dst}) != 0;
  }

  std::set<std::string> node_label_set() const;
  std::set<std::string> edge_label_set() const;

  std::string to_text() const;
  static Graph from_text(const std::string& text);

  // Renumbers nodes 0..n-1 by a deterministic structural traversal so that
  // graphs built with different id schemes compare equal when they have the
  // same shape and labels.
  Graph canonical() const;
  std::string canonical_key() const { return canonical().to_text(); }

  bool operator==(const Graph& o) const = default;

 private:
  std::vector<NodeId> order_;
  std::map<NodeId, std::string> labels_;
  std::set<Edge> edges_;
};

enum class Encoding { ngr, egr, tape };

// encode_ngr("ab"): two nodes labelled a,b joined by a '*' edge.
// encode_ngr("") is the empty graph.
Graph encode_ngr(const std::string& w);
// encode_egr("ab"): three unlabelled nodes, edges labelled a then b.
// encode_egr("") is a single unlabelled node.
Graph encode_egr(const std::string& w);
// encode_tape(w) = encode_ngr(L + w + R).
Graph encode_tape(const std::string& w);
Graph encode(const std::string& w, Encoding enc);

// Inverse of the encoders; throws DecodeError when the graph is not a
// string shape for the requested encoding (branching, cycles, bad labels,
// several sources, ...).
std::string decode(const Graph& g, Encoding enc);

// Nodes of a chain-shaped graph in chain order; throws DecodeError when the
// graph is not a single chain (label checks are left to decode).
std::vector<NodeId> chain_nodes(const Graph& g);

// A graph together with a valuation of logical variables by node sets.
// Lower-case variables denote single nodes and must be valuated by
// exactly one node; upper-case variables denote node sets.
struct ValuatedGraph {
  Graph graph;
  std::vector<std::string> vars;                 // lexicographically sorted
  std::map<std::string, std::set<NodeId>> nu;    // valuation

  // Composite label of a node: base label plus a 0/1 flag per variable.
  std::string composite_label(NodeId id) const;
};

ValuatedGraph valuate(const Graph& g,
                      const std::map<std::string, std::set<NodeId>>& nu);

bool is_node_var(const std::string& v);
bool is_set_var(const std::string& v);

}  // namespace twt
