#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "twt/transduction.hpp"

using namespace twt;

namespace {

std::vector<std::string> words(const std::string& sigma, int maxlen,
                               int minlen = 0) {
  std::vector<std::string> out;
  std::vector<std::string> layer = {""};
  for (int len = 0; len <= maxlen; ++len) {
    if (len >= minlen)
      for (const auto& w : layer) out.push_back(w);
    std::vector<std::string> next;
    for (const auto& w : layer)
      for (char c : sigma) next.push_back(w + c);
    layer = next;
  }
  return out;
}

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(FIXTURES_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reference for the doubled-segments transduction: every maximal a-block
// followed by a b becomes a^k b^k, a trailing a-block is copied, b's vanish.
std::string doubled_segments(const std::string& w) {
  std::string out;
  size_t i = 0;
  while (i < w.size()) {
    if (w[i] == 'b') {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < w.size() && w[j] == 'a') ++j;
    out += std::string(j - i, 'a');
    if (j < w.size()) out += std::string(j - i, 'b');
    i = j;
  }
  return out;
}

MsoTransduction ngr_identity(const std::string& sigma) {
  MsoTransduction t;
  t.name = "id";
  t.copies = {"1"};
  for (char c : sigma) {
    t.in_node_labels.push_back(std::string(1, c));
    t.out_node_labels.push_back(std::string(1, c));
  }
  t.in_edge_labels = {"*"};
  t.out_edge_labels = {"*"};
  t.domain = F::tru();
  for (const auto& l : t.out_node_labels)
    t.node_formulas[{"1", l}] = F::lab(l, "x");
  t.edge_formulas[{"1", "1", "*"}] = F::edge("*", "x", "y");
  return t;
}

}  // namespace

TEST_CASE("validation catches structural mistakes") {
  MsoTransduction t = ngr_identity("ab");
  CHECK_NOTHROW(t.validate());

  MsoTransduction bad = t;
  bad.copies = {"1", "1"};
  CHECK_THROWS_AS(bad.validate(), ParseError);

  bad = t;
  bad.params = {"x"};  // node variable, not a set variable
  CHECK_THROWS_AS(bad.validate(), ParseError);

  bad = t;
  bad.node_formulas[{"2", "a"}] = F::tru();  // unknown copy
  CHECK_THROWS_AS(bad.validate(), ParseError);

  bad = t;
  bad.node_formulas[{"1", "c"}] = F::tru();  // undeclared output label
  CHECK_THROWS_AS(bad.validate(), ParseError);

  bad = t;
  bad.domain = F::lab("a", "x");  // stray free variable in the domain
  CHECK_THROWS_AS(bad.validate(), ParseError);

  bad = t;
  bad.edge_formulas[{"1", "1", "*"}] = F::in("x", "Z");  // unknown parameter
  CHECK_THROWS_AS(bad.validate(), ParseError);
}

TEST_CASE("identity transduction copies node-labelled strings") {
  MsoTransduction t = ngr_identity("ab");
  for (const auto& w : words("ab", 4))
    CHECK(apply_string(t, w, Encoding::ngr, Encoding::ngr) ==
          std::set<std::string>{w});
}

TEST_CASE("inputs outside the declared signature are rejected") {
  MsoTransduction t = ngr_identity("a");
  CHECK_THROWS_AS(apply(t, encode_ngr("ab")), std::invalid_argument);
  Graph g;
  g.add_node(0, "a");
  g.add_edge(0, "z", 0);
  CHECK_THROWS_AS(apply(t, g), std::invalid_argument);
}

TEST_CASE("a node satisfying several label formulas is dropped") {
  MsoTransduction t;
  t.name = "amb";
  t.copies = {"1"};
  t.in_node_labels = {"a"};
  t.in_edge_labels = {"*"};
  t.out_node_labels = {"a", "b"};
  t.out_edge_labels = {"*"};
  t.domain = F::tru();
  t.node_formulas[{"1", "a"}] = F::tru();
  t.node_formulas[{"1", "b"}] = F::tru();
  auto outs = apply(t, encode_ngr("a"));
  REQUIRE(outs.size() == 1);
  CHECK(outs[0].node_count() == 0);
}

TEST_CASE("edge-labels to node-labels translation") {
  MsoTransduction t = t_edges_to_nodes("ab");
  for (const auto& w : words("ab", 4))
    CHECK(apply_string(t, w, Encoding::egr, Encoding::ngr) ==
          std::set<std::string>{w});
  // the empty word: one unlabelled node becomes the empty graph
  auto outs = apply(t, encode_egr(""));
  REQUIRE(outs.size() == 1);
  CHECK(outs[0].node_count() == 0);
  // non-string input graphs fall outside the domain
  Graph branch;
  branch.add_node(0, "*");
  branch.add_node(1, "*");
  branch.add_node(2, "*");
  branch.add_edge(0, "a", 1);
  branch.add_edge(0, "b", 2);
  CHECK(apply(t, branch).empty());
}

TEST_CASE("node-labels to edge-labels translation") {
  MsoTransduction t = t_nodes_to_edges("ab");
  for (const auto& w : words("ab", 4, 1))
    CHECK(apply_string(t, w, Encoding::ngr, Encoding::egr) ==
          std::set<std::string>{w});
  // the empty word has no image: there is no node to spawn the end node from
  CHECK(apply_string(t, "", Encoding::ngr, Encoding::egr).empty());
}

TEST_CASE("tape to edge-labels translation strips the markers") {
  MsoTransduction t = t_tape_to_edges("ab");
  for (const auto& w : words("ab", 4))
    CHECK(apply_string(t, w, Encoding::tape, Encoding::egr) ==
          std::set<std::string>{w});
  // a graph that is not a tape is out of domain
  CHECK(apply(t, encode_ngr("ab")).empty());
}

TEST_CASE("end-marking on edge-labelled strings") {
  MsoTransduction t = t_mark_ends("ab");
  for (const auto& w : words("ab", 4))
    CHECK(apply_string(t, w, Encoding::egr, Encoding::egr) ==
          std::set<std::string>{"L" + w + "R"});
}

TEST_CASE("encoding pipelines round-trip, including the empty word") {
  Pipeline to_tape;
  to_tape.name = "egr2tape";
  to_tape.in_enc = Encoding::egr;
  to_tape.out_enc = Encoding::tape;
  to_tape.stages = {t_mark_ends("ab"), t_edges_to_nodes("abLR")};

  Pipeline round;
  round.name = "egr-roundtrip";
  round.in_enc = Encoding::egr;
  round.out_enc = Encoding::egr;
  round.stages = {t_mark_ends("ab"), t_edges_to_nodes("abLR"),
                  t_tape_to_edges("ab")};

  for (const auto& w : words("ab", 3)) {
    CHECK(apply_pipeline_string(to_tape, w) == std::set<std::string>{w});
    CHECK(apply_pipeline_string(round, w) == std::set<std::string>{w});
  }
}

TEST_CASE("doubled-segments transduction matches its reference") {
  MsoTransduction t = MsoTransduction::from_text(read_fixture("block_doubling.transduction"));
  CHECK(apply_string(t, "aaabbaba", Encoding::tape, Encoding::egr) ==
        std::set<std::string>{"aaabbbaba"});
  for (const auto& w : words("ab", 5))
    CHECK(apply_string(t, w, Encoding::tape, Encoding::egr) ==
          std::set<std::string>{doubled_segments(w)});
}

TEST_CASE("letter-guessing duplicator yields every w#w") {
  MsoTransduction t = MsoTransduction::from_text(read_fixture("copy_pair.transduction"));
  for (int n = 0; n <= 4; ++n) {
    std::set<std::string> expected;
    for (const auto& w : words("ab", n, n)) expected.insert(w + "#" + w);
    CHECK(apply_string(t, std::string(n, 'a'), Encoding::egr, Encoding::egr) ==
          expected);
  }
  // off-alphabet inputs are out of domain
  CHECK(apply_string(t, "b", Encoding::egr, Encoding::egr).empty());
}

TEST_CASE("two-output transduction on the empty word") {
  MsoTransduction t = MsoTransduction::from_text(read_fixture("eps_ab.transduction"));
  CHECK(apply_string(t, "", Encoding::egr, Encoding::egr) ==
        std::set<std::string>{"a", "b"});
  for (const auto& w : words("ab", 3, 1))
    CHECK(apply_string(t, w, Encoding::egr, Encoding::egr).empty());
}

TEST_CASE("union of transductions merges the relations") {
  MsoTransduction up = t_edges_to_nodes("ab");
  MsoTransduction down = t_edges_to_nodes("ab");
  // tweak `down` into a constant: every input maps to the single letter a
  down.name = "const-a";
  down.node_formulas.clear();
  down.edge_formulas.clear();
  down.node_formulas[{"1", "a"}] =
      F::lnot(F::ex("y", F::lor(F::edge("a", "y", "x"), F::edge("b", "y", "x"))));
  MsoTransduction u = transduction_union(up, down);
  for (const auto& w : words("ab", 3)) {
    std::set<std::string> expected = {w, "a"};
    CHECK(apply_string(u, w, Encoding::egr, Encoding::ngr) == expected);
  }
}

TEST_CASE("union keeps both outputs on the empty input") {
  MsoTransduction a = MsoTransduction::from_text(read_fixture("eps_ab.transduction"));
  MsoTransduction b = a;
  b.name = "epsc";
  b.out_edge_labels = {"c"};
  b.edge_formulas.clear();
  b.edge_formulas[{"1", "2", "c"}] = F::tru();
  MsoTransduction u = transduction_union(a, b);
  CHECK(apply_string(u, "", Encoding::egr, Encoding::egr) ==
        std::set<std::string>{"a", "b", "c"});
}

TEST_CASE("node relabelling explores exactly the allowed choices") {
  std::map<std::string, std::set<std::string>> allowed = {
      {"a", {"a", "c"}}, {"b", {"b"}}};
  MsoTransduction t = relabelling_to_mso(allowed, {"*"});
  CHECK(apply_string(t, "ab", Encoding::ngr, Encoding::ngr) ==
        std::set<std::string>({"ab", "cb"}));
  CHECK(apply_string(t, "aa", Encoding::ngr, Encoding::ngr) ==
        std::set<std::string>({"aa", "ac", "ca", "cc"}));
  CHECK(apply_string(t, "b", Encoding::ngr, Encoding::ngr) ==
        std::set<std::string>({"b"}));
  CHECK(apply_string(t, "", Encoding::ngr, Encoding::ngr) ==
        std::set<std::string>({""}));
}

TEST_CASE("edge relabelling explores exactly the allowed choices") {
  std::map<std::string, std::set<std::string>> allowed = {
      {"a", {"x", "y"}}, {"b", {"b"}}};
  MsoTransduction t = edge_relabelling_to_mso(allowed);
  CHECK(apply_string(t, "ab", Encoding::egr, Encoding::egr) ==
        std::set<std::string>({"xb", "yb"}));
  CHECK(apply_string(t, "aa", Encoding::egr, Encoding::egr) ==
        std::set<std::string>({"xx", "xy", "yx", "yy"}));
  CHECK(apply_string(t, "", Encoding::egr, Encoding::egr) ==
        std::set<std::string>({""}));
}

TEST_CASE("transduction text round-trips") {
  for (const auto& name :
       {"block_doubling.transduction", "copy_pair.transduction", "eps_ab.transduction"}) {
    MsoTransduction t = MsoTransduction::from_text(read_fixture(name));
    MsoTransduction again = MsoTransduction::from_text(t.to_text());
    CHECK(t.to_text() == again.to_text());
  }
  MsoTransduction t = t_mark_ends("ab");
  CHECK(MsoTransduction::from_text(t.to_text()).to_text() == t.to_text());
  CHECK_THROWS_AS(MsoTransduction::from_text("copies 1\n"), ParseError);
  CHECK_THROWS_AS(MsoTransduction::from_text("transduction t\nbogus\n"),
                  ParseError);
}

TEST_CASE("pipeline text round-trips and applies") {
  Pipeline p;
  p.name = "egr-roundtrip";
  p.in_enc = Encoding::egr;
  p.out_enc = Encoding::egr;
  p.stages = {t_mark_ends("ab"), t_edges_to_nodes("abLR"),
              t_tape_to_edges("ab")};
  Pipeline q = Pipeline::from_text(p.to_text());
  CHECK(q.to_text() == p.to_text());
  CHECK(apply_pipeline_string(q, "ab") == std::set<std::string>{"ab"});
  CHECK_THROWS_AS(Pipeline::from_text("in-enc egr\n"), ParseError);
}

TEST_CASE("parameter blow-up is refused rather than attempted") {
  MsoTransduction t = MsoTransduction::from_text(read_fixture("copy_pair.transduction"));
  CHECK_THROWS_AS(apply(t, encode_egr("aaaaaaaaaaaa")), std::invalid_argument);
}
