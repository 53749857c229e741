#pragma once
// A shared corpus of small deterministic one-symbol-test machines over
// {a, b}, built from classical one-branch rules. Used by several suites to
// sweep conversions against the simulator.

#include <string>
#include <vector>

#include "twt/machine.hpp"

namespace corpus {

using twt::Alphabet;
using twt::FiveTuple;
using twt::Machine;
using twt::to_eight_tuple;

inline Machine det(const std::string& name, const std::vector<FiveTuple>& rules,
                    const std::string& out_alpha = "ab",
                    const std::string& in_alpha = "ab",
                    const std::string& initial = "s",
                    const std::string& final_st = "f") {
  return to_eight_tuple(name, rules, true, Alphabet(in_alpha),
                        Alphabet(out_alpha), initial, final_st);
}

inline Machine identity() {
  return det("identity", {{"s", "L", "s", "", 1},
                          {"s", "a", "s", "a", 1},
                          {"s", "b", "s", "b", 1},
                          {"s", "R", "f", "", 0}});
}

inline Machine reverse() {
  return det("reverse", {{"s", "L", "s", "", 1},
                         {"s", "a", "s", "", 1},
                         {"s", "b", "s", "", 1},
                         {"s", "R", "r", "", -1},
                         {"r", "a", "r", "a", -1},
                         {"r", "b", "r", "b", -1},
                         {"r", "L", "f", "", 0}});
}

inline Machine double_copy() {
  return det("doublecopy", {{"s", "L", "s", "", 1},
                            {"s", "a", "s", "a", 1},
                            {"s", "b", "s", "b", 1},
                            {"s", "R", "back", "", -1},
                            {"back", "a", "back", "", -1},
                            {"back", "b", "back", "", -1},
                            {"back", "L", "t", "", 1},
                            {"t", "a", "t", "a", 1},
                            {"t", "b", "t", "b", 1},
                            {"t", "R", "f", "", 0}});
}

inline Machine erase_b() {
  return det("eraseb", {{"s", "L", "s", "", 1},
                        {"s", "a", "s", "a", 1},
                        {"s", "b", "s", "", 1},
                        {"s", "R", "f", "", 0}});
}

inline Machine swap_ab() {
  return det("swapab", {{"s", "L", "s", "", 1},
                        {"s", "a", "s", "b", 1},
                        {"s", "b", "s", "a", 1},
                        {"s", "R", "f", "", 0}});
}

// Two-symbol outputs: exercises the short-output normalization.
inline Machine dup_each() {
  return det("dupeach", {{"s", "L", "s", "", 1},
                         {"s", "a", "s", "aa", 1},
                         {"s", "b", "s", "bb", 1},
                         {"s", "R", "f", "", 0}});
}

// Accepts everything immediately with empty output; empty output alphabet.
inline Machine const_empty() {
  return det("constempty", {{"s", "L", "f", "", 0}}, "");
}

// Identity on words with an even number of a's, undefined otherwise (the
// odd-parity state has no rule at the right marker).
inline Machine even_a_id() {
  return det("evenaid",
             {{"p", "L", "p", "", 1},
              {"p", "a", "q", "a", 1},
              {"p", "b", "p", "b", 1},
              {"p", "R", "f", "", 0},
              {"q", "a", "p", "a", 1},
              {"q", "b", "q", "b", 1}},
             "ab", "ab", "p", "f");
}

// Defined exactly on the empty word, which maps to "a".
inline Machine eps_to_a() {
  return det("epstoa", {{"s", "L", "s", "", 1}, {"s", "R", "f", "a", 0}}, "a");
}

// Drops the first symbol; the empty word stays empty.
inline Machine drop_first() {
  return det("dropfirst", {{"s", "L", "s", "", 1},
                           {"s", "a", "t", "", 1},
                           {"s", "b", "t", "", 1},
                           {"s", "R", "f", "", 0},
                           {"t", "a", "t", "a", 1},
                           {"t", "b", "t", "b", 1},
                           {"t", "R", "f", "", 0}});
}

// One output symbol: "a" when the number of b's is even, "b" otherwise.
inline Machine b_parity() {
  return det("bparity", {{"p", "L", "p", "", 1},
                         {"p", "a", "p", "", 1},
                         {"p", "b", "q", "", 1},
                         {"q", "a", "q", "", 1},
                         {"q", "b", "p", "", 1},
                         {"p", "R", "f", "a", 0},
                         {"q", "R", "f", "b", 0}},
             "ab", "ab", "p", "f");
}

inline std::vector<Machine> dgsm_corpus() {
  return {identity(), reverse(),    double_copy(), erase_b(),
          swap_ab(),  dup_each(),   const_empty(), even_a_id(),
          eps_to_a(), drop_first(), b_parity()};
}

// Every word over sigma with minlen <= |w| <= maxlen, shortest first.
inline std::vector<std::string> words(const std::string& sigma, int maxlen,
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

}  // namespace corpus
