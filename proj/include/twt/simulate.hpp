#pragma once
// Running two-way machines on a tape L w R: deterministic simulation with
// loop detection, bounded nondeterministic enumeration (no tape position
// visited more than k times), the rewriting variant with its mutable tape,
// and a per-input detector for configurations that pump output.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "twt/machine.hpp"

namespace twt {

struct Configuration {
  std::string state;
  int pos = 0;
  auto operator<=>(const Configuration&) const = default;
};

// One fired instruction: which one, which branch, what it emitted, and (for
// rewriting machines) what the cell held before and after.
struct Step {
  int inst = 0;
  bool took_then = true;
  std::string out;
  char read = 0;
  char wrote = 0;
};

struct Computation {
  std::string word;
  std::vector<Configuration> configs;  // configs.size() == steps.size() + 1
  std::vector<Step> steps;

  std::string output() const;
  bool accepting(const Machine& m) const;
  // Largest number of configurations sharing one tape position.
  int max_visits() const;
};

struct RunResult {
  bool defined = false;
  std::string output;
  std::vector<int> visit_counts;  // per tape position 0..n+1
  Computation comp;
};

// How instruction formulas are evaluated on the tape graph.
enum class MsoEval {
  autoselect,  // direct evaluation, compiled automata once |w| > 10
  naive,
  compiled,
};

struct SimOptions {
  MsoEval mso = MsoEval::autoselect;
};

// Runs the unique computation from (initial, 0). Undefined (nullopt-style
// result with defined=false) when the machine sticks, walks off the tape, a
// jump has no target, a rewriting run exceeds its declared visit bound, or a
// configuration repeats. Throws std::invalid_argument unless the machine is
// deterministic (and, for formula moves, functional).
RunResult run_deterministic(const Machine& m, const std::string& w,
                            const SimOptions& opts = {});

// All accepting computations in which no tape position is visited more than
// k times, depth-first, branching in instruction list order.
std::vector<Computation> enumerate_computations(const Machine& m,
                                                const std::string& w, int k,
                                                const SimOptions& opts = {});

// Their outputs.
std::set<std::string> enumerate_nondeterministic(const Machine& m,
                                                 const std::string& w, int k,
                                                 const SimOptions& opts = {});

// Outputs of the rewriting machine within its declared visit bound.
std::set<std::string> run_hennie(const Machine& m, const std::string& w);

// True iff some (state, position) configuration on w can reach itself having
// emitted output on the way while staying reachable from the start and able
// to reach acceptance — a witness that w has infinitely many outputs.
bool detect_output_loop(const Machine& m, const std::string& w);

}  // namespace twt
