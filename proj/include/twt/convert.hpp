#pragma once
// Constructive translations between the machine styles and the formula-defined
// transductions:
//   symbol tests -> look-around tests -> formula tests   (machine upgrades)
//   formula tests/moves -> look-around tests plus walks  (machine downgrade)
//   deterministic machine -> three-stage graph pipeline  (computation space)
//   marked-tape graph transduction -> formula machine    (edge following)
// plus the sandwiched variants running between edge-labelled string graphs.

#include <string>

#include "twt/machine.hpp"
#include "twt/transduction.hpp"

namespace twt {

// Edge label standing for the empty output chunk inside computation-space
// graphs ("no symbol written on this step").
inline const std::string kSilentEdge = "-";

// Symbol tests become trivial look-around tests: prefix language L Sigma1*,
// suffix language Sigma1* R, except that the prefix is {empty} on the left
// marker and the suffix is {empty} on the right marker.
Machine gsm_to_rla(const Machine& m);

// Look-around tests become conjunctions  prefix-formula AND lab_sigma AND
// suffix-formula, with the side formulas obtained by relativizing an
// automaton encoding of the side language (literal `true` when the side is
// the whole normalized language). Steps become the formulas edge_*(x,y),
// edge_*(y,x), x=y. Symbol tests become label atoms.
Machine rla_to_mso(const Machine& m);

// Formula tests are compiled, decomposed around the flagged position, and
// probed as consecutive look-around alternatives. Formula moves first probe
// their direction and decomposition piece at the current position, then walk
// step by step, tracking the segment language in the control until the
// target position checks out. Requires functional move formulas; the result
// is deterministic whenever the input is.
Machine mso_to_rla(const Machine& m);

// The unrolling of a deterministic symbol-test machine over every
// (state, position) pair of a tape: one copy per state, an edge per firing
// branch labelled by the written symbol (kSilentEdge for none), the start
// configuration labelled "init", every final-state copy labelled "fin".
// Requires one-symbol outputs and distinct initial/final states.
MsoTransduction computation_space_stage(const Machine& m);

// Fixed template keeping exactly the nodes lying on the walk from the
// "init" node to a "fin" node, per output alphabet. Cached and shared.
const MsoTransduction& path_selection_stage(const std::string& out_syms);

// Fixed template dropping nodes with an outgoing silent edge and splicing
// each real edge to the end of the silent run it enters. Cached and shared.
const MsoTransduction& silent_contraction_stage(const std::string& out_syms);

// The three stages above as one pipeline from tape encodings to
// edge-labelled outputs: maps the tape of w to the edge-labelled encoding of
// M(w) when defined, and to no output otherwise.
Pipeline dgsm_to_mso_pipeline(const Machine& m);

// A parameterless transduction from marked tapes (node-labelled, markers
// included) to edge-labelled string graphs becomes a formula-test machine:
// states are the copy names, each candidate (copy, symbol) edge is probed
// consecutively, acceptance happens when no edge formula fires, and a fresh
// initial state locates the output node without incoming edges.
Machine mso_to_dgsm_mso(const MsoTransduction& t);

// Re-encodes the input side of a transduction from edge-labelled string
// graphs over Sigma1 to marked tapes: position x of the edge-labelled graph
// is matched with the tape node at the same position (every tape node except
// the right marker), edge_sigma(x,y) becomes edge_*(x,y) AND lab_sigma(y),
// and all quantifiers avoid the right-marker node.
MsoTransduction egr_input_to_tape_input(const MsoTransduction& t);

// Sandwiched variants between edge-labelled string graphs.
// Machine direction: prepend the stages turning the edge-labelled input into
// a marked tape, then run the computation-space pipeline. Normalizes the
// machine (short outputs, separated final state) first.
Pipeline dgsm_to_msoe(const Machine& m);
// Transduction direction: re-encode the input side to marked tapes, then
// build the edge-following machine.
Machine msoe_to_dgsm(const MsoTransduction& t);

}  // namespace twt
