#pragma once

#include <iosfwd>
#include <string>

#include "tinlab/graph.hpp"

namespace tinlab {

// Textual parameter export, one parameter per line:
//
//   tinlab-params 1
//   <id> <name> <trainable:0|1> <rank> <dim>... <v0> <v1> ...
//
// Values are written in %.17e scientific notation, which round-trips every
// finite double exactly.
void write_parameters(const Graph& graph, std::ostream& os);
std::string parameters_to_string(const Graph& graph);

// Loads values into an existing graph with matching ids, names and shapes.
// Optimizer state is reset.
void read_parameters(Graph& graph, std::istream& is);
void parameters_from_string(Graph& graph, const std::string& text);

} // namespace tinlab
