#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tinlab/graph.hpp"

namespace tinlab {

struct GradCheckResult {
    double max_rel_error = 0.0;
    ParamId worst_param{};
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t entries_checked = 0;
};

// Compares backward() against central differences (f(w+h) - f(w-h)) / 2h for
// every trainable parameter entry. Relative error uses the denominator
// max(|analytic|, |numeric|, 1e-8). The output node must be scalar.
// Parameter values are restored before returning.
GradCheckResult grad_check(Graph& graph, NodeId out, const Bindings& bindings, double h);

// A small random graph exercising one operator, reduced to a scalar by a
// trainable read-out. Inputs are drawn at least 1e-3 away from the
// operator's nondifferentiable points (clip bounds, pool ties, MAD and ReLU
// kinks) and div_bias denominators stay positive.
struct SweepCase {
    Graph graph;
    NodeId out;
};

SweepCase make_sweep_case(OpKind kind, std::uint64_t seed);

struct SweepRow {
    OpKind kind;
    std::size_t cases = 0;
    double max_rel_error = 0.0;
    std::uint64_t worst_seed = 0;
};

// Runs `cases` seeded graphs per operator kind.
std::vector<SweepRow> grad_sweep(std::size_t cases, double h, std::uint64_t seed = 0);

inline constexpr OpKind kAllOpKinds[] = {OpKind::WeightedSum, OpKind::Subtract, OpKind::DivBias,
                                         OpKind::Clip,        OpKind::MinPool1D, OpKind::MaxPool1D,
                                         OpKind::Mean,        OpKind::MAD,       OpKind::Activation};

} // namespace tinlab
