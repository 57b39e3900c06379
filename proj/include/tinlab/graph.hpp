#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tinlab/ops.hpp"
#include "tinlab/tensor.hpp"

namespace tinlab {

enum class OpKind { WeightedSum, Subtract, DivBias, Clip, MinPool1D, MaxPool1D, Mean, MAD, Activation };

const char* to_string(OpKind kind);

struct InputId {
    std::size_t index = 0;
    auto operator<=>(const InputId&) const = default;
};

struct ParamId {
    std::size_t index = 0;
    auto operator<=>(const ParamId&) const = default;
};

struct NodeId {
    std::size_t index = 0;
    auto operator<=>(const NodeId&) const = default;
};

// Any value a node can read: a bound input, a parameter, or another node's output.
struct ValueRef {
    enum class Source : std::uint8_t { Input, Param, Node };

    ValueRef(InputId id) : source(Source::Input), index(id.index) {}
    ValueRef(ParamId id) : source(Source::Param), index(id.index) {}
    ValueRef(NodeId id) : source(Source::Node), index(id.index) {}

    Source source;
    std::size_t index;

    auto operator<=>(const ValueRef&) const = default;
};

inline constexpr std::size_t whole = std::numeric_limits<std::size_t>::max();

// A contiguous slice [offset, offset + length) of a value. Nodes with several
// incoming edges see them concatenated in order.
struct Edge {
    Edge(ValueRef src, std::size_t offset = 0, std::size_t length = whole)
        : src(src), offset(offset), length(length) {}
    Edge(InputId id, std::size_t offset = 0, std::size_t length = whole) : Edge(ValueRef(id), offset, length) {}
    Edge(ParamId id, std::size_t offset = 0, std::size_t length = whole) : Edge(ValueRef(id), offset, length) {}
    Edge(NodeId id, std::size_t offset = 0, std::size_t length = whole) : Edge(ValueRef(id), offset, length) {}

    ValueRef src;
    std::size_t offset;
    std::size_t length;

    auto operator<=>(const Edge&) const = default;
};

struct OpAttrs {
    std::size_t window = 0;                   // pool length
    double lo = 0.0;                          // clip bounds
    double hi = 0.0;
    double eps = 0.0;                         // div_bias regularizer
    ops::ActivationKind activation = ops::ActivationKind::Identity;
    ParamId weights{};                        // WeightedSum only
};

struct Node {
    NodeId id;
    OpKind kind;
    std::vector<Edge> inputs;
    OpAttrs attrs;
    Tensor output;

    std::size_t input_len = 0;                // total gathered length
    std::vector<double> scratch;              // gathered values for multi-edge nodes
    std::vector<double> scratch_grad;
    std::vector<std::size_t> argext;          // pool routing
};

struct Parameter {
    std::string name;
    Tensor tensor;
    bool trainable = true;
    std::vector<double> m1;                   // Adam first moment
    std::vector<double> m2;                   // Adam second moment
    std::uint64_t step_count = 0;
};

struct InputSlot {
    std::string name;
    Tensor tensor;
    bool bound = false;
};

using GradientMap = std::map<ParamId, std::vector<double>>;
using Bindings = std::map<std::string, std::vector<double>>;

// A DAG of operator applications over named inputs and parameters.
//
// Construction is append-only through the add_* methods, which infer output
// lengths and validate attributes eagerly. rewire() is the only mutation that
// can introduce a cycle and is rejected when it does. Evaluation is single
// threaded; a Graph is a value type and may be copied or moved across threads.
class Graph {
public:
    InputId add_input(std::string name, std::size_t size);
    ParamId add_parameter(std::string name, Tensor init, bool trainable = true);

    NodeId add_weighted_sum(std::vector<Edge> x, ParamId weights);
    NodeId add_subtract(Edge a, Edge b);
    NodeId add_div_bias(Edge num, Edge den, double eps);
    NodeId add_clip(std::vector<Edge> x, double lo, double hi);
    NodeId add_minpool(std::vector<Edge> x, std::size_t k);
    NodeId add_maxpool(std::vector<Edge> x, std::size_t k);
    NodeId add_mean(std::vector<Edge> x);
    NodeId add_mad(std::vector<Edge> x);
    NodeId add_activation(std::vector<Edge> x, ops::ActivationKind kind);

    // Replaces a node's incoming edges. Throws DimensionError on a length
    // change and UsageError if the result would contain a cycle; the graph
    // is left untouched on failure.
    void rewire(NodeId node, std::vector<Edge> inputs);

    void set_input(InputId id, std::span<const double> values);
    void set_input(const std::string& name, std::span<const double> values);
    void forward();
    void forward(const Bindings& bindings);

    const Tensor& output(NodeId id) const;
    double scalar(NodeId id) const;

    // Reverse-mode pass seeded at `out`. Node and input gradients are reset
    // on every call; trainable parameter gradients accumulate until
    // zero_grad() so minibatches can be summed.
    void backward(NodeId out, std::span<const double> seed);
    void backward(NodeId out, double seed = 1.0);
    void zero_grad();
    GradientMap gradients() const;
    std::span<const double> input_grad(InputId id) const;

    std::size_t num_inputs() const { return inputs_.size(); }
    std::size_t num_params() const { return params_.size(); }
    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_trainable_values() const;

    const InputSlot& input(InputId id) const;
    InputId input_id(const std::string& name) const;
    Parameter& param(ParamId id);
    const Parameter& param(ParamId id) const;
    const Node& node(NodeId id) const;
    const std::vector<NodeId>& topological_order() const { return order_; }

    // Canonical textual description of nodes, edges and attributes. Two
    // graphs with equal signatures have identical topology.
    std::string topology_signature() const;

private:
    NodeId add_node(OpKind kind, std::vector<Edge> inputs, OpAttrs attrs);
    void resolve_edges(std::vector<Edge>& edges) const;
    std::size_t value_size(ValueRef ref) const;
    std::span<const double> value_span(const Edge& e) const;
    std::span<double> grad_span(const Edge& e);
    std::size_t infer_output_len(const Node& node) const;
    std::vector<NodeId> compute_order() const;

    std::span<const double> gather(Node& node);
    std::span<double> gather_grad(Node& node);
    void scatter_grad(Node& node);
    void eval(Node& node);
    void propagate(Node& node);

    std::vector<InputSlot> inputs_;
    std::vector<Parameter> params_;
    std::vector<Node> nodes_;
    std::vector<NodeId> order_;
    std::vector<char> live_;
    bool evaluated_ = false;
};

} // namespace tinlab
