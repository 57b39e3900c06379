#include "tinlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>

#include "tinlab/errors.hpp"

namespace tinlab {

const char* to_string(OpKind kind)
{
    switch (kind) {
    case OpKind::WeightedSum: return "WeightedSum";
    case OpKind::Subtract: return "Subtract";
    case OpKind::DivBias: return "DivBias";
    case OpKind::Clip: return "Clip";
    case OpKind::MinPool1D: return "MinPool1D";
    case OpKind::MaxPool1D: return "MaxPool1D";
    case OpKind::Mean: return "Mean";
    case OpKind::MAD: return "MAD";
    case OpKind::Activation: return "Activation";
    }
    return "?";
}

InputId Graph::add_input(std::string name, std::size_t size)
{
    if (size == 0)
        throw DimensionError("input '" + name + "' must have positive size");
    for (const auto& slot : inputs_)
        if (slot.name == name)
            throw ConfigError("duplicate input name '" + name + "'");
    inputs_.push_back(InputSlot{std::move(name), Tensor({size}), false});
    evaluated_ = false;
    return InputId{inputs_.size() - 1};
}

ParamId Graph::add_parameter(std::string name, Tensor init, bool trainable)
{
    if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos)
        throw ConfigError("parameter names must be nonempty and contain no whitespace");
    if (init.size() == 0)
        throw DimensionError("parameter '" + name + "' must be nonempty");
    if (!init.all_finite())
        throw DomainError("parameter '" + name + "' has non-finite values");
    Parameter p;
    p.name = std::move(name);
    p.tensor = std::move(init);
    p.trainable = trainable;
    params_.push_back(std::move(p));
    evaluated_ = false;
    return ParamId{params_.size() - 1};
}

NodeId Graph::add_weighted_sum(std::vector<Edge> x, ParamId weights)
{
    if (weights.index >= params_.size())
        throw UsageError("weighted_sum: unknown parameter");
    OpAttrs attrs;
    attrs.weights = weights;
    return add_node(OpKind::WeightedSum, std::move(x), attrs);
}

NodeId Graph::add_subtract(Edge a, Edge b)
{
    return add_node(OpKind::Subtract, {a, b}, {});
}

NodeId Graph::add_div_bias(Edge num, Edge den, double eps)
{
    if (!(eps > 0.0))
        throw ConfigError("div_bias: eps must be positive");
    OpAttrs attrs;
    attrs.eps = eps;
    return add_node(OpKind::DivBias, {num, den}, attrs);
}

NodeId Graph::add_clip(std::vector<Edge> x, double lo, double hi)
{
    if (!(lo < hi))
        throw ConfigError("clip: lower bound must be below upper bound");
    OpAttrs attrs;
    attrs.lo = lo;
    attrs.hi = hi;
    return add_node(OpKind::Clip, std::move(x), attrs);
}

NodeId Graph::add_minpool(std::vector<Edge> x, std::size_t k)
{
    OpAttrs attrs;
    attrs.window = k;
    return add_node(OpKind::MinPool1D, std::move(x), attrs);
}

NodeId Graph::add_maxpool(std::vector<Edge> x, std::size_t k)
{
    OpAttrs attrs;
    attrs.window = k;
    return add_node(OpKind::MaxPool1D, std::move(x), attrs);
}

NodeId Graph::add_mean(std::vector<Edge> x)
{
    return add_node(OpKind::Mean, std::move(x), {});
}

NodeId Graph::add_mad(std::vector<Edge> x)
{
    return add_node(OpKind::MAD, std::move(x), {});
}

NodeId Graph::add_activation(std::vector<Edge> x, ops::ActivationKind kind)
{
    OpAttrs attrs;
    attrs.activation = kind;
    return add_node(OpKind::Activation, std::move(x), attrs);
}

std::size_t Graph::value_size(ValueRef ref) const
{
    switch (ref.source) {
    case ValueRef::Source::Input:
        if (ref.index >= inputs_.size())
            throw UsageError("edge references unknown input " + std::to_string(ref.index));
        return inputs_[ref.index].tensor.size();
    case ValueRef::Source::Param:
        if (ref.index >= params_.size())
            throw UsageError("edge references unknown parameter " + std::to_string(ref.index));
        return params_[ref.index].tensor.size();
    case ValueRef::Source::Node:
        if (ref.index >= nodes_.size())
            throw UsageError("edge references unknown node " + std::to_string(ref.index));
        return nodes_[ref.index].output.size();
    }
    return 0;
}

void Graph::resolve_edges(std::vector<Edge>& edges) const
{
    if (edges.empty())
        throw DimensionError("node requires at least one input");
    for (auto& e : edges) {
        const std::size_t n = value_size(e.src);
        if (e.offset >= n)
            throw DimensionError("edge offset " + std::to_string(e.offset) + " outside value of length " +
                                 std::to_string(n));
        if (e.length == whole)
            e.length = n - e.offset;
        if (e.length == 0 || e.offset + e.length > n)
            throw DimensionError("edge slice [" + std::to_string(e.offset) + ", " +
                                 std::to_string(e.offset + e.length) + ") outside value of length " +
                                 std::to_string(n));
    }
}

std::size_t Graph::infer_output_len(const Node& node) const
{
    const auto& in = node.inputs;
    switch (node.kind) {
    case OpKind::WeightedSum: {
        const std::size_t k = params_[node.attrs.weights.index].tensor.size();
        if (node.input_len != k)
            throw DimensionError("weighted_sum: input length " + std::to_string(node.input_len) +
                                 " does not match weight length " + std::to_string(k));
        return 1;
    }
    case OpKind::Subtract:
    case OpKind::DivBias:
        if (in.size() != 2)
            throw DimensionError(std::string(to_string(node.kind)) + " takes exactly two operands");
        if (in[0].length != in[1].length)
            throw DimensionError(std::string(to_string(node.kind)) + ": operand lengths differ (" +
                                 std::to_string(in[0].length) + " vs " + std::to_string(in[1].length) + ")");
        return in[0].length;
    case OpKind::Clip:
    case OpKind::Activation:
        return node.input_len;
    case OpKind::MinPool1D:
    case OpKind::MaxPool1D:
        if (node.attrs.window < 1 || node.attrs.window > node.input_len)
            throw DimensionError("pool window " + std::to_string(node.attrs.window) +
                                 " does not fit input of length " + std::to_string(node.input_len));
        return node.input_len - node.attrs.window + 1;
    case OpKind::Mean:
    case OpKind::MAD:
        return 1;
    }
    return 0;
}

NodeId Graph::add_node(OpKind kind, std::vector<Edge> inputs, OpAttrs attrs)
{
    resolve_edges(inputs);
    Node node;
    node.id = NodeId{nodes_.size()};
    node.kind = kind;
    node.inputs = std::move(inputs);
    node.attrs = attrs;
    for (const auto& e : node.inputs)
        node.input_len += e.length;
    const std::size_t out_len = infer_output_len(node);
    node.output = Tensor({out_len});
    if (node.inputs.size() > 1 && kind != OpKind::Subtract && kind != OpKind::DivBias) {
        node.scratch.assign(node.input_len, 0.0);
        node.scratch_grad.assign(node.input_len, 0.0);
    }
    if (kind == OpKind::MinPool1D || kind == OpKind::MaxPool1D)
        node.argext.assign(out_len, 0);
    nodes_.push_back(std::move(node));
    order_.push_back(nodes_.back().id);
    live_.push_back(0);
    evaluated_ = false;
    return nodes_.back().id;
}

std::vector<NodeId> Graph::compute_order() const
{
    const std::size_t n = nodes_.size();
    std::vector<std::size_t> indegree(n, 0);
    std::vector<std::vector<std::size_t>> consumers(n);
    for (const auto& node : nodes_)
        for (const auto& e : node.inputs)
            if (e.src.source == ValueRef::Source::Node) {
                ++indegree[node.id.index];
                consumers[e.src.index].push_back(node.id.index);
            }
    // Min-heap keeps the order stable: ties resolve by construction index.
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0)
            ready.push(i);
    std::vector<NodeId> order;
    order.reserve(n);
    while (!ready.empty()) {
        const std::size_t i = ready.top();
        ready.pop();
        order.push_back(NodeId{i});
        for (auto c : consumers[i])
            if (--indegree[c] == 0)
                ready.push(c);
    }
    if (order.size() != n)
        throw UsageError("graph contains a cycle");
    return order;
}

void Graph::rewire(NodeId id, std::vector<Edge> inputs)
{
    if (id.index >= nodes_.size())
        throw UsageError("rewire: unknown node");
    Node& node = nodes_[id.index];
    resolve_edges(inputs);
    Node candidate = node;
    candidate.inputs = std::move(inputs);
    candidate.input_len = 0;
    for (const auto& e : candidate.inputs)
        candidate.input_len += e.length;
    if (infer_output_len(candidate) != node.output.size())
        throw DimensionError("rewire: output length would change");

    std::swap(node, candidate);
    try {
        order_ = compute_order();
    } catch (...) {
        std::swap(node, candidate);
        throw;
    }
    if (node.inputs.size() > 1 && node.kind != OpKind::Subtract && node.kind != OpKind::DivBias) {
        node.scratch.assign(node.input_len, 0.0);
        node.scratch_grad.assign(node.input_len, 0.0);
    } else {
        node.scratch.clear();
        node.scratch_grad.clear();
    }
    evaluated_ = false;
}

void Graph::set_input(InputId id, std::span<const double> values)
{
    if (id.index >= inputs_.size())
        throw UsageError("unknown input");
    auto& slot = inputs_[id.index];
    if (values.size() != slot.tensor.size())
        throw DimensionError("input '" + slot.name + "' expects " + std::to_string(slot.tensor.size()) +
                             " values, got " + std::to_string(values.size()));
    auto dst = slot.tensor.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw DomainError("input '" + slot.name + "' contains a non-finite value");
        dst[i] = values[i];
    }
    slot.bound = true;
    evaluated_ = false;
}

void Graph::set_input(const std::string& name, std::span<const double> values)
{
    set_input(input_id(name), values);
}

InputId Graph::input_id(const std::string& name) const
{
    for (std::size_t i = 0; i < inputs_.size(); ++i)
        if (inputs_[i].name == name)
            return InputId{i};
    throw UsageError("unknown input '" + name + "'");
}

std::span<const double> Graph::value_span(const Edge& e) const
{
    switch (e.src.source) {
    case ValueRef::Source::Input: return inputs_[e.src.index].tensor.values().subspan(e.offset, e.length);
    case ValueRef::Source::Param: return params_[e.src.index].tensor.values().subspan(e.offset, e.length);
    case ValueRef::Source::Node: return nodes_[e.src.index].output.values().subspan(e.offset, e.length);
    }
    return {};
}

std::span<double> Graph::grad_span(const Edge& e)
{
    switch (e.src.source) {
    case ValueRef::Source::Input: return inputs_[e.src.index].tensor.grad().subspan(e.offset, e.length);
    case ValueRef::Source::Param: {
        auto& p = params_[e.src.index];
        if (!p.trainable)
            return {};
        return p.tensor.grad().subspan(e.offset, e.length);
    }
    case ValueRef::Source::Node:
        live_[e.src.index] = 1;
        return nodes_[e.src.index].output.grad().subspan(e.offset, e.length);
    }
    return {};
}

std::span<const double> Graph::gather(Node& node)
{
    if (node.inputs.size() == 1)
        return value_span(node.inputs[0]);
    std::size_t pos = 0;
    for (const auto& e : node.inputs) {
        auto src = value_span(e);
        std::copy(src.begin(), src.end(), node.scratch.begin() + static_cast<std::ptrdiff_t>(pos));
        pos += src.size();
    }
    return node.scratch;
}

std::span<double> Graph::gather_grad(Node& node)
{
    if (node.inputs.size() == 1)
        return grad_span(node.inputs[0]);
    std::fill(node.scratch_grad.begin(), node.scratch_grad.end(), 0.0);
    return node.scratch_grad;
}

void Graph::scatter_grad(Node& node)
{
    if (node.inputs.size() == 1)
        return;
    std::size_t pos = 0;
    for (const auto& e : node.inputs) {
        auto dst = grad_span(e);
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] += node.scratch_grad[pos + i];
        pos += e.length;
    }
}

void Graph::eval(Node& node)
{
    auto out = node.output.values();
    switch (node.kind) {
    case OpKind::WeightedSum:
        out[0] = ops::weighted_sum(gather(node), params_[node.attrs.weights.index].tensor.values());
        break;
    case OpKind::Subtract:
        ops::subtract(value_span(node.inputs[0]), value_span(node.inputs[1]), out);
        break;
    case OpKind::DivBias:
        ops::div_bias(value_span(node.inputs[0]), value_span(node.inputs[1]), node.attrs.eps, out);
        break;
    case OpKind::Clip:
        ops::clip(gather(node), node.attrs.lo, node.attrs.hi, out);
        break;
    case OpKind::MinPool1D:
        ops::minpool1d(gather(node), node.attrs.window, out, node.argext);
        break;
    case OpKind::MaxPool1D:
        ops::maxpool1d(gather(node), node.attrs.window, out, node.argext);
        break;
    case OpKind::Mean:
        out[0] = ops::mean(gather(node));
        break;
    case OpKind::MAD:
        out[0] = ops::mad(gather(node));
        break;
    case OpKind::Activation:
        ops::activation(node.attrs.activation, gather(node), out);
        break;
    }
    for (double v : out)
        if (!std::isfinite(v))
            throw DomainError(std::string(to_string(node.kind)) + " node " + std::to_string(node.id.index) +
                              " produced a non-finite value");
}

void Graph::propagate(Node& node)
{
    auto upstream = std::span<const double>(node.output.grad());
    // Multi-edge nodes keep their gathered forward values in scratch.
    auto x = node.inputs.size() == 1 ? value_span(node.inputs[0]) : std::span<const double>(node.scratch);
    switch (node.kind) {
    case OpKind::WeightedSum: {
        auto& w = params_[node.attrs.weights.index];
        auto gw = w.trainable ? w.tensor.grad() : std::span<double>{};
        ops::weighted_sum_backward(x, w.tensor.values(), upstream[0], gather_grad(node), gw);
        scatter_grad(node);
        break;
    }
    case OpKind::Subtract:
        ops::subtract_backward(upstream, grad_span(node.inputs[0]), grad_span(node.inputs[1]));
        break;
    case OpKind::DivBias:
        ops::div_bias_backward(value_span(node.inputs[0]), value_span(node.inputs[1]), node.attrs.eps, upstream,
                               grad_span(node.inputs[0]), grad_span(node.inputs[1]));
        break;
    case OpKind::Clip: {
        auto g = gather_grad(node);
        if (!g.empty())
            ops::clip_backward(x, node.attrs.lo, node.attrs.hi, upstream, g);
        scatter_grad(node);
        break;
    }
    case OpKind::MinPool1D:
    case OpKind::MaxPool1D: {
        auto g = gather_grad(node);
        if (!g.empty())
            ops::pool_backward(node.argext, upstream, g);
        scatter_grad(node);
        break;
    }
    case OpKind::Mean: {
        auto g = gather_grad(node);
        if (!g.empty())
            ops::mean_backward(x.size(), upstream[0], g);
        scatter_grad(node);
        break;
    }
    case OpKind::MAD: {
        auto g = gather_grad(node);
        if (!g.empty())
            ops::mad_backward(x, upstream[0], g);
        scatter_grad(node);
        break;
    }
    case OpKind::Activation: {
        auto g = gather_grad(node);
        if (!g.empty())
            ops::activation_backward(node.attrs.activation, x, upstream, g);
        scatter_grad(node);
        break;
    }
    }
}

void Graph::forward()
{
    for (const auto& slot : inputs_)
        if (!slot.bound)
            throw UsageError("input '" + slot.name + "' is not bound");
    evaluated_ = false;
    for (auto id : order_)
        eval(nodes_[id.index]);
    evaluated_ = true;
}

void Graph::forward(const Bindings& bindings)
{
    for (const auto& [name, values] : bindings)
        set_input(name, values);
    forward();
}

const Tensor& Graph::output(NodeId id) const
{
    return node(id).output;
}

double Graph::scalar(NodeId id) const
{
    const auto& t = node(id).output;
    if (t.size() != 1)
        throw DimensionError("node " + std::to_string(id.index) + " is not scalar");
    return t[0];
}

void Graph::backward(NodeId out, std::span<const double> seed)
{
    if (!evaluated_)
        throw UsageError("backward called before forward on current bindings");
    if (out.index >= nodes_.size())
        throw UsageError("backward: unknown node");
    if (seed.size() != nodes_[out.index].output.size())
        throw DimensionError("backward: seed length does not match output");
    for (auto& node : nodes_) {
        node.output.grad();
        node.output.zero_grad();
    }
    for (auto& slot : inputs_) {
        slot.tensor.grad();
        slot.tensor.zero_grad();
    }
    std::fill(live_.begin(), live_.end(), 0);
    auto g = nodes_[out.index].output.grad();
    std::copy(seed.begin(), seed.end(), g.begin());
    live_[out.index] = 1;
    for (auto it = order_.rbegin(); it != order_.rend(); ++it)
        if (live_[it->index])
            propagate(nodes_[it->index]);
}

void Graph::backward(NodeId out, double seed)
{
    const double s[1] = {seed};
    backward(out, std::span<const double>(s, 1));
}

void Graph::zero_grad()
{
    for (auto& p : params_)
        p.tensor.zero_grad();
}

GradientMap Graph::gradients() const
{
    GradientMap map;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& p = params_[i];
        if (!p.trainable)
            continue;
        if (p.tensor.has_grad()) {
            auto g = p.tensor.grad();
            map.emplace(ParamId{i}, std::vector<double>(g.begin(), g.end()));
        } else {
            map.emplace(ParamId{i}, std::vector<double>(p.tensor.size(), 0.0));
        }
    }
    return map;
}

std::span<const double> Graph::input_grad(InputId id) const
{
    return input(id).tensor.grad();
}

std::size_t Graph::num_trainable_values() const
{
    std::size_t n = 0;
    for (const auto& p : params_)
        if (p.trainable)
            n += p.tensor.size();
    return n;
}

const InputSlot& Graph::input(InputId id) const
{
    if (id.index >= inputs_.size())
        throw UsageError("unknown input");
    return inputs_[id.index];
}

Parameter& Graph::param(ParamId id)
{
    if (id.index >= params_.size())
        throw UsageError("unknown parameter");
    return params_[id.index];
}

const Parameter& Graph::param(ParamId id) const
{
    if (id.index >= params_.size())
        throw UsageError("unknown parameter");
    return params_[id.index];
}

const Node& Graph::node(NodeId id) const
{
    if (id.index >= nodes_.size())
        throw UsageError("unknown node");
    return nodes_[id.index];
}

std::string Graph::topology_signature() const
{
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto src = [](ValueRef r) {
        const char tag = r.source == ValueRef::Source::Input ? 'I' : r.source == ValueRef::Source::Param ? 'P' : 'N';
        return tag + std::to_string(r.index);
    };
    std::ostringstream os;
    for (std::size_t i = 0; i < inputs_.size(); ++i)
        os << "I" << i << " " << inputs_[i].name << " " << inputs_[i].tensor.size() << "\n";
    for (std::size_t i = 0; i < params_.size(); ++i)
        os << "P" << i << " " << params_[i].name << " " << params_[i].tensor.size() << " "
           << (params_[i].trainable ? "trainable" : "fixed") << "\n";
    for (const auto& node : nodes_) {
        os << "N" << node.id.index << " " << to_string(node.kind) << " <-";
        for (const auto& e : node.inputs)
            os << " " << src(e.src) << "[" << e.offset << ":" << e.offset + e.length << "]";
        switch (node.kind) {
        case OpKind::WeightedSum: os << " w=P" << node.attrs.weights.index; break;
        case OpKind::DivBias: os << " eps=" << num(node.attrs.eps); break;
        case OpKind::Clip: os << " lo=" << num(node.attrs.lo) << " hi=" << num(node.attrs.hi); break;
        case OpKind::MinPool1D:
        case OpKind::MaxPool1D: os << " k=" << node.attrs.window; break;
        case OpKind::Activation:
            os << " act=" << (node.attrs.activation == ops::ActivationKind::Relu ? "relu" : "identity");
            break;
        default: break;
        }
        os << "\n";
    }
    return os.str();
}

} // namespace tinlab
