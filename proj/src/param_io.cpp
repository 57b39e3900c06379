#include "tinlab/param_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "tinlab/errors.hpp"

namespace tinlab {

namespace {

constexpr const char* kMagic = "tinlab-params";

double parse_double(const std::string& tok, std::size_t line)
{
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size())
        throw FormatError("parameters line " + std::to_string(line) + ": bad number '" + tok + "'");
    return v;
}

std::size_t parse_size(const std::string& tok, std::size_t line)
{
    char* end = nullptr;
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (tok.empty() || end != tok.c_str() + tok.size())
        throw FormatError("parameters line " + std::to_string(line) + ": bad integer '" + tok + "'");
    return static_cast<std::size_t>(v);
}

} // namespace

void write_parameters(const Graph& graph, std::ostream& os)
{
    os << kMagic << " 1\n";
    char buf[40];
    for (std::size_t i = 0; i < graph.num_params(); ++i) {
        const auto& p = graph.param(ParamId{i});
        os << i << ' ' << p.name << ' ' << (p.trainable ? 1 : 0) << ' ' << p.tensor.shape().size();
        for (auto d : p.tensor.shape())
            os << ' ' << d;
        for (double v : p.tensor.values()) {
            std::snprintf(buf, sizeof buf, "%.17e", v);
            os << ' ' << buf;
        }
        os << '\n';
    }
}

std::string parameters_to_string(const Graph& graph)
{
    std::ostringstream os;
    write_parameters(graph, os);
    return os.str();
}

void read_parameters(Graph& graph, std::istream& is)
{
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(is, line) || line != std::string(kMagic) + " 1")
        throw FormatError("parameters: missing '" + std::string(kMagic) + " 1' header");

    std::vector<std::vector<double>> loaded(graph.num_params());
    std::vector<bool> seen(graph.num_params(), false);
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string id_tok, name, trainable_tok, rank_tok;
        if (!(ls >> id_tok >> name >> trainable_tok >> rank_tok))
            throw FormatError("parameters line " + std::to_string(lineno) + ": truncated record");
        const std::size_t id = parse_size(id_tok, lineno);
        if (id >= graph.num_params())
            throw FormatError("parameters line " + std::to_string(lineno) + ": unknown parameter id " + id_tok);
        const auto& p = graph.param(ParamId{id});
        if (name != p.name)
            throw FormatError("parameters line " + std::to_string(lineno) + ": expected '" + p.name + "', found '" +
                              name + "'");
        Shape shape(parse_size(rank_tok, lineno));
        for (auto& d : shape) {
            std::string tok;
            if (!(ls >> tok))
                throw FormatError("parameters line " + std::to_string(lineno) + ": truncated shape");
            d = parse_size(tok, lineno);
        }
        if (shape != p.tensor.shape())
            throw DimensionError("parameters line " + std::to_string(lineno) + ": shape mismatch for '" + name + "'");
        std::vector<double> values;
        values.reserve(p.tensor.size());
        std::string tok;
        while (ls >> tok)
            values.push_back(parse_double(tok, lineno));
        if (values.size() != p.tensor.size())
            throw FormatError("parameters line " + std::to_string(lineno) + ": expected " +
                              std::to_string(p.tensor.size()) + " values, found " + std::to_string(values.size()));
        loaded[id] = std::move(values);
        seen[id] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw FormatError("parameters: missing record for parameter " + std::to_string(i));
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        auto& p = graph.param(ParamId{i});
        auto dst = p.tensor.values();
        std::copy(loaded[i].begin(), loaded[i].end(), dst.begin());
        p.m1.clear();
        p.m2.clear();
        p.step_count = 0;
    }
}

void parameters_from_string(Graph& graph, const std::string& text)
{
    std::istringstream is(text);
    read_parameters(graph, is);
}

} // namespace tinlab
