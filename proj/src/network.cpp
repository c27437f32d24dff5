#include "attribnet/network.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "attribnet/kernels.hpp"
#include "attribnet/rng.hpp"

namespace attribnet {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::gelu: return "gelu";
  }
  return "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "gelu") return Activation::gelu;
  throw std::invalid_argument("unknown activation tag: " + name);
}

namespace {
// tanh approximation with the usual published constants
constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluCubic = 0.044715;
}  // namespace

double gelu(double x) {
  const double inner = kGeluScale * (x + kGeluCubic * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(inner));
}

double gelu_derivative(double x) {
  const double inner = kGeluScale * (x + kGeluCubic * x * x * x);
  const double t = std::tanh(inner);
  const double dinner = kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * dinner;
}

void Network::validate() const {
  if (layers.empty()) throw std::invalid_argument("network has no layers");
  if (input_dim == 0) throw std::invalid_argument("network input_dim is zero");
  if (layers.front().in_dim() != input_dim)
    throw std::invalid_argument("layer 0 expects input dim " +
                                std::to_string(layers.front().in_dim()) +
                                ", network declares " + std::to_string(input_dim));
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    l.weight.validate();
    if (l.bias.size() != l.out_dim())
      throw std::invalid_argument("layer " + std::to_string(i) +
                                  ": bias dim != weight rows");
    if (i + 1 < layers.size() && layers[i + 1].in_dim() != l.out_dim())
      throw std::invalid_argument("layer " + std::to_string(i + 1) +
                                  ": input dim does not match previous output");
  }
}

namespace {

Vector apply_activation(Activation a, const Vector& pre) {
  Vector out(pre.size());
  switch (a) {
    case Activation::identity:
      out = pre;
      break;
    case Activation::relu:
      kernels::active().relu(out.data(), pre.data(), pre.size());
      break;
    case Activation::gelu:
      for (std::size_t i = 0; i < pre.size(); ++i) out[i] = gelu(pre[i]);
      break;
  }
  return out;
}

}  // namespace

FeatureTrace forward(const Network& net, const Vector& x) {
  if (x.size() != net.input_dim)
    throw std::invalid_argument("forward: input dim " + std::to_string(x.size()) +
                                " != network input dim " +
                                std::to_string(net.input_dim));
  for (double v : x)
    if (!std::isfinite(v))
      throw std::invalid_argument("forward: non-finite input entry");

  FeatureTrace trace;
  trace.input = x;
  trace.pre_activations.reserve(net.depth());
  trace.post_activations.reserve(net.depth());

  const Vector* in = &x;
  for (const Layer& layer : net.layers) {
    Vector pre = matvec(layer.weight, *in);
    for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += layer.bias[i];
    trace.post_activations.push_back(apply_activation(layer.activation, pre));
    trace.pre_activations.push_back(std::move(pre));
    in = &trace.post_activations.back();
  }
  trace.output = trace.pre_activations.back();
  return trace;
}

Network random_network(const std::vector<std::size_t>& dims, double sigma,
                       std::uint64_t seed) {
  if (dims.size() < 2)
    throw std::invalid_argument("random_network: need at least 2 dims");
  if (!(sigma > 0.0))
    throw std::invalid_argument("random_network: sigma must be > 0");

  Network net;
  net.input_dim = dims[0];
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.weight = Matrix(dims[l + 1], dims[l]);
    layer.bias = Vector(dims[l + 1], 0.0);
    for (std::size_t r = 0; r < dims[l + 1]; ++r) {
      RandomStream stream(seed, /*layer*/ l, /*row*/ r);
      for (std::size_t c = 0; c < dims[l]; ++c)
        layer.weight.at(r, c) = sigma * stream.normal();
    }
    layer.activation =
        (l + 2 == dims.size()) ? Activation::identity : Activation::relu;
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string serialize_network(const Network& net) {
  net.validate();
  std::ostringstream out;
  out << "attribnet v1\n";
  out << "dims " << net.input_dim;
  for (const Layer& l : net.layers) out << ' ' << l.out_dim();
  out << '\n';
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& l = net.layers[i];
    out << "layer " << i << " activation=" << activation_name(l.activation)
        << '\n';
    for (std::size_t r = 0; r < l.out_dim(); ++r) {
      for (std::size_t c = 0; c < l.in_dim(); ++c) {
        if (c) out << ' ';
        out << format_double(l.weight.at(r, c));
      }
      out << '\n';
    }
    for (std::size_t r = 0; r < l.out_dim(); ++r) {
      if (r) out << ' ';
      out << format_double(l.bias[r]);
    }
    out << '\n';
  }
  return out.str();
}

ParseError::ParseError(std::size_t line_no, const std::string& what)
    : std::runtime_error("parse error at line " + std::to_string(line_no) +
                         ": " + what),
      line(line_no) {}

namespace {

// Whitespace tokenizer with line tracking; strips '#' comments.
class TokenReader {
 public:
  explicit TokenReader(const std::string& text) : in_(text) {}

  bool next_line_tokens(std::vector<std::string>* tokens) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      if (auto pos = raw.find('#'); pos != std::string::npos) raw.erase(pos);
      std::istringstream ls(raw);
      tokens->clear();
      std::string tok;
      while (ls >> tok) tokens->push_back(tok);
      if (!tokens->empty()) return true;
    }
    return false;
  }

  std::size_t line() const { return line_; }

 private:
  std::istringstream in_;
  std::size_t line_ = 0;
};

double parse_value(const std::string& tok, std::size_t line) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &consumed);
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number, got '" + tok + "'");
  }
  if (consumed != tok.size())
    throw ParseError(line, "trailing characters in number '" + tok + "'");
  if (!std::isfinite(v))
    throw ParseError(line, "non-finite value '" + tok + "'");
  return v;
}

std::size_t parse_count(const std::string& tok, std::size_t line) {
  const double v = parse_value(tok, line);
  if (v < 0.0 || v != std::floor(v))
    throw ParseError(line, "expected a non-negative integer, got '" + tok + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

Network parse_network(const std::string& text) {
  TokenReader reader(text);
  std::vector<std::string> toks;

  if (!reader.next_line_tokens(&toks))
    throw ParseError(reader.line() + 1, "empty input, expected header");
  if (toks.size() != 2 || toks[0] != "attribnet" || toks[1] != "v1")
    throw ParseError(reader.line(), "expected header 'attribnet v1'");

  if (!reader.next_line_tokens(&toks))
    throw ParseError(reader.line() + 1, "expected 'dims ...'");
  if (toks.size() < 2 || toks[0] != "dims")
    throw ParseError(reader.line(), "expected 'dims d0 d1 ... dn'");
  std::vector<std::size_t> dims;
  for (std::size_t i = 1; i < toks.size(); ++i) {
    dims.push_back(parse_count(toks[i], reader.line()));
    if (dims.back() == 0) throw ParseError(reader.line(), "dims must be positive");
  }
  if (dims.size() < 2)
    throw ParseError(reader.line(), "need at least 2 dims (input and output)");

  Network net;
  net.input_dim = dims[0];
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (!reader.next_line_tokens(&toks))
      throw ParseError(reader.line() + 1,
                       "expected 'layer " + std::to_string(l) + " ...'");
    if (toks.size() != 3 || toks[0] != "layer")
      throw ParseError(reader.line(), "expected 'layer <index> activation=<tag>'");
    if (parse_count(toks[1], reader.line()) != l)
      throw ParseError(reader.line(),
                       "expected layer index " + std::to_string(l));
    const std::string kv = toks[2];
    if (kv.rfind("activation=", 0) != 0)
      throw ParseError(reader.line(), "expected 'activation=<tag>'");
    Layer layer;
    try {
      layer.activation = activation_from_name(kv.substr(11));
    } catch (const std::invalid_argument& e) {
      throw ParseError(reader.line(), e.what());
    }

    const std::size_t out_dim = dims[l + 1];
    const std::size_t in_dim = dims[l];
    layer.weight = Matrix(out_dim, in_dim);
    for (std::size_t r = 0; r < out_dim; ++r) {
      if (!reader.next_line_tokens(&toks))
        throw ParseError(reader.line() + 1, "expected a weight row");
      if (toks.size() != in_dim)
        throw ParseError(reader.line(),
                         "weight row has " + std::to_string(toks.size()) +
                             " values, expected " + std::to_string(in_dim));
      for (std::size_t c = 0; c < in_dim; ++c)
        layer.weight.at(r, c) = parse_value(toks[c], reader.line());
    }
    if (!reader.next_line_tokens(&toks))
      throw ParseError(reader.line() + 1, "expected a bias row");
    if (toks.size() != out_dim)
      throw ParseError(reader.line(), "bias row has " + std::to_string(toks.size()) +
                                          " values, expected " +
                                          std::to_string(out_dim));
    layer.bias.resize(out_dim);
    for (std::size_t r = 0; r < out_dim; ++r)
      layer.bias[r] = parse_value(toks[r], reader.line());
    net.layers.push_back(std::move(layer));
  }

  if (reader.next_line_tokens(&toks))
    throw ParseError(reader.line(), "unexpected trailing content");
  net.validate();
  return net;
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

void save_network_file(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write network file: " + path);
  out << serialize_network(net);
}

}  // namespace attribnet
