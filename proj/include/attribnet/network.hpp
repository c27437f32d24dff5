#pragma once

// Feed-forward networks of affine layers with activation tags, the forward
// pass with full feature-map recording, seeded random generation, and the
// canonical "attribnet v1" text format.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "attribnet/linalg.hpp"

namespace attribnet {

enum class Activation { identity, relu, gelu };

std::string activation_name(Activation a);
// Throws std::invalid_argument for unknown tags.
Activation activation_from_name(const std::string& name);

double gelu(double x);
double gelu_derivative(double x);

struct Layer {
  Matrix weight;   // R_out rows x S_in cols
  Vector bias;     // dim R_out
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return weight.cols; }
  std::size_t out_dim() const { return weight.rows; }

  bool operator==(const Layer&) const = default;
};

struct Network {
  std::vector<Layer> layers;  // length n >= 1
  std::size_t input_dim = 0;

  std::size_t depth() const { return layers.size(); }
  std::size_t output_dim() const { return layers.back().out_dim(); }
  // Width of the feature map entering layer i (i == 0 -> input_dim).
  std::size_t width_at(std::size_t i) const {
    return i == 0 ? input_dim : layers[i - 1].out_dim();
  }

  // Checks layer count, bias dims and consecutive-layer compatibility.
  // The network output is always the last pre-activation, so a non-identity
  // tag on the last layer only affects the recorded post-activation.
  void validate() const;

  bool operator==(const Network&) const = default;
};

struct FeatureTrace {
  Vector input;
  std::vector<Vector> pre_activations;   // g^(r) outputs, one per layer
  std::vector<Vector> post_activations;  // z^(r) = activation(g^(r))
  Vector output;                         // == pre_activations.back()

  // Feature map feeding layer i (i == 0 -> the input itself).
  const Vector& in_of_layer(std::size_t i) const {
    return i == 0 ? input : post_activations[i - 1];
  }
};

FeatureTrace forward(const Network& net, const Vector& x);

// Weights i.i.d. normal(0, sigma^2) from substreams keyed (seed, layer, row);
// biases zero; relu activations except identity at the last layer.
Network random_network(const std::vector<std::size_t>& dims, double sigma,
                       std::uint64_t seed);

std::string serialize_network(const Network& net);

struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& what);
  std::size_t line;
};

// Inverse of serialize_network; '#' starts a comment, whitespace separates
// fields. Throws ParseError with the offending line number.
Network parse_network(const std::string& text);

Network load_network_file(const std::string& path);
void save_network_file(const Network& net, const std::string& path);

// 17 significant digits; round-trips doubles exactly.
std::string format_double(double v);

}  // namespace attribnet
