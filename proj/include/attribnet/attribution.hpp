#pragma once

// Per-layer transition matrices for the gradient and LRP rules, chained to
// produce attribution maps at any layer. A transition matrix M has S rows
// (layer inputs) and R columns (layer outputs); entry (b, a) is the backward
// term assigned to the edge z_b -> g_a. Chaining multiplies the accumulated
// output-side scores by M of each layer from the output down.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "attribnet/linalg.hpp"
#include "attribnet/network.hpp"

namespace attribnet {

enum class RuleKind { gradient, gradient_times_input, lrp_beta, lrp_gamma };

std::string rule_kind_name(RuleKind k);

struct Rule {
  RuleKind kind = RuleKind::gradient;
  double beta = 0.0;    // lrp_beta only, >= 0
  double gamma = 0.0;   // lrp_gamma only, > 0
  bool backward_bias = false;

  static Rule gradient() { return {RuleKind::gradient, 0.0, 0.0, false}; }
  static Rule gradient_times_input() {
    return {RuleKind::gradient_times_input, 0.0, 0.0, false};
  }
  static Rule lrp_beta(double beta, bool backward_bias = false) {
    return {RuleKind::lrp_beta, beta, 0.0, backward_bias};
  }
  static Rule lrp_gamma(double gamma, bool backward_bias = false) {
    return {RuleKind::lrp_gamma, 0.0, gamma, backward_bias};
  }

  bool relevance_conserving() const {
    return kind == RuleKind::lrp_beta || kind == RuleKind::lrp_gamma;
  }
  std::string describe() const;
  // beta >= 0; gamma > 0.
  void validate() const;
};

struct TransitionMatrix {
  Matrix matrix;  // S rows x R cols
  Rule rule;
  std::size_t layer_index = 0;  // 1-based layer whose backward pass this is
  // Columns zeroed because the rule denominator vanished; all other columns
  // of a conserving rule sum to 1.
  std::set<std::size_t> degenerate_columns;
};

// Relative floor below which a rule denominator counts as vanished, measured
// against the absolute sum of its summands.
constexpr double kDegeneracyFloor = 1e-12;

// Gradient backward for one layer: diag(activation derivative at the
// upstream pre-activation) * W^T. upstream_pre is the pre-activation vector
// of the layer below (the raw input for the first layer, with
// upstream_activation == identity). For relu the mask is 1 where the
// pre-activation is > 0; the sign survives relu, so post-activation values
// work as well.
TransitionMatrix jacobian_transition(const Layer& layer, const Vector& upstream_pre,
                                     Activation upstream_activation);

// LRP-beta backward. Column a combines (1+beta) * (w z)_+ / P_a with
// -beta * (w z)_- / N_a. A side whose mass vanished is dropped; if only one
// side is present its fractions are emitted with coefficient 1 so the column
// still sums to 1 (this matches the gamma rule's behaviour in the same
// situation). Columns with both masses zero are zeroed and flagged.
// backward_bias adds the bias as a virtual input to the masses only.
TransitionMatrix lrp_beta_transition(const Layer& layer, const Vector& z_in,
                                     double beta, bool backward_bias = false);

// LRP-gamma backward: column a is (w z + gamma (w z)_+) / D_a with
// D_a = sum of the numerators. Columns with |D_a| under the degeneracy floor
// are zeroed and flagged.
TransitionMatrix lrp_gamma_transition(const Layer& layer, const Vector& z_in,
                                      double gamma, bool backward_bias = false);

// Transition of layer layer_index (1-based) under the given rule, evaluated
// at the recorded feature maps. LRP rules treat activations as identity in
// the backward pass; the gradient rule folds the upstream activation
// derivative into the transition.
TransitionMatrix rule_transition(const Rule& rule, const Network& net,
                                 const FeatureTrace& trace, std::size_t layer_index);

struct AttributionMap {
  std::size_t layer_index = 0;  // 0 = input space
  Vector values;
  Rule rule;
  Vector q;
  // (layer_index, degenerate column set) for every chained transition that
  // had degenerate columns.
  std::vector<std::pair<std::size_t, std::set<std::size_t>>> degenerate;
};

// Full backward chain: transitions for layers 1..n and the attribution
// vector at every layer boundary (index l = attribution onto the feature map
// entering layer l+1; index 0 = input space).
struct AttributionChain {
  std::vector<TransitionMatrix> transitions;  // transitions[l-1] for layer l
  std::vector<Vector> layer_values;           // layer_values[l], l = 0..n-1
  FeatureTrace trace;
};

AttributionChain build_chain(const Network& net, const Vector& x, const Rule& rule,
                             const Vector& q);

// q-weighted attribution at target_layer (0 = input space, n-1 = the feature
// map entering the last layer). gradient_times_input multiplies the result
// entrywise by the feature map at the target layer.
AttributionMap attribute(const Network& net, const Vector& x, const Rule& rule,
                         const Vector& q, std::size_t target_layer);

struct ValueRangeResult {
  double value = 0.0;
  bool converged = true;  // false if any spectral norm failed to converge
};

// 2 * L^(n-1) * prod_l sigma_max(W_l): the gradient attribution value range
// for activation Lipschitz constant L.
ValueRangeResult gradient_value_range(const Network& net, double trace_lipschitz);

std::string attribution_to_csv(const AttributionMap& map);
std::string attribution_to_json(const AttributionMap& map);

}  // namespace attribnet
