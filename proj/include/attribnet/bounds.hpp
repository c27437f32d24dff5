#pragma once

// Closed-form bounds on transition singular values and layer-wise attribution
// sums, plus a verifier that pairs each bound with the empirically computed
// quantity on a concrete (network, input, rule) triple.

#include <cstddef>
#include <string>
#include <vector>

#include "attribnet/attribution.hpp"
#include "attribnet/network.hpp"

namespace attribnet {

// Relative slack absorbing floating-point accumulation; a bound "fails" only
// beyond it.
constexpr double kBoundSlack = 1e-9;

struct OneVectorCheck {
  double empirical = 0.0;  // ||M^T (1_S / sqrt(S))||_2
  double expected = 0.0;   // sqrt(R / S)
  bool applicable = false; // conserving rule, no degenerate columns
  std::string skip_reason;
};

// Singular-value check from the all-ones vector; skipped (with reason) when
// the transition has degenerate columns or a non-conserving rule.
OneVectorCheck one_vector_singular_check(const TransitionMatrix& m);

struct BetaSvdCap {
  double tight = 0.0;    // sqrt(R) * sqrt((1+beta)^2 + beta^2)
  double relaxed = 0.0;  // sqrt(R) * (1 + sqrt(2) beta)
};

BetaSvdCap beta_svd_cap(std::size_t out_dim, double beta);

struct SequentialCaps {
  double pos_cap = 0.0;
  double neg_floor = 0.0;
};

// Layer n-t attribution sums under the beta rule: positive sums bounded by
// 2^(t-1) (1+beta)^t, negative sums by -2^(t-1) beta (1+beta)^(t-1); for
// beta == 0 values lie in [0, 1].
SequentialCaps beta_sequential_caps(std::size_t t, double beta);

struct GammaSequentialCaps {
  double pos_cap = 0.0;
  double neg_floor = 0.0;
  double b_gamma = 0.0;  // max(1/(sqrt(g)-1), (1+g)/(1+g-sqrt(g)))
};

// Requires gamma > 1 (throws otherwise).
GammaSequentialCaps gamma_sequential_caps(std::size_t t, double gamma);

double b_gamma_factor(double gamma);

struct GammaConditionNeuron {
  std::size_t layer_index = 0;  // 1-based
  std::size_t neuron = 0;
  double pos_mass = 0.0;  // sum of positive w z products into the neuron
  double neg_mass = 0.0;  // sum of -(w z)_- (>= 0)
  bool in_scope = false;  // pos_mass > 0
  bool satisfied = false; // gamma^(-1/2) * neg_mass < pos_mass
};

struct GammaCondition {
  double gamma = 0.0;
  std::vector<GammaConditionNeuron> per_neuron;
  bool all_satisfied = true;  // over in-scope neurons
};

// Checks the per-neuron sign-mass condition that the gamma-rule bounds need,
// at every layer of the recorded trace. Requires gamma > 1.
GammaCondition gamma_condition(const FeatureTrace& trace, const Network& net,
                               double gamma);

// Hoeffding value range for the beta rule on an n-layer network:
// 2^(n-1) (1+2 beta) (1+beta)^(n-1), or 1 for beta == 0.
double beta_value_range(std::size_t n, double beta);

// Hoeffding value range for the gamma rule; requires gamma > 1.
double gamma_value_range(std::size_t n, double gamma);

// sqrt(R) * sigma: the root of the expected squared weight norm at
// initialization (not the chi-distribution mean, which is smaller by a
// Gamma-ratio factor).
double expected_weight_norm(std::size_t dim, double sigma);

struct LayerBoundsRow {
  std::size_t t = 0;            // steps from the output (1 = last layer)
  std::size_t layer_index = 0;  // n - t; 0 = input space
  double empirical_sigma_max = 0.0;
  bool sigma_converged = true;
  double sigma_cap = 0.0;       // beta rule only
  bool sigma_cap_applicable = false;
  OneVectorCheck one_vector;
  double pos_sum = 0.0;
  double neg_sum = 0.0;
  double pos_cap = 0.0;
  double neg_floor = 0.0;
  bool caps_applicable = false;  // lemma caps apply to this row
  bool gamma_condition_ok = true;
  bool degenerate = false;       // transition above this layer had zeroed columns
  std::string note;

  bool within_caps() const;
  bool sigma_within_cap() const;
  // Every applicable bound of this row holds within slack.
  bool ok() const;
};

struct BoundsReport {
  Rule rule;
  std::size_t depth = 0;
  std::vector<LayerBoundsRow> per_layer;  // t = 1..n
  double value_range = 0.0;   // Eq.-level range for the rule in use
  bool value_range_defined = false;
  bool value_range_converged = true;  // gradient rule: spectral norms converged
  double total_relevance = 0.0;       // attribution sum at the input layer
  bool gamma_condition_all = true;
  bool gamma_le_one = false;  // gamma <= 1 requested: lemma rows not applicable

  bool all_ok() const;
};

// Runs the full per-layer verification: attributions at every layer, sign
// sums against the sequential caps, transition spectral norms against the
// beta cap, the one-vector check, and the applicable value range. For LRP
// rules q must satisfy sum q = 1, q >= 0.
BoundsReport verify_network(const Network& net, const Vector& x, const Rule& rule,
                            const Vector& q);

std::string bounds_report_to_json(const BoundsReport& report);
std::string bounds_report_to_text(const BoundsReport& report);

}  // namespace attribnet
