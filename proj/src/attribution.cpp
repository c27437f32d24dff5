#include "attribnet/attribution.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "attribnet/kernels.hpp"

namespace attribnet {

std::string rule_kind_name(RuleKind k) {
  switch (k) {
    case RuleKind::gradient: return "gradient";
    case RuleKind::gradient_times_input: return "gradient_times_input";
    case RuleKind::lrp_beta: return "lrp_beta";
    case RuleKind::lrp_gamma: return "lrp_gamma";
  }
  return "gradient";
}

std::string Rule::describe() const {
  switch (kind) {
    case RuleKind::gradient: return "gradient";
    case RuleKind::gradient_times_input: return "gradient-x-input";
    case RuleKind::lrp_beta: {
      std::ostringstream out;
      out << "lrp-beta(" << beta << (backward_bias ? ",backward-bias" : "") << ")";
      return out.str();
    }
    case RuleKind::lrp_gamma: {
      std::ostringstream out;
      out << "lrp-gamma(" << gamma << (backward_bias ? ",backward-bias" : "") << ")";
      return out.str();
    }
  }
  return "gradient";
}

void Rule::validate() const {
  if (kind == RuleKind::lrp_beta && !(beta >= 0.0))
    throw std::invalid_argument("lrp_beta requires beta >= 0");
  if (kind == RuleKind::lrp_gamma && !(gamma > 0.0))
    throw std::invalid_argument("lrp_gamma requires gamma > 0");
}

TransitionMatrix jacobian_transition(const Layer& layer, const Vector& upstream_pre,
                                     Activation upstream_activation) {
  if (upstream_pre.size() != layer.in_dim())
    throw std::invalid_argument("jacobian_transition: upstream dim mismatch");

  const std::size_t S = layer.in_dim();
  const std::size_t R = layer.out_dim();

  Vector deriv(S, 1.0);
  switch (upstream_activation) {
    case Activation::identity:
      break;
    case Activation::relu:
      for (std::size_t b = 0; b < S; ++b)
        deriv[b] = upstream_pre[b] > 0.0 ? 1.0 : 0.0;
      break;
    case Activation::gelu:
      for (std::size_t b = 0; b < S; ++b)
        deriv[b] = gelu_derivative(upstream_pre[b]);
      break;
  }

  TransitionMatrix t;
  t.rule = Rule::gradient();
  t.matrix = Matrix(S, R);
  Vector column(S);
  const auto& k = kernels::active();
  for (std::size_t a = 0; a < R; ++a) {
    k.mul(column.data(), deriv.data(), layer.weight.row(a), S);
    for (std::size_t b = 0; b < S; ++b) t.matrix.at(b, a) = column[b];
  }
  return t;
}

namespace {

// Shared column fill for the LRP rules: writes cpos*(w z)_+ + cneg*(w z)_-
// into column a; a zero column is recorded as degenerate.
void fill_column(TransitionMatrix* t, std::size_t a, const double* w,
                 const double* z, double cpos, double cneg, Vector* scratch) {
  const std::size_t S = t->matrix.rows;
  kernels::active().combine_pos_neg(scratch->data(), w, z, cpos, cneg, S);
  for (std::size_t b = 0; b < S; ++b) t->matrix.at(b, a) = (*scratch)[b];
}

void zero_column(TransitionMatrix* t, std::size_t a) {
  t->degenerate_columns.insert(a);
  // matrix entries are zero-initialized already
}

}  // namespace

TransitionMatrix lrp_beta_transition(const Layer& layer, const Vector& z_in,
                                     double beta, bool backward_bias) {
  if (z_in.size() != layer.in_dim())
    throw std::invalid_argument("lrp_beta_transition: input dim mismatch");
  if (!(beta >= 0.0))
    throw std::invalid_argument("lrp_beta_transition: beta must be >= 0");

  const std::size_t S = layer.in_dim();
  const std::size_t R = layer.out_dim();

  TransitionMatrix t;
  t.rule = Rule::lrp_beta(beta, backward_bias);
  t.matrix = Matrix(S, R);
  Vector scratch(S);
  const auto& k = kernels::active();

  for (std::size_t a = 0; a < R; ++a) {
    double pos = 0.0, neg = 0.0;
    k.pos_neg_masses(layer.weight.row(a), z_in.data(), S, &pos, &neg);
    if (backward_bias) {
      const double bias = layer.bias[a];
      pos += bias > 0.0 ? bias : 0.0;
      neg += bias < 0.0 ? bias : 0.0;
    }
    const bool has_pos = pos > 0.0;
    const bool has_neg = neg < 0.0;
    if (!has_pos && !has_neg) {
      zero_column(&t, a);
      continue;
    }
    // When one side carries no mass its partner term is emitted with
    // coefficient 1, which keeps the column sum at 1 and agrees with the
    // gamma rule in the same situation.
    double cpos = 0.0, cneg = 0.0;
    if (has_pos && has_neg) {
      cpos = (1.0 + beta) / pos;
      cneg = -beta / neg;
    } else if (has_pos) {
      cpos = 1.0 / pos;
    } else {
      cneg = 1.0 / neg;
    }
    fill_column(&t, a, layer.weight.row(a), z_in.data(), cpos, cneg, &scratch);
  }
  return t;
}

TransitionMatrix lrp_gamma_transition(const Layer& layer, const Vector& z_in,
                                      double gamma, bool backward_bias) {
  if (z_in.size() != layer.in_dim())
    throw std::invalid_argument("lrp_gamma_transition: input dim mismatch");
  if (!(gamma > 0.0))
    throw std::invalid_argument("lrp_gamma_transition: gamma must be > 0");

  const std::size_t S = layer.in_dim();
  const std::size_t R = layer.out_dim();

  TransitionMatrix t;
  t.rule = Rule::lrp_gamma(gamma, backward_bias);
  t.matrix = Matrix(S, R);
  Vector scratch(S);
  const auto& k = kernels::active();

  for (std::size_t a = 0; a < R; ++a) {
    double pos = 0.0, neg = 0.0;
    k.pos_neg_masses(layer.weight.row(a), z_in.data(), S, &pos, &neg);
    if (backward_bias) {
      const double bias = layer.bias[a];
      pos += bias > 0.0 ? bias : 0.0;
      neg += bias < 0.0 ? bias : 0.0;
    }
    // denominator sum_b (y_b + gamma (y_b)_+): positive terms (1+gamma)y,
    // negative terms y
    const double denom = (1.0 + gamma) * pos + neg;
    const double summand_scale = (1.0 + gamma) * pos - neg;
    if (summand_scale == 0.0 || std::abs(denom) < kDegeneracyFloor * summand_scale) {
      zero_column(&t, a);
      continue;
    }
    fill_column(&t, a, layer.weight.row(a), z_in.data(), (1.0 + gamma) / denom,
                1.0 / denom, &scratch);
  }
  return t;
}

TransitionMatrix rule_transition(const Rule& rule, const Network& net,
                                 const FeatureTrace& trace, std::size_t layer_index) {
  if (layer_index == 0 || layer_index > net.depth())
    throw std::invalid_argument("rule_transition: layer_index out of range");
  const Layer& layer = net.layers[layer_index - 1];
  TransitionMatrix t;
  switch (rule.kind) {
    case RuleKind::gradient:
    case RuleKind::gradient_times_input: {
      const bool first = layer_index == 1;
      const Vector& upstream_pre =
          first ? trace.input : trace.pre_activations[layer_index - 2];
      const Activation act =
          first ? Activation::identity : net.layers[layer_index - 2].activation;
      t = jacobian_transition(layer, upstream_pre, act);
      break;
    }
    case RuleKind::lrp_beta:
      t = lrp_beta_transition(layer, trace.in_of_layer(layer_index - 1), rule.beta,
                              rule.backward_bias);
      break;
    case RuleKind::lrp_gamma:
      t = lrp_gamma_transition(layer, trace.in_of_layer(layer_index - 1), rule.gamma,
                               rule.backward_bias);
      break;
  }
  t.rule = rule;
  t.layer_index = layer_index;
  return t;
}

AttributionChain build_chain(const Network& net, const Vector& x, const Rule& rule,
                             const Vector& q) {
  rule.validate();
  if (q.size() != net.output_dim())
    throw std::invalid_argument("build_chain: q dim " + std::to_string(q.size()) +
                                " != output dim " +
                                std::to_string(net.output_dim()));

  AttributionChain chain;
  chain.trace = forward(net, x);
  chain.transitions.reserve(net.depth());
  for (std::size_t l = 1; l <= net.depth(); ++l)
    chain.transitions.push_back(rule_transition(rule, net, chain.trace, l));

  chain.layer_values.assign(net.depth(), Vector{});
  Vector v = q;
  for (std::size_t l = net.depth(); l >= 1; --l) {
    v = matvec(chain.transitions[l - 1].matrix, v);
    chain.layer_values[l - 1] = v;
  }
  return chain;
}

AttributionMap attribute(const Network& net, const Vector& x, const Rule& rule,
                         const Vector& q, std::size_t target_layer) {
  if (target_layer >= net.depth())
    throw std::invalid_argument("attribute: target_layer " +
                                std::to_string(target_layer) +
                                " out of range (network depth " +
                                std::to_string(net.depth()) + ")");
  AttributionChain chain = build_chain(net, x, rule, q);

  AttributionMap map;
  map.layer_index = target_layer;
  map.rule = rule;
  map.q = q;
  map.values = chain.layer_values[target_layer];
  if (rule.kind == RuleKind::gradient_times_input) {
    const Vector& feature = chain.trace.in_of_layer(target_layer);
    for (std::size_t i = 0; i < map.values.size(); ++i) map.values[i] *= feature[i];
  }
  for (std::size_t l = target_layer + 1; l <= net.depth(); ++l) {
    const auto& t = chain.transitions[l - 1];
    if (!t.degenerate_columns.empty())
      map.degenerate.emplace_back(l, t.degenerate_columns);
  }
  return map;
}

ValueRangeResult gradient_value_range(const Network& net, double trace_lipschitz) {
  if (!(trace_lipschitz > 0.0))
    throw std::invalid_argument("gradient_value_range: lipschitz constant must be > 0");
  ValueRangeResult res;
  double prod = 1.0;
  for (const Layer& l : net.layers) {
    const SingularValueResult sv = top_singular_value(l.weight);
    res.converged = res.converged && sv.converged;
    prod *= sv.value;
  }
  res.value = 2.0 *
              std::pow(trace_lipschitz, static_cast<double>(net.depth()) - 1.0) *
              prod;
  return res;
}

std::string attribution_to_csv(const AttributionMap& map) {
  std::ostringstream out;
  out << "index,value\n";
  for (std::size_t i = 0; i < map.values.size(); ++i)
    out << i << ',' << format_double(map.values[i]) << '\n';
  return out.str();
}

namespace {

nlohmann::json rule_to_json(const Rule& rule) {
  nlohmann::json j;
  j["kind"] = rule_kind_name(rule.kind);
  if (rule.kind == RuleKind::lrp_beta) j["beta"] = rule.beta;
  if (rule.kind == RuleKind::lrp_gamma) j["gamma"] = rule.gamma;
  j["backward_bias"] = rule.backward_bias;
  return j;
}

}  // namespace

std::string attribution_to_json(const AttributionMap& map) {
  nlohmann::json j;
  j["layer_index"] = map.layer_index;
  j["rule"] = rule_to_json(map.rule);
  j["q"] = map.q;
  j["values"] = map.values;
  nlohmann::json deg = nlohmann::json::array();
  for (const auto& [layer, cols] : map.degenerate) {
    nlohmann::json d;
    d["layer"] = layer;
    d["columns"] = std::vector<std::size_t>(cols.begin(), cols.end());
    deg.push_back(d);
  }
  j["degenerate"] = deg;
  return j.dump(2) + "\n";
}

}  // namespace attribnet
