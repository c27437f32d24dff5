#include "attribnet/bounds.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "attribnet/kernels.hpp"

namespace attribnet {

OneVectorCheck one_vector_singular_check(const TransitionMatrix& m) {
  OneVectorCheck check;
  if (!m.rule.relevance_conserving()) {
    check.skip_reason = "rule is not relevance conserving";
    return check;
  }
  if (!m.degenerate_columns.empty()) {
    check.skip_reason = "transition has degenerate columns";
    return check;
  }
  const std::size_t S = m.matrix.rows;
  const std::size_t R = m.matrix.cols;
  const Vector ones(S, 1.0 / std::sqrt(static_cast<double>(S)));
  check.empirical = l2_norm(apply_transposed(m.matrix, ones));
  check.expected = std::sqrt(static_cast<double>(R) / static_cast<double>(S));
  check.applicable = true;
  return check;
}

BetaSvdCap beta_svd_cap(std::size_t out_dim, double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta_svd_cap: beta must be >= 0");
  const double root_r = std::sqrt(static_cast<double>(out_dim));
  BetaSvdCap cap;
  cap.tight = root_r * std::sqrt((1.0 + beta) * (1.0 + beta) + beta * beta);
  cap.relaxed = root_r * (1.0 + std::sqrt(2.0) * beta);
  return cap;
}

SequentialCaps beta_sequential_caps(std::size_t t, double beta) {
  if (t < 1) throw std::invalid_argument("beta_sequential_caps: t must be >= 1");
  if (!(beta >= 0.0))
    throw std::invalid_argument("beta_sequential_caps: beta must be >= 0");
  SequentialCaps caps;
  if (beta == 0.0) {
    caps.pos_cap = 1.0;
    caps.neg_floor = 0.0;
    return caps;
  }
  const double td = static_cast<double>(t);
  caps.pos_cap = std::pow(2.0, td - 1.0) * std::pow(1.0 + beta, td);
  caps.neg_floor = -std::pow(2.0, td - 1.0) * beta * std::pow(1.0 + beta, td - 1.0);
  return caps;
}

double b_gamma_factor(double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("b_gamma_factor: gamma must be > 1");
  const double root = std::sqrt(gamma);
  return std::max(1.0 / (root - 1.0), (1.0 + gamma) / (1.0 + gamma - root));
}

GammaSequentialCaps gamma_sequential_caps(std::size_t t, double gamma) {
  if (t < 1) throw std::invalid_argument("gamma_sequential_caps: t must be >= 1");
  if (!(gamma > 1.0))
    throw std::invalid_argument("gamma_sequential_caps: gamma must be > 1");
  const double root = std::sqrt(gamma);
  const double td = static_cast<double>(t);
  GammaSequentialCaps caps;
  caps.b_gamma = b_gamma_factor(gamma);
  const double growth =
      std::pow(2.0, td - 1.0) * std::pow(caps.b_gamma, td - 1.0);
  caps.pos_cap = growth * (1.0 + gamma) / (1.0 + gamma - root);
  caps.neg_floor = -growth / (root - 1.0);
  return caps;
}

GammaCondition gamma_condition(const FeatureTrace& trace, const Network& net,
                               double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("gamma_condition: gamma must be > 1");
  GammaCondition cond;
  cond.gamma = gamma;
  const double inv_root = 1.0 / std::sqrt(gamma);
  const auto& k = kernels::active();
  for (std::size_t l = 1; l <= net.depth(); ++l) {
    const Layer& layer = net.layers[l - 1];
    const Vector& z = trace.in_of_layer(l - 1);
    for (std::size_t a = 0; a < layer.out_dim(); ++a) {
      GammaConditionNeuron n;
      n.layer_index = l;
      n.neuron = a;
      double pos = 0.0, neg = 0.0;
      k.pos_neg_masses(layer.weight.row(a), z.data(), layer.in_dim(), &pos, &neg);
      n.pos_mass = pos;
      n.neg_mass = -neg;
      n.in_scope = pos > 0.0;
      n.satisfied = !n.in_scope || inv_root * n.neg_mass < n.pos_mass;
      if (n.in_scope && !n.satisfied) cond.all_satisfied = false;
      cond.per_neuron.push_back(n);
    }
  }
  return cond;
}

double beta_value_range(std::size_t n, double beta) {
  if (n < 1) throw std::invalid_argument("beta_value_range: n must be >= 1");
  if (!(beta >= 0.0))
    throw std::invalid_argument("beta_value_range: beta must be >= 0");
  if (beta == 0.0) return 1.0;
  const double nd = static_cast<double>(n);
  return std::pow(2.0, nd - 1.0) * (1.0 + 2.0 * beta) * std::pow(1.0 + beta, nd - 1.0);
}

double gamma_value_range(std::size_t n, double gamma) {
  if (n < 1) throw std::invalid_argument("gamma_value_range: n must be >= 1");
  if (!(gamma > 1.0))
    throw std::invalid_argument("gamma_value_range: gamma must be > 1");
  const double root = std::sqrt(gamma);
  const double nd = static_cast<double>(n);
  return std::pow(2.0, nd - 1.0) * std::pow(b_gamma_factor(gamma), nd - 1.0) *
         ((1.0 + gamma) / (1.0 + gamma - root) + 1.0 / (root - 1.0));
}

double expected_weight_norm(std::size_t dim, double sigma) {
  if (dim < 1) throw std::invalid_argument("expected_weight_norm: dim must be >= 1");
  if (!(sigma > 0.0))
    throw std::invalid_argument("expected_weight_norm: sigma must be > 0");
  return std::sqrt(static_cast<double>(dim)) * sigma;
}

bool LayerBoundsRow::within_caps() const {
  if (!caps_applicable) return true;
  return pos_sum <= pos_cap * (1.0 + kBoundSlack) + kBoundSlack &&
         neg_sum >= neg_floor * (1.0 + kBoundSlack) - kBoundSlack;
}

bool LayerBoundsRow::sigma_within_cap() const {
  if (!sigma_cap_applicable || !sigma_converged) return true;
  return empirical_sigma_max <= sigma_cap * (1.0 + kBoundSlack) + kBoundSlack;
}

bool LayerBoundsRow::ok() const {
  if (!within_caps() || !sigma_within_cap()) return false;
  if (one_vector.applicable &&
      std::abs(one_vector.empirical - one_vector.expected) >= kBoundSlack)
    return false;
  return true;
}

bool BoundsReport::all_ok() const {
  for (const auto& row : per_layer)
    if (!row.ok()) return false;
  return true;
}

BoundsReport verify_network(const Network& net, const Vector& x, const Rule& rule,
                            const Vector& q) {
  rule.validate();
  if (q.size() != net.output_dim())
    throw std::invalid_argument("verify_network: q dim mismatch");
  double q_sum = 0.0;
  for (double v : q) {
    if (v < 0.0)
      throw std::invalid_argument("verify_network: q entries must be >= 0");
    q_sum += v;
  }
  if (std::abs(q_sum - 1.0) > 1e-9)
    throw std::invalid_argument("verify_network: q must sum to 1");

  BoundsReport report;
  report.rule = rule;
  report.depth = net.depth();

  const AttributionChain chain = build_chain(net, x, rule, q);
  const std::size_t n = net.depth();

  GammaCondition cond;
  bool gamma_rule = rule.kind == RuleKind::lrp_gamma;
  if (gamma_rule) {
    if (rule.gamma > 1.0) {
      cond = gamma_condition(chain.trace, net, rule.gamma);
      report.gamma_condition_all = cond.all_satisfied;
    } else {
      report.gamma_le_one = true;
      report.gamma_condition_all = false;
    }
  }

  // Degenerate transitions invalidate lemma rows at their layer and below.
  bool degenerate_seen = false;
  for (std::size_t t = 1; t <= n; ++t) {
    const std::size_t l = n - t + 1;  // 1-based layer whose transition this is
    const TransitionMatrix& trans = chain.transitions[l - 1];
    LayerBoundsRow row;
    row.t = t;
    row.layer_index = n - t;
    degenerate_seen = degenerate_seen || !trans.degenerate_columns.empty();
    row.degenerate = degenerate_seen;

    const SingularValueResult sv = top_singular_value(trans.matrix);
    row.empirical_sigma_max = sv.value;
    row.sigma_converged = sv.converged;
    if (rule.kind == RuleKind::lrp_beta) {
      row.sigma_cap = beta_svd_cap(trans.matrix.cols, rule.beta).tight;
      row.sigma_cap_applicable = true;
    }
    row.one_vector = one_vector_singular_check(trans);

    const Vector& att = chain.layer_values[row.layer_index];
    double pos = 0.0, neg = 0.0;
    for (double v : att) {
      if (v > 0.0) pos += v;
      if (v < 0.0) neg += v;
    }
    row.pos_sum = pos;
    row.neg_sum = neg;

    if (rule.kind == RuleKind::lrp_beta) {
      const SequentialCaps caps = beta_sequential_caps(t, rule.beta);
      row.pos_cap = caps.pos_cap;
      row.neg_floor = caps.neg_floor;
      row.caps_applicable = !degenerate_seen;
      if (degenerate_seen) row.note = "degenerate columns: caps informational";
    } else if (gamma_rule) {
      if (rule.gamma > 1.0) {
        const GammaSequentialCaps caps = gamma_sequential_caps(t, rule.gamma);
        row.pos_cap = caps.pos_cap;
        row.neg_floor = caps.neg_floor;
        row.gamma_condition_ok = cond.all_satisfied;
        row.caps_applicable = !degenerate_seen && cond.all_satisfied;
        if (!cond.all_satisfied)
          row.note = "sign-mass condition violated: caps not applicable";
        else if (degenerate_seen)
          row.note = "degenerate columns: caps informational";
      } else {
        row.gamma_condition_ok = false;
        row.caps_applicable = false;
        row.note = "gamma <= 1: caps not applicable";
      }
    }
    report.per_layer.push_back(std::move(row));
  }

  const Vector& input_att = chain.layer_values[0];
  report.total_relevance = kernels::active().sum(input_att.data(), input_att.size());

  switch (rule.kind) {
    case RuleKind::lrp_beta:
      report.value_range = beta_value_range(n, rule.beta);
      report.value_range_defined = true;
      break;
    case RuleKind::lrp_gamma:
      if (rule.gamma > 1.0) {
        report.value_range = gamma_value_range(n, rule.gamma);
        report.value_range_defined = true;
      }
      break;
    case RuleKind::gradient:
    case RuleKind::gradient_times_input: {
      const ValueRangeResult r = gradient_value_range(net, 1.0);
      report.value_range = r.value;
      report.value_range_defined = true;
      report.value_range_converged = r.converged;
      break;
    }
  }
  return report;
}

std::string bounds_report_to_json(const BoundsReport& report) {
  nlohmann::json j;
  j["rule"] = report.rule.describe();
  j["depth"] = report.depth;
  j["global"] = {
      {"value_range", report.value_range},
      {"value_range_defined", report.value_range_defined},
      {"value_range_converged", report.value_range_converged},
      {"total_relevance", report.total_relevance},
      {"gamma_condition_all", report.gamma_condition_all},
      {"gamma_le_one", report.gamma_le_one},
      {"all_ok", report.all_ok()},
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.per_layer) {
    nlohmann::json r;
    r["t"] = row.t;
    r["layer_index"] = row.layer_index;
    r["empirical_sigma_max"] = row.empirical_sigma_max;
    r["sigma_converged"] = row.sigma_converged;
    if (row.sigma_cap_applicable) r["sigma_cap"] = row.sigma_cap;
    if (row.one_vector.applicable) {
      r["one_vector_sv"] = row.one_vector.empirical;
      r["one_vector_expected"] = row.one_vector.expected;
    } else {
      r["one_vector_skipped"] = row.one_vector.skip_reason;
    }
    r["pos_sum"] = row.pos_sum;
    r["neg_sum"] = row.neg_sum;
    if (report.rule.relevance_conserving()) {
      r["pos_cap"] = row.pos_cap;
      r["neg_floor"] = row.neg_floor;
    }
    r["caps_applicable"] = row.caps_applicable;
    r["gamma_condition_ok"] = row.gamma_condition_ok;
    r["degenerate"] = row.degenerate;
    r["ok"] = row.ok();
    if (!row.note.empty()) r["note"] = row.note;
    rows.push_back(std::move(r));
  }
  j["per_layer"] = rows;
  return j.dump(2) + "\n";
}

namespace {

std::string fixed(double v, int width = 13) {
  std::ostringstream out;
  out << ' ' << std::setw(width - 1) << std::setprecision(5) << std::scientific
      << v;
  return out.str();
}

}  // namespace

std::string bounds_report_to_text(const BoundsReport& report) {
  std::ostringstream out;
  out << "rule: " << report.rule.describe() << "  depth: " << report.depth << "\n";
  out << "  t  layer    sigma_max    sigma_cap      pos_sum      pos_cap"
         "      neg_sum    neg_floor  status\n";
  for (const auto& row : report.per_layer) {
    out << std::setw(3) << row.t << "  " << std::setw(5) << row.layer_index;
    out << fixed(row.empirical_sigma_max);
    if (row.sigma_cap_applicable)
      out << fixed(row.sigma_cap);
    else
      out << std::setw(13) << "-";
    out << fixed(row.pos_sum);
    if (report.rule.relevance_conserving())
      out << fixed(row.pos_cap);
    else
      out << std::setw(13) << "-";
    out << fixed(row.neg_sum);
    if (report.rule.relevance_conserving())
      out << fixed(row.neg_floor);
    else
      out << std::setw(13) << "-";
    out << "  " << (row.ok() ? (row.caps_applicable ? "ok" : "n/a") : "FAIL");
    if (!row.note.empty()) out << "  (" << row.note << ")";
    out << "\n";
  }
  out << "value_range: ";
  if (report.value_range_defined)
    out << format_double(report.value_range)
        << (report.value_range_converged ? "" : " (spectral norm not converged)");
  else
    out << "undefined (gamma <= 1)";
  out << "\n";
  out << "total_relevance: " << format_double(report.total_relevance) << "\n";
  out << "overall: " << (report.all_ok() ? "all bounds hold" : "BOUND VIOLATION")
      << "\n";
  return out.str();
}

}  // namespace attribnet
