#include "attribnet/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "attribnet/kernels.hpp"
#include "attribnet/rng.hpp"

namespace attribnet {

namespace {

void check_hoeffding_common(double value_range, double delta) {
  if (!(value_range > 0.0))
    throw std::invalid_argument("hoeffding: value_range must be > 0");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("hoeffding: delta must be in (0,1)");
}

}  // namespace

double hoeffding_deviation(double value_range, double delta, std::size_t m) {
  check_hoeffding_common(value_range, delta);
  if (m < 1) throw std::invalid_argument("hoeffding_deviation: m must be >= 1");
  return value_range * std::sqrt(-0.5 * std::log(delta / 2.0)) /
         std::sqrt(static_cast<double>(m));
}

double hoeffding_sample_size_raw(double value_range, double delta, double t) {
  check_hoeffding_common(value_range, delta);
  if (!(t > 0.0))
    throw std::invalid_argument("hoeffding_sample_size: t must be > 0");
  return value_range * value_range * 0.5 * std::log(2.0 / delta) / (t * t);
}

std::size_t hoeffding_sample_size(double value_range, double delta, double t) {
  return static_cast<std::size_t>(
      std::ceil(hoeffding_sample_size_raw(value_range, delta, t)));
}

namespace {

Vector mean_of(const std::vector<Vector>& maps) {
  const std::size_t dim = maps.front().size();
  Vector mean(dim, 0.0);
  const auto& k = kernels::active();
  for (const Vector& v : maps) {
    if (v.size() != dim) throw std::invalid_argument("map dimension mismatch");
    k.axpy(mean.data(), 1.0, v.data(), dim);
  }
  k.scale(mean.data(), 1.0 / static_cast<double>(maps.size()), dim);
  return mean;
}

void check_lists(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("map lists must be non-empty and equally long");
  if (a.front().size() != b.front().size())
    throw std::invalid_argument("map lists have different dimensions");
}

}  // namespace

double s1(const std::vector<Vector>& maps_a, const std::vector<Vector>& maps_b) {
  check_lists(maps_a, maps_b);
  return l2_norm(sub(mean_of(maps_a), mean_of(maps_b)));
}

double s2(const std::vector<Vector>& maps_a, const std::vector<Vector>& maps_b) {
  check_lists(maps_a, maps_b);
  Vector ma = mean_of(maps_a);
  Vector mb = mean_of(maps_b);
  const double na = l2_norm(ma);
  const double nb = l2_norm(mb);
  if (na == 0.0 || nb == 0.0)
    throw std::domain_error("s2 undefined: a mean attribution map is zero");
  scale_in_place(ma, 1.0 / na);
  scale_in_place(mb, 1.0 / nb);
  return l2_norm(sub(ma, mb));
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Ranks of |d| with average ranks for ties, doubled so they are integers.
std::vector<std::uint64_t> doubled_ranks(const std::vector<double>& abs_d) {
  const std::size_t n = abs_d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return abs_d[i] < abs_d[j]; });
  std::vector<std::uint64_t> rank2(n, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    // average rank of positions i..j (1-based), doubled: (i+1 + j+1)
    const std::uint64_t r2 = static_cast<std::uint64_t>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    i = j + 1;
  }
  return rank2;
}

double exact_p(const std::vector<std::uint64_t>& rank2, std::uint64_t w2_obs,
               Alternative alt) {
  const std::size_t n = rank2.size();
  const std::uint64_t total = 1ULL << n;
  std::uint64_t count = 0;
  // Gray-code walk over all sign assignments; w2 tracks the doubled W+.
  std::uint64_t w2 = 0;
  std::uint64_t gray_prev = 0;
  auto counts = [&](std::uint64_t w) {
    return alt == Alternative::greater ? w >= w2_obs : w <= w2_obs;
  };
  if (counts(w2)) ++count;
  for (std::uint64_t k = 1; k < total; ++k) {
    const std::uint64_t gray = k ^ (k >> 1);
    const std::uint64_t changed = gray ^ gray_prev;
    const int bit = std::countr_zero(changed);
    if (gray & changed)
      w2 += rank2[static_cast<std::size_t>(bit)];
    else
      w2 -= rank2[static_cast<std::size_t>(bit)];
    gray_prev = gray;
    if (counts(w2)) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(total);
}

double approx_p(const std::vector<std::uint64_t>& rank2, double w_obs,
                Alternative alt) {
  const double n = static_cast<double>(rank2.size());
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  // tie correction: sum over tie groups of (t^3 - t) / 48
  std::vector<std::uint64_t> sorted = rank2;
  std::sort(sorted.begin(), sorted.end());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    var -= (t * t * t - t) / 48.0;
    i = j + 1;
  }
  const double sd = std::sqrt(var);
  if (sd == 0.0) return 1.0;
  // tail computed directly through erfc so large z does not cancel to 0
  if (alt == Alternative::greater)
    return normal_cdf(-(w_obs - mean - 0.5) / sd);
  return normal_cdf((w_obs - mean + 0.5) / sd);
}

}  // namespace

WilcoxonResult wilcoxon_one_sided(const std::vector<double>& differences,
                                  Alternative alternative,
                                  std::size_t max_exact_n) {
  if (differences.empty())
    throw std::invalid_argument("wilcoxon: empty difference list");
  WilcoxonResult res;
  std::vector<double> abs_d;
  std::vector<bool> positive;
  for (double d : differences) {
    if (d == 0.0) continue;  // Wilcoxon's zero-drop convention
    abs_d.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }
  res.n_used = abs_d.size();
  if (abs_d.empty()) {
    res.degenerate = true;
    res.method = "degenerate";
    res.p = 1.0;
    return res;
  }

  const std::vector<std::uint64_t> rank2 = doubled_ranks(abs_d);
  std::uint64_t w2 = 0;
  for (std::size_t i = 0; i < rank2.size(); ++i)
    if (positive[i]) w2 += rank2[i];
  res.statistic = 0.5 * static_cast<double>(w2);

  if (rank2.size() <= max_exact_n) {
    res.method = "exact";
    res.p = exact_p(rank2, w2, alternative);
  } else {
    res.method = "approx";
    res.p = approx_p(rank2, res.statistic, alternative);
  }
  return res;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string normalization_name(Normalization n) {
  return n == Normalization::l2 ? "l2" : "none";
}

namespace {

Vector augment_input(const AugmenterConfig& aug, const Vector& base,
                     std::uint64_t base_seed, std::size_t index) {
  if (aug.kind == AugmenterConfig::Kind::gaussian)
    return gaussian_augment(base, aug.noise_sigma, base_seed, index);
  const ImageTensor img =
      ImageTensor::from_flat(base, aug.image_height, aug.image_width);
  return photometric_augment(img, aug.ranges, base_seed, index).flatten();
}

// Attribution map in input space with the per-rule averaging transform
// (squared gradient = sensitivity).
Vector harness_map(const Network& net, const Vector& x, const Rule& rule,
                   const Vector& q) {
  Vector values = attribute(net, x, rule, q, 0).values;
  if (rule.kind == RuleKind::gradient)
    for (double& v : values) v *= v;
  return values;
}

}  // namespace

ConvergenceRun convergence_experiment(const Network& net,
                                      const std::vector<Vector>& base_inputs,
                                      const Rule& rule_a, const Rule& rule_b,
                                      const AugmenterConfig& augmenter,
                                      std::size_t m, Normalization normalization,
                                      std::uint64_t seed, const Vector& q) {
  if (m < 1) throw std::invalid_argument("convergence_experiment: m must be >= 1");
  if (base_inputs.empty())
    throw std::invalid_argument("convergence_experiment: no base inputs");
  if (augmenter.kind == AugmenterConfig::Kind::photometric &&
      ImageTensor::channels * augmenter.image_height * augmenter.image_width !=
          net.input_dim)
    throw std::invalid_argument(
        "convergence_experiment: image shape does not match network input dim");

  ConvergenceRun run;
  run.rule_a = rule_a;
  run.rule_b = rule_b;
  run.augmentation = augmenter.name();
  run.m = m;
  run.reps = base_inputs.size();
  run.normalization = normalization;
  run.seed = seed;

  for (std::size_t bi = 0; bi < base_inputs.size(); ++bi) {
    // Per-base substream; indices 0..m-1 and m..2m-1 are the disjoint halves.
    const std::uint64_t base_seed =
        RandomStream(seed, 0xba5eULL, bi).next_u64();

    std::vector<Vector> a_half1, a_half2, b_half1, b_half2;
    a_half1.reserve(m); a_half2.reserve(m);
    b_half1.reserve(m); b_half2.reserve(m);
    for (std::size_t i = 0; i < 2 * m; ++i) {
      const Vector x = augment_input(augmenter, base_inputs[bi], base_seed, i);
      Vector map_a = harness_map(net, x, rule_a, q);
      Vector map_b = harness_map(net, x, rule_b, q);
      if (i < m) {
        a_half1.push_back(std::move(map_a));
        b_half1.push_back(std::move(map_b));
      } else {
        a_half2.push_back(std::move(map_a));
        b_half2.push_back(std::move(map_b));
      }
    }

    SamplePair pair;
    try {
      if (normalization == Normalization::l2) {
        pair.s_a = s2(a_half1, a_half2);
        pair.s_b = s2(b_half1, b_half2);
      } else {
        pair.s_a = s1(a_half1, a_half2);
        pair.s_b = s1(b_half1, b_half2);
      }
    } catch (const std::domain_error&) {
      pair.valid = false;
      ++run.excluded;
    }
    run.per_sample.push_back(pair);
  }

  std::vector<double> s_a, s_b, diffs;
  for (const SamplePair& p : run.per_sample) {
    if (!p.valid) continue;
    s_a.push_back(p.s_a);
    s_b.push_back(p.s_b);
    diffs.push_back(p.s_a - p.s_b);
  }
  if (!s_a.empty()) {
    run.median_a = median(s_a);
    run.median_b = median(s_b);
    run.median_ratio = run.median_a / run.median_b;
    const WilcoxonResult w = wilcoxon_one_sided(diffs, Alternative::greater);
    run.wilcoxon_p = w.p;
    run.wilcoxon_method = w.method;
  } else {
    run.wilcoxon_method = "degenerate";
  }
  return run;
}

std::string convergence_run_to_json(const ConvergenceRun& run) {
  nlohmann::json j;
  j["rule_a"] = run.rule_a.describe();
  j["rule_b"] = run.rule_b.describe();
  j["augmentation"] = run.augmentation;
  j["m"] = run.m;
  j["reps"] = run.reps;
  j["normalization"] = normalization_name(run.normalization);
  j["seed"] = run.seed;
  j["median_a"] = run.median_a;
  j["median_b"] = run.median_b;
  j["median_ratio"] = run.median_ratio;
  j["wilcoxon_p"] = run.wilcoxon_p;
  j["wilcoxon_method"] = run.wilcoxon_method;
  j["excluded"] = run.excluded;
  nlohmann::json samples = nlohmann::json::array();
  for (const SamplePair& p : run.per_sample)
    samples.push_back({{"s_a", p.s_a}, {"s_b", p.s_b}, {"valid", p.valid}});
  j["per_sample"] = samples;
  return j.dump(2) + "\n";
}

std::string convergence_run_to_csv(const ConvergenceRun& run) {
  std::ostringstream out;
  out << "sample,s_a,s_b,valid\n";
  for (std::size_t i = 0; i < run.per_sample.size(); ++i) {
    const SamplePair& p = run.per_sample[i];
    out << i << ',' << format_double(p.s_a) << ',' << format_double(p.s_b) << ','
        << (p.valid ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string convergence_summary_table(const std::vector<ConvergenceRun>& runs) {
  std::ostringstream out;
  out << std::left << std::setw(42) << "comparison" << std::setw(14)
      << "augmentation" << std::setw(6) << "norm" << std::right << std::setw(5)
      << "m" << std::setw(13) << "p-value" << std::setw(13) << "ratio" << "\n";
  for (const ConvergenceRun& run : runs) {
    const std::string cmp = run.rule_a.describe() + " vs " + run.rule_b.describe();
    out << std::left << std::setw(42) << cmp << std::setw(14) << run.augmentation
        << std::setw(6) << normalization_name(run.normalization) << std::right
        << std::setw(5) << run.m << std::setw(13) << std::setprecision(3)
        << std::scientific << run.wilcoxon_p << std::setw(13)
        << std::setprecision(4) << std::defaultfloat << run.median_ratio << "\n";
  }
  return out.str();
}

}  // namespace attribnet
