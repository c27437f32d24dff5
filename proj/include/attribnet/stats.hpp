#pragma once

// Concentration-inequality calculators, the s1/s2 convergence statistics,
// the one-sided paired Wilcoxon signed-rank test, and the augmentation
// convergence-experiment harness.

#include <cstdint>
#include <string>
#include <vector>

#include "attribnet/attribution.hpp"
#include "attribnet/augment.hpp"
#include "attribnet/linalg.hpp"
#include "attribnet/network.hpp"

namespace attribnet {

// t(delta) = range * sqrt(-0.5 ln(delta/2)) / sqrt(m)
double hoeffding_deviation(double value_range, double delta, std::size_t m);

// range^2 * 0.5 ln(2/delta) / t^2, before the ceiling.
double hoeffding_sample_size_raw(double value_range, double delta, double t);
std::size_t hoeffding_sample_size(double value_range, double delta, double t);

// ||mean(a) - mean(b)||_2 over two equally sized, equally dimensioned map lists.
double s1(const std::vector<Vector>& maps_a, const std::vector<Vector>& maps_b);

// Distance of the l2-normalized means; in [0, 2]. Throws std::domain_error
// when either mean is zero (undefined statistic).
double s2(const std::vector<Vector>& maps_a, const std::vector<Vector>& maps_b);

enum class Alternative { greater, less };

struct WilcoxonResult {
  double statistic = 0.0;  // W+: rank sum of positive differences
  double p = 1.0;
  std::string method;      // "exact" | "approx" | "degenerate"
  std::size_t n_used = 0;  // sample size after dropping exact zeros
  bool degenerate = false; // all differences were zero
};

// Zeros dropped (Wilcoxon's convention), average ranks for ties; exact
// enumeration of all 2^n sign assignments for n <= max_exact_n, otherwise
// normal approximation with tie-corrected variance and 0.5 continuity
// correction. max_exact_n is exposed so tests can force either path.
WilcoxonResult wilcoxon_one_sided(const std::vector<double>& differences,
                                  Alternative alternative,
                                  std::size_t max_exact_n = 20);

struct AugmenterConfig {
  enum class Kind { gaussian, photometric };
  Kind kind = Kind::gaussian;
  double noise_sigma = 1.0;          // gaussian
  PhotometricRanges ranges;          // photometric
  std::size_t image_height = 0;      // photometric; input dim must be 3*h*w
  std::size_t image_width = 0;

  std::string name() const {
    return kind == Kind::gaussian ? "gaussian" : "photometric";
  }
};

enum class Normalization { none, l2 };

std::string normalization_name(Normalization n);

struct SamplePair {
  double s_a = 0.0;
  double s_b = 0.0;
  bool valid = true;  // false when an l2-normalized mean was zero
};

struct ConvergenceRun {
  Rule rule_a;  // by convention the gradient-family rule
  Rule rule_b;  // the LRP-family rule
  std::string augmentation;
  std::size_t m = 0;
  std::size_t reps = 0;
  Normalization normalization = Normalization::none;
  std::uint64_t seed = 0;
  std::vector<SamplePair> per_sample;
  double median_a = 0.0;
  double median_b = 0.0;
  double median_ratio = 0.0;  // median_a / median_b
  double wilcoxon_p = 1.0;
  std::string wilcoxon_method;
  std::size_t excluded = 0;  // invalid (zero-mean) samples
};

// For every base input, draws 2m augmentations from per-base substreams
// (indices 0..m-1 and m..2m-1 form the disjoint halves; both rules see the
// same draws), computes the half-average attribution maps per rule at the
// input layer, and records the chosen statistic. Gradient-rule maps are
// squared entrywise before averaging (sensitivity); gradient-times-input is
// averaged unsquared. Fully deterministic given the seed.
ConvergenceRun convergence_experiment(const Network& net,
                                      const std::vector<Vector>& base_inputs,
                                      const Rule& rule_a, const Rule& rule_b,
                                      const AugmenterConfig& augmenter,
                                      std::size_t m, Normalization normalization,
                                      std::uint64_t seed, const Vector& q);

std::string convergence_run_to_json(const ConvergenceRun& run);
std::string convergence_run_to_csv(const ConvergenceRun& run);
// Summary table in the "augmentation, m, p-value, ratio" layout.
std::string convergence_summary_table(const std::vector<ConvergenceRun>& runs);

double median(std::vector<double> values);

}  // namespace attribnet
