// Acceptance suite: property-level and direction-level verification of the
// transition-matrix bounds and the convergence comparison, at desk scale.
// Prints one pass/fail line per criterion; exit code is the failure count.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "attribnet/attribution.hpp"
#include "attribnet/augment.hpp"
#include "attribnet/bounds.hpp"
#include "attribnet/linalg.hpp"
#include "attribnet/network.hpp"
#include "attribnet/rng.hpp"
#include "attribnet/stats.hpp"
#include "oracles.hpp"

using namespace attribnet;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool passed;
  std::string detail;
  double seconds;
};

std::vector<Criterion> g_results;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void record(int id, const std::string& name, bool passed,
            const std::string& detail, double seconds) {
  g_results.push_back({id, name, passed, detail, seconds});
  std::printf("[%s] %2d. %s: %s (%.1f s)\n", passed ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
}

Layer seeded_layer(std::size_t out_dim, std::size_t in_dim, std::uint64_t seed) {
  Layer l;
  l.weight = Matrix(out_dim, in_dim);
  RandomStream stream(seed, 0xacc1);
  for (double& v : l.weight.entries) v = stream.normal();
  l.bias = Vector(out_dim, 0.0);
  return l;
}

double column_sum(const Matrix& m, std::size_t col) {
  double s = 0.0;
  for (std::size_t r = 0; r < m.rows; ++r) s += m.at(r, col);
  return s;
}

// Criteria 1-3 share one sweep over >= 1000 seeded random layers.
void criteria_1_to_3() {
  Timer timer;
  const std::size_t layer_count = 1000;
  const std::vector<double> betas = {0.0, 0.5, 1.0, 2.0};
  const std::vector<double> gammas = {4.0, 100.0, 1000.0};

  double worst_colsum = 0.0;
  double worst_one_vector = 0.0;
  double worst_sigma_slack = -std::numeric_limits<double>::infinity();
  bool relaxed_ok = true;
  std::size_t transitions = 0, one_vector_checks = 0, sigma_checks = 0;

  for (std::size_t i = 0; i < layer_count; ++i) {
    RandomStream shape(1000 + i, 0xacc2);
    const std::size_t in_dim = 2 + shape.next_u64() % 15;   // widths 2..16
    const std::size_t out_dim = 2 + shape.next_u64() % 15;
    const Layer layer = seeded_layer(out_dim, in_dim, 2000 + i);
    const Vector z = RandomStream(3000 + i, 0xacc3).normals(in_dim);

    std::vector<TransitionMatrix> trans;
    for (double beta : betas) trans.push_back(lrp_beta_transition(layer, z, beta));
    for (double gamma : gammas)
      trans.push_back(lrp_gamma_transition(layer, z, gamma));

    for (std::size_t k = 0; k < trans.size(); ++k) {
      const TransitionMatrix& t = trans[k];
      ++transitions;
      for (std::size_t a = 0; a < t.matrix.cols; ++a) {
        if (t.degenerate_columns.count(a)) continue;
        worst_colsum =
            std::max(worst_colsum, std::abs(column_sum(t.matrix, a) - 1.0));
      }
      const OneVectorCheck check = one_vector_singular_check(t);
      if (check.applicable) {
        ++one_vector_checks;
        worst_one_vector = std::max(
            worst_one_vector, std::abs(check.empirical - check.expected));
      }
      if (k < betas.size()) {
        const BetaSvdCap cap = beta_svd_cap(out_dim, betas[k]);
        relaxed_ok = relaxed_ok && cap.tight <= cap.relaxed + 1e-12;
        const double sigma = top_singular_value(t.matrix).value;
        ++sigma_checks;
        worst_sigma_slack =
            std::max(worst_sigma_slack, sigma - cap.tight * (1.0 + 1e-9));
      }
    }
  }

  const double elapsed = timer.seconds();
  {
    std::ostringstream d;
    d << layer_count << " layers, " << transitions
      << " transitions, max |colsum-1| = " << worst_colsum;
    record(1, "conservation (Def. 4)",
           worst_colsum < 1e-9 && elapsed < 10.0, d.str(), elapsed);
  }
  {
    std::ostringstream d;
    d << one_vector_checks
      << " conserving transitions, max |emp-exp| = " << worst_one_vector;
    record(2, "one-vector singular value", worst_one_vector < 1e-9, d.str(),
           elapsed);
  }
  {
    std::ostringstream d;
    d << sigma_checks << " beta transitions, max sigma excess = "
      << worst_sigma_slack << ", tight <= relaxed: " << (relaxed_ok ? "yes" : "no");
    record(3, "beta singular-value cap", worst_sigma_slack <= 0.0 && relaxed_ok,
           d.str(), elapsed);
  }
}

// Shared network sweep for criteria 4 and 5.
struct NetCase {
  Network net;
  Vector x;
  Vector q;
};

std::vector<NetCase> network_sweep(std::size_t count) {
  std::vector<NetCase> cases;
  cases.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RandomStream shape(5000 + i, 0xacc4);
    const std::size_t depth = 1 + shape.next_u64() % 6;  // depths 1..6
    std::vector<std::size_t> dims(depth + 1);
    for (auto& d : dims) d = 2 + shape.next_u64() % 15;  // widths 2..16
    NetCase c;
    c.net = random_network(dims, 1.0, 6000 + i);
    c.x = RandomStream(7000 + i, 0xacc5).normals(dims[0]);
    c.q = Vector(c.net.output_dim(), 1.0 / c.net.output_dim());
    cases.push_back(std::move(c));
  }
  return cases;
}

void criterion_4(const std::vector<NetCase>& cases) {
  Timer timer;
  bool ok = true;
  std::size_t rows_checked = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (const NetCase& c : cases) {
    for (double beta : {0.0, 1.0}) {
      const BoundsReport report =
          verify_network(c.net, c.x, Rule::lrp_beta(beta), c.q);
      for (const auto& row : report.per_layer) {
        if (!row.caps_applicable) continue;
        ++rows_checked;
        const double pos_excess = row.pos_sum - row.pos_cap * (1.0 + 1e-9);
        const double neg_excess = row.neg_floor * (1.0 + 1e-9) - row.neg_sum;
        worst_excess = std::max({worst_excess, pos_excess, neg_excess});
        ok = ok && pos_excess <= 1e-9 && neg_excess <= 1e-9;
        if (beta == 0.0) ok = ok && row.neg_sum >= -1e-12 && row.pos_sum <= 1.0 + 1e-9;
      }
    }
  }
  const double elapsed = timer.seconds();
  std::ostringstream d;
  d << cases.size() << " networks x {0,1}, " << rows_checked
    << " applicable rows, worst cap excess = " << worst_excess;
  record(4, "beta sequential bounds (Lemma 7)", ok && elapsed < 60.0, d.str(),
         elapsed);
}

void criterion_5(const std::vector<NetCase>& cases) {
  Timer timer;
  bool ok = true;
  std::size_t qualifying = 0, rows_checked = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (const NetCase& c : cases) {
    for (double gamma : {4.0, 100.0, 1000.0}) {
      const BoundsReport report =
          verify_network(c.net, c.x, Rule::lrp_gamma(gamma), c.q);
      if (!report.gamma_condition_all) continue;  // outside the lemma's premise
      ++qualifying;
      for (const auto& row : report.per_layer) {
        if (!row.caps_applicable) continue;
        ++rows_checked;
        const double pos_excess = row.pos_sum - row.pos_cap * (1.0 + 1e-9);
        const double neg_excess = row.neg_floor * (1.0 + 1e-9) - row.neg_sum;
        worst_excess = std::max({worst_excess, pos_excess, neg_excess});
        ok = ok && pos_excess <= 1e-9 && neg_excess <= 1e-9;
      }
    }
  }
  std::ostringstream d;
  d << qualifying << " qualifying (net,input,gamma) triples, " << rows_checked
    << " rows, worst cap excess = " << worst_excess;
  record(5, "gamma sequential bounds (Lemma 8)", ok && qualifying > 50, d.str(),
         timer.seconds());
}

void criterion_6() {
  Timer timer;
  bool ok = true;
  std::size_t layers_checked = 0;
  double worst_final = 0.0;
  for (std::uint64_t i = 0; layers_checked < 200 && i < 2000; ++i) {
    RandomStream shape(9000 + i, 0xacc6);
    const std::size_t in_dim = 2 + shape.next_u64() % 15;
    const std::size_t out_dim = 2 + shape.next_u64() % 15;
    const Layer layer = seeded_layer(out_dim, in_dim, 10000 + i);
    const Vector z = RandomStream(11000 + i, 0xacc7).normals(in_dim);

    // Premise: strictly positive positive-mass in every column, with the
    // sign-mass condition holding at the smallest gamma of the triple
    // (neg/pos < sqrt(100)). Without the latter the 1e-4 target at 1e6 is
    // out of reach: the entry gap scales like (neg/pos) / (1+gamma).
    bool premise = true;
    for (std::size_t a = 0; premise && a < out_dim; ++a) {
      double pos = 0.0, neg = 0.0;
      for (std::size_t b = 0; b < in_dim; ++b) {
        const double y = layer.weight.at(a, b) * z[b];
        if (y > 0.0) pos += y;
        if (y < 0.0) neg -= y;
      }
      premise = pos > 0.0 && neg < 10.0 * pos;
    }
    if (!premise) continue;

    const TransitionMatrix beta0 = lrp_beta_transition(layer, z, 0.0);
    double prev = std::numeric_limits<double>::infinity();
    double final_diff = 0.0;
    bool monotone = true;
    for (double gamma : {1e2, 1e4, 1e6}) {
      const TransitionMatrix tg = lrp_gamma_transition(layer, z, gamma);
      double max_abs = 0.0;
      for (std::size_t k = 0; k < tg.matrix.entries.size(); ++k)
        max_abs = std::max(
            max_abs, std::abs(tg.matrix.entries[k] - beta0.matrix.entries[k]));
      monotone = monotone && max_abs <= prev + 1e-15;
      prev = max_abs;
      final_diff = max_abs;
    }
    ok = ok && monotone && final_diff < 1e-4;
    worst_final = std::max(worst_final, final_diff);
    ++layers_checked;
  }
  std::ostringstream d;
  d << layers_checked << " layers, max |gamma-beta0| at 1e6 = " << worst_final;
  record(6, "gamma-to-beta0 convergence (Known Result 1)",
         ok && layers_checked == 200, d.str(), timer.seconds());
}

void criterion_7() {
  Timer timer;
  bool ok = true;
  double worst_rel = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    RandomStream shape(13000 + i, 0xacc8);
    const std::size_t depth = 2 + shape.next_u64() % 3;
    std::vector<std::size_t> dims(depth + 1);
    for (auto& d : dims) d = 3 + shape.next_u64() % 6;
    const Network net = random_network(dims, 1.0, 14000 + i);

    // generic input: keep pre-activations clear of relu kinks
    Vector x;
    for (std::uint64_t attempt = 0;; ++attempt) {
      x = RandomStream(15000 + i, 0xacc9 + attempt).normals(dims[0]);
      const FeatureTrace trace = forward(net, x);
      double min_abs = std::numeric_limits<double>::infinity();
      for (const Vector& pre : trace.pre_activations)
        for (double v : pre) min_abs = std::min(min_abs, std::abs(v));
      if (min_abs > 1e-4) break;
    }

    Vector q(net.output_dim(), 0.0);
    q[shape.next_u64() % q.size()] = 1.0;
    const AttributionMap map = attribute(net, x, Rule::gradient(), q, 0);
    const Vector fd = oracles::finite_difference_gradient(net, x, q, 1e-6);
    const double scale = l2_norm(fd);
    double err = 0.0;
    for (std::size_t k = 0; k < fd.size(); ++k)
      err = std::max(err, std::abs(map.values[k] - fd[k]));
    const double rel = err / (1.0 + scale);
    worst_rel = std::max(worst_rel, rel);
    ok = ok && rel < 1e-5;
  }
  std::ostringstream d;
  d << "100 relu networks, worst relative deviation = " << worst_rel;
  record(7, "gradient chain vs finite differences", ok, d.str(), timer.seconds());
}

void criterion_8() {
  Timer timer;
  const double raw = hoeffding_sample_size_raw(1.0, 0.05, 0.1);
  const bool spot_m = std::abs(raw - 50.0 * std::log(40.0)) < 1e-12 &&
                      hoeffding_sample_size(1.0, 0.05, 0.1) == 185;
  const double dev = hoeffding_deviation(1.0, 2.0 * std::exp(-2.0), 100);
  const bool spot_t = std::abs(dev - 0.1) < 1e-12;

  bool inverse_ok = true;
  RandomStream stream(16000, 0xacca);
  for (int i = 0; i < 1000; ++i) {
    const double range = 0.1 + 10.0 * stream.uniform();
    const double delta = 0.01 + 0.9 * stream.uniform();
    const std::size_t m = 1 + stream.next_u64() % 10000;
    const std::size_t m2 = hoeffding_sample_size(
        range, delta, hoeffding_deviation(range, delta, m));
    inverse_ok = inverse_ok && (m2 == m || m2 == m + 1);
  }
  std::ostringstream d;
  d << "m(1,0.05,0.1) = 185, t(1,2e^-2,100) = " << dev
    << ", inverse pairs ok: " << (inverse_ok ? "1000/1000" : "violated");
  record(8, "Hoeffding calculators", spot_m && spot_t && inverse_ok, d.str(),
         timer.seconds());
}

void criterion_9() {
  Timer timer;
  const WilcoxonResult fixture =
      wilcoxon_one_sided({1.0, 2.0, 3.0}, Alternative::greater);
  bool ok = fixture.p == 0.125;

  double worst_z = 0.0;
  RandomStream stream(17000, 0xaccb);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 3 + stream.next_u64() % 10;  // n <= 12
    std::vector<double> diffs(n);
    for (double& v : diffs) v = stream.normal() + 0.4;
    const WilcoxonResult exact = wilcoxon_one_sided(diffs, Alternative::greater);
    const double mc = oracles::wilcoxon_permutation_tail(
        diffs, true, 1000000, 52000 + rep);
    const double se =
        std::sqrt(std::max(exact.p * (1.0 - exact.p), 1e-12) / 1e6);
    const double z = std::abs(mc - exact.p) / se;
    worst_z = std::max(worst_z, z);
    ok = ok && z <= 3.0;
  }
  std::ostringstream d;
  d << "d=(1,2,3) -> p = " << fixture.p
    << ", 50 samples vs permutation oracle, worst |z| = " << worst_z;
  record(9, "Wilcoxon exact test", ok, d.str(), timer.seconds());
}

void criteria_10_and_11() {
  Timer timer;
  const Vector q(10, 0.1);
  std::vector<ConvergenceRun> all_runs;

  AugmenterConfig gaussian;
  gaussian.kind = AugmenterConfig::Kind::gaussian;
  gaussian.noise_sigma = 1.0;

  bool direction_ok = true;
  std::ostringstream detail10;
  ConvergenceRun trend_m25, trend_m100;

  for (double sigma_w : {1.0, 2.0}) {
    const Network net =
        random_network({32, 32, 32, 32, 32, 10}, sigma_w, 19000 + (sigma_w == 2.0));
    std::vector<Vector> bases;
    for (std::size_t i = 0; i < 100; ++i)
      bases.push_back(RandomStream(20000 + i, 0xaccc).normals(32));

    const ConvergenceRun run = convergence_experiment(
        net, bases, Rule::gradient(), Rule::lrp_beta(0.0), gaussian, 25,
        Normalization::none, 21000, q);
    all_runs.push_back(run);
    direction_ok =
        direction_ok && run.median_ratio > 1.0 && run.wilcoxon_p < 0.05;
    detail10 << "sigma_w=" << sigma_w << ": ratio=" << run.median_ratio
             << " p=" << run.wilcoxon_p << "  ";

    if (sigma_w == 1.0) {
      trend_m25 = run;
      trend_m100 = convergence_experiment(net, bases, Rule::gradient(),
                                          Rule::lrp_beta(0.0), gaussian, 100,
                                          Normalization::none, 21000, q);
      all_runs.push_back(trend_m100);
    }
  }

  // photometric harness on synthetic 3x8x8 images: must complete and emit
  // the summary table; the ratio itself is not asserted
  const Network img_net = random_network({192, 32, 32, 32, 32, 10}, 1.0, 23000);
  std::vector<Vector> images;
  for (std::size_t i = 0; i < 100; ++i) {
    RandomStream stream(24000 + i, 0xaccd);
    Vector img(192);
    for (double& v : img) v = stream.uniform();
    images.push_back(std::move(img));
  }
  AugmenterConfig photo;
  photo.kind = AugmenterConfig::Kind::photometric;
  photo.image_height = 8;
  photo.image_width = 8;
  const ConvergenceRun photo_run = convergence_experiment(
      img_net, images, Rule::gradient(), Rule::lrp_beta(0.0), photo, 25,
      Normalization::none, 25000, q);
  all_runs.push_back(photo_run);
  const bool photo_ok =
      photo_run.per_sample.size() == 100 && std::isfinite(photo_run.median_ratio);

  const double elapsed10 = timer.seconds();
  std::printf("%s", convergence_summary_table(all_runs).c_str());
  detail10 << "photometric completed: " << (photo_ok ? "yes" : "no");
  record(10, "direction-level convergence comparison",
         direction_ok && photo_ok && elapsed10 < 600.0, detail10.str(),
         elapsed10);

  Timer timer11;
  const double factor_a = trend_m25.median_a / trend_m100.median_a;
  const double factor_b = trend_m25.median_b / trend_m100.median_b;
  std::ostringstream d11;
  d11 << "median shrink m=25 -> m=100: gradient x" << factor_a << ", lrp-beta0 x"
      << factor_b << " (theory: x2)";
  record(11, "1/sqrt(m) convergence trend", factor_a >= 1.5 && factor_b >= 1.5,
         d11.str(), timer11.seconds());
}

}  // namespace

int main() {
  std::printf("acceptance suite\n================\n");
  criteria_1_to_3();
  const std::vector<NetCase> cases = network_sweep(500);
  criterion_4(cases);
  criterion_5(cases);
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criteria_10_and_11();

  int failures = 0;
  for (const Criterion& c : g_results)
    if (!c.passed) ++failures;
  std::printf("================\n%zu criteria, %d failed\n", g_results.size(),
              failures);
  return failures;
}
