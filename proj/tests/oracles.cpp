#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "attribnet/rng.hpp"

namespace oracles {

using attribnet::Matrix;
using attribnet::Network;
using attribnet::Vector;

std::vector<double> jacobi_eigenvalues(Matrix sym) {
  if (sym.rows != sym.cols) throw std::invalid_argument("jacobi: not square");
  const std::size_t n = sym.rows;

  auto off_diag_sq = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += sym.at(i, j) * sym.at(i, j);
    return s;
  };

  double norm_sq = 0.0;
  for (double v : sym.entries) norm_sq += v * v;
  const double stop = norm_sq > 0.0 ? 1e-28 * norm_sq : 0.0;

  for (int sweep = 0; sweep < 100 && off_diag_sq() > stop; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = sym.at(p, q);
        if (apq == 0.0) continue;
        const double app = sym.at(p, p);
        const double aqq = sym.at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = sym.at(k, p);
          const double akq = sym.at(k, q);
          sym.at(k, p) = c * akp - s * akq;
          sym.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = sym.at(p, k);
          const double aqk = sym.at(q, k);
          sym.at(p, k) = c * apk - s * aqk;
          sym.at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = sym.at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double jacobi_top_singular_value(const Matrix& m) {
  const bool use_left = m.rows <= m.cols;
  const std::size_t dim = use_left ? m.rows : m.cols;
  Matrix gram(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      double s = 0.0;
      if (use_left) {
        for (std::size_t k = 0; k < m.cols; ++k) s += m.at(i, k) * m.at(j, k);
      } else {
        for (std::size_t k = 0; k < m.rows; ++k) s += m.at(k, i) * m.at(k, j);
      }
      gram.at(i, j) = s;
    }
  }
  const std::vector<double> eig = jacobi_eigenvalues(gram);
  const double top = eig.back();
  return std::sqrt(top > 0.0 ? top : 0.0);
}

namespace {

// Doubled average ranks of |d| after dropping zeros; also fills `positive`.
std::vector<std::uint64_t> prepare_ranks(const std::vector<double>& differences,
                                         std::vector<bool>* positive) {
  std::vector<double> abs_d;
  for (double d : differences) {
    if (d == 0.0) continue;
    abs_d.push_back(std::abs(d));
    positive->push_back(d > 0.0);
  }
  const std::size_t n = abs_d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return abs_d[i] < abs_d[j]; });
  std::vector<std::uint64_t> rank2(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = i + j + 2;
    i = j + 1;
  }
  return rank2;
}

}  // namespace

double wilcoxon_exact_tail(const std::vector<double>& differences, bool greater) {
  std::vector<bool> positive;
  const std::vector<std::uint64_t> rank2 = prepare_ranks(differences, &positive);
  const std::size_t n = rank2.size();
  if (n == 0) return 1.0;
  if (n > 62) throw std::invalid_argument("wilcoxon_exact_tail: n too large");

  std::uint64_t w2_obs = 0;
  std::uint64_t w2_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    w2_total += rank2[i];
    if (positive[i]) w2_obs += rank2[i];
  }

  // counts[w] = number of sign assignments whose doubled W+ equals w
  std::vector<double> counts(w2_total + 1, 0.0);
  counts[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t r = rank2[i];
    for (std::size_t w = counts.size(); w-- > r;) counts[w] += counts[w - r];
  }

  double tail = 0.0;
  if (greater) {
    for (std::size_t w = w2_obs; w < counts.size(); ++w) tail += counts[w];
  } else {
    for (std::size_t w = 0; w <= w2_obs; ++w) tail += counts[w];
  }
  return tail / std::pow(2.0, static_cast<double>(n));
}

double wilcoxon_permutation_tail(const std::vector<double>& differences,
                                 bool greater, std::size_t resamples,
                                 std::uint64_t seed) {
  std::vector<bool> positive;
  const std::vector<std::uint64_t> rank2 = prepare_ranks(differences, &positive);
  const std::size_t n = rank2.size();
  if (n == 0) return 1.0;

  std::uint64_t w2_obs = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (positive[i]) w2_obs += rank2[i];

  attribnet::RandomStream stream(seed, 0x9e21ULL);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    std::uint64_t w2 = 0;
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 64 == 0) bits = stream.next_u64();
      if (bits & 1ULL) w2 += rank2[i];
      bits >>= 1;
    }
    if (greater ? w2 >= w2_obs : w2 <= w2_obs) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(resamples);
}

Vector finite_difference_gradient(const Network& net, const Vector& x,
                                  const Vector& q, double step) {
  auto weighted_output = [&](const Vector& point) {
    const attribnet::FeatureTrace trace = attribnet::forward(net, point);
    double s = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) s += q[k] * trace.output[k];
    return s;
  };
  Vector grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vector hi = x, lo = x;
    hi[i] += step;
    lo[i] -= step;
    grad[i] = (weighted_output(hi) - weighted_output(lo)) / (2.0 * step);
  }
  return grad;
}

}  // namespace oracles
