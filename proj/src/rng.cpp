#include "attribnet/rng.hpp"

#include <cmath>
#include <numbers>

namespace attribnet {

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0,1] so the log is finite.
  const double u1 =
      (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

std::vector<double> RandomStream::normals(std::size_t n, double stddev) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = stddev * normal();
  return out;
}

}  // namespace attribnet
