#pragma once

// Deterministic, seedable input augmentation: additive Gaussian noise in
// network input space and photometric distortion (brightness, contrast,
// saturation, hue) for synthetic 3-channel images. Substream keying by
// (seed, index) makes parallel generation order-independent.

#include <cstdint>
#include <vector>

#include "attribnet/linalg.hpp"

namespace attribnet {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct PhotometricRanges {
  Interval brightness{0.875, 1.125};
  Interval contrast{0.5, 1.5};
  Interval saturation{0.8, 1.2};
  Interval hue{-0.1, 0.1};  // offset in fraction-of-circle units

  void validate() const;  // lo <= hi per field
};

struct ImageTensor {
  static constexpr std::size_t channels = 3;
  std::size_t height = 0;
  std::size_t width = 0;
  // channel-major, then row-major; values in [0, 1]
  std::vector<double> values;

  ImageTensor() = default;
  ImageTensor(std::size_t h, std::size_t w)
      : height(h), width(w), values(channels * h * w, 0.0) {}

  std::size_t pixels() const { return height * width; }
  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return values[c * pixels() + y * width + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return values[c * pixels() + y * width + x];
  }

  // The flattening order defines the Vector fed to networks.
  Vector flatten() const { return values; }
  static ImageTensor from_flat(const Vector& v, std::size_t h, std::size_t w);
};

// x + noise with noise ~ N(0, sigma^2) from substream (seed, index).
// Operates in network input space; no clamping.
Vector gaussian_augment(const Vector& x, double sigma, std::uint64_t seed,
                        std::size_t index);

// Draws (brightness, contrast, saturation, hue) uniformly from the ranges
// via substream (seed, index) and applies them in that fixed order, clamping
// to [0, 1] after each stage. Luma weights 0.299/0.587/0.114.
ImageTensor photometric_augment(const ImageTensor& img,
                                const PhotometricRanges& ranges,
                                std::uint64_t seed, std::size_t index);

// Exposed for direct testing of the stage pipeline.
ImageTensor apply_photometric(const ImageTensor& img, double brightness,
                              double contrast, double saturation, double hue);

void rgb_to_hsv(double r, double g, double b, double* h, double* s, double* v);
void hsv_to_rgb(double h, double s, double v, double* r, double* g, double* b);

}  // namespace attribnet
