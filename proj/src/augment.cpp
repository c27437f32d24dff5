#include "attribnet/augment.hpp"

#include <cmath>
#include <stdexcept>

#include "attribnet/kernels.hpp"
#include "attribnet/rng.hpp"

namespace attribnet {

void PhotometricRanges::validate() const {
  auto check = [](const Interval& iv, const char* name) {
    if (!(iv.lo <= iv.hi))
      throw std::invalid_argument(std::string("photometric range ") + name +
                                  ": lo > hi");
  };
  check(brightness, "brightness");
  check(contrast, "contrast");
  check(saturation, "saturation");
  check(hue, "hue");
}

ImageTensor ImageTensor::from_flat(const Vector& v, std::size_t h, std::size_t w) {
  if (v.size() != channels * h * w)
    throw std::invalid_argument("ImageTensor::from_flat: size mismatch");
  ImageTensor img(h, w);
  img.values = v;
  return img;
}

Vector gaussian_augment(const Vector& x, double sigma, std::uint64_t seed,
                        std::size_t index) {
  if (!(sigma >= 0.0))
    throw std::invalid_argument("gaussian_augment: sigma must be >= 0");
  Vector out = x;
  if (sigma == 0.0) return out;
  RandomStream stream(seed, /*purpose*/ 0x6e6f697365ULL /* "noise" */, index);
  for (double& v : out) v += sigma * stream.normal();
  return out;
}

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

double luma(double r, double g, double b) {
  return kLumaR * r + kLumaG * g + kLumaB * b;
}

void clamp_all(ImageTensor* img) {
  kernels::active().clamp01(img->values.data(), img->values.size());
}

}  // namespace

void rgb_to_hsv(double r, double g, double b, double* h, double* s, double* v) {
  const double mx = std::max(r, std::max(g, b));
  const double mn = std::min(r, std::min(g, b));
  const double d = mx - mn;
  *v = mx;
  *s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    *h = 0.0;
    return;
  }
  double hh;
  if (mx == r)
    hh = (g - b) / d;
  else if (mx == g)
    hh = 2.0 + (b - r) / d;
  else
    hh = 4.0 + (r - g) / d;
  hh /= 6.0;
  if (hh < 0.0) hh += 1.0;
  *h = hh;
}

void hsv_to_rgb(double h, double s, double v, double* r, double* g, double* b) {
  if (s <= 0.0) {
    *r = *g = *b = v;
    return;
  }
  double hh = (h - std::floor(h)) * 6.0;
  const int sector = std::min(5, static_cast<int>(hh));
  const double f = hh - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: *r = v; *g = t; *b = p; break;
    case 1: *r = q; *g = v; *b = p; break;
    case 2: *r = p; *g = v; *b = t; break;
    case 3: *r = p; *g = q; *b = v; break;
    case 4: *r = t; *g = p; *b = v; break;
    default: *r = v; *g = p; *b = q; break;
  }
}

ImageTensor apply_photometric(const ImageTensor& img, double brightness,
                              double contrast, double saturation, double hue) {
  ImageTensor out = img;
  const std::size_t n = out.pixels();

  // brightness
  kernels::active().scale(out.values.data(), brightness, out.values.size());
  clamp_all(&out);

  // contrast around the mean luma of the current image
  double mean_gray = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    mean_gray += luma(out.values[p], out.values[n + p], out.values[2 * n + p]);
  mean_gray /= static_cast<double>(n);
  for (double& v : out.values) v = mean_gray + contrast * (v - mean_gray);
  clamp_all(&out);

  // saturation around each pixel's own luma
  for (std::size_t p = 0; p < n; ++p) {
    const double l = luma(out.values[p], out.values[n + p], out.values[2 * n + p]);
    out.values[p] = l + saturation * (out.values[p] - l);
    out.values[n + p] = l + saturation * (out.values[n + p] - l);
    out.values[2 * n + p] = l + saturation * (out.values[2 * n + p] - l);
  }
  clamp_all(&out);

  // hue rotation via HSV
  if (hue != 0.0) {
    for (std::size_t p = 0; p < n; ++p) {
      double h, s, v;
      rgb_to_hsv(out.values[p], out.values[n + p], out.values[2 * n + p], &h, &s, &v);
      h += hue;
      h -= std::floor(h);
      hsv_to_rgb(h, s, v, &out.values[p], &out.values[n + p], &out.values[2 * n + p]);
    }
  }
  clamp_all(&out);
  return out;
}

ImageTensor photometric_augment(const ImageTensor& img,
                                const PhotometricRanges& ranges,
                                std::uint64_t seed, std::size_t index) {
  ranges.validate();
  RandomStream stream(seed, /*purpose*/ 0x70686f746fULL /* "photo" */, index);
  const double b = stream.uniform(ranges.brightness.lo, ranges.brightness.hi);
  const double c = stream.uniform(ranges.contrast.lo, ranges.contrast.hi);
  const double s = stream.uniform(ranges.saturation.lo, ranges.saturation.hi);
  const double h = stream.uniform(ranges.hue.lo, ranges.hue.hi);
  return apply_photometric(img, b, c, s, h);
}

}  // namespace attribnet
