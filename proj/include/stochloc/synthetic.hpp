#ifndef STOCHLOC_SYNTHETIC_HPP
#define STOCHLOC_SYNTHETIC_HPP

#include "stochloc/common.hpp"

#include <array>
#include <numbers>

namespace stochloc {

/// Two-class toy image: x(i1,i2) = tanh(psi0 + psi1 cos(q1 i1 + q2 i2)) in R^3,
/// psi0 in {(1.95,0,0.05), (0.05,0,1.95)}, psi1 ~ N(0, I/16), q = (4 pi U1 / w, 4 pi U2 / h).
struct SyntheticImage {
  int w = 0, h = 0;
  int cls = 0;        // 0: red-dominant psi0, 1: blue-dominant
  Vec pixels;         // layout [channel][i1][i2], size 3*w*h
  double at(int ch, int i1, int i2) const { return pixels[(ch * w + i1) * h + i2]; }
};

inline SyntheticImage synth_image(int w, int h, Rng& rng) {
  require(w >= 1 && h >= 1, "synth_image: w and h must be >= 1");
  SyntheticImage img;
  img.w = w;
  img.h = h;
  img.cls = uniform01(rng) < 0.5 ? 0 : 1;
  const std::array<double, 3> psi0 = img.cls == 0 ? std::array<double, 3>{1.95, 0.0, 0.05}
                                                  : std::array<double, 3>{0.05, 0.0, 1.95};
  const Vec psi1 = 0.25 * standard_normal(3, rng);
  const double q1 = 4.0 * std::numbers::pi * uniform01(rng) / w;
  const double q2 = 4.0 * std::numbers::pi * uniform01(rng) / h;
  img.pixels.resize(3 * w * h);
  for (int ch = 0; ch < 3; ++ch)
    for (int i1 = 0; i1 < w; ++i1)
      for (int i2 = 0; i2 < h; ++i2)
        img.pixels[(ch * w + i1) * h + i2] = std::tanh(psi0[ch] + psi1[ch] * std::cos(q1 * i1 + q2 * i2));
  return img;
}

}  // namespace stochloc

#endif  // STOCHLOC_SYNTHETIC_HPP
