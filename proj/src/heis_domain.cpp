#include "hypertile/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hypertile {

double HeisDomain::height(double x, double y) const {
  if (flat) return 0.0;
  // x, y in [0, 1); doubling and subtracting the digit is exact
  double acc = 0.0, w = 0.25;
  for (int i = 0; i < depth; ++i) {
    int m1 = std::min(1, std::max(0, static_cast<int>(std::floor(2.0 * x))));
    int m2 = std::min(1, std::max(0, static_cast<int>(std::floor(2.0 * y))));
    x = 2.0 * x - m1;
    y = 2.0 * y - m2;
    acc += w * (2.0 * (m2 * x - m1 * y) + static_cast<double>(k[static_cast<std::size_t>(m1 + 2 * m2)]));
    w *= 0.25;
  }
  return acc;
}

double HeisDomain::height_from(double x, double y, double dx, double dy) const {
  const double eta = 0x1.0p-40;
  auto clamp = [](double v) { return std::min(std::max(v, 0.0), 1.0 - 0x1.0p-53); };
  return height(clamp(x + eta * dx), clamp(y + eta * dy));
}

namespace {

// direction pointing from s into the unit square, plus skewed variants for
// corners (the limit of a discontinuous height depends on the approach)
std::vector<std::array<double, 2>> inward(const std::array<double, 2>& s) {
  std::array<double, 2> d{0, 0};
  for (int i = 0; i < 2; ++i) {
    if (s[i] <= 0.0) d[i] = 1.0;
    else if (s[i] >= 1.0) d[i] = -1.0;
  }
  std::vector<std::array<double, 2>> out{d};
  if (d[0] != 0.0 && d[1] != 0.0) {
    out.push_back({d[0], d[1] / 16});
    out.push_back({d[0] / 16, d[1]});
  }
  return out;
}

}  // namespace

std::vector<LatticeVec> heis_neighbor_set(const HeisDomain& dom, int samples_per_edge) {
  const double tol = 1e-9;
  auto lv = [](std::int64_t a, std::int64_t b, std::int64_t c) {
    LatticeVec v(3);
    v << a, b, c;
    return v;
  };
  std::set<LatticeVec, decltype(&lattice_less)> found(&lattice_less);
  found.insert(lv(0, 0, 1));
  found.insert(lv(0, 0, -1));

  for (int m1 = -1; m1 <= 1; ++m1)
    for (int m2 = -1; m2 <= 1; ++m2) {
      if (m1 == 0 && m2 == 0) continue;
      // shared closure of [0,1]^2 and m + [0,1]^2
      const int m[2] = {m1, m2};
      const bool free_axis[2] = {m1 == 0, m2 == 0};
      int count = (free_axis[0] || free_axis[1]) ? samples_per_edge + 1 : 1;
      for (int j = 0; j < count; ++j) {
        std::array<double, 2> s;
        for (int i = 0; i < 2; ++i)
          s[i] = free_axis[i] ? static_cast<double>(j) / samples_per_edge : (m[i] == 1 ? 1.0 : 0.0);
        std::array<double, 2> sp{s[0] - m1, s[1] - m2};
        double shear = 2.0 * (m2 * sp[0] - m1 * sp[1]);
        for (const auto& dk : inward(s))
          for (const auto& dg : inward(sp)) {
            double a = dom.height_from(s[0], s[1], dk[0], dk[1]);
            double b = shear + dom.height_from(sp[0], sp[1], dg[0], dg[1]);
            auto lo = static_cast<std::int64_t>(std::ceil(a - b - 1.0 - tol));
            auto hi = static_cast<std::int64_t>(std::floor(a - b + 1.0 + tol));
            for (std::int64_t m3 = lo; m3 <= hi; ++m3) found.insert(lv(m1, m2, m3));
          }
      }
    }
  std::set<LatticeVec, decltype(&lattice_less)> sym(&lattice_less);
  for (const auto& g : found) {
    sym.insert(g);
    sym.insert(-g);
  }
  return {sym.begin(), sym.end()};
}

}  // namespace hypertile
