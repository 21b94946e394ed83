#include "hypertile/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace hypertile {

double BumpParams::profile(double t) const {
  double tau = std::log(t) / std::log(a);
  tau -= std::floor(tau);
  if (tau <= 0.25 || tau >= 0.75) return 1.0;
  return 1.0 + amplitude * 0.5 * (1.0 - std::cos(2.0 * kPi * (tau - 0.25) / 0.5));
}

namespace {

int gcd_all(const std::vector<int>& v) {
  int g = 0;
  for (int x : v) g = std::gcd(g, std::abs(x));
  return g;
}

}  // namespace

GridMetric::GridMetric(std::vector<int> lambda, std::function<double(double)> conformal,
                       GridWindow window)
    : lambda_(std::move(lambda)), conformal_(std::move(conformal)), window_(std::move(window)) {
  dim_ = static_cast<int>(lambda_.size()) + 1;
  if (window_.lo.size() != dim_ || window_.hi.size() != dim_ ||
      static_cast<int>(window_.cells.size()) != dim_)
    throw InputError("GridMetric: window dimension mismatch");
  if (!(window_.lo(dim_ - 1) > 0.0)) throw DomainError("GridMetric: window height must be positive");
  if (window_.stencil_radius < 1) throw InputError("GridMetric: stencil radius must be >= 1");
  step_.resize(static_cast<std::size_t>(dim_));
  stride_.resize(static_cast<std::size_t>(dim_));
  node_count_ = 1;
  for (int i = 0; i < dim_; ++i) {
    if (window_.cells[i] < 1 || !(window_.hi(i) > window_.lo(i)))
      throw InputError("GridMetric: empty window axis");
    double lo = window_.lo(i), hi = window_.hi(i);
    if (i == dim_ - 1) {
      lo = std::log(lo);
      hi = std::log(hi);
    }
    step_[i] = (hi - lo) / window_.cells[i];
  }
  for (int i = dim_ - 1; i >= 0; --i) {
    stride_[i] = node_count_;
    node_count_ *= static_cast<std::size_t>(window_.cells[i] + 1);
  }

  const int R = window_.stencil_radius;
  std::vector<int> o(static_cast<std::size_t>(dim_), -R);
  while (true) {
    if (gcd_all(o) == 1) offsets_.push_back({o});
    int k = 0;
    while (k < dim_ && ++o[k] > R) o[k++] = -R;
    if (k == dim_) break;
  }

  const int ns = window_.cells[dim_ - 1];
  const int slots = 2 * ns + 2 * R + 1;
  weight_.assign(offsets_.size() * static_cast<std::size_t>(slots), 0.0);
  const double s0 = std::log(window_.lo(dim_ - 1));
  std::vector<double> dx(static_cast<std::size_t>(dim_));
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    for (int i = 0; i < dim_; ++i) dx[i] = offsets_[k].d[i] * step_[i];
    for (int m = 0; m < slots; ++m) {
      double s_mid = s0 + 0.5 * (m - R) * step_[dim_ - 1];
      weight_[k * slots + m] = line_integral(dx, s_mid, 2 * R);
    }
  }
}

// Composite midpoint rule for the length of the straight segment with
// coordinate increments dx (last entry is the log-height increment) whose
// midpoint sits at log-height s_mid.
double GridMetric::line_integral(const std::vector<double>& dx, double s_mid, int pieces) const {
  const double ds = dx[dim_ - 1];
  double acc = 0.0;
  for (int j = 0; j < pieces; ++j) {
    double s = s_mid + ds * ((j + 0.5) / pieces - 0.5);
    double q = ds * ds;
    for (int i = 0; i < dim_ - 1; ++i) q += std::exp(-2.0 * lambda_[i] * s) * dx[i] * dx[i];
    acc += std::sqrt(q * conformal_(std::exp(s)));
  }
  return acc / pieces;
}

bool GridMetric::contains(const Point& p) const {
  if (p.size() != dim_) return false;
  for (int i = 0; i < dim_; ++i)
    if (!(p(i) >= window_.lo(i) && p(i) <= window_.hi(i))) return false;
  return true;
}

std::vector<double> GridMetric::to_lattice(const Point& p) const {
  if (p.size() != dim_) throw InputError("grid metric: dimension mismatch");
  if (!(p(dim_ - 1) > 0.0)) throw DomainError("grid metric: height must be positive");
  if (!contains(p)) throw InputError("grid metric: point outside grid window");
  std::vector<double> f(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_ - 1; ++i) f[i] = (p(i) - window_.lo(i)) / step_[i];
  f[dim_ - 1] = (std::log(p(dim_ - 1)) - std::log(window_.lo(dim_ - 1))) / step_[dim_ - 1];
  return f;
}

double GridMetric::segment_length(const std::vector<double>& a, const std::vector<double>& b) const {
  const double s0 = std::log(window_.lo(dim_ - 1));
  double s_mid = s0 + 0.5 * (a[dim_ - 1] + b[dim_ - 1]) * step_[dim_ - 1];
  std::vector<double> dx(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) dx[i] = (b[i] - a[i]) * step_[i];
  return line_integral(dx, s_mid, 2 * window_.stencil_radius);
}

std::size_t GridMetric::index_of(const std::vector<int>& idx) const {
  std::size_t k = 0;
  for (int i = 0; i < dim_; ++i) k += static_cast<std::size_t>(idx[i]) * stride_[i];
  return k;
}

void GridMetric::attach(const std::vector<double>& frac,
                        std::vector<std::pair<std::size_t, double>>& out) const {
  const int R = window_.stencil_radius;
  std::vector<int> lo(static_cast<std::size_t>(dim_)), hi(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    int c = std::clamp(static_cast<int>(std::floor(frac[i])), 0, window_.cells[i] - 1);
    lo[i] = std::max(0, c - R + 1);
    hi[i] = std::min(window_.cells[i], c + R);
  }
  std::vector<int> idx = lo;
  std::vector<double> node(static_cast<std::size_t>(dim_));
  while (true) {
    for (int i = 0; i < dim_; ++i) node[i] = idx[i];
    out.emplace_back(index_of(idx), segment_length(frac, node));
    int k = 0;
    while (k < dim_ && ++idx[k] > hi[k]) idx[k] = lo[k], ++k;
    if (k == dim_) break;
  }
}

std::shared_ptr<const std::vector<double>> GridMetric::cached_field(const Point& p) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  for (auto it = cache_.begin(); it != cache_.end(); ++it) {
    if (it->first.size() == p.size() && it->first == p) {
      cache_.splice(cache_.begin(), cache_, it);
      return cache_.front().second;
    }
  }
  return nullptr;
}

std::shared_ptr<const std::vector<double>> GridMetric::field_from(const Point& p) const {
  if (auto hit = cached_field(p)) return hit;
  std::vector<double> dist(node_count_, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  std::vector<std::pair<std::size_t, double>> seeds;
  attach(to_lattice(p), seeds);
  for (auto [k, w] : seeds) {
    if (w < dist[k]) {
      dist[k] = w;
      heap.emplace(w, k);
    }
  }
  const int R = window_.stencil_radius;
  const int slots = 2 * window_.cells[dim_ - 1] + 2 * R + 1;
  const std::size_t n_off = offsets_.size();
  std::vector<long long> delta(n_off);
  for (std::size_t o = 0; o < n_off; ++o) {
    long long dk = 0;
    for (int i = 0; i < dim_; ++i) dk += static_cast<long long>(offsets_[o].d[i]) * static_cast<long long>(stride_[i]);
    delta[o] = dk;
  }
  std::vector<int> idx(static_cast<std::size_t>(dim_));
  while (!heap.empty()) {
    auto [d, k] = heap.top();
    heap.pop();
    if (d > dist[k]) continue;
    std::size_t rem = k;
    for (int i = 0; i < dim_; ++i) {
      idx[i] = static_cast<int>(rem / stride_[i]);
      rem %= stride_[i];
    }
    const double* wrow = weight_.data() + 2 * idx[dim_ - 1] + R;
    for (std::size_t o = 0; o < n_off; ++o) {
      const int* off = offsets_[o].d.data();
      bool inside = true;
      for (int i = 0; i < dim_; ++i) {
        unsigned j = static_cast<unsigned>(idx[i] + off[i]);
        if (j > static_cast<unsigned>(window_.cells[i])) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;
      const std::size_t nk = static_cast<std::size_t>(static_cast<long long>(k) + delta[o]);
      const double nd = d + wrow[o * slots + off[dim_ - 1]];
      if (nd < dist[nk]) {
        dist[nk] = nd;
        heap.emplace(nd, nk);
      }
    }
  }
  auto shared = std::make_shared<const std::vector<double>>(std::move(dist));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  cache_.emplace_front(p, shared);
  if (cache_.size() > 8) cache_.pop_back();
  return shared;
}

double GridMetric::distance_in_field(const std::vector<double>& field, const Point& p,
                                     const Point& q) const {
  std::vector<double> fp = to_lattice(p), fq = to_lattice(q);
  if (p == q) return 0.0;
  std::vector<std::pair<std::size_t, double>> ends;
  attach(fq, ends);
  double best = std::numeric_limits<double>::infinity();
  for (auto [k, w] : ends) best = std::min(best, field[k] + w);
  double gap = 0.0;
  for (int i = 0; i < dim_; ++i) gap = std::max(gap, std::abs(fp[i] - fq[i]));
  if (gap <= window_.stencil_radius) best = std::min(best, segment_length(fp, fq));
  return best;
}

double GridMetric::distance(const Point& p, const Point& q) const {
  to_lattice(q);  // validate before the expensive part
  if (p == q) {
    to_lattice(p);
    return 0.0;
  }
  // Reuse whichever endpoint already has a field. Forward and backward sums
  // along the same shortest path differ only by rounding, far below 1e-12.
  if (auto f = cached_field(q)) return distance_in_field(*f, q, p);
  return distance_in_field(*field_from(p), p, q);
}

GridWindow default_halfplane_window(int n_base) {
  GridWindow w;
  w.lo = Point::Constant(n_base + 1, -3.0);
  w.hi = Point::Constant(n_base + 1, 3.0);
  w.lo(n_base) = 0.25;
  w.hi(n_base) = 4.0;
  w.cells.assign(static_cast<std::size_t>(n_base + 1), n_base == 1 ? 120 : 24);
  w.cells[n_base] = n_base == 1 ? 56 : 24;
  w.stencil_radius = n_base == 1 ? 8 : 3;
  return w;
}

GridWindow balanced_window(const std::vector<int>& lambda, double x_lo, double x_hi, double t_lo,
                           double t_hi, int cells_log_t, int stencil_radius) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || !(x_hi > x_lo) || cells_log_t < 1)
    throw InputError("balanced_window: bad bounds");
  const int n = static_cast<int>(lambda.size());
  GridWindow w;
  w.lo = Point::Constant(n + 1, x_lo);
  w.hi = Point::Constant(n + 1, x_hi);
  w.lo(n) = t_lo;
  w.hi(n) = t_hi;
  const double hs = std::log(t_hi / t_lo) / cells_log_t;
  const double t_mid = std::sqrt(t_lo * t_hi);
  w.cells.resize(static_cast<std::size_t>(n + 1));
  for (int i = 0; i < n; ++i)
    w.cells[i] = std::max(1, static_cast<int>(std::ceil((x_hi - x_lo) / (hs * std::pow(t_mid, lambda[i])))));
  w.cells[n] = cells_log_t;
  w.stencil_radius = stencil_radius;
  return w;
}

std::shared_ptr<const GridMetric> make_twisted_halfspace_grid(const std::vector<int>& lambda,
                                                              GridWindow window) {
  for (int l : lambda)
    if (l < 1) throw InputError("twisted half-space: lambda entries must be >= 1");
  return std::make_shared<const GridMetric>(lambda, [](double) { return 1.0; }, std::move(window));
}

std::shared_ptr<const GridMetric> make_bump_halfplane_grid(const BumpParams& params,
                                                           GridWindow window) {
  if (!(params.a > 1.0)) throw InputError("bump: a must exceed 1");
  if (params.amplitude < 0.0) throw InputError("bump: amplitude must be nonnegative");
  if (window.lo.size() != 2) throw InputError("bump: base dimension must be 1");
  BumpParams copy = params;
  return std::make_shared<const GridMetric>(std::vector<int>{1},
                                            [copy](double t) { return copy.profile(t); },
                                            std::move(window));
}

double twisted_halfspace_distance(const GridMetric& grid, const Point& p, const Point& q) {
  return grid.distance(p, q);
}

double bump_halfplane_distance(const GridMetric& grid, const Point& p, const Point& q) {
  return grid.distance(p, q);
}

}  // namespace hypertile
