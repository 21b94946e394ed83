#pragma once

#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <vector>

#ifdef HYPERTILE_HAVE_OPENMP
#include <omp.h>
#endif

namespace hypertile {

// Result of an order-independent arg-max: ties go to the smallest index, so
// the answer does not depend on how the index range is split across threads.
struct ArgMax {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t index = std::numeric_limits<std::size_t>::max();

  void offer(double v, std::size_t i) {
    if (v > value || (v == value && i < index)) {
      value = v;
      index = i;
    }
  }
  void merge(const ArgMax& o) { offer(o.value, o.index); }
  bool found() const { return index != std::numeric_limits<std::size_t>::max(); }
};

// Exceptions thrown inside a parallel loop are carried out of it; the one with
// the smallest index wins so that the error is also thread-count independent.
class LoopErrors {
 public:
  void capture(std::size_t i) {
    std::lock_guard<std::mutex> lock(m_);
    if (i < index_) {
      index_ = i;
      error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex m_;
  std::size_t index_ = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error_;
};

// f(i) -> double for i in [0, n). NaN values are skipped.
template <class F>
ArgMax parallel_argmax(std::size_t n, F&& f) {
  ArgMax best;
#ifdef HYPERTILE_HAVE_OPENMP
  int nt = omp_get_max_threads();
  std::vector<ArgMax> part(static_cast<std::size_t>(nt));
  LoopErrors errors;
#pragma omp parallel
  {
    ArgMax local;
#pragma omp for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        double v = f(static_cast<std::size_t>(i));
        if (v == v) local.offer(v, static_cast<std::size_t>(i));
      } catch (...) {
        errors.capture(static_cast<std::size_t>(i));
      }
    }
    part[static_cast<std::size_t>(omp_get_thread_num())] = local;
  }
  errors.rethrow();
  for (const auto& p : part) best.merge(p);
#else
  for (std::size_t i = 0; i < n; ++i) {
    double v = f(i);
    if (v == v) best.offer(v, i);
  }
#endif
  return best;
}

// Fills out[i] = f(i). Each slot is written by exactly one iteration.
template <class T, class F>
void parallel_fill(std::vector<T>& out, F&& f) {
#ifdef HYPERTILE_HAVE_OPENMP
  LoopErrors errors;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(out.size()); ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      errors.capture(static_cast<std::size_t>(i));
    }
  }
  errors.rethrow();
#else
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(i);
#endif
}

}  // namespace hypertile
