#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gossip {

// Two-sided 97.5% Student-t quantile, i.e. the multiplier for a 95%
// confidence interval with `dof` degrees of freedom.
inline double t_quantile_975(int dof) {
  static constexpr double table[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
      2.040,  2.037, 2.035, 2.032, 2.030, 2.028, 2.026, 2.024, 2.023, 2.021};
  if (dof < 1) throw std::invalid_argument("t_quantile_975: dof must be >= 1");
  if (dof <= 40) return table[dof - 1];
  return 1.960;
}

// Time-weighted average of a piecewise-constant signal over a measurement
// window, accumulated into equal-length contiguous batches. The batch means
// feed a standard batch-means 95% confidence interval.
class TimeWeightedBatches {
 public:
  TimeWeightedBatches(double window_begin, double window_end, int batch_count = 20)
      : begin_(window_begin),
        end_(window_end),
        batch_count_(batch_count),
        batch_length_((window_end - window_begin) / batch_count),
        inv_batch_length_(batch_count / (window_end - window_begin)),
        integrals_(static_cast<std::size_t>(batch_count), 0.0) {
    if (!(window_end > window_begin)) {
      throw std::invalid_argument("TimeWeightedBatches: empty window");
    }
    if (batch_count < 1) throw std::invalid_argument("TimeWeightedBatches: need >= 1 batch");
  }

  // Record that the signal held `value` over [from, to). Parts of the
  // segment outside the window are ignored; parts spanning batch boundaries
  // are split exactly.
  void add(double from, double to, double value) {
    from = std::max(from, begin_);
    to = std::min(to, end_);
    if (!(from < to)) return;
    int idx = std::clamp(static_cast<int>((from - begin_) * inv_batch_length_), 0, batch_count_ - 1);
    double cursor = from;
    while (cursor < to && idx < batch_count_) {
      const double boundary = (idx + 1 == batch_count_) ? end_ : begin_ + (idx + 1) * batch_length_;
      if (boundary <= cursor) {
        ++idx;
        continue;
      }
      const double stop = std::min(to, boundary);
      integrals_[static_cast<std::size_t>(idx)] += (stop - cursor) * value;
      cursor = stop;
      ++idx;
    }
  }

  double window_length() const { return end_ - begin_; }

  double mean() const {
    double total = 0.0;
    for (double v : integrals_) total += v;
    return total / window_length();
  }

  double ci95_halfwidth() const {
    if (batch_count_ < 2) return 0.0;
    const double overall = mean();
    double ss = 0.0;
    for (double integral : integrals_) {
      const double diff = integral / batch_length_ - overall;
      ss += diff * diff;
    }
    const double variance = ss / (batch_count_ - 1);
    return t_quantile_975(batch_count_ - 1) * std::sqrt(variance / batch_count_);
  }

 private:
  double begin_, end_;
  int batch_count_;
  double batch_length_, inv_batch_length_;
  std::vector<double> integrals_;
};

}  // namespace gossip
