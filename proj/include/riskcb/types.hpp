#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <variant>

namespace rcb {

/// A finite action index or a point of the unit interval.
using Action = std::variant<std::size_t, double>;

inline std::size_t action_index(const Action& a) {
  if (const auto* i = std::get_if<std::size_t>(&a)) return *i;
  throw std::invalid_argument("expected a finite action index");
}

inline double action_point(const Action& a) {
  if (const auto* x = std::get_if<double>(&a)) return *x;
  throw std::invalid_argument("expected a continuous action");
}

/// Affine map from a reward range [lo, hi] onto losses in [0, 1].
/// Loss is decreasing in reward; rewards outside the range are clipped.
class LossAdapter {
 public:
  LossAdapter() = default;
  LossAdapter(double reward_lo, double reward_hi) : lo_(reward_lo), hi_(reward_hi) {
    if (!(reward_hi > reward_lo)) throw std::invalid_argument("loss adapter needs reward_hi > reward_lo");
  }

  double loss(double reward) const { return std::clamp((hi_ - reward) / (hi_ - lo_), 0.0, 1.0); }
  double reward(double loss) const { return hi_ - loss * (hi_ - lo_); }
  double reward_lo() const { return lo_; }
  double reward_hi() const { return hi_; }
  double width() const { return hi_ - lo_; }

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
};

}  // namespace rcb
