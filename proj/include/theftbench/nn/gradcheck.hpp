#pragma once

#include <cstddef>

#include "theftbench/nn/model.hpp"

namespace theftbench::nn {

// Coordinates whose analytic and numeric magnitudes are both below this are
// compared absolutely (denominator clamp).
inline constexpr double kGradCheckFloor = 1e-7;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;
  std::size_t checked = 0;
  // Coordinates skipped because a ReLU or max-pool decision flips between
  // x - eps and x + eps. Central differences straddle a kink there and are
  // not an oracle for the one-sided derivative.
  std::size_t kinks = 0;
};

// |a - n| / max(|a|, |n|, kGradCheckFloor)
double relative_error(double analytic, double numeric);

// Central differences (L(x + eps e_i) - L(x - eps e_i)) / 2 eps against
// loss_and_input_gradient over the 48 readings. Perturbed inputs may dip
// slightly below zero; the network is evaluated on the raw values. With
// skip_kinks, coordinates whose activation pattern differs at x - eps, x and
// x + eps are counted in `kinks` and left out of the maximum.
GradCheckResult finite_difference_check(const TrainedModel& model, const DailyLoadVector& x,
                                        Label y, double epsilon, bool skip_kinks = true);

// Same for parameter gradients; checks at most max_params coordinates spread
// evenly over all tensors (0 = all). Meant for small models.
GradCheckResult finite_difference_param_check(const TrainedModel& model, const DailyLoadVector& x,
                                              Label y, double epsilon, std::size_t max_params = 0,
                                              bool skip_kinks = true);

}  // namespace theftbench::nn
