#include "theftbench/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace theftbench::nn {

namespace {

struct Probe {
  double loss = 0.0;
  std::vector<int> pattern;
};

Probe probe(const Network& net, const Params& params, const Matrix& x, Label y) {
  Workspace ws;
  net.forward(params, x, Mode::Infer, nullptr, ws);
  const Label labels[] = {y};
  return {cross_entropy(ws.logits, labels)[0], net.activation_pattern(ws)};
}

void track(GradCheckResult& r, std::size_t i, double analytic, double numeric) {
  ++r.checked;
  const double err = relative_error(analytic, numeric);
  if (err > r.max_relative_error) {
    r.max_relative_error = err;
    r.worst_index = i;
    r.analytic = analytic;
    r.numeric = numeric;
  }
}

bool straddles_kink(const std::vector<int>& centre, const Probe& up, const Probe& down) {
  return up.pattern != centre || down.pattern != centre;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult finite_difference_check(const TrainedModel& model, const DailyLoadVector& x,
                                        Label y, double epsilon, bool skip_kinks) {
  const LossGradient lg = model.loss_and_input_gradient(x, y);
  const DailyLoadVector one[] = {x};
  const Matrix base = to_matrix(one);
  const Network& net = model.network();
  const auto centre = probe(net, model.params(), base, y).pattern;
  GradCheckResult r;
  for (std::size_t i = 0; i < kSlotsPerDay; ++i) {
    Matrix plus = base;
    Matrix minus = base;
    plus(static_cast<Eigen::Index>(i), 0) += epsilon;
    minus(static_cast<Eigen::Index>(i), 0) -= epsilon;
    const Probe up = probe(net, model.params(), plus, y);
    const Probe down = probe(net, model.params(), minus, y);
    if (skip_kinks && straddles_kink(centre, up, down)) {
      ++r.kinks;
      continue;
    }
    track(r, i, lg.gradient[i], (up.loss - down.loss) / (2.0 * epsilon));
  }
  return r;
}

GradCheckResult finite_difference_param_check(const TrainedModel& model, const DailyLoadVector& x,
                                              Label y, double epsilon, std::size_t max_params,
                                              bool skip_kinks) {
  const Network& net = model.network();
  const DailyLoadVector one[] = {x};
  const Matrix input = to_matrix(one);
  Params params = model.params();

  Workspace ws;
  const Matrix p = net.forward(params, input, Mode::Infer, nullptr, ws);
  const auto centre = net.activation_pattern(ws);
  Matrix dlogits = p;
  dlogits(static_cast<int>(y), 0) -= 1.0;
  Params grads = zeros_like(params);
  net.backward(params, ws, dlogits, &grads, false);

  std::size_t total = 0;
  for (const auto& layer : params) {
    for (const auto& t : layer) total += t.size();
  }
  const std::size_t stride = (max_params == 0 || max_params >= total) ? 1 : total / max_params;

  GradCheckResult r;
  std::size_t flat = 0;
  for (std::size_t l = 0; l < params.size(); ++l) {
    for (std::size_t k = 0; k < params[l].size(); ++k) {
      for (std::size_t e = 0; e < params[l][k].size(); ++e, ++flat) {
        if (flat % stride != 0) continue;
        double& w = params[l][k].data[e];
        const double saved = w;
        w = saved + epsilon;
        const Probe up = probe(net, params, input, y);
        w = saved - epsilon;
        const Probe down = probe(net, params, input, y);
        w = saved;
        if (skip_kinks && straddles_kink(centre, up, down)) {
          ++r.kinks;
          continue;
        }
        track(r, flat, grads[l][k].data[e], (up.loss - down.loss) / (2.0 * epsilon));
      }
    }
  }
  return r;
}

}  // namespace theftbench::nn
