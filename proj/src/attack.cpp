#include "theftbench/attack.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "theftbench/error.hpp"
#include "theftbench/rng.hpp"

namespace theftbench::attack {

using nn::Matrix;

namespace {

Readings column(const Matrix& m, Eigen::Index j) {
  Readings r;
  std::copy(m.col(j).data(), m.col(j).data() + kSlotsPerDay, r.begin());
  return r;
}

// Runs the attacks for one chunk of seeds in lock-step.
void run_chunk(const nn::TrainedModel& model, const AttackConfig& cfg,
               std::span<const std::uint64_t> seeds, std::span<std::optional<AttackResult>> out,
               AttackTrace* trace) {
  const auto n = static_cast<Eigen::Index>(seeds.size());
  Matrix a(static_cast<Eigen::Index>(kSlotsPerDay), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto init = initial_point(cfg.sigma, seeds[static_cast<std::size_t>(j)]);
    std::copy(init.readings().begin(), init.readings().end(), a.col(j).data());
  }
  if (trace != nullptr) trace->iterates.push_back(column(a, 0));

  auto finish = [&](Eigen::Index j, bool success, std::size_t iterations, double ce) {
    const Readings r = column(a, j);
    DailyLoadVector v(r);
    const double l1 = v.l1();
    out[static_cast<std::size_t>(j)] =
        AttackResult{std::move(v), success, iterations, l1, ce - cfg.lambda * l1};
  };

  std::vector<Eigen::Index> active(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) active[static_cast<std::size_t>(j)] = j;

  Matrix grads;
  Matrix probs;
  for (std::size_t step_num = 0; step_num < cfg.step && !active.empty(); ++step_num) {
    Matrix xs(a.rows(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
      xs.col(static_cast<Eigen::Index>(k)) = a.col(active[k]);
    }
    const std::vector<Label> labels(active.size(), Label::Theft);
    const Eigen::VectorXd ce = model.loss_and_input_gradient(xs, labels, grads, &probs);

    std::vector<Eigen::Index> still_active;
    still_active.reserve(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(k);
      const Eigen::Index j = active[k];
      if (!(probs(1, col) > probs(0, col))) {
        finish(j, true, step_num, ce[col]);
        continue;
      }
      const Eigen::ArrayXd g = grads.col(col).array() - cfg.lambda;
      if (!g.allFinite()) {
        throw NumericError("non-finite attack gradient at iteration " + std::to_string(step_num));
      }
      const double scale = g.abs().maxCoeff();
      if (scale == 0.0) {
        // Stationary point: nothing left to ascend.
        finish(j, false, step_num, ce[col]);
        continue;
      }
      a.col(j) = (a.col(j).array() + g * (cfg.size / scale)).cwiseMax(0.0).matrix();
      still_active.push_back(j);
    }
    active.swap(still_active);
    if (trace != nullptr && !active.empty()) trace->iterates.push_back(column(a, 0));
  }

  if (active.empty()) return;
  Matrix xs(a.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) xs.col(static_cast<Eigen::Index>(k)) = a.col(active[k]);
  nn::Workspace ws;
  const Matrix p = model.network().forward(model.params(), xs, nn::Mode::Infer, nullptr, ws);
  const std::vector<Label> labels(active.size(), Label::Theft);
  const Eigen::VectorXd ce = nn::cross_entropy(ws.logits, labels);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    finish(active[k], !(p(1, col) > p(0, col)), cfg.step, ce[col]);
  }
}

}  // namespace

void AttackConfig::validate() const {
  if (!(size > 0.0 && std::isfinite(size))) throw DomainError("attack size must be positive");
  if (!(sigma > 0.0 && std::isfinite(sigma))) throw DomainError("attack sigma must be positive");
  if (!(lambda >= 0.0 && std::isfinite(lambda))) {
    throw DomainError("attack lambda must be non-negative");
  }
}

DailyLoadVector project_nonnegative(std::span<const double> v) {
  if (v.size() != kSlotsPerDay) throw SizeError("projection needs 48 entries");
  Readings r;
  for (std::size_t i = 0; i < kSlotsPerDay; ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError("cannot project non-finite entry " + std::to_string(i));
    }
    r[i] = std::max(v[i], 0.0);
  }
  return DailyLoadVector(r);
}

DailyLoadVector initial_point(double sigma, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  Readings r;
  for (auto& v : r) v = noise(rng);
  return project_nonnegative(r);
}

Readings total_loss_gradient(const Readings& ce_gradient, double lambda) {
  Readings g;
  for (std::size_t i = 0; i < kSlotsPerDay; ++i) g[i] = ce_gradient[i] - lambda;
  return g;
}

AttackResult search_from_free(const nn::TrainedModel& model, const AttackConfig& cfg,
                              AttackTrace* trace) {
  cfg.validate();
  const std::uint64_t seeds[] = {cfg.seed};
  std::optional<AttackResult> out[1];
  run_chunk(model, cfg, seeds, out, trace);
  return std::move(*out[0]);
}

std::vector<AttackResult> search_from_free_batch(const nn::TrainedModel& model,
                                                 const AttackConfig& cfg,
                                                 std::span<const std::uint64_t> seeds,
                                                 std::size_t jobs, std::size_t chunk) {
  cfg.validate();
  if (chunk == 0) throw DomainError("attack chunk size must be positive");
  std::vector<std::optional<AttackResult>> slots(seeds.size());
  const std::size_t chunks = (seeds.size() + chunk - 1) / chunk;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      const std::size_t start = c * chunk;
      const std::size_t len = std::min(chunk, seeds.size() - start);
      try {
        run_chunk(model, cfg, seeds.subspan(start, len),
                  std::span<std::optional<AttackResult>>(slots).subspan(start, len), nullptr);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(chunks, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<AttackResult> results;
  results.reserve(slots.size());
  for (auto& s : slots) results.push_back(std::move(*s));
  return results;
}

DailyLoadVector vanilla_scale(const DailyLoadVector& m, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("VA1 alpha must lie in (0, 1]");
  Readings r;
  for (std::size_t i = 0; i < kSlotsPerDay; ++i) r[i] = alpha * m[i];
  return DailyLoadVector(r);
}

DailyLoadVector vanilla_uniform(double u, std::uint64_t seed) {
  if (!(u > 0.0 && std::isfinite(u))) throw DomainError("VA2 bound u must be positive");
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> dist(0.0, u);
  Readings r;
  for (auto& v : r) v = dist(rng);
  return DailyLoadVector(r);
}

}  // namespace theftbench::attack
