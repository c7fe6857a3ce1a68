#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "theftbench/load_vector.hpp"
#include "theftbench/nn/model.hpp"

namespace theftbench::attack {

// SearchFromFree inputs. size and sigma are in kWh.
struct AttackConfig {
  std::size_t step = 14;  // maximum iterations
  double size = 0.01;     // largest per-slot change per iteration
  double lambda = 10.0;   // weight of the bill (L1) term
  double sigma = 0.1;     // std-dev of the Gaussian start
  std::uint64_t seed = 0;

  // Throws DomainError: size and sigma must be positive and finite, lambda
  // non-negative.
  void validate() const;
};

struct AttackResult {
  DailyLoadVector adversarial;
  // The attacking model classified the result Normal.
  bool success_local = false;
  std::size_t iterations_used = 0;
  double l1 = 0.0;
  // CE(f(a), Theft) - lambda * ||a||_1 at exit.
  double final_loss_total = 0.0;
};

// Optional record of every iterate a_0, a_1, ... (before the final check).
struct AttackTrace {
  std::vector<Readings> iterates;
};

// Clamps negatives to zero. Throws NumericError on non-finite entries.
DailyLoadVector project_nonnegative(std::span<const double> v);

// Gaussian start N(0, sigma^2) per slot, projected. Depends only on
// (sigma, seed).
DailyLoadVector initial_point(double sigma, std::uint64_t seed);

// Ascent direction of L_total = CE(f(a), Theft) - lambda * ||a||_1 given
// the cross-entropy gradient: g_i - lambda (the L1 subgradient is +1 on the
// feasible set, zeros included).
Readings total_loss_gradient(const Readings& ce_gradient, double lambda);

// SearchFromFree against `model` (the attacker's local model f'; the
// defender's own model in white-box runs):
//   a <- project(N(0, sigma^2))
//   repeat step times:
//     stop with success if model(a) == Normal
//     G <- grad_a L_total;  stop if max|G| == 0
//     a <- project(a + size * G / max|G|)
// Deterministic in cfg.seed. Throws NumericError on non-finite gradients.
AttackResult search_from_free(const nn::TrainedModel& model, const AttackConfig& cfg,
                              AttackTrace* trace = nullptr);

// Runs one attack per seed (cfg.seed is ignored) in lock-step batches of at
// most `chunk` vectors, spreading chunks over `jobs` threads. Chunk
// boundaries depend only on the seed list, so results are independent of
// jobs. Batched matrix products round differently from a single-vector run,
// so results can differ from search_from_free in the last bits.
std::vector<AttackResult> search_from_free_batch(const nn::TrainedModel& model,
                                                 const AttackConfig& cfg,
                                                 std::span<const std::uint64_t> seeds,
                                                 std::size_t jobs = 1, std::size_t chunk = 250);

// VA1: alpha * m with alpha in (0, 1]; DomainError otherwise.
DailyLoadVector vanilla_scale(const DailyLoadVector& m, double alpha);

// VA2: 48 i.i.d. draws from U(0, u); u > 0, DomainError otherwise.
DailyLoadVector vanilla_uniform(double u, std::uint64_t seed);

}  // namespace theftbench::attack
