#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "theftbench/load_vector.hpp"
#include "theftbench/nn/model.hpp"

namespace theftbench::nn {

// Mini-batch Adam with early stopping on validation loss.
struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  double validation_fraction = 0.2;
  // Epochs without validation-loss improvement before stopping; 0 disables.
  std::size_t patience = 3;
  std::uint64_t seed = 0;

  // Throws DomainError on non-positive sizes/rates or a fraction outside (0, 1).
  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_fpr = 0.0;
  double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Deterministic in cfg.seed: parameter init, split, shuffles and dropout masks
// all come from substreams of the seed. Returns the parameters of the epoch
// with the lowest validation loss. Throws TrainingError naming the epoch when
// the loss turns non-finite.
TrainedModel train_model(const ModelArchitecture& arch, const LabeledDataset& ds,
                         const TrainConfig& cfg, const EpochCallback& on_epoch = {});

struct Evaluation {
  double accuracy = 0.0;
  // Normal samples classified Theft over all Normal samples.
  double fpr = 0.0;
  std::size_t true_positive = 0;   // Theft -> Theft
  std::size_t true_negative = 0;   // Normal -> Normal
  std::size_t false_positive = 0;  // Normal -> Theft
  std::size_t false_negative = 0;  // Theft -> Normal
  std::size_t total() const {
    return true_positive + true_negative + false_positive + false_negative;
  }
};

Evaluation score_predictions(std::span<const Label> predicted, std::span<const Label> actual);

// Throws SizeError on an empty dataset.
Evaluation evaluate_model(const TrainedModel& model, const LabeledDataset& ds);

// One Adam step over all tensors; step is 1-based.
struct AdamState {
  Params first_moment;
  Params second_moment;
  std::size_t step = 0;

  explicit AdamState(const Params& like);
  void apply(Params& params, const Params& grads, const TrainConfig& cfg);
};

}  // namespace theftbench::nn
