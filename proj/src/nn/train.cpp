#include "theftbench/nn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "theftbench/error.hpp"

namespace theftbench::nn {

namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kShuffleStream = 1'000;
constexpr std::uint64_t kDropoutStream = 1'000'000;

struct Packed {
  Matrix xs;
  std::vector<Label> labels;
};

Packed pack(const LabeledDataset& ds, std::span<const std::size_t> idx) {
  Packed p;
  p.xs.resize(static_cast<Eigen::Index>(kSlotsPerDay), static_cast<Eigen::Index>(idx.size()));
  p.labels.reserve(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto& s = ds.samples[idx[j]];
    const auto& r = s.vector.readings();
    std::copy(r.begin(), r.end(), p.xs.col(static_cast<Eigen::Index>(j)).data());
    p.labels.push_back(s.label);
  }
  return p;
}

struct Scores {
  double loss = 0.0;
  Evaluation eval;
};

Scores score(const TrainedModel& model, const Packed& data, std::size_t chunk = 512) {
  Scores s;
  std::vector<Label> predicted;
  predicted.reserve(data.labels.size());
  double loss = 0.0;
  const auto n = static_cast<std::size_t>(data.xs.cols());
  for (std::size_t start = 0; start < n; start += chunk) {
    const auto len = std::min(chunk, n - start);
    Workspace ws;
    const Matrix p = model.network().forward(
        model.params(), data.xs.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)),
        Mode::Infer, nullptr, ws);
    const std::span<const Label> labels(data.labels.data() + start, len);
    loss += cross_entropy(ws.logits, labels).sum();
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      predicted.push_back(p(1, j) > p(0, j) ? Label::Theft : Label::Normal);
    }
  }
  s.loss = n == 0 ? 0.0 : loss / static_cast<double>(n);
  s.eval = score_predictions(predicted, data.labels);
  return s;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw DomainError("epochs must be positive");
  if (batch_size == 0) throw DomainError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw DomainError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw DomainError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw DomainError("validation_fraction must lie in (0, 1)");
  }
}

AdamState::AdamState(const Params& like)
    : first_moment(zeros_like(like)), second_moment(zeros_like(like)) {}

void AdamState::apply(Params& params, const Params& grads, const TrainConfig& cfg) {
  ++step;
  const double t = static_cast<double>(step);
  const double lr = cfg.learning_rate * std::sqrt(1.0 - std::pow(cfg.beta2, t)) /
                    (1.0 - std::pow(cfg.beta1, t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < params[i].size(); ++k) {
      auto p = params[i][k].as_vector().array();
      const auto g = grads[i][k].as_vector().array();
      auto m = first_moment[i][k].as_vector().array();
      auto v = second_moment[i][k].as_vector().array();
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.square();
      p -= lr * m / (v.sqrt() + cfg.epsilon);
    }
  }
}

TrainedModel train_model(const ModelArchitecture& arch, const LabeledDataset& ds,
                         const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (ds.empty()) throw SizeError("training dataset is empty");
  if (ds.count(Label::Normal) == 0 || ds.count(Label::Theft) == 0) {
    throw ValidationError("training dataset must contain both classes");
  }
  if (ds.size() < 2) throw SizeError("training needs at least two samples");

  const Network network(arch);
  Params params = network.init_params(derive_seed(cfg.seed, kInitStream));

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  {
    auto rng = make_rng(cfg.seed, kSplitStream);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(cfg.validation_fraction * static_cast<double>(ds.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, ds.size() - 1);
  const std::span<const std::size_t> all(order);
  const Packed val = pack(ds, all.first(n_val));
  const Packed train = pack(ds, all.subspan(n_val));
  const std::size_t n_train = train.labels.size();

  AdamState adam(params);
  Params grads = zeros_like(params);
  Params best = params;
  double best_val = std::numeric_limits<double>::infinity();
  TrainMeta meta;
  meta.seed = cfg.seed;
  std::size_t since_best = 0;

  std::vector<std::size_t> batch_order(n_train);
  std::iota(batch_order.begin(), batch_order.end(), std::size_t{0});
  Workspace ws;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    auto shuffle_rng = make_rng(cfg.seed, kShuffleStream + epoch);
    std::shuffle(batch_order.begin(), batch_order.end(), shuffle_rng);
    auto dropout_rng = make_rng(cfg.seed, kDropoutStream + epoch);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, n_train - start);
      Matrix xb(static_cast<Eigen::Index>(kSlotsPerDay), static_cast<Eigen::Index>(len));
      std::vector<Label> yb(len);
      for (std::size_t j = 0; j < len; ++j) {
        const std::size_t src = batch_order[start + j];
        xb.col(static_cast<Eigen::Index>(j)) = train.xs.col(static_cast<Eigen::Index>(src));
        yb[j] = train.labels[src];
      }
      Matrix p;
      try {
        p = network.forward(params, xb, Mode::Train, &dropout_rng, ws);
      } catch (const NumericError& e) {
        throw TrainingError("training diverged in epoch " + std::to_string(epoch) + ": " + e.what());
      }
      const Eigen::VectorXd losses = cross_entropy(ws.logits, yb);
      const double batch_loss = losses.sum();
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("training diverged in epoch " + std::to_string(epoch) +
                            ": loss is not finite");
      }
      loss_sum += batch_loss;
      Matrix dlogits = p;
      for (std::size_t j = 0; j < len; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        const Label predicted = p(1, col) > p(0, col) ? Label::Theft : Label::Normal;
        correct += predicted == yb[j] ? 1 : 0;
        dlogits(static_cast<int>(yb[j]), col) -= 1.0;
      }
      dlogits /= static_cast<double>(len);
      for (auto& layer : grads) {
        for (auto& t : layer) std::fill(t.data.begin(), t.data.end(), 0.0);
      }
      try {
        network.backward(params, ws, dlogits, &grads, false);
      } catch (const NumericError& e) {
        throw TrainingError("training diverged in epoch " + std::to_string(epoch) + ": " + e.what());
      }
      adam.apply(params, grads, cfg);
    }

    const TrainedModel snapshot(arch, params);
    const Scores v = score(snapshot, val);
    if (!std::isfinite(v.loss)) {
      throw TrainingError("training diverged in epoch " + std::to_string(epoch) +
                          ": validation loss is not finite");
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(n_train);
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(n_train);
    log.val_loss = v.loss;
    log.val_accuracy = v.eval.accuracy;
    log.val_fpr = v.eval.fpr;
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_epoch) on_epoch(log);

    if (v.loss < best_val) {
      best_val = v.loss;
      best = params;
      since_best = 0;
      meta.epochs = epoch;
      meta.train_loss = log.train_loss;
      meta.train_accuracy = log.train_accuracy;
      meta.val_loss = log.val_loss;
      meta.val_accuracy = log.val_accuracy;
      meta.val_fpr = log.val_fpr;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }
  return TrainedModel(arch, std::move(best), meta);
}

Evaluation score_predictions(std::span<const Label> predicted, std::span<const Label> actual) {
  if (predicted.size() != actual.size()) throw SizeError("prediction/label count mismatch");
  Evaluation e;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool theft_pred = predicted[i] == Label::Theft;
    if (actual[i] == Label::Theft) {
      ++(theft_pred ? e.true_positive : e.false_negative);
    } else {
      ++(theft_pred ? e.false_positive : e.true_negative);
    }
  }
  const std::size_t total = e.total();
  e.accuracy = total == 0 ? 0.0
                          : static_cast<double>(e.true_positive + e.true_negative) /
                                static_cast<double>(total);
  const std::size_t normals = e.false_positive + e.true_negative;
  e.fpr = normals == 0 ? 0.0 : static_cast<double>(e.false_positive) / static_cast<double>(normals);
  return e;
}

Evaluation evaluate_model(const TrainedModel& model, const LabeledDataset& ds) {
  if (ds.empty()) throw SizeError("evaluation dataset is empty");
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return score(model, pack(ds, idx)).eval;
}

}  // namespace theftbench::nn
