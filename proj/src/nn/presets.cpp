#include "theftbench/nn/presets.hpp"

#include <algorithm>
#include <cctype>

#include "theftbench/error.hpp"

namespace theftbench::nn {

namespace {

constexpr double kDrop = 0.25;

DenseSpec relu(std::size_t units) { return {units, Activation::ReLU}; }
DenseSpec head() { return {2, Activation::Softmax}; }

ModelArchitecture fnn(std::string name, std::vector<LayerSpec> layers) {
  return {std::move(name), {kSlotsPerDay}, std::move(layers)};
}

ModelArchitecture rnn(std::string name, std::size_t a, std::size_t b, std::size_t c) {
  return {std::move(name),
          {kSlotsPerDay, 1},
          {LstmSpec{a, true}, DropoutSpec{kDrop}, LstmSpec{b, true}, DropoutSpec{kDrop},
           LstmSpec{c, false}, head()}};
}

ModelArchitecture cnn(std::string name, std::size_t a, std::size_t b, std::size_t dense) {
  return {std::move(name),
          {6, 8},
          {Conv2DSpec{a}, Conv2DSpec{b}, MaxPool2DSpec{}, DropoutSpec{kDrop}, FlattenSpec{},
           relu(dense), head()}};
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"f_fnn",  "f_rnn",  "f_cnn",
                                                 "fp_fnn", "fp_rnn", "fp_cnn"};
  return names;
}

bool is_preset(const std::string& name) {
  const auto& n = preset_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

ModelArchitecture preset(const std::string& name) {
  if (name == "f_fnn") {
    return fnn(name, {relu(128), relu(256), relu(128), DropoutSpec{kDrop}, relu(32),
                      DropoutSpec{kDrop}, head()});
  }
  if (name == "fp_fnn") {
    return fnn(name, {relu(168), relu(328), relu(168), relu(128), DropoutSpec{kDrop}, relu(64),
                      DropoutSpec{kDrop}, head()});
  }
  if (name == "f_rnn") return rnn(name, 256, 168, 128);
  if (name == "fp_rnn") return rnn(name, 246, 148, 108);
  if (name == "f_cnn") return cnn(name, 128, 128, 32);
  if (name == "fp_cnn") return cnn(name, 156, 214, 48);
  throw ArchitectureError("unknown architecture preset '" + name +
                          "' (expected f_fnn, f_rnn, f_cnn, fp_fnn, fp_rnn or fp_cnn)");
}

ModelArchitecture scaled_preset(const std::string& name, std::size_t divisor) {
  ModelArchitecture arch = preset(name);
  if (divisor <= 1) return arch;
  auto shrink = [divisor](std::size_t n) { return std::max<std::size_t>(2, n / divisor); };
  for (auto& spec : arch.layers) {
    if (auto* d = std::get_if<DenseSpec>(&spec); d && d->activation != Activation::Softmax) {
      d->units = shrink(d->units);
    } else if (auto* l = std::get_if<LstmSpec>(&spec)) {
      l->units = shrink(l->units);
    } else if (auto* c = std::get_if<Conv2DSpec>(&spec)) {
      c->filters = shrink(c->filters);
    }
  }
  arch.name = name + "/" + std::to_string(divisor);
  return arch;
}

std::string display_name(const std::string& preset_name) {
  const bool attacker = preset_name.starts_with("fp_");
  std::string kind = preset_name.substr(attacker ? 3 : 2);
  std::transform(kind.begin(), kind.end(), kind.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return std::string(attacker ? "f'_" : "f_") + kind;
}

}  // namespace theftbench::nn
