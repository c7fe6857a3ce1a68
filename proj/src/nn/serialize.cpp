#include "theftbench/nn/serialize.hpp"

#include <fstream>

#include "theftbench/error.hpp"

namespace theftbench::nn {

using json = nlohmann::ordered_json;

namespace {

template <typename T>
T get_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad field '") + key + "': " + e.what());
  }
}

}  // namespace

json layer_to_json(const LayerSpec& spec) {
  struct {
    json operator()(const DenseSpec& s) const {
      return {{"kind", "dense"}, {"units", s.units}, {"activation", to_string(s.activation)}};
    }
    json operator()(const LstmSpec& s) const {
      return {{"kind", "lstm"}, {"units", s.units}, {"return_sequences", s.return_sequences}};
    }
    json operator()(const DropoutSpec& s) const { return {{"kind", "dropout"}, {"rate", s.rate}}; }
    json operator()(const Conv2DSpec& s) const {
      return {{"kind", "conv2d"},
              {"filters", s.filters},
              {"kernel", {3, 3}},
              {"activation", "relu"}};
    }
    json operator()(const MaxPool2DSpec&) const {
      return {{"kind", "maxpool2d"}, {"pool", {2, 2}}};
    }
    json operator()(const FlattenSpec&) const { return {{"kind", "flatten"}}; }
    json operator()(const ReshapeSpec& s) const {
      return {{"kind", "reshape"}, {"rows", s.rows}, {"cols", s.cols}};
    }
  } visitor;
  return std::visit(visitor, spec);
}

LayerSpec layer_from_json(const json& j) {
  const auto kind = get_field<std::string>(j, "kind");
  if (kind == "dense") {
    return DenseSpec{get_field<std::size_t>(j, "units"),
                     activation_from_string(get_field<std::string>(j, "activation"))};
  }
  if (kind == "lstm") {
    return LstmSpec{get_field<std::size_t>(j, "units"), get_field<bool>(j, "return_sequences")};
  }
  if (kind == "dropout") return DropoutSpec{get_field<double>(j, "rate")};
  if (kind == "conv2d") {
    if (j.contains("kernel") && j.at("kernel") != json({3, 3})) {
      throw SchemaError("only 3x3 convolution kernels are supported");
    }
    return Conv2DSpec{get_field<std::size_t>(j, "filters")};
  }
  if (kind == "maxpool2d") return MaxPool2DSpec{};
  if (kind == "flatten") return FlattenSpec{};
  if (kind == "reshape") {
    return ReshapeSpec{get_field<std::size_t>(j, "rows"), get_field<std::size_t>(j, "cols")};
  }
  throw SchemaError("unknown layer kind '" + kind + "'");
}

json architecture_to_json(const ModelArchitecture& arch) {
  json layers = json::array();
  for (const auto& l : arch.layers) layers.push_back(layer_to_json(l));
  return {{"name", arch.name}, {"input_shape", arch.input_shape}, {"layers", layers}};
}

ModelArchitecture architecture_from_json(const json& j) {
  ModelArchitecture arch;
  arch.name = get_field<std::string>(j, "name");
  arch.input_shape = get_field<Shape>(j, "input_shape");
  if (!j.at("layers").is_array()) throw SchemaError("'layers' must be an array");
  for (const auto& l : j.at("layers")) arch.layers.push_back(layer_from_json(l));
  try {
    output_shapes(arch);
  } catch (const ArchitectureError& e) {
    throw SchemaError(std::string("invalid architecture: ") + e.what());
  }
  return arch;
}

json model_to_json(const TrainedModel& model) {
  json params = json::array();
  for (const auto& layer : model.params()) {
    json tensors = json::array();
    for (const auto& t : layer) tensors.push_back({{"shape", t.shape}, {"data", t.data}});
    params.push_back(std::move(tensors));
  }
  const auto& m = model.meta();
  json meta = {{"seed", m.seed},
               {"epochs", m.epochs},
               {"train_loss", m.train_loss},
               {"train_accuracy", m.train_accuracy},
               {"val_loss", m.val_loss},
               {"val_accuracy", m.val_accuracy},
               {"val_fpr", m.val_fpr}};
  json out = {{"version", kModelFormatVersion}};
  const json arch = architecture_to_json(model.arch());
  for (const auto& [k, v] : arch.items()) out[k] = v;
  out["train_meta"] = std::move(meta);
  out["params"] = std::move(params);
  return out;
}

TrainedModel model_from_json(const json& j) {
  const auto version = get_field<std::string>(j, "version");
  if (version != kModelFormatVersion) {
    throw SchemaError("unsupported model version '" + version + "'");
  }
  ModelArchitecture arch = architecture_from_json(j);
  Params params;
  const json& jp = j.at("params");
  if (!jp.is_array()) throw SchemaError("'params' must be an array");
  for (const auto& layer : jp) {
    std::vector<Tensor> ts;
    for (const auto& t : layer) {
      ts.emplace_back(get_field<Shape>(t, "shape"), get_field<std::vector<double>>(t, "data"));
    }
    params.push_back(std::move(ts));
  }
  TrainMeta meta;
  if (j.contains("train_meta")) {
    const json& m = j.at("train_meta");
    meta.seed = get_field<std::uint64_t>(m, "seed");
    meta.epochs = get_field<std::size_t>(m, "epochs");
    meta.train_loss = get_field<double>(m, "train_loss");
    meta.train_accuracy = get_field<double>(m, "train_accuracy");
    meta.val_loss = get_field<double>(m, "val_loss");
    meta.val_accuracy = get_field<double>(m, "val_accuracy");
    meta.val_fpr = get_field<double>(m, "val_fpr");
  }
  return TrainedModel(std::move(arch), std::move(params), meta);
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_json(model).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace theftbench::nn
