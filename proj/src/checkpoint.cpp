#include "cortex/checkpoint.hpp"

#include <fstream>
#include <json.hpp>

#include "cortex/errors.hpp"
#include "cortex/nn/tensor_io.hpp"

namespace cortex {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kDescriptorVersion = 1;

json info_json(const CheckpointInfo& info) {
  return {{"seed", info.seed}, {"train_subjects", info.train_subjects}, {"masked_subjects", info.masked_subjects}};
}

CheckpointInfo info_from(const json& j) {
  CheckpointInfo info;
  info.seed = j.at("seed").get<std::uint64_t>();
  info.train_subjects = j.at("train_subjects").get<std::vector<std::string>>();
  info.masked_subjects = j.at("masked_subjects").get<std::vector<std::string>>();
  return info;
}

void write_descriptor(const fs::path& dir, const json& j) {
  std::ofstream out(dir / kCheckpointDescriptor, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint descriptor in " + dir.string());
  out << j.dump(2) << '\n';
}

json read_descriptor(const fs::path& dir, const std::string& kind) {
  const fs::path path = dir / kCheckpointDescriptor;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("no checkpoint at " + dir.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint descriptor " + path.string() + ": " + e.what());
  }
  if (j.value("kind", "") != kind) {
    throw DataError("checkpoint " + dir.string() + " holds a '" + j.value("kind", "?") + "' model, expected '" +
                    kind + "'");
  }
  if (j.value("version", 0) != kDescriptorVersion) throw DataError("unsupported checkpoint version in " + dir.string());
  return j;
}

template <typename Tens>
json put(const fs::path& dir, const std::string& name, const Tens& t) {
  const std::string file = name + ".eegt";
  nn::save_tensor(dir / file, t);
  return {{"name", name}, {"file", file}, {"dims", t.dims()}};
}

void take(const fs::path& dir, const json& entries, const std::string& name, nn::Tensor& into) {
  for (const auto& e : entries) {
    if (e.at("name") != name) continue;
    nn::Tensor t = nn::load_tensor(dir / e.at("file").get<std::string>());
    if (t.dims() != into.dims()) {
      throw DataError("checkpoint tensor " + name + " has shape " + nn::shape_string(t.dims()) + ", expected " +
                      nn::shape_string(into.dims()));
    }
    into = std::move(t);
    return;
  }
  throw DataError("checkpoint " + dir.string() + " lacks tensor " + name);
}

nn::Tensor vec_tensor(const std::vector<float>& v) { return nn::Tensor({v.size()}, v); }

}  // namespace

bool checkpoint_exists(const fs::path& dir) { return fs::is_regular_file(dir / kCheckpointDescriptor); }

void save_autoencoder(const fs::path& dir, const Autoencoder<float>& model, const CheckpointInfo& info) {
  fs::create_directories(dir);
  json tensors = json::array();
  for (const auto* p : model.encoder.parameters()) tensors.push_back(put(dir, p->name, p->value));
  for (const auto* p : model.decoder.parameters()) tensors.push_back(put(dir, p->name, p->value));
  tensors.push_back(put(dir, "normalizer.mean", vec_tensor(model.normalizer.mean)));
  tensors.push_back(put(dir, "normalizer.std", vec_tensor(model.normalizer.stddev)));
  const auto& c = model.config;
  json j = {{"kind", "autoencoder"},
            {"version", kDescriptorVersion},
            {"config",
             {{"input_channels", c.input_channels}, {"input_length", c.input_length}, {"latent_dim", c.latent_dim}}},
            {"encoder_frozen", model.encoder_frozen},
            {"run", info_json(info)},
            {"tensors", tensors}};
  write_descriptor(dir, j);
}

Autoencoder<float> load_autoencoder(const fs::path& dir, CheckpointInfo* info) {
  const json j = read_descriptor(dir, "autoencoder");
  try {
    AutoencoderConfig c;
    c.input_channels = j.at("config").at("input_channels").get<std::size_t>();
    c.input_length = j.at("config").at("input_length").get<std::size_t>();
    c.latent_dim = j.at("config").at("latent_dim").get<std::size_t>();
    nn::RngStream init(0);
    Autoencoder<float> model(c, init);
    const json& entries = j.at("tensors");
    for (auto* p : model.encoder.parameters()) take(dir, entries, p->name, p->value);
    for (auto* p : model.decoder.parameters()) take(dir, entries, p->name, p->value);
    nn::Tensor mean({c.input_channels});
    nn::Tensor sd({c.input_channels});
    take(dir, entries, "normalizer.mean", mean);
    take(dir, entries, "normalizer.std", sd);
    model.normalizer.mean = mean.values();
    model.normalizer.stddev = sd.values();
    model.encoder_frozen = j.at("encoder_frozen").get<bool>();
    if (info) *info = info_from(j.at("run"));
    return model;
  } catch (const json::exception& e) {
    throw DataError("malformed autoencoder checkpoint " + dir.string() + ": " + e.what());
  }
}

void save_alignment(const fs::path& dir, const AlignmentModel<float>& model, const CheckpointInfo& info) {
  fs::create_directories(dir);
  json tensors = json::array();
  for (const auto* p : model.parameters()) tensors.push_back(put(dir, p->name, p->value));
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& bn = model.batchnorm(i);
    const std::string base = bn.gamma().name.substr(0, bn.gamma().name.rfind('.'));
    tensors.push_back(put(dir, base + ".running_mean", bn.running_mean()));
    tensors.push_back(put(dir, base + ".running_var", bn.running_var()));
  }
  const auto& c = model.config();
  json j = {{"kind", "alignment"},
            {"version", kDescriptorVersion},
            {"config",
             {{"latent_dim", c.latent_dim},
              {"embedding_dim", c.embedding_dim},
              {"hidden", c.hidden},
              {"dropout", c.dropout}}},
            {"run", info_json(info)},
            {"tensors", tensors}};
  write_descriptor(dir, j);
}

AlignmentModel<float> load_alignment(const fs::path& dir, CheckpointInfo* info) {
  const json j = read_descriptor(dir, "alignment");
  try {
    AlignmentConfig c;
    c.latent_dim = j.at("config").at("latent_dim").get<std::size_t>();
    c.embedding_dim = j.at("config").at("embedding_dim").get<std::size_t>();
    c.hidden = j.at("config").at("hidden").get<std::array<std::size_t, 3>>();
    c.dropout = j.at("config").at("dropout").get<double>();
    nn::RngStream init(0);
    AlignmentModel<float> model(c, init);
    const json& entries = j.at("tensors");
    for (auto* p : model.parameters()) take(dir, entries, p->name, p->value);
    for (std::size_t i = 0; i < 3; ++i) {
      auto& bn = model.batchnorm(i);
      const std::string base = bn.gamma().name.substr(0, bn.gamma().name.rfind('.'));
      take(dir, entries, base + ".running_mean", bn.running_mean());
      take(dir, entries, base + ".running_var", bn.running_var());
    }
    model.freeze();
    if (info) *info = info_from(j.at("run"));
    return model;
  } catch (const json::exception& e) {
    throw DataError("malformed alignment checkpoint " + dir.string() + ": " + e.what());
  }
}

}  // namespace cortex
