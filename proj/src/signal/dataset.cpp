#include "cortex/signal/dataset.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "cortex/nn/tensor_io.hpp"

namespace cortex::signal {
namespace fs = std::filesystem;
using nlohmann::json;

void DatasetManifest::validate() const {
  std::set<std::string> known;
  for (const auto& s : subjects) {
    if (s.empty()) throw DataError("manifest: empty subject id");
    if (!known.insert(s).second) throw DataError("manifest: duplicate subject '" + s + "'");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& r = samples[i];
    const std::string where = "manifest sample " + std::to_string(i) + " (" + r.tensor + ")";
    if (!known.contains(r.subject)) {
      throw DataError(where + ": subject '" + r.subject + "' is not in the subject list");
    }
    if (r.token_id >= vocab_size) {
      throw DataError(where + ": token_id " + std::to_string(r.token_id) + " >= vocab_size " +
                      std::to_string(vocab_size));
    }
    if (r.token_text.empty()) throw DataError(where + ": empty token_text");
    if (r.tensor.empty()) throw DataError(where + ": empty tensor path");
  }
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  DatasetManifest m;
  try {
    const json j = json::parse(in);
    m.vocab_size = j.at("vocab_size").get<std::size_t>();
    m.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    m.subjects = j.at("subjects").get<std::vector<std::string>>();
    for (const auto& s : j.at("samples")) {
      const auto token = s.at("token_id").get<long long>();
      if (token < 0) throw DataError("negative token_id in " + s.dump());
      m.samples.push_back({s.at("tensor").get<std::string>(), s.at("subject").get<std::string>(),
                           static_cast<std::size_t>(token), s.at("token_text").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
  json samples = json::array();
  for (const auto& r : m.samples) {
    samples.push_back({{"tensor", r.tensor}, {"subject", r.subject}, {"token_id", r.token_id},
                       {"token_text", r.token_text}});
  }
  const json j = {{"vocab_size", m.vocab_size},
                  {"embedding_dim", m.embedding_dim},
                  {"subjects", m.subjects},
                  {"samples", samples}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << j.dump(1) << '\n';
}

std::vector<std::string> read_vocabulary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary " + path.string());
  return parse_vocabulary(in);
}

std::vector<std::string> parse_vocabulary(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return tokens;
}

void write_vocabulary(const fs::path& path, const std::vector<std::string>& tokens) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write vocabulary " + path.string());
  for (const auto& t : tokens) {
    if (t.find('\n') != std::string::npos) throw DataError("vocabulary token contains a newline");
    out << t << '\n';
  }
}

Dataset Dataset::load(const fs::path& manifest_path) {
  Dataset d;
  d.manifest_ = read_manifest(manifest_path);
  d.root_ = manifest_path.parent_path();
  for (std::size_t i = 0; i < d.manifest_.samples.size(); ++i) {
    const auto path = d.tensor_path(i);
    const std::string where = "sample " + std::to_string(i) + " (" + d.manifest_.samples[i].tensor + ")";
    if (!fs::exists(path)) throw DataError(where + ": missing tensor file " + path.string());
    nn::Shape dims;
    try {
      dims = nn::peek_tensor_dims(path);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    if (dims.size() != 2) {
      throw DataError(where + ": expected a [channels, T] tensor, got " + nn::shape_string(dims));
    }
    if (d.channels_ == 0) {
      d.channels_ = dims[0];
    } else if (dims[0] != d.channels_) {
      throw DataError(where + ": has " + std::to_string(dims[0]) + " channels, dataset has " +
                      std::to_string(d.channels_));
    }
  }
  return d;
}

fs::path Dataset::tensor_path(std::size_t index) const {
  const fs::path p = manifest_.samples.at(index).tensor;
  return p.is_absolute() ? p : root_ / p;
}

EegRecording Dataset::load_recording(std::size_t index) const {
  const auto& r = manifest_.samples.at(index);
  EegRecording rec{r.subject, nn::load_tensor(tensor_path(index))};
  if (rec.values.rank() != 2 || (channels_ && rec.values.dim(0) != channels_)) {
    throw DataError("sample " + std::to_string(index) + " (" + r.tensor + "): shape " +
                    nn::shape_string(rec.values.dims()) + " does not match the dataset");
  }
  return rec;
}

std::map<std::string, std::size_t> Dataset::counts_per_subject() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : manifest_.subjects) counts[s] = 0;
  for (const auto& r : manifest_.samples) ++counts[r.subject];
  return counts;
}

}  // namespace cortex::signal
