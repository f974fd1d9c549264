#include "cortex/signal/synth.hpp"

#include <cmath>
#include <numbers>

#include "cortex/errors.hpp"
#include "cortex/nn/tensor_io.hpp"

namespace cortex::signal {
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kComponents = 3;        // sinusoids per prototype / confound pattern
constexpr std::size_t kConfoundFactors = 4;   // shared confound patterns B_k
constexpr double kConfoundScale = 3.0;        // A
constexpr double kTrialJitter = 0.5;          // std of c around a_s
constexpr double kMinFrequency = 1.0;         // cycles per recording
constexpr double kMaxFrequency = 8.0;

constexpr std::uint64_t kTokenStream = 1;
constexpr std::uint64_t kConfoundStream = 2;
constexpr std::uint64_t kSubjectStream = 3;
constexpr std::uint64_t kStimulusStream = 4;
constexpr std::uint64_t kEmbeddingStream = 5;
constexpr std::uint64_t kSampleStreamBase = 1ULL << 32;

void check_config(const SynthConfig& c) {
  if (c.vocab_size < 2) throw ParameterError("synthetic vocab_size must be >= 2");
  if (c.subjects < 2) throw ParameterError("synthetic subject count must be >= 2");
  if (c.channels < 1) throw ParameterError("synthetic channel count must be >= 1");
  if (c.t_min < 1 || c.t_max < c.t_min) throw ParameterError("synthetic length range must satisfy 1 <= t_min <= t_max");
  if (c.embedding_dim < 1) throw ParameterError("synthetic embedding_dim must be >= 1");
  if (!(c.alpha >= 0.0) || !(c.sigma >= 0.0)) throw ParameterError("alpha and sigma must be non-negative");
}

std::string subject_name(std::size_t s) {
  std::string n = std::to_string(s + 1);
  if (n.size() < 2) n.insert(0, "0");
  return "S" + n;
}

}  // namespace

std::string synthetic_token_text(std::size_t id) {
  const auto cp = static_cast<std::uint32_t>(0x4E00 + id);
  if (cp > 0x9FFF) throw ParameterError("synthetic vocabulary is limited to the CJK unified block");
  std::string out;
  out += static_cast<char>(0xE0 | (cp >> 12));
  out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
  out += static_cast<char>(0x80 | (cp & 0x3F));
  return out;
}

SyntheticGenerator::SyntheticGenerator(const SynthConfig& config, const nn::RngStream& rng)
    : config_(config), seed_(rng.seed()) {
  check_config(config);
  const std::size_t C = config.channels;
  const std::size_t V = config.vocab_size;
  const double loading_std = std::sqrt(2.0 / kComponents);  // unit per-element variance

  auto make_waveform = [&](nn::RngStream& r) {
    Waveform w;
    w.loadings.resize(C * kComponents);
    for (auto& a : w.loadings) a = loading_std * r.normal();
    for (std::size_t k = 0; k < kComponents; ++k) {
      w.frequency.push_back(r.uniform(kMinFrequency, kMaxFrequency));
      w.phase.push_back(r.uniform(0.0, 2.0 * std::numbers::pi));
    }
    return w;
  };

  nn::RngStream token_rng = rng.fork(kTokenStream);
  for (std::size_t v = 0; v < V; ++v) prototypes_.push_back(make_waveform(token_rng));
  nn::RngStream confound_rng = rng.fork(kConfoundStream);
  for (std::size_t k = 0; k < kConfoundFactors; ++k) confounds_.push_back(make_waveform(confound_rng));

  nn::RngStream subject_rng = rng.fork(kSubjectStream);
  const double mix_std = 1.0 / std::sqrt(static_cast<double>(C));
  for (std::size_t s = 0; s < config.subjects; ++s) {
    std::vector<double> mixing(C * C);
    for (auto& m : mixing) m = mix_std * subject_rng.normal();
    std::vector<double> mean(kConfoundFactors);
    for (auto& a : mean) a = subject_rng.normal();
    confound_mean_.push_back(std::move(mean));
    for (std::size_t v = 0; v < V; ++v) {
      const auto& L = prototypes_[v].loadings;
      std::vector<double> mixed(C * kComponents, 0.0);
      for (std::size_t i = 0; i < C; ++i) {
        for (std::size_t j = 0; j < C; ++j) {
          const double m = mixing[i * C + j];
          for (std::size_t r = 0; r < kComponents; ++r) mixed[i * kComponents + r] += m * L[j * kComponents + r];
        }
      }
      mixed_loadings_.push_back(std::move(mixed));
    }
  }

  // Balanced stimulus sequence shared by every subject.
  nn::RngStream stim_rng = rng.fork(kStimulusStream);
  const std::size_t N = config.samples_per_subject;
  item_token_.resize(N);
  for (std::size_t i = 0; i < N; ++i) item_token_[i] = i % V;
  stim_rng.shuffle(item_token_.begin(), item_token_.end());
  item_length_.resize(N);
  for (auto& T : item_length_) T = config.t_min + stim_rng.below(config.t_max - config.t_min + 1);

  for (std::size_t v = 0; v < V; ++v) vocabulary_.push_back(synthetic_token_text(v));

  nn::RngStream emb_rng = rng.fork(kEmbeddingStream);
  embedding_table_ = nn::Tensor({V, config.embedding_dim});
  for (auto& e : embedding_table_.data()) e = static_cast<float>(emb_rng.normal());

  manifest_.vocab_size = V;
  manifest_.embedding_dim = config.embedding_dim;
  for (std::size_t s = 0; s < config.subjects; ++s) manifest_.subjects.push_back(subject_name(s));
  for (std::size_t s = 0; s < config.subjects; ++s) {
    for (std::size_t i = 0; i < N; ++i) {
      std::string idx = std::to_string(i);
      idx.insert(0, idx.size() < 4 ? 4 - idx.size() : 0, '0');
      const std::size_t v = item_token_[i];
      manifest_.samples.push_back(
          {"recordings/" + manifest_.subjects[s] + "_" + idx + ".eegt", manifest_.subjects[s], v, vocabulary_[v]});
    }
  }
}

void SyntheticGenerator::temporal_basis(const Waveform& w, std::size_t T, std::vector<double>& out) const {
  out.resize(kComponents * T);
  for (std::size_t r = 0; r < kComponents; ++r) {
    for (std::size_t t = 0; t < T; ++t) {
      const double u = (static_cast<double>(t) + 0.5) / static_cast<double>(T);
      out[r * T + t] = std::sin(2.0 * std::numbers::pi * w.frequency[r] * u + w.phase[r]);
    }
  }
}

EegRecording SyntheticGenerator::generate(std::size_t index) const {
  if (index >= size()) throw ParameterError("synthetic sample index out of range");
  const std::size_t N = config_.samples_per_subject;
  const std::size_t s = index / N;
  const std::size_t item = index % N;
  const std::size_t v = item_token_[item];
  const std::size_t T = item_length_[item];
  const std::size_t C = config_.channels;
  const double alpha = config_.alpha;

  nn::RngStream rng = nn::RngStream(seed_).fork(kSampleStreamBase + index);
  std::vector<double> coeff(kConfoundFactors);
  for (std::size_t k = 0; k < kConfoundFactors; ++k) {
    coeff[k] = kConfoundScale * (confound_mean_[s][k] + kTrialJitter * rng.normal());
  }

  std::vector<double> token_basis;
  temporal_basis(prototypes_[v], T, token_basis);
  std::vector<std::vector<double>> confound_basis(kConfoundFactors);
  for (std::size_t k = 0; k < kConfoundFactors; ++k) temporal_basis(confounds_[k], T, confound_basis[k]);

  const auto& proto = prototypes_[v].loadings;
  const auto& mixed = mixed_loadings_[s * config_.vocab_size + v];
  nn::Tensor values({C, T});
  std::vector<double> clean(T);
  std::vector<double> nuisance(T);
  for (std::size_t c = 0; c < C; ++c) {
    std::fill(clean.begin(), clean.end(), 0.0);
    std::fill(nuisance.begin(), nuisance.end(), 0.0);
    for (std::size_t r = 0; r < kComponents; ++r) {
      const double a = proto[c * kComponents + r];
      const double m = mixed[c * kComponents + r];
      const double* basis = token_basis.data() + r * T;
      for (std::size_t t = 0; t < T; ++t) {
        clean[t] += a * basis[t];
        nuisance[t] += m * basis[t];
      }
    }
    for (std::size_t k = 0; k < kConfoundFactors; ++k) {
      const auto& L = confounds_[k].loadings;
      for (std::size_t r = 0; r < kComponents; ++r) {
        const double w = coeff[k] * L[c * kComponents + r];
        const double* basis = confound_basis[k].data() + r * T;
        for (std::size_t t = 0; t < T; ++t) nuisance[t] += w * basis[t];
      }
    }
    float* row = values.ptr() + c * T;
    for (std::size_t t = 0; t < T; ++t) {
      double x = clean[t] + alpha * nuisance[t];
      if (config_.sigma > 0.0) x += config_.sigma * rng.normal();
      row[t] = static_cast<float>(x);
    }
  }
  return {manifest_.samples[index].subject, std::move(values)};
}

SynthDataset synth_generate(const SynthConfig& config, nn::RngStream& rng) {
  const SyntheticGenerator gen(config, rng);
  SynthDataset out{gen.manifest(), {}, gen.vocabulary(), gen.embedding_table()};
  out.recordings.reserve(gen.size());
  for (std::size_t i = 0; i < gen.size(); ++i) out.recordings.push_back(gen.generate(i));
  return out;
}

void write_synthetic_dataset(const fs::path& dir, const SyntheticGenerator& gen) {
  fs::create_directories(dir / "recordings");
  for (std::size_t i = 0; i < gen.size(); ++i) {
    nn::save_tensor(dir / gen.manifest().samples[i].tensor, gen.generate(i).values);
  }
  write_vocabulary(dir / "vocab.txt", gen.vocabulary());
  nn::save_tensor(dir / "embeddings.eegt", gen.embedding_table());
  write_manifest(dir / "manifest.json", gen.manifest());
}

}  // namespace cortex::signal
