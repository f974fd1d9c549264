#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cortex/nn/tensor.hpp"

namespace cortex {

/// Token-embedding rows with their vocabulary; row i is token id i.
struct EmbeddingTable {
  nn::Tensor rows;  ///< [V, E]
  std::vector<std::string> vocabulary;

  std::size_t size() const { return rows.empty() ? 0 : rows.dim(0); }
  std::size_t dim() const { return rows.empty() ? 0 : rows.dim(1); }
  /// Throws DataError unless rows is [V, E] with V == vocabulary.size().
  void validate() const;
  /// Id of the token whose text equals `text`, or -1.
  long find(std::string_view text) const;
};

EmbeddingTable load_embedding_table(const std::filesystem::path& tensor_path,
                                    const std::filesystem::path& vocab_path);

struct DecodedToken {
  std::size_t token_id = 0;
  std::string text;
};

/// Nearest row by cosine similarity (ties: lowest id). A zero query falls
/// back to smallest Euclidean distance. Throws ParameterError on an empty
/// table.
DecodedToken surrogate_decode(std::span<const float> prediction, const EmbeddingTable& table);

/// Row norms cached for repeated decoding against one table.
class SurrogateDecoder {
 public:
  explicit SurrogateDecoder(const EmbeddingTable& table);
  DecodedToken decode(std::span<const float> prediction) const;
  const EmbeddingTable& table() const noexcept { return *table_; }

 private:
  const EmbeddingTable* table_;
  std::vector<double> norms_;
};

/// Number of Unicode scalar values in a UTF-8 string. Throws DataError on
/// malformed UTF-8.
std::size_t utf8_length(std::string_view text);

enum class Judgement { true_case, false_case };

/// True case iff `predicted` is exactly one character and equals `truth`.
/// Throws DataError unless `truth` is exactly one character.
Judgement judge_case(std::string_view predicted, std::string_view truth);

inline constexpr const char* kDefaultPrompt =
    "You are a helpful assistant. The user said something to you, but you didn't hear it very clearly. "
    "Don't worry about the semantics of what the user said, just try to repeat it faithfully. "
    "Your answer only needs to contain the user's words, nothing else.";

/// Text prompt placed before the injected embedding.
struct PromptSpec {
  std::string text = kDefaultPrompt;
  std::size_t max_tokens = 8;

  void validate() const;
};

/// What a backend produced for one predicted embedding.
struct Generation {
  std::string text;
  std::vector<long> token_ids;
};

class DecoderBackend {
 public:
  virtual ~DecoderBackend() = default;
  virtual std::string name() const = 0;
  /// Embedding width the backend accepts.
  virtual std::size_t embedding_dim() const = 0;
  virtual Generation generate(std::span<const float> embedding, const PromptSpec& prompt) = 0;
};

/// Nearest-embedding stand-in for a frozen language model. Ignores the
/// prompt.
class SurrogateBackend final : public DecoderBackend {
 public:
  explicit SurrogateBackend(EmbeddingTable table);
  std::string name() const override { return "surrogate"; }
  std::size_t embedding_dim() const override { return table_.dim(); }
  Generation generate(std::span<const float> embedding, const PromptSpec& prompt) override;
  const EmbeddingTable& table() const noexcept { return table_; }

 private:
  EmbeddingTable table_;
  SurrogateDecoder decoder_;
};

}  // namespace cortex
