#include "cortex/decode.hpp"

#include <cmath>
#include <limits>

#include "cortex/errors.hpp"
#include "cortex/nn/tensor_io.hpp"
#include "cortex/signal/dataset.hpp"

namespace cortex {

void EmbeddingTable::validate() const {
  if (rows.rank() != 2) throw DataError("embedding table must be [V, E], got " + nn::shape_string(rows.dims()));
  if (rows.dim(0) != vocabulary.size()) {
    throw DataError("embedding table has " + std::to_string(rows.dim(0)) + " rows but the vocabulary lists " +
                    std::to_string(vocabulary.size()) + " tokens");
  }
}

long EmbeddingTable::find(std::string_view text) const {
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (vocabulary[i] == text) return static_cast<long>(i);
  }
  return -1;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& tensor_path, const std::filesystem::path& vocab_path) {
  EmbeddingTable t{nn::load_tensor(tensor_path), signal::read_vocabulary(vocab_path)};
  t.validate();
  return t;
}

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

}  // namespace

SurrogateDecoder::SurrogateDecoder(const EmbeddingTable& table) : table_(&table) {
  if (table.size() == 0) throw ParameterError("surrogate decode: empty embedding table");
  table.validate();
  norms_.reserve(table.size());
  for (std::size_t v = 0; v < table.size(); ++v) norms_.push_back(std::sqrt(dot(table.rows.row(v), table.rows.row(v))));
}

DecodedToken SurrogateDecoder::decode(std::span<const float> e) const {
  const auto& rows = table_->rows;
  if (e.size() != table_->dim()) {
    throw ShapeError("surrogate decode: prediction has " + std::to_string(e.size()) + " entries, table width is " +
                     std::to_string(table_->dim()));
  }
  const double qn = std::sqrt(dot(e, e));
  std::size_t best = 0;
  if (qn == 0.0) {
    // Distance from the origin is the row norm.
    for (std::size_t v = 1; v < norms_.size(); ++v) {
      if (norms_[v] < norms_[best]) best = v;
    }
  } else {
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < norms_.size(); ++v) {
      const double score = norms_[v] == 0.0 ? 0.0 : dot(e, rows.row(v)) / (qn * norms_[v]);
      if (score > best_score) {
        best_score = score;
        best = v;
      }
    }
  }
  return {best, table_->vocabulary[best]};
}

DecodedToken surrogate_decode(std::span<const float> prediction, const EmbeddingTable& table) {
  return SurrogateDecoder(table).decode(prediction);
}

std::size_t utf8_length(std::string_view s) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size();) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t width = 0;
    if (lead < 0x80) {
      width = 1;
    } else if ((lead >> 5) == 0x6) {
      width = 2;
    } else if ((lead >> 4) == 0xE) {
      width = 3;
    } else if ((lead >> 3) == 0x1E) {
      width = 4;
    } else {
      throw DataError("malformed UTF-8 at byte " + std::to_string(i));
    }
    if (i + width > s.size()) throw DataError("truncated UTF-8 sequence at byte " + std::to_string(i));
    for (std::size_t k = 1; k < width; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) {
        throw DataError("malformed UTF-8 at byte " + std::to_string(i + k));
      }
    }
    i += width;
    ++count;
  }
  return count;
}

Judgement judge_case(std::string_view predicted, std::string_view truth) {
  if (truth.empty()) throw DataError("judge: ground truth is empty");
  if (utf8_length(truth) != 1) throw DataError("judge: ground truth must be exactly one character");
  std::size_t n = 0;
  try {
    n = utf8_length(predicted);
  } catch (const DataError&) {
    return Judgement::false_case;
  }
  return n == 1 && predicted == truth ? Judgement::true_case : Judgement::false_case;
}

void PromptSpec::validate() const {
  if (text.empty()) throw ParameterError("prompt text must not be empty");
  if (max_tokens == 0) throw ParameterError("max_tokens must be positive");
}

SurrogateBackend::SurrogateBackend(EmbeddingTable table) : table_(std::move(table)), decoder_(table_) {}

Generation SurrogateBackend::generate(std::span<const float> embedding, const PromptSpec&) {
  const DecodedToken d = decoder_.decode(embedding);
  return {d.text, {static_cast<long>(d.token_id)}};
}

}  // namespace cortex
