#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>

#include "cortex/decode.hpp"

namespace cortex {

// HTTP client for an external generation service:
//   GET  /v1/embedding-table  EEGT table, either as a multipart body with a
//                             "table" part and a "vocab" part, or as an
//                             octet-stream body with the vocabulary served at
//                             /v1/embedding-table/vocab
//   GET  /v1/model-hash       opaque weights hash (text or {"hash": ...})
//   POST /v1/generate         {"prompt","embedding","max_tokens"} ->
//                             {"text","token_ids"}
// Every transport or protocol failure raises BackendError.

class BridgeClient {
 public:
  /// `url` is "http://host:port".
  explicit BridgeClient(const std::string& url, int timeout_seconds = 30);
  ~BridgeClient();
  BridgeClient(BridgeClient&&) noexcept;
  BridgeClient& operator=(BridgeClient&&) noexcept;

  const std::string& url() const noexcept { return url_; }
  EmbeddingTable embedding_table();
  std::string model_hash();
  Generation generate(const std::string& prompt, std::span<const float> embedding, std::size_t max_tokens);

 private:
  struct Impl;
  std::string url_;
  std::unique_ptr<Impl> impl_;
};

class BridgeBackend final : public DecoderBackend {
 public:
  BridgeBackend(const std::string& url, std::size_t embedding_dim);
  std::string name() const override { return "bridge"; }
  std::size_t embedding_dim() const override { return embedding_dim_; }
  Generation generate(std::span<const float> embedding, const PromptSpec& prompt) override;
  BridgeClient& client() noexcept { return client_; }

 private:
  BridgeClient client_;
  std::size_t embedding_dim_;
};

}  // namespace cortex
