#include "cortex/bridge.hpp"

#include <httplib.h>

#include <json.hpp>
#include <sstream>

#include "cortex/errors.hpp"
#include "cortex/nn/tensor_io.hpp"
#include "cortex/signal/dataset.hpp"

namespace cortex {
using nlohmann::json;

struct BridgeClient::Impl {
  explicit Impl(const std::string& url) : client(url) {}
  httplib::Client client;
};

namespace {

std::string describe(const httplib::Result& r) {
  if (!r) return httplib::to_string(r.error());
  return "HTTP " + std::to_string(r->status) + (r->body.empty() ? "" : ": " + r->body.substr(0, 200));
}

struct Part {
  std::string name;
  std::string content_type;
  std::string body;
};

std::string header_param(const std::string& header, const std::string& key) {
  const auto pos = header.find(key + "=");
  if (pos == std::string::npos) return {};
  std::size_t start = pos + key.size() + 1;
  if (start < header.size() && header[start] == '"') {
    const auto end = header.find('"', start + 1);
    return header.substr(start + 1, end == std::string::npos ? std::string::npos : end - start - 1);
  }
  const auto end = header.find_first_of("; \r", start);
  return header.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<Part> split_multipart(const std::string& body, const std::string& boundary) {
  const std::string delim = "--" + boundary;
  std::vector<Part> parts;
  std::size_t pos = body.find(delim);
  while (pos != std::string::npos) {
    pos += delim.size();
    if (body.compare(pos, 2, "--") == 0) break;
    if (body.compare(pos, 2, "\r\n") == 0) pos += 2;
    const auto head_end = body.find("\r\n\r\n", pos);
    if (head_end == std::string::npos) throw BackendError("multipart part without headers");
    const auto next = body.find("\r\n" + delim, head_end + 4);
    if (next == std::string::npos) throw BackendError("unterminated multipart body");
    Part p;
    std::istringstream headers(body.substr(pos, head_end - pos));
    std::string line;
    while (std::getline(headers, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = lower(line.substr(0, colon));
      const std::string value = line.substr(colon + 1);
      if (key == "content-disposition") p.name = header_param(value, "name");
      if (key == "content-type") p.content_type = lower(value);
    }
    p.body = body.substr(head_end + 4, next - head_end - 4);
    parts.push_back(std::move(p));
    pos = next + 2;
  }
  return parts;
}

std::vector<std::string> vocab_from(const std::string& text) {
  std::istringstream in(text);
  return signal::parse_vocabulary(in);
}

}  // namespace

BridgeClient::BridgeClient(const std::string& url, int timeout_seconds) : url_(url) {
  if (url.rfind("http://", 0) != 0) throw BackendError("bridge url must start with http://, got '" + url + "'");
  impl_ = std::make_unique<Impl>(url);
  impl_->client.set_connection_timeout(timeout_seconds, 0);
  impl_->client.set_read_timeout(timeout_seconds, 0);
  impl_->client.set_write_timeout(timeout_seconds, 0);
  if (!impl_->client.is_valid()) throw BackendError("invalid bridge url '" + url + "'");
}

BridgeClient::~BridgeClient() = default;
BridgeClient::BridgeClient(BridgeClient&&) noexcept = default;
BridgeClient& BridgeClient::operator=(BridgeClient&&) noexcept = default;

EmbeddingTable BridgeClient::embedding_table() {
  auto r = impl_->client.Get("/v1/embedding-table");
  if (!r || r->status != 200) throw BackendError("GET /v1/embedding-table failed: " + describe(r));
  const std::string type = r->get_header_value("Content-Type");
  EmbeddingTable table;
  try {
    if (lower(type).rfind("multipart/", 0) == 0) {
      const std::string boundary = header_param(type, "boundary");
      if (boundary.empty()) throw BackendError("multipart response without boundary");
      bool have_table = false;
      bool have_vocab = false;
      for (const auto& p : split_multipart(r->body, boundary)) {
        if (p.name == "table" || (p.name.empty() && p.content_type.find("octet-stream") != std::string::npos)) {
          table.rows = nn::decode_tensor(p.body);
          have_table = true;
        } else if (p.name == "vocab" || (p.name.empty() && p.content_type.find("text/") != std::string::npos)) {
          table.vocabulary = vocab_from(p.body);
          have_vocab = true;
        }
      }
      if (!have_table || !have_vocab) throw BackendError("embedding-table response lacks a table or vocab part");
    } else {
      table.rows = nn::decode_tensor(r->body);
      auto v = impl_->client.Get("/v1/embedding-table/vocab");
      if (!v || v->status != 200) throw BackendError("GET /v1/embedding-table/vocab failed: " + describe(v));
      table.vocabulary = vocab_from(v->body);
    }
    table.validate();
  } catch (const DataError& e) {
    throw BackendError(std::string("malformed embedding table from bridge: ") + e.what());
  }
  return table;
}

std::string BridgeClient::model_hash() {
  auto r = impl_->client.Get("/v1/model-hash");
  if (!r || r->status != 200) throw BackendError("GET /v1/model-hash failed: " + describe(r));
  const json j = json::parse(r->body, nullptr, false);
  if (j.is_object() && j.contains("hash") && j["hash"].is_string()) return j["hash"].get<std::string>();
  if (j.is_string()) return j.get<std::string>();
  std::string body = r->body;
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  return body;
}

Generation BridgeClient::generate(const std::string& prompt, std::span<const float> embedding, std::size_t max_tokens) {
  const json request = {
      {"prompt", prompt}, {"embedding", std::vector<float>(embedding.begin(), embedding.end())}, {"max_tokens", max_tokens}};
  auto r = impl_->client.Post("/v1/generate", request.dump(), "application/json");
  if (!r || r->status != 200) throw BackendError("POST /v1/generate failed: " + describe(r));
  try {
    const json j = json::parse(r->body);
    Generation g;
    g.text = j.at("text").get<std::string>();
    g.token_ids = j.at("token_ids").get<std::vector<long>>();
    return g;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed /v1/generate response: ") + e.what());
  }
}

BridgeBackend::BridgeBackend(const std::string& url, std::size_t embedding_dim)
    : client_(url), embedding_dim_(embedding_dim) {}

Generation BridgeBackend::generate(std::span<const float> embedding, const PromptSpec& prompt) {
  return client_.generate(prompt.text, embedding, prompt.max_tokens);
}

}  // namespace cortex
