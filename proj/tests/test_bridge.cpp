#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "cortex/bridge.hpp"
#include "cortex/errors.hpp"
#include "cortex/nn/tensor_io.hpp"
#include "cortex/signal/synth.hpp"
#include "support.hpp"

using namespace cortex;
using namespace testing_support;
using nlohmann::json;

namespace {

constexpr std::size_t kVocab = 50;

EmbeddingTable identity_table() {
  EmbeddingTable t;
  t.rows = nn::Tensor({kVocab, kVocab});
  for (std::size_t v = 0; v < kVocab; ++v) {
    t.rows.at(v, v) = 1.0f;
    t.vocabulary.push_back(signal::synthetic_token_text(v));
  }
  return t;
}

std::string vocab_text(const EmbeddingTable& t) {
  std::string out;
  for (const auto& w : t.vocabulary) out += w + "\n";
  return out;
}

enum class TableMode { octet_stream, multipart, missing_vocab, garbage };

// In-process generation service answering with nearest-row retrieval.
class StubServer {
 public:
  explicit StubServer(TableMode mode) : table_(identity_table()), decoder_(table_) {
    server_.Get("/v1/embedding-table", [this, mode](const httplib::Request&, httplib::Response& res) {
      const std::string bytes = nn::encode_tensor(table_.rows);
      switch (mode) {
        case TableMode::octet_stream:
        case TableMode::missing_vocab:
          res.set_content(bytes, "application/octet-stream");
          break;
        case TableMode::multipart: {
          const std::string b = "cortexboundary";
          std::string body = "--" + b + "\r\nContent-Disposition: form-data; name=\"vocab\"\r\n"
                             "Content-Type: text/plain\r\n\r\n" + vocab_text(table_) +
                             "\r\n--" + b + "\r\nContent-Disposition: form-data; name=\"table\"\r\n"
                             "Content-Type: application/octet-stream\r\n\r\n" + bytes + "\r\n--" + b + "--\r\n";
          res.set_content(body, "multipart/mixed; boundary=" + b);
          break;
        }
        case TableMode::garbage:
          res.set_content("not a tensor", "application/octet-stream");
          break;
      }
    });
    server_.Get("/v1/embedding-table/vocab", [this, mode](const httplib::Request&, httplib::Response& res) {
      if (mode == TableMode::missing_vocab) {
        res.status = 404;
        return;
      }
      res.set_content(vocab_text(table_), "text/plain");
    });
    server_.Get("/v1/model-hash", [mode](const httplib::Request&, httplib::Response& res) {
      if (mode == TableMode::multipart) {
        res.set_content(R"({"hash":"abc123"})", "application/json");
      } else {
        res.set_content("abc123\n", "text/plain");
      }
    });
    server_.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
      const json j = json::parse(req.body, nullptr, false);
      if (j.is_discarded() || !j.contains("embedding")) {
        res.status = 400;
        return;
      }
      const auto emb = j["embedding"].get<std::vector<float>>();
      if (emb.size() == 3) {
        res.set_content(R"({"text": 5})", "application/json");
        return;
      }
      {
        std::lock_guard lock(mutex_);
        last_prompt_ = j.value("prompt", "");
        last_max_tokens_ = j.value("max_tokens", 0);
      }
      const DecodedToken d = decoder_.decode(emb);
      res.set_content(json{{"text", d.text}, {"token_ids", {d.token_id}}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  const EmbeddingTable& table() const { return table_; }
  std::string last_prompt() {
    std::lock_guard lock(mutex_);
    return last_prompt_;
  }
  std::size_t last_max_tokens() {
    std::lock_guard lock(mutex_);
    return last_max_tokens_;
  }

 private:
  EmbeddingTable table_;
  SurrogateDecoder decoder_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mutex_;
  std::string last_prompt_;
  std::size_t last_max_tokens_ = 0;
};

}  // namespace

TEST(Bridge, EmbeddingTableOctetStreamWithVocabEndpoint) {
  StubServer stub(TableMode::octet_stream);
  BridgeClient client(stub.url());
  const EmbeddingTable t = client.embedding_table();
  ASSERT_EQ(t.size(), kVocab);
  EXPECT_EQ(t.dim(), kVocab);
  for (std::size_t e = 0; e < kVocab; ++e) EXPECT_EQ(t.rows.at(3, e), e == 3 ? 1.0f : 0.0f);
  EXPECT_EQ(t.vocabulary, stub.table().vocabulary);
}

TEST(Bridge, EmbeddingTableMultipart) {
  StubServer stub(TableMode::multipart);
  BridgeClient client(stub.url());
  const EmbeddingTable t = client.embedding_table();
  EXPECT_EQ(t.rows, stub.table().rows);
  EXPECT_EQ(t.vocabulary, stub.table().vocabulary);
}

TEST(Bridge, ModelHashIsStableInBothEncodings) {
  for (TableMode mode : {TableMode::octet_stream, TableMode::multipart}) {
    StubServer stub(mode);
    BridgeClient client(stub.url());
    const std::string h = client.model_hash();
    EXPECT_EQ(h, "abc123");
    EXPECT_EQ(client.model_hash(), h);
  }
}

TEST(Bridge, GenerateAgreesWithSurrogate) {
  StubServer stub(TableMode::octet_stream);
  BridgeBackend bridge(stub.url(), kVocab);
  SurrogateBackend local(identity_table());
  std::mt19937_64 g(1);
  PromptSpec prompt;
  prompt.max_tokens = 3;
  for (int probe = 0; probe < 100; ++probe) {
    const nn::Tensor q = random_tensor64({kVocab}, g).cast<float>();
    const auto remote = bridge.generate(q.data(), prompt);
    const auto expected = local.generate(q.data(), prompt);
    EXPECT_EQ(remote.text, expected.text);
    EXPECT_EQ(remote.token_ids, expected.token_ids);
  }
  EXPECT_EQ(stub.last_prompt(), kDefaultPrompt);
  EXPECT_EQ(stub.last_max_tokens(), 3u);
}

TEST(Bridge, FailuresAreBackendErrors) {
  EXPECT_THROW(BridgeClient("ftp://x"), BackendError);
  {
    StubServer missing(TableMode::missing_vocab);
    BridgeClient client(missing.url());
    EXPECT_THROW(client.embedding_table(), BackendError);
    const std::vector<float> bad(3, 0.0f);
    EXPECT_THROW(client.generate("p", bad, 1), BackendError);
  }
  {
    StubServer garbage(TableMode::garbage);
    BridgeClient client(garbage.url());
    EXPECT_THROW(client.embedding_table(), BackendError);
  }
  std::string dead_url;
  {
    StubServer gone(TableMode::octet_stream);
    dead_url = gone.url();
  }
  BridgeClient dead(dead_url, 2);
  EXPECT_THROW(dead.model_hash(), BackendError);
  const std::vector<float> q(kVocab, 1.0f);
  EXPECT_THROW(dead.generate("p", q, 1), BackendError);
}
