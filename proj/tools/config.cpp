#include <fstream>
#include <json.hpp>
#include <set>

#include "cli.hpp"
#include "cortex/errors.hpp"

namespace cortex::cli {
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ParameterError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ParameterError("config: unknown key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

void read_train(const json& j, TrainOptions& t) {
  read(j, "epochs", t.epochs);
  read(j, "batch_size", t.batch_size);
  read(j, "learning_rate", t.optimizer.learning_rate);
  if (j.contains("optimizer")) {
    const auto kind = j.at("optimizer").get<std::string>();
    if (kind == "adam") {
      t.optimizer.kind = nn::OptimizerKind::adam;
    } else if (kind == "sgd") {
      t.optimizer.kind = nn::OptimizerKind::sgd;
    } else {
      throw ParameterError("config: optimizer must be 'adam' or 'sgd', got '" + kind + "'");
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (precision != "float32") {
    throw ParameterError("precision '" + precision + "' is not available for pipeline commands (float32 only)");
  }
  if (backend != "surrogate" && !bridge()) {
    throw ParameterError("backend must be 'surrogate' or 'bridge:URL', got '" + backend + "'");
  }
  if (bridge() && bridge_url().empty()) throw ParameterError("bridge backend needs a URL");
  for (const auto* t : {&autoencoder, &alignment}) {
    if (t->epochs == 0 || t->batch_size == 0) throw ParameterError("epochs and batch size must be positive");
    if (!(t->optimizer.learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
  }
  if (latent_dim == 0) throw ParameterError("latent_dim must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ParameterError("dropout must lie in [0, 1)");
  prompt.validate();
  if (ablate.linear_bins == 0) throw ParameterError("ablate.linear_bins must be positive");
}

RunConfig load_config(const std::filesystem::path& path, RunConfig c) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParameterError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    check_keys(j, "config", {"out", "data", "seed", "backend", "embedding_table", "vocab", "precision", "gen", "split",
                             "autoencoder", "alignment", "eval", "ablate"});
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("data")) c.data = j.at("data").get<std::string>();
    read(j, "seed", c.seed);
    read(j, "backend", c.backend);
    if (j.contains("embedding_table")) c.embedding_table = j.at("embedding_table").get<std::string>();
    if (j.contains("vocab")) c.vocab = j.at("vocab").get<std::string>();
    read(j, "precision", c.precision);
    if (j.contains("gen")) {
      const json& g = j.at("gen");
      check_keys(g, "gen", {"subjects", "samples_per_subject", "vocab_size", "channels", "t_min", "t_max", "alpha",
                            "sigma", "embedding_dim"});
      read(g, "subjects", c.gen.subjects);
      read(g, "samples_per_subject", c.gen.samples_per_subject);
      read(g, "vocab_size", c.gen.vocab_size);
      read(g, "channels", c.gen.channels);
      read(g, "t_min", c.gen.t_min);
      read(g, "t_max", c.gen.t_max);
      read(g, "alpha", c.gen.alpha);
      read(g, "sigma", c.gen.sigma);
      read(g, "embedding_dim", c.gen.embedding_dim);
    }
    if (j.contains("split")) {
      const json& s = j.at("split");
      check_keys(s, "split", {"mask", "masked_subjects"});
      read(s, "mask", c.mask);
      read(s, "masked_subjects", c.masked_subjects);
    }
    if (j.contains("autoencoder")) {
      const json& a = j.at("autoencoder");
      check_keys(a, "autoencoder", {"latent_dim", "epochs", "batch_size", "learning_rate", "optimizer"});
      read(a, "latent_dim", c.latent_dim);
      read_train(a, c.autoencoder);
    }
    if (j.contains("alignment")) {
      const json& a = j.at("alignment");
      check_keys(a, "alignment", {"epochs", "batch_size", "learning_rate", "optimizer", "dropout"});
      read(a, "dropout", c.dropout);
      read_train(a, c.alignment);
    }
    if (j.contains("eval")) {
      const json& e = j.at("eval");
      check_keys(e, "eval", {"prompt", "max_tokens"});
      read(e, "prompt", c.prompt.text);
      read(e, "max_tokens", c.prompt.max_tokens);
    }
    if (j.contains("ablate")) {
      const json& a = j.at("ablate");
      check_keys(a, "ablate", {"repetitions", "train_subjects", "test_subjects", "knn_k", "tree_depth", "mlp_epochs",
                               "finetune_epochs", "head_loss", "linear_bins"});
      read(a, "repetitions", c.ablate.repetitions);
      read(a, "train_subjects", c.ablate.train_subjects);
      read(a, "test_subjects", c.ablate.test_subjects);
      read(a, "knn_k", c.ablate.knn_k);
      read(a, "tree_depth", c.ablate.tree_depth);
      read(a, "mlp_epochs", c.ablate.mlp_epochs);
      read(a, "finetune_epochs", c.ablate.finetune_epochs);
      read(a, "linear_bins", c.ablate.linear_bins);
      if (a.contains("head_loss")) {
        const auto loss = a.at("head_loss").get<std::string>();
        if (loss == "mse") {
          c.ablate.head_loss = ablations::HeadLoss::mse;
        } else if (loss == "cross_entropy") {
          c.ablate.head_loss = ablations::HeadLoss::cross_entropy;
        } else {
          throw ParameterError("config: head_loss must be 'mse' or 'cross_entropy'");
        }
      }
    }
  } catch (const json::exception& e) {
    throw ParameterError("config " + path.string() + ": " + e.what());
  }
  return c;
}

}  // namespace cortex::cli
