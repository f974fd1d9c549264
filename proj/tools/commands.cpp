#include <CLI11.hpp>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "cli.hpp"
#include "cortex/ablations/knn.hpp"
#include "cortex/ablations/mlp.hpp"
#include "cortex/ablations/pca.hpp"
#include "cortex/ablations/protocol.hpp"
#include "cortex/ablations/tree.hpp"
#include "cortex/bridge.hpp"
#include "cortex/checkpoint.hpp"
#include "cortex/errors.hpp"
#include "cortex/evaluate.hpp"
#include "cortex/nn/tensor_io.hpp"
#include "cortex/signal/pooling.hpp"

namespace cortex::cli {
namespace fs = std::filesystem;

namespace {

// Stream tags for RngStream::fork; one per consumer so that stages never
// share random draws.
enum : std::uint64_t {
  kTagGenerate = 0x67656e,
  kTagSplit = 0x73706c,
  kTagAutoencoder = 0x6165,
  kTagAlignment = 0x616c,
  kTagBaseline = 0x626173,
  kTagAblate = 0x61626c,
};

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::shared_ptr<spdlog::logger> log;
};

std::shared_ptr<spdlog::logger> make_logger(const fs::path& out_dir, std::ostream& err) {
  auto console = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  console->set_pattern("[%l] %v");
  std::vector<spdlog::sink_ptr> sinks{console};
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!ec) {
    auto file = std::make_shared<spdlog::sinks::basic_file_sink_mt>((out_dir / "run.log").string());
    file->set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%l] %v");
    sinks.push_back(file);
  }
  auto log = std::make_shared<spdlog::logger>("cortex-align", sinks.begin(), sinks.end());
  auto level = spdlog::level::info;
  if (const char* env = std::getenv("CORTEX_ALIGN_LOG")) {
    const std::string name = env;
    level = spdlog::level::from_str(name);
    if (level == spdlog::level::off && name != "off") {
      level = spdlog::level::info;
      log->warn("ignoring unknown CORTEX_ALIGN_LOG level '{}'", name);
    }
  }
  log->set_level(level);
  log->flush_on(spdlog::level::trace);
  return log;
}

void write_loss_csv(const fs::path& path, const std::vector<double>& losses) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i + 1, losses[i]);
    out << buf;
  }
}

struct LoadedData {
  signal::Dataset dataset;
  signal::PooledSet pooled;
};

LoadedData load_data(const Context& ctx, std::size_t target_length = signal::kPooledLength) {
  const fs::path manifest = ctx.cfg.data_dir() / "manifest.json";
  ctx.log->info("loading {}", manifest.string());
  LoadedData d{signal::Dataset::load(manifest), {}};
  d.pooled = signal::pool_dataset(d.dataset, target_length);
  ctx.log->info("pooled {} samples from {} subjects", d.pooled.size(), d.dataset.manifest().subjects.size());
  return d;
}

Autoencoder<float> require_ae(const Context& ctx, CheckpointInfo* info) {
  if (!checkpoint_exists(ctx.cfg.ae_dir())) {
    throw StateError("missing prerequisite stage 'ae': no checkpoint at " + ctx.cfg.ae_dir().string() +
                     " (run train-ae first)");
  }
  return load_autoencoder(ctx.cfg.ae_dir(), info);
}

AlignmentModel<float> require_align(const Context& ctx, CheckpointInfo* info) {
  if (!checkpoint_exists(ctx.cfg.align_dir())) {
    throw StateError("missing prerequisite stage 'align': no checkpoint at " + ctx.cfg.align_dir().string() +
                     " (run train-align first)");
  }
  return load_alignment(ctx.cfg.align_dir(), info);
}

EmbeddingTable resolve_table(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.bridge() && !cfg.embedding_table) {
    ctx.log->info("fetching embedding table from {}", cfg.bridge_url());
    return BridgeClient(cfg.bridge_url()).embedding_table();
  }
  if (!fs::exists(cfg.table_path())) {
    throw ParameterError("embedding table not found at " + cfg.table_path().string() +
                         " (pass --embedding-table)");
  }
  return load_embedding_table(cfg.table_path(), cfg.vocab_path());
}

void check_subjects(const signal::DatasetManifest& m, const CheckpointInfo& info) {
  std::vector<std::string> all = info.train_subjects;
  all.insert(all.end(), info.masked_subjects.begin(), info.masked_subjects.end());
  for (const auto& subject : all) {
    if (std::find(m.subjects.begin(), m.subjects.end(), subject) == m.subjects.end()) {
      throw DataError("checkpoint refers to subject " + subject + " which the dataset does not list");
    }
  }
}

signal::SubjectSplit split_from(const CheckpointInfo& info, const signal::DatasetManifest& m) {
  check_subjects(m, info);
  signal::SubjectSplit s;
  s.train = info.train_subjects;
  s.masked = info.masked_subjects;
  for (const auto& subject : m.subjects) {
    if (!s.is_train(subject) && !s.is_masked(subject)) s.excluded.push_back(subject);
  }
  return s;
}

// ---------------------------------------------------------------- commands

int cmd_gen_data(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const nn::RngStream root(cfg.seed);
  signal::SyntheticGenerator gen(cfg.gen, root.fork(kTagGenerate));
  const fs::path dir = cfg.data_dir();
  ctx.log->info("generating {} samples into {}", gen.size(), dir.string());
  signal::write_synthetic_dataset(dir, gen);
  const auto& m = gen.manifest();
  ctx.out << "dataset: " << dir.string() << "\n"
          << "subjects: " << m.subjects.size() << "\n"
          << "samples: " << m.samples.size() << "\n"
          << "vocab_size: " << m.vocab_size << "\n"
          << "embedding_dim: " << m.embedding_dim << "\n";
  std::map<std::string, std::size_t> counts;
  for (const auto& s : m.samples) ++counts[s.subject];
  for (const auto& [subject, n] : counts) ctx.out << "  " << subject << ": " << n << "\n";
  return kOk;
}

int cmd_train_ae(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const LoadedData d = load_data(ctx);
  const auto& subjects = d.dataset.manifest().subjects;
  const nn::RngStream root(cfg.seed);
  signal::SubjectSplit split;
  if (!cfg.masked_subjects.empty()) {
    split = signal::make_split(subjects, cfg.masked_subjects);
  } else {
    nn::RngStream rng = root.fork(kTagSplit);
    split = signal::make_split(subjects, cfg.mask, rng);
  }
  ctx.log->info("split {}: {} train subjects", split.tag(), split.train.size());
  const auto train = signal::select_subjects(d.pooled, split.train);

  AutoencoderConfig ac;
  ac.input_channels = d.dataset.channels();
  ac.latent_dim = cfg.latent_dim;
  nn::RngStream rng = root.fork(kTagAutoencoder);
  auto result = train_autoencoder(train, ac, cfg.autoencoder, rng, [&](std::size_t epoch, double loss) {
    ctx.log->debug("ae epoch {} loss {:.6f}", epoch, loss);
    if (epoch % 10 == 0 || epoch == 1) ctx.log->info("ae epoch {}/{} loss {:.6f}", epoch, cfg.autoencoder.epochs, loss);
  });
  save_autoencoder(cfg.ae_dir(), result.model, {cfg.seed, split.train, split.masked});
  write_loss_csv(cfg.out / "ae_loss.csv", result.loss_history);
  ctx.out << "autoencoder: " << cfg.ae_dir().string() << "\n"
          << "split: " << split.tag() << "\n"
          << "final_loss: " << result.loss_history.back() << "\n";
  return kOk;
}

int cmd_train_align(Context& ctx) {
  const auto& cfg = ctx.cfg;
  CheckpointInfo info;
  const Autoencoder<float> ae = require_ae(ctx, &info);
  const EmbeddingTable table = resolve_table(ctx);
  const LoadedData d = load_data(ctx);
  const signal::SubjectSplit split = split_from(info, d.dataset.manifest());
  const LatentTable latents = extract_latents(ae, signal::select_subjects(d.pooled, split.train));

  AlignmentConfig ac;
  ac.latent_dim = ae.config.latent_dim;
  ac.embedding_dim = table.dim();
  ac.dropout = cfg.dropout;
  nn::RngStream rng = nn::RngStream(cfg.seed).fork(kTagAlignment);
  auto result = train_alignment(latents, table.rows, ac, cfg.alignment, rng, [&](std::size_t epoch, double loss) {
    ctx.log->debug("align epoch {} loss {:.6f}", epoch, loss);
    if (epoch % 10 == 0 || epoch == 1) ctx.log->info("align epoch {}/{} loss {:.6f}", epoch, cfg.alignment.epochs, loss);
  });
  result.model.freeze();
  save_alignment(cfg.align_dir(), result.model, info);
  write_loss_csv(cfg.out / "align_loss.csv", result.loss_history);
  ctx.out << "alignment: " << cfg.align_dir().string() << "\n"
          << "split: " << split.tag() << "\n"
          << "final_loss: " << result.loss_history.back() << "\n";
  return kOk;
}

void write_latent_labels(const fs::path& path, const LatentTable& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "row,sample_id,subject,token_id\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << i << ',' << t.sample_ids[i] << ',' << t.subjects[i] << ',' << t.token_ids[i] << '\n';
  }
}

LatentTable read_latents(const fs::path& dir) {
  LatentTable t;
  const fs::path tensor = dir / "latents.eegt";
  const fs::path labels = dir / "latents.csv";
  if (!fs::exists(tensor) || !fs::exists(labels)) {
    throw StateError("missing prerequisite stage 'extract-latents': no latents in " + dir.string());
  }
  t.latents = nn::load_tensor(tensor);
  std::ifstream in(labels, std::ios::binary);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string row, sample, subject, token;
    if (!std::getline(ss, row, ',') || !std::getline(ss, sample, ',') || !std::getline(ss, subject, ',') ||
        !std::getline(ss, token, ',')) {
      throw DataError("malformed line in " + labels.string() + ": " + line);
    }
    t.sample_ids.push_back(std::stoul(sample));
    t.subjects.push_back(subject);
    t.token_ids.push_back(std::stoul(token));
  }
  if (t.latents.rank() != 2 || t.latents.dim(0) != t.size()) {
    throw DataError("latent tensor and label file in " + dir.string() + " disagree");
  }
  return t;
}

int cmd_extract_latents(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Autoencoder<float> ae = require_ae(ctx, nullptr);
  const LoadedData d = load_data(ctx);
  const LatentTable t = extract_latents(ae, signal::select_all(d.pooled));
  const fs::path dir = cfg.out / "latents";
  fs::create_directories(dir);
  if (t.size() > 0) nn::save_tensor(dir / "latents.eegt", t.latents);
  write_latent_labels(dir / "latents.csv", t);
  ctx.out << "latents: " << (dir / "latents.eegt").string() << "\n"
          << "rows: " << t.size() << "\n"
          << "dim: " << ae.config.latent_dim << "\n";
  return kOk;
}

int cmd_eval(Context& ctx) {
  const auto& cfg = ctx.cfg;
  CheckpointInfo info;
  const Autoencoder<float> ae = require_ae(ctx, nullptr);
  const AlignmentModel<float> align = require_align(ctx, &info);
  const LoadedData d = load_data(ctx);
  const signal::SubjectSplit split = split_from(info, d.dataset.manifest());
  const auto samples = signal::select_subjects(d.pooled, split.masked);

  std::unique_ptr<DecoderBackend> backend;
  std::vector<std::string> vocabulary;
  if (cfg.bridge()) {
    backend = std::make_unique<BridgeBackend>(cfg.bridge_url(), align.config().embedding_dim);
    vocabulary = signal::read_vocabulary(cfg.data_dir() / "vocab.txt");
  } else {
    EmbeddingTable table = resolve_table(ctx);
    vocabulary = table.vocabulary;
    backend = std::make_unique<SurrogateBackend>(std::move(table));
  }
  const Evaluation ev = evaluate(samples, split, ae, align, *backend, cfg.prompt, vocabulary);

  std::vector<std::size_t> truth;
  for (const auto& p : ev.predictions) truth.push_back(p.truth_id);
  nn::RngStream rng = nn::RngStream(cfg.seed).fork(kTagBaseline);
  const MetricsReport baseline = random_baseline(truth, d.dataset.manifest().vocab_size, rng);

  const fs::path dir = cfg.out / "eval";
  fs::create_directories(dir);
  write_metrics_csv(dir / "metrics.csv", {{"pipeline-" + backend->name(), split.tag(), ev.report},
                                          {"random", split.tag(), baseline}});
  write_predictions_jsonl(dir / "predictions.jsonl", ev.predictions);
  ctx.out << "split: " << split.tag() << "\n"
          << "samples: " << ev.report.n << "\n"
          << "accuracy: " << ev.report.accuracy << "\n"
          << "macro_f1: " << ev.report.f1 << "\n"
          << "random_accuracy: " << baseline.accuracy << "\n"
          << "metrics: " << (dir / "metrics.csv").string() << "\n";
  return kOk;
}

// Pooled EEG re-pooled to `bins` time points and flattened.
LatentTable eeg_features(const signal::PooledSet& pooled, std::size_t bins) {
  LatentTable t;
  if (pooled.empty()) return t;
  const std::size_t C = pooled.front().values.dim(0);
  t.latents = nn::Tensor({pooled.size(), C * bins});
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const nn::Tensor f = signal::adaptive_avg_pool(pooled[i].values, bins);
    std::copy(f.values().begin(), f.values().end(), t.latents.row(i).begin());
    t.sample_ids.push_back(pooled[i].sample_id);
    t.subjects.push_back(pooled[i].subject);
    t.token_ids.push_back(pooled[i].token_id);
  }
  return t;
}

std::vector<ablations::AblationRow> finetune_rows(Context& ctx, const LatentTable& latents, std::size_t classes) {
  const auto& cfg = ctx.cfg;
  CheckpointInfo info;
  const AlignmentModel<float> backbone = require_align(ctx, &info);
  signal::SubjectSplit split{info.train_subjects, info.masked_subjects, {}};
  const auto train = ablations::labeled_rows(latents, split.train);
  const auto test = ablations::labeled_rows(latents, split.masked);
  if (train.size() == 0 || test.size() == 0) throw DataError("finetune: latents do not cover the checkpoint split");

  std::vector<ablations::AblationRow> rows;
  std::vector<MetricsReport> fine;
  std::vector<MetricsReport> retrain;
  const nn::RngStream root = nn::RngStream(cfg.seed).fork(kTagAblate).fork(0xf1);
  for (std::size_t r = 0; r < cfg.ablate.repetitions; ++r) {
    ablations::FinetuneConfig fc;
    fc.epochs = cfg.ablate.finetune_epochs;
    fc.loss = cfg.ablate.head_loss;
    nn::RngStream rng = root.fork(2 * r);
    const auto head = ablations::finetune_head(backbone, train, classes, fc, rng);
    const auto f = ablations::score(test, ablations::finetune_predict(backbone, head.head, test.features));

    ablations::MlpConfig mc;
    mc.max_steps = head.steps;
    nn::RngStream rng2 = root.fork(2 * r + 1);
    const auto m = ablations::mlp_classify(train, test, classes, mc, rng2);
    const std::string rep = std::to_string(r + 1);
    rows.push_back({"finetune", "head-" + std::to_string(head.steps) + "-steps", rep, split.tag(), f.report});
    rows.push_back({"finetune", "retrain-" + std::to_string(head.steps) + "-steps", rep, split.tag(), m.report});
    fine.push_back(f.report);
    retrain.push_back(m.report);
  }
  rows.push_back({"finetune", "head", "mean", split.tag(), ablations::average_reports(fine)});
  rows.push_back({"finetune", "retrain", "mean", split.tag(), ablations::average_reports(retrain)});
  return rows;
}

int cmd_ablate(Context& ctx, const std::string& which) {
  const auto& cfg = ctx.cfg;
  static const std::vector<std::string> kAll{"pca", "knn", "tree", "mlp", "linear", "finetune"};
  const std::vector<std::string> selected = which == "all" ? kAll : std::vector<std::string>{which};
  const fs::path dir = cfg.out / "ablations";
  fs::create_directories(dir);

  const LatentTable latents = read_latents(cfg.out / "latents");
  const signal::DatasetManifest manifest = signal::read_manifest(cfg.data_dir() / "manifest.json");
  const std::size_t classes = manifest.vocab_size;
  const nn::RngStream root = nn::RngStream(cfg.seed).fork(kTagAblate);
  ablations::ProtocolConfig pc{cfg.ablate.train_subjects, cfg.ablate.test_subjects, cfg.ablate.repetitions};
  nn::RngStream split_rng = root.fork(0);
  const auto splits = ablations::protocol_splits(manifest.subjects, pc, split_rng);

  std::vector<ablations::AblationRow> summary;
  auto emit = [&](const std::string& name, const std::vector<ablations::AblationRow>& rows) {
    ablations::write_ablation_csv(dir / (name + ".csv"), rows);
    for (const auto& r : rows) {
      if (r.repetition == "mean") {
        summary.push_back(r);
        ctx.out << name << " " << r.setting << ": accuracy " << r.report.accuracy << "\n";
      }
    }
  };

  for (const auto& name : selected) {
    ctx.log->info("ablation {}", name);
    if (name == "pca") {
      const auto p = ablations::pca_2d(latents);
      ablations::write_pca_csv(dir / "pca.csv", p);
      ablations::write_pca_svg(dir / "pca.svg", p);
      ctx.out << "pca: explained variance ratio " << p.explained_ratio[0] << ", " << p.explained_ratio[1] << "\n";
    } else if (name == "knn") {
      std::vector<std::string> settings;
      for (auto k : cfg.ablate.knn_k) settings.push_back("k=" + std::to_string(k));
      emit("knn", ablations::run_protocol(
                      "knn", latents, splits, settings,
                      [&](const auto& tr, const auto& te, std::size_t i, nn::RngStream&) {
                        return ablations::knn_classify(tr, te, cfg.ablate.knn_k[i]);
                      },
                      root.fork(1)));
    } else if (name == "tree") {
      std::vector<std::string> settings;
      for (auto d : cfg.ablate.tree_depth) settings.push_back("max_depth=" + std::to_string(d));
      emit("tree", ablations::run_protocol(
                       "tree", latents, splits, settings,
                       [&](const auto& tr, const auto& te, std::size_t i, nn::RngStream&) {
                         return ablations::tree_classify(tr, te, cfg.ablate.tree_depth[i]);
                       },
                       root.fork(2)));
    } else if (name == "mlp") {
      ablations::MlpConfig mc;
      mc.epochs = cfg.ablate.mlp_epochs;
      emit("mlp", ablations::run_protocol(
                      "mlp", latents, splits, {"epochs=" + std::to_string(mc.epochs)},
                      [&](const auto& tr, const auto& te, std::size_t, nn::RngStream& rng) {
                        return ablations::mlp_classify(tr, te, classes, mc, rng);
                      },
                      root.fork(3)));
    } else if (name == "linear") {
      const LoadedData d = load_data(ctx);
      const LatentTable features = eeg_features(d.pooled, cfg.ablate.linear_bins);
      ablations::MlpConfig mc;
      mc.epochs = cfg.ablate.mlp_epochs;
      emit("linear", ablations::run_protocol(
                         "linear", features, splits, {"bins=" + std::to_string(cfg.ablate.linear_bins)},
                         [&](const auto& tr, const auto& te, std::size_t, nn::RngStream& rng) {
                           return ablations::linear_probe(tr, te, classes, mc, rng);
                         },
                         root.fork(4)));
    } else if (name == "finetune") {
      emit("finetune", finetune_rows(ctx, latents, classes));
    }
  }
  if (which == "all") ablations::write_ablation_csv(dir / "summary.csv", summary);
  return kOk;
}

int cmd_bridge_check(Context& ctx, std::size_t probes) {
  const auto& cfg = ctx.cfg;
  if (!cfg.bridge()) throw ParameterError("bridge-check needs --backend bridge:URL");
  BridgeClient client(cfg.bridge_url());
  const std::string hash = client.model_hash();
  const EmbeddingTable table = client.embedding_table();
  const EmbeddingTable again = client.embedding_table();
  const bool table_stable = table.rows == again.rows && table.vocabulary == again.vocabulary;
  const bool hash_stable = client.model_hash() == hash;
  const SurrogateDecoder surrogate(table);
  const std::size_t n = std::min(probes, table.size());
  std::size_t agree = 0;
  for (std::size_t v = 0; v < n; ++v) {
    const Generation g = client.generate(cfg.prompt.text, table.rows.row(v), cfg.prompt.max_tokens);
    const DecodedToken s = surrogate.decode(table.rows.row(v));
    if (g.text == s.text) {
      ++agree;
    } else {
      ctx.log->warn("row {}: bridge '{}' vs surrogate '{}'", v, g.text, s.text);
    }
  }
  ctx.out << "bridge: " << cfg.bridge_url() << "\n"
          << "model_hash: " << hash << (hash_stable ? "" : " (changed between requests)") << "\n"
          << "table: " << table.size() << "x" << table.dim() << (table_stable ? "" : " (not stable)") << "\n"
          << "conformance: " << agree << "/" << n << "\n";
  return agree == n && table_stable && hash_stable ? kOk : kBackend;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EEG-to-token alignment pipeline", "cortex-align"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path, out_dir, data_dir, backend, table, vocab, precision;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "Random seed (default 1)");
  app.add_option("--out", out_dir, "Output directory (default ./run)");
  app.add_option("--backend", backend, "surrogate | bridge:URL");
  app.add_option("--data", data_dir, "Dataset directory (default <out>/data)");
  app.add_option("--embedding-table", table, "Target embedding table (EEGT)");
  app.add_option("--vocab", vocab, "Vocabulary file for the embedding table");
  app.add_option("--precision", precision, "float32");

  std::optional<std::size_t> subjects, per_subject, vocab_size, channels, embedding_dim, t_min, t_max;
  std::optional<double> alpha, sigma;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset");
  gen->add_option("--subjects", subjects);
  gen->add_option("--samples-per-subject", per_subject);
  gen->add_option("--vocab-size", vocab_size);
  gen->add_option("--channels", channels);
  gen->add_option("--embedding-dim", embedding_dim);
  gen->add_option("--t-min", t_min);
  gen->add_option("--t-max", t_max);
  gen->add_option("--alpha", alpha, "Subject-confound strength");
  gen->add_option("--sigma", sigma, "Noise standard deviation");

  std::optional<std::size_t> mask, latent_dim, epochs, batch;
  std::optional<std::vector<std::string>> masked;
  std::optional<double> lr;
  auto* train_ae = app.add_subcommand("train-ae", "Train the autoencoder on the training subjects");
  train_ae->add_option("--mask", mask, "Number of masked subjects (default 1)");
  train_ae->add_option("--masked", masked, "Explicit masked subjects")->delimiter(',');
  train_ae->add_option("--latent-dim", latent_dim);
  train_ae->add_option("--epochs", epochs);
  train_ae->add_option("--batch-size", batch);
  train_ae->add_option("--lr", lr);

  auto* train_align = app.add_subcommand("train-align", "Train the latent-to-embedding model");
  train_align->add_option("--epochs", epochs);
  train_align->add_option("--batch-size", batch);
  train_align->add_option("--lr", lr);

  app.add_subcommand("extract-latents", "Encode every sample with the frozen encoder");
  app.add_subcommand("eval", "Decode and score the masked subjects");

  std::string which = "all";
  auto* ablate = app.add_subcommand("ablate", "Run ablations on extracted latents");
  ablate->add_option("which", which, "pca | knn | tree | mlp | linear | finetune | all")
      ->check(CLI::IsMember({"pca", "knn", "tree", "mlp", "linear", "finetune", "all"}));
  std::optional<std::size_t> repetitions;
  ablate->add_option("--repetitions", repetitions);

  std::size_t probes = 100;
  auto* bridge_check = app.add_subcommand("bridge-check", "Check a bridge service against the surrogate");
  bridge_check->add_option("--probes", probes, "Vocabulary rows to probe");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  RunConfig cfg;
  try {
    if (config_path) cfg = load_config(*config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.out = *out_dir;
    if (data_dir) cfg.data = *data_dir;
    if (backend) cfg.backend = *backend;
    if (table) cfg.embedding_table = *table;
    if (vocab) cfg.vocab = *vocab;
    if (precision) cfg.precision = *precision;
    if (subjects) cfg.gen.subjects = *subjects;
    if (per_subject) cfg.gen.samples_per_subject = *per_subject;
    if (vocab_size) cfg.gen.vocab_size = *vocab_size;
    if (channels) cfg.gen.channels = *channels;
    if (embedding_dim) cfg.gen.embedding_dim = *embedding_dim;
    if (t_min) cfg.gen.t_min = *t_min;
    if (t_max) cfg.gen.t_max = *t_max;
    if (alpha) cfg.gen.alpha = *alpha;
    if (sigma) cfg.gen.sigma = *sigma;
    if (mask) cfg.mask = *mask;
    if (masked) cfg.masked_subjects = *masked;
    if (latent_dim) cfg.latent_dim = *latent_dim;
    TrainOptions* stage = train_ae->parsed() ? &cfg.autoencoder : train_align->parsed() ? &cfg.alignment : nullptr;
    if (stage) {
      if (epochs) stage->epochs = *epochs;
      if (batch) stage->batch_size = *batch;
      if (lr) stage->optimizer.learning_rate = *lr;
    }
    if (repetitions) cfg.ablate.repetitions = *repetitions;
    cfg.validate();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  Context ctx{cfg, out, make_logger(cfg.out, err)};
  try {
    if (gen->parsed()) return cmd_gen_data(ctx);
    if (train_ae->parsed()) return cmd_train_ae(ctx);
    if (train_align->parsed()) return cmd_train_align(ctx);
    if (app.got_subcommand("extract-latents")) return cmd_extract_latents(ctx);
    if (app.got_subcommand("eval")) return cmd_eval(ctx);
    if (ablate->parsed()) return cmd_ablate(ctx, which);
    if (bridge_check->parsed()) return cmd_bridge_check(ctx, probes);
  } catch (const BackendError& e) {
    ctx.log->error("{}", e.what());
    return kBackend;
  } catch (const DataError& e) {
    ctx.log->error("{}", e.what());
    return kData;
  } catch (const ShapeError& e) {
    ctx.log->error("{}", e.what());
    return kData;
  } catch (const Error& e) {
    ctx.log->error("{}", e.what());
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    ctx.log->error("{}", e.what());
    return kData;
  }
  return kUsage;
}

}  // namespace cortex::cli
