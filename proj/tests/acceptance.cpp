// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Pass criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "cortex/ablations/finetune.hpp"
#include "cortex/ablations/knn.hpp"
#include "cortex/ablations/mlp.hpp"
#include "cortex/ablations/protocol.hpp"
#include "cortex/evaluate.hpp"
#include "cortex/signal/pooled_set.hpp"
#include "support.hpp"

using namespace cortex;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ------------------------------------------------------------ unit suites

struct Suite {
  const char* binary;
  const char* filter;
};

Verdict run_suites(const std::vector<Suite>& suites, const fs::path& log_dir, const std::string& tag,
                   double budget_seconds) {
  const auto t0 = Clock::now();
  std::vector<std::string> failed;
  for (const auto& s : suites) {
    const fs::path log = log_dir / (tag + "-" + fs::path(s.binary).filename().string() + ".log");
    const std::string cmd = std::string("\"") + s.binary + "\" --gtest_filter='" + s.filter + "' > \"" +
                            log.string() + "\" 2>&1";
    if (std::system(cmd.c_str()) != 0) failed.push_back(fs::path(s.binary).filename().string() + " (" + log.string() + ")");
  }
  const double t = seconds_since(t0);
  Verdict v;
  v.pass = failed.empty() && (budget_seconds <= 0 || t < budget_seconds);
  v.detail = fmt("%zu suites, %.1f s", suites.size(), t);
  if (budget_seconds > 0) v.detail += fmt(" (budget %.0f s)", budget_seconds);
  for (const auto& f : failed) v.detail += "; failed: " + f;
  return v;
}

Verdict criterion_gradients(const fs::path& logs) {
  return run_suites({{CORTEX_TEST_NN, "GradientCheck.*"},
                     {CORTEX_TEST_AUTOENCODER, "GradientCheck.*"},
                     {CORTEX_TEST_ALIGNMENT, "GradientCheck.*"},
                     {CORTEX_TEST_ABLATIONS, "Finetune.HeadObjectiveGradientCheck"}},
                    logs, "gradients", 120.0);
}

Verdict criterion_oracles(const fs::path& logs) {
  return run_suites({{CORTEX_TEST_SIGNAL, "Pooling.OracleOnThousandRandomShapes"},
                     {CORTEX_TEST_ABLATIONS, "Knn.MatchesExhaustiveScan:Pca.VariancesMatchCovarianceEigenvalues"},
                     {CORTEX_TEST_DECODE_EVAL, "SurrogateDecode.MatchesBruteForceArgmax:Metrics.MatchesExhaustiveTally"}},
                    logs, "oracles", 0.0);
}

// ------------------------------------------------------------- pipeline

signal::SynthConfig pipeline_data(double alpha) {
  signal::SynthConfig c;
  c.subjects = 10;
  c.vocab_size = 50;
  c.embedding_dim = 64;
  c.alpha = alpha;
  c.sigma = 0.1;
  c.samples_per_subject = 200;
  return c;
}

struct Corpus {
  std::unique_ptr<signal::SyntheticGenerator> gen;
  signal::PooledSet pooled;
  EmbeddingTable table;
};

Corpus make_corpus(double alpha, std::uint64_t seed) {
  Corpus c;
  c.gen = std::make_unique<signal::SyntheticGenerator>(pipeline_data(alpha), nn::RngStream(seed));
  c.pooled = signal::pool_synthetic(*c.gen);
  c.table = EmbeddingTable{c.gen->embedding_table(), c.gen->vocabulary()};
  return c;
}

struct PipelineRun {
  std::uint64_t seed = 0;
  std::size_t mask = 0;
  signal::SubjectSplit split;
  std::optional<Autoencoder<float>> ae;
  std::optional<AlignmentModel<float>> align;
  LatentTable train_latents;
  LatentTable test_latents;
  double accuracy = 0.0;
  double seconds = 0.0;
  bool extract_kept_encoder = false;
};

PipelineRun run_pipeline(const Corpus& corpus, std::size_t mask, std::uint64_t seed) {
  const auto t0 = Clock::now();
  PipelineRun r;
  r.seed = seed;
  r.mask = mask;
  const nn::RngStream root(seed);
  nn::RngStream split_rng = root.fork(1);
  r.split = signal::make_split(corpus.gen->manifest().subjects, mask, split_rng);
  const auto train = signal::select_subjects(corpus.pooled, r.split.train);
  const auto test = signal::select_subjects(corpus.pooled, r.split.masked);

  AutoencoderConfig ac;
  ac.input_channels = corpus.gen->config().channels;
  nn::RngStream ae_rng = root.fork(2);
  r.ae.emplace(train_autoencoder(train, ac, {50, 32, {}}, ae_rng).model);

  const auto before = testing_support::checksum(r.ae->parameters());
  r.train_latents = extract_latents(*r.ae, train);
  r.test_latents = extract_latents(*r.ae, test);
  r.extract_kept_encoder = testing_support::checksum(r.ae->parameters()) == before;

  AlignmentConfig alc;
  alc.latent_dim = ac.latent_dim;
  alc.embedding_dim = corpus.table.dim();
  nn::RngStream al_rng = root.fork(3);
  r.align.emplace(train_alignment(r.train_latents, corpus.table.rows, alc, {100, 32, {}}, al_rng).model);
  r.align->freeze();

  SurrogateBackend backend(corpus.table);
  const Evaluation ev = evaluate(test, r.split, *r.ae, *r.align, backend, PromptSpec{}, corpus.table.vocabulary);
  r.accuracy = ev.report.accuracy;
  r.seconds = seconds_since(t0);
  std::printf("  [run] seed %llu %s: accuracy %.4f in %.1f s\n", static_cast<unsigned long long>(seed),
              r.split.tag().c_str(), r.accuracy, r.seconds);
  std::fflush(stdout);
  return r;
}

double chance_sigma(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

ablations::LabeledSet labeled(const LatentTable& t) {
  ablations::LabeledSet s;
  s.features = t.latents;
  for (auto id : t.token_ids) s.labels.push_back(static_cast<long>(id));
  return s;
}

// ------------------------------------------------------------------ cli

std::map<std::string, std::string> outputs(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "run.log") {
      files[fs::relative(e.path(), dir).string()] = testing_support::slurp(e.path());
    }
  }
  return files;
}

Verdict criterion_determinism(const fs::path& work) {
  const fs::path config = work / "determinism.json";
  {
    std::ofstream c(config);
    c << R"({"gen": {"subjects": 10, "samples_per_subject": 110, "vocab_size": 8, "channels": 8,
                    "t_min": 60, "t_max": 80, "embedding_dim": 16},
            "autoencoder": {"latent_dim": 16, "epochs": 3},
            "alignment": {"epochs": 5},
            "ablate": {"repetitions": 2, "mlp_epochs": 3, "finetune_epochs": 2, "knn_k": [5, 10, 50, 100, 880]}})";
  }
  const std::vector<std::vector<std::string>> commands{{"gen-data"},      {"train-ae"},      {"train-align"},
                                                       {"extract-latents"}, {"eval"},        {"ablate", "all"}};
  std::vector<std::map<std::string, std::string>> snapshots;
  for (const char* name : {"first", "second"}) {
    const fs::path out = work / name;
    for (const auto& cmd : commands) {
      std::vector<std::string> args{"cortex-align", "--config", config.string(), "--out", out.string(), "--seed", "5"};
      args.insert(args.end(), cmd.begin(), cmd.end());
      std::ostringstream sink_out, sink_err;
      if (const int code = cli::run(args, sink_out, sink_err); code != 0) {
        return {false, cmd[0] + " exited with " + std::to_string(code) + ": " + sink_err.str()};
      }
    }
    snapshots.push_back(outputs(out));
  }
  std::size_t differing = 0;
  std::size_t checkpoints = 0;
  std::size_t csvs = 0;
  for (const auto& [path, bytes] : snapshots[0]) {
    if (path.rfind("checkpoints", 0) == 0) ++checkpoints;
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") ++csvs;
    auto it = snapshots[1].find(path);
    if (it == snapshots[1].end() || it->second != bytes) ++differing;
  }
  if (snapshots[0].size() != snapshots[1].size()) ++differing;
  return {differing == 0 && checkpoints > 0 && csvs > 0,
          fmt("%zu files compared (%zu checkpoint files, %zu CSVs), %zu differ", snapshots[0].size(), checkpoints, csvs,
              differing)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  auto want = [&](int c) { return wanted.empty() || wanted.count(c) > 0; };

  const fs::path work = fs::temp_directory_path() / ("cortex-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(work);
  std::map<int, Verdict> verdicts;
  auto report = [&](int c, const Verdict& v) {
    verdicts[c] = v;
    std::printf("criterion %d: %s - %s\n", c, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  };

  if (want(1)) report(1, criterion_gradients(work));
  if (want(2)) report(2, criterion_oracles(work));

  std::vector<PipelineRun> mask1;
  std::vector<PipelineRun> mask3;
  const bool need_pipeline = want(3) || want(4) || want(5) || want(6);
  if (need_pipeline) {
    const Corpus corpus = make_corpus(0.5, 42);
    const std::vector<std::uint64_t> seeds = want(4) || want(6) ? std::vector<std::uint64_t>{1, 2, 3}
                                                                : std::vector<std::uint64_t>{1};
    for (auto s : seeds) mask1.push_back(run_pipeline(corpus, 1, s));
    if (want(4)) {
      for (auto s : seeds) mask3.push_back(run_pipeline(corpus, 3, s));
    }
  }

  if (want(3) || want(5)) {
    const auto& r = mask1.front();
    const Verdict v{r.accuracy >= 0.95 && r.seconds < 300.0,
                    fmt("masked-subject accuracy %.4f (>= 0.95), %.1f s (< 300 s), split %s", r.accuracy, r.seconds,
                        r.split.tag().c_str())};
    if (want(3)) report(3, v);
  }

  if (want(4)) {
    double a1 = 0.0, a3 = 0.0;
    for (const auto& r : mask1) a1 += r.accuracy / 3.0;
    for (const auto& r : mask3) a3 += r.accuracy / 3.0;
    report(4, {std::abs(a1 - a3) <= 0.05, fmt("mean mask-1 %.4f, mean mask-3 %.4f, gap %.2f pp (<= 5)", a1, a3,
                                              100.0 * std::abs(a1 - a3))});
  }

  if (want(5)) {
    const Corpus confounded = make_corpus(2.0, 43);
    const nn::RngStream root(1);
    nn::RngStream split_rng = root.fork(1);
    const auto split = signal::make_split(confounded.gen->manifest().subjects, 1, split_rng);
    const auto train = signal::select_subjects(confounded.pooled, split.train);
    const auto test = signal::select_subjects(confounded.pooled, split.masked);
    AutoencoderConfig ac;
    ac.input_channels = confounded.gen->config().channels;
    nn::RngStream ae_rng = root.fork(2);
    const auto ae = train_autoencoder(train, ac, {50, 32, {}}, ae_rng).model;
    const auto knn = ablations::knn_classify(labeled(extract_latents(ae, train)), labeled(extract_latents(ae, test)), 100);
    const double p = 1.0 / 50.0;
    const double sigma = chance_sigma(p, knn.report.n);
    const double pipeline = mask1.front().accuracy;
    report(5, {std::abs(knn.report.accuracy - p) <= 3.0 * sigma && pipeline >= 0.95,
               fmt("alpha 2.0 raw-latent knn(k=100) accuracy %.4f vs chance %.4f +- %.4f (3 sigma, n=%zu); "
                   "pipeline accuracy %.4f",
                   knn.report.accuracy, p, 3.0 * sigma, knn.report.n, pipeline)});
  }

  if (want(6)) {
    bool frozen_ok = true;
    bool direction_ok = true;
    std::string detail;
    for (const auto& r : mask1) {
      frozen_ok = frozen_ok && r.extract_kept_encoder;
      const auto before = testing_support::checksum(std::as_const(*r.align).parameters());
      const auto train = labeled(r.train_latents);
      const auto test = labeled(r.test_latents);
      const nn::RngStream root = nn::RngStream(r.seed).fork(4);
      nn::RngStream head_rng = root.fork(0);
      const auto head = ablations::finetune_head(*r.align, train, 50, {}, head_rng);
      const auto fine = ablations::score(test, ablations::finetune_predict(*r.align, head.head, test.features));
      frozen_ok = frozen_ok && testing_support::checksum(std::as_const(*r.align).parameters()) == before;
      ablations::MlpConfig mc;
      mc.max_steps = head.steps;
      nn::RngStream mlp_rng = root.fork(1);
      const auto retrain = ablations::mlp_classify(train, test, 50, mc, mlp_rng);
      direction_ok = direction_ok && fine.report.accuracy >= retrain.report.accuracy;
      detail += fmt("seed %llu: head %.4f vs retrain %.4f (%zu steps); ", static_cast<unsigned long long>(r.seed),
                    fine.report.accuracy, retrain.report.accuracy, head.steps);
    }
    detail += frozen_ok ? "frozen parameters unchanged" : "frozen parameters CHANGED";
    report(6, {frozen_ok && direction_ok, detail});
  }

  if (want(7)) report(7, criterion_determinism(work));

  if (want(8)) {
    nn::RngStream rng(8);
    std::vector<std::size_t> truth(10000);
    for (auto& t : truth) t = rng.below(50);
    nn::RngStream baseline_rng(9);
    const auto r = random_baseline(truth, 50, baseline_rng);
    const double p = 1.0 / 50.0;
    const double sigma = chance_sigma(p, r.n);
    report(8, {std::abs(r.accuracy - p) <= 3.0 * sigma,
               fmt("accuracy %.4f vs %.4f +- %.4f (3 sigma, n=%zu)", r.accuracy, p, 3.0 * sigma, r.n)});
  }

  if (want(9)) std::printf("criterion 9: N/A - secondary bridge criterion, covered by the bridge unit tests\n");

  std::error_code ec;
  fs::remove_all(work, ec);
  const bool all = std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second.pass; });
  return all ? 0 : 1;
}
