#include <set>

#include "cortex/errors.hpp"
#include "cortex/nn/tensor_io.hpp"
#include "cortex/signal/dataset.hpp"
#include "cortex/signal/pooled_set.hpp"
#include "cortex/signal/pooling.hpp"
#include "cortex/signal/split.hpp"
#include "cortex/signal/synth.hpp"
#include "support.hpp"

using namespace cortex;
using namespace cortex::signal;
using namespace testing_support;
using nn::Tensor;
using nn::Tensor64;

namespace {

// Independent reference: each output is the plain mean over
// [floor(j*T/L), ceil((j+1)*T/L)) computed with integer arithmetic.
Tensor64 pooling_oracle(const Tensor64& x, std::size_t L) {
  const std::size_t C = x.dim(0), T = x.dim(1);
  Tensor64 out({C, L});
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t j = 0; j < L; ++j) {
      const std::size_t lo = j * T / L;
      const std::size_t hi = ((j + 1) * T + L - 1) / L;
      double s = 0.0;
      for (std::size_t t = lo; t < hi; ++t) s += x.at(c, t);
      out.at(c, j) = s / static_cast<double>(hi - lo);
    }
  }
  return out;
}

SynthConfig small_config() {
  SynthConfig c;
  c.subjects = 3;
  c.samples_per_subject = 6;
  c.vocab_size = 4;
  c.channels = 5;
  c.t_min = 20;
  c.t_max = 30;
  c.embedding_dim = 8;
  return c;
}

}  // namespace

// ---------------------------------------------------------------- pooling

TEST(Pooling, OracleOnThousandRandomShapes) {
  std::mt19937_64 g(1);
  std::uniform_int_distribution<std::size_t> C(1, 4), T(1, 600), L(1, 300);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t t = T(g), l = L(g);
    const Tensor64 x = random_tensor64({C(g), t}, g, 10.0);
    const Tensor64 y = adaptive_avg_pool(x, l);
    const Tensor64 ref = pooling_oracle(x, l);
    ASSERT_EQ(y.dims(), ref.dims());
    for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(y[i] - ref[i]));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Pooling, Examples) {
  const Tensor64 x({1, 4}, {1, 2, 3, 4});
  EXPECT_EQ(adaptive_avg_pool(x, 2), Tensor64({1, 2}, {1.5, 3.5}));
  std::mt19937_64 g(2);
  const Tensor64 r = random_tensor64({3, 256}, g);
  EXPECT_EQ(adaptive_avg_pool(r, 256), r);
  const Tensor64 c({2, 301}, 4.25);
  const Tensor64 pooled = adaptive_avg_pool(c, 256);
  for (double v : pooled.data()) EXPECT_DOUBLE_EQ(v, 4.25);
}

TEST(Pooling, WindowsCoverInputInOrder) {
  for (std::size_t T : {256u, 257u, 300u, 511u, 512u, 1024u}) {
    const PoolingMap map(T, 256);
    ASSERT_EQ(map.windows().front().start, 0u);
    EXPECT_EQ(map.windows().back().end, T);
    for (std::size_t j = 0; j < map.windows().size(); ++j) {
      const auto& w = map.windows()[j];
      EXPECT_GT(w.end, w.start);
      if (j == 0) continue;
      const auto& prev = map.windows()[j - 1];
      EXPECT_LE(w.start, prev.end);      // no gaps
      EXPECT_GE(w.start + 1, prev.end);  // at most one shared sample
      EXPECT_GT(w.start, prev.start);
      if (T % 256 == 0) EXPECT_EQ(w.start, prev.end);
    }
  }
}

TEST(Pooling, ShortRecordingsShareSamples) {
  const PoolingMap map(100, 256);
  EXPECT_EQ(map.target_length(), 256u);
  for (const auto& w : map.windows()) {
    EXPECT_GT(w.end, w.start);
    EXPECT_LE(w.end, 100u);
  }
}

TEST(Pooling, PreservesChannelMeanWhenLengthDivides) {
  std::mt19937_64 g(3);
  const Tensor64 x = random_tensor64({3, 768}, g);
  const Tensor64 y = adaptive_avg_pool(x, 256);
  for (std::size_t c = 0; c < 3; ++c) {
    double a = 0, b = 0;
    for (std::size_t t = 0; t < 768; ++t) a += x.at(c, t);
    for (std::size_t t = 0; t < 256; ++t) b += y.at(c, t);
    EXPECT_NEAR(a / 768, b / 256, 1e-12);
  }
}

TEST(Pooling, Errors) {
  EXPECT_THROW(PoolingMap(0, 256), DataError);
  EXPECT_THROW(adaptive_avg_pool(Tensor64({4}), 2), ShapeError);
}

// ---------------------------------------------------------------- manifest / dataset

TEST(Dataset, RoundTripIsIdentical) {
  TempDir dir;
  const SyntheticGenerator gen(small_config(), nn::RngStream(5));
  write_synthetic_dataset(dir.path(), gen);
  const Dataset ds = Dataset::load(dir / "manifest.json");
  EXPECT_EQ(ds.manifest(), gen.manifest());
  EXPECT_EQ(ds.size(), 18u);
  EXPECT_EQ(ds.channels(), 5u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const EegRecording a = ds.load_recording(i);
    const EegRecording b = gen.generate(i);
    EXPECT_EQ(a.subject_id, b.subject_id);
    ASSERT_EQ(a.values.dims(), b.values.dims());
    EXPECT_EQ(std::memcmp(a.values.ptr(), b.values.ptr(), a.values.size() * sizeof(float)), 0);
  }
  EXPECT_EQ(read_vocabulary(dir / "vocab.txt"), gen.vocabulary());
  EXPECT_EQ(nn::load_tensor(dir / "embeddings.eegt"), gen.embedding_table());
  const auto counts = ds.counts_per_subject();
  EXPECT_EQ(counts.size(), 3u);
  for (const auto& [s, n] : counts) EXPECT_EQ(n, 6u);
}

TEST(Dataset, EmptySampleListIsValid) {
  TempDir dir;
  DatasetManifest m;
  m.vocab_size = 3;
  m.embedding_dim = 4;
  m.subjects = {"A", "B"};
  write_manifest(dir / "manifest.json", m);
  const Dataset ds = Dataset::load(dir / "manifest.json");
  EXPECT_EQ(ds.size(), 0u);
  EXPECT_EQ(ds.channels(), 0u);
}

TEST(Dataset, TokenIdAtVocabSizeIsRejectedWithRecordName) {
  TempDir dir;
  nn::save_tensor(dir / "r0.eegt", Tensor({2, 10}));
  DatasetManifest m;
  m.vocab_size = 3;
  m.embedding_dim = 4;
  m.subjects = {"A"};
  m.samples = {{"r0.eegt", "A", 3, "x"}};
  write_manifest(dir / "manifest.json", m);
  try {
    Dataset::load(dir / "manifest.json");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("r0.eegt"), std::string::npos) << e.what();
  }
}

TEST(Dataset, MissingFileUnknownSubjectAndChannelMismatch) {
  TempDir dir;
  nn::save_tensor(dir / "a.eegt", Tensor({2, 10}));
  nn::save_tensor(dir / "b.eegt", Tensor({3, 10}));
  DatasetManifest m;
  m.vocab_size = 3;
  m.embedding_dim = 4;
  m.subjects = {"A"};
  m.samples = {{"missing.eegt", "A", 0, "x"}};
  write_manifest(dir / "manifest.json", m);
  EXPECT_THROW(Dataset::load(dir / "manifest.json"), DataError);
  m.samples = {{"a.eegt", "Z", 0, "x"}};
  write_manifest(dir / "manifest.json", m);
  EXPECT_THROW(Dataset::load(dir / "manifest.json"), DataError);
  m.samples = {{"a.eegt", "A", 0, "x"}, {"b.eegt", "A", 1, "y"}};
  write_manifest(dir / "manifest.json", m);
  EXPECT_THROW(Dataset::load(dir / "manifest.json"), DataError);
  EXPECT_THROW(Dataset::load(dir / "nope.json"), DataError);
}

TEST(Dataset, MalformedJsonIsDataError) {
  TempDir dir;
  std::ofstream(dir / "manifest.json") << "{\"vocab_size\": ";
  EXPECT_THROW(read_manifest(dir / "manifest.json"), DataError);
}

TEST(Vocabulary, ParsesLinesAndDropsCarriageReturns) {
  std::istringstream in("\xe6\xb0\xb4\r\nb\nc");
  EXPECT_EQ(parse_vocabulary(in), (std::vector<std::string>{"\xe6\xb0\xb4", "b", "c"}));
}

// ---------------------------------------------------------------- synthetic generator

TEST(Synth, DegenerateConfigsAreRejected) {
  auto c = small_config();
  c.vocab_size = 1;
  EXPECT_THROW(SyntheticGenerator(c, nn::RngStream(1)), ParameterError);
  c = small_config();
  c.subjects = 1;
  EXPECT_THROW(SyntheticGenerator(c, nn::RngStream(1)), ParameterError);
  c = small_config();
  c.t_min = 40;
  EXPECT_THROW(SyntheticGenerator(c, nn::RngStream(1)), ParameterError);
}

TEST(Synth, SameSeedIsBitIdentical) {
  const SyntheticGenerator a(small_config(), nn::RngStream(9)), b(small_config(), nn::RngStream(9));
  const SyntheticGenerator c(small_config(), nn::RngStream(10));
  EXPECT_EQ(a.manifest(), b.manifest());
  EXPECT_EQ(a.embedding_table(), b.embedding_table());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.generate(i).values, b.generate(i).values);
    differs = differs || !(a.generate(i).values == c.generate(i).values);
  }
  EXPECT_TRUE(differs);
}

TEST(Synth, ManifestShapeAndDurations) {
  const auto cfg = small_config();
  const SyntheticGenerator gen(cfg, nn::RngStream(4));
  const auto& m = gen.manifest();
  EXPECT_EQ(m.subjects.size(), cfg.subjects);
  EXPECT_EQ(m.samples.size(), cfg.subjects * cfg.samples_per_subject);
  EXPECT_EQ(gen.embedding_table().dims(), (nn::Shape{cfg.vocab_size, cfg.embedding_dim}));
  for (std::size_t i = 0; i < gen.size(); ++i) {
    const auto rec = gen.generate(i);
    EXPECT_EQ(rec.channels(), cfg.channels);
    EXPECT_GE(rec.duration(), cfg.t_min);
    EXPECT_LE(rec.duration(), cfg.t_max);
    EXPECT_TRUE(rec.values.all_finite());
    EXPECT_EQ(m.samples[i].token_text, synthetic_token_text(m.samples[i].token_id));
  }
}

TEST(Synth, NoConfoundNoNoiseMakesSubjectsIdentical) {
  auto cfg = small_config();
  cfg.alpha = 0.0;
  cfg.sigma = 0.0;
  const SyntheticGenerator gen(cfg, nn::RngStream(6));
  const PooledSet pooled = pool_synthetic(gen, 16);
  const std::size_t n = cfg.samples_per_subject;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 1; s < cfg.subjects; ++s) {
      const auto& a = pooled[i];
      const auto& b = pooled[s * n + i];
      ASSERT_EQ(a.token_id, b.token_id);
      ASSERT_NE(a.subject, b.subject);
      EXPECT_EQ(a.values, b.values);
    }
  }
}

TEST(Synth, StrongConfoundGroupsNeighboursBySubject) {
  std::size_t probes = 0, same_subject = 0, same_token = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthConfig cfg;
    cfg.subjects = 4;
    cfg.vocab_size = 4;
    cfg.samples_per_subject = 8;
    cfg.channels = 16;
    cfg.alpha = 20.0;
    cfg.sigma = 0.0;
    const SyntheticGenerator gen(cfg, nn::RngStream(seed));
    const PooledSet pooled = pool_synthetic(gen, 64);
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t j = 0; j < pooled.size(); ++j) {
        if (j == i) continue;
        double d = 0;
        for (std::size_t k = 0; k < pooled[i].values.size(); ++k) {
          const double diff = pooled[i].values[k] - pooled[j].values[k];
          d += diff * diff;
        }
        if (d < best) best = d, arg = j;
      }
      ++probes;
      same_subject += pooled[arg].subject == pooled[i].subject;
      same_token += pooled[arg].token_id == pooled[i].token_id;
    }
  }
  const double subject_rate = static_cast<double>(same_subject) / probes;
  const double token_rate = static_cast<double>(same_token) / probes;
  EXPECT_GE(subject_rate, 0.8) << "token rate " << token_rate;
  EXPECT_GT(subject_rate, 2.0 * token_rate) << "subject rate " << subject_rate;
}

TEST(Synth, TokenTextIsOneCharacter) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 60; ++i) {
    const std::string t = synthetic_token_text(i);
    EXPECT_EQ(t.size(), 3u);
    EXPECT_TRUE(seen.insert(t).second);
  }
}

// ---------------------------------------------------------------- splits

namespace {
std::vector<std::string> ten_subjects() {
  std::vector<std::string> s;
  for (int i = 1; i <= 10; ++i) s.push_back((i < 10 ? "S0" : "S") + std::to_string(i));
  return s;
}
}  // namespace

TEST(Split, MaskOneAndMaskThree) {
  const auto subjects = ten_subjects();
  nn::RngStream rng(1);
  const auto one = make_split(subjects, 1, rng);
  EXPECT_EQ(one.train.size(), 9u);
  EXPECT_EQ(one.masked.size(), 1u);
  const auto three = make_split(subjects, 3, rng);
  EXPECT_EQ(three.train.size(), 7u);
  EXPECT_EQ(three.masked.size(), 3u);
  EXPECT_NE(one.tag(), three.tag());
}

TEST(Split, OutOfRangeK) {
  const auto subjects = ten_subjects();
  nn::RngStream rng(1);
  EXPECT_THROW(make_split(subjects, 10, rng), ParameterError);
  EXPECT_THROW(make_split(subjects, 0, rng), ParameterError);
  EXPECT_THROW(make_split(subjects, {"S99"}), ParameterError);
  EXPECT_THROW(make_split(subjects, std::vector<std::string>{}), ParameterError);
}

TEST(Split, DisjointAndCoveringForManySeeds) {
  const auto subjects = ten_subjects();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    nn::RngStream rng(seed);
    const std::size_t k = 1 + seed % 9;
    const auto s = make_split(subjects, k, rng);
    EXPECT_NO_THROW(validate_split(s, subjects));
    EXPECT_TRUE(std::is_sorted(s.masked.begin(), s.masked.end()));
    for (const auto& m : s.masked) EXPECT_FALSE(s.is_train(m));
    const auto p = make_protocol_split(subjects, 8, 1, rng);
    EXPECT_NO_THROW(validate_split(p, subjects));
    EXPECT_EQ(p.excluded.size(), 1u);
  }
}

TEST(Split, ExplicitMaskAndValidation) {
  const auto subjects = ten_subjects();
  const auto s = make_split(subjects, {"S03", "S07"});
  EXPECT_EQ(s.masked, (std::vector<std::string>{"S03", "S07"}));
  EXPECT_EQ(s.tag(), "mask2[S03;S07]");
  SubjectSplit bad = s;
  bad.train.push_back("S03");
  EXPECT_THROW(validate_split(bad, subjects), DataError);
  bad = s;
  bad.train.pop_back();
  EXPECT_THROW(validate_split(bad, subjects), DataError);
}

TEST(PooledSet, SelectionKeepsDatasetOrder) {
  const SyntheticGenerator gen(small_config(), nn::RngStream(2));
  const PooledSet pooled = pool_synthetic(gen, 8);
  const SampleView v = select_subjects(pooled, {"S03", "S01"});
  ASSERT_EQ(v.size(), 12u);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LT(v[i - 1]->sample_id, v[i]->sample_id);
  EXPECT_EQ(select_all(pooled).size(), pooled.size());
}
