#include "cortex/alignment.hpp"
#include "cortex/checkpoint.hpp"
#include "cortex/errors.hpp"
#include "cortex/nn/loss.hpp"
#include "support.hpp"

using namespace cortex;
using namespace testing_support;
using nn::Tensor;
using nn::Tensor64;

namespace {

AlignmentConfig small_config() {
  AlignmentConfig c;
  c.latent_dim = 6;
  c.embedding_dim = 5;
  c.hidden = {8, 12, 10};
  return c;
}

LatentTable table_from(const Tensor& latents, std::vector<std::size_t> tokens) {
  LatentTable t;
  t.latents = latents;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    t.sample_ids.push_back(i);
    t.subjects.push_back("S01");
  }
  t.token_ids = std::move(tokens);
  return t;
}

}  // namespace

TEST(AlignmentConfig, Validation) {
  AlignmentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.hidden[1] = 0;
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(Alignment, WidthsAndOutputDimension) {
  nn::RngStream init(1);
  AlignmentModel<float> model(AlignmentConfig{64, 3584}, init);
  std::mt19937_64 g(1);
  const Tensor z = random_tensor64({3, 64}, g).cast<float>();
  const auto trace = model.trace(z);
  ASSERT_EQ(trace.blocks.size(), 3u);
  EXPECT_EQ(trace.blocks[0].dims(), (nn::Shape{3, 512}));
  EXPECT_EQ(trace.blocks[1].dims(), (nn::Shape{3, 1024}));
  EXPECT_EQ(trace.blocks[2].dims(), (nn::Shape{3, 2048}));
  EXPECT_EQ(trace.output.dims(), (nn::Shape{3, 3584}));
  EXPECT_EQ(model.infer(z), trace.output);
  EXPECT_EQ(model.features(z), trace.blocks[2]);
}

TEST(Alignment, EvalIsPureAndRepeatable) {
  nn::RngStream init(2);
  AlignmentModel<float> model(small_config(), init);
  std::mt19937_64 g(2);
  const Tensor z = random_tensor64({4, 6}, g).cast<float>();
  nn::RngStream rng(3);
  model.forward(z, nn::Mode::train, rng);  // moves running stats off their defaults
  const auto before = checksum(model.parameters());
  const Tensor mean0 = model.batchnorm(0).running_mean();
  const Tensor a = model.forward(z, nn::Mode::eval, rng);
  const Tensor b = model.forward(z, nn::Mode::eval, rng);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, model.infer(z));
  EXPECT_EQ(checksum(model.parameters()), before);
  EXPECT_EQ(model.batchnorm(0).running_mean(), mean0);
}

TEST(Alignment, TrainModeNeedsTwoSamples) {
  nn::RngStream init(3);
  AlignmentModel<float> model(small_config(), init);
  nn::RngStream rng(3);
  EXPECT_THROW(model.forward(Tensor({1, 6}), nn::Mode::train, rng), BatchSizeError);
  EXPECT_THROW(model.backward(Tensor({1, 5})), StateError);
  EXPECT_NO_THROW(model.forward(Tensor({1, 6}), nn::Mode::eval, rng));
}

TEST(Alignment, FrozenModelRefusesTraining) {
  nn::RngStream init(4);
  AlignmentModel<float> model(small_config(), init);
  model.freeze();
  nn::RngStream rng(4);
  EXPECT_THROW(model.forward(Tensor({4, 6}), nn::Mode::train, rng), StateError);
  EXPECT_NO_THROW(model.infer(Tensor({4, 6})));
}

TEST(GradientCheck, FullAlignmentNetwork) {
  std::mt19937_64 g(300);
  GradReport report;
  for (int trial = 0; trial < 20; ++trial) {
    AlignmentConfig cfg = small_config();
    cfg.dropout = trial % 2 ? 0.3 : 0.0;
    nn::RngStream init(trial);
    AlignmentModel<double> model(cfg, init);
    const Tensor64 z = random_tensor64({4, cfg.latent_dim}, g);
    const Tensor64 target = random_tensor64({4, cfg.embedding_dim}, g);
    const nn::RngStream mask(1000 + trial);
    auto loss = [&] {
      nn::RngStream m = mask;
      return nn::mse_loss(model.forward(z, nn::Mode::train, m), target);
    };
    zero_grads(model.parameters());
    nn::RngStream m = mask;
    model.backward(nn::mse_loss_with_grad(model.forward(z, nn::Mode::train, m), target).grad);
    for (std::size_t i = 0; i < 3; ++i) {
      // A bias feeding train-mode batch norm is cancelled by the batch mean,
      // so its gradient is exactly zero and only rounding noise remains.
      auto& bias = model.linear(i).bias();
      for (std::size_t k = 0; k < bias.value.size(); ++k) {
        const double saved = bias.value[k];
        bias.value[k] = saved + 1e-5;
        const double up = loss();
        bias.value[k] = saved - 1e-5;
        const double down = loss();
        bias.value[k] = saved;
        EXPECT_LT(std::abs(bias.grad[k]), 1e-12);
        EXPECT_LT(std::abs((up - down) / 2e-5), 1e-9);
      }
    }
    for (auto* p : model.parameters()) {
      if (p->name.find("linear.bias") != std::string::npos && p->name.find("align.out") == std::string::npos) continue;
      fd_check(p->value, p->grad, loss, report, g, 32);
    }
  }
  EXPECT_LT(report.worst, 1e-4) << report;
}

TEST(GatherTargets, RowsAndMissingIds) {
  const Tensor E({3, 2}, {0, 1, 2, 3, 4, 5});
  EXPECT_EQ(gather_targets({2, 0}, E), Tensor({2, 2}, {4, 5, 0, 1}));
  EXPECT_THROW(gather_targets({3}, E), DataError);
}

TEST(TrainAlignment, MemorizesSixteenDistinctTokens) {
  std::mt19937_64 g(5);
  AlignmentConfig cfg = small_config();
  cfg.latent_dim = 8;
  cfg.embedding_dim = 16;
  cfg.hidden = {64, 64, 64};
  cfg.dropout = 0.0;
  const Tensor latents = random_tensor64({16, 8}, g).cast<float>();
  const Tensor E = random_tensor64({16, 16}, g).cast<float>();
  std::vector<std::size_t> tokens(16);
  std::iota(tokens.begin(), tokens.end(), 0);
  const LatentTable t = table_from(latents, tokens);
  nn::RngStream rng(5);
  // Full batches of 16: 2000 epochs are 2000 optimizer steps.
  const auto result = train_alignment(t, E, cfg, {2000, 16, {}}, rng);
  for (double l : result.loss_history) EXPECT_GE(l, 0.0);
  // Memorization is judged on the train-mode objective (batch statistics).
  AlignmentModel<float> model = result.model;
  nn::RngStream r(0);
  const double final_loss = nn::mse_loss(model.forward(latents, nn::Mode::train, r), gather_targets(tokens, E));
  EXPECT_LT(final_loss, 1e-2 * result.loss_history.front());
}

TEST(TrainAlignment, SameSeedSameHistory) {
  std::mt19937_64 g(6);
  const Tensor latents = random_tensor64({20, 6}, g).cast<float>();
  const Tensor E = random_tensor64({4, 5}, g).cast<float>();
  std::vector<std::size_t> tokens(20);
  for (std::size_t i = 0; i < 20; ++i) tokens[i] = i % 4;
  const LatentTable t = table_from(latents, tokens);
  nn::RngStream a(7), b(7);
  auto ra = train_alignment(t, E, small_config(), {5, 8, {}}, a);
  auto rb = train_alignment(t, E, small_config(), {5, 8, {}}, b);
  EXPECT_EQ(ra.loss_history, rb.loss_history);
  EXPECT_EQ(checksum(ra.model.parameters()), checksum(rb.model.parameters()));
}

TEST(TrainAlignment, LearnsALinearMap) {
  std::mt19937_64 g(7);
  const std::size_t N = 256, D = 6, E = 5;
  const Tensor64 W = random_tensor64({E, D}, g);
  const Tensor latents = random_tensor64({N, D}, g).cast<float>();
  // One "token" per sample so every target is distinct.
  Tensor targets({N, E});
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t e = 0; e < E; ++e) {
      double s = 0;
      for (std::size_t d = 0; d < D; ++d) s += W.at(e, d) * latents.at(i, d);
      targets.at(i, e) = static_cast<float>(s);
    }
  std::vector<std::size_t> tokens(N);
  std::iota(tokens.begin(), tokens.end(), 0);
  AlignmentConfig cfg{D, E, {64, 64, 64}, 0.0};
  nn::RngStream rng(8);
  const auto result = train_alignment(table_from(latents, tokens), targets, cfg, {100, 32, {}}, rng);
  // Constant predictor baseline: per-dimension variance of the targets.
  double baseline = 0;
  for (std::size_t e = 0; e < E; ++e) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < N; ++i) m += targets.at(i, e);
    m /= N;
    for (std::size_t i = 0; i < N; ++i) v += (targets.at(i, e) - m) * (targets.at(i, e) - m);
    baseline += v / N;
  }
  baseline /= E;
  const double mse = nn::mse_loss(result.model.infer(latents), targets);
  EXPECT_LT(mse, 0.1 * baseline);
}

TEST(TrainAlignment, RejectsBadInputs) {
  std::mt19937_64 g(9);
  const Tensor latents = random_tensor64({4, 6}, g).cast<float>();
  nn::RngStream rng(9);
  EXPECT_THROW(train_alignment(table_from(latents, {0, 1, 2, 3}), Tensor({3, 5}), small_config(), {}, rng),
               DataError);
  EXPECT_THROW(train_alignment(table_from(latents, {0, 1, 2, 3}), Tensor({4, 7}), small_config(), {}, rng),
               ShapeError);
}

TEST(Checkpoint, AlignmentRoundTripIsByteIdentical) {
  TempDir dir;
  std::mt19937_64 g(10);
  const Tensor latents = random_tensor64({12, 6}, g).cast<float>();
  const Tensor E = random_tensor64({3, 5}, g).cast<float>();
  std::vector<std::size_t> tokens(12);
  for (std::size_t i = 0; i < 12; ++i) tokens[i] = i % 3;
  nn::RngStream rng(10);
  auto trained = train_alignment(table_from(latents, tokens), E, small_config(), {3, 4, {}}, rng);
  trained.model.freeze();
  save_alignment(dir / "a", trained.model, {1, {"S01"}, {"S02"}});
  CheckpointInfo info;
  const auto loaded = load_alignment(dir / "a", &info);
  EXPECT_TRUE(loaded.frozen());
  EXPECT_EQ(info.train_subjects, (std::vector<std::string>{"S01"}));
  EXPECT_EQ(loaded.infer(latents), trained.model.infer(latents));
  save_alignment(dir / "b", loaded, info);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    EXPECT_EQ(slurp(entry.path()), slurp(dir.path() / "b" / entry.path().filename())) << entry.path();
  }
  EXPECT_THROW(load_autoencoder(dir / "a"), DataError);
}
