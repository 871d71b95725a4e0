#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fixture_corpus.hpp"
#include "trace/dataset_ops.hpp"
#include "trace/error.hpp"
#include "trace/rng.hpp"
#include "trace/single_model.hpp"

using namespace trace;

namespace {

template <typename Fn>
Errc thrown_code(Fn&& fn) {
    try {
        fn();
    } catch (const TraceError& e) {
        return e.code();
    }
    FAIL("expected a TraceError");
    return Errc::MissingManifest;
}

LabeledPair make_pair(const std::string& nl, const std::string& pl, int label) {
    LabeledPair p;
    p.nl_text = nl;
    p.pl_text = pl;
    p.label = label;
    return p;
}

ModelParams make_random_params(const std::vector<LabeledPair>& pairs, std::uint64_t seed) {
    EncoderConfig cfg;
    cfg.max_seq_len = 16;
    cfg.embed_dim = 3;
    ModelParams p;
    p.encoder = cfg;
    p.vocab = Vocabulary::build(pairs);
    Rng rng(seed);
    p.embedding = Embedding::init(p.vocab.size(), cfg.embed_dim, rng);
    p.W.resize(2 * static_cast<std::size_t>(cfg.embed_dim));
    p.b.resize(2);
    for (double& w : p.W) w = rng.uniform(-0.7, 0.7);
    for (double& b : p.b) b = rng.uniform(-0.3, 0.3);
    return p;
}

std::vector<LabeledPair> gradient_batch() {
    return {
        make_pair("alpha beta gamma", "alphaHandler beta_run", 1),
        make_pair("beta delta", "deltaService gamma", 0),
        make_pair("alpha alpha delta", "omega alpha", 1),
    };
}

}  // namespace

TEST_CASE("cross-entropy worked examples") {
    CHECK(cross_entropy({10.0, -10.0}, 1) ==
          doctest::Approx(20.000000002061153).epsilon(1e-14));
    CHECK(cross_entropy({0.0, 0.0}, 0) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
    CHECK(cross_entropy({0.0, 0.0}, 1) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
    // log-space evaluation stays finite at extreme logits
    CHECK(cross_entropy({1000.0, -1000.0}, 0) == 0.0);
    CHECK(cross_entropy({1000.0, -1000.0}, 1) == 2000.0);
    // swapping logits and label leaves the loss unchanged
    CHECK(cross_entropy({1.25, -0.5}, 0) ==
          doctest::Approx(cross_entropy({-0.5, 1.25}, 1)).epsilon(1e-15));
    CHECK(thrown_code([] { cross_entropy({0.0, 0.0}, 2); }) == Errc::ValidationError);
}

TEST_CASE("adam single-step worked example") {
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    std::vector<double> theta = {0.0};
    AdamState state;

    adam_step(theta, {1.0}, state, cfg, 1, "theta");
    CHECK(theta[0] == doctest::Approx(-0.09999999900000002).epsilon(1e-12));

    adam_step(theta, {1.0}, state, cfg, 2, "theta");
    CHECK(theta[0] == doctest::Approx(-0.19999999799999935).epsilon(1e-12));

    SUBCASE("negative gradient moves the parameter up") {
        std::vector<double> up = {0.0};
        AdamState s2;
        adam_step(up, {-1.0}, s2, cfg, 1, "up");
        CHECK(up[0] > 0.0);
    }
    SUBCASE("error paths") {
        std::vector<double> t2 = {0.0, 0.0};
        AdamState s3;
        CHECK(thrown_code([&] { adam_step(t2, {1.0}, s3, cfg, 1, "t2"); }) == Errc::LengthMismatch);
        CHECK(thrown_code([&] { adam_step(theta, {1.0}, state, cfg, 0, "theta"); }) ==
              Errc::ConfigError);
        const double nan = std::nan("");
        CHECK(thrown_code([&] { adam_step(theta, {nan}, state, cfg, 3, "theta"); }) ==
              Errc::NonFinite);
    }
}

TEST_CASE("analytic batch gradients match central finite differences") {
    const std::vector<LabeledPair> batch = gradient_batch();

    for (std::uint64_t seed : {7ULL, 101ULL, 20260821ULL}) {
        CAPTURE(seed);
        const ModelParams params = make_random_params(batch, seed);
        const BatchGradients analytic = batch_gradients(batch, params);
        REQUIRE(analytic.w.size() == params.W.size());
        REQUIRE(analytic.b.size() == params.b.size());
        REQUIRE(analytic.embedding.size() == params.embedding.values.size());
        CHECK(std::isfinite(analytic.loss));

        const double h = 1e-5;
        ModelParams probe = params;  // mutated in place coordinate by coordinate
        const BatchGradients& base = analytic;
        for (std::size_t i = 0; i < probe.W.size(); ++i) {
            const double saved = probe.W[i];
            probe.W[i] = saved + h;
            const double up = batch_gradients(batch, probe).loss;
            probe.W[i] = saved - h;
            const double down = batch_gradients(batch, probe).loss;
            probe.W[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double denom = std::max({std::abs(base.w[i]), std::abs(fd), 1e-6});
            CHECK(std::abs(base.w[i] - fd) / denom < 1e-4);
        }
        for (std::size_t i = 0; i < probe.b.size(); ++i) {
            const double saved = probe.b[i];
            probe.b[i] = saved + h;
            const double up = batch_gradients(batch, probe).loss;
            probe.b[i] = saved - h;
            const double down = batch_gradients(batch, probe).loss;
            probe.b[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double denom = std::max({std::abs(base.b[i]), std::abs(fd), 1e-6});
            CHECK(std::abs(base.b[i] - fd) / denom < 1e-4);
        }
        double max_emb_grad = 0.0;
        for (std::size_t i = 0; i < probe.embedding.values.size(); ++i) {
            const double saved = probe.embedding.values[i];
            probe.embedding.values[i] = saved + h;
            const double up = batch_gradients(batch, probe).loss;
            probe.embedding.values[i] = saved - h;
            const double down = batch_gradients(batch, probe).loss;
            probe.embedding.values[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double denom = std::max({std::abs(base.embedding[i]), std::abs(fd), 1e-6});
            CHECK(std::abs(base.embedding[i] - fd) / denom < 1e-4);
            max_emb_grad = std::max(max_emb_grad, std::abs(base.embedding[i]));
        }
        CHECK(max_emb_grad > 1e-8);  // guards against a trivially-zero comparison

        // the PAD row is never pooled, so its gradient is exactly zero
        for (int j = 0; j < probe.embedding.dim; ++j) {
            CHECK(base.embedding[static_cast<std::size_t>(Vocabulary::kPad * probe.embedding.dim +
                                                          j)] == 0.0);
        }
    }
}

TEST_CASE("batch_gradients input validation") {
    const std::vector<LabeledPair> batch = gradient_batch();
    ModelParams params = make_random_params(batch, 5);
    CHECK(thrown_code([&] { batch_gradients({}, params); }) == Errc::NotEnoughData);
    params.encoder.backend = EncoderBackend::Remote;
    params.encoder.remote_endpoint = "http://127.0.0.1:9/embed";
    params.encoder.remote_dimension = 3;
    CHECK(thrown_code([&] { batch_gradients(batch, params); }) == Errc::ConfigError);
}

TEST_CASE("training on separable pairs reaches high validation accuracy deterministically") {
    const std::vector<LabeledPair> pairs = fixtures::separable_pairs();
    const DatasetSplit splits = split(pairs, 2014);
    REQUIRE(splits.train.size() == 160);
    REQUIRE(splits.val.size() == 20);
    REQUIRE(splits.test.size() == 20);

    TrainConfig tc;  // desk defaults: lr 1e-2, batch 8, epochs 20, seed 2014
    EncoderConfig ec;
    ec.max_seq_len = 32;
    ec.embed_dim = 16;

    const TrainResult result = train(splits, tc, ec);
    REQUIRE(result.epochs.size() == 20);
    CHECK(result.epochs.front().epoch == 1);
    CHECK(result.epochs.back().epoch == 20);

    double best_acc = 0.0;
    for (const EpochLog& log : result.epochs) {
        CHECK(std::isfinite(log.train_loss));
        best_acc = std::max(best_acc, log.val_accuracy);
    }
    CHECK(best_acc >= 0.95);
    CHECK(result.epochs.back().train_loss < result.epochs.front().train_loss);

    SUBCASE("checkpoint keeps the first epoch attaining the best validation F1") {
        double best_f1 = -1.0;
        int best_epoch = 0;
        for (const EpochLog& log : result.epochs) {
            if (log.val_f1 > best_f1) {
                best_f1 = log.val_f1;
                best_epoch = log.epoch;
            }
        }
        CHECK(result.best_epoch == best_epoch);
        CHECK(result.best_val_f1 == best_f1);
    }

    SUBCASE("checkpointed model generalizes to the held-out test split") {
        std::size_t correct = 0;
        for (const LabeledPair& p : splits.test) {
            if (predict(p, result.params) == p.label) ++correct;
        }
        CHECK(static_cast<double>(correct) / static_cast<double>(splits.test.size()) >= 0.9);
    }

    SUBCASE("retraining with the same seed is bit-identical") {
        const TrainResult again = train(splits, tc, ec);
        REQUIRE(again.epochs.size() == result.epochs.size());
        for (std::size_t i = 0; i < result.epochs.size(); ++i) {
            CHECK(again.epochs[i].train_loss == result.epochs[i].train_loss);
            CHECK(again.epochs[i].val_accuracy == result.epochs[i].val_accuracy);
            CHECK(again.epochs[i].val_f1 == result.epochs[i].val_f1);
        }
        CHECK(again.best_epoch == result.best_epoch);
        CHECK(again.params.W == result.params.W);
        CHECK(again.params.b == result.params.b);
        CHECK(again.params.embedding.values == result.params.embedding.values);
    }

    SUBCASE("a different seed changes the trajectory") {
        TrainConfig other = tc;
        other.seed = 2015;
        const TrainResult again = train(splits, other, ec);
        CHECK(again.params.W != result.params.W);
    }
}

TEST_CASE("prediction ties resolve to the negative class") {
    const std::vector<LabeledPair> batch = gradient_batch();
    ModelParams params = make_random_params(batch, 3);
    std::fill(params.W.begin(), params.W.end(), 0.0);
    std::fill(params.b.begin(), params.b.end(), 0.0);
    const Forward fwd = forward(batch[0], params);
    CHECK(fwd.probs[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(predict(batch[0], params) == 0);
}

TEST_CASE("model save/load round-trip preserves parameters and predictions") {
    const std::vector<LabeledPair> batch = gradient_batch();
    const ModelParams params = make_random_params(batch, 11);
    const auto dir = fixtures::fresh_temp_dir("model");
    const auto file = dir / "model.json";

    save_model(params, file);
    const ModelParams loaded = load_model(file);

    CHECK(loaded.encoder.backend == params.encoder.backend);
    CHECK(loaded.encoder.max_seq_len == params.encoder.max_seq_len);
    CHECK(loaded.encoder.embed_dim == params.encoder.embed_dim);
    CHECK(loaded.vocab.token_to_index == params.vocab.token_to_index);
    CHECK(loaded.embedding.rows == params.embedding.rows);
    CHECK(loaded.embedding.dim == params.embedding.dim);
    CHECK(loaded.embedding.values == params.embedding.values);
    CHECK(loaded.W == params.W);
    CHECK(loaded.b == params.b);
    for (const LabeledPair& p : batch) {
        CHECK(predict(p, loaded) == predict(p, params));
        const Forward a = forward(p, params);
        const Forward b = forward(p, loaded);
        CHECK(a.logits[0] == b.logits[0]);
        CHECK(a.logits[1] == b.logits[1]);
    }

    SUBCASE("load errors are typed") {
        CHECK(thrown_code([&] { load_model(dir / "missing.json"); }) == Errc::IoError);
        {
            std::ofstream junk(dir / "junk.json");
            junk << "{not json";
        }
        CHECK(thrown_code([&] { load_model(dir / "junk.json"); }) == Errc::ParseError);
        {
            std::ofstream wrong(dir / "wrong.json");
            wrong << R"({"format": "other/9"})";
        }
        CHECK(thrown_code([&] { load_model(dir / "wrong.json"); }) == Errc::ParseError);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("train config and split preconditions") {
    TrainConfig tc;
    CHECK_NOTHROW(tc.validate());
    tc.learning_rate = 0.0;
    CHECK(thrown_code([&] { tc.validate(); }) == Errc::ConfigError);
    tc = TrainConfig{};
    tc.batch_size = 0;
    CHECK(thrown_code([&] { tc.validate(); }) == Errc::ConfigError);
    tc = TrainConfig{};
    tc.epochs = 0;
    CHECK(thrown_code([&] { tc.validate(); }) == Errc::ConfigError);

    DatasetSplit empty_val;
    empty_val.train = gradient_batch();
    EncoderConfig ec;
    CHECK(thrown_code([&] { train(empty_val, TrainConfig{}, ec); }) == Errc::NotEnoughData);
}
