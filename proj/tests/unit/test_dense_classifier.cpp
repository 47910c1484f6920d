#include <doctest.h>

#include <filesystem>
#include <random>

#include "gazefake/dense_classifier.hpp"
#include "gazefake/errors.hpp"

using namespace gazefake;

namespace {

Signature random_signature(int omega, Label label, std::mt19937_64& rng, std::string id = "v") {
    std::uniform_real_distribution<float> u(0.f, 0.9f);
    Signature s;
    s.omega = omega;
    s.video_id = std::move(id);
    s.label = label;
    s.tensor.resize(Signature::size_for(omega));
    for (auto& v : s.tensor) v = u(rng);
    return s;
}

// Fakes are brighter on the first few rows; a linear rule separates the classes.
std::vector<Signature> separable_set(int omega, int per_class, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Signature> out;
    for (int i = 0; i < per_class; ++i) {
        for (Label label : {Label::Real, Label::Fake}) {
            Signature s = random_signature(omega, label, rng, "v" + std::to_string(i));
            for (int r = 0; r < 4; ++r)
                for (int t = 0; t < omega; ++t)
                    for (int c = 0; c < 3; ++c) {
                        float& v = s.at(r, t, c);
                        v = label == Label::Fake ? 0.5f + 0.5f * v : 0.5f * v;
                    }
            out.push_back(std::move(s));
        }
    }
    return out;
}

TrainConfig small_config(std::uint64_t seed = 1) {
    TrainConfig c;
    c.seed = seed;
    c.omega = 16;
    c.epochs = 10;
    return c;
}

}  // namespace

TEST_CASE("architecture and initialization") {
    const ModelState m = init_model(32, small_config());
    const int in = 40 * 32 * 3;
    CHECK(m.input_dim() == in);
    CHECK(m.dense0_w.rows() == 256);
    CHECK(m.dense0_w.cols() == in);
    CHECK(m.dense1_w.rows() == 128);
    CHECK(m.dense2_w.rows() == 64);
    CHECK(m.dense3_w.rows() == 2);
    CHECK(m.dense3_w.cols() == 64);
    const std::size_t expected = 2u * in + (in * 256u + 256) + 2u * 256 + (256u * 128 + 128) + 2u * 128 +
                                 (128u * 64 + 64) + (64u * 2 + 2);
    CHECK(m.parameter_count() == expected);
    const double lim = std::sqrt(6.0 / (in + 256));
    CHECK(m.dense0_w.cwiseAbs().maxCoeff() <= lim);
    CHECK(m.dense0_w.cwiseAbs().maxCoeff() > 0.9 * lim);
    CHECK(m.dense0_b.isZero());
    CHECK(m.bn1_gamma.isOnes());
    CHECK(m.bn1_var.isOnes());
    CHECK(m.trainable().size() == 14);
    CHECK(m.tensors().size() == 20);
    CHECK_THROWS_AS(init_model(32, [] { auto c = small_config(); c.dropout_p = 1.0; return c; }()), UsageError);
    CHECK_THROWS_AS(init_model(32, [] { auto c = small_config(); c.batch_size = 0; return c; }()), UsageError);
}

TEST_CASE("zero signature through a fresh model gives one half") {
    ModelState m = init_model(16, small_config());
    Signature zero;
    zero.omega = 16;
    zero.tensor.assign(Signature::size_for(16), 0.f);
    const auto [s_real, s_fake] = forward(m, zero, Mode::Infer);
    CHECK(std::abs(s_real - 0.5) < 1e-6);
    CHECK(std::abs(s_fake - 0.5) < 1e-6);
    CHECK(predict_sequence(m, zero) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("outputs lie strictly inside (0,1)") {
    std::mt19937_64 rng(4);
    ModelState m = init_model(16, small_config());
    for (int i = 0; i < 20; ++i) {
        const Signature s = random_signature(16, Label::Real, rng);
        for (Mode mode : {Mode::Infer, Mode::Train}) {
            const auto [a, b] = forward(m, s, mode);
            CHECK(a > 0.0);
            CHECK(a < 1.0);
            CHECK(b > 0.0);
            CHECK(b < 1.0);
        }
        const double p = predict_sequence(m, s);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("p_fake normalizes the two outputs") {
    ModelState m = init_model(16, small_config());
    m.dense3_w.setZero();
    m.dense3_b(0, 0) = static_cast<float>(std::log(0.1 / 0.9));
    m.dense3_b(1, 0) = static_cast<float>(std::log(0.9 / 0.1));
    std::mt19937_64 rng(5);
    const Signature s = random_signature(16, Label::Real, rng);
    const auto [a, b] = forward(m, s, Mode::Infer);
    CHECK(a == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(b == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(predict_sequence(m, s) == doctest::Approx(b / (a + b + 1e-12)).epsilon(1e-15));
    CHECK(predict_sequence(m, s) == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("train-mode forward is reproducible after resetting the generator") {
    std::mt19937_64 rng(6);
    ModelState m = init_model(16, small_config());
    std::vector<Signature> batch;
    for (int i = 0; i < 8; ++i) batch.push_back(random_signature(16, Label::Real, rng));
    std::vector<const Signature*> ptrs;
    for (const auto& s : batch) ptrs.push_back(&s);
    const auto x = to_batch(ptrs, 16);
    m.reset_dropout_rng();
    const Eigen::MatrixXd first = forward_batch(m, x, {Mode::Train, true, false});
    const Eigen::MatrixXd again = forward_batch(m, x, {Mode::Train, true, false});
    m.reset_dropout_rng();
    const Eigen::MatrixXd second = forward_batch(m, x, {Mode::Train, true, false});
    CHECK(first == second);
    CHECK(first != again);
}

TEST_CASE("shape mismatch") {
    std::mt19937_64 rng(7);
    ModelState m = init_model(64, small_config());
    const Signature s = random_signature(32, Label::Real, rng);
    CHECK_THROWS_AS(forward(m, s, Mode::Infer), ShapeMismatch);
    CHECK_THROWS_AS(predict_sequence(m, s), ShapeMismatch);
}

TEST_CASE("gradient check") {
    std::mt19937_64 rng(8);
    ModelState m = init_model(16, small_config(3));
    std::vector<Signature> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(random_signature(16, i % 2 ? Label::Fake : Label::Real, rng));

    const double err = gradient_check(m, batch);
    CHECK(err <= 1e-3);

    GradientCheckOptions faulty;
    faulty.corrupt = [](std::vector<Eigen::MatrixXd>& g) { g[6] *= 1.1; };
    CHECK(gradient_check(m, batch, faulty) > 1e-2);

    GradientCheckOptions swapped;
    swapped.corrupt = [](std::vector<Eigen::MatrixXd>& g) { g[9] = -g[9]; };
    CHECK(gradient_check(m, batch, swapped) > 1e-2);

}

TEST_CASE("gradient check on a single sample") {
    // One sample normalizes to the batch-norm shift, which sits on the activation kink at zero;
    // a linear activation removes the kink.
    std::mt19937_64 rng(18);
    auto cfg = small_config(3);
    cfg.leaky_slope = 1.0;
    ModelState m = init_model(16, cfg);
    const std::vector<Signature> one{random_signature(16, Label::Fake, rng)};
    CHECK(gradient_check(m, one) <= 1e-3);
    auto g = loss_and_gradients(m, to_batch(std::vector<const Signature*>{&one[0]}, 16), std::vector<int>{1},
                                {Mode::Train, false, false}).grads;
    CHECK(g[2].isZero());
    CHECK(g[6].isZero());
    CHECK_FALSE(g[13].isZero());
}

TEST_CASE("gradient check after some training") {
    auto data = separable_set(16, 16, 9);
    auto cfg = small_config(9);
    cfg.epochs = 3;
    cfg.learning_rate = 1e-3;
    TrainResult r = train(data, cfg);
    std::vector<Signature> batch(data.begin(), data.begin() + 6);
    CHECK(gradient_check(r.model, batch) <= 1e-3);
}

TEST_CASE("inverted dropout keeps the expectation") {
    std::mt19937_64 rng(10);
    const int units = 32, masks = 10000;
    Eigen::VectorXd value = Eigen::VectorXd::LinSpaced(units, 0.5, 2.0);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(units);
    for (int i = 0; i < masks; ++i) sum += inverted_dropout_mask(units, 1, 0.3, rng).col(0).cwiseProduct(value);
    const Eigen::VectorXd mean = sum / masks;
    for (int u = 0; u < units; ++u) CHECK(std::abs(mean(u) - value(u)) / value(u) < 0.02);

    const Eigen::MatrixXd one = inverted_dropout_mask(1000, 10, 0.3, rng);
    for (Eigen::Index i = 0; i < one.size(); ++i) {
        const double v = one.data()[i];
        CHECK((v == 0.0 || v == doctest::Approx(1.0 / 0.7)));
    }
}

TEST_CASE("batch-norm running statistics converge to the batch statistics") {
    std::mt19937_64 rng(11);
    ModelState m = init_model(16, small_config());
    std::vector<Signature> data;
    for (int i = 0; i < 64; ++i) data.push_back(random_signature(16, Label::Real, rng));
    std::vector<const Signature*> ptrs;
    for (const auto& s : data) ptrs.push_back(&s);
    const auto x = to_batch(ptrs, 16);
    for (int i = 0; i < 1500; ++i) forward_batch(m, x, {Mode::Train, false, true});
    const Eigen::MatrixXd train_out = forward_batch(m, x, {Mode::Train, false, false});
    const Eigen::MatrixXd infer_out = forward_batch(m, x, {Mode::Infer, false, false});
    CHECK((train_out - infer_out).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("adam step") {
    ModelState m = init_model(16, small_config());
    m.cfg.learning_rate = 0.01;
    const float before = m.dense3_b(1, 0);
    std::vector<Eigen::MatrixXd> g;
    for (const auto& e : m.trainable()) g.push_back(Eigen::MatrixXd::Zero(e.value->rows(), e.value->cols()));
    g[13](1, 0) = 0.5;
    adam_step(m, g);
    CHECK(m.adam_step == 1);
    CHECK(m.dense3_b(1, 0) == doctest::Approx(before - 0.01 * 0.5 / (0.5 + 1e-8)).epsilon(1e-6));
    CHECK(m.adam_m[13](1, 0) == doctest::Approx(0.05));
    CHECK(m.adam_v[13](1, 0) == doctest::Approx(0.00025));
    CHECK(m.dense3_b(0, 0) == 0.f);
}

TEST_CASE("training on a separable set") {
    const auto data = separable_set(16, 200, 12);
    auto cfg = small_config(12);
    cfg.epochs = 10;
    TrainResult r = train(data, cfg, data);
    REQUIRE(r.epoch_loss.size() == 10);
    for (std::size_t i = 1; i < r.epoch_loss.size(); ++i) CHECK(r.epoch_loss[i] < r.epoch_loss[i - 1]);
    REQUIRE(r.validation.size() == 1);
    CHECK(r.validation[0].epoch == 10);
    const auto probs = predict_sequences(r.model, data);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) correct += (probs[i] > 0.5) == (data[i].label == Label::Fake);
    CHECK(static_cast<double>(correct) / data.size() >= 0.99);
    CHECK(r.validation[0].sequence_accuracy >= 0.99);
}

TEST_CASE("training is deterministic") {
    const auto data = separable_set(16, 20, 13);
    const auto a = train(data, small_config(13));
    const auto b = train(data, small_config(13));
    CHECK(encode_model(a.model) == encode_model(b.model));
    CHECK(a.epoch_loss == b.epoch_loss);
    const auto c = train(data, small_config(14));
    CHECK(encode_model(a.model) != encode_model(c.model));
}

TEST_CASE("training preconditions") {
    auto data = separable_set(16, 4, 15);
    std::vector<Signature> reals;
    for (const auto& s : data)
        if (s.label == Label::Real) reals.push_back(s);
    CHECK_THROWS_AS(train(reals, small_config()), SingleClassDataset);
    std::mt19937_64 rng(1);
    auto mixed = data;
    mixed.push_back(random_signature(32, Label::Fake, rng));
    CHECK_THROWS_AS(train(mixed, small_config()), MixedOmega);
    CHECK_THROWS_AS(train(std::vector<Signature>{}, small_config()), UsageError);
}

TEST_CASE("model persistence") {
    const auto data = separable_set(16, 8, 16);
    TrainResult r = train(data, small_config(16));
    const auto path = std::filesystem::temp_directory_path() / "gazefake_model_rt.gzmd";
    save_model(r.model, path);
    ModelState back = load_model(path);
    CHECK(encode_model(back) == encode_model(r.model));
    CHECK(back.omega == 16);
    CHECK(back.seed == 16);
    CHECK(back.adam_step == r.model.adam_step);
    CHECK(back.dropout_rng == r.model.dropout_rng);
    CHECK(predict_sequences(back, data) == predict_sequences(r.model, data));
    const auto [a0, a1] = forward(r.model, data[0], Mode::Train);
    const auto [b0, b1] = forward(back, data[0], Mode::Train);
    CHECK(a0 == b0);
    CHECK(a1 == b1);

    const std::string bytes = encode_model(r.model);
    CHECK_THROWS_AS(decode_model(bytes.substr(0, bytes.size() - 3)), IoError);
    std::string bad = bytes;
    bad[1] = 'X';
    CHECK_THROWS_AS(decode_model(bad), BadMagic);
    std::string ver = bytes;
    ver[4] = 9;
    CHECK_THROWS_AS(decode_model(ver), VersionMismatch);
    CHECK_THROWS_AS(load_model("/nonexistent_gazefake/m.gzmd"), IoError);
    std::filesystem::remove(path);

    std::mt19937_64 rng(2);
    ModelState wide = init_model(64, small_config());
    CHECK_THROWS_AS(predict_sequence(decode_model(encode_model(wide)), random_signature(32, Label::Real, rng)),
                    ShapeMismatch);
}
