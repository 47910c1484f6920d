#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gazefake/signature.hpp"

namespace gazefake {

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 32;
    int epochs = 100;
    int validate_every = 10;
    double dropout_p = 0.3;
    double leaky_slope = 0.2;
    std::uint64_t seed = 0;
    int omega = 32;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;
inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.99;

inline constexpr int kHidden1 = 256;
inline constexpr int kHidden2 = 128;
inline constexpr int kHidden3 = 64;
inline constexpr int kOutputs = 2;  // (s_real, s_fake)

enum class Mode { Train, Infer };

// Weights of the network
//   Flatten -> BN -> Dense(256) -> BN -> LeakyReLU -> Dropout -> Dense(128) -> BN -> LeakyReLU
//   -> Dropout -> Dense(64) -> Dense(2) -> Sigmoid
// plus running statistics, Adam moments and the dropout generator. All tensors are float32;
// vectors are stored as n x 1 matrices, dense weights as out x in.
struct ModelState {
    TrainConfig cfg;
    int omega = 0;
    std::uint64_t seed = 0;

    Eigen::MatrixXf bn0_gamma, bn0_beta, bn0_mean, bn0_var;
    Eigen::MatrixXf dense0_w, dense0_b;
    Eigen::MatrixXf bn1_gamma, bn1_beta, bn1_mean, bn1_var;
    Eigen::MatrixXf dense1_w, dense1_b;
    Eigen::MatrixXf bn2_gamma, bn2_beta, bn2_mean, bn2_var;
    Eigen::MatrixXf dense2_w, dense2_b;
    Eigen::MatrixXf dense3_w, dense3_b;

    // Adam first/second moments, aligned with trainable().
    std::vector<Eigen::MatrixXf> adam_m, adam_v;
    std::int64_t adam_step = 0;

    std::mt19937_64 dropout_rng;

    int input_dim() const { return kSignatureRows * omega * kSignatureChannels; }

    template <typename M>
    struct BasicEntry {
        std::string name;
        M* value;
    };
    using Entry = BasicEntry<Eigen::MatrixXf>;
    using ConstEntry = BasicEntry<const Eigen::MatrixXf>;

    // Trainable tensors in a fixed order.
    std::vector<Entry> trainable();
    std::vector<ConstEntry> trainable() const;
    // Trainable tensors followed by the batch-norm running statistics.
    std::vector<Entry> tensors();
    std::vector<ConstEntry> tensors() const;

    void reset_dropout_rng();
    std::size_t parameter_count() const;
};

// Glorot-uniform weights, zero biases, BN scale 1 / shift 0, running mean 0 / variance 1.
ModelState init_model(int omega, const TrainConfig& cfg);

// Keep-or-drop scales (0 or 1/(1-p)) with keep probability 1-p, column by column from rng.
Eigen::MatrixXd inverted_dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng);

// One column per sample; rows follow the signature's [row][col][channel] order.
Eigen::MatrixXd to_batch(std::span<const Signature* const> sigs, int omega);

struct BatchOptions {
    Mode mode = Mode::Infer;
    bool dropout = true;               // only consulted in train mode
    bool update_running_stats = false; // only consulted in train mode
};

// Returns 2 x B sigmoid outputs. Throws ShapeMismatch when the batch height is wrong.
Eigen::MatrixXd forward_batch(ModelState& model, const Eigen::MatrixXd& x, const BatchOptions& opt);

// Single-signature pass. Train mode uses the (single-sample) batch statistics and dropout from
// the model's generator; running statistics are left alone.
std::pair<double, double> forward(ModelState& model, const Signature& sig, Mode mode);

// p_fake = s_fake / (s_real + s_fake + 1e-12), infer mode.
double predict_sequence(const ModelState& model, const Signature& sig);
std::vector<double> predict_sequences(const ModelState& model, std::span<const Signature> sigs);

// Mean binary cross-entropy of the sigmoid outputs against one-hot targets (col 0 real, 1 fake).
double bce_loss(const Eigen::MatrixXd& outputs, std::span<const int> fake_targets);

// Loss and gradients (aligned with trainable()) for one batch in train mode.
struct LossAndGrad {
    double loss = 0.0;
    Eigen::MatrixXd outputs;
    std::vector<Eigen::MatrixXd> grads;
};
LossAndGrad loss_and_gradients(ModelState& model, const Eigen::MatrixXd& x, std::span<const int> fake_targets,
                               const BatchOptions& opt);

void adam_step(ModelState& model, const std::vector<Eigen::MatrixXd>& grads);

struct ValidationPoint {
    int epoch = 0;
    double loss = 0.0;
    double sequence_accuracy = 0.0;
};

struct TrainResult {
    ModelState model;
    std::vector<double> epoch_loss;           // mean training loss per epoch
    std::vector<ValidationPoint> validation;  // every cfg.validate_every epochs when a set is given
};

// Throws SingleClassDataset, MixedOmega, UsageError (empty set, unknown labels, bad config).
TrainResult train(std::span<const Signature> dataset, const TrainConfig& cfg,
                  std::span<const Signature> validation = {});

struct GradientCheckOptions {
    int min_samples = 200;
    double h = 1e-3;
    double abs_floor = 1e-8;
    std::uint64_t seed = 7;
    // Applied to the analytic gradients before comparison; used for fault injection.
    std::function<void(std::vector<Eigen::MatrixXd>&)> corrupt;
};

// Central finite differences against backprop in train mode with dropout disabled, on the given
// batch (a single signature gives the batch-of-one case). Returns the max relative error over a
// random subsample of parameter entries; entries where both gradients are below abs_floor count
// as exact.
double gradient_check(ModelState& model, std::span<const Signature> batch, const GradientCheckOptions& opt = {});

// .gzmd container. Throws IoError, BadMagic, VersionMismatch.
void save_model(const ModelState& model, const std::filesystem::path& path);
ModelState load_model(const std::filesystem::path& path);
std::string encode_model(const ModelState& model);
ModelState decode_model(std::string_view bytes);

}  // namespace gazefake
