#include "gazefake/dense_classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gazefake/errors.hpp"

namespace gazefake {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Per batch-norm layer values kept for the backward pass.
struct BnCache {
    MatrixXd xhat;
    VectorXd inv_std;
};

struct Cache {
    BnCache bn0;
    MatrixXd h0;      // bn0 output
    BnCache bn1;
    MatrixXd h1;      // bn1 output (pre-activation)
    MatrixXd mask1;   // dropout scale per unit (0 or 1/keep), empty when disabled
    MatrixXd a1;      // after activation + dropout
    BnCache bn2;
    MatrixXd h2;
    MatrixXd mask2;
    MatrixXd a2;
    MatrixXd z3;      // dense2 output
    MatrixXd out;     // sigmoid
    VectorXd batch_mean[3];
    VectorXd batch_var[3];
    MatrixXd w[4];    // dense weights widened to double
};

MatrixXd dense(const Eigen::MatrixXf& w, const Eigen::MatrixXf& b, const MatrixXd& x, MatrixXd& wide) {
    wide = w.cast<double>();
    MatrixXd z(w.rows(), x.cols());
    z.noalias() = wide * x;
    z.colwise() += b.col(0).cast<double>();
    return z;
}

MatrixXd batch_norm(const MatrixXd& x, const Eigen::MatrixXf& gamma, const Eigen::MatrixXf& beta,
                    const Eigen::MatrixXf& run_mean, const Eigen::MatrixXf& run_var, bool batch_stats,
                    BnCache* cache, VectorXd* mean_out, VectorXd* var_out) {
    VectorXd mean, var;
    if (batch_stats) {
        mean = x.rowwise().mean();
        var = (x.colwise() - mean).array().square().rowwise().mean();
    } else {
        mean = run_mean.col(0).cast<double>();
        var = run_var.col(0).cast<double>();
    }
    const VectorXd inv_std = (var.array() + kBatchNormEps).rsqrt();
    MatrixXd xhat = (x.colwise() - mean).array().colwise() * inv_std.array();
    MatrixXd y = xhat.array().colwise() * gamma.col(0).cast<double>().array();
    y.colwise() += beta.col(0).cast<double>();
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = inv_std;
    }
    if (mean_out) *mean_out = std::move(mean);
    if (var_out) *var_out = std::move(var);
    return y;
}

MatrixXd leaky(const MatrixXd& x, double slope) {
    return x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

MatrixXd sigmoid(const MatrixXd& z) {
    return z.unaryExpr([](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
    });
}

MatrixXd run(const ModelState& m, const MatrixXd& x, const BatchOptions& opt, std::mt19937_64* rng, Cache* cache) {
    if (x.rows() != m.input_dim())
        throw ShapeMismatch("input of height " + std::to_string(x.rows()) + ", model expects " +
                            std::to_string(m.input_dim()) + " (omega " + std::to_string(m.omega) + ")");
    const bool train = opt.mode == Mode::Train;
    const bool drop = train && opt.dropout && m.cfg.dropout_p > 0.0;
    const double slope = m.cfg.leaky_slope;

    Cache local;
    Cache& c = cache ? *cache : local;

    MatrixXd h0 = batch_norm(x, m.bn0_gamma, m.bn0_beta, m.bn0_mean, m.bn0_var, train, &c.bn0, &c.batch_mean[0],
                             &c.batch_var[0]);
    MatrixXd z1 = dense(m.dense0_w, m.dense0_b, h0, c.w[0]);
    MatrixXd h1 = batch_norm(z1, m.bn1_gamma, m.bn1_beta, m.bn1_mean, m.bn1_var, train, &c.bn1, &c.batch_mean[1],
                             &c.batch_var[1]);
    MatrixXd a1 = leaky(h1, slope);
    if (drop) {
        c.mask1 = inverted_dropout_mask(a1.rows(), a1.cols(), m.cfg.dropout_p, *rng);
        a1.array() *= c.mask1.array();
    } else {
        c.mask1.resize(0, 0);
    }
    MatrixXd z2 = dense(m.dense1_w, m.dense1_b, a1, c.w[1]);
    MatrixXd h2 = batch_norm(z2, m.bn2_gamma, m.bn2_beta, m.bn2_mean, m.bn2_var, train, &c.bn2, &c.batch_mean[2],
                             &c.batch_var[2]);
    MatrixXd a2 = leaky(h2, slope);
    if (drop) {
        c.mask2 = inverted_dropout_mask(a2.rows(), a2.cols(), m.cfg.dropout_p, *rng);
        a2.array() *= c.mask2.array();
    } else {
        c.mask2.resize(0, 0);
    }
    MatrixXd z3 = dense(m.dense2_w, m.dense2_b, a2, c.w[2]);
    MatrixXd out = sigmoid(dense(m.dense3_w, m.dense3_b, z3, c.w[3]));

    if (cache) {
        c.h0 = std::move(h0);
        c.h1 = std::move(h1);
        c.a1 = std::move(a1);
        c.h2 = std::move(h2);
        c.a2 = std::move(a2);
        c.z3 = std::move(z3);
        c.out = out;
    }
    return out;
}

void update_running(Eigen::MatrixXf& run_mean, Eigen::MatrixXf& run_var, const VectorXd& mean, const VectorXd& var) {
    const double k = kBatchNormMomentum;
    run_mean.col(0) = (k * run_mean.col(0).cast<double>() + (1.0 - k) * mean).cast<float>();
    run_var.col(0) = (k * run_var.col(0).cast<double>() + (1.0 - k) * var).cast<float>();
}

// Returns dL/dx for y = BN(x) with batch statistics; fills dgamma/dbeta.
MatrixXd batch_norm_backward(const MatrixXd& dy, const BnCache& c, const Eigen::MatrixXf& gamma, MatrixXd& dgamma,
                             MatrixXd& dbeta) {
    const double n = static_cast<double>(dy.cols());
    dgamma = (dy.array() * c.xhat.array()).rowwise().sum().matrix();
    dbeta = dy.rowwise().sum();
    const MatrixXd dxhat = dy.array().colwise() * gamma.col(0).cast<double>().array();
    const VectorXd sum_dxhat = dxhat.rowwise().sum();
    const VectorXd sum_dxhat_xhat = (dxhat.array() * c.xhat.array()).rowwise().sum();
    MatrixXd dx = (n * dxhat.array()).matrix();
    dx.colwise() -= sum_dxhat;
    dx.array() -= c.xhat.array().colwise() * sum_dxhat_xhat.array();
    dx.array().colwise() *= c.inv_std.array() / n;
    return dx;
}

MatrixXd leaky_backward(const MatrixXd& dy, const MatrixXd& pre, double slope) {
    return dy.binaryExpr(pre, [slope](double g, double v) { return v > 0.0 ? g : slope * g; });
}

std::vector<int> targets_of(std::span<const Signature* const> sigs) {
    std::vector<int> t;
    t.reserve(sigs.size());
    for (const auto* s : sigs) t.push_back(s->label == Label::Fake ? 1 : 0);
    return t;
}

// ---- model file helpers ----

template <typename T>
void put(std::string& out, T v) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

class Reader {
public:
    explicit Reader(std::string_view b) : b_(b) {}
    template <typename T>
    T get() {
        need(sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s(b_.substr(pos_, n));
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n) const {
        if (b_.size() - pos_ < n) throw IoError("model file truncated");
    }
    std::string_view b_;
    std::size_t pos_ = 0;
};

constexpr char kModelMagic[4] = {'G', 'Z', 'M', 'D'};
constexpr std::uint16_t kModelVersion = 1;

nlohmann::json config_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
            {"epochs", c.epochs},               {"validate_every", c.validate_every},
            {"dropout_p", c.dropout_p},         {"leaky_slope", c.leaky_slope},
            {"seed", c.seed},                   {"omega", c.omega}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.validate_every = j.at("validate_every").get<int>();
    c.dropout_p = j.at("dropout_p").get<double>();
    c.leaky_slope = j.at("leaky_slope").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.omega = j.at("omega").get<int>();
    return c;
}

}  // namespace

Eigen::MatrixXd inverted_dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double scale = 1.0 / (1.0 - p);
    MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = unif(rng) >= p ? scale : 0.0;
    return m;
}

// ---- ModelState ----

namespace {

template <typename Entry, typename Self>
std::vector<Entry> trainable_of(Self& m) {
    return {{"bn0.gamma", &m.bn0_gamma},     {"bn0.beta", &m.bn0_beta},       {"dense0.weight", &m.dense0_w},
            {"dense0.bias", &m.dense0_b},    {"bn1.gamma", &m.bn1_gamma},     {"bn1.beta", &m.bn1_beta},
            {"dense1.weight", &m.dense1_w},  {"dense1.bias", &m.dense1_b},    {"bn2.gamma", &m.bn2_gamma},
            {"bn2.beta", &m.bn2_beta},       {"dense2.weight", &m.dense2_w},  {"dense2.bias", &m.dense2_b},
            {"dense3.weight", &m.dense3_w},  {"dense3.bias", &m.dense3_b}};
}

template <typename Entry, typename Self>
std::vector<Entry> tensors_of(Self& m) {
    auto all = trainable_of<Entry>(m);
    all.push_back({"bn0.running_mean", &m.bn0_mean});
    all.push_back({"bn0.running_var", &m.bn0_var});
    all.push_back({"bn1.running_mean", &m.bn1_mean});
    all.push_back({"bn1.running_var", &m.bn1_var});
    all.push_back({"bn2.running_mean", &m.bn2_mean});
    all.push_back({"bn2.running_var", &m.bn2_var});
    return all;
}

}  // namespace

std::vector<ModelState::Entry> ModelState::trainable() { return trainable_of<Entry>(*this); }
std::vector<ModelState::ConstEntry> ModelState::trainable() const { return trainable_of<ConstEntry>(*this); }
std::vector<ModelState::Entry> ModelState::tensors() { return tensors_of<Entry>(*this); }
std::vector<ModelState::ConstEntry> ModelState::tensors() const { return tensors_of<ConstEntry>(*this); }

void ModelState::reset_dropout_rng() { dropout_rng.seed(seed ^ 0xD5A61266F0C9392CULL); }

std::size_t ModelState::parameter_count() const {
    std::size_t n = 0;
    for (const auto& e : trainable()) n += static_cast<std::size_t>(e.value->size());
    return n;
}

ModelState init_model(int omega, const TrainConfig& cfg) {
    if (omega < 2) throw UsageError("omega must be >= 2");
    if (!(cfg.dropout_p >= 0.0 && cfg.dropout_p < 1.0)) throw UsageError("dropout_p must lie in [0,1)");
    if (cfg.batch_size < 1) throw UsageError("batch_size must be >= 1");

    ModelState m;
    m.cfg = cfg;
    m.cfg.omega = omega;
    m.omega = omega;
    m.seed = cfg.seed;
    const int in = m.input_dim();

    std::mt19937_64 rng(cfg.seed);
    auto glorot = [&rng](int out, int fan_in) {
        const double lim = std::sqrt(6.0 / (fan_in + out));
        std::uniform_real_distribution<double> u(-lim, lim);
        Eigen::MatrixXf w(out, fan_in);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<float>(u(rng));
        return w;
    };
    auto ones = [](int n) { return Eigen::MatrixXf::Ones(n, 1); };
    auto zeros = [](int n) { return Eigen::MatrixXf::Zero(n, 1); };

    m.bn0_gamma = ones(in);
    m.bn0_beta = zeros(in);
    m.bn0_mean = zeros(in);
    m.bn0_var = ones(in);
    m.dense0_w = glorot(kHidden1, in);
    m.dense0_b = zeros(kHidden1);
    m.bn1_gamma = ones(kHidden1);
    m.bn1_beta = zeros(kHidden1);
    m.bn1_mean = zeros(kHidden1);
    m.bn1_var = ones(kHidden1);
    m.dense1_w = glorot(kHidden2, kHidden1);
    m.dense1_b = zeros(kHidden2);
    m.bn2_gamma = ones(kHidden2);
    m.bn2_beta = zeros(kHidden2);
    m.bn2_mean = zeros(kHidden2);
    m.bn2_var = ones(kHidden2);
    m.dense2_w = glorot(kHidden3, kHidden2);
    m.dense2_b = zeros(kHidden3);
    m.dense3_w = glorot(kOutputs, kHidden3);
    m.dense3_b = zeros(kOutputs);

    for (const auto& e : m.trainable()) {
        m.adam_m.push_back(Eigen::MatrixXf::Zero(e.value->rows(), e.value->cols()));
        m.adam_v.push_back(Eigen::MatrixXf::Zero(e.value->rows(), e.value->cols()));
    }
    m.reset_dropout_rng();
    return m;
}

Eigen::MatrixXd to_batch(std::span<const Signature* const> sigs, int omega) {
    const auto rows = static_cast<Eigen::Index>(Signature::size_for(omega));
    MatrixXd x(rows, static_cast<Eigen::Index>(sigs.size()));
    for (std::size_t j = 0; j < sigs.size(); ++j) {
        const auto& s = *sigs[j];
        if (s.omega != omega || s.tensor.size() != static_cast<std::size_t>(rows))
            throw ShapeMismatch("signature omega " + std::to_string(s.omega) + " vs model omega " +
                                std::to_string(omega));
        x.col(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const Eigen::VectorXf>(s.tensor.data(), rows).cast<double>();
    }
    return x;
}

Eigen::MatrixXd forward_batch(ModelState& model, const Eigen::MatrixXd& x, const BatchOptions& opt) {
    Cache cache;
    MatrixXd out = run(model, x, opt, &model.dropout_rng, &cache);
    if (opt.mode == Mode::Train && opt.update_running_stats) {
        update_running(model.bn0_mean, model.bn0_var, cache.batch_mean[0], cache.batch_var[0]);
        update_running(model.bn1_mean, model.bn1_var, cache.batch_mean[1], cache.batch_var[1]);
        update_running(model.bn2_mean, model.bn2_var, cache.batch_mean[2], cache.batch_var[2]);
    }
    return out;
}

std::pair<double, double> forward(ModelState& model, const Signature& sig, Mode mode) {
    const Signature* p = &sig;
    const MatrixXd out = forward_batch(model, to_batch({&p, 1}, model.omega), {mode, true, false});
    return {out(0, 0), out(1, 0)};
}

std::vector<double> predict_sequences(const ModelState& model, std::span<const Signature> sigs) {
    std::vector<double> probs;
    probs.reserve(sigs.size());
    constexpr std::size_t kChunk = 256;
    for (std::size_t start = 0; start < sigs.size(); start += kChunk) {
        const std::size_t end = std::min(sigs.size(), start + kChunk);
        std::vector<const Signature*> ptrs;
        for (std::size_t i = start; i < end; ++i) ptrs.push_back(&sigs[i]);
        const MatrixXd out = run(model, to_batch(ptrs, model.omega), {Mode::Infer, false, false}, nullptr, nullptr);
        for (Eigen::Index j = 0; j < out.cols(); ++j) probs.push_back(out(1, j) / (out(0, j) + out(1, j) + 1e-12));
    }
    return probs;
}

double predict_sequence(const ModelState& model, const Signature& sig) {
    return predict_sequences(model, {&sig, 1}).front();
}

double bce_loss(const Eigen::MatrixXd& outputs, std::span<const int> fake_targets) {
    constexpr double kTiny = 1e-12;
    double total = 0.0;
    for (Eigen::Index j = 0; j < outputs.cols(); ++j) {
        const int fake = fake_targets[static_cast<std::size_t>(j)];
        for (int k = 0; k < kOutputs; ++k) {
            const double y = (k == fake) ? 1.0 : 0.0;
            const double s = outputs(k, j);
            total -= y * std::log(std::max(s, kTiny)) + (1.0 - y) * std::log(std::max(1.0 - s, kTiny));
        }
    }
    return total / (static_cast<double>(outputs.cols()) * kOutputs);
}

LossAndGrad loss_and_gradients(ModelState& m, const Eigen::MatrixXd& x, std::span<const int> fake_targets,
                               const BatchOptions& opt) {
    Cache c;
    LossAndGrad r;
    r.outputs = run(m, x, opt, &m.dropout_rng, &c);
    r.loss = bce_loss(r.outputs, fake_targets);
    if (opt.update_running_stats) {
        update_running(m.bn0_mean, m.bn0_var, c.batch_mean[0], c.batch_var[0]);
        update_running(m.bn1_mean, m.bn1_var, c.batch_mean[1], c.batch_var[1]);
        update_running(m.bn2_mean, m.bn2_var, c.batch_mean[2], c.batch_var[2]);
    }

    const double slope = m.cfg.leaky_slope;
    const auto n = static_cast<double>(x.cols());
    MatrixXd y = MatrixXd::Zero(kOutputs, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) y(fake_targets[static_cast<std::size_t>(j)], j) = 1.0;

    // sigmoid + BCE, averaged over nodes and samples
    const MatrixXd dz4 = (c.out - y) / (n * kOutputs);
    r.grads.resize(14);
    auto& g = r.grads;

    g[12].noalias() = dz4 * c.z3.transpose();
    g[13] = dz4.rowwise().sum();
    const MatrixXd dz3 = c.w[3].transpose() * dz4;

    g[10].noalias() = dz3 * c.a2.transpose();
    g[11] = dz3.rowwise().sum();
    MatrixXd da2 = c.w[2].transpose() * dz3;
    if (c.mask2.size()) da2.array() *= c.mask2.array();
    const MatrixXd dh2 = leaky_backward(da2, c.h2, slope);
    const MatrixXd dz2 = batch_norm_backward(dh2, c.bn2, m.bn2_gamma, g[8], g[9]);

    g[6].noalias() = dz2 * c.a1.transpose();
    g[7] = dz2.rowwise().sum();
    MatrixXd da1 = c.w[1].transpose() * dz2;
    if (c.mask1.size()) da1.array() *= c.mask1.array();
    const MatrixXd dh1 = leaky_backward(da1, c.h1, slope);
    const MatrixXd dz1 = batch_norm_backward(dh1, c.bn1, m.bn1_gamma, g[4], g[5]);

    g[2].noalias() = dz1 * c.h0.transpose();
    g[3] = dz1.rowwise().sum();
    const MatrixXd dh0 = c.w[0].transpose() * dz1;
    g[0] = (dh0.array() * c.bn0.xhat.array()).rowwise().sum().matrix();
    g[1] = dh0.rowwise().sum();
    return r;
}

void adam_step(ModelState& m, const std::vector<Eigen::MatrixXd>& grads) {
    auto params = m.trainable();
    ++m.adam_step;
    const double t = static_cast<double>(m.adam_step);
    const double bc1 = 1.0 - std::pow(kAdamBeta1, t);
    const double bc2 = 1.0 - std::pow(kAdamBeta2, t);
    const double lr = m.cfg.learning_rate;
    for (std::size_t k = 0; k < params.size(); ++k) {
        float* p = params[k].value->data();
        float* mm = m.adam_m[k].data();
        float* vv = m.adam_v[k].data();
        const double* gg = grads[k].data();
        const Eigen::Index size = params[k].value->size();
        for (Eigen::Index i = 0; i < size; ++i) {
            const double gi = gg[i];
            const double mi = kAdamBeta1 * mm[i] + (1.0 - kAdamBeta1) * gi;
            const double vi = kAdamBeta2 * vv[i] + (1.0 - kAdamBeta2) * gi * gi;
            mm[i] = static_cast<float>(mi);
            vv[i] = static_cast<float>(vi);
            p[i] = static_cast<float>(p[i] - lr * (mi / bc1) / (std::sqrt(vi / bc2) + kAdamEps));
        }
    }
}

TrainResult train(std::span<const Signature> dataset, const TrainConfig& cfg, std::span<const Signature> validation) {
    if (dataset.empty()) throw UsageError("empty training set");
    const int omega = dataset.front().omega;
    bool has_real = false, has_fake = false;
    for (const auto& s : dataset) {
        if (s.omega != omega) throw MixedOmega("training set mixes omega " + std::to_string(omega) + " and " +
                                               std::to_string(s.omega));
        if (s.label == Label::Unknown) throw UsageError("training signature '" + s.video_id + "' has no label");
        (s.label == Label::Real ? has_real : has_fake) = true;
    }
    if (!has_real || !has_fake) throw SingleClassDataset("training set needs both real and fake signatures");
    if (cfg.epochs < 0 || cfg.validate_every < 1) throw UsageError("bad epochs/validate_every");

    TrainResult result{init_model(omega, cfg), {}, {}};
    ModelState& model = result.model;

    std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    std::vector<int> val_targets;
    for (const auto& s : validation) val_targets.push_back(s.label == Label::Fake ? 1 : 0);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t end = std::min(order.size(), start + bs);
            std::vector<const Signature*> batch;
            for (std::size_t i = start; i < end; ++i) batch.push_back(&dataset[order[i]]);
            const auto targets = targets_of(batch);
            const auto lg = loss_and_gradients(model, to_batch(batch, omega), targets, {Mode::Train, true, true});
            adam_step(model, lg.grads);
            loss_sum += lg.loss * static_cast<double>(batch.size());
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(dataset.size()));

        if (!validation.empty() && epoch % cfg.validate_every == 0) {
            std::vector<const Signature*> ptrs;
            for (const auto& s : validation) ptrs.push_back(&s);
            const MatrixXd out = run(model, to_batch(ptrs, omega), {Mode::Infer, false, false}, nullptr, nullptr);
            std::size_t correct = 0;
            for (Eigen::Index j = 0; j < out.cols(); ++j) {
                const double p = out(1, j) / (out(0, j) + out(1, j) + 1e-12);
                correct += static_cast<std::size_t>((p > 0.5) == (val_targets[static_cast<std::size_t>(j)] == 1));
            }
            result.validation.push_back(
                {epoch, bce_loss(out, val_targets), static_cast<double>(correct) / static_cast<double>(out.cols())});
        }
    }
    return result;
}

double gradient_check(ModelState& model, std::span<const Signature> batch, const GradientCheckOptions& opt) {
    std::vector<const Signature*> ptrs;
    for (const auto& s : batch) ptrs.push_back(&s);
    const MatrixXd x = to_batch(ptrs, model.omega);
    const auto targets = targets_of(ptrs);
    const BatchOptions bo{Mode::Train, false, false};

    auto analytic = loss_and_gradients(model, x, targets, bo).grads;
    if (opt.corrupt) opt.corrupt(analytic);

    auto params = model.trainable();
    std::mt19937_64 rng(opt.seed);

    // Spread the sample over every tensor, then top up from the largest ones.
    std::vector<std::pair<std::size_t, Eigen::Index>> picks;
    const std::size_t per_tensor =
        (static_cast<std::size_t>(opt.min_samples) + params.size() - 1) / params.size();
    for (std::size_t k = 0; k < params.size(); ++k) {
        const Eigen::Index size = params[k].value->size();
        std::uniform_int_distribution<Eigen::Index> pick(0, size - 1);
        const std::size_t take = std::min<std::size_t>(per_tensor, static_cast<std::size_t>(size));
        for (std::size_t i = 0; i < take; ++i) picks.emplace_back(k, size <= static_cast<Eigen::Index>(take) ? Eigen::Index(i) : pick(rng));
    }
    while (picks.size() < static_cast<std::size_t>(opt.min_samples)) {
        std::uniform_int_distribution<Eigen::Index> pick(0, model.dense0_w.size() - 1);
        picks.emplace_back(2, pick(rng));
    }

    auto loss_at = [&]() {
        return bce_loss(run(model, x, bo, nullptr, nullptr), targets);
    };

    double worst = 0.0;
    for (const auto& [k, idx] : picks) {
        float& p = params[k].value->data()[idx];
        const float original = p;
        const float plus = static_cast<float>(original + opt.h);
        const float minus = static_cast<float>(original - opt.h);
        p = plus;
        const double lp = loss_at();
        p = minus;
        const double lm = loss_at();
        p = original;
        const double numeric = (lp - lm) / (static_cast<double>(plus) - static_cast<double>(minus));
        const double a = analytic[k].data()[idx];
        const double scale = std::max(std::abs(a), std::abs(numeric));
        if (scale < opt.abs_floor) continue;
        worst = std::max(worst, std::abs(a - numeric) / scale);
    }
    return worst;
}

// ---- persistence ----

std::string encode_model(const ModelState& model) {
    nlohmann::json header;
    header["config"] = config_json(model.cfg);
    header["omega"] = model.omega;
    header["seed"] = model.seed;
    header["adam_step"] = model.adam_step;
    std::ostringstream rng_state;
    rng_state << model.dropout_rng;
    header["dropout_rng"] = rng_state.str();
    const std::string header_text = header.dump();

    std::vector<std::pair<std::string, const Eigen::MatrixXf*>> entries;
    for (const auto& e : model.tensors()) entries.emplace_back(e.name, e.value);
    const auto trainable = model.trainable();
    for (std::size_t k = 0; k < trainable.size(); ++k) {
        entries.emplace_back("adam.m." + trainable[k].name, &model.adam_m[k]);
        entries.emplace_back("adam.v." + trainable[k].name, &model.adam_v[k]);
    }

    std::string out(kModelMagic, sizeof kModelMagic);
    put<std::uint16_t>(out, kModelVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(header_text.size()));
    out += header_text;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, mat] : entries) {
        put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out += name;
        put<std::uint8_t>(out, 2);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(mat->rows()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(mat->cols()));
        for (Eigen::Index i = 0; i < mat->rows(); ++i)
            for (Eigen::Index j = 0; j < mat->cols(); ++j) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>((*mat)(i, j)));
    }
    return out;
}

ModelState decode_model(std::string_view bytes) {
    if (bytes.size() < sizeof kModelMagic || std::memcmp(bytes.data(), kModelMagic, sizeof kModelMagic) != 0)
        throw BadMagic("not a GZMD model file");
    Reader rd(bytes.substr(sizeof kModelMagic));
    const auto version = rd.get<std::uint16_t>();
    if (version != kModelVersion) throw VersionMismatch("model file version " + std::to_string(version));

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(rd.bytes(rd.get<std::uint32_t>()));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("model header: ") + e.what());
    }
    ModelState m;
    try {
        m = init_model(header.at("omega").get<int>(), config_from_json(header.at("config")));
        m.seed = header.at("seed").get<std::uint64_t>();
        m.adam_step = header.at("adam_step").get<std::int64_t>();
        std::istringstream rng_state(header.at("dropout_rng").get<std::string>());
        rng_state >> m.dropout_rng;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("model header: ") + e.what());
    }

    std::vector<std::pair<std::string, Eigen::MatrixXf*>> slots;
    for (const auto& e : m.tensors()) slots.emplace_back(e.name, e.value);
    const auto trainable = m.trainable();
    for (std::size_t k = 0; k < trainable.size(); ++k) {
        slots.emplace_back("adam.m." + trainable[k].name, &m.adam_m[k]);
        slots.emplace_back("adam.v." + trainable[k].name, &m.adam_v[k]);
    }

    const auto count = rd.get<std::uint32_t>();
    std::size_t filled = 0;
    for (std::uint32_t e = 0; e < count; ++e) {
        const std::string name = rd.bytes(rd.get<std::uint16_t>());
        const auto ndim = rd.get<std::uint8_t>();
        if (ndim != 2) throw IoError("entry '" + name + "' has " + std::to_string(ndim) + " dims");
        const auto rows = rd.get<std::uint32_t>();
        const auto cols = rd.get<std::uint32_t>();
        auto it = std::find_if(slots.begin(), slots.end(), [&](const auto& s) { return s.first == name; });
        if (it == slots.end()) throw IoError("unknown model entry '" + name + "'");
        Eigen::MatrixXf& mat = *it->second;
        if (mat.rows() != rows || mat.cols() != cols) throw ShapeMismatch("entry '" + name + "' has wrong shape");
        for (Eigen::Index i = 0; i < mat.rows(); ++i)
            for (Eigen::Index j = 0; j < mat.cols(); ++j) mat(i, j) = std::bit_cast<float>(rd.get<std::uint32_t>());
        ++filled;
    }
    if (filled != slots.size()) throw IoError("model file is missing entries");
    return m;
}

void save_model(const ModelState& model, const std::filesystem::path& path) {
    const std::string bytes = encode_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

ModelState load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_model(buf.str());
}

}  // namespace gazefake
