#include <cmath>
#include <random>

#include "pfl/errors.hpp"
#include "pfl/reduce.hpp"
#include "pfl/rng.hpp"

namespace pfl::reduce {

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation: " + s);
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::identity: return "identity";
    }
    return "?";
}

namespace {

void apply_activation(Activation act, MatrixXd& z) {
    switch (act) {
        case Activation::relu: z = z.cwiseMax(0.0); break;
        case Activation::tanh: z = z.array().tanh(); break;
        case Activation::sigmoid: z = 1.0 / (1.0 + (-z.array()).exp()); break;
        case Activation::identity: break;
    }
}

// Derivative in terms of the activation output.
MatrixXd activation_grad(Activation act, const MatrixXd& a) {
    switch (act) {
        case Activation::relu: return (a.array() > 0.0).cast<double>();
        case Activation::tanh: return 1.0 - a.array().square();
        case Activation::sigmoid: return a.array() * (1.0 - a.array());
        case Activation::identity: return MatrixXd::Ones(a.rows(), a.cols());
    }
    return MatrixXd::Ones(a.rows(), a.cols());
}

}  // namespace

void AeArch::validate() const {
    if (layer_dims.size() < 3) throw std::invalid_argument("AeArch: need at least input, code, output");
    if (layer_dims.front() != layer_dims.back())
        throw std::invalid_argument("AeArch: output dim must equal input dim");
    if (code_index < 1 || code_index >= static_cast<int>(layer_dims.size()) - 1)
        throw std::invalid_argument("AeArch: code_index must point at an interior layer");
    if (activations.size() != layer_dims.size() - 1)
        throw std::invalid_argument("AeArch: need one activation per weight layer");
    for (int d : layer_dims)
        if (d < 1) throw std::invalid_argument("AeArch: layer dims must be >= 1");
}

AeArch make_ae_arch(int input_dim, int code_dim, int hidden_per_side, Activation hidden,
                    Activation output) {
    if (hidden_per_side < 0) throw std::invalid_argument("make_ae_arch: hidden_per_side must be >= 0");
    AeArch a;
    std::vector<int> enc{input_dim};
    // Geometric interpolation of the hidden widths.
    for (int i = 1; i <= hidden_per_side; ++i) {
        double t = static_cast<double>(i) / (hidden_per_side + 1);
        double w = std::exp(std::log(static_cast<double>(input_dim)) * (1.0 - t) +
                            std::log(static_cast<double>(code_dim)) * t);
        enc.push_back(std::max(code_dim, static_cast<int>(std::lround(w))));
    }
    enc.push_back(code_dim);
    a.layer_dims = enc;
    for (int i = static_cast<int>(enc.size()) - 2; i >= 0; --i)
        a.layer_dims.push_back(enc[static_cast<std::size_t>(i)]);
    a.code_index = static_cast<int>(enc.size()) - 1;
    a.activations.assign(a.layer_dims.size() - 1, hidden);
    a.activations.back() = output;
    a.validate();
    return a;
}

AeArch stage1_arch(int input_dim, int code_dim) {
    // tanh into the code: relu code units die off catastrophically on
    // frame data at practical learning rates (measured: ~250/256 dead after
    // a few thousand adam steps), leaving rank-collapsed codes.
    return make_ae_arch(input_dim, code_dim, 0, Activation::tanh, Activation::sigmoid);
}

AeArch stage2_arch(int input_dim, int code_dim, int hidden_per_side) {
    return make_ae_arch(input_dim, code_dim, hidden_per_side, Activation::tanh, Activation::identity);
}

train::ParamRefs AEModel::param_refs() {
    train::ParamRefs refs;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        refs.add(weights[l]);
        refs.add(biases[l]);
    }
    return refs;
}

train::ParamRefs AEGradients::param_refs() {
    train::ParamRefs refs;
    for (std::size_t l = 0; l < d_weights.size(); ++l) {
        refs.add(d_weights[l]);
        refs.add(d_biases[l]);
    }
    return refs;
}

AEModel ae_make(const AeArch& arch, std::uint64_t seed) {
    arch.validate();
    AEModel m;
    m.arch = arch;
    std::mt19937_64 rng(seed);
    for (int l = 0; l < arch.n_layers(); ++l) {
        int fan_in = arch.layer_dims[static_cast<std::size_t>(l)];
        int fan_out = arch.layer_dims[static_cast<std::size_t>(l) + 1];
        double bound = std::sqrt(6.0 / (fan_in + fan_out));
        MatrixXd w(fan_out, fan_in);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = (2.0 * u01(rng) - 1.0) * bound;
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(VectorXd::Zero(fan_out));
    }
    return m;
}

namespace {

// Activations for every layer, rows are batch samples; acts[0] is the input.
std::vector<MatrixXd> forward_all(const AEModel& model, const MatrixXd& batch) {
    std::vector<MatrixXd> acts;
    acts.reserve(model.weights.size() + 1);
    acts.push_back(batch);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        MatrixXd z = acts.back() * model.weights[l].transpose();
        z.rowwise() += model.biases[l].transpose();
        apply_activation(model.arch.activations[l], z);
        acts.push_back(std::move(z));
    }
    return acts;
}

}  // namespace

MatrixXd AEModel::encode_rows(const MatrixXd& rows) const {
    if (rows.cols() != input_dim()) throw DimensionMismatch("AEModel::encode_rows: bad input width");
    MatrixXd a = rows;
    for (int l = 0; l < arch.code_index; ++l) {
        MatrixXd z = a * weights[static_cast<std::size_t>(l)].transpose();
        z.rowwise() += biases[static_cast<std::size_t>(l)].transpose();
        apply_activation(arch.activations[static_cast<std::size_t>(l)], z);
        a = std::move(z);
    }
    return a;
}

MatrixXd AEModel::decode_rows(const MatrixXd& codes) const {
    if (codes.cols() != code_dim()) throw DimensionMismatch("AEModel::decode_rows: bad code width");
    MatrixXd a = codes;
    for (int l = arch.code_index; l < arch.n_layers(); ++l) {
        MatrixXd z = a * weights[static_cast<std::size_t>(l)].transpose();
        z.rowwise() += biases[static_cast<std::size_t>(l)].transpose();
        apply_activation(arch.activations[static_cast<std::size_t>(l)], z);
        a = std::move(z);
    }
    return a;
}

VectorXd AEModel::encode(const VectorXd& x) const { return encode_rows(x.transpose()).row(0); }
VectorXd AEModel::decode(const VectorXd& code) const { return decode_rows(code.transpose()).row(0); }

std::pair<VectorXd, VectorXd> ae_forward(const AEModel& model, const VectorXd& x) {
    if (x.size() != model.input_dim()) throw DimensionMismatch("ae_forward: bad input length");
    VectorXd code = model.encode(x);
    VectorXd recon = model.decode(code);
    return {code, recon};
}

double ae_loss(const AEModel& model, const MatrixXd& batch) {
    if (batch.rows() < 1) throw std::invalid_argument("ae_loss: empty batch");
    std::vector<MatrixXd> acts = forward_all(model, batch);
    return (acts.back() - batch).squaredNorm() / static_cast<double>(batch.size());
}

AEGradients ae_gradients(const AEModel& model, const MatrixXd& batch, double* loss_out) {
    if (batch.rows() < 1) throw std::invalid_argument("ae_gradients: empty batch");
    if (batch.cols() != model.input_dim()) throw DimensionMismatch("ae_gradients: bad input width");

    std::vector<MatrixXd> acts = forward_all(model, batch);
    if (loss_out) *loss_out = (acts.back() - batch).squaredNorm() / static_cast<double>(batch.size());
    const int L = model.arch.n_layers();

    AEGradients grads;
    grads.d_weights.resize(static_cast<std::size_t>(L));
    grads.d_biases.resize(static_cast<std::size_t>(L));

    // d loss / d output for loss = |out - x|^2 / (B*D)
    MatrixXd delta = 2.0 * (acts.back() - batch) / static_cast<double>(batch.size());
    for (int l = L - 1; l >= 0; --l) {
        auto ul = static_cast<std::size_t>(l);
        MatrixXd dz = delta.cwiseProduct(activation_grad(model.arch.activations[ul], acts[ul + 1]));
        grads.d_weights[ul] = dz.transpose() * acts[ul];
        grads.d_biases[ul] = dz.colwise().sum();
        if (l > 0) delta = dz * model.weights[ul];
    }
    return grads;
}

std::pair<AEModel, train::TrainHistory> ae_train(const MatrixXd& data, const AeArch& arch,
                                                 const train::TrainConfig& config) {
    config.validate();
    arch.validate();
    if (data.rows() < 2 * config.batch_size)
        throw std::invalid_argument("ae_train: need at least 2*batch_size rows");
    if (data.cols() != arch.layer_dims.front())
        throw DimensionMismatch("ae_train: data width does not match architecture input");

    auto [train_idx, val_idx] =
        train::split_train_val(static_cast<int>(data.rows()), config.validation_fraction, config.seed);

    MatrixXd train_rows(static_cast<Eigen::Index>(train_idx.size()), data.cols());
    for (std::size_t i = 0; i < train_idx.size(); ++i)
        train_rows.row(static_cast<Eigen::Index>(i)) = data.row(train_idx[i]);
    MatrixXd val_rows(static_cast<Eigen::Index>(val_idx.size()), data.cols());
    for (std::size_t i = 0; i < val_idx.size(); ++i)
        val_rows.row(static_cast<Eigen::Index>(i)) = data.row(val_idx[i]);

    AEModel model = ae_make(arch, mix_seed(config.seed, 0x1417ULL));
    train::ParamRefs params = model.param_refs();
    train::OptimizerState opt(config.optimizer, config, params.sizes);
    train::EarlyStopper stopper(config.patience, config.min_delta);
    train::TrainHistory history;

    std::mt19937_64 shuffle_rng(mix_seed(config.seed, 0x5137ULL));
    std::vector<int> order(train_idx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    AEModel best = model;
    const auto n_train = static_cast<Eigen::Index>(train_idx.size());

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        deterministic_shuffle(order, shuffle_rng);
        double loss_sum = 0.0;
        Eigen::Index seen = 0;
        for (Eigen::Index start = 0; start < n_train; start += config.batch_size) {
            Eigen::Index bs = std::min<Eigen::Index>(config.batch_size, n_train - start);
            MatrixXd batch(bs, data.cols());
            for (Eigen::Index r = 0; r < bs; ++r)
                batch.row(r) = train_rows.row(order[static_cast<std::size_t>(start + r)]);
            double batch_loss = 0.0;
            AEGradients grads = ae_gradients(model, batch, &batch_loss);
            if (!std::isfinite(batch_loss))
                throw NonFiniteLoss("ae_train: non-finite training loss", epoch);
            train::ParamRefs grad_refs = grads.param_refs();
            opt.step(params, grad_refs);
            loss_sum += batch_loss * static_cast<double>(bs);
            seen += bs;
        }
        double train_mse = loss_sum / static_cast<double>(seen);
        double val_mse = ae_loss(model, val_rows);
        if (!std::isfinite(val_mse)) throw NonFiniteLoss("ae_train: non-finite validation loss", epoch);
        history.train_loss.push_back(train_mse);
        history.val_loss.push_back(val_mse);
        if (stopper.observe(val_mse)) {
            best = model;
            history.best_epoch = epoch;
        }
        if (stopper.should_stop()) {
            history.early_stopped = true;
            break;
        }
    }
    return {std::move(best), std::move(history)};
}

}  // namespace pfl::reduce
