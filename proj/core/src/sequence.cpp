#include "pfl/sequence.hpp"

#include <cmath>
#include <random>

#include "pfl/errors.hpp"
#include "pfl/rng.hpp"

namespace pfl::seq {

namespace {

VectorXd sigmoid(const VectorXd& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

}  // namespace

void SeqSample::validate() const {
    if (features.cols() < 4) throw std::invalid_argument("SeqSample: need latent dims plus 3 statics");
    if (features.rows() < 2) throw std::invalid_argument("SeqSample: need T >= 2");
    const Eigen::Index c = features.cols();
    for (Eigen::Index t = 0; t < features.rows(); ++t) {
        if (features(t, c - 3) != x0 || features(t, c - 2) != mobility || features(t, c - 1) != kappa)
            throw std::invalid_argument("SeqSample: trailing static columns must repeat (x0, M, kappa)");
    }
}

SeqSample make_seq_sample(const MatrixXd& latents, double x0, double mobility, double kappa) {
    SeqSample s;
    s.features.resize(latents.rows(), latents.cols() + 3);
    s.features.leftCols(latents.cols()) = latents;
    s.features.col(latents.cols()).setConstant(x0);
    s.features.col(latents.cols() + 1).setConstant(mobility);
    s.features.col(latents.cols() + 2).setConstant(kappa);
    s.x0 = x0;
    s.mobility = mobility;
    s.kappa = kappa;
    return s;
}

void SeqModel::validate() const {
    const int gates = cell == CellKind::lstm ? 4 : 3;
    if (static_cast<int>(layers.size()) != n_layers)
        throw DimensionMismatch("SeqModel: layer count mismatch");
    for (int l = 0; l < n_layers; ++l) {
        const auto& p = layers[static_cast<std::size_t>(l)];
        int in = l == 0 ? input_size : hidden_size;
        if (p.wx.rows() != gates * hidden_size || p.wx.cols() != in ||
            p.wh.rows() != gates * hidden_size || p.wh.cols() != hidden_size ||
            p.b.size() != gates * hidden_size)
            throw DimensionMismatch("SeqModel: gate parameter shape mismatch");
    }
    if (w_out.rows() != latent_dim || w_out.cols() != hidden_size || b_out.size() != latent_dim)
        throw DimensionMismatch("SeqModel: output head shape mismatch");
}

train::ParamRefs SeqModel::param_refs() {
    train::ParamRefs refs;
    for (auto& p : layers) {
        refs.add(p.wx);
        refs.add(p.wh);
        refs.add(p.b);
    }
    refs.add(w_out);
    refs.add(b_out);
    return refs;
}

train::ParamRefs SeqGradients::param_refs() {
    train::ParamRefs refs;
    for (auto& p : layers) {
        refs.add(p.wx);
        refs.add(p.wh);
        refs.add(p.b);
    }
    refs.add(d_w_out);
    refs.add(d_b_out);
    return refs;
}

SeqModel seq_make(CellKind cell, int n_layers, int hidden_size, int input_size, int latent_dim,
                  std::uint64_t seed) {
    if (n_layers < 1 || hidden_size < 1 || input_size < 1 || latent_dim < 1)
        throw std::invalid_argument("seq_make: all dimensions must be >= 1");
    SeqModel m;
    m.cell = cell;
    m.n_layers = n_layers;
    m.input_size = input_size;
    m.hidden_size = hidden_size;
    m.latent_dim = latent_dim;

    std::mt19937_64 rng(seed);
    auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
        double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
        MatrixXd w(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = (2.0 * u01(rng) - 1.0) * bound;
        return w;
    };

    const int gates = cell == CellKind::lstm ? 4 : 3;
    for (int l = 0; l < n_layers; ++l) {
        int in = l == 0 ? input_size : hidden_size;
        LayerParams p;
        p.wx = glorot(gates * hidden_size, in);
        p.wh = glorot(gates * hidden_size, hidden_size);
        p.b = VectorXd::Zero(gates * hidden_size);
        if (cell == CellKind::lstm) p.b.segment(hidden_size, hidden_size).setOnes();  // forget gate
        m.layers.push_back(std::move(p));
    }
    m.w_out = glorot(latent_dim, hidden_size);
    m.b_out = VectorXd::Zero(latent_dim);
    return m;
}

void lstm_cell(const LayerParams& p, const VectorXd& x, const VectorXd& h_prev,
               const VectorXd& c_prev, VectorXd& h, VectorXd& c) {
    const Eigen::Index H = h_prev.size();
    VectorXd pre = p.wx * x + p.wh * h_prev + p.b;
    VectorXd i = sigmoid(pre.segment(0, H));
    VectorXd f = sigmoid(pre.segment(H, H));
    VectorXd g = pre.segment(2 * H, H).array().tanh();
    VectorXd o = sigmoid(pre.segment(3 * H, H));
    c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    h = o.cwiseProduct(c.array().tanh().matrix());
}

VectorXd gru_cell(const LayerParams& p, const VectorXd& x, const VectorXd& h_prev) {
    const Eigen::Index H = h_prev.size();
    VectorXd px = p.wx * x + p.b;
    VectorXd z = sigmoid(px.segment(0, H) + p.wh.middleRows(0, H) * h_prev);
    VectorXd r = sigmoid(px.segment(H, H) + p.wh.middleRows(H, H) * h_prev);
    VectorXd cand =
        (px.segment(2 * H, H) + p.wh.middleRows(2 * H, H) * r.cwiseProduct(h_prev)).array().tanh();
    return (1.0 - z.array()).matrix().cwiseProduct(h_prev) + z.cwiseProduct(cand);
}

int resolved_context(const RolloutSpec& spec, int sample_length) {
    if (spec.horizon < 1) throw std::invalid_argument("RolloutSpec: horizon must be >= 1");
    int ctx = spec.context_len > 0 ? spec.context_len : sample_length - spec.horizon;
    if (ctx < 1 || ctx + spec.horizon > sample_length)
        throw DimensionMismatch("RolloutSpec: need context_len + horizon <= sample length");
    return ctx;
}

namespace {

// Everything the backward pass needs about one time step of one layer.
struct StepCache {
    VectorXd input;  // input to the layer this step
    VectorXd h_prev, c_prev;
    VectorXd i, f, g, o, c, tanh_c;  // lstm
    VectorXd z, r, cand;             // gru
    VectorXd h;
};

struct RolloutCache {
    // per time step, per layer
    std::vector<std::vector<StepCache>> steps;
    MatrixXd predictions;  // horizon x latent
    int context = 0;
};

RolloutCache rollout_forward(const SeqModel& model, const SeqSample& sample,
                             const RolloutSpec& spec, bool keep_cache) {
    if (sample.features.cols() != model.input_size)
        throw DimensionMismatch("seq_forward: sample feature width does not match model input");
    if (sample.latent_dim() != model.latent_dim)
        throw DimensionMismatch("seq_forward: sample latent width does not match output head");

    const int ctx = resolved_context(spec, sample.length());
    const int k = spec.horizon;
    const int total = ctx + k - 1;
    const int H = model.hidden_size;
    const int L = model.n_layers;

    RolloutCache cache;
    cache.context = ctx;
    cache.predictions.resize(k, model.latent_dim);
    if (keep_cache) cache.steps.resize(static_cast<std::size_t>(total));

    std::vector<VectorXd> h(static_cast<std::size_t>(L), VectorXd::Zero(H));
    std::vector<VectorXd> c(static_cast<std::size_t>(L), VectorXd::Zero(H));

    VectorXd x;
    for (int t = 0; t < total; ++t) {
        if (t < ctx) {
            x = sample.features.row(t).transpose();
        } else {
            // Autoregressive feedback: previous prediction + statics.
            x.resize(model.input_size);
            x.head(model.latent_dim) = cache.predictions.row(t - ctx).transpose();
            x(model.latent_dim) = sample.x0;
            x(model.latent_dim + 1) = sample.mobility;
            x(model.latent_dim + 2) = sample.kappa;
        }
        if (keep_cache) cache.steps[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(L));
        VectorXd layer_in = x;
        for (int l = 0; l < L; ++l) {
            const auto& p = model.layers[static_cast<std::size_t>(l)];
            auto& hl = h[static_cast<std::size_t>(l)];
            auto& cl = c[static_cast<std::size_t>(l)];
            StepCache sc;
            if (keep_cache) {
                sc.input = layer_in;
                sc.h_prev = hl;
                sc.c_prev = cl;
            }
            if (model.cell == CellKind::lstm) {
                VectorXd pre = p.wx * layer_in + p.wh * hl + p.b;
                VectorXd i = sigmoid(pre.segment(0, H));
                VectorXd f = sigmoid(pre.segment(H, H));
                VectorXd g = pre.segment(2 * H, H).array().tanh();
                VectorXd o = sigmoid(pre.segment(3 * H, H));
                cl = f.cwiseProduct(cl) + i.cwiseProduct(g);
                VectorXd tc = cl.array().tanh();
                hl = o.cwiseProduct(tc);
                if (keep_cache) {
                    sc.i = std::move(i);
                    sc.f = std::move(f);
                    sc.g = std::move(g);
                    sc.o = std::move(o);
                    sc.c = cl;
                    sc.tanh_c = std::move(tc);
                }
            } else {
                VectorXd px = p.wx * layer_in + p.b;
                VectorXd z = sigmoid(px.segment(0, H) + p.wh.middleRows(0, H) * hl);
                VectorXd r = sigmoid(px.segment(H, H) + p.wh.middleRows(H, H) * hl);
                VectorXd cand =
                    (px.segment(2 * H, H) + p.wh.middleRows(2 * H, H) * r.cwiseProduct(hl))
                        .array()
                        .tanh();
                hl = (1.0 - z.array()).matrix().cwiseProduct(hl) + z.cwiseProduct(cand);
                if (keep_cache) {
                    sc.z = std::move(z);
                    sc.r = std::move(r);
                    sc.cand = std::move(cand);
                }
            }
            if (keep_cache) {
                sc.h = hl;
                cache.steps[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)] = std::move(sc);
            }
            layer_in = hl;
        }
        if (t >= ctx - 1)
            cache.predictions.row(t - ctx + 1) =
                (model.w_out * h[static_cast<std::size_t>(L - 1)] + model.b_out).transpose();
    }
    return cache;
}

SeqGradients zero_gradients(const SeqModel& model) {
    SeqGradients g;
    g.layers.reserve(model.layers.size());
    for (const auto& p : model.layers) {
        LayerParams zp;
        zp.wx = MatrixXd::Zero(p.wx.rows(), p.wx.cols());
        zp.wh = MatrixXd::Zero(p.wh.rows(), p.wh.cols());
        zp.b = VectorXd::Zero(p.b.size());
        g.layers.push_back(std::move(zp));
    }
    g.d_w_out = MatrixXd::Zero(model.w_out.rows(), model.w_out.cols());
    g.d_b_out = VectorXd::Zero(model.b_out.size());
    return g;
}

// Backward through one sample's rollout; scale multiplies the per-element
// loss derivative (1/(batch*k*latent) normalization).
void accumulate_bptt(const SeqModel& model, const SeqSample& sample, const RolloutSpec& spec,
                     const RolloutCache& cache, double scale, SeqGradients& grads) {
    const int ctx = cache.context;
    const int k = spec.horizon;
    const int total = ctx + k - 1;
    const int H = model.hidden_size;
    const int L = model.n_layers;

    std::vector<VectorXd> dh(static_cast<std::size_t>(L), VectorXd::Zero(H));
    std::vector<VectorXd> dc(static_cast<std::size_t>(L), VectorXd::Zero(H));
    VectorXd pending_dx;  // gradient into the prediction consumed as next input

    for (int t = total - 1; t >= 0; --t) {
        const int j = t - (ctx - 1);  // prediction index at this step, if any
        if (j >= 0) {
            VectorXd target = sample.features.row(ctx + j).head(model.latent_dim).transpose();
            VectorXd dy =
                2.0 * scale * (cache.predictions.row(j).transpose() - target);
            if (pending_dx.size() > 0) dy += pending_dx;
            const auto& h_top = cache.steps[static_cast<std::size_t>(t)][static_cast<std::size_t>(L - 1)].h;
            grads.d_w_out += dy * h_top.transpose();
            grads.d_b_out += dy;
            dh[static_cast<std::size_t>(L - 1)] += model.w_out.transpose() * dy;
            pending_dx.resize(0);
        }

        VectorXd dx_from_above;
        for (int l = L - 1; l >= 0; --l) {
            const auto& p = model.layers[static_cast<std::size_t>(l)];
            auto& gl = grads.layers[static_cast<std::size_t>(l)];
            const auto& sc = cache.steps[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)];

            VectorXd dh_t = dh[static_cast<std::size_t>(l)];
            if (l < L - 1) dh_t += dx_from_above;

            VectorXd dx_l, dh_prev;
            if (model.cell == CellKind::lstm) {
                VectorXd d_o = dh_t.cwiseProduct(sc.tanh_c);
                VectorXd d_c = dh_t.cwiseProduct(sc.o)
                                   .cwiseProduct((1.0 - sc.tanh_c.array().square()).matrix()) +
                               dc[static_cast<std::size_t>(l)];
                VectorXd d_i = d_c.cwiseProduct(sc.g);
                VectorXd d_f = d_c.cwiseProduct(sc.c_prev);
                VectorXd d_g = d_c.cwiseProduct(sc.i);
                dc[static_cast<std::size_t>(l)] = d_c.cwiseProduct(sc.f);

                VectorXd dpre(4 * H);
                dpre.segment(0, H) = d_i.cwiseProduct(sc.i).cwiseProduct((1.0 - sc.i.array()).matrix());
                dpre.segment(H, H) = d_f.cwiseProduct(sc.f).cwiseProduct((1.0 - sc.f.array()).matrix());
                dpre.segment(2 * H, H) = d_g.cwiseProduct((1.0 - sc.g.array().square()).matrix());
                dpre.segment(3 * H, H) = d_o.cwiseProduct(sc.o).cwiseProduct((1.0 - sc.o.array()).matrix());

                gl.wx += dpre * sc.input.transpose();
                gl.wh += dpre * sc.h_prev.transpose();
                gl.b += dpre;
                dx_l = p.wx.transpose() * dpre;
                dh_prev = p.wh.transpose() * dpre;
            } else {
                VectorXd d_z = dh_t.cwiseProduct(sc.cand - sc.h_prev);
                VectorXd d_cand = dh_t.cwiseProduct(sc.z);
                VectorXd dh_prev_direct = dh_t.cwiseProduct((1.0 - sc.z.array()).matrix());

                VectorXd dpre_c = d_cand.cwiseProduct((1.0 - sc.cand.array().square()).matrix());
                VectorXd d_rh = p.wh.middleRows(2 * H, H).transpose() * dpre_c;
                VectorXd d_r = d_rh.cwiseProduct(sc.h_prev);
                VectorXd dpre_z = d_z.cwiseProduct(sc.z).cwiseProduct((1.0 - sc.z.array()).matrix());
                VectorXd dpre_r = d_r.cwiseProduct(sc.r).cwiseProduct((1.0 - sc.r.array()).matrix());

                VectorXd dpre(3 * H);
                dpre.segment(0, H) = dpre_z;
                dpre.segment(H, H) = dpre_r;
                dpre.segment(2 * H, H) = dpre_c;

                gl.wx += dpre * sc.input.transpose();
                gl.b += dpre;
                gl.wh.middleRows(0, H) += dpre_z * sc.h_prev.transpose();
                gl.wh.middleRows(H, H) += dpre_r * sc.h_prev.transpose();
                gl.wh.middleRows(2 * H, H) += dpre_c * sc.r.cwiseProduct(sc.h_prev).transpose();

                dx_l = p.wx.transpose() * dpre;
                dh_prev = dh_prev_direct + d_rh.cwiseProduct(sc.r) +
                          p.wh.middleRows(0, H).transpose() * dpre_z +
                          p.wh.middleRows(H, H).transpose() * dpre_r;
            }

            dh[static_cast<std::size_t>(l)] = dh_prev;
            dx_from_above = dx_l;
        }

        // Input of step t was the prediction made at step t-1.
        if (t >= ctx) pending_dx = dx_from_above.head(model.latent_dim);
    }
}

}  // namespace

MatrixXd seq_forward(const SeqModel& model, const SeqSample& sample, const RolloutSpec& spec) {
    return rollout_forward(model, sample, spec, /*keep_cache=*/false).predictions;
}

double seq_loss(const SeqModel& model, std::span<const SeqSample> batch, const RolloutSpec& spec) {
    if (batch.empty()) throw std::invalid_argument("seq_loss: empty batch");
    double total = 0.0;
    for (const auto& sample : batch) {
        const int ctx = resolved_context(spec, sample.length());
        MatrixXd pred = seq_forward(model, sample, spec);
        MatrixXd target = sample.features.block(ctx, 0, spec.horizon, model.latent_dim);
        total += (pred - target).squaredNorm() / static_cast<double>(pred.size());
    }
    return total / static_cast<double>(batch.size());
}

SeqGradients bptt_gradients(const SeqModel& model, std::span<const SeqSample> batch,
                            const RolloutSpec& spec, double* loss_out) {
    if (batch.empty()) throw std::invalid_argument("bptt_gradients: empty batch");
    SeqGradients grads = zero_gradients(model);
    const double scale = 1.0 / (static_cast<double>(batch.size()) * spec.horizon *
                                static_cast<double>(model.latent_dim));
    double loss_total = 0.0;
    for (const auto& sample : batch) {
        RolloutCache cache = rollout_forward(model, sample, spec, /*keep_cache=*/true);
        if (loss_out) {
            const int ctx = cache.context;
            MatrixXd target = sample.features.block(ctx, 0, spec.horizon, model.latent_dim);
            loss_total += (cache.predictions - target).squaredNorm() /
                          static_cast<double>(cache.predictions.size());
        }
        accumulate_bptt(model, sample, spec, cache, scale, grads);
    }
    if (loss_out) *loss_out = loss_total / static_cast<double>(batch.size());
    return grads;
}

std::pair<SeqModel, train::TrainHistory> seq_train(const std::vector<SeqSample>& dataset,
                                                   CellKind cell, int n_layers, int hidden_size,
                                                   const train::TrainConfig& config,
                                                   const RolloutSpec& spec) {
    config.validate();
    if (dataset.size() < 2) throw std::invalid_argument("seq_train: need at least 2 samples");

    const int input_size = static_cast<int>(dataset.front().features.cols());
    const int latent_dim = dataset.front().latent_dim();
    for (const auto& s : dataset) {
        if (static_cast<int>(s.features.cols()) != input_size)
            throw DimensionMismatch("seq_train: inconsistent feature widths");
        resolved_context(spec, s.length());
    }

    auto [train_idx, val_idx] =
        train::split_train_val(static_cast<int>(dataset.size()), config.validation_fraction, config.seed);
    std::vector<SeqSample> val_set;
    val_set.reserve(val_idx.size());
    for (int i : val_idx) val_set.push_back(dataset[static_cast<std::size_t>(i)]);

    SeqModel model = seq_make(cell, n_layers, hidden_size, input_size, latent_dim,
                              mix_seed(config.seed, 0x2417ULL));
    train::ParamRefs params = model.param_refs();
    train::OptimizerState opt(config.optimizer, config, params.sizes);
    train::EarlyStopper stopper(config.patience, config.min_delta);
    train::TrainHistory history;

    std::mt19937_64 shuffle_rng(mix_seed(config.seed, 0x6137ULL));
    std::vector<int> order = train_idx;

    SeqModel best = model;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        deterministic_shuffle(order, shuffle_rng);
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size),
                                                   order.size() - start);
            std::vector<SeqSample> batch;
            batch.reserve(bs);
            for (std::size_t r = 0; r < bs; ++r)
                batch.push_back(dataset[static_cast<std::size_t>(order[start + r])]);
            double batch_loss = 0.0;
            SeqGradients grads = bptt_gradients(model, batch, spec, &batch_loss);
            if (!std::isfinite(batch_loss))
                throw NonFiniteLoss("seq_train: non-finite training loss", epoch);
            train::ParamRefs grad_refs = grads.param_refs();
            opt.step(params, grad_refs);
            loss_sum += batch_loss * static_cast<double>(bs);
            seen += bs;
        }
        double train_loss = loss_sum / static_cast<double>(seen);
        double val_loss = seq_loss(model, val_set, spec);
        if (!std::isfinite(val_loss)) throw NonFiniteLoss("seq_train: non-finite validation loss", epoch);
        history.train_loss.push_back(train_loss);
        history.val_loss.push_back(val_loss);
        if (stopper.observe(val_loss)) {
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

SeqSample subsample_sequence(const SeqSample& sample, StridePolicy policy) {
    if (sample.length() < 2) throw std::invalid_argument("subsample_sequence: need T >= 2");
    if (policy == StridePolicy::all) return sample;
    const Eigen::Index kept = (sample.features.rows() + 1) / 2;
    SeqSample out = sample;
    out.features.resize(kept, sample.features.cols());
    for (Eigen::Index i = 0; i < kept; ++i) out.features.row(i) = sample.features.row(2 * i);
    return out;
}

}  // namespace pfl::seq
