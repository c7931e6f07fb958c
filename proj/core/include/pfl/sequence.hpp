#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pfl/train.hpp"

namespace pfl::seq {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class CellKind { lstm, gru };
enum class StridePolicy { all, even_indices };

// One latent trajectory: rows are time steps, the first latent_dim() columns
// are the latent code and the trailing three are the static simulation
// parameters (x0, M, kappa), repeated on every row.
struct SeqSample {
    MatrixXd features;  // T x (latent_dim + 3)
    double x0 = 0.0, mobility = 0.0, kappa = 0.0;

    int length() const { return static_cast<int>(features.rows()); }
    int latent_dim() const { return static_cast<int>(features.cols()) - 3; }
    void validate() const;
};

SeqSample make_seq_sample(const MatrixXd& latents, double x0, double mobility, double kappa);

// Per-layer gate parameters. Gate blocks are stacked row-wise in a fixed
// order: lstm rows [i | f | g | o] (4H), gru rows [z | r | c] (3H). The gru
// candidate applies wh to (r .* h_prev).
struct LayerParams {
    MatrixXd wx;  // [G*H x in]
    MatrixXd wh;  // [G*H x H]
    VectorXd b;   // [G*H]
};

struct SeqModel {
    CellKind cell = CellKind::lstm;
    int n_layers = 1;
    int input_size = 0;
    int hidden_size = 0;
    int latent_dim = 0;  // output head width
    std::vector<LayerParams> layers;
    MatrixXd w_out;  // [latent_dim x hidden]
    VectorXd b_out;

    train::ParamRefs param_refs();
    void validate() const;
};

// Glorot-uniform weights from mt19937_64(seed); forget-gate bias 1, all other
// biases 0.
SeqModel seq_make(CellKind cell, int n_layers, int hidden_size, int input_size, int latent_dim,
                  std::uint64_t seed);

// Single-cell updates (the building blocks; seq_forward loops these).
void lstm_cell(const LayerParams& p, const VectorXd& x, const VectorXd& h_prev,
               const VectorXd& c_prev, VectorXd& h, VectorXd& c);
VectorXd gru_cell(const LayerParams& p, const VectorXd& x, const VectorXd& h_prev);

struct RolloutSpec {
    int context_len = 0;  // 0 resolves to T - horizon
    int horizon = 1;
    StridePolicy stride_policy = StridePolicy::all;
};

int resolved_context(const RolloutSpec& spec, int sample_length);

// Consumes the context rows to build up hidden state, then rolls out
// `horizon` predictions; each prediction is fed back as the next input with
// the sample's static parameters re-appended. Returns [horizon x latent_dim].
MatrixXd seq_forward(const SeqModel& model, const SeqSample& sample, const RolloutSpec& spec);

struct SeqGradients {
    std::vector<LayerParams> layers;  // same shapes as the model
    MatrixXd d_w_out;
    VectorXd d_b_out;

    train::ParamRefs param_refs();
};

// Mean squared error of the rollout against the sample rows it overlaps,
// averaged over batch, horizon and latent dims.
double seq_loss(const SeqModel& model, std::span<const SeqSample> batch, const RolloutSpec& spec);

// Exact reverse-mode gradients of seq_loss, including the path through the
// autoregressive feedback of each prediction into the next input. loss_out,
// when given, receives the batch loss from the same forward passes.
SeqGradients bptt_gradients(const SeqModel& model, std::span<const SeqSample> batch,
                            const RolloutSpec& spec, double* loss_out = nullptr);

std::pair<SeqModel, train::TrainHistory> seq_train(const std::vector<SeqSample>& dataset,
                                                   CellKind cell, int n_layers, int hidden_size,
                                                   const train::TrainConfig& config,
                                                   const RolloutSpec& spec);

// even_indices keeps rows 0, 2, 4, ... (halving the sequence); all is the
// identity.
SeqSample subsample_sequence(const SeqSample& sample, StridePolicy policy);

}  // namespace pfl::seq
