#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pfl/grid.hpp"
#include "pfl/train.hpp"

namespace pfl::reduce {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Frame flattening

// Row-major flatten of a frame. channels == 3 replicates the scalar value
// threefold per pixel (interleaved), mirroring an RGB export of a grayscale
// field; channels == 1 is a plain copy.
VectorXd flatten_frame(const Field2D& frame, int channels);

// Inverse of flatten_frame; channel triples are averaged back to one scalar.
Field2D unflatten_frame(const VectorXd& flat, const GridSpec& grid, int channels);

// ---------------------------------------------------------------------------
// Feature scaling

enum class ScalerKind { minmax, zscore };

struct ScalerModel {
    ScalerKind kind = ScalerKind::minmax;
    // minmax: a = per-feature min, b = per-feature max.
    // zscore: a = per-feature mean, b = per-feature population std.
    VectorXd a, b;
    // Zero-spread features pass through unchanged and are flagged here.
    std::vector<std::uint8_t> degenerate;

    int n_features() const { return static_cast<int>(a.size()); }
    bool any_degenerate() const;
};

ScalerModel fit_scaler(const MatrixXd& data, ScalerKind kind);
MatrixXd scaler_apply(const ScalerModel& model, const MatrixXd& data);
MatrixXd scaler_invert(const ScalerModel& model, const MatrixXd& scaled);

// ---------------------------------------------------------------------------
// Principal component analysis

struct PCAModel {
    VectorXd mean;          // length m
    MatrixXd components;    // k x m, orthonormal rows, descending eigenvalue
    VectorXd eigenvalues;   // length k, descending, >= 0
    double total_variance = 0.0;  // sum of all m covariance eigenvalues
    bool rank_deficient = false;  // requested components beyond numerical rank

    int n_components() const { return static_cast<int>(components.rows()); }
    int n_features() const { return static_cast<int>(mean.size()); }
    double explained_variance_ratio(int i) const { return eigenvalues(i) / total_variance; }
};

// Top eigenpairs of the sample covariance C = (Z-mean)^T (Z-mean) / (n-1).
// Rows of `data` are samples. Requires n >= 2 and
// 1 <= n_components <= min(n-1, m). Component signs are fixed so the largest
// |entry| of each component is positive.
PCAModel pca_fit(const MatrixXd& data, int n_components);

MatrixXd pca_transform(const PCAModel& model, const MatrixXd& data);
MatrixXd pca_inverse(const PCAModel& model, const MatrixXd& codes);

// ---------------------------------------------------------------------------
// Fully connected autoencoder

enum class Activation { relu, tanh, sigmoid, identity };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

// Architecture: layer_dims = [input, ..., output] with output == input for
// autoencoding; code_index marks which entry of layer_dims is the code.
// activations has one entry per weight layer (= layer_dims.size() - 1).
struct AeArch {
    std::vector<int> layer_dims;
    int code_index = 1;
    std::vector<Activation> activations;

    void validate() const;
    int n_layers() const { return static_cast<int>(layer_dims.size()) - 1; }
};

// Symmetric architecture with `hidden_per_side` extra layers on each side of
// the code, widths geometrically interpolated between input_dim and code_dim.
AeArch make_ae_arch(int input_dim, int code_dim, int hidden_per_side, Activation hidden,
                    Activation output);
// Stage-1 default: input -> code -> input, tanh into the code, sigmoid out.
AeArch stage1_arch(int input_dim, int code_dim);
// Stage-2: tanh hidden, identity output (stage-1 codes are not in [0,1]).
AeArch stage2_arch(int input_dim, int code_dim, int hidden_per_side);

struct AEModel {
    AeArch arch;
    std::vector<MatrixXd> weights;  // weights[l] is [dims[l+1] x dims[l]]
    std::vector<VectorXd> biases;

    int input_dim() const { return arch.layer_dims.front(); }
    int code_dim() const { return arch.layer_dims[static_cast<std::size_t>(arch.code_index)]; }

    VectorXd encode(const VectorXd& x) const;
    VectorXd decode(const VectorXd& code) const;
    MatrixXd encode_rows(const MatrixXd& rows) const;
    MatrixXd decode_rows(const MatrixXd& codes) const;

    train::ParamRefs param_refs();
};

// Glorot-uniform weights (+/- sqrt(6/(fan_in+fan_out))) drawn from
// mt19937_64(seed) layer by layer, row-major within each matrix; zero biases.
AEModel ae_make(const AeArch& arch, std::uint64_t seed);

// Full forward pass: (code at the marked position, reconstruction).
std::pair<VectorXd, VectorXd> ae_forward(const AEModel& model, const VectorXd& x);

struct AEGradients {
    std::vector<MatrixXd> d_weights;
    std::vector<VectorXd> d_biases;

    train::ParamRefs param_refs();
};

// Reconstruction loss over a batch (rows are samples): mean over batch AND
// features of the squared error, matching metrics::mse.
double ae_loss(const AEModel& model, const MatrixXd& batch);

// Exact reverse-mode gradients of ae_loss w.r.t. every weight and bias.
// loss_out, when given, receives the batch loss from the same forward pass.
AEGradients ae_gradients(const AEModel& model, const MatrixXd& batch, double* loss_out = nullptr);

// Minibatch training with seeded shuffle split, early stopping on validation
// MSE, returning the best-validation model. Throws NonFiniteLoss (with the
// epoch index) if the loss leaves the finite range.
std::pair<AEModel, train::TrainHistory> ae_train(const MatrixXd& data, const AeArch& arch,
                                                 const train::TrainConfig& config);

// ---------------------------------------------------------------------------
// Two-stage reduction pipeline

struct PcaStage {
    ScalerModel scaler;
    PCAModel pca;
};

// encode = stage2.encode o stage1.encode (the scaler wraps the PCA);
// decode is the reverse chain. Decoded frames are clamped to [0,1], the
// light cleanup applied to every reconstruction.
struct ReductionPipeline {
    AEModel stage1;
    std::variant<AEModel, PcaStage> stage2;

    int input_dim() const { return stage1.input_dim(); }
    int code_dim() const;
    double reduction_ratio() const;        // input_dim / code_dim
    std::string reduction_label() const;   // "1/<floor(ratio)>"

    MatrixXd encode_rows(const MatrixXd& rows) const;
    MatrixXd decode_rows(const MatrixXd& codes) const;
};

ReductionPipeline compose_pipeline(AEModel stage1, AEModel stage2);
ReductionPipeline compose_pipeline(AEModel stage1, ScalerModel scaler, PCAModel pca);

}  // namespace pfl::reduce
