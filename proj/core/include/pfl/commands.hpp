#pragma once

#include <exception>
#include <filesystem>
#include <string>

#include "pfl/config.hpp"

namespace pfl::cli {

// Exit codes shared by the binary and tests.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 2;       // generation finished with failed samples
inline constexpr int kExitShapeError = 3;    // malformed file / shape or dtype mismatch
inline constexpr int kExitNumerical = 4;     // blowup, non-finite loss
inline constexpr int kExitConfigError = 5;   // bad config, bad usage, missing input

int exit_code_for(const std::exception& e);

struct GenerateResult {
    int n_ok = 0;
    int n_failed = 0;
    int exit_code() const;
};

// Runs the configured parameter sweep into out_dir: per-sample part files
// under parts/, then manifest.txt and dataset.pfds with dims
// [n_ok, T, ny, nx] (successful samples in id order). Existing part files are
// trusted and skipped, which makes interrupted runs resumable without
// changing the final bytes.
GenerateResult cmd_generate(const io::RunConfig& cfg, const std::filesystem::path& out_dir,
                            int jobs);

// Trains an autoencoder on a dataset container. Rank-4 input [S,T,ny,nx] is
// flattened per frame (flatten.channels); rank-3 input [S,T,C] and rank-2
// [N,C] train on rows directly (the stage-2 case). Writes the model and a
// report with the best train/validation MSE.
void cmd_train_ae(const io::RunConfig& cfg, const std::filesystem::path& data,
                  const std::filesystem::path& model_out, const std::filesystem::path& report_out);

// Encodes a container through an autoencoder: rank-4 input -> [S,T,code];
// rank-3 input -> [S,T,code] through the model (stage-2 encoding).
void cmd_encode(const io::RunConfig& cfg, const std::filesystem::path& data,
                const std::filesystem::path& model, const std::filesystem::path& out);

// Fits scaler + PCA on rank-3 codes reshaped to [S*T, C]; writes the model
// and a report with the cumulative explained-variance table.
void cmd_fit_pca(const io::RunConfig& cfg, const std::filesystem::path& codes,
                 const std::filesystem::path& model_out, const std::filesystem::path& report_out);

// Scales + projects codes through a fitted PCA model: [S,T,C] -> [S,T,k].
void cmd_transform(const io::RunConfig& cfg, const std::filesystem::path& codes,
                   const std::filesystem::path& model, const std::filesystem::path& out);

// Trains an LSTM/GRU on latent trajectories; statics (x0, M, kappa) come from
// the manifest rows with status ok, which must line up with the container.
void cmd_train_seq(const io::RunConfig& cfg, const std::filesystem::path& latent,
                   const std::filesystem::path& manifest, const std::filesystem::path& model_out,
                   const std::filesystem::path& report_out);

// Rolls out `seq.horizon` predicted latent frames per sample -> [S,k,L].
void cmd_predict(const io::RunConfig& cfg, const std::filesystem::path& latent,
                 const std::filesystem::path& manifest, const std::filesystem::path& model,
                 const std::filesystem::path& out);

// Decodes latent frames back to images through the saved stage-1 model and
// (optionally) a stage-2 model: [S,K,k] -> [S,K,ny,nx], clamped to [0,1].
// With a reference container of identical dims, reports the decode MSE.
void cmd_decode(const io::RunConfig& cfg, const std::filesystem::path& latent,
                const std::filesystem::path& ae_model, const std::filesystem::path& stage2_model,
                const std::filesystem::path& out, const std::filesystem::path& reference,
                const std::filesystem::path& report_out);

// Writes frames of a rank-4 container as PGM (format "pgm") or PPM ("ppm").
// sample/frame select one index or -1 for all.
void cmd_render(const io::RunConfig& cfg, const std::filesystem::path& container,
                const std::filesystem::path& out_dir, const std::string& format, int sample,
                int frame);

// Prints a short description of a container / model / manifest file.
void cmd_info(const std::filesystem::path& file, std::string& out);

}  // namespace pfl::cli
