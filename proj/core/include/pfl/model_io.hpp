#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pfl/grid.hpp"
#include "pfl/reduce.hpp"
#include "pfl/sequence.hpp"

namespace pfl::io {

// Model files are a small text header (key = value lines, ended by a line
// containing only "---") followed by the model's tensors as concatenated
// binary tensor containers. The header names the model kind, layer dims,
// activations and scaler stats; the tensor section carries the numbers.

// Frame geometry an autoencoder was trained on; lets decode rebuild images.
struct FrameShape {
    int ny = 0;
    int nx = 0;
    int channels = 1;
};

void save_ae_model(const std::filesystem::path& path, const reduce::AEModel& model,
                   const std::optional<FrameShape>& frame_shape);
reduce::AEModel load_ae_model(const std::filesystem::path& path,
                              std::optional<FrameShape>* frame_shape = nullptr);

void save_pca_model(const std::filesystem::path& path, const reduce::ScalerModel& scaler,
                    const reduce::PCAModel& pca);
std::pair<reduce::ScalerModel, reduce::PCAModel> load_pca_model(const std::filesystem::path& path);

void save_seq_model(const std::filesystem::path& path, const seq::SeqModel& model);
seq::SeqModel load_seq_model(const std::filesystem::path& path);

// Peeks at the header and returns the model kind ("ae", "pca", "seq").
std::string model_kind(const std::filesystem::path& path);

}  // namespace pfl::io
