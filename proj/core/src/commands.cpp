#include "pfl/commands.hpp"

#include <cinttypes>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "pfl/container.hpp"
#include "pfl/errors.hpp"
#include "pfl/image.hpp"
#include "pfl/manifest.hpp"
#include "pfl/metrics.hpp"
#include "pfl/model_io.hpp"
#include "pfl/phasefield.hpp"
#include "pfl/reduce.hpp"
#include "pfl/sequence.hpp"

namespace pfl::cli {

namespace fs = std::filesystem;
using Eigen::MatrixXd;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericalBlowup*>(&e) || dynamic_cast<const NonFiniteLoss*>(&e))
        return kExitNumerical;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e))
        return kExitConfigError;
    if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const DimensionMismatch*>(&e) ||
        dynamic_cast<const ShapeMismatch*>(&e) || dynamic_cast<const ImaginaryResidueTooLarge*>(&e))
        return kExitShapeError;
    return 1;
}

int GenerateResult::exit_code() const {
    if (n_ok == 0) return kExitNumerical;
    return n_failed == 0 ? kExitOk : kExitPartial;
}

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int resolve_jobs(const io::RunConfig& cfg, int jobs_flag) {
    int jobs = jobs_flag > 0 ? jobs_flag : cfg.get_int("run.jobs");
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, jobs);
}

GridSpec grid_from_config(const io::RunConfig& cfg) {
    GridSpec g{cfg.get_int("grid.nx"), cfg.get_int("grid.ny"), cfg.get_double("grid.dx"),
               cfg.get_double("grid.dy")};
    g.validate();
    return g;
}

pf::PotentialForm potential_from_config(const io::RunConfig& cfg) {
    const std::string& s = cfg.get("pf.potential");
    if (s == "standard") return pf::PotentialForm::standard_double_well;
    if (s == "as_written") return pf::PotentialForm::as_written;
    throw ConfigError("pf.potential must be standard or as_written, got " + s);
}

pf::SweepSpec sweep_from_config(const io::RunConfig& cfg) {
    pf::SweepSpec sweep;
    sweep.n_samples = cfg.get_int("sweep.samples");
    sweep.base_seed = cfg.get_u64("sweep.base_seed");
    std::tie(sweep.x0_min, sweep.x0_max) = cfg.get_range("sweep.x0");
    std::tie(sweep.mobility_min, sweep.mobility_max) = cfg.get_range("sweep.mobility");
    std::tie(sweep.kappa_min, sweep.kappa_max) = cfg.get_range("sweep.kappa");
    sweep.grid = grid_from_config(cfg);
    sweep.dt = cfg.get_double("pf.dt");
    sweep.n_steps = cfg.get_int("pf.steps");
    sweep.snapshot_stride = cfg.get_int("pf.stride");
    sweep.noise_amp = cfg.get_double("pf.noise_amp");
    sweep.barrier_a = cfg.get_double("pf.barrier_a");
    sweep.potential_form = potential_from_config(cfg);
    sweep.validate();
    return sweep;
}

train::TrainConfig train_from_config(const io::RunConfig& cfg) {
    train::TrainConfig tc;
    const std::string& opt = cfg.get("train.optimizer");
    if (opt == "adam")
        tc.optimizer = train::Optimizer::adam;
    else if (opt == "sgd_momentum")
        tc.optimizer = train::Optimizer::sgd_momentum;
    else
        throw ConfigError("train.optimizer must be adam or sgd_momentum, got " + opt);
    tc.learning_rate = cfg.get_double("train.lr");
    tc.batch_size = cfg.get_int("train.batch");
    tc.max_epochs = cfg.get_int("train.epochs");
    tc.patience = cfg.get_int("train.patience");
    tc.min_delta = cfg.get_double("train.min_delta");
    tc.validation_fraction = cfg.get_double("train.val_fraction");
    tc.momentum = cfg.get_double("train.momentum");
    tc.seed = cfg.get_u64("train.seed");
    tc.validate();
    return tc;
}

int channels_from_config(const io::RunConfig& cfg) {
    int channels = cfg.get_int("flatten.channels");
    if (channels != 1 && channels != 3) throw ConfigError("flatten.channels must be 1 or 3");
    return channels;
}

std::string part_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sample_%06d.pfds", index);
    return buf;
}

// Rows of a dataset container: rank-4 frames are flattened (replicating
// channels when asked), rank-3/2 tensors become plain row matrices.
MatrixXd container_rows(const io::TensorData& t, int channels, const std::string& what) {
    if (t.dims.size() == 4) {
        const auto s = static_cast<Eigen::Index>(t.dims[0]);
        const auto steps = static_cast<Eigen::Index>(t.dims[1]);
        const auto ny = static_cast<int>(t.dims[2]);
        const auto nx = static_cast<int>(t.dims[3]);
        const Eigen::Index frame_len = static_cast<Eigen::Index>(ny) * nx;
        MatrixXd rows(s * steps, frame_len * channels);
        Field2D frame(GridSpec{nx, ny, 1.0, 1.0});
        for (Eigen::Index r = 0; r < s * steps; ++r) {
            const float* src = t.values.data() + r * frame_len;
            for (Eigen::Index i = 0; i < frame_len; ++i)
                frame.values[static_cast<std::size_t>(i)] = src[i];
            rows.row(r) = reduce::flatten_frame(frame, channels).transpose();
        }
        return rows;
    }
    if (t.dims.size() == 3 || t.dims.size() == 2) {
        Eigen::Index n_rows = 1;
        for (std::size_t d = 0; d + 1 < t.dims.size(); ++d)
            n_rows *= static_cast<Eigen::Index>(t.dims[d]);
        const auto width = static_cast<Eigen::Index>(t.dims.back());
        MatrixXd rows(n_rows, width);
        for (Eigen::Index r = 0; r < n_rows; ++r)
            for (Eigen::Index c = 0; c < width; ++c)
                rows(r, c) = t.values[static_cast<std::size_t>(r * width + c)];
        return rows;
    }
    throw FormatError(what + ": expected a rank-2, rank-3 or rank-4 container");
}

void write_rows(const fs::path& path, const MatrixXd& rows, std::vector<std::uint64_t> dims) {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    if (n != static_cast<std::uint64_t>(rows.size()))
        throw ShapeMismatch("write_rows: dims do not match matrix size");
    io::TensorWriter writer(path, dims);
    std::vector<double> buf(static_cast<std::size_t>(rows.cols()));
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < rows.cols(); ++c) buf[static_cast<std::size_t>(c)] = rows(r, c);
        writer.append_f64(buf);
    }
    writer.finish();
}

// Round a matrix through the f32 storage dtype; reported metrics compare
// stored values with stored values.
MatrixXd storage_rounded(const MatrixXd& m) {
    return m.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
}

void maybe_write_report(const fs::path& report_out, const metrics::EvalReport& report) {
    if (report_out.empty()) return;
    io::write_text_atomic(report_out, metrics::emit_report(report));
}

reduce::Activation output_activation_from_config(const io::RunConfig& cfg, bool frames_input) {
    const std::string& s = cfg.get("ae.output_activation");
    if (s == "auto")
        return frames_input ? reduce::Activation::sigmoid : reduce::Activation::identity;
    return reduce::activation_from_string(s);
}

struct LatentSet {
    std::vector<seq::SeqSample> samples;
    int latent_dim = 0;
};

LatentSet latent_samples(const fs::path& latent_path, const fs::path& manifest_path,
                         const io::RunConfig& cfg) {
    io::TensorData t = io::read_tensor(latent_path);
    if (t.dims.size() != 3)
        throw FormatError(latent_path.filename().string() + ": expected [S,T,latent] container");
    const auto S = static_cast<Eigen::Index>(t.dims[0]);
    const auto T = static_cast<Eigen::Index>(t.dims[1]);
    const auto L = static_cast<Eigen::Index>(t.dims[2]);

    io::Manifest manifest = io::read_manifest(manifest_path);
    std::vector<const io::ManifestRecord*> ok;
    for (const auto& r : manifest.records)
        if (r.status == "ok") ok.push_back(&r);
    if (static_cast<Eigen::Index>(ok.size()) != S)
        throw ShapeMismatch("manifest ok-record count does not match container samples");

    const std::string& policy_str = cfg.get("seq.subsample");
    seq::StridePolicy policy;
    if (policy_str == "all")
        policy = seq::StridePolicy::all;
    else if (policy_str == "even_indices")
        policy = seq::StridePolicy::even_indices;
    else
        throw ConfigError("seq.subsample must be all or even_indices");

    LatentSet set;
    set.latent_dim = static_cast<int>(L);
    set.samples.reserve(static_cast<std::size_t>(S));
    for (Eigen::Index s = 0; s < S; ++s) {
        MatrixXd latents(T, L);
        for (Eigen::Index ts = 0; ts < T; ++ts)
            for (Eigen::Index c = 0; c < L; ++c)
                latents(ts, c) = t.values[static_cast<std::size_t>((s * T + ts) * L + c)];
        const auto& rec = *ok[static_cast<std::size_t>(s)];
        seq::SeqSample sample = seq::make_seq_sample(latents, rec.x0, rec.mobility, rec.kappa);
        set.samples.push_back(seq::subsample_sequence(sample, policy));
    }
    return set;
}

seq::RolloutSpec rollout_from_config(const io::RunConfig& cfg) {
    seq::RolloutSpec spec;
    spec.horizon = cfg.get_int("seq.horizon");
    spec.context_len = cfg.get_int("seq.context");
    return spec;
}

}  // namespace

GenerateResult cmd_generate(const io::RunConfig& cfg, const fs::path& out_dir, int jobs) {
    pf::SweepSpec sweep = sweep_from_config(cfg);
    if (!is_pow2(sweep.grid.nx) || !is_pow2(sweep.grid.ny))
        throw ConfigError("generate requires power-of-two grid sizes");
    const int n_jobs = resolve_jobs(cfg, jobs);

    fs::create_directories(out_dir / "parts");
    auto part_path = [&](int i) { return out_dir / "parts" / part_name(i); };

    const int S = sweep.n_samples;
    const auto T = static_cast<std::uint64_t>(sweep.n_steps / sweep.snapshot_stride);
    const auto ny = static_cast<std::uint64_t>(sweep.grid.ny);
    const auto nx = static_cast<std::uint64_t>(sweep.grid.nx);

    std::vector<std::string> status(static_cast<std::size_t>(S));
    std::vector<std::string> errors(static_cast<std::size_t>(S));

    pf::run_sweep(
        sweep, n_jobs,
        [&](int i) {
            if (!fs::exists(part_path(i))) return false;
            status[static_cast<std::size_t>(i)] = "ok";  // parts are written atomically
            return true;
        },
        [&](int i, const pf::PFParams&, const pf::Trajectory& traj) {
            std::uint64_t dims[3] = {T, ny, nx};
            io::TensorWriter writer(part_path(i), dims);
            for (const auto& frame : traj.frames) writer.append_f64(frame.values);
            writer.finish();
            status[static_cast<std::size_t>(i)] = "ok";
        },
        [&](int i, const pf::PFParams&, const std::string& err) {
            status[static_cast<std::size_t>(i)] = "failed";
            errors[static_cast<std::size_t>(i)] = err;
        });

    // Manifest: every sample in id order, parameters recomputed from the
    // sweep stream (pure function of base_seed and index).
    io::Manifest manifest;
    {
        std::ostringstream settings;
        settings << "samples=" << S << " grid=" << sweep.grid.nx << "x" << sweep.grid.ny
                 << " dt=" << sweep.dt << " steps=" << sweep.n_steps
                 << " stride=" << sweep.snapshot_stride << " noise=" << sweep.noise_amp
                 << " a=" << sweep.barrier_a
                 << " form=" << (sweep.potential_form == pf::PotentialForm::standard_double_well
                                     ? "standard"
                                     : "as_written")
                 << " base_seed=" << sweep.base_seed;
        manifest.settings = settings.str();
    }
    GenerateResult result;
    for (int i = 0; i < S; ++i) {
        pf::PFParams p = pf::sweep_sample_params(sweep, i);
        io::ManifestRecord rec;
        rec.sample_id = static_cast<std::uint64_t>(i);
        rec.x0 = p.x0;
        rec.mobility = p.mobility;
        rec.kappa = p.kappa;
        rec.seed = p.seed;
        rec.status = status[static_cast<std::size_t>(i)];
        if (rec.status == "ok")
            ++result.n_ok;
        else
            ++result.n_failed;
        manifest.records.push_back(std::move(rec));
    }
    io::write_manifest(out_dir / "manifest.txt", manifest);

    if (result.n_ok > 0) {
        std::uint64_t dims[4] = {static_cast<std::uint64_t>(result.n_ok), T, ny, nx};
        io::TensorWriter writer(out_dir / "dataset.pfds", dims);
        for (int i = 0; i < S; ++i) {
            if (status[static_cast<std::size_t>(i)] != "ok") continue;
            io::TensorData part = io::read_tensor(part_path(i));
            if (part.dims.size() != 3 || part.dims[0] != T || part.dims[1] != ny || part.dims[2] != nx)
                throw FormatError(part_name(i) + ": part dims disagree with sweep config");
            writer.append(part.values);
        }
        writer.finish();
    }
    return result;
}

void cmd_train_ae(const io::RunConfig& cfg, const fs::path& data, const fs::path& model_out,
                  const fs::path& report_out) {
    io::TensorData t = io::read_tensor(data);
    const bool frames_input = t.dims.size() == 4;
    const int channels = channels_from_config(cfg);
    MatrixXd rows = container_rows(t, channels, data.filename().string());

    reduce::AeArch arch = reduce::make_ae_arch(
        static_cast<int>(rows.cols()), cfg.get_int("ae.code"), cfg.get_int("ae.hidden_layers"),
        reduce::activation_from_string(cfg.get("ae.hidden_activation")),
        output_activation_from_config(cfg, frames_input));

    auto [model, history] = reduce::ae_train(rows, arch, train_from_config(cfg));

    std::optional<io::FrameShape> frame_shape;
    if (frames_input)
        frame_shape = io::FrameShape{static_cast<int>(t.dims[2]), static_cast<int>(t.dims[3]), channels};
    io::save_ae_model(model_out, model, frame_shape);

    metrics::EvalReport report;
    report.stages = {"train-ae"};
    const int best = history.best_epoch >= 0 ? history.best_epoch : 0;
    report.mse.push_back({"ae", history.train_loss[static_cast<std::size_t>(best)],
                          history.val_loss[static_cast<std::size_t>(best)]});
    report.reduction_ratio = static_cast<double>(rows.cols()) / model.code_dim();
    report.reduction_label =
        "1/" + std::to_string(static_cast<long>(rows.cols() / model.code_dim()));
    maybe_write_report(report_out, report);
}

void cmd_encode(const io::RunConfig& cfg, const fs::path& data, const fs::path& model_path,
                const fs::path& out) {
    std::optional<io::FrameShape> frame_shape;
    reduce::AEModel model = io::load_ae_model(model_path, &frame_shape);

    io::TensorData t = io::read_tensor(data);
    int channels = frame_shape ? frame_shape->channels : channels_from_config(cfg);
    MatrixXd rows = container_rows(t, channels, data.filename().string());
    if (rows.cols() != model.input_dim())
        throw ShapeMismatch("encode: container feature width " + std::to_string(rows.cols()) +
                            " does not match model input " + std::to_string(model.input_dim()));

    MatrixXd codes(rows.rows(), model.code_dim());
    constexpr Eigen::Index kChunk = 512;
    for (Eigen::Index start = 0; start < rows.rows(); start += kChunk) {
        Eigen::Index n = std::min(kChunk, rows.rows() - start);
        codes.middleRows(start, n) = model.encode_rows(rows.middleRows(start, n));
    }

    std::vector<std::uint64_t> dims;
    if (t.dims.size() >= 3)
        dims = {t.dims[0], t.dims[1], static_cast<std::uint64_t>(model.code_dim())};
    else
        dims = {t.dims[0], static_cast<std::uint64_t>(model.code_dim())};
    write_rows(out, codes, dims);
}

void cmd_fit_pca(const io::RunConfig& cfg, const fs::path& codes, const fs::path& model_out,
                 const fs::path& report_out) {
    io::TensorData t = io::read_tensor(codes);
    MatrixXd rows = container_rows(t, 1, codes.filename().string());

    reduce::ScalerKind kind;
    if (cfg.get("scaler.kind") == "minmax")
        kind = reduce::ScalerKind::minmax;
    else if (cfg.get("scaler.kind") == "zscore")
        kind = reduce::ScalerKind::zscore;
    else
        throw ConfigError("scaler.kind must be minmax or zscore");
    reduce::ScalerModel scaler = reduce::fit_scaler(rows, kind);
    MatrixXd scaled = reduce::scaler_apply(scaler, rows);
    reduce::PCAModel pca = reduce::pca_fit(scaled, cfg.get_int("pca.components"));
    io::save_pca_model(model_out, scaler, pca);

    metrics::EvalReport report;
    report.stages = {"fit-pca"};
    std::vector<double> table = metrics::explained_variance_table(pca);
    for (std::size_t i = 0; i < table.size(); ++i)
        report.explained_variance.emplace_back(static_cast<int>(i) + 1, table[i]);
    report.reduction_ratio = static_cast<double>(rows.cols()) / pca.n_components();
    maybe_write_report(report_out, report);
}

void cmd_transform(const io::RunConfig&, const fs::path& codes, const fs::path& model_path,
                   const fs::path& out) {
    auto [scaler, pca] = io::load_pca_model(model_path);
    io::TensorData t = io::read_tensor(codes);
    MatrixXd rows = container_rows(t, 1, codes.filename().string());
    if (rows.cols() != pca.n_features())
        throw ShapeMismatch("transform: container width does not match pca model features");

    MatrixXd latent = reduce::pca_transform(pca, reduce::scaler_apply(scaler, rows));
    std::vector<std::uint64_t> dims;
    if (t.dims.size() >= 3)
        dims = {t.dims[0], t.dims[1], static_cast<std::uint64_t>(pca.n_components())};
    else
        dims = {t.dims[0], static_cast<std::uint64_t>(pca.n_components())};
    write_rows(out, latent, dims);
}

void cmd_train_seq(const io::RunConfig& cfg, const fs::path& latent, const fs::path& manifest,
                   const fs::path& model_out, const fs::path& report_out) {
    LatentSet set = latent_samples(latent, manifest, cfg);
    seq::RolloutSpec spec = rollout_from_config(cfg);

    seq::CellKind cell;
    const std::string& cell_str = cfg.get("seq.cell");
    if (cell_str == "lstm")
        cell = seq::CellKind::lstm;
    else if (cell_str == "gru")
        cell = seq::CellKind::gru;
    else
        throw ConfigError("seq.cell must be lstm or gru");

    auto [model, history] = seq::seq_train(set.samples, cell, cfg.get_int("seq.layers"),
                                           cfg.get_int("seq.hidden"), train_from_config(cfg), spec);
    io::save_seq_model(model_out, model);

    metrics::EvalReport report;
    report.stages = {"train-seq"};
    const int best = history.best_epoch >= 0 ? history.best_epoch : 0;
    report.mse.push_back({cell_str, history.train_loss[static_cast<std::size_t>(best)],
                          history.val_loss[static_cast<std::size_t>(best)]});
    report.horizon_loss.emplace_back(spec.horizon, history.val_loss[static_cast<std::size_t>(best)]);
    maybe_write_report(report_out, report);
}

void cmd_predict(const io::RunConfig& cfg, const fs::path& latent, const fs::path& manifest,
                 const fs::path& model_path, const fs::path& out) {
    seq::SeqModel model = io::load_seq_model(model_path);
    LatentSet set = latent_samples(latent, manifest, cfg);
    seq::RolloutSpec spec = rollout_from_config(cfg);

    const auto S = static_cast<Eigen::Index>(set.samples.size());
    const Eigen::Index k = spec.horizon;
    const Eigen::Index L = set.latent_dim;
    MatrixXd flat(S * k, L);
    for (Eigen::Index s = 0; s < S; ++s) {
        MatrixXd pred = seq::seq_forward(model, set.samples[static_cast<std::size_t>(s)], spec);
        flat.middleRows(s * k, k) = pred;
    }
    write_rows(out, flat,
               {static_cast<std::uint64_t>(S), static_cast<std::uint64_t>(k),
                static_cast<std::uint64_t>(L)});
}

void cmd_decode(const io::RunConfig& cfg, const fs::path& latent, const fs::path& ae_model,
                const fs::path& stage2_model, const fs::path& out, const fs::path& reference,
                const fs::path& report_out) {
    std::optional<io::FrameShape> frame_shape;
    reduce::AEModel stage1 = io::load_ae_model(ae_model, &frame_shape);
    if (!frame_shape)
        throw ConfigError("decode: stage-1 model carries no frame_shape; it was not trained on frames");

    io::TensorData t = io::read_tensor(latent);
    MatrixXd rows = container_rows(t, 1, latent.filename().string());

    // Decode to flattened image vectors through the pipeline.
    MatrixXd decoded;
    if (stage2_model.empty()) {
        if (rows.cols() != stage1.code_dim())
            throw ShapeMismatch("decode: latent width does not match stage-1 code dim");
        decoded = stage1.decode_rows(rows).cwiseMax(0.0).cwiseMin(1.0);
    } else if (io::model_kind(stage2_model) == "pca") {
        auto [scaler, pca] = io::load_pca_model(stage2_model);
        reduce::ReductionPipeline pipeline =
            reduce::compose_pipeline(std::move(stage1), std::move(scaler), std::move(pca));
        if (rows.cols() != pipeline.code_dim())
            throw ShapeMismatch("decode: latent width does not match pipeline code dim");
        decoded = pipeline.decode_rows(rows);
        stage1 = std::move(pipeline.stage1);
    } else {
        reduce::AEModel stage2 = io::load_ae_model(stage2_model);
        reduce::ReductionPipeline pipeline =
            reduce::compose_pipeline(std::move(stage1), std::move(stage2));
        if (rows.cols() != pipeline.code_dim())
            throw ShapeMismatch("decode: latent width does not match pipeline code dim");
        decoded = pipeline.decode_rows(rows);
        stage1 = std::move(pipeline.stage1);
    }

    // Unflatten back to scalar frames (channel triples averaged).
    const GridSpec grid{frame_shape->nx, frame_shape->ny, 1.0, 1.0};
    const Eigen::Index frame_len = static_cast<Eigen::Index>(grid.size());
    MatrixXd frames(decoded.rows(), frame_len);
    for (Eigen::Index r = 0; r < decoded.rows(); ++r) {
        Field2D f = reduce::unflatten_frame(decoded.row(r).transpose(), grid, frame_shape->channels);
        for (Eigen::Index i = 0; i < frame_len; ++i) frames(r, i) = f.values[static_cast<std::size_t>(i)];
    }

    std::vector<std::uint64_t> dims;
    if (t.dims.size() >= 3)
        dims = {t.dims[0], t.dims[1], static_cast<std::uint64_t>(grid.ny),
                static_cast<std::uint64_t>(grid.nx)};
    else
        dims = {t.dims[0], static_cast<std::uint64_t>(grid.ny), static_cast<std::uint64_t>(grid.nx)};
    write_rows(out, frames, dims);

    if (!reference.empty()) {
        io::TensorData ref = io::read_tensor(reference);
        if (ref.dims != dims)
            throw ShapeMismatch("decode: reference dims do not match decoded output");
        MatrixXd ref_rows = container_rows(ref, 1, reference.filename().string());
        // Compare stored values with stored values: both sides f32-rounded.
        double v = metrics::mse(storage_rounded(frames), ref_rows);
        metrics::EvalReport report;
        report.stages = {"decode"};
        report.mse.push_back({"decode", v, v});
        maybe_write_report(report_out, report);
    } else if (!report_out.empty()) {
        metrics::EvalReport report;
        report.stages = {"decode"};
        maybe_write_report(report_out, report);
    }
}

void cmd_render(const io::RunConfig&, const fs::path& container, const fs::path& out_dir,
                const std::string& format, int sample, int frame) {
    if (format != "pgm" && format != "ppm") throw ConfigError("render format must be pgm or ppm");
    io::TensorData t = io::read_tensor(container);
    if (t.dims.size() != 4)
        throw FormatError(container.filename().string() + ": render expects [S,T,ny,nx]");
    const auto S = static_cast<int>(t.dims[0]);
    const auto T = static_cast<int>(t.dims[1]);
    const auto ny = static_cast<int>(t.dims[2]);
    const auto nx = static_cast<int>(t.dims[3]);
    if (sample >= S || frame >= T) throw ConfigError("render: sample/frame out of range");

    fs::create_directories(out_dir);
    const std::size_t frame_len = static_cast<std::size_t>(ny) * nx;
    Field2D f(GridSpec{nx, ny, 1.0, 1.0});
    for (int s = sample < 0 ? 0 : sample; s <= (sample < 0 ? S - 1 : sample); ++s) {
        for (int ts = frame < 0 ? 0 : frame; ts <= (frame < 0 ? T - 1 : frame); ++ts) {
            const float* src =
                t.values.data() + (static_cast<std::size_t>(s) * T + static_cast<std::size_t>(ts)) * frame_len;
            for (std::size_t i = 0; i < frame_len; ++i) f.values[i] = src[i];
            char name[48];
            std::snprintf(name, sizeof(name), "s%04d_f%04d.%s", s, ts, format.c_str());
            if (format == "pgm")
                io::write_pgm(out_dir / name, f);
            else
                io::write_ppm(out_dir / name, f);
        }
    }
}

void cmd_info(const fs::path& file, std::string& out) {
    std::ostringstream os;
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + file.string());
    char head[16] = {};
    in.read(head, sizeof(head));
    std::string prefix(head, static_cast<std::size_t>(in.gcount()));
    in.close();

    if (prefix.rfind("PFDS", 0) == 0) {
        io::TensorData t = io::read_tensor(file);
        os << "tensor container, dims [";
        for (std::size_t i = 0; i < t.dims.size(); ++i) os << (i ? "," : "") << t.dims[i];
        os << "], " << t.element_count() << " float32 values";
    } else if (prefix.rfind("pfl-model", 0) == 0) {
        os << "model file, kind " << io::model_kind(file);
    } else if (prefix.rfind("pfl-manifest", 0) == 0) {
        io::Manifest m = io::read_manifest(file);
        int ok = 0;
        for (const auto& r : m.records) ok += r.status == "ok" ? 1 : 0;
        os << "manifest, " << m.records.size() << " records (" << ok << " ok), settings: "
           << m.settings;
    } else if (prefix.rfind("pfl-report", 0) == 0) {
        os << "evaluation report";
    } else {
        throw FormatError(file.filename().string() + ": unrecognized file type");
    }
    out = os.str();
}

}  // namespace pfl::cli
