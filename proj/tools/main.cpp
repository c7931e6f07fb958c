// pfl: phase-field latent toolkit.
//
// Subcommands cover the full pipeline: generate a spinodal-decomposition
// dataset, train/apply autoencoder and PCA reductions, train LSTM/GRU
// forecasters on the latent trajectories, roll out predictions and decode
// them back to images.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "pfl/commands.hpp"
#include "pfl/config.hpp"
#include "pfl/errors.hpp"

namespace {

struct ConfigArgs {
    std::string config_file;
    std::vector<std::string> sets;

    pfl::io::RunConfig resolve() const {
        pfl::io::RunConfig cfg;
        if (!config_file.empty()) cfg.load_file(config_file);
        cfg.apply_overrides(sets);
        return cfg;
    }
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("--config", args.config_file, "key=value config file");
    cmd->add_option("--set", args.sets, "override a config key, e.g. --set pf.steps=2000")
        ->take_all();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pfl - phase-field dataset generation, latent reduction and forecasting"};
    app.require_subcommand(1);

    // generate
    ConfigArgs gen_cfg;
    std::string gen_out;
    int gen_jobs = 0;
    auto* gen = app.add_subcommand("generate", "run a (x0, M, kappa) sweep and store the dataset");
    add_config_options(gen, gen_cfg);
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--jobs", gen_jobs, "worker threads (default run.jobs, 0 = all cores)");

    // train-ae
    ConfigArgs tae_cfg;
    std::string tae_data, tae_model, tae_report;
    auto* tae = app.add_subcommand("train-ae", "train an autoencoder on a dataset container");
    add_config_options(tae, tae_cfg);
    tae->add_option("--data", tae_data, "input container (.pfds)")->required();
    tae->add_option("--model-out", tae_model, "output model file")->required();
    tae->add_option("--report", tae_report, "output report file");

    // encode
    ConfigArgs enc_cfg;
    std::string enc_data, enc_model, enc_out;
    auto* enc = app.add_subcommand("encode", "encode a container through an autoencoder");
    add_config_options(enc, enc_cfg);
    enc->add_option("--data", enc_data, "input container")->required();
    enc->add_option("--model", enc_model, "autoencoder model")->required();
    enc->add_option("--out", enc_out, "output codes container")->required();

    // fit-pca
    ConfigArgs pca_cfg;
    std::string pca_codes, pca_model, pca_report;
    auto* fpc = app.add_subcommand("fit-pca", "fit scaler + PCA on a codes container");
    add_config_options(fpc, pca_cfg);
    fpc->add_option("--codes", pca_codes, "input codes container")->required();
    fpc->add_option("--model-out", pca_model, "output model file")->required();
    fpc->add_option("--report", pca_report, "output report file");

    // transform
    ConfigArgs tr_cfg;
    std::string tr_codes, tr_model, tr_out;
    auto* tr = app.add_subcommand("transform", "project codes through a fitted PCA model");
    add_config_options(tr, tr_cfg);
    tr->add_option("--codes", tr_codes, "input codes container")->required();
    tr->add_option("--model", tr_model, "pca model")->required();
    tr->add_option("--out", tr_out, "output latent container")->required();

    // train-seq
    ConfigArgs tsq_cfg;
    std::string tsq_latent, tsq_manifest, tsq_model, tsq_report;
    auto* tsq = app.add_subcommand("train-seq", "train an LSTM/GRU on latent trajectories");
    add_config_options(tsq, tsq_cfg);
    tsq->add_option("--latent", tsq_latent, "latent container [S,T,L]")->required();
    tsq->add_option("--manifest", tsq_manifest, "sweep manifest (statics per sample)")->required();
    tsq->add_option("--model-out", tsq_model, "output model file")->required();
    tsq->add_option("--report", tsq_report, "output report file");

    // predict
    ConfigArgs prd_cfg;
    std::string prd_latent, prd_manifest, prd_model, prd_out;
    auto* prd = app.add_subcommand("predict", "roll out predicted latent frames");
    add_config_options(prd, prd_cfg);
    prd->add_option("--latent", prd_latent, "latent container [S,T,L]")->required();
    prd->add_option("--manifest", prd_manifest, "sweep manifest")->required();
    prd->add_option("--model", prd_model, "sequence model")->required();
    prd->add_option("--out", prd_out, "output predictions [S,k,L]")->required();

    // decode
    ConfigArgs dec_cfg;
    std::string dec_latent, dec_ae, dec_stage2, dec_out, dec_ref, dec_report;
    auto* dec = app.add_subcommand("decode", "decode latent frames back to images");
    add_config_options(dec, dec_cfg);
    dec->add_option("--latent", dec_latent, "latent/codes container")->required();
    dec->add_option("--ae", dec_ae, "stage-1 autoencoder model")->required();
    dec->add_option("--stage2", dec_stage2, "stage-2 model (pca or ae); omit for stage-1 codes");
    dec->add_option("--out", dec_out, "output frames container")->required();
    dec->add_option("--reference", dec_ref, "reference container for MSE reporting");
    dec->add_option("--report", dec_report, "output report file");

    // render
    ConfigArgs ren_cfg;
    std::string ren_in, ren_out, ren_format = "pgm";
    int ren_sample = -1, ren_frame = -1;
    auto* ren = app.add_subcommand("render", "write frames as PGM/PPM images");
    add_config_options(ren, ren_cfg);
    ren->add_option("--frames", ren_in, "frames container [S,T,ny,nx]")->required();
    ren->add_option("--outdir", ren_out, "output directory")->required();
    ren->add_option("--format", ren_format, "pgm or ppm");
    ren->add_option("--sample", ren_sample, "sample index (-1 = all)");
    ren->add_option("--frame", ren_frame, "frame index (-1 = all)");

    // info
    std::string info_file;
    auto* inf = app.add_subcommand("info", "describe a pfl file");
    inf->add_option("file", info_file, "container / model / manifest / report")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            pfl::cli::GenerateResult r = pfl::cli::cmd_generate(gen_cfg.resolve(), gen_out, gen_jobs);
            std::printf("generate: %d ok, %d failed\n", r.n_ok, r.n_failed);
            return r.exit_code();
        }
        if (tae->parsed()) {
            pfl::cli::cmd_train_ae(tae_cfg.resolve(), tae_data, tae_model, tae_report);
        } else if (enc->parsed()) {
            pfl::cli::cmd_encode(enc_cfg.resolve(), enc_data, enc_model, enc_out);
        } else if (fpc->parsed()) {
            pfl::cli::cmd_fit_pca(pca_cfg.resolve(), pca_codes, pca_model, pca_report);
        } else if (tr->parsed()) {
            pfl::cli::cmd_transform(tr_cfg.resolve(), tr_codes, tr_model, tr_out);
        } else if (tsq->parsed()) {
            pfl::cli::cmd_train_seq(tsq_cfg.resolve(), tsq_latent, tsq_manifest, tsq_model, tsq_report);
        } else if (prd->parsed()) {
            pfl::cli::cmd_predict(prd_cfg.resolve(), prd_latent, prd_manifest, prd_model, prd_out);
        } else if (dec->parsed()) {
            pfl::cli::cmd_decode(dec_cfg.resolve(), dec_latent, dec_ae, dec_stage2, dec_out, dec_ref,
                                 dec_report);
        } else if (ren->parsed()) {
            pfl::cli::cmd_render(ren_cfg.resolve(), ren_in, ren_out, ren_format, ren_sample, ren_frame);
        } else if (inf->parsed()) {
            std::string text;
            pfl::cli::cmd_info(info_file, text);
            std::cout << text << "\n";
        }
        return pfl::cli::kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pfl::cli::exit_code_for(e);
    }
}
