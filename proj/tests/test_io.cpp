#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "pfl/config.hpp"
#include "pfl/container.hpp"
#include "pfl/errors.hpp"
#include "pfl/image.hpp"
#include "pfl/manifest.hpp"
#include "pfl/model_io.hpp"

using namespace pfl;
using namespace pfl::io;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pfl_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("tensor container round trip") {
    TempDir dir;
    fs::path p = dir.path / "t.pfds";
    std::vector<std::uint64_t> dims{2, 3, 4};
    std::vector<float> values(24);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = 0.5f * static_cast<float>(i) - 3.0f;
    write_tensor(p, dims, values);

    TensorData t = read_tensor(p);
    CHECK(t.dims == dims);
    CHECK(t.values == values);

    // and through the independent reference reader
    auto ref = testutil::reference_read_tensor(p);
    CHECK(ref.dims == dims);
    CHECK(ref.values == values);
}

TEST_CASE("container rejects corrupted headers") {
    TempDir dir;
    fs::path p = dir.path / "t.pfds";
    std::vector<std::uint64_t> dims{4};
    std::vector<float> values{1, 2, 3, 4};
    write_tensor(p, dims, values);
    auto bytes = testutil::read_file_bytes(p);

    auto write_mutated = [&](std::size_t offset, unsigned char value) {
        auto copy = bytes;
        copy[offset] = value;
        fs::path q = dir.path / "bad.pfds";
        std::ofstream out(q, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(copy.data()), static_cast<std::streamsize>(copy.size()));
        out.close();
        return q;
    };

    CHECK_THROWS_AS(read_tensor(write_mutated(0, 'X')), FormatError);   // magic
    CHECK_THROWS_AS(read_tensor(write_mutated(4, 9)), FormatError);    // version
    CHECK_THROWS_AS(read_tensor(write_mutated(8, 7)), FormatError);    // dtype
}

TEST_CASE("container rejects truncated and oversized payloads") {
    TempDir dir;
    fs::path p = dir.path / "t.pfds";
    std::vector<std::uint64_t> dims{4};
    std::vector<float> values{1, 2, 3, 4};
    write_tensor(p, dims, values);
    auto bytes = testutil::read_file_bytes(p);

    fs::path trunc = dir.path / "trunc.pfds";
    {
        std::ofstream out(trunc, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size() - 6));
    }
    CHECK_THROWS_AS(read_tensor(trunc), FormatError);

    fs::path fat = dir.path / "fat.pfds";
    {
        std::ofstream out(fat, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        float extra = 9.0f;
        out.write(reinterpret_cast<const char*>(&extra), 4);
    }
    CHECK_THROWS_AS(read_tensor(fat), FormatError);
}

TEST_CASE("streaming writer matches whole-tensor writes and cleans up") {
    TempDir dir;
    fs::path a = dir.path / "a.pfds", b = dir.path / "b.pfds";
    std::vector<std::uint64_t> dims{3, 5};
    std::vector<float> values(15);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(i) * 1.5f;
    write_tensor(a, dims, values);
    {
        TensorWriter w(b, dims);
        w.append(std::span<const float>(values).subspan(0, 7));
        w.append(std::span<const float>(values).subspan(7));
        w.finish();
    }
    CHECK(testutil::read_file_bytes(a) == testutil::read_file_bytes(b));

    // abandoned writer leaves no tmp file behind
    fs::path c = dir.path / "c.pfds";
    {
        TensorWriter w(c, dims);
        w.append(std::span<const float>(values).subspan(0, 7));
    }
    CHECK_FALSE(fs::exists(c));
    CHECK_FALSE(fs::exists(dir.path / "c.pfds.tmp"));
}

TEST_CASE("manifest round trips with exact decimals") {
    Manifest m;
    m.settings = "samples=3 base_seed=42";
    m.records.push_back({0, 0.1, 1.9999999999999998, 0.25, 123456789012345ull, "ok"});
    m.records.push_back({1, 0.7071067811865476, 0.8, 0.75, 42ull, "failed"});
    m.records.push_back({2, 1.0 / 3.0, 2.2, 1e-17, 0ull, "ok"});

    Manifest back = parse_manifest(emit_manifest(m));
    CHECK(back == m);
    CHECK(emit_manifest(back) == emit_manifest(m));
}

TEST_CASE("manifest enforces dense ids and known statuses") {
    CHECK_THROWS_AS(parse_manifest("pfl-manifest 1\n1,0.5,1,0.5,7,ok\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest("pfl-manifest 1\n0,0.5,1,0.5,7,maybe\n"), FormatError);
    CHECK_THROWS_AS(parse_manifest("nonsense\n"), FormatError);
}

TEST_CASE("run config: defaults, file, overrides, typo protection") {
    TempDir dir;
    RunConfig cfg;
    CHECK(cfg.get_int("grid.nx") == 128);
    CHECK(cfg.get_double("pf.dt") == 0.01);

    fs::path file = dir.path / "run.cfg";
    {
        std::ofstream out(file);
        out << "# comment line\n";
        out << "grid.nx = 64\n";
        out << "sweep.x0 = 0.3:0.6\n";
    }
    cfg.load_file(file);
    CHECK(cfg.get_int("grid.nx") == 64);
    auto [lo, hi] = cfg.get_range("sweep.x0");
    CHECK(lo == 0.3);
    CHECK(hi == 0.6);

    cfg.apply_overrides({"grid.nx=32"});
    CHECK(cfg.get_int("grid.nx") == 32);

    CHECK_THROWS_AS(cfg.set("grid.nz", "4"), ConfigError);  // unknown key
    CHECK_THROWS_AS(cfg.apply_overrides({"pf.dtt=0.1"}), ConfigError);
    {
        std::ofstream out(file, std::ios::app);
        out << "pf.setps = 100\n";  // typo
    }
    RunConfig cfg2;
    CHECK_THROWS_AS(cfg2.load_file(file), ConfigError);

    RunConfig cfg3;
    cfg3.set("pf.dt", "abc");
    CHECK_THROWS_AS(cfg3.get_double("pf.dt"), ConfigError);
}

TEST_CASE("ae model save/load round trip") {
    TempDir dir;
    reduce::AeArch arch = reduce::make_ae_arch(10, 4, 1, reduce::Activation::tanh,
                                               reduce::Activation::sigmoid);
    reduce::AEModel model = reduce::ae_make(arch, 77);
    fs::path p = dir.path / "ae.pfm";
    save_ae_model(p, model, FrameShape{4, 4, 1});

    std::optional<FrameShape> shape;
    reduce::AEModel back = load_ae_model(p, &shape);
    REQUIRE(shape.has_value());
    CHECK(shape->ny == 4);
    CHECK(shape->channels == 1);
    CHECK(back.arch.layer_dims == model.arch.layer_dims);
    CHECK(back.arch.activations == model.arch.activations);
    // storage is f32: reloading must reproduce the rounded values exactly
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        Eigen::MatrixXd rounded = model.weights[l].unaryExpr(
            [](double v) { return static_cast<double>(static_cast<float>(v)); });
        CHECK(back.weights[l] == rounded);
    }
    CHECK(model_kind(p) == "ae");
}

TEST_CASE("pca model save/load round trip") {
    TempDir dir;
    Eigen::MatrixXd data = testutil::random_matrix(30, 6, 11, 0.0, 1.0);
    reduce::ScalerModel scaler = reduce::fit_scaler(data, reduce::ScalerKind::minmax);
    reduce::PCAModel pca = reduce::pca_fit(reduce::scaler_apply(scaler, data), 4);
    fs::path p = dir.path / "pca.pfm";
    save_pca_model(p, scaler, pca);

    auto [scaler2, pca2] = load_pca_model(p);
    CHECK(scaler2.kind == scaler.kind);
    CHECK(scaler2.degenerate == scaler.degenerate);
    CHECK(pca2.n_components() == 4);
    CHECK(pca2.n_features() == 6);
    Eigen::MatrixXd rounded = pca.components.unaryExpr(
        [](double v) { return static_cast<double>(static_cast<float>(v)); });
    CHECK(pca2.components == rounded);
    CHECK(model_kind(p) == "pca");
}

TEST_CASE("seq model save/load round trip") {
    TempDir dir;
    seq::SeqModel model = seq::seq_make(seq::CellKind::gru, 2, 5, 7, 4, 123);
    fs::path p = dir.path / "seq.pfm";
    save_seq_model(p, model);
    seq::SeqModel back = load_seq_model(p);
    CHECK(back.cell == seq::CellKind::gru);
    CHECK(back.n_layers == 2);
    CHECK(back.hidden_size == 5);
    Eigen::MatrixXd rounded = model.layers[0].wx.unaryExpr(
        [](double v) { return static_cast<double>(static_cast<float>(v)); });
    CHECK(back.layers[0].wx == rounded);
    CHECK(model_kind(p) == "seq");
}

TEST_CASE("model loader rejects the wrong kind and garbage") {
    TempDir dir;
    seq::SeqModel model = seq::seq_make(seq::CellKind::lstm, 1, 3, 5, 2, 5);
    fs::path p = dir.path / "seq.pfm";
    save_seq_model(p, model);
    CHECK_THROWS_AS(load_ae_model(p), FormatError);

    fs::path junk = dir.path / "junk.pfm";
    {
        std::ofstream out(junk);
        out << "hello\n";
    }
    CHECK_THROWS_AS(load_seq_model(junk), FormatError);
}

TEST_CASE("the documented 2x2 PGM example is byte-exact") {
    Field2D f(GridSpec{2, 2, 1.0, 1.0});
    f.values = {0.0, 1.0, 0.5, 0.5};
    auto bytes = encode_pgm(f);
    const std::string header = "P5\n2 2\n255\n";
    REQUIRE(bytes.size() == header.size() + 4);
    CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())) == header);
    CHECK(bytes[header.size() + 0] == 0);
    CHECK(bytes[header.size() + 1] == 255);
    CHECK(bytes[header.size() + 2] == 128);
    CHECK(bytes[header.size() + 3] == 128);
}

TEST_CASE("all-zero frames quantize to all-zero payloads") {
    Field2D f(GridSpec{4, 2, 1.0, 1.0});
    auto bytes = encode_pgm(f);
    for (std::size_t i = bytes.size() - 8; i < bytes.size(); ++i) CHECK(bytes[i] == 0);
}

TEST_CASE("values are clamped before quantization") {
    Field2D f(GridSpec{2, 2, 1.0, 1.0});
    f.values = {-0.5, 1.5, 0.25, 1.0};
    auto bytes = encode_pgm(f);
    CHECK(bytes[bytes.size() - 4] == 0);
    CHECK(bytes[bytes.size() - 3] == 255);
    CHECK(bytes[bytes.size() - 2] == 64);
    CHECK(bytes[bytes.size() - 1] == 255);
}

TEST_CASE("render-parse-render is idempotent for pgm and ppm") {
    TempDir dir;
    Field2D f = testutil::random_field(GridSpec{8, 6, 1.0, 1.0}, 2024, 0.0, 1.0);

    fs::path p1 = dir.path / "a.pgm", p2 = dir.path / "b.pgm";
    write_pgm(p1, f);
    write_pgm(p2, read_pgm(p1));
    CHECK(testutil::read_file_bytes(p1) == testutil::read_file_bytes(p2));

    fs::path q1 = dir.path / "a.ppm", q2 = dir.path / "b.ppm";
    write_ppm(q1, f);
    write_ppm(q2, read_ppm(q1));
    CHECK(testutil::read_file_bytes(q1) == testutil::read_file_bytes(q2));

    // and the reference image reader agrees with the library writer
    auto ref = testutil::reference_read_image(p1);
    CHECK(ref.width == 8);
    CHECK(ref.height == 6);
    CHECK(ref.channels == 1);
}

TEST_CASE("atomic writes leave no temp files behind") {
    TempDir dir;
    fs::path p = dir.path / "x.pfds";
    std::vector<std::uint64_t> dims{2};
    std::vector<float> values{1.0f, 2.0f};
    write_tensor(p, dims, values);
    write_text_atomic(dir.path / "y.txt", "hello\n");
    int files = 0;
    for (auto& entry : fs::directory_iterator(dir.path)) {
        ++files;
        CHECK(entry.path().extension() != ".tmp");
    }
    CHECK(files == 2);
}
