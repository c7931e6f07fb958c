#include "pfl/model_io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "pfl/container.hpp"
#include "pfl/errors.hpp"

namespace pfl::io {

namespace {

using Header = std::vector<std::pair<std::string, std::string>>;

std::string header_text(const Header& header) {
    std::ostringstream out;
    out << "pfl-model 1\n";
    for (const auto& [k, v] : header) out << k << " = " << v << "\n";
    out << "---\n";
    return out.str();
}

Header read_header(std::istream& in, const std::string& what) {
    std::string line;
    if (!std::getline(in, line) || line != "pfl-model 1")
        throw FormatError(what + ": missing 'pfl-model 1' header");
    Header header;
    while (std::getline(in, line)) {
        if (line == "---") return header;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError(what + ": expected 'key = value' in header");
        auto strip = [](std::string s) {
            while (!s.empty() && (s.front() == ' ')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
            return s;
        };
        header.emplace_back(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    }
    throw FormatError(what + ": header not terminated by ---");
}

std::string lookup(const Header& header, const std::string& key, const std::string& what) {
    for (const auto& [k, v] : header)
        if (k == key) return v;
    throw FormatError(what + ": missing header key '" + key + "'");
}

bool has_key(const Header& header, const std::string& key) {
    for (const auto& [k, v] : header)
        if (k == key) return true;
    return false;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<int> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        out.push_back(std::stoi(item));
    if (out.empty()) throw FormatError(what + ": empty list");
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream out;
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    return out.str();
}

void append_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    std::vector<float> buf(static_cast<std::size_t>(m.size()));
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)  // row-major on disk
        for (Eigen::Index c = 0; c < m.cols(); ++c) buf[idx++] = static_cast<float>(m(r, c));
    std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    write_tensor(out, dims, buf);
}

void append_vector(std::ostream& out, const Eigen::VectorXd& v) {
    std::vector<float> buf(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) buf[static_cast<std::size_t>(i)] = static_cast<float>(v(i));
    std::uint64_t dims[1] = {static_cast<std::uint64_t>(v.size())};
    write_tensor(out, dims, buf);
}

Eigen::MatrixXd take_matrix(std::istream& in, const std::string& what) {
    TensorData t = read_tensor(in, what);
    if (t.dims.size() != 2) throw FormatError(what + ": expected rank-2 tensor");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(t.dims[0]), static_cast<Eigen::Index>(t.dims[1]));
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.values[idx++];
    return m;
}

Eigen::VectorXd take_vector(std::istream& in, const std::string& what) {
    TensorData t = read_tensor(in, what);
    if (t.dims.size() != 1) throw FormatError(what + ": expected rank-1 tensor");
    Eigen::VectorXd v(static_cast<Eigen::Index>(t.dims[0]));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = t.values[static_cast<std::size_t>(i)];
    return v;
}

void write_model_file(const std::filesystem::path& path, const std::string& header,
                      const std::function<void(std::ostream&)>& body) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        out.write(header.data(), static_cast<std::streamsize>(header.size()));
        body(out);
        if (!out) throw ConfigError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::ifstream open_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    return in;
}

}  // namespace

void save_ae_model(const std::filesystem::path& path, const reduce::AEModel& model,
                   const std::optional<FrameShape>& frame_shape) {
    Header header;
    header.emplace_back("kind", "ae");
    header.emplace_back("layer_dims", join_ints(model.arch.layer_dims));
    header.emplace_back("code_index", std::to_string(model.arch.code_index));
    std::ostringstream acts;
    for (std::size_t i = 0; i < model.arch.activations.size(); ++i)
        acts << (i ? "," : "") << reduce::to_string(model.arch.activations[i]);
    header.emplace_back("activations", acts.str());
    if (frame_shape) {
        header.emplace_back("frame_shape", std::to_string(frame_shape->ny) + "," +
                                               std::to_string(frame_shape->nx) + "," +
                                               std::to_string(frame_shape->channels));
    }
    header.emplace_back("tensors", std::to_string(2 * model.weights.size()));

    write_model_file(path, header_text(header), [&](std::ostream& out) {
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            append_matrix(out, model.weights[l]);
            append_vector(out, model.biases[l]);
        }
    });
}

reduce::AEModel load_ae_model(const std::filesystem::path& path,
                              std::optional<FrameShape>* frame_shape) {
    const std::string what = path.filename().string();
    std::ifstream in = open_model(path);
    Header header = read_header(in, what);
    if (lookup(header, "kind", what) != "ae") throw FormatError(what + ": not an ae model");

    reduce::AEModel model;
    model.arch.layer_dims = parse_int_list(lookup(header, "layer_dims", what), what);
    model.arch.code_index = std::stoi(lookup(header, "code_index", what));
    std::istringstream acts(lookup(header, "activations", what));
    std::string item;
    while (std::getline(acts, item, ',')) model.arch.activations.push_back(reduce::activation_from_string(item));
    model.arch.validate();

    if (frame_shape) {
        if (has_key(header, "frame_shape")) {
            auto v = parse_int_list(lookup(header, "frame_shape", what), what);
            if (v.size() != 3) throw FormatError(what + ": frame_shape needs ny,nx,channels");
            *frame_shape = FrameShape{v[0], v[1], v[2]};
        } else {
            frame_shape->reset();
        }
    }

    for (int l = 0; l < model.arch.n_layers(); ++l) {
        model.weights.push_back(take_matrix(in, what));
        model.biases.push_back(take_vector(in, what));
        if (model.weights.back().rows() != model.arch.layer_dims[static_cast<std::size_t>(l) + 1] ||
            model.weights.back().cols() != model.arch.layer_dims[static_cast<std::size_t>(l)])
            throw FormatError(what + ": weight tensor shape disagrees with layer_dims");
    }
    return model;
}

void save_pca_model(const std::filesystem::path& path, const reduce::ScalerModel& scaler,
                    const reduce::PCAModel& pca) {
    Header header;
    header.emplace_back("kind", "pca");
    header.emplace_back("features", std::to_string(pca.n_features()));
    header.emplace_back("components", std::to_string(pca.n_components()));
    header.emplace_back("total_variance", fmt_double(pca.total_variance));
    header.emplace_back("rank_deficient", pca.rank_deficient ? "1" : "0");
    header.emplace_back("scaler.kind",
                        scaler.kind == reduce::ScalerKind::minmax ? "minmax" : "zscore");
    header.emplace_back("tensors", "6");

    write_model_file(path, header_text(header), [&](std::ostream& out) {
        append_vector(out, pca.mean);
        append_matrix(out, pca.components);
        append_vector(out, pca.eigenvalues);
        append_vector(out, scaler.a);
        append_vector(out, scaler.b);
        Eigen::VectorXd degenerate(static_cast<Eigen::Index>(scaler.degenerate.size()));
        for (Eigen::Index i = 0; i < degenerate.size(); ++i)
            degenerate(i) = scaler.degenerate[static_cast<std::size_t>(i)];
        append_vector(out, degenerate);
    });
}

std::pair<reduce::ScalerModel, reduce::PCAModel> load_pca_model(const std::filesystem::path& path) {
    const std::string what = path.filename().string();
    std::ifstream in = open_model(path);
    Header header = read_header(in, what);
    if (lookup(header, "kind", what) != "pca") throw FormatError(what + ": not a pca model");

    reduce::PCAModel pca;
    pca.mean = take_vector(in, what);
    pca.components = take_matrix(in, what);
    pca.eigenvalues = take_vector(in, what);
    pca.total_variance = std::stod(lookup(header, "total_variance", what));
    pca.rank_deficient = lookup(header, "rank_deficient", what) == "1";

    reduce::ScalerModel scaler;
    scaler.kind = lookup(header, "scaler.kind", what) == "minmax" ? reduce::ScalerKind::minmax
                                                                  : reduce::ScalerKind::zscore;
    scaler.a = take_vector(in, what);
    scaler.b = take_vector(in, what);
    Eigen::VectorXd degenerate = take_vector(in, what);
    scaler.degenerate.resize(static_cast<std::size_t>(degenerate.size()));
    for (Eigen::Index i = 0; i < degenerate.size(); ++i)
        scaler.degenerate[static_cast<std::size_t>(i)] = degenerate(i) != 0.0f;

    if (pca.components.cols() != pca.mean.size() ||
        pca.components.rows() != pca.eigenvalues.size())
        throw FormatError(what + ": inconsistent pca tensor shapes");
    return {std::move(scaler), std::move(pca)};
}

void save_seq_model(const std::filesystem::path& path, const seq::SeqModel& model) {
    Header header;
    header.emplace_back("kind", "seq");
    header.emplace_back("cell", model.cell == seq::CellKind::lstm ? "lstm" : "gru");
    header.emplace_back("layers", std::to_string(model.n_layers));
    header.emplace_back("hidden", std::to_string(model.hidden_size));
    header.emplace_back("input", std::to_string(model.input_size));
    header.emplace_back("latent", std::to_string(model.latent_dim));
    header.emplace_back("tensors", std::to_string(3 * model.layers.size() + 2));

    write_model_file(path, header_text(header), [&](std::ostream& out) {
        for (const auto& p : model.layers) {
            append_matrix(out, p.wx);
            append_matrix(out, p.wh);
            append_vector(out, p.b);
        }
        append_matrix(out, model.w_out);
        append_vector(out, model.b_out);
    });
}

seq::SeqModel load_seq_model(const std::filesystem::path& path) {
    const std::string what = path.filename().string();
    std::ifstream in = open_model(path);
    Header header = read_header(in, what);
    if (lookup(header, "kind", what) != "seq") throw FormatError(what + ": not a seq model");

    seq::SeqModel model;
    model.cell = lookup(header, "cell", what) == "lstm" ? seq::CellKind::lstm : seq::CellKind::gru;
    model.n_layers = std::stoi(lookup(header, "layers", what));
    model.hidden_size = std::stoi(lookup(header, "hidden", what));
    model.input_size = std::stoi(lookup(header, "input", what));
    model.latent_dim = std::stoi(lookup(header, "latent", what));
    for (int l = 0; l < model.n_layers; ++l) {
        seq::LayerParams p;
        p.wx = take_matrix(in, what);
        p.wh = take_matrix(in, what);
        p.b = take_vector(in, what);
        model.layers.push_back(std::move(p));
    }
    model.w_out = take_matrix(in, what);
    model.b_out = take_vector(in, what);
    model.validate();
    return model;
}

std::string model_kind(const std::filesystem::path& path) {
    std::ifstream in = open_model(path);
    Header header = read_header(in, path.filename().string());
    return lookup(header, "kind", path.filename().string());
}

}  // namespace pfl::io
