#include "pfl/reduce.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "pfl/errors.hpp"

namespace pfl::reduce {

VectorXd flatten_frame(const Field2D& frame, int channels) {
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("flatten_frame: channels must be 1 or 3");
    const auto n = static_cast<Eigen::Index>(frame.values.size());
    VectorXd out(n * channels);
    if (channels == 1) {
        for (Eigen::Index i = 0; i < n; ++i) out(i) = frame.values[static_cast<std::size_t>(i)];
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = frame.values[static_cast<std::size_t>(i)];
            out(3 * i) = v;
            out(3 * i + 1) = v;
            out(3 * i + 2) = v;
        }
    }
    return out;
}

Field2D unflatten_frame(const VectorXd& flat, const GridSpec& grid, int channels) {
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("unflatten_frame: channels must be 1 or 3");
    if (flat.size() != static_cast<Eigen::Index>(grid.size()) * channels)
        throw DimensionMismatch("unflatten_frame: vector length does not match grid*channels");
    Field2D f(grid);
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (channels == 1) {
        for (Eigen::Index i = 0; i < n; ++i) f.values[static_cast<std::size_t>(i)] = flat(i);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            // Mean written as first + corrections: exact when the three
            // channels are identical (replicated grayscale), so the flatten
            // round trip is bit-exact.
            double a = flat(3 * i);
            f.values[static_cast<std::size_t>(i)] =
                a + ((flat(3 * i + 1) - a) + (flat(3 * i + 2) - a)) / 3.0;
        }
    }
    return f;
}

// ---------------------------------------------------------------------------

bool ScalerModel::any_degenerate() const {
    return std::any_of(degenerate.begin(), degenerate.end(), [](std::uint8_t d) { return d != 0; });
}

ScalerModel fit_scaler(const MatrixXd& data, ScalerKind kind) {
    if (data.rows() < 1) throw std::invalid_argument("fit_scaler: need at least one row");
    ScalerModel m;
    m.kind = kind;
    const Eigen::Index nf = data.cols();
    m.a.resize(nf);
    m.b.resize(nf);
    m.degenerate.assign(static_cast<std::size_t>(nf), 0);
    if (kind == ScalerKind::minmax) {
        m.a = data.colwise().minCoeff();
        m.b = data.colwise().maxCoeff();
        for (Eigen::Index j = 0; j < nf; ++j)
            if (m.b(j) - m.a(j) == 0.0) m.degenerate[static_cast<std::size_t>(j)] = 1;
    } else {
        m.a = data.colwise().mean();
        for (Eigen::Index j = 0; j < nf; ++j) {
            double var = (data.col(j).array() - m.a(j)).square().mean();  // population variance
            m.b(j) = std::sqrt(var);
            if (m.b(j) == 0.0) m.degenerate[static_cast<std::size_t>(j)] = 1;
        }
    }
    return m;
}

MatrixXd scaler_apply(const ScalerModel& model, const MatrixXd& data) {
    if (data.cols() != model.a.size())
        throw DimensionMismatch("scaler_apply: feature count does not match model");
    MatrixXd out = data;
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        if (model.degenerate[static_cast<std::size_t>(j)]) continue;
        if (model.kind == ScalerKind::minmax)
            out.col(j) = (data.col(j).array() - model.a(j)) / (model.b(j) - model.a(j));
        else
            out.col(j) = (data.col(j).array() - model.a(j)) / model.b(j);
    }
    return out;
}

MatrixXd scaler_invert(const ScalerModel& model, const MatrixXd& scaled) {
    if (scaled.cols() != model.a.size())
        throw DimensionMismatch("scaler_invert: feature count does not match model");
    MatrixXd out = scaled;
    for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
        if (model.degenerate[static_cast<std::size_t>(j)]) continue;
        if (model.kind == ScalerKind::minmax)
            out.col(j) = scaled.col(j).array() * (model.b(j) - model.a(j)) + model.a(j);
        else
            out.col(j) = scaled.col(j).array() * model.b(j) + model.a(j);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// Flip each row so its largest-|entry| coefficient is positive; first maximum
// wins on ties. Keeps fitted components reproducible across eigensolver
// sign choices.
void fix_component_signs(MatrixXd& components) {
    for (Eigen::Index r = 0; r < components.rows(); ++r) {
        Eigen::Index arg = 0;
        double best = 0.0;
        for (Eigen::Index c = 0; c < components.cols(); ++c) {
            double a = std::abs(components(r, c));
            if (a > best) {
                best = a;
                arg = c;
            }
        }
        if (components(r, arg) < 0.0) components.row(r) = -components.row(r);
    }
}

}  // namespace

PCAModel pca_fit(const MatrixXd& data, int n_components) {
    const Eigen::Index n = data.rows(), m = data.cols();
    if (n < 2) throw std::invalid_argument("pca_fit: need at least 2 samples");
    const Eigen::Index max_k = std::min<Eigen::Index>(n - 1, m);
    if (n_components < 1 || n_components > max_k)
        throw std::invalid_argument("pca_fit: n_components must be in [1, min(n-1, m)]");

    PCAModel model;
    model.mean = data.colwise().mean();
    MatrixXd centered = data.rowwise() - model.mean.transpose();
    model.total_variance = centered.squaredNorm() / static_cast<double>(n - 1);

    const auto k = static_cast<Eigen::Index>(n_components);
    if (m <= n - 1) {
        // Feature covariance route.
        MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
        model.eigenvalues.resize(k);
        model.components.resize(k, m);
        for (Eigen::Index i = 0; i < k; ++i) {
            // Eigen returns eigenvalues in increasing order.
            Eigen::Index src = m - 1 - i;
            model.eigenvalues(i) = std::max(0.0, es.eigenvalues()(src));
            model.components.row(i) = es.eigenvectors().col(src).transpose();
        }
    } else {
        // Gram route for wide data: eigenvectors of (Z Z^T)/(n-1) map back to
        // feature space as Z^T u / sqrt((n-1) lambda).
        MatrixXd gram = centered * centered.transpose() / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
        model.eigenvalues.resize(k);
        model.components.resize(k, m);
        for (Eigen::Index i = 0; i < k; ++i) {
            Eigen::Index src = n - 1 - i;
            double lambda = std::max(0.0, es.eigenvalues()(src));
            model.eigenvalues(i) = lambda;
            VectorXd v = centered.transpose() * es.eigenvectors().col(src);
            double norm = v.norm();
            if (norm > 0.0) v /= norm;
            model.components.row(i) = v.transpose();
        }
    }
    fix_component_signs(model.components);
    model.rank_deficient =
        model.eigenvalues(k - 1) < 1e-12 * std::max(model.eigenvalues(0), 0.0);
    return model;
}

MatrixXd pca_transform(const PCAModel& model, const MatrixXd& data) {
    if (data.cols() != model.mean.size())
        throw DimensionMismatch("pca_transform: feature count does not match model");
    return (data.rowwise() - model.mean.transpose()) * model.components.transpose();
}

MatrixXd pca_inverse(const PCAModel& model, const MatrixXd& codes) {
    if (codes.cols() != model.components.rows())
        throw DimensionMismatch("pca_inverse: code width does not match model");
    return (codes * model.components).rowwise() + model.mean.transpose();
}

// ---------------------------------------------------------------------------

int ReductionPipeline::code_dim() const {
    if (const auto* ae = std::get_if<AEModel>(&stage2)) return ae->code_dim();
    return std::get<PcaStage>(stage2).pca.n_components();
}

double ReductionPipeline::reduction_ratio() const {
    return static_cast<double>(input_dim()) / static_cast<double>(code_dim());
}

std::string ReductionPipeline::reduction_label() const {
    return "1/" + std::to_string(static_cast<long>(std::floor(reduction_ratio())));
}

MatrixXd ReductionPipeline::encode_rows(const MatrixXd& rows) const {
    MatrixXd codes1 = stage1.encode_rows(rows);
    if (const auto* ae = std::get_if<AEModel>(&stage2)) return ae->encode_rows(codes1);
    const auto& st = std::get<PcaStage>(stage2);
    return pca_transform(st.pca, scaler_apply(st.scaler, codes1));
}

MatrixXd ReductionPipeline::decode_rows(const MatrixXd& codes) const {
    MatrixXd codes1;
    if (const auto* ae = std::get_if<AEModel>(&stage2)) {
        codes1 = ae->decode_rows(codes);
    } else {
        const auto& st = std::get<PcaStage>(stage2);
        codes1 = scaler_invert(st.scaler, pca_inverse(st.pca, codes));
    }
    MatrixXd out = stage1.decode_rows(codes1);
    return out.cwiseMax(0.0).cwiseMin(1.0);
}

ReductionPipeline compose_pipeline(AEModel stage1, AEModel stage2) {
    if (stage1.code_dim() != stage2.input_dim())
        throw DimensionMismatch("compose_pipeline: stage-1 code dim != stage-2 input dim");
    return ReductionPipeline{std::move(stage1), std::move(stage2)};
}

ReductionPipeline compose_pipeline(AEModel stage1, ScalerModel scaler, PCAModel pca) {
    if (stage1.code_dim() != scaler.n_features() || scaler.n_features() != pca.n_features())
        throw DimensionMismatch("compose_pipeline: stage-1 code dim != PCA feature dim");
    return ReductionPipeline{std::move(stage1), PcaStage{std::move(scaler), std::move(pca)}};
}

}  // namespace pfl::reduce
