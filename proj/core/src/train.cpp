#include "pfl/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pfl/rng.hpp"

namespace pfl::train {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw std::invalid_argument("TrainConfig: validation_fraction must be in (0,1)");
    if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
}

OptimizerState::OptimizerState(Optimizer kind, const TrainConfig& cfg, const std::vector<long>& sizes)
    : kind_(kind), lr_(cfg.learning_rate), momentum_(cfg.momentum) {
    m_.reserve(sizes.size());
    v_.reserve(sizes.size());
    for (long s : sizes) {
        m_.emplace_back(Eigen::VectorXd::Zero(s));
        if (kind_ == Optimizer::adam) v_.emplace_back(Eigen::VectorXd::Zero(s));
    }
}

void OptimizerState::step(const ParamRefs& params, const ParamRefs& grads) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t_;
    for (std::size_t k = 0; k < params.data.size(); ++k) {
        Eigen::Map<Eigen::VectorXd> p(params.data[k], params.sizes[k]);
        Eigen::Map<const Eigen::VectorXd> g(grads.data[k], grads.sizes[k]);
        if (kind_ == Optimizer::adam) {
            m_[k] = b1 * m_[k] + (1.0 - b1) * g;
            v_[k] = b2 * v_[k] + (1.0 - b2) * g.cwiseProduct(g);
            double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
            double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
            p.array() -= lr_ * (m_[k].array() / c1) /
                         ((v_[k].array() / c2).sqrt() + eps);
        } else {
            m_[k] = momentum_ * m_[k] - lr_ * g;
            p += m_[k];
        }
    }
}

std::pair<std::vector<int>, std::vector<int>> split_train_val(int n, double val_fraction,
                                                              std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("split_train_val: need at least 2 samples");
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(mix_seed(seed, 0x5117ULL));
    deterministic_shuffle(idx, rng);
    int n_val = static_cast<int>(std::lround(n * val_fraction));
    n_val = std::max(1, std::min(n_val, n - 1));
    std::vector<int> val(idx.begin(), idx.begin() + n_val);
    std::vector<int> tr(idx.begin() + n_val, idx.end());
    return {tr, val};
}

bool EarlyStopper::observe(double val_loss) {
    if (val_loss < best_ - min_delta_) {
        best_ = val_loss;
        stale_ = 0;
        return true;
    }
    ++stale_;
    return false;
}

}  // namespace pfl::train
