#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

namespace pfl::train {

enum class Optimizer { sgd_momentum, adam };

struct TrainConfig {
    Optimizer optimizer = Optimizer::adam;
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 200;
    int patience = 10;
    double min_delta = 1e-5;
    double validation_fraction = 0.1;
    double momentum = 0.9;  // sgd_momentum only
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_loss;
    int best_epoch = -1;             // 0-based
    bool early_stopped = false;
};

// Non-owning view over a model's parameter tensors, in a fixed documented
// order. Gradient sets expose matching views.
struct ParamRefs {
    std::vector<double*> data;
    std::vector<long> sizes;

    void add(Eigen::Ref<Eigen::MatrixXd> m) {
        data.push_back(m.data());
        sizes.push_back(m.size());
    }
    long total() const {
        long t = 0;
        for (long s : sizes) t += s;
        return t;
    }
};

// First-moment/second-moment optimizer state. step() applies one update in a
// fixed tensor order, so training is bit-reproducible for a fixed seed.
class OptimizerState {
  public:
    OptimizerState(Optimizer kind, const TrainConfig& cfg, const std::vector<long>& sizes);
    void step(const ParamRefs& params, const ParamRefs& grads);

  private:
    Optimizer kind_;
    double lr_;
    double momentum_;
    long t_ = 0;
    std::vector<Eigen::VectorXd> m_;  // momentum / first moment
    std::vector<Eigen::VectorXd> v_;  // second moment (adam)
};

// Deterministic shuffled split into train/validation index sets.
// Validation gets max(1, round(n*fraction)) entries; at least one sample
// stays on the training side.
std::pair<std::vector<int>, std::vector<int>> split_train_val(int n, double val_fraction,
                                                              std::uint64_t seed);

// Early-stopping tracker: improvement means dropping below best - min_delta.
class EarlyStopper {
  public:
    EarlyStopper(int patience, double min_delta) : patience_(patience), min_delta_(min_delta) {}
    // Returns true when this epoch is a new best.
    bool observe(double val_loss);
    bool should_stop() const { return stale_ >= patience_; }
    double best() const { return best_; }

  private:
    int patience_;
    double min_delta_;
    double best_ = std::numeric_limits<double>::infinity();
    int stale_ = 0;
};

}  // namespace pfl::train
