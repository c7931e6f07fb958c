#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "pfl/reduce.hpp"
#include "pfl/sequence.hpp"

namespace pfl::metrics {

// Mean of squared elementwise differences (averaged over ALL elements, not
// summed per sample). Throws ShapeMismatch.
double mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Cumulative explained-variance ratio per retained component count
// (1..n_components); non-decreasing and bounded by 1.
std::vector<double> explained_variance_table(const reduce::PCAModel& model);

// Trivial forecaster: every predicted frame repeats the last context frame.
Eigen::MatrixXd persistence_baseline(const seq::SeqSample& sample, const seq::RolloutSpec& spec);

// Plain-text run report: key = value lines grouped in sections, diffable and
// round-trippable (parse(emit(r)) == r, doubles in shortest round-trip form).
struct EvalReport {
    struct MseEntry {
        std::string stage;
        double train = 0.0;
        double val = 0.0;
        bool operator==(const MseEntry&) const;
    };

    std::vector<std::string> stages;
    std::vector<MseEntry> mse;
    std::vector<std::pair<int, double>> explained_variance;  // cumulative, by count
    double reduction_ratio = 0.0;                            // 0 = not reported
    std::string reduction_label;                             // e.g. "1/196"
    std::vector<std::pair<int, double>> horizon_loss;
    std::vector<std::pair<std::string, double>> timings;     // seconds

    bool operator==(const EvalReport&) const;
    // Explained-variance entries must be ratios in [0,1], non-decreasing.
    void validate() const;
};

std::string emit_report(const EvalReport& report);
EvalReport parse_report(const std::string& text);

}  // namespace pfl::metrics
