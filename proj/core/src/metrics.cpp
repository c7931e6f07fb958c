#include "pfl/metrics.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "pfl/errors.hpp"

namespace pfl::metrics {

double mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeMismatch("mse: operand shapes differ");
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw ShapeMismatch("mse: operand lengths differ");
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

std::vector<double> explained_variance_table(const reduce::PCAModel& model) {
    std::vector<double> table;
    table.reserve(static_cast<std::size_t>(model.n_components()));
    double cum = 0.0;
    for (int i = 0; i < model.n_components(); ++i) {
        cum += model.explained_variance_ratio(i);
        table.push_back(cum);
    }
    return table;
}

Eigen::MatrixXd persistence_baseline(const seq::SeqSample& sample, const seq::RolloutSpec& spec) {
    const int ctx = seq::resolved_context(spec, sample.length());
    Eigen::MatrixXd pred(spec.horizon, sample.latent_dim());
    Eigen::RowVectorXd last = sample.features.row(ctx - 1).head(sample.latent_dim());
    for (int j = 0; j < spec.horizon; ++j) pred.row(j) = last;
    return pred;
}

// ---------------------------------------------------------------------------
// Report text format

namespace {

bool double_eq(double a, double b) {
    return a == b || (std::isnan(a) && std::isnan(b));
}

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw FormatError("report: bad numeric value '" + std::string(s) + "'");
    return v;
}

int parse_int(std::string_view s) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw FormatError("report: bad integer '" + std::string(s) + "'");
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

bool EvalReport::MseEntry::operator==(const MseEntry& o) const {
    return stage == o.stage && double_eq(train, o.train) && double_eq(val, o.val);
}

bool EvalReport::operator==(const EvalReport& o) const {
    if (stages != o.stages || mse != o.mse || reduction_label != o.reduction_label) return false;
    if (!double_eq(reduction_ratio, o.reduction_ratio)) return false;
    auto pairs_eq = [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].first != b[i].first || !double_eq(a[i].second, b[i].second)) return false;
        return true;
    };
    return pairs_eq(explained_variance, o.explained_variance) &&
           pairs_eq(horizon_loss, o.horizon_loss) && pairs_eq(timings, o.timings);
}

void EvalReport::validate() const {
    double prev = 0.0;
    for (const auto& [count, ratio] : explained_variance) {
        if (ratio < -1e-12 || ratio > 1.0 + 1e-9)
            throw FormatError("report: explained variance ratio outside [0,1]");
        if (ratio < prev - 1e-12)
            throw FormatError("report: cumulative explained variance must be non-decreasing");
        prev = ratio;
        (void)count;
    }
}

std::string emit_report(const EvalReport& report) {
    report.validate();
    std::ostringstream out;
    out << "pfl-report 1\n";
    if (!report.stages.empty()) {
        out << "[stages]\n";
        for (std::size_t i = 0; i < report.stages.size(); ++i)
            out << i << " = " << report.stages[i] << "\n";
    }
    if (!report.mse.empty()) {
        out << "[mse]\n";
        for (const auto& e : report.mse) {
            out << e.stage << ".train = " << fmt_double(e.train) << "\n";
            out << e.stage << ".val = " << fmt_double(e.val) << "\n";
        }
    }
    if (!report.explained_variance.empty()) {
        out << "[explained_variance]\n";
        for (const auto& [count, ratio] : report.explained_variance)
            out << count << " = " << fmt_double(ratio) << "\n";
    }
    if (report.reduction_ratio != 0.0 || !report.reduction_label.empty()) {
        out << "[reduction]\n";
        out << "ratio = " << fmt_double(report.reduction_ratio) << "\n";
        out << "label = " << report.reduction_label << "\n";
    }
    if (!report.horizon_loss.empty()) {
        out << "[horizon_loss]\n";
        for (const auto& [k, loss] : report.horizon_loss) out << k << " = " << fmt_double(loss) << "\n";
    }
    if (!report.timings.empty()) {
        out << "[timings]\n";
        for (const auto& [name, secs] : report.timings) out << name << " = " << fmt_double(secs) << "\n";
    }
    return out.str();
}

EvalReport parse_report(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "pfl-report 1")
        throw FormatError("report: missing 'pfl-report 1' header");

    EvalReport r;
    std::string section;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        if (sv.front() == '[' && sv.back() == ']') {
            section = std::string(sv.substr(1, sv.size() - 2));
            continue;
        }
        auto eq = sv.find('=');
        if (eq == std::string_view::npos) throw FormatError("report: expected 'key = value' line");
        std::string key(trim(sv.substr(0, eq)));
        std::string value(trim(sv.substr(eq + 1)));

        if (section == "stages") {
            if (parse_int(key) != static_cast<int>(r.stages.size()))
                throw FormatError("report: stage indices must be dense from 0");
            r.stages.push_back(value);
        } else if (section == "mse") {
            auto dot = key.rfind('.');
            if (dot == std::string::npos) throw FormatError("report: mse key needs stage.field");
            std::string stage = key.substr(0, dot);
            std::string field = key.substr(dot + 1);
            if (r.mse.empty() || r.mse.back().stage != stage) {
                if (field != "train") throw FormatError("report: mse entries start with .train");
                r.mse.push_back({stage, parse_double(value), 0.0});
            } else if (field == "val") {
                r.mse.back().val = parse_double(value);
            } else {
                throw FormatError("report: unexpected mse field '" + field + "'");
            }
        } else if (section == "explained_variance") {
            r.explained_variance.emplace_back(parse_int(key), parse_double(value));
        } else if (section == "reduction") {
            if (key == "ratio")
                r.reduction_ratio = parse_double(value);
            else if (key == "label")
                r.reduction_label = value;
            else
                throw FormatError("report: unexpected reduction key '" + key + "'");
        } else if (section == "horizon_loss") {
            r.horizon_loss.emplace_back(parse_int(key), parse_double(value));
        } else if (section == "timings") {
            r.timings.emplace_back(key, parse_double(value));
        } else {
            throw FormatError("report: unknown section '" + section + "'");
        }
    }
    r.validate();
    return r;
}

}  // namespace pfl::metrics
