#include "pfl/phasefield.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "pfl/errors.hpp"
#include "pfl/rng.hpp"

namespace pfl::pf {

void PFParams::validate() const {
    if (!(x0 > 0.0 && x0 < 1.0)) throw std::invalid_argument("PFParams: x0 must be in (0,1)");
    if (!(mobility > 0.0)) throw std::invalid_argument("PFParams: mobility must be > 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("PFParams: kappa must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("PFParams: dt must be > 0");
    if (n_steps < 1) throw std::invalid_argument("PFParams: n_steps must be >= 1");
    if (snapshot_stride < 1 || n_steps % snapshot_stride != 0)
        throw std::invalid_argument("PFParams: snapshot_stride must be >= 1 and divide n_steps");
    if (noise_amp < 0.0 || !(x0 - noise_amp > 0.0) || !(x0 + noise_amp < 1.0))
        throw std::invalid_argument("PFParams: need noise_amp >= 0 and x0 +/- noise_amp inside (0,1)");
}

void SweepSpec::validate() const {
    if (n_samples < 1) throw std::invalid_argument("SweepSpec: n_samples must be >= 1");
    if (x0_min > x0_max || mobility_min > mobility_max || kappa_min > kappa_max)
        throw std::invalid_argument("SweepSpec: range min must be <= max");
    grid.validate();
    // Range endpoints must satisfy the per-sample invariants.
    PFParams lo = sweep_sample_params(*this, 0);
    lo.x0 = x0_min; lo.mobility = mobility_min; lo.kappa = kappa_min;
    lo.validate();
    PFParams hi = lo;
    hi.x0 = x0_max; hi.mobility = mobility_max; hi.kappa = kappa_max;
    hi.validate();
}

Field2D init_field(const GridSpec& grid, double x0, double noise_amp, std::uint64_t seed) {
    grid.validate();
    Field2D f(grid);
    std::mt19937_64 rng(seed);
    double sum = 0.0;
    for (double& v : f.values) {
        double u = (2.0 * u01(rng) - 1.0) * noise_amp;
        v = u;
        sum += u;
    }
    double mean_u = sum / static_cast<double>(f.values.size());
    for (double& v : f.values) v = x0 + (v - mean_u);
    return f;
}

double bulk_potential(double x, double a, PotentialForm form) {
    if (form == PotentialForm::standard_double_well) {
        double y = 1.0 - x;
        return a * x * x * y * y;
    }
    return a * x * x * (1.0 - x * x);
}

double bulk_potential_derivative(double x, double a, PotentialForm form) {
    if (form == PotentialForm::standard_double_well)
        return 2.0 * a * x * (1.0 - x) * (1.0 - 2.0 * x);
    return 2.0 * a * x - 4.0 * a * x * x * x;
}

Field2D step_semi_implicit(const Field2D& field, const PFParams& params, const spectral::WaveTable& wt) {
    if (!(wt.grid == field.grid))
        throw DimensionMismatch("step_semi_implicit: wave table grid does not match field grid");

    Field2D gprime(field.grid);
    for (std::size_t i = 0; i < field.values.size(); ++i)
        gprime.values[i] = bulk_potential_derivative(field.values[i], params.barrier_a, params.potential_form);

    spectral::Spectrum2D xhat = spectral::dft2_forward(field);
    spectral::Spectrum2D ghat = spectral::dft2_forward(gprime);

    const double dtm = params.dt * params.mobility;
    for (std::size_t i = 0; i < xhat.values.size(); ++i) {
        xhat.values[i] = (xhat.values[i] - dtm * wt.k2[i] * ghat.values[i]) /
                         (1.0 + dtm * params.kappa * wt.k4[i]);
    }

    Field2D out = spectral::dft2_inverse(xhat);
    for (double v : out.values) {
        if (!std::isfinite(v) || std::abs(v) > 10.0)
            throw NumericalBlowup("step_semi_implicit: field left the stable range");
    }
    return out;
}

double free_energy(const Field2D& field, const PFParams& params) {
    const GridSpec& g = field.grid;
    const double inv2dx = 1.0 / (2.0 * g.dx);
    const double inv2dy = 1.0 / (2.0 * g.dy);
    double total = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        int jp = (j + 1) % g.ny;
        int jm = (j + g.ny - 1) % g.ny;
        for (int i = 0; i < g.nx; ++i) {
            int ip = (i + 1) % g.nx;
            int im = (i + g.nx - 1) % g.nx;
            double x = field.at(i, j);
            double gx = (field.at(ip, j) - field.at(im, j)) * inv2dx;
            double gy = (field.at(i, jp) - field.at(i, jm)) * inv2dy;
            total += bulk_potential(x, params.barrier_a, params.potential_form) +
                     0.5 * params.kappa * (gx * gx + gy * gy);
        }
    }
    return total * g.dx * g.dy;
}

double free_energy_spectral(const Field2D& field, const PFParams& params,
                            const spectral::WaveTable& wt) {
    if (!(wt.grid == field.grid))
        throw DimensionMismatch("free_energy_spectral: wave table grid does not match field grid");
    double bulk = 0.0;
    for (double v : field.values) bulk += bulk_potential(v, params.barrier_a, params.potential_form);
    spectral::Spectrum2D s = spectral::dft2_forward(field);
    double grad = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) grad += wt.k2[i] * std::norm(s.values[i]);
    grad /= static_cast<double>(field.grid.size());
    return (bulk + 0.5 * params.kappa * grad) * field.grid.dx * field.grid.dy;
}

Trajectory simulate(const PFParams& params, const GridSpec& grid) {
    params.validate();
    grid.validate();

    Trajectory traj;
    traj.params = params;
    traj.grid = grid;
    traj.frames.reserve(static_cast<std::size_t>(params.n_steps / params.snapshot_stride));

    spectral::WaveTable wt = spectral::wave_table(grid);
    Field2D field = init_field(grid, params.x0, params.noise_amp, params.seed);

    for (int step = 1; step <= params.n_steps; ++step) {
        try {
            field = step_semi_implicit(field, params, wt);
        } catch (const NumericalBlowup& e) {
            throw NumericalBlowup(std::string(e.what()) + " at step " + std::to_string(step), step);
        }
        if (step % params.snapshot_stride == 0) traj.frames.push_back(field);
    }
    return traj;
}

PFParams sweep_sample_params(const SweepSpec& sweep, int index) {
    std::mt19937_64 stream(mix_seed(sweep.base_seed, static_cast<std::uint64_t>(index)));
    PFParams p;
    p.x0 = uniform_in(stream, sweep.x0_min, sweep.x0_max);
    p.mobility = uniform_in(stream, sweep.mobility_min, sweep.mobility_max);
    p.kappa = uniform_in(stream, sweep.kappa_min, sweep.kappa_max);
    p.seed = stream();
    p.barrier_a = sweep.barrier_a;
    p.dt = sweep.dt;
    p.n_steps = sweep.n_steps;
    p.snapshot_stride = sweep.snapshot_stride;
    p.noise_amp = sweep.noise_amp;
    p.potential_form = sweep.potential_form;
    return p;
}

void run_sweep(const SweepSpec& sweep, int jobs,
               const std::function<bool(int)>& skip,
               const std::function<void(int, const PFParams&, const Trajectory&)>& on_done,
               const std::function<void(int, const PFParams&, const std::string&)>& on_fail) {
    sweep.validate();
    if (jobs < 1) jobs = 1;
    jobs = std::min(jobs, sweep.n_samples);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= sweep.n_samples) return;
            if (skip && skip(i)) continue;
            PFParams params = sweep_sample_params(sweep, i);
            try {
                Trajectory traj = simulate(params, sweep.grid);
                on_done(i, params, traj);
            } catch (const std::exception& e) {
                on_fail(i, params, e.what());
            }
        }
    };

    if (jobs == 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

std::vector<SampleRun> generate_dataset(const SweepSpec& sweep, int jobs) {
    std::vector<SampleRun> runs(static_cast<std::size_t>(sweep.n_samples));
    std::mutex mu;
    run_sweep(
        sweep, jobs, nullptr,
        [&](int i, const PFParams& p, const Trajectory& traj) {
            std::lock_guard<std::mutex> lock(mu);
            runs[static_cast<std::size_t>(i)] = SampleRun{i, p, "ok", "", traj};
        },
        [&](int i, const PFParams& p, const std::string& err) {
            std::lock_guard<std::mutex> lock(mu);
            runs[static_cast<std::size_t>(i)] = SampleRun{i, p, "failed", err, std::nullopt};
        });
    return runs;
}

}  // namespace pfl::pf
