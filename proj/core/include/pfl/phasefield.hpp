#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pfl/grid.hpp"
#include "pfl/spectral.hpp"

namespace pfl::pf {

// The bulk free energy is a quartic double well. `standard_double_well` is
// g(X) = A*X^2*(1-X)^2 with minima at X=0 and X=1; `as_written` is the
// variant g(X) = A*X^2*(1-X^2).
enum class PotentialForm { standard_double_well, as_written };

struct PFParams {
    double x0 = 0.5;          // mean concentration (molar fraction)
    double mobility = 1.0;    // M
    double kappa = 0.5;       // gradient energy coefficient
    double barrier_a = 1.0;   // well barrier height A
    double dt = 0.01;
    int n_steps = 20000;
    int snapshot_stride = 200;
    double noise_amp = 0.05;  // initial perturbation amplitude
    std::uint64_t seed = 0;
    PotentialForm potential_form = PotentialForm::standard_double_well;

    void validate() const;
};

struct Trajectory {
    PFParams params;
    GridSpec grid;
    std::vector<Field2D> frames;  // one frame every snapshot_stride steps
};

// Parameter sweep over (x0, M, kappa). Sample i draws each value uniformly
// from its range using the stream seeded with mix_seed(base_seed, i); the
// draw order is x0, mobility, kappa, then one raw u64 for the simulation
// seed. This ordering is part of the reproducibility contract.
struct SweepSpec {
    int n_samples = 1;
    double x0_min = 0.25, x0_max = 0.75;
    double mobility_min = 0.8, mobility_max = 2.2;
    double kappa_min = 0.25, kappa_max = 0.75;
    std::uint64_t base_seed = 0;
    GridSpec grid;
    double dt = 0.01;
    int n_steps = 20000;
    int snapshot_stride = 200;
    double noise_amp = 0.05;
    double barrier_a = 1.0;
    PotentialForm potential_form = PotentialForm::standard_double_well;

    void validate() const;
};

// x0 plus iid uniform noise in [-noise_amp, +noise_amp] drawn cell by cell in
// row-major order from mt19937_64(seed), then recentred so the field mean is
// exactly x0.
Field2D init_field(const GridSpec& grid, double x0, double noise_amp, std::uint64_t seed);

double bulk_potential(double x, double a, PotentialForm form);
double bulk_potential_derivative(double x, double a, PotentialForm form);

// One semi-implicit spectral step: the stiff kappa*k^4 term is treated
// implicitly, the bulk term explicitly:
//   Xhat^{n+1} = (Xhat^n - dt*M*k2*Ghat) / (1 + dt*M*kappa*k4)
// Throws NumericalBlowup when the output leaves [-10, 10] or goes non-finite.
Field2D step_semi_implicit(const Field2D& field, const PFParams& params, const spectral::WaveTable& wt);

// Total free energy: sum over cells of [g(X) + (kappa/2)*|grad X|^2]*dx*dy,
// gradient by central differences with periodic wrap.
double free_energy(const Field2D& field, const PFParams& params);

// Same functional with the gradient term evaluated in Fourier space
// ((1/N) * sum_k k2 |Xhat_k|^2). This quadrature is the discrete Lyapunov
// functional of step_semi_implicit: it is non-increasing step by step, while
// the central-difference version can rise transiently on noisy fields whose
// gradient energy sits near Nyquist (central differences measure that band
// as ~0).
double free_energy_spectral(const Field2D& field, const PFParams& params,
                            const spectral::WaveTable& wt);

// init_field followed by n_steps semi-implicit steps; a frame is stored every
// snapshot_stride steps (first at step == stride). NumericalBlowup is
// rethrown with the failing step index attached.
Trajectory simulate(const PFParams& params, const GridSpec& grid);

// Parameters for sweep sample `index` (see SweepSpec for the draw order).
PFParams sweep_sample_params(const SweepSpec& sweep, int index);

struct SampleRun {
    int index = 0;
    PFParams params;
    std::string status;  // "ok" or "failed"
    std::string error;   // empty when ok
    std::optional<Trajectory> trajectory;
};

// Runs the sweep over a pool of `jobs` worker threads. `skip` lets callers
// resume: samples where skip(i) is true are neither simulated nor reported.
// on_done/on_fail are invoked from worker threads, possibly concurrently for
// different samples.
void run_sweep(const SweepSpec& sweep, int jobs,
               const std::function<bool(int)>& skip,
               const std::function<void(int, const PFParams&, const Trajectory&)>& on_done,
               const std::function<void(int, const PFParams&, const std::string&)>& on_fail);

// Convenience wrapper collecting every sample in index order. Per-sample
// failures are recorded and do not stop the sweep.
std::vector<SampleRun> generate_dataset(const SweepSpec& sweep, int jobs = 1);

}  // namespace pfl::pf
