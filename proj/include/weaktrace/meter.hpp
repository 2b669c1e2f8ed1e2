#pragma once

// Exact von Neumann meter algebra.
//
// The initial meter wavefunction is <q|m> = (pi*delta)^(-1/4) exp(-q^2 / (2 delta)).
// A coupling exp(-i g P_M) translates it by g, so every meter state reached by the
// pipeline is a finite sum of translated copies. Inner products and pointer moments
// of such sums have closed forms; nothing here is discretized.

#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "weaktrace/error.hpp"

namespace weaktrace {

struct MeterConfig {
    double delta = 1.0;
    // Grid used only by quadrature cross-checks: half range = range_multiple * sqrt(delta)
    // beyond the outermost shift.
    double range_multiple = 10.0;
    int grid_points = 4096;

    void validate() const {
        if (!(delta > 0.0)) throw InvalidArgument("meter delta must be positive");
        if (!(range_multiple > 0.0) || grid_points < 2) {
            throw InvalidArgument("meter grid parameters must be positive");
        }
    }
};

template <typename Scalar>
Scalar branch_overlap(Scalar a, Scalar b, Scalar delta) {
    if (!(delta > Scalar(0))) throw InvalidArgument("branch_overlap: delta must be positive");
    const Scalar d = a - b;
    return std::exp(-d * d / (Scalar(4) * delta));
}

// <G_a| Q_M |G_b>
template <typename Scalar>
Scalar pointer_first_moment(Scalar a, Scalar b, Scalar delta) {
    return (a + b) / Scalar(2) * branch_overlap(a, b, delta);
}

template <typename Scalar>
Scalar gaussian_wavefunction(Scalar q, Scalar shift, Scalar delta) {
    const Scalar d = q - shift;
    return std::pow(std::numbers::pi_v<Scalar> * delta, Scalar(-0.25)) *
           std::exp(-d * d / (Scalar(2) * delta));
}

struct GaussianBranch {
    std::complex<double> coefficient;
    double shift = 0.0;
};

inline constexpr double kShiftMergeTol = 1e-14;

class MeterWave {
public:
    MeterWave() = default;
    explicit MeterWave(MeterConfig config) : config_(config) { config_.validate(); }
    MeterWave(MeterConfig config, const std::vector<GaussianBranch>& branches);

    // The undisplaced initial meter state.
    static MeterWave initial(MeterConfig config);

    // Adds a branch, merging with any branch at a coincident shift.
    void add(std::complex<double> coefficient, double shift);

    // Rigid translation of every branch.
    MeterWave shifted(double g) const;
    MeterWave scaled(std::complex<double> factor) const;

    const std::vector<GaussianBranch>& branches() const { return branches_; }
    const MeterConfig& config() const { return config_; }
    double delta() const { return config_.delta; }

    // Position-space wavefunction, for plotting and quadrature checks.
    std::complex<double> operator()(double q) const;

private:
    MeterConfig config_;
    std::vector<GaussianBranch> branches_;
};

std::complex<double> wave_inner(const MeterWave& a, const MeterWave& b);
double wave_norm2(const MeterWave& w);
// Throws NoPostselectedEvents when the norm is below 1e-30.
double wave_pointer_mean(const MeterWave& w);

// Inverse-CDF sampler for |psi(q)|^2 / norm2. The CDF is a closed-form sum of
// error functions; a tabulated grid brackets each draw and Newton steps with a
// bisection fallback polish it against the exact CDF.
class PointerSampler {
public:
    explicit PointerSampler(const MeterWave& wave, int table_points = 2049);

    double density(double q) const;
    double cdf(double q) const;
    double quantile(double u) const;

    template <typename Rng>
    double operator()(Rng& rng) const {
        return quantile(uniform01(rng));
    }

    template <typename Rng>
    static double uniform01(Rng& rng) {
        // 53 random mantissa bits, strictly inside (0, 1).
        return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    struct Term {
        double weight;
        double center;
    };
    std::vector<Term> terms_;
    double sqrt_delta_ = 1.0;
    double norm_prefactor_ = 1.0;
    std::vector<double> grid_;
    std::vector<double> grid_cdf_;
};

std::vector<double> sample_pointer_readout(const MeterWave& w, int n, std::uint64_t seed);

}  // namespace weaktrace
