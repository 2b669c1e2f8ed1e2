#include "weaktrace/meter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace weaktrace {

MeterWave::MeterWave(MeterConfig config, const std::vector<GaussianBranch>& branches)
    : MeterWave(config) {
    for (const auto& b : branches) add(b.coefficient, b.shift);
}

MeterWave MeterWave::initial(MeterConfig config) {
    MeterWave w(config);
    w.add(1.0, 0.0);
    return w;
}

void MeterWave::add(std::complex<double> coefficient, double shift) {
    if (!std::isfinite(shift) || !std::isfinite(coefficient.real()) ||
        !std::isfinite(coefficient.imag())) {
        throw InvalidArgument("meter branch must be finite");
    }
    for (auto& b : branches_) {
        if (std::abs(b.shift - shift) < kShiftMergeTol) {
            b.coefficient += coefficient;
            return;
        }
    }
    branches_.push_back({coefficient, shift});
}

MeterWave MeterWave::shifted(double g) const {
    MeterWave out(config_);
    for (const auto& b : branches_) out.add(b.coefficient, b.shift + g);
    return out;
}

MeterWave MeterWave::scaled(std::complex<double> factor) const {
    MeterWave out(config_);
    for (const auto& b : branches_) out.add(b.coefficient * factor, b.shift);
    return out;
}

std::complex<double> MeterWave::operator()(double q) const {
    std::complex<double> psi = 0.0;
    for (const auto& b : branches_) psi += b.coefficient * gaussian_wavefunction(q, b.shift, delta());
    return psi;
}

std::complex<double> wave_inner(const MeterWave& a, const MeterWave& b) {
    if (a.delta() != b.delta()) throw InvalidArgument("wave_inner: meters have different delta");
    std::complex<double> sum = 0.0;
    for (const auto& x : a.branches()) {
        for (const auto& y : b.branches()) {
            sum += std::conj(x.coefficient) * y.coefficient * branch_overlap(x.shift, y.shift, a.delta());
        }
    }
    return sum;
}

double wave_norm2(const MeterWave& w) {
    return std::max(0.0, wave_inner(w, w).real());
}

double wave_pointer_mean(const MeterWave& w) {
    const double n2 = wave_norm2(w);
    if (n2 <= 1e-30) throw NoPostselectedEvents("meter wave has vanishing norm");
    double moment = 0.0;
    for (const auto& x : w.branches()) {
        for (const auto& y : w.branches()) {
            moment += (std::conj(x.coefficient) * y.coefficient).real() *
                      pointer_first_moment(x.shift, y.shift, w.delta());
        }
    }
    return moment / n2;
}

PointerSampler::PointerSampler(const MeterWave& wave, int table_points) {
    const double n2 = wave_norm2(wave);
    if (n2 <= 1e-30) throw NoPostselectedEvents("cannot sample a meter wave with vanishing norm");
    if (table_points < 2) throw InvalidArgument("sampler table needs at least two points");
    const double delta = wave.delta();
    sqrt_delta_ = std::sqrt(delta);
    norm_prefactor_ = 1.0 / std::sqrt(std::numbers::pi * delta);

    // phi_a phi_b = (pi delta)^(-1/2) overlap(a, b) exp(-(q - (a+b)/2)^2 / delta)
    const auto& br = wave.branches();
    for (std::size_t i = 0; i < br.size(); ++i) {
        for (std::size_t j = i; j < br.size(); ++j) {
            const double mult = (i == j) ? 1.0 : 2.0;
            const double w = mult * (std::conj(br[i].coefficient) * br[j].coefficient).real() *
                             branch_overlap(br[i].shift, br[j].shift, delta) / n2;
            if (w != 0.0) terms_.push_back({w, 0.5 * (br[i].shift + br[j].shift)});
        }
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& t : terms_) {
        lo = std::min(lo, t.center);
        hi = std::max(hi, t.center);
    }
    lo -= 9.0 * sqrt_delta_;
    hi += 9.0 * sqrt_delta_;
    grid_.resize(static_cast<std::size_t>(table_points));
    grid_cdf_.resize(grid_.size());
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        grid_[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid_.size() - 1);
        grid_cdf_[k] = cdf(grid_[k]);
    }
    // Enforce monotonicity against rounding so the bracket search is well defined.
    for (std::size_t k = 1; k < grid_cdf_.size(); ++k) {
        grid_cdf_[k] = std::max(grid_cdf_[k], grid_cdf_[k - 1]);
    }
}

double PointerSampler::density(double q) const {
    double p = 0.0;
    for (const auto& t : terms_) {
        const double d = (q - t.center) / sqrt_delta_;
        p += t.weight * std::exp(-d * d);
    }
    return std::max(0.0, p * norm_prefactor_);
}

double PointerSampler::cdf(double q) const {
    double c = 0.0;
    for (const auto& t : terms_) c += t.weight * 0.5 * std::erfc((t.center - q) / sqrt_delta_);
    return std::clamp(c, 0.0, 1.0);
}

double PointerSampler::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw InvalidArgument("quantile argument must lie in (0, 1)");

    double lo;
    double hi;
    const auto it = std::upper_bound(grid_cdf_.begin(), grid_cdf_.end(), u);
    if (it == grid_cdf_.begin()) {
        hi = grid_.front();
        lo = hi - sqrt_delta_;
        while (cdf(lo) > u) lo -= sqrt_delta_;
    } else if (it == grid_cdf_.end()) {
        lo = grid_.back();
        hi = lo + sqrt_delta_;
        while (cdf(hi) < u) hi += sqrt_delta_;
    } else {
        const auto k = static_cast<std::size_t>(it - grid_cdf_.begin());
        lo = grid_[k - 1];
        hi = grid_[k];
    }

    const double c_lo = cdf(lo);
    const double c_hi = cdf(hi);
    double x = (c_hi > c_lo) ? lo + (u - c_lo) / (c_hi - c_lo) * (hi - lo) : 0.5 * (lo + hi);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = cdf(x) - u;
        if (f == 0.0) break;
        if (f < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo <= 1e-14 * std::max(1.0, std::abs(x))) break;
        const double p = density(x);
        double next = (p > 0.0) ? x - f / p : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

std::vector<double> sample_pointer_readout(const MeterWave& w, int n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("sample count must be at least 1");
    const PointerSampler sampler(w);
    std::mt19937_64 rng(seed);
    std::vector<double> draws(static_cast<std::size_t>(n));
    for (auto& q : draws) q = sampler(rng);
    return draws;
}

}  // namespace weaktrace
