#include "weaktrace/danan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace weaktrace::danan {

MirrorSchedule standard_schedule(double g0) {
    return {{
        {"M1", Arm::A, 3.0, g0, true},
        {"M2", Arm::B, 5.0, g0, true},
        {"M3", Arm::C, 7.0, g0, true},
    }};
}

int Spectrum::bin(double f) const {
    const int k = static_cast<int>(std::lround(f / resolution()));
    if (k < 0 || k >= static_cast<int>(power.size())) {
        throw InvalidArgument("frequency outside the one-sided spectrum");
    }
    return k;
}

double Spectrum::amplitude_at(double f) const {
    const int k = bin(f);
    const double mag = std::sqrt(power[static_cast<std::size_t>(k)]);
    const bool edge = (k == 0) || (length % 2 == 0 && k == length / 2);
    return (edge ? 1.0 : 2.0) * mag / length;
}

Spectrum power_spectrum(const std::vector<double>& series, double sample_rate) {
    if (series.size() < 16) throw InvalidArgument("power spectrum needs at least 16 samples");
    if (!(sample_rate > 0.0)) throw InvalidArgument("sample rate must be positive");
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> bins;
    fft.fwd(bins, series);

    Spectrum s;
    s.sample_rate = sample_rate;
    s.length = static_cast<int>(series.size());
    const std::size_t half = series.size() / 2;
    s.frequency.resize(half + 1);
    s.power.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        s.frequency[k] = static_cast<double>(k) * sample_rate / static_cast<double>(series.size());
        s.power[k] = std::norm(bins[k]);
    }
    return s;
}

const Series& TraceResult::get(const std::string& name) const {
    for (const auto& s : series) {
        if (s.name == name) return s;
    }
    throw InvalidArgument("no trace series named " + name);
}

const Spectrum& TraceResult::spectrum(const std::string& name) const {
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i].name == name) return spectra[i];
    }
    throw InvalidArgument("no trace series named " + name);
}

const std::vector<std::string>& trace_series_names() {
    static const std::vector<std::string> names = {"D1_mean", "D2_mean", "D3_mean", "D12_mean",
                                                   "D1_prob", "D2_prob", "D3_prob"};
    return names;
}

namespace {

void validate(const MirrorSchedule& schedule, double duration, double sample_rate, double delta) {
    if (schedule.mirrors.empty()) throw InvalidArgument("mirror schedule is empty");
    if (!(delta > 0.0)) throw InvalidArgument("meter delta must be positive");
    if (!(sample_rate > 0.0) || !(duration > 0.0)) {
        throw InvalidArgument("duration and sample rate must be positive");
    }
    for (std::size_t i = 0; i < schedule.mirrors.size(); ++i) {
        const auto& m = schedule.mirrors[i];
        if (m.arm != Arm::A && m.arm != Arm::B && m.arm != Arm::C) {
            throw InvalidArgument("mirror " + m.name + " must sit on arm A, B or C");
        }
        if (!(m.frequency > 0.0)) throw InvalidArgument("mirror " + m.name + " needs a positive frequency");
        if (!(sample_rate > 2.0 * m.frequency)) {
            throw InvalidArgument("mirror " + m.name + " frequency violates the Nyquist limit");
        }
        if (!std::isfinite(m.amplitude)) throw InvalidArgument("mirror amplitude must be finite");
        for (std::size_t j = 0; j < i; ++j) {
            if (schedule.mirrors[j].frequency == m.frequency) {
                throw InvalidArgument("mirror frequencies must be pairwise distinct");
            }
        }
    }
    const double samples = duration * sample_rate;
    if (std::abs(samples - std::round(samples)) > 1e-9 || std::round(samples) < 16.0) {
        throw InvalidArgument("duration * sample_rate must be an integer of at least 16");
    }
}

}  // namespace

TraceResult simulate_traces(const MirrorSchedule& schedule, double duration, double sample_rate,
                            double delta) {
    validate(schedule, duration, sample_rate, delta);
    const auto circuit = build_nested_mzi();
    const Photon in = basis_state<double>(Arm::N);
    MeterConfig cfg;
    cfg.delta = delta;
    const std::vector<MeterConfig> meters = {cfg};

    const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
    TraceResult result;
    result.duration = duration;
    result.sample_rate = sample_rate;
    result.time.resize(n);
    for (const auto& name : trace_series_names()) result.series.push_back({name, std::vector<double>(n)});
    auto column = [&](int i) -> std::vector<double>& { return result.series[static_cast<std::size_t>(i)].values; };

    std::vector<MeterAttachment> attachments;
    for (std::size_t s = 0; s < n; ++s) {
        const double t = static_cast<double>(s) / sample_rate;
        result.time[s] = t;
        attachments.clear();
        for (const auto& m : schedule.mirrors) {
            if (!m.enabled) continue;
            const double g = m.amplitude * std::sin(2.0 * std::numbers::pi * m.frequency * t);
            attachments.push_back(attach(circuit, 0, m.arm, g));
        }
        const JointState js = run_pipeline(circuit, in, meters, attachments);
        const Postselection d1 = postselect(js, Arm::D1);
        const Postselection d2 = postselect(js, Arm::D2);
        const Postselection d3 = postselect(js, Arm::D3);
        column(0)[s] = d1.pointer_mean(0);
        column(1)[s] = d2.pointer_mean(0);
        column(2)[s] = d3.pointer_mean(0);
        column(3)[s] = (d1.pointer_moment(0) + d2.pointer_moment(0)) / (d1.probability + d2.probability);
        column(4)[s] = d1.probability;
        column(5)[s] = d2.probability;
        column(6)[s] = d3.probability;
    }
    for (const auto& s : result.series) result.spectra.push_back(power_spectrum(s.values, sample_rate));
    return result;
}

std::vector<std::string> mode_series(ReadoutMode mode) {
    if (mode == ReadoutMode::WeakValue) return {"D2_mean"};
    return {"D1_mean", "D2_mean", "D3_mean", "D12_mean"};
}

ModeComparison readout_mode_compare(const MirrorSchedule& schedule, double duration,
                                    double sample_rate, double delta) {
    ModeComparison cmp;
    cmp.traces = simulate_traces(schedule, duration, sample_rate, delta);
    for (ReadoutMode mode : {ReadoutMode::WeakValue, ReadoutMode::Mean}) {
        auto& table = (mode == ReadoutMode::WeakValue) ? cmp.weak_value_peaks : cmp.mean_peaks;
        for (const auto& name : mode_series(mode)) {
            const Spectrum& spec = cmp.traces.spectrum(name);
            for (const auto& m : schedule.mirrors) {
                if (!m.enabled) continue;
                table.push_back({mode, name, m.name, m.frequency, spec.amplitude_at(m.frequency)});
            }
        }
    }
    return cmp;
}

}  // namespace weaktrace::danan
