#pragma once

// Vibrating-mirror realization, quasi-static.
//
// Mirrors M1, M2, M3 on arms A, B, C oscillate at distinct frequencies and all
// kick one shared transverse pointer. Each time sample is an independent static
// run of the joint pipeline with couplings g_i(t) = g0_i sin(2 pi f_i t); the
// per-detector conditional pointer means form time series whose spectra carry
// one line per mirror.

#include <string>
#include <vector>

#include "weaktrace/evolution.hpp"

namespace weaktrace::danan {

struct Mirror {
    std::string name;
    Arm arm = Arm::A;
    double frequency = 1.0;
    double amplitude = 0.0;
    bool enabled = true;
};

struct MirrorSchedule {
    std::vector<Mirror> mirrors;
};

// M1 on A at 3, M2 on B at 5, M3 on C at 7 (cycles per unit time), all with
// amplitude g0. Chosen so no second-order mixing product lands on a mirror line.
MirrorSchedule standard_schedule(double g0);

struct Series {
    std::string name;
    std::vector<double> values;
};

struct Spectrum {
    double sample_rate = 1.0;
    int length = 0;
    std::vector<double> frequency;  // bins 0 .. length/2
    std::vector<double> power;      // |X_k|^2 with X_k = sum_n x_n exp(-2 pi i k n / N)

    double resolution() const { return sample_rate / length; }
    int bin(double f) const;
    // Sinusoid amplitude implied by the bin nearest to f.
    double amplitude_at(double f) const;
};

Spectrum power_spectrum(const std::vector<double>& series, double sample_rate);

struct TraceResult {
    double duration = 0.0;
    double sample_rate = 0.0;
    std::vector<double> time;
    // D1_mean, D2_mean, D3_mean, D12_mean, D1_prob, D2_prob, D3_prob.
    std::vector<Series> series;
    std::vector<Spectrum> spectra;

    const Series& get(const std::string& name) const;
    const Spectrum& spectrum(const std::string& name) const;
};

// Series names in output order.
const std::vector<std::string>& trace_series_names();

TraceResult simulate_traces(const MirrorSchedule& schedule, double duration, double sample_rate,
                            double delta);

enum class ReadoutMode { WeakValue, Mean };

struct PeakEntry {
    ReadoutMode mode = ReadoutMode::WeakValue;
    std::string series;
    std::string mirror;
    double frequency = 0.0;
    double amplitude = 0.0;
};

struct ModeComparison {
    TraceResult traces;
    std::vector<PeakEntry> weak_value_peaks;  // D2 conditional mean
    std::vector<PeakEntry> mean_peaks;        // D1, D2, D3 and merged D1+D2 conditional means
};

// Series read in each mode.
std::vector<std::string> mode_series(ReadoutMode mode);

ModeComparison readout_mode_compare(const MirrorSchedule& schedule, double duration,
                                    double sample_rate, double delta);

}  // namespace weaktrace::danan
