#pragma once

// The two weak-trace criteria for the nested interferometer.
//
// Postselected weak values come from three routes that must agree: forward
// path-space evolution with a projector inserted, the two-state (backward bra,
// forward ket) form, and the operational g -> 0 limit of the postselected pointer
// mean. The weak mean value uses the unconditional pointer mean, which is exact
// at every coupling.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "weaktrace/evolution.hpp"

namespace weaktrace {

// Stage after which the projector onto `arm` is evaluated.
int projector_stage(const NestedCircuit& circuit, Arm arm);

std::complex<double> weak_value_analytic(const NestedCircuit& circuit, Arm arm, const Photon& in,
                                         Arm detector);

// <f| evolved backwards through the stages after `stage`, as a ket
// (U(stage+1)^-1 ... U(n)^-1 |f>). Its adjoint is the bra of the two-state vector.
Photon tsvf_backward_state(const NestedCircuit& circuit, Arm detector, int stage);

std::complex<double> weak_value_tsvf(const NestedCircuit& circuit, Arm arm, const Photon& in,
                                     Arm detector);

// Polynomial extrapolation to g = 0 in the variable g^2 (Neville's scheme).
double richardson_g2(std::span<const double> g, std::span<const double> values);

struct OperationalPoint {
    double g = 0.0;
    double postselection_probability = 0.0;
    double pointer_mean = 0.0;
    double ratio = 0.0;  // pointer_mean / g
};

struct WeakValueRecord {
    Arm arm = Arm::B;
    Arm detector = Arm::D2;
    double delta = 1.0;
    std::complex<double> analytic;
    std::vector<OperationalPoint> points;
    double extrapolated = 0.0;
};

// Pointer-mean ratio at one coupling, through the full joint pipeline.
OperationalPoint operational_point(const NestedCircuit& circuit, Arm arm, const Photon& in,
                                   Arm detector, double g, double delta);

// g_list must be strictly positive and strictly decreasing. The limit is
// extrapolated from the three smallest couplings.
WeakValueRecord weak_value_operational(const NestedCircuit& circuit, Arm arm, const Photon& in,
                                       Arm detector, std::span<const double> g_list, double delta);

struct MonteCarloEstimate {
    double estimate = 0.0;        // sample mean / g
    double standard_error = 0.0;  // infinite when a single event was accepted
    std::int64_t trials = 0;
    std::int64_t accepted = 0;
};

// Trial-by-trial protocol: draw the photon's detector from the outcome
// probabilities, keep trials that land on `detector`, read the pointer once.
MonteCarloEstimate monte_carlo_weak_value(const NestedCircuit& circuit, Arm arm, const Photon& in,
                                          Arm detector, double g, double delta, std::int64_t n,
                                          std::uint64_t seed);

struct MeanValueRecord {
    Arm arm = Arm::B;
    double g = 0.0;
    double pointer_mean = 0.0;
    std::optional<double> ratio;  // undefined at g = 0
    double limit = 0.0;           // <in| Pi_arm |in> at the projector stage
};

MeanValueRecord weak_mean_value(const NestedCircuit& circuit, Arm arm, const Photon& in, double g,
                                double delta);

struct DiscontinuityRow {
    double g = 0.0;
    double p_e = 0.0;            // E-arm occupation after BS3 with a B-meter
    double p_e_closed_form = 0.0;
    std::optional<double> ratio; // D2-postselected <Q_M>/g; absent at g = 0
    double e_path_d2_norm2 = 0.0;         // weight reaching D2 through E
    double d2_moment_without_e = 0.0;     // D2 pointer moment with the E component removed
    std::optional<double> analogy_ratio;  // f(x)/x for f(x) = x/2
};

struct DiscontinuityReport {
    double delta = 1.0;
    std::vector<DiscontinuityRow> rows;  // grid rows in order, then the g = 0 row
    double extrapolated_weak_value = 0.0;
    bool occupation_positive_for_all_g = false;
    bool occupation_zero_at_g0 = false;
    bool weak_value_nonzero = false;
    bool signal_only_through_e = false;
    bool discontinuous() const {
        return occupation_positive_for_all_g && occupation_zero_at_g0 && weak_value_nonzero &&
               signal_only_through_e;
    }
};

DiscontinuityReport discontinuity_report(const NestedCircuit& circuit, std::span<const double> g_grid,
                                         double delta);

// (1/4)(1 - exp(-g^2 / (4 delta)))
double e_arm_occupation_closed_form(double g, double delta);

}  // namespace weaktrace
