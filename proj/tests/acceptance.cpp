// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "weaktrace/criteria.hpp"
#include "weaktrace/danan.hpp"

using namespace weaktrace;
using cd = std::complex<double>;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const Photon kIn = basis_state<double>(Arm::N);
const cd I{0.0, 1.0};

MeterConfig meter(double delta) {
    MeterConfig c;
    c.delta = delta;
    return c;
}

Outcome checkpoint_amplitudes() {
    Outcome o;
    const auto c = build_nested_mzi();
    const double s2 = std::sqrt(2.0);
    const auto t0 = Clock::now();
    const auto eq3 = evolve_to_stage(c, kIn, 2);
    const auto eq4 = evolve_to_stage(c, kIn, 3);
    const double elapsed = seconds_since(t0);
    Photon want3 = Photon::Zero();
    want3(index(Arm::A)) = -I * s2 / 2.0;
    want3(index(Arm::B)) = -I / 2.0;
    want3(index(Arm::C)) = 0.5;
    Photon want4 = Photon::Zero();
    want4(index(Arm::A)) = -I / s2;
    want4(index(Arm::D3)) = -I / s2;
    const double e3 = (eq3 - want3).cwiseAbs().maxCoeff();
    const double e4 = (eq4 - want4).cwiseAbs().maxCoeff();
    o.detail << "max error after BS2 " << e3 << ", after BS3 " << e4 << ", " << elapsed * 1e3 << " ms";
    o.expect(e3 < 1e-12 && e4 < 1e-12, "componentwise 1e-12");
    o.expect(elapsed < 1e-3, "runtime < 1 ms");
    return o;
}

Outcome dark_port() {
    Outcome o;
    const auto c = build_nested_mzi();
    const double p_path = projector_expectation(evolve_to_stage(c, kIn, 3), Arm::E);
    const std::vector<MeterConfig> m = {meter(1.0)};
    const auto att = attach(c, 0, Arm::B, 0.0);
    const double p_joint = arm_occupation(c, kIn, m, std::span(&att, 1), Arm::E, 3);
    o.detail << "P(E) path-space " << p_path << ", joint with g=0 meter " << p_joint;
    o.expect(p_path < 1e-12 && p_joint < 1e-12, "P(E) = 0");
    return o;
}

Outcome weak_value_table() {
    Outcome o;
    const auto c = build_nested_mzi();
    const auto t0 = Clock::now();
    const std::pair<Arm, double> table[] = {{Arm::A, 1.0}, {Arm::B, 0.5}, {Arm::C, -0.5},
                                            {Arm::D, 0.0}, {Arm::E, 0.0}};
    cd wv[5];
    double worst = 0.0;
    double worst_tsvf = 0.0;
    for (int i = 0; i < 5; ++i) {
        wv[i] = weak_value_analytic(c, table[i].first, kIn, Arm::D2);
        worst = std::max(worst, std::abs(wv[i] - cd(table[i].second)));
        worst_tsvf = std::max(worst_tsvf, std::abs(weak_value_tsvf(c, table[i].first, kIn, Arm::D2) - wv[i]));
    }
    const double abc = std::abs(wv[0] + wv[1] + wv[2] - 1.0);
    const double ad = std::abs(wv[0] + wv[3] - 1.0);
    const double elapsed = seconds_since(t0);
    o.detail << "A=" << wv[0].real() << " B=" << wv[1].real() << " C=" << wv[2].real() << " D=" << wv[3].real()
             << " E=" << wv[4].real() << "; table err " << worst << ", TSVF err " << worst_tsvf
             << ", sum-rule err " << std::max(abc, ad) << ", " << elapsed << " s";
    o.expect(worst < 1e-12, "table");
    o.expect(worst_tsvf < 1e-12, "TSVF agreement");
    o.expect(abc < 1e-12 && ad < 1e-12, "sum rules");
    o.expect(elapsed < 1.0, "runtime < 1 s");
    return o;
}

Outcome operational_limit() {
    Outcome o;
    const auto c = build_nested_mzi();
    const std::vector<double> gs = {1.0, 0.5, 0.1, 0.01};
    const auto b = weak_value_operational(c, Arm::B, kIn, Arm::D2, gs, 1.0);
    const auto cc = weak_value_operational(c, Arm::C, kIn, Arm::D2, gs, 1.0);
    double b_err = 0.0;
    double c_err = 0.0;
    for (std::size_t i = 0; i < gs.size(); ++i) {
        b_err = std::max(b_err, std::abs(b.points[i].ratio - 0.5));
        const double kappa = std::exp(-gs[i] * gs[i] / 4.0);
        c_err = std::max(c_err, std::abs(cc.points[i].ratio - (1.0 - 3.0 * kappa) / (10.0 - 6.0 * kappa)));
    }
    o.detail << "B ratio err " << b_err << "; C closed-form err " << c_err << ", C limit " << cc.extrapolated;
    o.expect(b_err < 1e-12, "B ratio 0.5 at every g");
    o.expect(c_err < 1e-12, "C closed form");
    o.expect(std::abs(cc.extrapolated + 0.5) < 1e-3, "C extrapolates to -0.5 within 1e-3");
    return o;
}

Outcome discontinuity() {
    Outcome o;
    const auto c = build_nested_mzi();
    const std::vector<double> grid = {1.0, 0.5, 0.1, 0.01};
    const auto rep = discontinuity_report(c, grid, 1.0);
    double pe_err = 0.0;
    bool positive = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double want = 0.25 * (1.0 - std::exp(-grid[i] * grid[i] / 4.0));
        pe_err = std::max(pe_err, std::abs(rep.rows[i].p_e - want));
        positive = positive && rep.rows[i].p_e > 0.0;
    }
    const double pe0 = rep.rows.back().p_e;
    o.detail << "P_E err " << pe_err << ", P_E(0) = " << pe0 << ", extrapolated weak value "
             << rep.extrapolated_weak_value << ", report flags discontinuous=" << rep.discontinuous();
    o.expect(pe_err < 1e-12, "P_E closed form");
    o.expect(positive, "P_E > 0 on the grid");
    o.expect(pe0 == 0.0, "P_E(0) = 0");
    o.expect(std::abs(rep.extrapolated_weak_value - 0.5) < 1e-12, "weak value 0.5");
    o.expect(rep.discontinuous(), "report asserts both");
    return o;
}

Outcome mean_value_exactness() {
    Outcome o;
    const auto c = build_nested_mzi();
    double worst = 0.0;
    for (double g : {1e-3, 1e-1, 1.0, 2.0}) {
        worst = std::max(worst, std::abs(*weak_mean_value(c, Arm::B, kIn, g, 1.0).ratio - 0.25));
    }
    o.detail << "max |<Q_M>/g - 1/4| = " << worst;
    o.expect(worst < 1e-12, "ratio 1/4 at every g");
    return o;
}

Outcome mean_value_table() {
    Outcome o;
    const auto c = build_nested_mzi();
    const std::pair<Arm, double> table[] = {{Arm::A, 0.5}, {Arm::D, 0.5}, {Arm::B, 0.25},
                                            {Arm::C, 0.25}, {Arm::E, 0.0}};
    double worst = 0.0;
    double r[5];
    for (int i = 0; i < 5; ++i) {
        r[i] = *weak_mean_value(c, table[i].first, kIn, 0.1, 1.0).ratio;
        worst = std::max(worst, std::abs(r[i] - table[i].second));
    }
    const double abc = std::abs(r[0] + r[2] + r[3] - 1.0);
    const double ad = std::abs(r[0] + r[1] - 1.0);
    o.detail << "table err " << worst << ", sum-rule err " << std::max(abc, ad);
    o.expect(worst < 1e-12, "table");
    o.expect(abc < 1e-12 && ad < 1e-12, "sum rules");
    return o;
}

Outcome monte_carlo() {
    Outcome o;
    const auto c = build_nested_mzi();
    const auto t0 = Clock::now();
    const auto a = monte_carlo_weak_value(c, Arm::B, kIn, Arm::D2, 0.2, 1.0, 1000000, 20140101);
    const double elapsed = seconds_since(t0);
    const auto b = monte_carlo_weak_value(c, Arm::B, kIn, Arm::D2, 0.2, 1.0, 1000000, 20140101);
    const double z = (a.estimate - 0.5) / a.standard_error;
    o.detail << "estimate " << a.estimate << " +/- " << a.standard_error << " (" << a.accepted
             << " postselected), z = " << z << ", " << elapsed << " s";
    o.expect(std::abs(z) < 5.0, "within 5 standard errors");
    o.expect(a.estimate == b.estimate && a.accepted == b.accepted, "deterministic per seed");
    o.expect(elapsed < 30.0, "runtime < 30 s");
    return o;
}

Outcome danan_simulation() {
    Outcome o;
    using namespace danan;
    const double g0 = 1e-2;
    const auto t0 = Clock::now();
    const auto all = readout_mode_compare(standard_schedule(g0), 1.0, 256.0, 1.0);
    const double a1 = all.weak_value_peaks[0].amplitude;
    const double a2 = all.weak_value_peaks[1].amplitude;
    const double a3 = all.weak_value_peaks[2].amplitude;
    const double r12 = a1 / a2;
    const double r13 = a1 / a3;

    auto m2 = standard_schedule(g0);
    for (auto& m : m2.mirrors) m.enabled = (m.name == "M2");
    const auto only = readout_mode_compare(m2, 1.0, 256.0, 1.0);
    const auto& d3 = only.traces.get("D3_mean").values;
    double d3_err = 0.0;
    for (std::size_t i = 0; i < d3.size(); ++i) {
        const double g2 = g0 * std::sin(2.0 * std::numbers::pi * 5.0 * only.traces.time[i]);
        d3_err = std::max(d3_err, std::abs(d3[i] - g2 / 2.0));
    }
    const double outer = only.traces.spectrum("D12_mean").amplitude_at(5.0);
    const double d1 = only.traces.spectrum("D1_mean").amplitude_at(5.0);
    const double d2 = only.traces.spectrum("D2_mean").amplitude_at(5.0);
    const double elapsed = seconds_since(t0);

    o.detail << "D2 lines f1:f2:f3 = " << a1 / a2 << ":1:" << a3 / a2 << "; M2-only D3 err " << d3_err
             << ", merged D1+D2 f2 line " << outer << " (floor g0^2 = " << g0 * g0
             << "; separate D1 " << d1 << ", D2 " << d2 << "), " << elapsed << " s";
    o.expect(std::abs(r12 / 2.0 - 1.0) < 0.02 && std::abs(r13 / 2.0 - 1.0) < 0.02, "2:1:1 within 2%");
    o.expect(d3_err < 1e-12, "D3 = g2(t)/2");
    o.expect(outer < g0 * g0, "no f2 line at D1/D2 above g0^2");
    o.expect(elapsed < 10.0, "runtime < 10 s");
    return o;
}

Outcome property_suites() {
    Outcome o;
    const auto c = build_nested_mzi();
    std::mt19937_64 rng(10);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> gdist(-2.0, 2.0);
    std::uniform_real_distribution<double> ddist(0.25, 4.0);
    std::uniform_real_distribution<double> sdist(-3.0, 3.0);
    const int cases = 150;

    double unitarity = 0.0;
    double completeness = 0.0;
    const Arm arms[] = {Arm::A, Arm::D, Arm::B, Arm::C, Arm::E};
    for (int t = 0; t < cases; ++t) {
        Photon in = Photon::Zero();
        for (Arm a : {Arm::N, Arm::N0, Arm::D0}) in(index(a)) = cd(normal(rng), normal(rng));
        in /= in.norm();
        for (int k = 0; k <= 4; ++k) unitarity = std::max(unitarity, std::abs(evolve_to_stage(c, in, k).squaredNorm() - 1.0));

        const std::vector<MeterConfig> ms = {meter(ddist(rng)), meter(ddist(rng))};
        std::vector<MeterAttachment> atts;
        for (int k = 0; k < 4; ++k) atts.push_back(attach(c, static_cast<int>(rng() % 2), arms[rng() % 5], gdist(rng)));
        const auto js = run_pipeline(c, in, ms, atts);
        unitarity = std::max(unitarity, std::abs(total_norm2(js) - 1.0));
        double sum = 0.0;
        for (Arm d : {Arm::D1, Arm::D2, Arm::D3}) sum += postselect(js, d).probability;
        completeness = std::max(completeness, std::abs(sum - 1.0));
    }

    double covariance = 0.0;
    double quadrature = 0.0;
    for (int t = 0; t < cases; ++t) {
        const double delta = ddist(rng);
        MeterWave w(meter(delta));
        std::vector<std::pair<cd, double>> raw;
        double max_shift = 0.0;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int k = 0; k < n; ++k) {
            const cd coef(normal(rng), normal(rng));
            const double s = sdist(rng);
            w.add(coef, s);
            raw.emplace_back(coef, s);
            max_shift = std::max(max_shift, std::abs(s));
        }
        const double shift = sdist(rng);
        const auto moved = w.shifted(shift);
        covariance = std::max({covariance, std::abs(wave_pointer_mean(moved) - wave_pointer_mean(w) - shift),
                               std::abs(wave_norm2(moved) - wave_norm2(w)) / wave_norm2(w)});
        const auto q = oracle::quadrature_branches(raw, delta, oracle::make_grid(max_shift, delta, 4096));
        quadrature = std::max({quadrature, std::abs(q.norm2 - wave_norm2(w)), std::abs(q.mean - wave_pointer_mean(w))});
    }
    o.detail << cases << " cases each: unitarity " << unitarity << ", completeness " << completeness
             << ", translation covariance " << covariance << ", quadrature " << quadrature;
    o.expect(unitarity < 1e-12, "unitarity");
    o.expect(completeness < 1e-12, "postselection completeness");
    o.expect(covariance < 1e-10, "translation covariance");
    o.expect(quadrature < 1e-8, "quadrature oracle");
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"1 checkpoint amplitudes", checkpoint_amplitudes},
        {"2 dark port", dark_port},
        {"3 weak-value table", weak_value_table},
        {"4 operational limit", operational_limit},
        {"5 discontinuity", discontinuity},
        {"6 exact weak mean value", mean_value_exactness},
        {"7 weak-mean-value table", mean_value_table},
        {"8 Monte Carlo protocol", monte_carlo},
        {"9 vibrating-mirror simulation", danan_simulation},
        {"10 property suites", property_suites},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        std::printf("[%s] AC%s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.str().c_str());
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
