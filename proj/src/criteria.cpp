#include "weaktrace/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace weaktrace {
namespace {

constexpr double kDenominatorTol = 1e-14;

void check_final_detector(const NestedCircuit& circuit, Arm detector) {
    if (!is_detector(detector) || !circuit.is_live(detector, circuit.size())) {
        throw InvalidArgument("postselected arm " + std::string(arm_name(detector)) +
                              " is not a detector output");
    }
}

void check_decreasing_positive(std::span<const double> g, const char* what) {
    if (g.empty()) throw InvalidArgument(std::string(what) + " is empty");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.0) || !std::isfinite(g[i])) {
            throw InvalidArgument(std::string(what) + " must be strictly positive");
        }
        if (i > 0 && !(g[i] < g[i - 1])) {
            throw InvalidArgument(std::string(what) + " must be strictly decreasing");
        }
    }
}

std::vector<MeterConfig> one_meter(double delta) {
    MeterConfig cfg;
    cfg.delta = delta;
    cfg.validate();
    return {cfg};
}

}  // namespace

int projector_stage(const NestedCircuit& circuit, Arm arm) {
    const auto stage = circuit.first_live_stage(arm);
    if (!stage) throw InvalidArgument("arm " + std::string(arm_name(arm)) + " is never live");
    return *stage;
}

std::complex<double> weak_value_analytic(const NestedCircuit& circuit, Arm arm, const Photon& in,
                                         Arm detector) {
    check_final_detector(circuit, detector);
    const int s = projector_stage(circuit, arm);
    const Photon psi = evolve_to_stage(circuit, in, s);
    const auto den = evolve_between(circuit, psi, s, circuit.size())(index(detector));
    if (std::abs(den) < kDenominatorTol) {
        throw UndefinedWeakValue("<f|in> vanishes for postselection on " + std::string(arm_name(detector)));
    }
    const auto num = evolve_between(circuit, project(psi, arm), s, circuit.size())(index(detector));
    return num / den;
}

Photon tsvf_backward_state(const NestedCircuit& circuit, Arm detector, int stage) {
    check_final_detector(circuit, detector);
    circuit.check_stage(stage);
    Photon phi = basis_state<double>(detector);
    for (int k = circuit.size() - 1; k >= stage; --k) {
        phi = apply_beamsplitter_inverse(phi, circuit.stage(k));
    }
    return phi;
}

std::complex<double> weak_value_tsvf(const NestedCircuit& circuit, Arm arm, const Photon& in,
                                     Arm detector) {
    const int s = projector_stage(circuit, arm);
    const Photon phi = tsvf_backward_state(circuit, detector, s);
    const Photon psi = evolve_to_stage(circuit, in, s);
    const auto den = phi.dot(psi);
    if (std::abs(den) < kDenominatorTol) {
        throw UndefinedWeakValue("two-state overlap <Phi|Psi> vanishes");
    }
    return std::conj(phi(index(arm))) * psi(index(arm)) / den;
}

double richardson_g2(std::span<const double> g, std::span<const double> values) {
    if (g.empty() || g.size() != values.size()) {
        throw InvalidArgument("richardson_g2 needs matching non-empty inputs");
    }
    const std::size_t n = g.size();
    std::vector<double> x(n);
    std::vector<double> p(values.begin(), values.end());
    for (std::size_t i = 0; i < n; ++i) x[i] = g[i] * g[i];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (x[i] == x[j]) throw InvalidArgument("richardson_g2 needs distinct |g|");
        }
    }
    // Neville at x = 0.
    for (std::size_t m = 1; m < n; ++m) {
        for (std::size_t i = 0; i + m < n; ++i) {
            p[i] = (x[i + m] * p[i] - x[i] * p[i + 1]) / (x[i + m] - x[i]);
        }
    }
    return p[0];
}

OperationalPoint operational_point(const NestedCircuit& circuit, Arm arm, const Photon& in,
                                   Arm detector, double g, double delta) {
    check_final_detector(circuit, detector);
    if (!(g > 0.0)) throw InvalidArgument("operational weak value needs g > 0");
    const auto meters = one_meter(delta);
    const MeterAttachment att = attach(circuit, 0, arm, g);
    const auto post = postselect(run_pipeline(circuit, in, meters, std::span(&att, 1)), detector);
    OperationalPoint pt;
    pt.g = g;
    pt.postselection_probability = post.probability;
    pt.pointer_mean = post.pointer_mean(0);
    pt.ratio = pt.pointer_mean / g;
    return pt;
}

WeakValueRecord weak_value_operational(const NestedCircuit& circuit, Arm arm, const Photon& in,
                                       Arm detector, std::span<const double> g_list, double delta) {
    check_decreasing_positive(g_list, "g list");
    WeakValueRecord rec;
    rec.arm = arm;
    rec.detector = detector;
    rec.delta = delta;
    rec.analytic = weak_value_analytic(circuit, arm, in, detector);
    for (double g : g_list) rec.points.push_back(operational_point(circuit, arm, in, detector, g, delta));

    const std::size_t used = std::min<std::size_t>(3, rec.points.size());
    std::vector<double> gs;
    std::vector<double> rs;
    for (std::size_t i = rec.points.size() - used; i < rec.points.size(); ++i) {
        gs.push_back(rec.points[i].g);
        rs.push_back(rec.points[i].ratio);
    }
    rec.extrapolated = richardson_g2(gs, rs);
    return rec;
}

MonteCarloEstimate monte_carlo_weak_value(const NestedCircuit& circuit, Arm arm, const Photon& in,
                                          Arm detector, double g, double delta, std::int64_t n,
                                          std::uint64_t seed) {
    check_final_detector(circuit, detector);
    if (n < 1) throw InvalidArgument("Monte Carlo needs at least one trial");
    if (!(g > 0.0)) throw InvalidArgument("Monte Carlo weak value needs g > 0");
    const auto meters = one_meter(delta);
    const MeterAttachment att = attach(circuit, 0, arm, g);
    const JointState js = run_pipeline(circuit, in, meters, std::span(&att, 1));

    std::vector<Arm> outcomes;
    std::vector<double> cumulative;
    double acc = 0.0;
    for (Arm a : kAllArms) {
        if (!circuit.is_live(a, circuit.size())) continue;
        acc += arm_probability(js, a);
        outcomes.push_back(a);
        cumulative.push_back(acc);
    }

    const auto post = postselect(js, detector);
    if (post.probability <= 1e-30) {
        throw NoPostselectedEvents("postselection on " + std::string(arm_name(detector)) +
                                   " has zero probability");
    }
    const PointerSampler sampler(post.meter_wave());

    std::mt19937_64 rng(seed);
    std::int64_t accepted = 0;
    double mean = 0.0;
    double m2 = 0.0;
    for (std::int64_t t = 0; t < n; ++t) {
        const double u = PointerSampler::uniform01(rng) * acc;
        std::size_t k = 0;
        while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
        if (outcomes[k] != detector) continue;
        const double q = sampler(rng);
        ++accepted;
        const double d = q - mean;
        mean += d / static_cast<double>(accepted);
        m2 += d * (q - mean);
    }
    if (accepted == 0) {
        throw NoPostselectedEvents("no trial postselected on " + std::string(arm_name(detector)));
    }

    MonteCarloEstimate est;
    est.trials = n;
    est.accepted = accepted;
    est.estimate = mean / g;
    est.standard_error = accepted > 1
        ? std::sqrt(m2 / static_cast<double>(accepted - 1) / static_cast<double>(accepted)) / g
        : std::numeric_limits<double>::infinity();
    return est;
}

MeanValueRecord weak_mean_value(const NestedCircuit& circuit, Arm arm, const Photon& in, double g,
                                double delta) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw InvalidArgument("weak mean value needs g >= 0");
    const auto meters = one_meter(delta);
    const MeterAttachment att = attach(circuit, 0, arm, g);
    const JointState js = run_pipeline(circuit, in, meters, std::span(&att, 1));

    MeanValueRecord rec;
    rec.arm = arm;
    rec.g = g;
    rec.pointer_mean = unconditional_pointer_mean(js, 0);
    if (g > 0.0) rec.ratio = rec.pointer_mean / g;
    rec.limit = projector_expectation(evolve_to_stage(circuit, in, att.stage), arm);
    return rec;
}

double e_arm_occupation_closed_form(double g, double delta) {
    return 0.25 * -std::expm1(-g * g / (4.0 * delta));
}

DiscontinuityReport discontinuity_report(const NestedCircuit& circuit, std::span<const double> g_grid,
                                         double delta) {
    check_decreasing_positive(g_grid, "g grid");
    const auto meters = one_meter(delta);
    const Photon in = basis_state<double>(Arm::N);
    const int e_stage = projector_stage(circuit, Arm::E);

    DiscontinuityReport report;
    report.delta = delta;

    auto make_row = [&](double g) {
        const MeterAttachment att = attach(circuit, 0, Arm::B, g);
        const JointState at_e = run_pipeline_to_stage(circuit, in, meters, std::span(&att, 1), e_stage);
        DiscontinuityRow row;
        row.g = g;
        row.p_e = arm_probability(at_e, Arm::E);
        row.p_e_closed_form = e_arm_occupation_closed_form(g, delta);

        const auto finish = [&](JointState js) {
            for (int k = e_stage; k < circuit.size(); ++k) js = apply_beamsplitter(js, circuit.stage(k));
            return postselect(js, Arm::D2);
        };
        const auto full = finish(at_e);
        if (g > 0.0) {
            row.ratio = full.pointer_mean(0) / g;
            row.analogy_ratio = 0.5 * g / g;
        }

        JointState no_e = at_e;
        no_e.clear(Arm::E);
        row.d2_moment_without_e = finish(no_e).pointer_moment(0);

        JointState only_e = at_e;
        for (Arm a : kAllArms) {
            if (a != Arm::E) only_e.clear(a);
        }
        row.e_path_d2_norm2 = finish(only_e).probability;
        return row;
    };

    for (double g : g_grid) report.rows.push_back(make_row(g));
    report.rows.push_back(make_row(0.0));

    report.extrapolated_weak_value =
        weak_value_operational(circuit, Arm::B, in, Arm::D2, g_grid, delta).extrapolated;

    const auto& zero = report.rows.back();
    report.occupation_positive_for_all_g = std::all_of(
        report.rows.begin(), report.rows.end() - 1, [](const auto& r) { return r.p_e > 0.0; });
    report.occupation_zero_at_g0 = zero.p_e <= 1e-24;
    report.weak_value_nonzero = std::abs(report.extrapolated_weak_value) > 1e-6;
    report.signal_only_through_e =
        zero.e_path_d2_norm2 <= 1e-24 &&
        std::all_of(report.rows.begin(), report.rows.end(), [](const auto& r) {
            return std::abs(r.d2_moment_without_e) <= 1e-12;
        }) &&
        std::all_of(report.rows.begin(), report.rows.end() - 1,
                    [](const auto& r) { return r.e_path_d2_norm2 > 0.0; });
    return report;
}

}  // namespace weaktrace
