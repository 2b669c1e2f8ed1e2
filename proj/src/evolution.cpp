#include "weaktrace/evolution.hpp"

#include <algorithm>
#include <string>

namespace weaktrace {
namespace {

bool same_shifts(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff() < kShiftMergeTol;
}

void merge_into(std::vector<JointBranch>& branches, std::complex<double> coefficient,
                const Eigen::VectorXd& shifts) {
    if (coefficient == std::complex<double>(0.0)) return;
    for (auto& b : branches) {
        if (b.shifts.size() == 0 || same_shifts(b.shifts, shifts)) {
            b.coefficient += coefficient;
            return;
        }
    }
    branches.push_back({coefficient, shifts});
}

double moment_kernel(const std::vector<MeterConfig>& meters, const JointBranch& a,
                     const JointBranch& b, int meter) {
    double k = 1.0;
    for (int m = 0; m < static_cast<int>(meters.size()); ++m) {
        k *= (m == meter) ? pointer_first_moment(a.shifts(m), b.shifts(m), meters[m].delta)
                          : branch_overlap(a.shifts(m), b.shifts(m), meters[m].delta);
    }
    return k;
}

double overlap_kernel(const std::vector<MeterConfig>& meters, const JointBranch& a,
                      const JointBranch& b) {
    double k = 1.0;
    for (int m = 0; m < static_cast<int>(meters.size()); ++m) {
        k *= branch_overlap(a.shifts(m), b.shifts(m), meters[m].delta);
    }
    return k;
}

double branches_norm2(const std::vector<MeterConfig>& meters, const std::vector<JointBranch>& br) {
    double sum = 0.0;
    for (const auto& a : br) {
        for (const auto& b : br) {
            sum += (std::conj(a.coefficient) * b.coefficient).real() * overlap_kernel(meters, a, b);
        }
    }
    return std::max(0.0, sum);
}

double branches_moment(const std::vector<MeterConfig>& meters, const std::vector<JointBranch>& br,
                       int meter) {
    double sum = 0.0;
    for (const auto& a : br) {
        for (const auto& b : br) {
            sum += (std::conj(a.coefficient) * b.coefficient).real() * moment_kernel(meters, a, b, meter);
        }
    }
    return sum;
}

void check_meter(int meter, std::size_t count) {
    if (meter < 0 || static_cast<std::size_t>(meter) >= count) {
        throw InvalidArgument("meter index " + std::to_string(meter) + " out of range");
    }
}

}  // namespace

MeterAttachment attach(const NestedCircuit& circuit, int meter, Arm arm, double g) {
    const auto stage = circuit.first_live_stage(arm);
    if (!stage) throw MalformedPipeline("arm " + std::string(arm_name(arm)) + " never carries the photon");
    return {meter, arm, g, *stage};
}

JointState::JointState(ArmSet live, const Photon& photon, std::vector<MeterConfig> meters)
    : meters_(std::move(meters)), live_(live) {
    for (const auto& m : meters_) m.validate();
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(meters_.size()));
    for (Arm arm : kAllArms) {
        const auto amp = photon(index(arm));
        if (amp == std::complex<double>(0.0)) continue;
        if (!live_[index(arm)]) {
            throw MalformedPipeline("input amplitude on arm " + std::string(arm_name(arm)) +
                                    " which is not live");
        }
        components_[index(arm)].push_back({amp, origin});
    }
}

void JointState::add(Arm arm, std::complex<double> coefficient, const Eigen::VectorXd& shifts) {
    if (shifts.size() != meter_count()) throw InvalidArgument("shift vector size mismatch");
    merge_into(components_[index(arm)], coefficient, shifts);
}

JointState prepare(const NestedCircuit& circuit, const Photon& input, std::vector<MeterConfig> meters) {
    return JointState(circuit.live_arms(0), input, std::move(meters));
}

JointState apply_beamsplitter(const JointState& js, const BeamSplitter<double>& bs) {
    for (Arm out : bs.outputs) {
        if (!js.component(out).empty() || js.live()[index(out)]) {
            throw MalformedPipeline("beamsplitter " + std::to_string(bs.id) + ": output port " +
                                    std::string(arm_name(out)) + " already occupied");
        }
    }
    JointState next = js;
    const auto map = bs.amplitude_map();
    for (int i = 0; i < 2; ++i) {
        next.clear(bs.inputs[i]);
        for (const auto& br : js.component(bs.inputs[i])) {
            for (int o = 0; o < 2; ++o) next.add(bs.outputs[o], map(o, i) * br.coefficient, br.shifts);
        }
    }
    ArmSet live = js.live();
    for (Arm a : bs.inputs) live.reset(index(a));
    for (Arm a : bs.outputs) live.set(index(a));
    next.set_live(live);
    return next;
}

JointState apply_measurement(const JointState& js, const MeterAttachment& att) {
    check_meter(att.meter, js.meters().size());
    if (!js.live()[index(att.arm)]) {
        throw MalformedPipeline("meter coupled to arm " + std::string(arm_name(att.arm)) +
                                " which is not live");
    }
    if (!std::isfinite(att.g)) throw InvalidArgument("coupling strength must be finite");
    JointState next = js;
    next.clear(att.arm);
    for (const auto& br : js.component(att.arm)) {
        Eigen::VectorXd shifts = br.shifts;
        shifts(att.meter) += att.g;
        next.add(att.arm, br.coefficient, shifts);
    }
    return next;
}

JointState run_pipeline_to_stage(const NestedCircuit& circuit, const Photon& input,
                                 std::span<const MeterConfig> meters,
                                 std::span<const MeterAttachment> attachments, int stage) {
    circuit.check_stage(stage);
    for (const auto& att : attachments) {
        check_meter(att.meter, meters.size());
        if (att.stage < 0 || att.stage > circuit.size()) {
            throw MalformedPipeline("attachment stage out of range");
        }
        if (!circuit.is_live(att.arm, att.stage)) {
            throw MalformedPipeline("arm " + std::string(arm_name(att.arm)) + " is not live after stage " +
                                    std::to_string(att.stage));
        }
    }
    JointState js = prepare(circuit, input, std::vector<MeterConfig>(meters.begin(), meters.end()));
    for (int k = 0;; ++k) {
        for (const auto& att : attachments) {
            if (att.stage == k) js = apply_measurement(js, att);
        }
        if (k == stage) break;
        js = apply_beamsplitter(js, circuit.stage(k));
    }
    return js;
}

JointState run_pipeline(const NestedCircuit& circuit, const Photon& input,
                        std::span<const MeterConfig> meters,
                        std::span<const MeterAttachment> attachments) {
    return run_pipeline_to_stage(circuit, input, meters, attachments, circuit.size());
}

double branch_kernel(const JointState& js, const JointBranch& a, const JointBranch& b) {
    return overlap_kernel(js.meters(), a, b);
}

double component_norm2(const JointState& js, Arm arm) {
    return branches_norm2(js.meters(), js.component(arm));
}

double total_norm2(const JointState& js) {
    double sum = 0.0;
    for (Arm arm : kAllArms) sum += component_norm2(js, arm);
    return sum;
}

double arm_probability(const JointState& js, Arm arm) { return component_norm2(js, arm); }

double unconditional_pointer_mean(const JointState& js, int meter) {
    check_meter(meter, js.meters().size());
    double moment = 0.0;
    for (Arm arm : kAllArms) moment += branches_moment(js.meters(), js.component(arm), meter);
    return moment / total_norm2(js);
}

double Postselection::pointer_moment(int meter) const {
    check_meter(meter, meters.size());
    return branches_moment(meters, branches, meter);
}

double Postselection::pointer_mean(int meter) const {
    if (probability <= 1e-30) {
        throw NoPostselectedEvents("postselection on " + std::string(arm_name(detector)) +
                                   " has zero probability");
    }
    return pointer_moment(meter) / probability;
}

MeterWave Postselection::meter_wave() const {
    if (meters.size() != 1) throw InvalidArgument("meter_wave requires exactly one meter");
    MeterWave w(meters.front());
    for (const auto& b : branches) w.add(b.coefficient, b.shifts(0));
    return w;
}

Postselection postselect(const JointState& js, Arm detector) {
    if (!is_detector(detector)) {
        throw InvalidArgument("postselection target must be a detector arm (D1, D2, D3)");
    }
    Postselection out;
    out.detector = detector;
    out.meters = js.meters();
    out.branches = js.component(detector);
    out.probability = branches_norm2(out.meters, out.branches);
    return out;
}

double arm_occupation(const NestedCircuit& circuit, const Photon& input,
                      std::span<const MeterConfig> meters,
                      std::span<const MeterAttachment> attachments, Arm arm, int stage) {
    circuit.check_stage(stage);
    if (!circuit.is_live(arm, stage)) {
        throw InvalidArgument("arm " + std::string(arm_name(arm)) + " is not live after stage " +
                              std::to_string(stage));
    }
    return arm_probability(run_pipeline_to_stage(circuit, input, meters, attachments, stage), arm);
}

}  // namespace weaktrace
