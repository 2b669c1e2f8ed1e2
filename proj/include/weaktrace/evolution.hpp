#pragma once

// Joint photon-meter evolution.
//
// Each arm component of the joint state is a list of branches; a branch is a
// complex coefficient times a product of translated meter Gaussians, one shift
// per meter. Couplings translate one meter on one arm; beamsplitters mix arm
// components. Different arms are orthogonal, so all norms and pointer moments
// reduce to per-arm sums of closed-form Gaussian kernels.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "weaktrace/meter.hpp"
#include "weaktrace/path_space.hpp"

namespace weaktrace {

using NestedCircuit = Circuit<double>;
using Photon = PhotonState<double>;

struct MeterAttachment {
    int meter = 0;
    Arm arm = Arm::B;
    double g = 0.0;
    // Coupling acts after this many stages.
    int stage = 0;
};

// Attachment at the first stage where the arm is live (A, D after BS1; B, C after BS2; E after BS3).
MeterAttachment attach(const NestedCircuit& circuit, int meter, Arm arm, double g);

struct JointBranch {
    std::complex<double> coefficient;
    Eigen::VectorXd shifts;
};

class JointState {
public:
    JointState(ArmSet live, const Photon& photon, std::vector<MeterConfig> meters);

    const std::vector<MeterConfig>& meters() const { return meters_; }
    int meter_count() const { return static_cast<int>(meters_.size()); }
    ArmSet live() const { return live_; }

    const std::vector<JointBranch>& component(Arm arm) const { return components_[index(arm)]; }

    void add(Arm arm, std::complex<double> coefficient, const Eigen::VectorXd& shifts);
    void clear(Arm arm) { components_[index(arm)].clear(); }
    void set_live(ArmSet live) { live_ = live; }

private:
    std::vector<MeterConfig> meters_;
    ArmSet live_;
    std::array<std::vector<JointBranch>, kArmCount> components_;
};

// Joint state at stage 0; all meters start undisplaced.
JointState prepare(const NestedCircuit& circuit, const Photon& input, std::vector<MeterConfig> meters);

JointState apply_beamsplitter(const JointState& js, const BeamSplitter<double>& bs);
JointState apply_measurement(const JointState& js, const MeterAttachment& att);

// Stages 1..stage with attachments interleaved after their insertion stage.
JointState run_pipeline_to_stage(const NestedCircuit& circuit, const Photon& input,
                                 std::span<const MeterConfig> meters,
                                 std::span<const MeterAttachment> attachments, int stage);
JointState run_pipeline(const NestedCircuit& circuit, const Photon& input,
                        std::span<const MeterConfig> meters,
                        std::span<const MeterAttachment> attachments);

// <a|b> over all meters.
double branch_kernel(const JointState& js, const JointBranch& a, const JointBranch& b);

double component_norm2(const JointState& js, Arm arm);
double total_norm2(const JointState& js);

// Photon arm probability with meters traced out.
double arm_probability(const JointState& js, Arm arm);

// <Q_M> for one meter with no postselection.
double unconditional_pointer_mean(const JointState& js, int meter);

// Photon projected onto one detector arm; the meter state is left un-normalized.
struct Postselection {
    Arm detector = Arm::D2;
    double probability = 0.0;
    std::vector<MeterConfig> meters;
    std::vector<JointBranch> branches;

    double norm2() const { return probability; }
    // Un-normalized first moment <psi_f| Q_k |psi_f>.
    double pointer_moment(int meter) const;
    // Conditional mean; throws NoPostselectedEvents when probability is zero.
    double pointer_mean(int meter) const;
    // Exact single-meter wave; throws InvalidArgument when several meters are attached.
    MeterWave meter_wave() const;
};

Postselection postselect(const JointState& js, Arm detector);

double arm_occupation(const NestedCircuit& circuit, const Photon& input,
                      std::span<const MeterConfig> meters,
                      std::span<const MeterAttachment> attachments, Arm arm, int stage);

}  // namespace weaktrace
