#pragma once

// Single-photon path space of the nested Mach-Zehnder interferometer.
//
// A photon state is a dense complex vector with one amplitude per arm label.
// Beamsplitters are 2x2 stages with explicit port assignment; the circuit is
// the ordered list BS1..BS4. All types are templated on the real scalar so the
// same code runs in double or long double.

#include <array>
#include <bitset>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "weaktrace/error.hpp"

namespace weaktrace {

enum class Arm : int { N = 0, N0, A, D, D0, B, C, E, D1, D2, D3 };

inline constexpr int kArmCount = 11;

inline constexpr std::array<Arm, kArmCount> kAllArms = {
    Arm::N, Arm::N0, Arm::A, Arm::D, Arm::D0, Arm::B,
    Arm::C, Arm::E,  Arm::D1, Arm::D2, Arm::D3};

inline constexpr int index(Arm arm) { return static_cast<int>(arm); }

inline std::string_view arm_name(Arm arm) {
    static constexpr std::array<std::string_view, kArmCount> names = {
        "N", "N0", "A", "D", "D0", "B", "C", "E", "D1", "D2", "D3"};
    return names[index(arm)];
}

inline std::optional<Arm> parse_arm(std::string_view name) {
    for (Arm arm : kAllArms) {
        if (arm_name(arm) == name) return arm;
    }
    return std::nullopt;
}

inline bool is_detector(Arm arm) { return arm == Arm::D1 || arm == Arm::D2 || arm == Arm::D3; }

using ArmSet = std::bitset<kArmCount>;

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using PhotonState = Eigen::Matrix<Complex<Scalar>, kArmCount, 1>;

template <typename Scalar>
using Transfer = Eigen::Matrix<Complex<Scalar>, 2, 2>;

template <typename Scalar>
PhotonState<Scalar> basis_state(Arm arm) {
    PhotonState<Scalar> state = PhotonState<Scalar>::Zero();
    state(index(arm)) = Complex<Scalar>(1);
    return state;
}

// Identity tolerance for exact amplitude algebra.
inline constexpr double kExactTol = 1e-12;

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& m, double tol = kExactTol) {
    using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Mat prod = m.adjoint() * m;
    return (prod - Mat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

// The ket relation is (|out0>, |out1>)^T = transfer (|in0>, |in1>)^T, as the
// matrix is printed for BS3. Input kets therefore expand as
// |in_i> = sum_o conj(transfer(o, i)) |out_o>, so amplitudes map by
// conj(transfer). The inverse stage maps amplitudes by transfer^T.
template <typename Scalar>
struct BeamSplitter {
    int id = 0;
    std::array<Arm, 2> inputs{};
    std::array<Arm, 2> outputs{};
    Transfer<Scalar> transfer = Transfer<Scalar>::Identity();

    BeamSplitter() = default;

    BeamSplitter(int id_, std::array<Arm, 2> in, std::array<Arm, 2> out, Transfer<Scalar> t)
        : id(id_), inputs(in), outputs(out), transfer(std::move(t)) {
        if (!is_unitary(transfer)) {
            throw InvalidArgument("beamsplitter " + std::to_string(id) + ": transfer is not unitary");
        }
        for (Arm i : inputs) {
            for (Arm o : outputs) {
                if (i == o) throw InvalidArgument("beamsplitter ports overlap");
            }
        }
        if (inputs[0] == inputs[1] || outputs[0] == outputs[1]) {
            throw InvalidArgument("beamsplitter has a repeated port");
        }
    }

    Transfer<Scalar> amplitude_map() const { return transfer.conjugate(); }
    Transfer<Scalar> inverse_amplitude_map() const { return transfer.transpose(); }
};

// 50-50 transfer as printed for BS3: (1/sqrt 2) [[1, i], [i, 1]].
template <typename Scalar>
Transfer<Scalar> balanced_transfer() {
    const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
    Transfer<Scalar> t;
    t << Complex<Scalar>(r, 0), Complex<Scalar>(0, r),
         Complex<Scalar>(0, r), Complex<Scalar>(r, 0);
    return t;
}

template <typename Scalar>
class Circuit {
public:
    Circuit() = default;

    explicit Circuit(std::vector<BeamSplitter<Scalar>> stages) : stages_(std::move(stages)) {
        ArmSet produced;
        ArmSet consumed;
        for (const auto& bs : stages_) {
            for (Arm a : bs.inputs) {
                if (consumed[index(a)]) throw InvalidArgument("arm consumed by two stages");
                consumed.set(index(a));
            }
            for (Arm a : bs.outputs) {
                if (produced[index(a)] || consumed[index(a)]) {
                    throw InvalidArgument("arm produced twice or after it was consumed");
                }
                produced.set(index(a));
            }
        }
        live_.reserve(stages_.size() + 1);
        ArmSet live;
        for (Arm a : kAllArms) {
            if (!produced[index(a)]) live.set(index(a));
        }
        live_.push_back(live);
        for (const auto& bs : stages_) {
            for (Arm a : bs.inputs) live.reset(index(a));
            for (Arm a : bs.outputs) live.set(index(a));
            live_.push_back(live);
        }
    }

    int size() const { return static_cast<int>(stages_.size()); }
    const BeamSplitter<Scalar>& stage(int k) const { return stages_.at(static_cast<std::size_t>(k)); }
    const std::vector<BeamSplitter<Scalar>>& stages() const { return stages_; }

    // Arms holding amplitude after the first k stages.
    ArmSet live_arms(int k) const {
        check_stage(k);
        return live_[static_cast<std::size_t>(k)];
    }

    bool is_live(Arm arm, int k) const { return live_arms(k)[index(arm)]; }

    // First stage count after which the arm is live; nullopt for arms never present.
    std::optional<int> first_live_stage(Arm arm) const {
        for (int k = 0; k <= size(); ++k) {
            if (live_[static_cast<std::size_t>(k)][index(arm)]) return k;
        }
        return std::nullopt;
    }

    void check_stage(int k) const {
        if (k < 0 || k > size()) {
            throw InvalidArgument("stage index " + std::to_string(k) + " outside [0, " +
                                  std::to_string(size()) + "]");
        }
    }

private:
    std::vector<BeamSplitter<Scalar>> stages_;
    std::vector<ArmSet> live_;
};

// Fig. 1 layout. Port order is fixed so that |N> evolves into
// -i(sqrt2|A> + |B> + i|C>)/2 after BS2 and -i(|A> + |D3>)/sqrt2 after BS3.
template <typename Scalar = double>
Circuit<Scalar> build_nested_mzi() {
    const auto t = balanced_transfer<Scalar>();
    return Circuit<Scalar>({
        BeamSplitter<Scalar>(1, {Arm::N, Arm::N0}, {Arm::D, Arm::A}, t),
        BeamSplitter<Scalar>(2, {Arm::D, Arm::D0}, {Arm::C, Arm::B}, t),
        BeamSplitter<Scalar>(3, {Arm::B, Arm::C}, {Arm::D3, Arm::E}, t),
        BeamSplitter<Scalar>(4, {Arm::A, Arm::E}, {Arm::D1, Arm::D2}, t),
    });
}

namespace detail {

template <typename Scalar>
PhotonState<Scalar> apply_ports(const PhotonState<Scalar>& state, const std::array<Arm, 2>& from,
                                const std::array<Arm, 2>& to, const Transfer<Scalar>& map,
                                int id) {
    for (Arm a : to) {
        if (state(index(a)) != Complex<Scalar>(0)) {
            throw MalformedPipeline("beamsplitter " + std::to_string(id) +
                                    ": amplitude already present on port " +
                                    std::string(arm_name(a)));
        }
    }
    const Eigen::Matrix<Complex<Scalar>, 2, 1> in(state(index(from[0])), state(index(from[1])));
    const Eigen::Matrix<Complex<Scalar>, 2, 1> out = map * in;
    PhotonState<Scalar> result = state;
    result(index(from[0])) = Complex<Scalar>(0);
    result(index(from[1])) = Complex<Scalar>(0);
    result(index(to[0])) = out(0);
    result(index(to[1])) = out(1);
    return result;
}

}  // namespace detail

template <typename Scalar>
PhotonState<Scalar> apply_beamsplitter(const PhotonState<Scalar>& state,
                                       const BeamSplitter<Scalar>& bs) {
    return detail::apply_ports(state, bs.inputs, bs.outputs, bs.amplitude_map(), bs.id);
}

// Backward (adjoint) stage: U^{-1} applied to a ket living on the output ports.
template <typename Scalar>
PhotonState<Scalar> apply_beamsplitter_inverse(const PhotonState<Scalar>& state,
                                               const BeamSplitter<Scalar>& bs) {
    return detail::apply_ports(state, bs.outputs, bs.inputs, bs.inverse_amplitude_map(), bs.id);
}

template <typename Scalar>
PhotonState<Scalar> evolve_to_stage(const Circuit<Scalar>& circuit, PhotonState<Scalar> state,
                                    int k) {
    circuit.check_stage(k);
    for (int s = 0; s < k; ++s) state = apply_beamsplitter(state, circuit.stage(s));
    return state;
}

// Continue evolution from stage `from` to stage `to` (from <= to).
template <typename Scalar>
PhotonState<Scalar> evolve_between(const Circuit<Scalar>& circuit, PhotonState<Scalar> state,
                                   int from, int to) {
    circuit.check_stage(from);
    circuit.check_stage(to);
    if (from > to) throw InvalidArgument("evolve_between: from > to");
    for (int s = from; s < to; ++s) state = apply_beamsplitter(state, circuit.stage(s));
    return state;
}

template <typename Scalar>
PhotonState<Scalar> project(const PhotonState<Scalar>& state, Arm arm) {
    PhotonState<Scalar> out = PhotonState<Scalar>::Zero();
    out(index(arm)) = state(index(arm));
    return out;
}

template <typename Scalar>
Scalar projector_expectation(const PhotonState<Scalar>& state, Arm arm) {
    return std::norm(state(index(arm)));
}

}  // namespace weaktrace
