#pragma once

// Unitary models of the optical elements used by the experiment.
//
// Polarization qubit basis, fixed repo-wide: index 0 = |H>, index 1 = |V>,
// with truth values |H> <-> 1 and |V> <-> 0. Path qubit basis: index 0 =
// the transmit path (labelled 2, later a), index 1 = the reflect path
// (2', later b). Two-qubit elements act on (polarization, path).

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "eprsim/linalg.hpp"

namespace eprsim {

enum class FunctionType { Balanced, Constant };

inline std::string to_string(FunctionType fn) {
    return fn == FunctionType::Balanced ? "balanced" : "constant";
}

enum class DetectorId { D1, D2, D3, D4 };

inline std::string to_string(DetectorId d) {
    switch (d) {
        case DetectorId::D1: return "D1";
        case DetectorId::D2: return "D2";
        case DetectorId::D3: return "D3";
        case DetectorId::D4: return "D4";
    }
    throw UnknownDetectorError("invalid detector id");
}

enum class MeasurementBasis { Z, X };

inline std::string to_string(MeasurementBasis b) {
    return b == MeasurementBasis::Z ? "z" : "x";
}

inline ComplexMatrix pauli_z() {
    return ComplexMatrix(2, 2, {1.0, 0.0, 0.0, -1.0});
}

inline ComplexMatrix pauli_x() {
    return ComplexMatrix(2, 2, {0.0, 1.0, 1.0, 0.0});
}

struct OpticalElement {
    std::string name;                  // e.g. "HWP1", "PBS2", "DP(balanced)"
    ComplexMatrix unitary;             // on the qubits listed in acts_on
    std::vector<std::size_t> acts_on;  // register indices, distinct
};

// Half-wave plate at angle theta (degrees) in the (|H>,|V>) basis:
// [[cos 2t, sin 2t], [sin 2t, -cos 2t]]. Real by convention; the global
// phase of a wave plate is unobservable here.
inline OpticalElement hwp(double theta_degrees, std::size_t pol_qubit = 0,
                          std::string name = "HWP") {
    if (!std::isfinite(theta_degrees)) throw Error("hwp: angle must be finite");
    const double t = 2.0 * theta_degrees * std::numbers::pi / 180.0;
    const double c = std::cos(t), s = std::sin(t);
    return {std::move(name), ComplexMatrix(2, 2, {c, s, s, -c}), {pol_qubit}};
}

// Polarizing beam splitter on (polarization, path): horizontal light keeps
// its path, vertical light swaps to the other port. A permutation on the
// joint basis.
inline OpticalElement pbs(std::size_t pol_qubit = 0, std::size_t path_qubit = 1,
                          std::string name = "PBS") {
    ComplexMatrix u(4, 4);
    u(0, 0) = 1.0;  // |H,0> -> |H,0>
    u(1, 1) = 1.0;  // |H,1> -> |H,1>
    u(3, 2) = 1.0;  // |V,0> -> |V,1>
    u(2, 3) = 1.0;  // |V,1> -> |V,0>
    return {std::move(name), std::move(u), {pol_qubit, path_qubit}};
}

// Dove-prism stage implementing the hidden function on (polarization,
// path). Balanced: polarization-controlled path NOT (horizontal keeps its
// path, vertical swaps). Constant: both polarizations keep their paths.
inline OpticalElement dove_cnot(FunctionType fn, std::size_t pol_qubit = 0,
                                std::size_t path_qubit = 1) {
    ComplexMatrix u(4, 4);
    if (fn == FunctionType::Balanced) {
        u(0, 0) = 1.0;
        u(1, 1) = 1.0;
        u(3, 2) = 1.0;
        u(2, 3) = 1.0;
    } else {
        u = ComplexMatrix::identity(4);
    }
    return {"DP(" + to_string(fn) + ")", std::move(u), {pol_qubit, path_qubit}};
}

// Output wave plate at 45 degrees sitting in the reflected beam (path b)
// only, with the recombination phase of the interferometer folded in:
// |H>_b -> -|V>_b, |V>_b -> |H>_b, path a untouched. This is the signed
// convention that yields the interferometer's output states
// (|V>_a - |V>_b)/sqrt(2) (balanced) and (|H>_a + |H>_b)/sqrt(2)
// (constant) for the post-selected input.
inline OpticalElement output_hwp45(std::size_t pol_qubit = 0, std::size_t path_qubit = 1,
                                   std::string name = "HWP(45)") {
    ComplexMatrix u(4, 4);
    u(0, 0) = 1.0;   // |H,a> -> |H,a>
    u(2, 2) = 1.0;   // |V,a> -> |V,a>
    u(3, 1) = -1.0;  // |H,b> -> -|V,b>
    u(1, 3) = 1.0;   // |V,b> -> |H,b>
    return {std::move(name), std::move(u), {pol_qubit, path_qubit}};
}

// Polarizer at 45 degrees plus half-wave plate in front of a detector:
// rotates the measurement basis so that a z-reading detector measures
// sigma_x. Equals the Hadamard Jones matrix.
inline OpticalElement x_basis_adapter(std::size_t pol_qubit = 0) {
    const double s = 1.0 / std::numbers::sqrt2;
    return {"x-adapter", ComplexMatrix(2, 2, {s, s, s, -s}), {pol_qubit}};
}

// Polarization observable read by a detector in the given basis.
inline ComplexMatrix observable(DetectorId detector, MeasurementBasis basis) {
    switch (detector) {
        case DetectorId::D1:
        case DetectorId::D2:
        case DetectorId::D3:
        case DetectorId::D4:
            break;
        default:
            throw UnknownDetectorError("observable: unknown detector");
    }
    return basis == MeasurementBasis::Z ? pauli_z() : pauli_x();
}

// Apply an element to a register state (qubit 0 = leftmost factor).
inline StateVector apply_element(const OpticalElement& e, const StateVector& psi) {
    return apply(embed(e.unitary, e.acts_on, psi.num_qubits()), psi);
}

inline DensityOperator apply_element(const OpticalElement& e, const DensityOperator& rho) {
    return apply(embed(e.unitary, e.acts_on, rho.num_qubits()), rho);
}

inline StateVector apply_elements(const std::vector<OpticalElement>& elements,
                                  const StateVector& psi) {
    StateVector s = psi;
    for (const OpticalElement& e : elements) s = apply_element(e, s);
    return s;
}

} // namespace eprsim
