#include <catch2/catch_amalgamated.hpp>

#include <eprsim/protocol.hpp>

#include "test_util.hpp"

using namespace eprsim;
using Catch::Approx;

namespace {

const double invs2 = 1.0 / std::numbers::sqrt2;

ExperimentConfig ideal_config(FunctionType fn_a, FunctionType fn_b) {
    ExperimentConfig cfg;
    cfg.fn_a = fn_a;
    cfg.fn_b = fn_b;
    cfg.noise_p = 1.0;
    cfg.detector_efficiency = 1.0;
    cfg.shots_per_basis = 1000;
    cfg.seed = 99;
    return cfg;
}

double amp_re(const StateVector& s, std::size_t i) { return s.amplitude(i).real(); }

} // namespace

TEST_CASE("EPR source state") {
    const DensityOperator rho = epr_state();
    SECTION("both correlators are -1, checked against the trace oracle") {
        const ComplexMatrix zz = kron(pauli_z(), pauli_z());
        const ComplexMatrix xx = kron(pauli_x(), pauli_x());
        REQUIRE(expectation(zz, rho) == Approx(-1.0).margin(1e-12));
        REQUIRE(expectation(xx, rho) == Approx(-1.0).margin(1e-12));
        REQUIRE(testutil::expectation_oracle(zz, rho.matrix()).real() ==
                Approx(-1.0).margin(1e-12));
        REQUIRE(testutil::expectation_oracle(xx, rho.matrix()).real() ==
                Approx(-1.0).margin(1e-12));
    }
    SECTION("normalized rank-1 state") {
        REQUIRE(rho.matrix().trace().real() == Approx(1.0).margin(1e-12));
        REQUIRE(rho.purity() == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("Werner mixing") {
    const DensityOperator singlet = epr_state();
    SECTION("p = 1 is the identity map") {
        REQUIRE(max_abs_diff(werner(singlet, 1.0).matrix(), singlet.matrix()) < 1e-15);
    }
    SECTION("p = 0 kills every Bell correlator") {
        const DensityOperator mixed = werner(singlet, 0.0);
        REQUIRE(expectation(kron(pauli_z(), pauli_z()), mixed) == Approx(0.0).margin(1e-12));
        REQUIRE(expectation(kron(pauli_x(), pauli_x()), mixed) == Approx(0.0).margin(1e-12));
    }
    SECTION("p = 0.8 scales the zz correlator to -0.8") {
        REQUIRE(expectation(kron(pauli_z(), pauli_z()), werner(singlet, 0.8)) ==
                Approx(-0.8).margin(1e-12));
    }
    SECTION("p outside [0, 1] rejected") {
        REQUIRE_THROWS_AS(werner(singlet, -0.1), OutOfRangeError);
        REQUIRE_THROWS_AS(werner(singlet, 1.1), OutOfRangeError);
    }
}

TEST_CASE("schematic single-photon outcome") {
    REQUIRE(schematic_outcome(FunctionType::Constant, +1) == SchematicOutcome::D2);
    REQUIRE(schematic_outcome(FunctionType::Balanced, +1) == SchematicOutcome::D2Prime);
    // alpha = -1 swaps the two outcomes
    REQUIRE(schematic_outcome(FunctionType::Constant, -1) == SchematicOutcome::D2Prime);
    REQUIRE(schematic_outcome(FunctionType::Balanced, -1) == SchematicOutcome::D2);
    REQUIRE_THROWS_AS(schematic_outcome(FunctionType::Balanced, 0), OutOfRangeError);
}

TEST_CASE("arm element walk on the post-selected branch") {
    // Input: the photon that carries |H> into the arm, on the transmit path.
    const StateVector input = StateVector::basis_state(4, 0);

    SECTION("balanced arm, stage by stage") {
        const auto elems = build_arm(FunctionType::Balanced, Arm::A);
        REQUIRE(elems.size() == 6);

        StateVector s = apply_element(elems[0], input);  // HWP1
        REQUIRE(amp_re(s, 0) == Approx(invs2));
        REQUIRE(amp_re(s, 2) == Approx(invs2));

        s = apply_element(elems[1], s);  // PBS: (|H,a> + |V,b>)/sqrt(2)
        REQUIRE(amp_re(s, 0) == Approx(invs2));
        REQUIRE(amp_re(s, 3) == Approx(invs2));

        s = apply_element(elems[2], s);  // HWP2, minus sign on the V arm
        REQUIRE(amp_re(s, 0) == Approx(0.5));
        REQUIRE(amp_re(s, 2) == Approx(0.5));
        REQUIRE(amp_re(s, 1) == Approx(0.5));
        REQUIRE(amp_re(s, 3) == Approx(-0.5));

        s = apply_element(elems[3], s);  // dove stage swaps V paths
        REQUIRE(amp_re(s, 0) == Approx(0.5));
        REQUIRE(amp_re(s, 1) == Approx(0.5));
        REQUIRE(amp_re(s, 2) == Approx(-0.5));
        REQUIRE(amp_re(s, 3) == Approx(0.5));

        s = apply_element(elems[4], s);  // HWP3: (|V,a> + |H,b>)/sqrt(2)
        REQUIRE(amp_re(s, 2) == Approx(invs2));
        REQUIRE(amp_re(s, 1) == Approx(invs2));
        REQUIRE(std::abs(s.amplitude(0)) < 1e-15);
        REQUIRE(std::abs(s.amplitude(3)) < 1e-15);

        s = apply_element(elems[5], s);  // output plate: (|V,a> - |V,b>)/sqrt(2)
        REQUIRE(amp_re(s, 2) == Approx(invs2));
        REQUIRE(amp_re(s, 3) == Approx(-invs2));
        REQUIRE(std::abs(s.amplitude(0)) < 1e-15);
        REQUIRE(std::abs(s.amplitude(1)) < 1e-15);

        // only vertical polarization reaches the signal detector
        REQUIRE(expectation(kron(pauli_z(), ComplexMatrix::identity(2)), projector(s)) ==
                Approx(-1.0).margin(1e-12));
    }

    SECTION("constant arm endpoint") {
        const auto elems = build_arm(FunctionType::Constant, Arm::A);
        const StateVector s = apply_elements(elems, input);
        // (|H,a> + |H,b>)/sqrt(2): only horizontal polarization at the detector
        REQUIRE(amp_re(s, 0) == Approx(invs2));
        REQUIRE(amp_re(s, 1) == Approx(invs2));
        REQUIRE(std::abs(s.amplitude(2)) < 1e-15);
        REQUIRE(std::abs(s.amplitude(3)) < 1e-15);
        REQUIRE(expectation(kron(pauli_z(), ComplexMatrix::identity(2)), projector(s)) ==
                Approx(1.0).margin(1e-12));
    }

    SECTION("arm B mirrors arm A") {
        for (FunctionType fn : {FunctionType::Balanced, FunctionType::Constant}) {
            const StateVector a = apply_elements(build_arm(fn, Arm::A), input);
            const StateVector b = apply_elements(build_arm(fn, Arm::B), input);
            for (std::size_t i = 0; i < 4; ++i)
                REQUIRE(std::abs(a.amplitude(i) - b.amplitude(i)) < 1e-15);
        }
        // signal detector of arm B reads -1 (balanced) / +1 (constant)
        const ComplexMatrix sz_pol = kron(pauli_z(), ComplexMatrix::identity(2));
        const StateVector bal = apply_elements(build_arm(FunctionType::Balanced, Arm::B), input);
        REQUIRE(expectation(sz_pol, projector(bal)) == Approx(-1.0).margin(1e-12));
        const StateVector con = apply_elements(build_arm(FunctionType::Constant, Arm::B), input);
        REQUIRE(expectation(sz_pol, projector(con)) == Approx(1.0).margin(1e-12));
        const auto elems = build_arm(FunctionType::Balanced, Arm::B);
        REQUIRE(elems[0].name == "HWP4");
        REQUIRE(elems[4].name == "HWP6");
    }

    SECTION("the heralded partner photon reads -1 in z") {
        // Post-selection keeps the branch whose partner is vertically
        // polarized at the heralding detector.
        REQUIRE(expectation(pauli_z(), projector(StateVector::basis_state(2, 1))) ==
                Approx(-1.0));
    }
}

TEST_CASE("detector-pair output state") {
    SECTION("ideal balanced arm lands on phi+") {
        const DensityOperator rho =
            joint_output_state(ideal_config(FunctionType::Balanced, FunctionType::Balanced), Arm::A);
        REQUIRE(fidelity(rho, bell_phi_plus()) == Approx(1.0).margin(1e-12));
    }
    SECTION("ideal constant arm lands on psi-") {
        const DensityOperator rho =
            joint_output_state(ideal_config(FunctionType::Constant, FunctionType::Constant), Arm::A);
        REQUIRE(fidelity(rho, bell_psi_minus()) == Approx(1.0).margin(1e-12));
    }
    SECTION("fully depolarized source yields the maximally mixed pair") {
        ExperimentConfig cfg = ideal_config(FunctionType::Balanced, FunctionType::Constant);
        cfg.noise_p = 0.0;
        const DensityOperator rho = joint_output_state(cfg, Arm::A);
        const ComplexMatrix quarter = cplx{0.25, 0.0} * ComplexMatrix::identity(4);
        REQUIRE(max_abs_diff(rho.matrix(), quarter) < 1e-12);
    }
    SECTION("purity 1 for every (function, arm) combination at p = 1") {
        for (FunctionType fa : {FunctionType::Balanced, FunctionType::Constant})
            for (FunctionType fb : {FunctionType::Balanced, FunctionType::Constant})
                for (Arm arm : {Arm::A, Arm::B}) {
                    const DensityOperator rho = joint_output_state(ideal_config(fa, fb), arm);
                    REQUIRE(rho.purity() == Approx(1.0).margin(1e-10));
                }
    }
    SECTION("|zz correlator| grows monotonically with the Werner parameter") {
        ExperimentConfig cfg = ideal_config(FunctionType::Balanced, FunctionType::Constant);
        double last = -1.0;
        for (int i = 0; i <= 10; ++i) {
            cfg.noise_p = 0.1 * i;
            const double c =
                std::abs(pair_correlator(joint_output_state(cfg, Arm::A), MeasurementBasis::Z));
            REQUIRE(c >= last - 1e-12);
            last = c;
        }
    }
    SECTION("x and z correlators agree for every function and noise level") {
        ExperimentConfig cfg = ideal_config(FunctionType::Balanced, FunctionType::Constant);
        for (FunctionType fa : {FunctionType::Balanced, FunctionType::Constant}) {
            cfg.fn_a = fa;
            for (int i = 0; i <= 10; ++i) {
                cfg.noise_p = 0.1 * i;
                const DensityOperator rho = joint_output_state(cfg, Arm::A);
                REQUIRE(pair_correlator(rho, MeasurementBasis::Z) ==
                        Approx(pair_correlator(rho, MeasurementBasis::X)).margin(1e-12));
            }
        }
    }
}

TEST_CASE("finite-shot sampling") {
    SECTION("ideal balanced arm: every z product is +1") {
        ExperimentConfig cfg = ideal_config(FunctionType::Balanced, FunctionType::Balanced);
        for (const MeasurementRecord& r : sample_records(cfg))
            if (r.basis == MeasurementBasis::Z)
                REQUIRE(r.outcome_first * r.outcome_second == 1);
    }
    SECTION("ideal constant arm: every z product is -1") {
        ExperimentConfig cfg = ideal_config(FunctionType::Constant, FunctionType::Constant);
        for (const MeasurementRecord& r : sample_records(cfg))
            if (r.basis == MeasurementBasis::Z)
                REQUIRE(r.outcome_first * r.outcome_second == -1);
    }
    SECTION("depolarized source: product mean within the binomial bound") {
        ExperimentConfig cfg = ideal_config(FunctionType::Balanced, FunctionType::Constant);
        cfg.noise_p = 0.0;
        cfg.shots_per_basis = 10000;
        const auto records = sample_records(cfg);
        double sum = 0.0;
        std::size_t n = 0;
        for (const MeasurementRecord& r : records)
            if (r.arm == Arm::A && r.basis == MeasurementBasis::Z) {
                sum += r.outcome_first * r.outcome_second;
                ++n;
            }
        REQUIRE(n == cfg.shots_per_basis);
        REQUIRE(std::abs(sum / static_cast<double>(n)) <=
                5.0 / std::sqrt(static_cast<double>(n)));
    }
    SECTION("identical seed reproduces the record list bit for bit") {
        ExperimentConfig cfg = ideal_config(FunctionType::Balanced, FunctionType::Constant);
        cfg.noise_p = 0.7;
        cfg.detector_efficiency = 0.8;
        cfg.seed = 1234;
        const auto r1 = sample_records(cfg);
        const auto r2 = sample_records(cfg);
        REQUIRE(r1.size() == r2.size());
        for (std::size_t i = 0; i < r1.size(); ++i) {
            REQUIRE(r1[i].shot_index == r2[i].shot_index);
            REQUIRE(r1[i].arm == r2[i].arm);
            REQUIRE(r1[i].basis == r2[i].basis);
            REQUIRE(r1[i].outcome_first == r2[i].outcome_first);
            REQUIRE(r1[i].outcome_second == r2[i].outcome_second);
        }
        cfg.seed = 1235;
        const auto r3 = sample_records(cfg);
        bool all_equal = r3.size() == r1.size();
        for (std::size_t i = 0; all_equal && i < r1.size(); ++i)
            all_equal = r1[i].shot_index == r3[i].shot_index &&
                        r1[i].outcome_first == r3[i].outcome_first &&
                        r1[i].outcome_second == r3[i].outcome_second;
        REQUIRE_FALSE(all_equal);
    }
    SECTION("detector inefficiency drops shots but never alters outcomes") {
        ExperimentConfig cfg = ideal_config(FunctionType::Balanced, FunctionType::Constant);
        cfg.detector_efficiency = 0.5;
        cfg.shots_per_basis = 20000;
        const auto records = sample_records(cfg);
        // Coincidence probability is eta^2 = 0.25.
        const double kept = static_cast<double>(records.size());
        const double expected = 4.0 * 20000.0 * 0.25;
        REQUIRE(std::abs(kept - expected) < 5.0 * std::sqrt(4.0 * 20000.0 * 0.25 * 0.75));
        std::uint64_t last_index = 0;
        bool first = true;
        for (const MeasurementRecord& r : records) {
            REQUIRE((r.outcome_first == 1 || r.outcome_first == -1));
            REQUIRE((r.outcome_second == 1 || r.outcome_second == -1));
            if (r.arm == Arm::A && r.basis == MeasurementBasis::Z) {
                if (!first) REQUIRE(r.shot_index > last_index);
                last_index = r.shot_index;
                first = false;
            }
        }
        // With 50% efficiency some z shots of arm A must have been dropped.
        REQUIRE(last_index >= 20000 * 0.25);
    }
    SECTION("sampled x and z products agree within five sigma") {
        ExperimentConfig cfg = ideal_config(FunctionType::Balanced, FunctionType::Constant);
        cfg.noise_p = 0.9;
        cfg.shots_per_basis = 20000;
        const auto records = sample_records(cfg);
        for (Arm arm : {Arm::A, Arm::B}) {
            double sums[2] = {0.0, 0.0};
            double ns[2] = {0.0, 0.0};
            for (const MeasurementRecord& r : records) {
                if (r.arm != arm) continue;
                const int b = r.basis == MeasurementBasis::Z ? 0 : 1;
                sums[b] += r.outcome_first * r.outcome_second;
                ns[b] += 1.0;
            }
            const double mz = sums[0] / ns[0], mx = sums[1] / ns[1];
            const double se =
                std::sqrt((1.0 - mz * mz) / ns[0] + (1.0 - mx * mx) / ns[1]);
            REQUIRE(std::abs(mz - mx) <= 5.0 * se + 1e-12);
        }
    }
}

TEST_CASE("record CSV export") {
    ExperimentConfig cfg = ideal_config(FunctionType::Balanced, FunctionType::Constant);
    cfg.shots_per_basis = 2;
    const std::string csv = records_to_csv(sample_records(cfg));
    REQUIRE(csv.rfind("shot,arm,basis,d_first,d_second\n", 0) == 0);
    REQUIRE(csv.find("0,A,z,") != std::string::npos);
    REQUIRE(csv.find("1,B,x,") != std::string::npos);
    // outcomes carry explicit signs
    REQUIRE((csv.find(",+1") != std::string::npos || csv.find(",-1") != std::string::npos));
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg;
    cfg.noise_p = 1.2;
    REQUIRE_THROWS_AS(cfg.validate(), OutOfRangeError);
    cfg.noise_p = 0.5;
    cfg.detector_efficiency = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), OutOfRangeError);
    cfg.detector_efficiency = 1.0;
    cfg.shots_per_basis = 0;
    REQUIRE_THROWS_AS(cfg.validate(), OutOfRangeError);
}
