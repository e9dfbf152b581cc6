#pragma once

// Bell-operator analysis of measurement records: estimators with
// uncertainty, violation tests, fidelity witness bounds, the decision
// table, the global success probability and the speed-up figure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "eprsim/linalg.hpp"
#include "eprsim/optics.hpp"
#include "eprsim/protocol.hpp"

namespace eprsim {

inline constexpr double kBellViolationThreshold = 1.0;

// Bell operator of an arm's detector pair: (sx (x) sx + sz (x) sz)/sqrt(2).
// Eigenvalues are {+sqrt(2), 0, 0, -sqrt(2)}; local models bound its mean
// by 1, quantum states by sqrt(2).
inline ComplexMatrix bell_operator(Arm /*arm*/) {
    const cplx s{1.0 / std::numbers::sqrt2, 0.0};
    return s * (kron(pauli_x(), pauli_x()) + kron(pauli_z(), pauli_z()));
}

struct BellEstimate {
    Arm arm = Arm::A;
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n_zz = 0;
    std::uint64_t n_xx = 0;

    static BellEstimate make(Arm arm, double mean, double std_error, std::uint64_t n_zz,
                             std::uint64_t n_xx) {
        if (std_error < 0.0) throw OutOfRangeError("BellEstimate: negative std_error");
        if (std::abs(mean) > std::numbers::sqrt2 + 5.0 * std_error + 1e-9)
            throw OutOfRangeError("BellEstimate: mean is inconsistent with the quantum bound");
        return {arm, mean, std_error, n_zz, n_xx};
    }
};

// Empirical Bell mean from records: (m_xx + m_zz)/sqrt(2), with the two
// basis means treated as independent for the error propagation.
inline BellEstimate estimate(const std::vector<MeasurementRecord>& records, Arm arm) {
    struct BasisStats {
        std::uint64_t n = 0;
        double sum = 0.0;
    };
    BasisStats zz, xx;
    for (const MeasurementRecord& r : records) {
        if (r.arm != arm) continue;
        BasisStats& s = r.basis == MeasurementBasis::Z ? zz : xx;
        s.n += 1;
        s.sum += static_cast<double>(r.outcome_first * r.outcome_second);
    }
    if (zz.n < 2 || xx.n < 2)
        throw InsufficientDataError("estimate: need at least 2 records per basis");
    auto mean_and_se = [](const BasisStats& s) {
        const double n = static_cast<double>(s.n);
        const double m = s.sum / n;
        // Products are +/-1, so sum of squares is n.
        const double var = std::max(0.0, (n - n * m * m) / (n - 1.0));
        return std::pair<double, double>{m, std::sqrt(var / n)};
    };
    const auto [m_zz, se_zz] = mean_and_se(zz);
    const auto [m_xx, se_xx] = mean_and_se(xx);
    const double mean = (m_xx + m_zz) / std::numbers::sqrt2;
    const double se = std::sqrt(se_xx * se_xx + se_zz * se_zz) / std::numbers::sqrt2;
    return BellEstimate::make(arm, mean, se, zz.n, xx.n);
}

// Bell inequality |<B>| <= 1 on the point estimate.
inline bool violated(const BellEstimate& est) {
    return std::abs(est.mean) > kBellViolationThreshold;
}

// Confidence-qualified variant: require a k-sigma margin beyond 1.
inline bool violated(const BellEstimate& est, double k) {
    return std::abs(est.mean) - k * est.std_error > kBellViolationThreshold;
}

struct FidelityBounds {
    FunctionType target = FunctionType::Balanced;  // balanced: phi+, constant: psi-
    double lower = 0.0;      // clamped to [0, 1]
    double upper = 0.0;      // clamped to [0, 1]
    double raw_lower = 0.0;  // formula values, can leave [0, 1]
    double raw_upper = 0.0;
};

// Witness bounds on the overlap with the hypothesis target state:
// m/sqrt(2) <= f_b <= (m/sqrt(2)+1)/2 for balanced, mirrored with -m for
// constant.
inline FidelityBounds fidelity_bounds(const BellEstimate& est, FunctionType hypothesis) {
    const double signed_mean =
        hypothesis == FunctionType::Balanced ? est.mean : -est.mean;
    const double raw_lower = signed_mean / std::numbers::sqrt2;
    const double raw_upper = (signed_mean / std::numbers::sqrt2 + 1.0) / 2.0;
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    return {hypothesis, clamp01(raw_lower), clamp01(raw_upper), raw_lower, raw_upper};
}

enum class Decision { Balanced, Constant, Inconclusive };

inline std::string to_string(Decision d) {
    switch (d) {
        case Decision::Balanced: return "balanced";
        case Decision::Constant: return "constant";
        case Decision::Inconclusive: return "inconclusive";
    }
    throw Error("invalid decision");
}

struct BellReport {
    BellEstimate arm_a;
    BellEstimate arm_b;
    bool violated_a = false;
    bool violated_b = false;
    Decision decision_a = Decision::Inconclusive;
    Decision decision_b = Decision::Inconclusive;
    double confidence_k = 0.0;
    // Present only when both arms are conclusive.
    std::optional<double> p_success_lower;
    std::optional<double> speedup;

    bool conclusive() const {
        return decision_a != Decision::Inconclusive && decision_b != Decision::Inconclusive;
    }
};

// Decision table on the Bell means: mean beyond +1 reads balanced, beyond
// -1 constant, anything else inconclusive (equality included). A positive
// k demands the margin k*std_error beyond the threshold.
inline BellReport classify(const BellEstimate& est_a, const BellEstimate& est_b,
                           double confidence_k = 0.0) {
    if (confidence_k < 0.0) throw OutOfRangeError("classify: confidence_k must be >= 0");
    auto decide = [&](const BellEstimate& est) {
        const double margin = confidence_k * est.std_error;
        if (est.mean - margin > kBellViolationThreshold) return Decision::Balanced;
        if (est.mean + margin < -kBellViolationThreshold) return Decision::Constant;
        return Decision::Inconclusive;
    };
    BellReport report;
    report.arm_a = est_a;
    report.arm_b = est_b;
    report.confidence_k = confidence_k;
    report.decision_a = decide(est_a);
    report.decision_b = decide(est_b);
    report.violated_a = report.decision_a != Decision::Inconclusive;
    report.violated_b = report.decision_b != Decision::Inconclusive;
    if (report.conclusive()) {
        auto hyp = [](Decision d) {
            return d == Decision::Balanced ? FunctionType::Balanced : FunctionType::Constant;
        };
        const double f_a = fidelity_bounds(est_a, hyp(report.decision_a)).lower;
        const double f_b = fidelity_bounds(est_b, hyp(report.decision_b)).lower;
        report.p_success_lower = (f_a + f_b) / 2.0;
        report.speedup = 4.0 * *report.p_success_lower;
    }
    return report;
}

// Speed-up figure 4 * P_success_lower; defined only for conclusive reports.
inline double speedup_factor(const BellReport& report) {
    if (!report.conclusive() || !report.p_success_lower)
        throw InconclusiveError("speedup_factor: report is inconclusive");
    return 4.0 * *report.p_success_lower;
}

// --- serialization ------------------------------------------------------

namespace detail {

inline std::string json_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

} // namespace detail

// Fixed-schema JSON rendering; numbers carry 15 significant digits.
inline std::string report_to_json(const BellReport& report, int indent = 2) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    auto arm_block = [&](const BellEstimate& est, bool viol) {
        std::string s = "{\n";
        s += pad + pad + "\"mean\": " + detail::json_number(est.mean) + ",\n";
        s += pad + pad + "\"std_error\": " + detail::json_number(est.std_error) + ",\n";
        s += pad + pad + "\"violated\": " + (viol ? "true" : "false") + ",\n";
        s += pad + pad + "\"n_zz\": " + std::to_string(est.n_zz) + ",\n";
        s += pad + pad + "\"n_xx\": " + std::to_string(est.n_xx) + "\n";
        s += pad + "}";
        return s;
    };
    std::string s = "{\n";
    s += pad + "\"arm_a\": " + arm_block(report.arm_a, report.violated_a) + ",\n";
    s += pad + "\"decision_a\": \"" + to_string(report.decision_a) + "\",\n";
    s += pad + "\"arm_b\": " + arm_block(report.arm_b, report.violated_b) + ",\n";
    s += pad + "\"decision_b\": \"" + to_string(report.decision_b) + "\"";
    if (report.p_success_lower) {
        s += ",\n" + pad + "\"p_success_lower\": " + detail::json_number(*report.p_success_lower);
        s += ",\n" + pad + "\"speedup\": " + detail::json_number(*report.speedup);
    }
    s += "\n}";
    return s;
}

} // namespace eprsim
