// eprsim — two-photon Deutsch experiment simulator.
//
// Configures an experiment, runs the exact and the finite-shot analysis,
// writes the detector records as CSV and the Bell report as JSON or text.
// A selftest subcommand re-derives the core optical identities and the
// witness inequalities on random states.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <eprsim/eprsim.hpp>

namespace {

using namespace eprsim;

struct RunConfig {
    ExperimentConfig exp;
    double confidence_k = 3.0;
    std::string out_records = "records.csv";
    std::string out_report = "-";  // "-" writes to stdout
    std::string format = "json";
    bool exact_only = false;
};

FunctionType parse_function(const std::string& s) {
    if (s == "balanced") return FunctionType::Balanced;
    if (s == "constant") return FunctionType::Constant;
    throw ConfigError("unknown function type: " + s);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

struct ExactArmAnalysis {
    double bell_mean = 0.0;
    double zz = 0.0;
    double xx = 0.0;
    double fidelity_phi_plus = 0.0;
    double fidelity_psi_minus = 0.0;
    double purity = 0.0;
};

ExactArmAnalysis analyze_exact(const ExperimentConfig& cfg, Arm arm) {
    const DensityOperator rho = joint_output_state(cfg, arm);
    ExactArmAnalysis a;
    a.bell_mean = expectation(bell_operator(arm), rho);
    a.zz = pair_correlator(rho, MeasurementBasis::Z);
    a.xx = pair_correlator(rho, MeasurementBasis::X);
    a.fidelity_phi_plus = fidelity(rho, bell_phi_plus());
    a.fidelity_psi_minus = fidelity(rho, bell_psi_minus());
    a.purity = rho.purity();
    return a;
}

std::string exact_block(const ExactArmAnalysis& a, const std::string& pad) {
    std::string s = "{\n";
    s += pad + "  \"bell_mean\": " + fmt(a.bell_mean) + ",\n";
    s += pad + "  \"zz\": " + fmt(a.zz) + ",\n";
    s += pad + "  \"xx\": " + fmt(a.xx) + ",\n";
    s += pad + "  \"fidelity_phi_plus\": " + fmt(a.fidelity_phi_plus) + ",\n";
    s += pad + "  \"fidelity_psi_minus\": " + fmt(a.fidelity_psi_minus) + ",\n";
    s += pad + "  \"purity\": " + fmt(a.purity) + "\n";
    s += pad + "}";
    return s;
}

std::string report_json_document(const RunConfig& cfg, const BellReport& report,
                                 const ExactArmAnalysis& ea, const ExactArmAnalysis& eb) {
    // Splice the exact-analysis and config sections into the report object.
    std::string body = report_to_json(report);
    body.erase(body.rfind("\n}"));
    body += ",\n  \"exact\": {\n";
    body += "    \"arm_a\": " + exact_block(ea, "    ") + ",\n";
    body += "    \"arm_b\": " + exact_block(eb, "    ") + "\n";
    body += "  },\n";
    body += "  \"config\": {\n";
    body += "    \"fn_a\": \"" + to_string(cfg.exp.fn_a) + "\",\n";
    body += "    \"fn_b\": \"" + to_string(cfg.exp.fn_b) + "\",\n";
    body += "    \"noise_p\": " + fmt(cfg.exp.noise_p) + ",\n";
    body += "    \"efficiency\": " + fmt(cfg.exp.detector_efficiency) + ",\n";
    body += "    \"shots\": " + std::to_string(cfg.exp.shots_per_basis) + ",\n";
    body += "    \"seed\": " + std::to_string(cfg.exp.seed) + ",\n";
    body += "    \"confidence_k\": " + fmt(cfg.confidence_k) + ",\n";
    body += std::string("    \"exact_only\": ") + (cfg.exact_only ? "true" : "false") + "\n";
    body += "  }\n}";
    return body;
}

std::string report_text_document(const RunConfig& cfg, const BellReport& report,
                                 const ExactArmAnalysis& ea, const ExactArmAnalysis& eb) {
    std::ostringstream os;
    os << "experiment: fn_a=" << to_string(cfg.exp.fn_a) << " fn_b=" << to_string(cfg.exp.fn_b)
       << " noise_p=" << fmt(cfg.exp.noise_p) << " efficiency="
       << fmt(cfg.exp.detector_efficiency) << " shots=" << cfg.exp.shots_per_basis
       << " seed=" << cfg.exp.seed << "\n\n";
    auto arm_lines = [&](const char* label, const BellEstimate& est, bool viol, Decision d,
                         const ExactArmAnalysis& ex) {
        os << "arm " << label << ":\n";
        os << "  bell mean     " << fmt(est.mean) << " +/- " << fmt(est.std_error) << "  (n_zz="
           << est.n_zz << ", n_xx=" << est.n_xx << ")\n";
        os << "  violated      " << (viol ? "yes" : "no") << "\n";
        os << "  decision      " << to_string(d) << "\n";
        os << "  exact         bell=" << fmt(ex.bell_mean) << " zz=" << fmt(ex.zz)
           << " xx=" << fmt(ex.xx) << "\n";
        os << "  fidelities    phi+=" << fmt(ex.fidelity_phi_plus)
           << " psi-=" << fmt(ex.fidelity_psi_minus) << " purity=" << fmt(ex.purity) << "\n";
    };
    arm_lines("A", report.arm_a, report.violated_a, report.decision_a, ea);
    arm_lines("B", report.arm_b, report.violated_b, report.decision_b, eb);
    if (report.p_success_lower) {
        os << "\np_success_lower " << fmt(*report.p_success_lower) << "\n";
        os << "speedup         " << fmt(*report.speedup) << "\n";
    } else {
        os << "\nno certified speed-up (inconclusive decision present)\n";
    }
    return os.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << content;
    if (!out) throw ConfigError("failed writing output file: " + path);
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "fn_a") cfg.exp.fn_a = parse_function(value.get<std::string>());
        else if (key == "fn_b") cfg.exp.fn_b = parse_function(value.get<std::string>());
        else if (key == "noise_p") cfg.exp.noise_p = value.get<double>();
        else if (key == "efficiency") cfg.exp.detector_efficiency = value.get<double>();
        else if (key == "shots") cfg.exp.shots_per_basis = value.get<std::uint64_t>();
        else if (key == "seed") cfg.exp.seed = value.get<std::uint64_t>();
        else if (key == "confidence_k") cfg.confidence_k = value.get<double>();
        else if (key == "out_records") cfg.out_records = value.get<std::string>();
        else if (key == "out_report") cfg.out_report = value.get<std::string>();
        else if (key == "format") cfg.format = value.get<std::string>();
        else if (key == "exact_only") cfg.exact_only = value.get<bool>();
        else throw ConfigError("unknown config key: " + key);
    }
}

int run_command(const RunConfig& cfg) {
    cfg.exp.validate();
    if (cfg.format != "json" && cfg.format != "text")
        throw ConfigError("format must be json or text");

    const ExactArmAnalysis exact_a = analyze_exact(cfg.exp, Arm::A);
    const ExactArmAnalysis exact_b = analyze_exact(cfg.exp, Arm::B);

    BellReport report;
    if (cfg.exact_only) {
        report = classify(BellEstimate::make(Arm::A, exact_a.bell_mean, 0.0, 0, 0),
                          BellEstimate::make(Arm::B, exact_b.bell_mean, 0.0, 0, 0),
                          cfg.confidence_k);
    } else {
        const std::vector<MeasurementRecord> records = sample_records(cfg.exp);
        write_output(cfg.out_records, records_to_csv(records));
        report = classify(estimate(records, Arm::A), estimate(records, Arm::B),
                          cfg.confidence_k);
    }

    const std::string doc = cfg.format == "json"
                                ? report_json_document(cfg, report, exact_a, exact_b)
                                : report_text_document(cfg, report, exact_a, exact_b);
    write_output(cfg.out_report, doc);
    return report.conclusive() ? 0 : 2;
}

// --- selftest ------------------------------------------------------------

struct SelfTest {
    int failed = 0;

    void check(const std::string& name, bool ok) {
        std::printf("[%s] %s\n", ok ? " ok " : "FAIL", name.c_str());
        if (!ok) ++failed;
    }
};

int selftest_command() {
    SelfTest t;
    const double s2 = std::numbers::sqrt2;

    {
        const StateVector h = StateVector::basis_state(2, 0);
        const StateVector v = StateVector::basis_state(2, 1);
        const StateVector oh = apply(hwp(22.5).unitary, h);
        t.check("hwp(22.5) maps H to (H+V)/sqrt(2)",
                std::abs(oh.amplitude(0) - cplx{1 / s2, 0}) < 1e-12 &&
                    std::abs(oh.amplitude(1) - cplx{1 / s2, 0}) < 1e-12);
        const StateVector ov = apply(hwp(22.5).unitary, v);
        t.check("hwp(22.5) maps V to (H-V)/sqrt(2), interference sign",
                std::abs(ov.amplitude(0) - cplx{1 / s2, 0}) < 1e-12 &&
                    std::abs(ov.amplitude(1) + cplx{1 / s2, 0}) < 1e-12);
        const StateVector sw = apply(hwp(45.0).unitary, h);
        t.check("hwp(45) swaps H and V", std::abs(sw.amplitude(1) - cplx{1, 0}) < 1e-12);
        const StateVector split =
            apply(pbs().unitary, StateVector::from_amplitudes({1 / s2, 0.0, 1 / s2, 0.0}));
        t.check("pbs transmits H and reflects V",
                std::abs(split.amplitude(0) - cplx{1 / s2, 0}) < 1e-12 &&
                    std::abs(split.amplitude(3) - cplx{1 / s2, 0}) < 1e-12);
    }

    {
        const StateVector input = StateVector::basis_state(4, 0);
        const StateVector bal = apply_elements(build_arm(FunctionType::Balanced, Arm::A), input);
        const double sz_bal =
            expectation(kron(pauli_z(), ComplexMatrix::identity(2)), projector(bal));
        t.check("balanced arm leaves only V at the signal detector (sz = -1)",
                std::abs(sz_bal + 1.0) < 1e-12);
        const StateVector con = apply_elements(build_arm(FunctionType::Constant, Arm::A), input);
        const double sz_con =
            expectation(kron(pauli_z(), ComplexMatrix::identity(2)), projector(con));
        t.check("constant arm leaves only H at the signal detector (sz = +1)",
                std::abs(sz_con - 1.0) < 1e-12);
    }

    {
        ExperimentConfig cfg;
        cfg.shots_per_basis = 1;
        bool z_ok = true, bell_ok = true;
        for (FunctionType fa : {FunctionType::Balanced, FunctionType::Constant})
            for (FunctionType fb : {FunctionType::Balanced, FunctionType::Constant}) {
                cfg.fn_a = fa;
                cfg.fn_b = fb;
                for (Arm arm : {Arm::A, Arm::B}) {
                    const DensityOperator rho = joint_output_state(cfg, arm);
                    const double zz = pair_correlator(rho, MeasurementBasis::Z);
                    const double want =
                        cfg.function_for(arm) == FunctionType::Balanced ? 1.0 : -1.0;
                    z_ok = z_ok && std::abs(zz - want) < 1e-12;
                    const double bm = expectation(bell_operator(arm), rho);
                    bell_ok = bell_ok && std::abs(bm - want * s2) < 1e-12;
                }
            }
        t.check("z products are +1 (balanced) / -1 (constant) on both arms", z_ok);
        t.check("ideal Bell means are +/- sqrt(2) for all four cases", bell_ok);
    }

    {
        SplitMix64 rng(321);
        const ComplexMatrix b = bell_operator(Arm::A);
        bool tsirelson = true, sandwich = true;
        for (int i = 0; i < 100; ++i) {
            const DensityOperator rho = random_density_operator(rng, 4);
            const double m = expectation(b, rho);
            tsirelson = tsirelson && std::abs(m) <= s2 + 1e-10;
            const double fb = fidelity(rho, bell_phi_plus());
            const double fc = fidelity(rho, bell_psi_minus());
            sandwich = sandwich && m / s2 <= fb + 1e-10 && fb <= (m / s2 + 1) / 2 + 1e-10 &&
                       -m / s2 <= fc + 1e-10 && fc <= (-m / s2 + 1) / 2 + 1e-10;
        }
        t.check("Tsirelson bound holds on 100 random states", tsirelson);
        t.check("fidelity sandwich holds on 100 random states", sandwich);
    }

    std::printf("%s\n", t.failed == 0 ? "selftest passed" : "selftest FAILED");
    return t.failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-photon Deutsch experiment simulator"};

    std::string fn_a = "balanced", fn_b = "constant";
    double noise_p = 1.0, efficiency = 1.0, confidence_k = 3.0;
    std::uint64_t shots = 10000, seed = 0;
    std::string out_records = "records.csv", out_report = "-", format = "json", config_path;
    bool exact_only = false;

    app.add_option("--fn-a", fn_a, "hidden function of arm A: balanced|constant")
        ->check(CLI::IsMember({"balanced", "constant"}));
    app.add_option("--fn-b", fn_b, "hidden function of arm B: balanced|constant")
        ->check(CLI::IsMember({"balanced", "constant"}));
    app.add_option("--noise-p", noise_p, "Werner parameter in [0,1], 1 = ideal source")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--efficiency", efficiency, "per-detector efficiency in (0,1]");
    app.add_option("--shots", shots, "shots per (arm, basis)");
    app.add_option("--seed", seed, "master RNG seed");
    app.add_option("--confidence-k", confidence_k, "sigma margin for decisions (0 = point rule)");
    app.add_option("--out-records", out_records, "CSV output path for measurement records");
    app.add_option("--out-report", out_report, "report output path, - for stdout");
    app.add_option("--format", format, "report format: json|text")
        ->check(CLI::IsMember({"json", "text"}));
    app.add_flag("--exact-only", exact_only, "skip sampling, report exact analysis only");
    app.add_option("--config", config_path, "JSON config file (flags override it)");

    CLI::App* selftest = app.add_subcommand("selftest", "run the built-in consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (selftest->parsed()) return selftest_command();

    try {
        RunConfig cfg;
        // Precedence: flag > config file > EPRSIM_SEED env > default.
        if (const char* env_seed = std::getenv("EPRSIM_SEED")) {
            char* end = nullptr;
            cfg.exp.seed = std::strtoull(env_seed, &end, 10);
            if (end == env_seed || *end != '\0')
                throw ConfigError("EPRSIM_SEED is not a valid unsigned integer");
        }
        if (!config_path.empty()) load_config_file(config_path, cfg);
        if (app.count("--fn-a")) cfg.exp.fn_a = parse_function(fn_a);
        if (app.count("--fn-b")) cfg.exp.fn_b = parse_function(fn_b);
        if (app.count("--noise-p")) cfg.exp.noise_p = noise_p;
        if (app.count("--efficiency")) cfg.exp.detector_efficiency = efficiency;
        if (app.count("--shots")) cfg.exp.shots_per_basis = shots;
        if (app.count("--seed")) cfg.exp.seed = seed;
        if (app.count("--confidence-k")) cfg.confidence_k = confidence_k;
        if (app.count("--out-records")) cfg.out_records = out_records;
        if (app.count("--out-report")) cfg.out_report = out_report;
        if (app.count("--format")) cfg.format = format;
        if (app.count("--exact-only")) cfg.exact_only = exact_only;
        return run_command(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
