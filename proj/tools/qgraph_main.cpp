// qgraph: spectral computations on finite metric graphs and classification
// of finitely-described infinite ones. Subcommands emit plot-ready CSV or
// JSON; all numeric output carries 12 significant digits and repeated runs
// are byte-identical.

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qgraph/discrete.hpp"
#include "qgraph/emit.hpp"
#include "qgraph/ends.hpp"
#include "qgraph/graph.hpp"
#include "qgraph/json_io.hpp"
#include "qgraph/orbits.hpp"
#include "qgraph/spectrum.hpp"
#include "qgraph/trace.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;

void write_artifact(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qgraph::ParseError("cannot open output file: " + path);
    out << text;
}

qgraph::MetricGraph load_validated_graph(const std::string& path) {
    qgraph::MetricGraph g = qgraph::load_metric_graph(path);
    const qgraph::ValidationReport report = qgraph::validate(g);
    if (!report.valid) {
        std::string msg = "invalid graph " + path + ":";
        for (const auto& v : report.violations) msg += "\n  " + v;
        throw qgraph::ParseError(msg);
    }
    return g;
}

std::string num(double x) { return qgraph::emit::number(x); }

ordered_json trace_report_json(const qgraph::TraceReport& rep) {
    ordered_json j;
    j["lhs"] = rep.lhs;
    j["rhs"] = rep.rhs;
    j["diff"] = rep.diff;
    j["lhs_tail"] = rep.lhs_tail;
    j["rhs_tail"] = rep.rhs_tail;
    j["tol"] = rep.tol;
    j["pass"] = rep.pass;
    j["notes"] = rep.notes;
    return j;
}

ordered_json classification_json(const qgraph::ClassificationReport& rep) {
    ordered_json j;
    if (rep.ends.infinite)
        j["end_count"] = "infinite";
    else
        j["end_count"] = rep.ends.count;
    j["ends"] = ordered_json::array();
    for (const auto& g : rep.gadgets) {
        ordered_json jg;
        jg["type"] = g.type;
        jg["attach"] = g.attach;
        if (g.type == "tree") jg["branching"] = g.branching;
        if (g.volume.infinite)
            jg["end_volume"] = "infinite";
        else
            jg["end_volume"] = g.volume.value;
        j["ends"].push_back(std::move(jg));
    }
    j["markovian_unique"] = rep.markovian.unique;
    j["markovian_evidence"] = rep.markovian.evidence;
    ordered_json sa;
    switch (rep.self_adjoint.verdict) {
        case qgraph::SelfAdjointVerdict::Yes: sa["verdict"] = "yes"; break;
        case qgraph::SelfAdjointVerdict::No: sa["verdict"] = "no"; break;
        case qgraph::SelfAdjointVerdict::Inconclusive: sa["verdict"] = "inconclusive"; break;
    }
    if (!rep.self_adjoint.criterion.empty()) sa["criterion"] = rep.self_adjoint.criterion;
    sa["reason"] = rep.self_adjoint.reason;
    j["self_adjoint"] = std::move(sa);
    if (rep.volume.infinite)
        j["total_volume"] = "infinite";
    else
        j["total_volume"] = rep.volume.value;
    return j;
}

int run_spectrum(const std::string& graph_path, double kmax, double tol,
                 const std::string& format, const std::string& output) {
    const qgraph::MetricGraph g = load_validated_graph(graph_path);
    const qgraph::Spectrum sp = qgraph::eigenvalues(g, kmax, tol);
    const auto& consistency = sp.consistency;

    if (format == "csv") {
        std::string text = qgraph::emit::csv_row({"lambda", "sqrt_lambda", "multiplicity"});
        for (const auto& ev : sp.eigenvalues)
            text += qgraph::emit::csv_row({num(ev.lambda), num(std::sqrt(ev.lambda)),
                                           std::to_string(ev.multiplicity)});
        write_artifact(output, text);
    } else {
        ordered_json j;
        j["kmax"] = sp.kmax;
        j["grid_step"] = sp.grid_step;
        j["eigenvalues"] = ordered_json::array();
        for (const auto& ev : sp.eigenvalues) {
            ordered_json je;
            je["lambda"] = ev.lambda;
            je["sqrt_lambda"] = std::sqrt(ev.lambda);
            je["multiplicity"] = ev.multiplicity;
            j["eigenvalues"].push_back(std::move(je));
        }
        j["weyl_flagged"] = consistency.flagged;
        write_artifact(output, qgraph::emit::dump_json(j, 2) + "\n");
    }
    if (consistency.flagged) {
        for (const auto& note : consistency.notes) std::cerr << "warning: " << note << "\n";
        std::cerr << "warning: spectrum failed the Weyl consistency check; "
                     "roots may be missing at this grid resolution\n";
        return kExitCheckFailed;
    }
    return kExitPass;
}

int run_weyl(const std::string& graph_path, double kmax, double tol,
             const std::string& output) {
    const qgraph::MetricGraph g = load_validated_graph(graph_path);
    const qgraph::Spectrum sp = qgraph::eigenvalues(g, kmax, tol);
    const double slope = g.volume() / std::numbers::pi;

    std::string text = qgraph::emit::csv_row({"lambda", "N", "vol_over_pi_lambda"});
    double count = 0;
    for (const auto& ev : sp.eigenvalues) {
        count += ev.multiplicity;
        const double x = std::sqrt(ev.lambda);
        text += qgraph::emit::csv_row({num(x), num(count), num(slope * x)});
    }
    write_artifact(output, text);
    return kExitPass;
}

int run_orbits(const std::string& graph_path, double lmax, const std::string& output) {
    const qgraph::MetricGraph g = load_validated_graph(graph_path);
    const std::vector<qgraph::PeriodicOrbit> orbits = qgraph::enumerate_orbits(g, lmax);

    std::string text = qgraph::emit::csv_row(
        {"canonical_id", "length", "primitive_length", "repetition", "scattering"});
    for (const auto& p : orbits)
        text += qgraph::emit::csv_row({p.canonical_id(g), num(p.length), num(p.primitive_length),
                                       std::to_string(p.repetition), num(p.scattering)});
    write_artifact(output, text);
    return kExitPass;
}

int run_trace_check(const std::string& graph_path, double sigma, double center, double kmax,
                    double lmax, double tol, const std::string& output) {
    const qgraph::MetricGraph g = load_validated_graph(graph_path);
    const qgraph::GaussianTest f{sigma, center};
    const qgraph::TraceReport rep = qgraph::trace_check(g, f, kmax, lmax, tol);
    write_artifact(output, qgraph::emit::dump_json(trace_report_json(rep), 2) + "\n");
    return rep.pass ? kExitPass : kExitCheckFailed;
}

int run_poisson(int n, double sigma, double center, const std::string& output) {
    const qgraph::GaussianTest f{sigma, center};
    const qgraph::PoissonReport rep = qgraph::poisson_demo(n, f);
    ordered_json j;
    j["n"] = n;
    j["sum_fhat_2pik"] = rep.sum_fhat;
    j["sum_f_k"] = rep.sum_f;
    j["diff"] = rep.diff;
    j["direct_pass"] = rep.direct_pass;
    j["trace"] = trace_report_json(rep.trace);
    j["pass"] = rep.pass;
    write_artifact(output, qgraph::emit::dump_json(j, 2) + "\n");
    return rep.pass ? kExitPass : kExitCheckFailed;
}

int run_equilateral(const std::string& graph_path, double kmax, const std::string& output) {
    const qgraph::MetricGraph g = load_validated_graph(graph_path);
    const qgraph::EquilateralComparison rep = qgraph::equilateral_compare(g, kmax);

    ordered_json j;
    j["common_length"] = rep.common_length;
    j["discrete_spectrum"] = ordered_json::array();
    j["mapped"] = ordered_json::array();
    for (const auto& d : rep.discrete) {
        ordered_json jd;
        jd["mu"] = d.mu;
        jd["multiplicity"] = d.multiplicity;
        j["discrete_spectrum"].push_back(std::move(jd));

        const auto img = qgraph::equilateral_map(std::clamp(d.mu, 0.0, 2.0),
                                                 kmax * kmax * rep.common_length *
                                                     rep.common_length);
        ordered_json jm;
        jm["mu"] = d.mu;
        jm["lambdas"] = img.lambdas;
        jm["excluded_lambdas"] = img.excluded_lambdas;
        j["mapped"].push_back(std::move(jm));
    }
    j["solver"] = ordered_json::array();
    for (const auto& ev : rep.solver) {
        ordered_json je;
        je["lambda"] = ev.lambda;
        je["multiplicity"] = ev.multiplicity;
        j["solver"].push_back(std::move(je));
    }
    j["excluded_hits"] = rep.excluded_hits;
    j["mismatches"] = rep.mismatches;
    j["pass"] = rep.pass;
    write_artifact(output, qgraph::emit::dump_json(j, 2) + "\n");
    return rep.pass ? kExitPass : kExitCheckFailed;
}

int run_discrete_spectrum(const std::string& graph_path, const std::string& mode,
                          const std::string& output) {
    const qgraph::MetricGraph g = load_validated_graph(graph_path);
    const qgraph::DiscreteWeighting w = mode == "normalized"
                                            ? qgraph::DiscreteWeighting::Normalized
                                            : qgraph::DiscreteWeighting::MetricWeights;
    const auto spec = qgraph::discrete_spectrum(qgraph::DiscreteLaplacian(g, w));
    std::string text = qgraph::emit::csv_row({"mu", "multiplicity"});
    for (const auto& d : spec)
        text += qgraph::emit::csv_row({num(d.mu), std::to_string(d.multiplicity)});
    write_artifact(output, text);
    return kExitPass;
}

int run_classify(const std::string& graph_path, const std::string& output) {
    const qgraph::EndedGraphDescription d = qgraph::load_ended_graph(graph_path);
    qgraph::ClassificationReport rep;
    try {
        rep = qgraph::classify(d);
    } catch (const std::invalid_argument& ex) {
        throw qgraph::ParseError(ex.what());
    }
    write_artifact(output, qgraph::emit::dump_json(classification_json(rep), 2) + "\n");
    return kExitPass;
}

int run_recover_lengths(const std::string& graph_path, double kmax, double window,
                        double scan_max, const std::string& samples_path,
                        const std::string& output) {
    const qgraph::MetricGraph g = load_validated_graph(graph_path);
    const qgraph::Spectrum sp = qgraph::eigenvalues(g, kmax);
    const qgraph::SpectralMeasure mu = qgraph::make_spectral_measure(sp, g.betti());
    if (window <= 0.0) window = 5.5 / kmax; // narrowest width the spectrum supports
    const qgraph::LengthRecovery rec =
        qgraph::recover_orbit_lengths(mu, window, scan_max, kmax);

    std::string peaks = qgraph::emit::csv_row({"peak_position", "height"});
    for (const auto& p : rec.peaks)
        peaks += qgraph::emit::csv_row({num(p.position), num(p.height)});
    write_artifact(output, peaks);

    if (!samples_path.empty()) {
        std::string text = qgraph::emit::csv_row({"t", "F"});
        for (const auto& s : rec.samples)
            text += qgraph::emit::csv_row({num(s.t), num(s.value)});
        write_artifact(samples_path, text);
    }
    return kExitPass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kirchhoff Laplacian spectra, periodic-orbit trace formula, and "
                 "end classification on metric graphs"};
    app.require_subcommand(1);

    std::string graph_path, output, samples_path;
    std::string format = "csv";
    std::string mode = "normalized";
    double kmax = 40.0, lmax = 8.0, tol = 1e-6, sigma = 0.2, center = 0.0;
    double window = 0.0, scan_max = 6.0;
    int cycle_n = 3;

    auto add_graph = [&](CLI::App* cmd) {
        cmd->add_option("--graph", graph_path, "metric graph JSON file")
            ->required()
            ->check(CLI::ExistingFile);
    };
    auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("-o,--output", output, "output path (default: stdout)");
    };

    CLI::App* spectrum = app.add_subcommand("spectrum", "Kirchhoff eigenvalues up to kmax");
    add_graph(spectrum);
    spectrum->add_option("--kmax", kmax, "wavenumber bound")->required()
        ->check(CLI::PositiveNumber);
    spectrum->add_option("--tol", tol, "root acceptance tolerance, in (0, 1e-4]");
    spectrum->add_option("--out", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    add_output(spectrum);

    CLI::App* weyl = app.add_subcommand("weyl", "eigenvalue counting samples vs Weyl slope");
    add_graph(weyl);
    weyl->add_option("--kmax", kmax, "wavenumber bound")->required()
        ->check(CLI::PositiveNumber);
    weyl->add_option("--tol", tol, "root acceptance tolerance");
    add_output(weyl);

    CLI::App* orbits = app.add_subcommand("orbits", "periodic orbits up to length lmax");
    add_graph(orbits);
    orbits->add_option("--lmax", lmax, "orbit length bound")->required()
        ->check(CLI::PositiveNumber);
    add_output(orbits);

    CLI::App* trace = app.add_subcommand("trace-check", "verify the trace formula");
    add_graph(trace);
    trace->add_option("--sigma", sigma, "Gaussian width")->check(CLI::PositiveNumber);
    trace->add_option("--center", center, "Gaussian center");
    trace->add_option("--kmax", kmax, "spectral truncation");
    trace->add_option("--lmax", lmax, "orbit truncation");
    trace->add_option("--tol", tol, "comparison tolerance");
    add_output(trace);

    CLI::App* poisson = app.add_subcommand("poisson", "Poisson summation on the unit circle");
    poisson->add_option("--n", cycle_n, "cycle model size (n >= 3)");
    poisson->add_option("--sigma", sigma, "Gaussian width")->check(CLI::PositiveNumber);
    poisson->add_option("--center", center, "Gaussian center");
    add_output(poisson);

    CLI::App* equilateral =
        app.add_subcommand("equilateral", "equilateral correspondence check");
    add_graph(equilateral);
    equilateral->add_option("--kmax", kmax, "wavenumber bound")
        ->check(CLI::PositiveNumber);
    add_output(equilateral);

    CLI::App* discrete = app.add_subcommand("discrete-spectrum", "discrete Laplacian spectrum");
    add_graph(discrete);
    discrete->add_option("--mode", mode, "weighting")
        ->check(CLI::IsMember({"normalized", "metric-weighted"}));
    add_output(discrete);

    CLI::App* classify = app.add_subcommand("classify", "ends / Markovian uniqueness report");
    add_graph(classify);
    add_output(classify);

    CLI::App* recover = app.add_subcommand("recover-lengths",
                                           "orbit lengths from the spectrum (peak list)");
    add_graph(recover);
    recover->add_option("--kmax", kmax, "spectral truncation")->check(CLI::PositiveNumber);
    recover->add_option("--window", window, "Gaussian window width (default: 5.5/kmax)")
        ->check(CLI::PositiveNumber);
    recover->add_option("--scan-max", scan_max, "scan range [0, L]")
        ->check(CLI::PositiveNumber);
    recover->add_option("--samples", samples_path, "also write (t, F) samples to this file");
    add_output(recover);

    CLI11_PARSE(app, argc, argv);

    try {
        if (spectrum->parsed()) return run_spectrum(graph_path, kmax, tol, format, output);
        if (weyl->parsed()) return run_weyl(graph_path, kmax, tol, output);
        if (orbits->parsed()) return run_orbits(graph_path, lmax, output);
        if (trace->parsed())
            return run_trace_check(graph_path, sigma, center, kmax, lmax, tol, output);
        if (poisson->parsed()) return run_poisson(cycle_n, sigma, center, output);
        if (equilateral->parsed()) return run_equilateral(graph_path, kmax, output);
        if (discrete->parsed()) return run_discrete_spectrum(graph_path, mode, output);
        if (classify->parsed()) return run_classify(graph_path, output);
        if (recover->parsed())
            return run_recover_lengths(graph_path, kmax, window, scan_max, samples_path, output);
    } catch (const qgraph::ParseError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInputError;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInputError;
    } catch (const qgraph::OrbitBudgetExceeded& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& ex) {
        std::cerr << "internal error: " << ex.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitInputError;
}
