#pragma once

// Command implementations behind tools/spectral_trickle. Each returns the
// process exit code: 0 success, 1 input error, 2 bound violation.

#include "common.hpp"
#include "complex.hpp"
#include "glauber.hpp"
#include "influence.hpp"
#include "trickle.hpp"
#include "walks.hpp"

#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace spectral_trickle::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct OutputOptions {
    std::string out_dir = ".";
    std::string name;  // defaults to the input file stem
    Tolerances tol;
};

struct AnalyzeOptions : OutputOptions {
    std::uint64_t seed = 0;
    std::size_t glauber_gate = 2000;
};

struct CertifyOptions : OutputOptions {
    std::string walk = "auto";  // auto | path | file
    std::string walk_file;      // for walk=file; defaults to the input's "walk" section
    std::string order;          // for walk=path: comma-separated site names
    int codim = 0;              // 0 = all codimensions >= 2
};

struct SampleOptions {
    std::size_t steps = 10000;
    std::uint64_t seed = 0;
    int chains = 1;
    int start = 0;
    int batches = 20;
    std::string output;  // empty = stdout
};

struct GenOptions {
    std::string kind;  // random | quarantine | path
    int d = 3;
    int spins = 2;
    double density = 1.0;
    int q = 3;
    std::string edges;  // "0-1,1-2"; quarantine default is a path on d sites
    double beta = 1.0;
    std::uint64_t seed = 0;
    std::string output;
};

inline json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::invalid_input, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::invalid_input, "'" + path + "' is not valid JSON: " + e.what());
    }
}

inline std::string fmt17(double x)
{
    if (std::isnan(x)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline json matrix_json(const Matrix& M)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json tolerances_json(const Tolerances& t)
{
    return {{"weight_sum", t.weight_sum}, {"stochastic", t.stochastic},       {"algebraic", t.algebraic},
            {"eigen", t.eigen},           {"positivity_rel", t.positivity_rel}, {"support", t.support},
            {"roundoff_zero", t.roundoff_zero}};
}

inline json digest_json(const SpinSystem& sys, const Connectivity& conn)
{
    json spins = json::array();
    for (int v = 0; v < sys.num_sites(); ++v) spins.push_back(sys.num_spins(v));
    json j = {{"d", sys.num_sites()},
              {"sites", sys.site_names()},
              {"spin_sizes", spins},
              {"facets", sys.num_facets()},
              {"connected", conn.connected},
              {"pruned_zero_weight_facets", sys.pruning().zero_weight_facets},
              {"pruned_spins", sys.pruning().pruned_spins}};
    if (!conn.connected) j["disconnected_witness"] = sys.face_label(*conn.witness);
    return j;
}

inline std::string certificates_csv(const SpinSystem& sys, const std::vector<Certificate>& certs)
{
    std::ostringstream os;
    os << "face,codim,bound_M,bound_distinct,bound_main,actual,hypothesis_ok,pass\n";
    for (const auto& c : certs) {
        os << '"' << sys.face_label(c.face) << "\"," << c.codim << ',' << fmt17(c.bound_M) << ',' << fmt17(c.bound_distinct) << ','
           << fmt17(c.bound_main) << ',' << fmt17(c.actual) << ',' << (c.hypothesis_ok ? "true" : "false") << ','
           << to_string(c.verdict) << '\n';
    }
    return os.str();
}

inline void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::invalid_input, "cannot write '" + path.string() + "'");
    out << content;
}

inline std::string output_name(const std::string& input, const OutputOptions& o)
{
    return o.name.empty() ? fs::path(input).stem().string() : o.name;
}

inline void print_certificate_table(std::ostream& out, const SpinSystem& sys, const std::vector<Certificate>& certs)
{
    char line[256];
    std::snprintf(line, sizeof line, "%-32s %5s %12s %12s %12s %12s %5s %s\n", "face", "codim", "bound_M", "bound_dist",
                  "bound_main", "actual", "hyp", "verdict");
    out << line;
    for (const auto& c : certs) {
        std::snprintf(line, sizeof line, "%-32s %5d %12.6g %12.6g %12.6g %12.6g %5s %s\n", sys.face_label(c.face).c_str(), c.codim,
                      c.bound_M, c.bound_distinct, c.bound_main, c.actual, c.hypothesis_ok ? "yes" : "no", to_string(c.verdict));
        out << line;
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

inline int cmd_analyze(const std::string& input, const AnalyzeOptions& opt, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr)
{
    try {
        const SpinSystem sys = load_system(read_json(input));
        const Connectivity conn = is_connected(sys);
        json report;
        report["tool"] = {{"name", "spectral_trickle"}, {"version", kVersion}};
        report["input"] = fs::path(input).filename().string();
        report["tolerances"] = tolerances_json(opt.tol);
        report["system"] = digest_json(sys, conn);

        const InfluenceBundle inf = influence_bundle(sys);
        const IvsCIReport ivc = verify_I_vs_cI(inf.I, inf.cI, opt.tol.eigen);
        const PsiMatrix psi = psi_matrix(sys);
        report["influence"] = {{"I", matrix_json(inf.I)},
                               {"cI", matrix_json(inf.cI)},
                               {"rho_I", inf.rho_I},
                               {"lambda_max_cI", inf.lambda_max_cI},
                               {"rho_cI", ivc.rho_cI},
                               {"lambda_max_cI_le_half", inf.lambda_max_cI <= 0.5},
                               {"max_influence", inf.I.maxCoeff()},
                               {"eta_root", psi.eta},
                               {"I_vs_cI", {{"lambda_equals_rho", ivc.lambda_equals_rho},
                                            {"rho_cI_le_rho_I", ivc.rho_le_rho_I},
                                            {"cI_le_Ibar", ivc.cI_le_Ibar}}},
                               {"zero_probability_conditionings", "skipped"}};

        bool violation = conn.connected && !ivc.holds();
        std::vector<Certificate> certs;
        json main = json::object();
        const double eps = 1.0 - inf.lambda_max_cI;
        if (!conn.connected) {
            main["status"] = "not_applicable: system is not connected";
        } else if (!(eps > 0.0) || inf.lambda_max_cI >= 1.0 - 1e-12) {
            main["status"] = "not_applicable: lambda_max(cI) >= 1";
        } else {
            const MainTheoremReport mr = main_theorem_report(sys, inf.cI, opt.tol);
            certs = mr.certificates;
            main = {{"status", "checked"},
                    {"epsilon", mr.epsilon},
                    {"hypothesis_ok", mr.hypothesis.ok},
                    {"stated_bound_ok", mr.stated_bound_ok},
                    {"walk_length_bound_ok", mr.walk_bound_ok},
                    {"worst_stated_slack", mr.worst_stated_slack},
                    {"eta", mr.eta},
                    {"eta_ok", mr.eta_ok},
                    {"certificate_failures", mr.certificate_failures},
                    {"not_applicable_links", mr.not_applicable},
                    {"certificates", certs.size()}};
            violation = violation || !mr.stated_bound_ok || !mr.eta_ok;
            for (const auto& c : certs) violation = violation || c.violation();
        }
        report["main_theorem"] = main;

        json glauber;
        if (sys.num_facets() <= opt.glauber_gate) {
            const GlauberChain chain = transition_matrix(sys, opt.glauber_gate);
            const double gap = spectral_gap(chain);
            glauber = {{"states", chain.size()}, {"spectral_gap", gap}, {"lambda2", 1.0 - gap}};
        } else {
            glauber = {{"states", sys.num_facets()}, {"spectral_gap", nullptr}, {"note", "state count above exact-matrix gate"}};
        }
        report["glauber"] = glauber;
        report["exit_code"] = violation ? 2 : 0;

        const std::string name = output_name(input, opt);
        write_file(fs::path(opt.out_dir) / (name + ".report.json"), report.dump(2) + "\n");
        write_file(fs::path(opt.out_dir) / (name + ".certificates.csv"), certificates_csv(sys, certs));

        out << "system: d=" << sys.num_sites() << " facets=" << sys.num_facets() << " connected=" << (conn.connected ? "yes" : "no")
            << "\n";
        out << "rho(I)=" << fmt17(inf.rho_I) << " lambda_max(cI)=" << fmt17(inf.lambda_max_cI) << " eta_root=" << fmt17(psi.eta) << "\n";
        if (!certs.empty()) print_certificate_table(out, sys, certs);
        out << (violation ? "RESULT: bound violation\n" : "RESULT: ok\n");
        return violation ? 2 : 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

inline std::vector<int> parse_order(const SpinSystem& sys, const std::string& order)
{
    std::vector<int> out;
    if (order.empty()) {
        for (int v = 0; v < sys.num_sites(); ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(order);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(sys.site_index(item));
    return out;
}

inline int cmd_certify(const std::string& input, const CertifyOptions& opt, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr)
{
    try {
        const json doc = read_json(input);
        const SpinSystem sys = load_system(doc);
        std::optional<double> epsilon;
        WalkGraph walk;
        if (opt.walk == "auto") {
            const Matrix cI = spectral_influence_matrix(sys);
            const TheoremWalk tw = construct_walk_from_cI(sys, cI, opt.tol);
            walk = tw.graph;
            epsilon = 1.0 - tw.lambda_max;
        } else if (opt.walk == "path") {
            walk = path_walk(sys.site_names(), parse_order(sys, opt.order));
        } else if (opt.walk == "file") {
            json jw;
            if (!opt.walk_file.empty()) {
                const json wdoc = read_json(opt.walk_file);
                jw = wdoc.contains("walk") ? wdoc.at("walk") : wdoc;
            } else if (doc.contains("walk")) {
                jw = doc.at("walk");
            } else {
                throw Error(ErrorKind::invalid_input, "--walk file needs a walk section or --walk-file");
            }
            walk = walk_from_json(jw, sys);
            const Absorbing ab = validate_absorbing(walk);
            if (!ab.ok) throw Error(ErrorKind::not_absorbing, "walk graph is not absorbing from '" + walk.name(ab.unreachable.front()) + "'");
        } else {
            throw Error(ErrorKind::invalid_input, "unknown walk kind '" + opt.walk + "'");
        }
        const Codim2Hypothesis hyp = check_codim2_hypothesis(sys, walk, opt.tol.eigen);
        const Certifier cert(sys, walk, hyp.ok, opt.tol);
        const int lo = opt.codim > 0 ? opt.codim : 2;
        const int hi = opt.codim > 0 ? opt.codim : sys.num_sites();
        if (opt.codim == 1 || opt.codim > sys.num_sites()) throw Error(ErrorKind::out_of_range, "--codim must lie in [2, d]");
        const auto certs = cert.certify_all(epsilon, lo, hi);

        const std::string name = output_name(input, opt);
        write_file(fs::path(opt.out_dir) / (name + ".certificates.csv"), certificates_csv(sys, certs));
        if (!hyp.ok) {
            out << "hypothesis failed on " << hyp.violations.size() << " codim-2 link(s), e.g. " << sys.face_label(hyp.violations.front())
                << "; bounds are reported but not claimed\n";
        }
        print_certificate_table(out, sys, certs);
        bool violation = false;
        for (const auto& c : certs) violation = violation || c.violation();
        out << (violation ? "RESULT: bound violation\n" : "RESULT: ok\n");
        return violation ? 2 : 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

inline int cmd_sample(const std::string& input, const SampleOptions& opt, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr)
{
    try {
        const SpinSystem sys = load_system(read_json(input));
        if (opt.chains < 1) throw Error(ErrorKind::invalid_input, "--chains must be positive");
        json report;
        report["tool"] = {{"name", "spectral_trickle"}, {"version", kVersion}};
        report["steps"] = opt.steps;
        report["seed"] = opt.seed;
        report["chains"] = json::array();
        for (int c = 0; c < opt.chains; ++c) {
            const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(c);
            const int batches = opt.steps >= static_cast<std::size_t>(2 * opt.batches) ? opt.batches : 0;
            const ChainRun run = run_chain(sys, opt.start, opt.steps, seed, batches);
            json jc = {{"seed", seed},
                       {"start", sys.face_label(Face::from(sys.facet(static_cast<std::size_t>(run.start))))},
                       {"final", sys.face_label(Face::from(sys.facet(static_cast<std::size_t>(run.final_state))))}};
            if (batches > 0) {
                json marg = json::array();
                for (const auto& m : marginal_estimates(sys, run))
                    marg.push_back({{"site", sys.site_name(m.vertex.site)},
                                    {"spin", sys.spin_name(m.vertex.site, m.vertex.spin)},
                                    {"exact", m.exact},
                                    {"estimate", m.estimate},
                                    {"standard_error", m.standard_error}});
                jc["marginals"] = std::move(marg);
            }
            report["chains"].push_back(std::move(jc));
        }
        if (opt.output.empty())
            out << report.dump(2) << "\n";
        else
            write_file(opt.output, report.dump(2) + "\n");
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

inline std::vector<std::pair<int, int>> parse_edges(const std::string& spec)
{
    std::vector<std::pair<int, int>> edges;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) throw Error(ErrorKind::invalid_input, "edge '" + item + "' is not of the form a-b");
        try {
            edges.emplace_back(std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1)));
        } catch (const std::exception&) {
            throw Error(ErrorKind::invalid_input, "edge '" + item + "' is not of the form a-b");
        }
    }
    return edges;
}

inline SpinSystem generate(const GenOptions& opt)
{
    if (opt.kind == "random") return random_system(opt.d, opt.spins, opt.density, opt.seed);
    if (opt.kind == "path") return path_system(opt.d, opt.spins, opt.beta, opt.seed);
    if (opt.kind == "quarantine") {
        std::vector<std::pair<int, int>> edges;
        if (opt.edges.empty())
            for (int i = 0; i + 1 < opt.d; ++i) edges.emplace_back(i, i + 1);
        else
            edges = parse_edges(opt.edges);
        return quarantine_system(opt.d, edges, opt.q);
    }
    throw Error(ErrorKind::invalid_input, "unknown generator '" + opt.kind + "'");
}

inline int cmd_gen(const GenOptions& opt, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    try {
        const SpinSystem sys = generate(opt);
        const std::string text = to_json(sys).dump(2) + "\n";
        if (opt.output.empty())
            out << text;
        else
            write_file(opt.output, text);
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace spectral_trickle::cli
