#include "spectral_trickle/cli.hpp"

#include "CLI11.hpp"

namespace st = spectral_trickle;

namespace {

void add_tolerances(CLI::App* cmd, st::Tolerances& tol)
{
    cmd->add_option("--tol-weight-sum", tol.weight_sum, "normalization tolerance")->capture_default_str();
    cmd->add_option("--tol-stochastic", tol.stochastic, "walk row-sum tolerance")->capture_default_str();
    cmd->add_option("--tol-algebraic", tol.algebraic, "tolerance for exact identities")->capture_default_str();
    cmd->add_option("--tol-eigen", tol.eigen, "tolerance for eigenvalue inequalities")->capture_default_str();
    cmd->add_option("--tol-positivity", tol.positivity_rel, "relative threshold for positive eigenvalues")->capture_default_str();
    cmd->add_option("--tol-support", tol.support, "cI entries below this are not edges")->capture_default_str();
}

void add_output(CLI::App* cmd, st::cli::OutputOptions& o)
{
    cmd->add_option("--out-dir", o.out_dir, "directory for report files")->capture_default_str();
    cmd->add_option("--name", o.name, "basename for report files (default: input stem)");
    add_tolerances(cmd, o.tol);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral influence, hitting probabilities and link eigenvalue certificates for spin systems"};
    app.set_version_flag("--version", std::string(st::kVersion));
    app.require_subcommand(1);

    std::string input;
    st::cli::AnalyzeOptions analyze;
    auto* a = app.add_subcommand("analyze", "influence matrices, I vs cI, main bound, Glauber gap");
    a->add_option("input", input, "system JSON")->required();
    a->add_option("--glauber-gate", analyze.glauber_gate, "largest state count for the exact Glauber matrix")->capture_default_str();
    add_output(a, analyze);

    st::cli::CertifyOptions certify;
    auto* c = app.add_subcommand("certify", "certificates for every link of codimension >= 2");
    c->add_option("input", input, "system JSON")->required();
    c->add_option("--walk", certify.walk, "auto | path | file")->check(CLI::IsMember({"auto", "path", "file"}))->capture_default_str();
    c->add_option("--walk-file", certify.walk_file, "walk document for --walk file");
    c->add_option("--order", certify.order, "comma-separated site order for --walk path");
    c->add_option("--codim", certify.codim, "only this codimension");
    add_output(c, certify);

    st::cli::SampleOptions sample;
    auto* s = app.add_subcommand("sample", "Glauber dynamics simulation");
    s->add_option("input", input, "system JSON")->required();
    s->add_option("--steps", sample.steps)->capture_default_str();
    s->add_option("--seed", sample.seed)->capture_default_str();
    s->add_option("--chains", sample.chains)->capture_default_str();
    s->add_option("--start", sample.start, "index of the start facet")->capture_default_str();
    s->add_option("--batches", sample.batches, "batches for standard errors")->capture_default_str();
    s->add_option("-o,--output", sample.output, "write the report here instead of stdout");

    st::cli::GenOptions gen;
    auto* g = app.add_subcommand("gen", "write a generated system");
    g->add_option("kind", gen.kind, "random | quarantine | path")->required()->check(CLI::IsMember({"random", "quarantine", "path"}));
    g->add_option("--d", gen.d)->capture_default_str();
    g->add_option("--spins", gen.spins)->capture_default_str();
    g->add_option("--density", gen.density)->capture_default_str();
    g->add_option("--q", gen.q)->capture_default_str();
    g->add_option("--edges", gen.edges, "quarantine graph as a-b,c-d (default: path)");
    g->add_option("--beta", gen.beta)->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("-o,--output", gen.output, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    if (*a) return st::cli::cmd_analyze(input, analyze);
    if (*c) return st::cli::cmd_certify(input, certify);
    if (*s) return st::cli::cmd_sample(input, sample);
    return st::cli::cmd_gen(gen);
}
