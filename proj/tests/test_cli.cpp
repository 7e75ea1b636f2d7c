#include "catch_amalgamated.hpp"

#include "spectral_trickle/cli.hpp"

#include <set>

using namespace spectral_trickle;
using namespace spectral_trickle::cli;
using Catch::Approx;

namespace {

const std::string kFixtures = FIXTURE_DIR;

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

fs::path scratch(const std::string& tag)
{
    const fs::path dir = fs::temp_directory_path() / ("spectral_trickle_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (char ch : line) {
            if (ch == '"') quoted = !quoted;
            else if (ch == ',' && !quoted) cells.push_back(std::exchange(cell, {}));
            else cell += ch;
        }
        cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

TEST_CASE("analyze")
{
    SECTION("product fixture")
    {
        const auto dir = scratch("product");
        AnalyzeOptions opt;
        opt.out_dir = dir.string();
        std::ostringstream out, err;
        CHECK(cmd_analyze(fixture("product.json"), opt, out, err) == 0);
        CHECK(err.str().empty());
        CHECK(out.str().find("RESULT: ok") != std::string::npos);

        const json report = json::parse(slurp(dir / "product.report.json"));
        CHECK(report["tool"]["version"] == kVersion);
        CHECK(report["system"]["d"] == 3);
        CHECK(report["system"]["facets"] == 8);
        CHECK(report["system"]["connected"] == true);
        CHECK(report.contains("tolerances"));
        for (const auto& row : report["influence"]["I"])
            for (const auto& x : row) CHECK(x.get<double>() == Approx(0.0).margin(1e-12));
        CHECK(report["influence"]["lambda_max_cI"].get<double>() == Approx(0.0).margin(1e-12));
        CHECK(report["main_theorem"]["status"] == "checked");
        CHECK(report["glauber"]["spectral_gap"].get<double>() == Approx(1.0 / 3.0));
        CHECK(report["exit_code"] == 0);

        const auto rows = csv_rows(slurp(dir / "product.certificates.csv"));
        REQUIRE(rows.size() > 1);
        CHECK(rows[0] == std::vector<std::string>{"face", "codim", "bound_M", "bound_distinct", "bound_main", "actual",
                                                  "hypothesis_ok", "pass"});
        for (std::size_t r = 1; r < rows.size(); ++r) {
            REQUIRE(rows[r].size() == 8);
            CHECK(rows[r][7] == "pass");
            CHECK(std::stod(rows[r][5]) == Approx(0.0).margin(1e-12));
        }
    }
    SECTION("byte-stable output")
    {
        const auto a = scratch("stable_a"), b = scratch("stable_b");
        AnalyzeOptions opt;
        opt.name = "run";
        std::ostringstream out, err;
        opt.out_dir = a.string();
        REQUIRE(cmd_analyze(fixture("path.json"), opt, out, err) != 1);
        opt.out_dir = b.string();
        REQUIRE(cmd_analyze(fixture("path.json"), opt, out, err) != 1);
        CHECK(slurp(a / "run.report.json") == slurp(b / "run.report.json"));
        CHECK(slurp(a / "run.certificates.csv") == slurp(b / "run.certificates.csv"));
    }
    SECTION("quarantine fixture: spectral condition holds where Dobrushin's fails")
    {
        const auto dir = scratch("quarantine");
        AnalyzeOptions opt;
        opt.out_dir = dir.string();
        std::ostringstream out, err;
        const int code = cmd_analyze(fixture("quarantine.json"), opt, out, err);
        CHECK(code != 1);
        const json report = json::parse(slurp(dir / "quarantine.report.json"));
        CHECK(report["influence"]["lambda_max_cI"].get<double>() <= 0.5);
        CHECK(report["influence"]["lambda_max_cI_le_half"] == true);
        CHECK(report["influence"]["rho_I"].get<double>() > 1.0);
        CHECK(report["influence"]["max_influence"].get<double>() == Approx(7.0 / 8.0));
    }
    SECTION("corrupted input")
    {
        const auto dir = scratch("corrupt");
        AnalyzeOptions opt;
        opt.out_dir = dir.string();
        std::ostringstream out, err;
        CHECK(cmd_analyze(fixture("corrupted.json"), opt, out, err) == 1);
        CHECK(err.str().find("error:") == 0);
        CHECK(cmd_analyze(fixture("does_not_exist.json"), opt, out, err) == 1);
        CHECK_FALSE(fs::exists(dir / "corrupted.report.json"));

        const fs::path bad_spin = dir / "bad_spin.json";
        json doc = read_json(fixture("product.json"));
        doc["facets"][0]["assignment"]["a"] = "sideways";
        write_file(bad_spin, doc.dump());
        std::ostringstream err2;
        CHECK(cmd_analyze(bad_spin.string(), opt, out, err2) == 1);
        CHECK(err2.str().find("sideways") != std::string::npos);
    }
    SECTION("disconnected input reports instead of failing")
    {
        const auto dir = scratch("disconnected");
        const auto frozen = SpinSystem::create({"u", "v", "w"}, std::vector<std::vector<std::string>>(3, {"a", "b"}),
                                               {{0, 0, 0}, {1, 1, 1}}, {1, 1});
        write_file(dir / "frozen.json", to_json(frozen).dump());
        AnalyzeOptions opt;
        opt.out_dir = dir.string();
        std::ostringstream out, err;
        CHECK(cmd_analyze((dir / "frozen.json").string(), opt, out, err) == 0);
        const json report = json::parse(slurp(dir / "frozen.report.json"));
        CHECK(report["system"]["connected"] == false);
        CHECK(report["system"].contains("disconnected_witness"));
        CHECK(report["main_theorem"]["status"].get<std::string>().rfind("not_applicable", 0) == 0);
    }
}

TEST_CASE("certify")
{
    SECTION("path walk on the path fixture")
    {
        const auto dir = scratch("certify_path");
        CertifyOptions opt;
        opt.out_dir = dir.string();
        opt.walk = "path";
        std::ostringstream out, err;
        CHECK(cmd_certify(fixture("path.json"), opt, out, err) == 0);
        const auto rows = csv_rows(slurp(dir / "path.certificates.csv"));
        REQUIRE(rows.size() > 1);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            CHECK(rows[r][7] == "pass");
            CHECK(std::stod(rows[r][2]) <= 0.5 + 1e-12);
            // The distinct-vertex bound is looser on paths and is not asserted.
            CHECK(std::stod(rows[r][5]) <= 0.5 + 1e-9);
        }
        // Every codim >= 2 face of a 4-site system with two spins.
        std::size_t expected = 0;
        for (int k = 0; k <= 2; ++k) {
            const std::size_t choose[] = {1, 4, 6};
            expected += choose[k] * (std::size_t{1} << k);
        }
        CHECK(rows.size() - 1 == expected);

        CertifyOptions filtered = opt;
        filtered.codim = 2;
        filtered.name = "codim2";
        CHECK(cmd_certify(fixture("path.json"), filtered, out, err) == 0);
        const auto rows2 = csv_rows(slurp(dir / "codim2.certificates.csv"));
        CHECK(rows2.size() - 1 == 6 * 4);
        for (std::size_t r = 1; r < rows2.size(); ++r) CHECK(rows2[r][1] == "2");
    }
    SECTION("explicit order")
    {
        CertifyOptions opt;
        opt.out_dir = scratch("certify_order").string();
        opt.walk = "path";
        opt.order = "v0,v1,v2,v3";
        std::ostringstream out, err;
        CHECK(cmd_certify(fixture("path.json"), opt, out, err) == 0);
        opt.order = "v0,nope,v2,v3";
        CHECK(cmd_certify(fixture("path.json"), opt, out, err) == 1);
    }
    SECTION("auto walk on a connected random system")
    {
        const auto dir = scratch("certify_auto");
        // Weak coupling keeps lambda_max(cI) below one.
        write_file(dir / "weak.json", to_json(path_system(4, 3, 0.3, 9)).dump());
        CertifyOptions opt;
        opt.out_dir = dir.string();
        std::ostringstream out, err;
        CHECK(cmd_certify((dir / "weak.json").string(), opt, out, err) == 0);
        const auto rows = csv_rows(slurp(dir / "weak.certificates.csv"));
        REQUIRE(rows.size() > 1);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            CHECK(rows[r][6] == "true");
            CHECK(rows[r][7] != "fail");
        }
    }
    SECTION("walk files")
    {
        const auto dir = scratch("certify_file");
        CertifyOptions opt;
        opt.out_dir = dir.string();
        opt.walk = "file";
        std::ostringstream out, err;
        CHECK(cmd_certify(fixture("product_walk.json"), opt, out, err) == 0);

        std::ostringstream err2;
        CHECK(cmd_certify(fixture("bad_walk.json"), opt, out, err2) == 1);
        CHECK(err2.str().find("error:") == 0);

        std::ostringstream err3;
        CHECK(cmd_certify(fixture("product.json"), opt, out, err3) == 1);

        // A walk that can never leave {a, b}.
        json trapped = read_json(fixture("product_walk.json"));
        trapped["walk"]["edges"] = json::array({{{"from", "a"}, {"to", "b"}, {"p", 1.0}},
                                                {{"from", "b"}, {"to", "a"}, {"p", 1.0}},
                                                {{"from", "c"}, {"to", "out"}, {"p", 1.0}}});
        write_file(dir / "trapped.json", trapped.dump());
        std::ostringstream err4;
        CHECK(cmd_certify((dir / "trapped.json").string(), opt, out, err4) == 1);
        CHECK(err4.str().find("absorbing") != std::string::npos);

        // A separate walk file overrides the input's own section.
        write_file(dir / "walk_only.json", read_json(fixture("product_walk.json"))["walk"].dump());
        opt.walk_file = (dir / "walk_only.json").string();
        CHECK(cmd_certify(fixture("product.json"), opt, out, err) == 0);
    }
    SECTION("argument validation")
    {
        CertifyOptions opt;
        opt.out_dir = scratch("certify_args").string();
        std::ostringstream out, err;
        opt.walk = "spiral";
        CHECK(cmd_certify(fixture("product.json"), opt, out, err) == 1);
        opt.walk = "path";
        opt.codim = 1;
        CHECK(cmd_certify(fixture("product.json"), opt, out, err) == 1);
        opt.codim = 9;
        CHECK(cmd_certify(fixture("product.json"), opt, out, err) == 1);
    }
}

TEST_CASE("sample")
{
    SECTION("zero steps echo the start state")
    {
        SampleOptions opt;
        opt.steps = 0;
        opt.start = 3;
        std::ostringstream out, err;
        REQUIRE(cmd_sample(fixture("product.json"), opt, out, err) == 0);
        const json report = json::parse(out.str());
        const auto sys = load_system(read_json(fixture("product.json")));
        const std::string label = sys.face_label(Face::from(sys.facet(3)));
        CHECK(report["chains"][0]["start"] == label);
        CHECK(report["chains"][0]["final"] == label);
        CHECK_FALSE(report["chains"][0].contains("marginals"));
    }
    SECTION("product fixture marginals")
    {
        SampleOptions opt;
        opt.steps = 60000;
        opt.seed = 11;
        opt.batches = 30;
        std::ostringstream out, err;
        REQUIRE(cmd_sample(fixture("product.json"), opt, out, err) == 0);
        const json report = json::parse(out.str());
        int outside = 0, total = 0;
        for (const auto& m : report["chains"][0]["marginals"]) {
            CHECK(m["exact"].get<double>() == Approx(0.5));
            ++total;
            if (std::abs(m["estimate"].get<double>() - 0.5) > 3.0 * m["standard_error"].get<double>()) ++outside;
        }
        CHECK(total == 6);
        CHECK(outside <= 1);
    }
    SECTION("chains are deterministic and distinct")
    {
        SampleOptions opt;
        opt.steps = 200;
        opt.chains = 8;
        opt.seed = 100;
        opt.batches = 0;
        const auto dir = scratch("sample");
        opt.output = (dir / "a.json").string();
        std::ostringstream out, err;
        REQUIRE(cmd_sample(fixture("path.json"), opt, out, err) == 0);
        opt.output = (dir / "b.json").string();
        REQUIRE(cmd_sample(fixture("path.json"), opt, out, err) == 0);
        CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
        const json report = json::parse(slurp(dir / "a.json"));
        REQUIRE(report["chains"].size() == 8);
        std::set<std::uint64_t> seeds;
        for (const auto& c : report["chains"]) seeds.insert(c["seed"].get<std::uint64_t>());
        CHECK(seeds.size() == 8);

        // Trajectories differ: compare end states across many more chains.
        const auto sys = load_system(read_json(fixture("path.json")));
        std::set<int> finals;
        for (std::uint64_t s = 100; s < 108; ++s) finals.insert(run_chain(sys, 0, 200, s).final_state);
        CHECK(finals.size() > 1);
    }
    SECTION("bad arguments")
    {
        SampleOptions opt;
        std::ostringstream out, err;
        opt.chains = 0;
        CHECK(cmd_sample(fixture("product.json"), opt, out, err) == 1);
        opt.chains = 1;
        opt.start = 99;
        CHECK(cmd_sample(fixture("product.json"), opt, out, err) == 1);
    }
}

TEST_CASE("gen")
{
    const auto dir = scratch("gen");
    auto roundtrip = [&](const GenOptions& opt) {
        GenOptions o = opt;
        o.output = (dir / (o.kind + ".json")).string();
        std::ostringstream out, err;
        REQUIRE(cmd_gen(o, out, err) == 0);
        const SpinSystem loaded = load_system(read_json(o.output));
        CHECK(identical(loaded, generate(opt)));
        // Saving the loaded copy reproduces the file byte for byte.
        CHECK(to_json(loaded).dump(2) + "\n" == slurp(o.output));
        return loaded;
    };
    SECTION("random")
    {
        GenOptions opt;
        opt.kind = "random";
        opt.d = 3;
        opt.spins = 3;
        opt.seed = 1;
        opt.density = 0.6;
        const auto sys = roundtrip(opt);
        CHECK(sys.num_sites() == 3);
        CHECK(is_connected(sys).connected);
    }
    SECTION("quarantine on a 4-cycle")
    {
        GenOptions opt;
        opt.kind = "quarantine";
        opt.d = 4;
        opt.q = 5;
        opt.edges = "0-1,1-2,2-3,3-0";
        const auto sys = roundtrip(opt);
        const std::vector<std::pair<int, int>> cycle{{0, 1}, {1, 2}, {2, 3}, {3, 0}};
        // Predicate filter over all 5^4 assignments.
        std::size_t valid = 0;
        for (int code = 0; code < 625; ++code) {
            int c[4];
            for (int v = 0, x = code; v < 4; ++v, x /= 5) c[v] = x % 5;
            bool ok = true;
            for (auto [a, b] : cycle)
                if ((c[a] == 0 && c[b] != 1) || (c[b] == 0 && c[a] != 1)) ok = false;
            valid += ok;
        }
        CHECK(sys.num_facets() == valid);
        for (std::size_t i = 0; i < sys.num_facets(); ++i) {
            const auto f = sys.facet(i);
            for (auto [a, b] : cycle) {
                if (sys.spin_name(a, f[static_cast<std::size_t>(a)]) == "sick")
                    CHECK(sys.spin_name(b, f[static_cast<std::size_t>(b)]) == "quarantine");
            }
        }
    }
    SECTION("path")
    {
        GenOptions opt;
        opt.kind = "path";
        opt.d = 4;
        opt.beta = 0.5;
        const auto sys = roundtrip(opt);
        const auto report = path_complex_certify(sys, {0, 1, 2, 3});
        CHECK(report.top_link_ok);
        CHECK(report.row_sums_ok);
    }
    SECTION("parameter validation")
    {
        std::ostringstream out, err;
        GenOptions opt;
        opt.kind = "mystery";
        CHECK(cmd_gen(opt, out, err) == 1);
        opt.kind = "quarantine";
        opt.edges = "0-1,zz";
        CHECK(cmd_gen(opt, out, err) == 1);
        opt.edges = "0-7";
        CHECK(cmd_gen(opt, out, err) == 1);
        opt.kind = "random";
        opt.density = 0.0;
        CHECK(cmd_gen(opt, out, err) == 1);
        opt.density = 1.0;
        opt.d = 1;
        CHECK(cmd_gen(opt, out, err) == 1);
    }
    SECTION("stdout output")
    {
        GenOptions opt;
        opt.kind = "random";
        std::ostringstream out, err;
        REQUIRE(cmd_gen(opt, out, err) == 0);
        CHECK(identical(load_system(json::parse(out.str())), generate(opt)));
    }
}
