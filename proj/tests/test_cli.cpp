#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "msfem/csv.hpp"
#include "msfem/error.hpp"
#include "msfem/run.hpp"

using namespace msfem;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(MSFEM_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("msfem_cli_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("number formatting")
{
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(0.0208) == "0.0208");
    CHECK(format_number(0.001) == "0.001");
    CHECK(format_number(9.99999e-4) == "9.99999e-04");
    CHECK(format_number(3.92e-13) == "3.92000e-13");
    CHECK(format_number(1.0 / 3.0) == "0.333333");
    CHECK(format_number(123456.7) == "123457");
    CHECK(format_number(1234567.0) == "1.23457e+06");
    CHECK(format_number(-0.5) == "-0.5");
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("csv tables and grids")
{
    CsvTable t({"a", "b"});
    t.add_numbers({1.0, 2.5e-5});
    t.add_row({"x", "y"});
    CHECK(t.str() == "a,b\n1,2.50000e-05\nx,y\n");
    CHECK_THROWS_AS(t.add_row({"only"}), ConfigError);

    const fs::path p = scratch("grid.csv");
    write_cell_grid(p, 2, Eigen::Vector4d(1, 2, 3, 4));
    CHECK(slurp(p) == "3,4\n1,2\n");
    CHECK_THROWS_AS(t.write("/nonexistent/dir/t.csv"), IoError);
}

TEST_CASE("config defaults and round trip")
{
    const RunConfig d = parse_config("{}");
    CHECK(d.n == 40);
    CHECK(d.N == 4);
    CHECK(d.seed == 7);
    CHECK(d.perm.epsilon == 0.1);
    CHECK(d.transport.cfl == 0.5);
    CHECK(d.transport.pressure_cadence == 1);
    CHECK(d.spectral == SpectralKind::spectral1);

    const RunConfig c = parse_config(R"({"n": 20, "N": 5, "perm": "periodic", "spectral": "curl",
        "dofs": [1, 4], "transport": {"cfl": 0.25, "output_times": [1, 2], "dofs": [1, 3]}})");
    CHECK(c.perm.kind == "periodic");
    CHECK(c.spectral == SpectralKind::curl);
    CHECK(to_json(parse_config(to_json(c))) == to_json(c));

    // times are given for n = 200
    REQUIRE(c.output_times().size() == 2);
    CHECK(c.output_times()[0] == doctest::Approx(0.01));
    CHECK(c.output_times()[1] == doctest::Approx(0.02));
}

TEST_CASE("config validation lists every problem")
{
    try {
        parse_config(R"({"n": 30, "N": 4, "source": "middle", "dofs": [0],
                         "transport": {"cfl": 2}, "bogus": 1})");
        FAIL("invalid config accepted");
    } catch (const ConfigError& e) {
        const std::string m = e.what();
        CHECK(m.find("multiple of N") != std::string::npos);
        CHECK(m.find("source") != std::string::npos);
        CHECK(m.find("transport.cfl") != std::string::npos);
        CHECK(m.find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"n": "forty"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"dofs": [11]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"perm": {"kind": "file"}})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), IoError);
}

TEST_CASE("hash")
{
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("sources")
{
    RunConfig c = parse_config(R"({"n": 8, "N": 2, "transport": {"dofs": [1]}})");
    const GridHierarchy g(8, 2);
    for (const char* s : {"corner", "corner_blocks", "blocks"}) {
        c.source = s;
        const Eigen::VectorXd f = make_source(c, g);
        CHECK(std::abs(f.sum()) < 1e-15);
        CHECK(f.lpNorm<1>() > 0.0);
    }
    c.source = "corner_blocks";
    CHECK(make_source(c, g)[g.cell(0, 7)] == doctest::Approx(g.cell_area()));
    CHECK(make_source(c, g)[g.cell(7, 0)] == doctest::Approx(-g.cell_area()));
}

TEST_CASE("runs are deterministic and listed in the manifest")
{
    const RunConfig c = parse_config(R"({"n": 8, "N": 2, "dofs": [1, 4],
        "transport": {"output_times": [20000, 40000], "dofs": [1]}})");
    std::ostringstream log;
    for (const std::string sub : {"fine", "table", "eigens", "transport"}) {
        const fs::path a = scratch(sub + "_a"), b = scratch(sub + "_b");
        const auto files = run(sub, c, a, log);
        run(sub, c, b, log);
        REQUIRE(!files.empty());
        CHECK(files.back().filename() == "manifest.json");
        for (const fs::path& f : files)
            CHECK(slurp(f) == slurp(b / f.filename()));

        const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
        CHECK(manifest["subcommand"] == sub);
        CHECK(manifest["config_hash"] == fnv1a_hex(to_json(c)));
        CHECK(manifest["files"].size() == files.size() - 1);
        for (const auto& entry : manifest["files"])
            CHECK(entry["fnv1a64"] == fnv1a_hex(slurp(a / entry["name"].get<std::string>())));
        CHECK(to_json(parse_config(manifest["config"].dump())) == to_json(c));
    }

    const fs::path t = fs::temp_directory_path() / "msfem_cli_table_a";
    CHECK(slurp(t / "table.csv").rfind("dof_per_E,E_of_v,E_of_p,E_os_v,E_os_p", 0) == 0);
    CHECK_THROWS_AS(run("nothing", c, t, log), ConfigError);
}

TEST_CASE("exit codes")
{
    const fs::path out = scratch("exit");
    fs::create_directories(out);
    const fs::path bad = out / "bad.json";
    std::ofstream(bad) << R"({"n": 7})";
    const fs::path missing_perm = out / "perm.json";
    std::ofstream(missing_perm) << R"({"n": 8, "N": 2, "transport": {"dofs": [1]},
                                     "perm": {"kind": "file", "path": "/nonexistent/spe.txt"}})";
    const fs::path ok = out / "ok.json";
    std::ofstream(ok) << R"({"n": 8, "N": 2, "transport": {"dofs": [1]}})";

    CHECK(run_cli("fine --config " + ok.string() + " --out " + (out / "o").string()) == 0);
    CHECK(run_cli("fine --config " + bad.string()) == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("fine --config " + (out / "absent.json").string()) == 4);
    CHECK(run_cli("fine --config " + missing_perm.string() + " --out " + (out / "p").string()) == 4);
}
