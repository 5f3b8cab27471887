#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "lattice/cli.hpp"

using namespace lattice::cli;
namespace fs = std::filesystem;

namespace {

Command parse(std::initializer_list<std::string> args) {
    std::vector<std::string> argv{"lattice_homog"};
    argv.insert(argv.end(), args);
    return parse_args(argv);
}

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome exec(std::initializer_list<std::string> args) {
    Outcome o;
    std::ostringstream out, err;
    o.code = run(parse(args), out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

// Runs the installed binary; returns its exit status and stdout.
std::pair<int, std::string> shell(const std::string& args, const fs::path& dir) {
    const char* bin = std::getenv("LATTICE_HOMOG_CLI");
    REQUIRE(bin != nullptr);
    const auto out_file = dir / "stdout.txt";
    const std::string command = std::string("LATTICE_HOMOG_LOG=off '") + bin + "' " + args + " > '" +
                                out_file.string() + "' 2> '" + (dir / "stderr.txt").string() + "'";
    const int status = std::system(command.c_str());
    std::ifstream in(out_file);
    std::ostringstream s;
    s << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

fs::path scratch(const std::string& name) {
    std::random_device rd;
    const auto dir = fs::temp_directory_path() / (name + "_" + std::to_string(rd()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("parse_args") {
    const auto gen = parse({"gen-mesh", "--topology", "THTH", "--size", "1000", "--edge", "50", "--out", "mesh.json"});
    CHECK(gen.subcommand == Subcommand::GenMesh);
    CHECK(gen.topology == "THTH");
    CHECK(gen.size == "1000");
    CHECK(gen.edge == 50);
    CHECK(gen.out == "mesh.json");

    const auto hom = parse({"homogenize", "--topology", "S", "--case", "node-stiff", "--strain", "0.02"});
    CHECK(hom.subcommand == Subcommand::Homogenize);
    CHECK(hom.stiffness_case == "node-stiff");
    CHECK(hom.strain == 0.02);
    CHECK(hom.size == "750");
    CHECK(hom.depth == 5);
    CHECK(hom.boundary == "symmetry");

    const auto list = parse({"list-topologies"});
    CHECK(list.subcommand == Subcommand::ListTopologies);
    CHECK(list.format == "csv");

    const auto help = parse({"--help"});
    CHECK(help.subcommand == Subcommand::Help);
    CHECK(help.help_text.find("homogenize") != std::string::npos);

    CHECK_THROWS_AS(parse({}), UsageError);
    CHECK_THROWS_AS(parse({"frobnicate"}), UsageError);
    CHECK_THROWS_AS(parse({"homogenize"}), UsageError);
    CHECK_THROWS_AS(parse({"homogenize", "--topology", "S", "--strain", "abc"}), UsageError);
    CHECK_THROWS_AS(parse({"homogenize", "--topology", "S", "--bogus"}), UsageError);
    CHECK_THROWS_AS(parse({"list-topologies", "--format", "xml"}), UsageError);
}

TEST_CASE("study config path") {
    const auto dir = scratch("lattice_cli_cfg");
    std::ofstream(dir / "study.toml") << "topologies = [\"S\"]\n";
    const auto cmd = parse({"study", "--config", (dir / "study.toml").string()});
    CHECK(cmd.subcommand == Subcommand::Study);
    CHECK(cmd.config == (dir / "study.toml").string());
    CHECK_THROWS_AS(parse({"study", "--config", (dir / "none.toml").string()}), UsageError);
    fs::remove_all(dir);
}

TEST_CASE("run in process") {
    SUBCASE("homogenize prints one record") {
        const auto o = exec({"homogenize", "--topology", "S", "--size", "750", "--case", "actuator-stiff",
                             "--strain", "0.01"});
        REQUIRE(o.code == kExitOk);
        const auto doc = nlohmann::json::parse(o.out);
        CHECK(doc.at("topology") == "S");
        CHECK(doc.at("e1").get<double>() == doctest::Approx(2000.0 / 6.0 / 5.0).epsilon(1e-9));
        CHECK(doc.at("e2").get<double>() == doctest::Approx(doc.at("e1").get<double>()).epsilon(1e-9));
    }
    SUBCASE("homogenize csv") {
        const auto o = exec({"homogenize", "--topology", "H", "--format", "csv"});
        REQUIRE(o.code == kExitOk);
        CHECK(std::count(o.out.begin(), o.out.end(), '\n') == 2);
        CHECK(o.out.rfind("topology,", 0) == 0);
    }
    SUBCASE("list-topologies") {
        const auto o = exec({"list-topologies"});
        REQUIRE(o.code == kExitOk);
        CHECK(std::count(o.out.begin(), o.out.end(), '\n') == 12);
        const auto j = exec({"list-topologies", "--format", "json"});
        CHECK(nlohmann::json::parse(j.out).size() == 11);
    }
    SUBCASE("gen-mesh") {
        const auto o = exec({"gen-mesh", "--topology", "S", "--size", "200"});
        REQUIRE(o.code == kExitOk);
        const auto doc = nlohmann::json::parse(o.out);
        CHECK(doc.at("tiling").at("vertices").size() == 25);
        CHECK(doc.at("mesh").at("fe_nodes").size() == 105);
    }
    SUBCASE("domain errors") {
        const auto o = exec({"homogenize", "--topology", "T4H"});
        CHECK(o.code == kExitDomain);
        CHECK(o.err.find("NotOrthotropic") != std::string::npos);
        CHECK(o.out.empty());
        CHECK(exec({"homogenize", "--topology", "XYZ"}).code == kExitDomain);
        CHECK(exec({"gen-mesh", "--topology", "H", "--size", "60"}).code == kExitDomain);
        CHECK_THROWS_AS(exec({"homogenize", "--topology", "S", "--size", "7x"}), UsageError);
    }
    SUBCASE("io errors") {
        CHECK(exec({"list-topologies", "--out", "/nonexistent/dir/x.csv"}).code == kExitIo);
        CHECK(exec({"report", "--out", "/nonexistent/dir"}).code == kExitIo);
    }
}

TEST_CASE("study and report") {
    const auto dir = scratch("lattice_cli_study");
    std::ofstream(dir / "study.json") << R"({"topologies": ["S", "H"], "sizes_mm": [750, 1000],
        "strains": [0.01, 0.02], "output_dir": "out"})";
    const auto a = exec({"study", "--config", (dir / "study.json").string(), "--jobs", "2"});
    REQUIRE(a.code == kExitOk);
    CHECK(fs::exists(dir / "out" / "results.csv"));
    CHECK(a.out.find("results.csv") != std::string::npos);
    const auto first = slurp(dir / "out" / "results.csv");

    const auto b = exec({"study", "--config", (dir / "study.json").string(), "--out", (dir / "again").string()});
    REQUIRE(b.code == kExitOk);
    CHECK(slurp(dir / "again" / "results.csv") == first);
    CHECK(slurp(dir / "again" / "ranking_E.txt") == slurp(dir / "out" / "ranking_E.txt"));

    const auto r = exec({"report", "--config", (dir / "study.json").string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.rfind("E: S > H\nG: ", 0) == 0);
    CHECK(r.out.find("class S: axial stretching") != std::string::npos);
    CHECK(slurp(dir / "out" / "results.csv") == first);
    fs::remove_all(dir);
}

TEST_CASE("binary exit codes") {
    const auto dir = scratch("lattice_cli_bin");
    auto [ok, out] = shell("homogenize --topology S", dir);
    CHECK(ok == 0);
    CHECK(nlohmann::json::parse(out).at("topology") == "S");
    CHECK(shell("homogenize --topology T4H", dir).first == 1);
    CHECK(shell("homogenize --nope", dir).first == 2);
    CHECK(shell("", dir).first == 2);
    CHECK(shell("homogenize --topology S --size 7x", dir).first == 2);
    CHECK(shell("gen-mesh --topology S --size 200 --out /nonexistent/dir/m.json", dir).first == 3);
    CHECK(shell("--help", dir).first == 0);
    fs::remove_all(dir);
}
