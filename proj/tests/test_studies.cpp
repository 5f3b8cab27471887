#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lattice/error.hpp"
#include "lattice/studies.hpp"

using namespace lattice;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no lattice::Error thrown");
    return ErrorKind::InvalidInput;
}

ResultEntry entry(Topology t, double size, StiffnessCaseId c, double e, double g, double strain = 0.01) {
    ResultRecord r;
    r.topology = t;
    r.bbox = {size, size};
    r.stiffness_case = c;
    r.strain = strain;
    r.tensor = {e, e, 0.3 * e, g};
    r.constants = engineering_constants(r.tensor);
    r.dof_count = 100;
    return {{t, r.bbox, c, strain}, r, {}};
}

fs::path scratch(const std::string& name) {
    std::random_device rd;
    const auto dir = fs::temp_directory_path() / (name + "_" + std::to_string(rd()));
    fs::remove_all(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

StudyConfig small_config() {
    StudyConfig cfg;
    cfg.topologies = {Topology::S, Topology::H};
    cfg.sizes = {{750, 750}, {1000, 1000}};
    cfg.strains = {0.01, 0.02};
    return cfg;
}

}  // namespace

TEST_CASE("study config") {
    const StudyConfig cfg;
    CHECK(cfg.topologies.size() == 10);
    CHECK(cfg.sizes.size() == 4);
    CHECK(cfg.strains.size() == 8);
    CHECK(cfg.strains.front() == 0.01);
    CHECK(cfg.strains.back() == doctest::Approx(0.045));
    CHECK(cfg.cases.size() == 4);
    CHECK_NOTHROW(cfg.validate());

    auto bad = cfg;
    bad.topologies.push_back(Topology::T4H);
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::NotOrthotropic);
    bad = cfg;
    bad.sizes.clear();
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::InvalidInput);

    SUBCASE("JSON") {
        const auto doc = nlohmann::json::parse(R"({"topologies": ["S", "THTH"], "sizes_mm": [750, [1000, 800]],
            "strains": [0.01], "cases": ["node-stiff"], "boundary": "affine", "jobs": 2})");
        const auto c = study_config_from_json(doc);
        CHECK(c.topologies == std::vector<Topology>{Topology::S, Topology::THTH});
        REQUIRE(c.sizes.size() == 2);
        CHECK(c.sizes[1].width == 1000);
        CHECK(c.sizes[1].height == 800);
        CHECK(c.cases.size() == 1);
        CHECK(c.cases[0].id == StiffnessCaseId::NodeStiff);
        CHECK(c.lattice.homogenize.boundary == BoundaryMode::Affine);
        CHECK(c.jobs == 2);
        CHECK(kind_of([] { study_config_from_json(nlohmann::json::parse(R"({"sizez": [1]})")); }) ==
              ErrorKind::InvalidInput);
        CHECK(kind_of([] { study_config_from_json(nlohmann::json::parse(R"({"topologies": ["T4H"]})")); }) ==
              ErrorKind::NotOrthotropic);
        CHECK(kind_of([] { study_config_from_json(nlohmann::json::parse(R"({"topologies": ["Q"]})")); }) ==
              ErrorKind::UnknownTopology);
    }
    SUBCASE("TOML") {
        const auto c = study_config_from_toml(R"(
topologies = ["H"]
sizes_mm = [1250]
young_modulus_mpa = 1000.0
wide_width_mm = 4.0
)");
        CHECK(c.topologies == std::vector<Topology>{Topology::H});
        CHECK(c.sizes[0].width == 1250);
        CHECK(c.lattice.material.young_modulus == 1000);
        CHECK(c.cases[0].actuator_width == 4);
        CHECK(kind_of([] { study_config_from_toml("topologies = ["); }) == ErrorKind::InvalidInput);
    }
    SUBCASE("file") {
        const auto dir = scratch("lattice_cfg");
        fs::create_directories(dir);
        std::ofstream(dir / "study.toml") << "output_dir = \"out\"\nstrains = [0.02]\n";
        const auto c = load_study_config(dir / "study.toml");
        CHECK(c.output_dir == dir / "out");
        CHECK(c.strains == std::vector<double>{0.02});
        CHECK(kind_of([&] { load_study_config(dir / "missing.json"); }) == ErrorKind::IoError);
        fs::remove_all(dir);
    }
}

TEST_CASE("result table") {
    ResultTable t;
    t.insert(entry(Topology::S, 750, StiffnessCaseId::ActuatorStiff, 66, 1));
    t.insert(entry(Topology::H, 750, StiffnessCaseId::ActuatorStiff, 0.04, 0.01));
    CHECK(t.size() == 2);
    CHECK(t.entries().front().key.topology == Topology::S);
    CHECK(kind_of([&] { t.insert(entry(Topology::S, 750, StiffnessCaseId::ActuatorStiff, 1, 1)); }) ==
          ErrorKind::InvalidInput);
    t.insert({{Topology::T, {750, 750}, StiffnessCaseId::ActuatorStiff, 0.01}, std::nullopt, "SingularSystem: x"});
    CHECK(t.failure_count() == 1);
    CHECK(t.find({Topology::T, {750, 750}, StiffnessCaseId::ActuatorStiff, 0.01}) == nullptr);
    REQUIRE(t.find({Topology::H, {750, 750}, StiffnessCaseId::ActuatorStiff, 0.01}) != nullptr);
    CHECK(t.select(Topology::S, StiffnessCaseId::ActuatorStiff, 0.01).size() == 1);
    CHECK(t.select(Topology::S, StiffnessCaseId::NodeStiff, 0.01).empty());
}

TEST_CASE("run_study") {
    SUBCASE("one record") {
        StudyConfig cfg;
        cfg.topologies = {Topology::S};
        cfg.sizes = {{750, 750}};
        cfg.strains = {0.01};
        cfg.cases = {StiffnessCase::make(StiffnessCaseId::ActuatorStiff)};
        std::size_t calls = 0;
        const auto t = run_study(cfg, [&](std::size_t done, std::size_t total) {
            ++calls;
            CHECK(done <= total);
        });
        REQUIRE(t.size() == 1);
        CHECK(calls == 1);
        REQUIRE(t.entries()[0].record);
        CHECK(t.entries()[0].record->constants.e1 == doctest::Approx(2000.0 / 6.0 / 5.0).epsilon(1e-9));
    }
    SUBCASE("worker count does not change the content") {
        auto cfg = small_config();
        cfg.jobs = 1;
        const auto a = run_study(cfg);
        cfg.jobs = 4;
        const auto b = run_study(cfg);
        REQUIRE(a.size() == 2 * 2 * 2 * 4);
        REQUIRE(b.size() == a.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(results_csv_row(a.entries()[k]) == results_csv_row(b.entries()[k]));
        }
    }
    SUBCASE("failures are recorded") {
        StudyConfig cfg;
        cfg.topologies = {Topology::H};
        cfg.sizes = {{120, 120}};
        cfg.strains = {0.01, 0.02};
        cfg.cases = {StiffnessCase::make(StiffnessCaseId::ActuatorStiff)};
        cfg.jobs = 1;
        const auto t = run_study(cfg);
        CHECK(t.size() == 2);
        CHECK(t.failure_count() == 2);
        CHECK(t.entries()[0].error.rfind("BboxTooSmall", 0) == 0);
    }
}

TEST_CASE("size independence") {
    ResultTable t;
    for (const double size : {750.0, 1000.0, 1250.0}) {
        t.insert(entry(Topology::S, size, StiffnessCaseId::ActuatorStiff, 66, 1));
        t.insert(entry(Topology::H, size, StiffnessCaseId::ActuatorStiff, size == 1000 ? 0.08 : 0.04, 0.01));
    }
    const auto spreads = size_independence_report(t);
    REQUIRE(spreads.size() == 2);
    for (const auto& s : spreads) {
        CHECK(s.sizes == 3);
        if (s.topology == Topology::S) {
            CHECK(s.max_spread() == 0);
            CHECK_FALSE(s.flagged);
        } else {
            CHECK(s.e1 == doctest::Approx(0.04 / (0.16 / 3)));
            CHECK(s.flagged);
        }
    }
    ResultTable single;
    single.insert(entry(Topology::S, 750, StiffnessCaseId::ActuatorStiff, 66, 1));
    CHECK(kind_of([&] { size_independence_report(single); }) == ErrorKind::InsufficientData);
    CHECK(kind_of([&] { size_independence_report(t, 0.03); }) == ErrorKind::InsufficientData);

    SUBCASE("square lattice from real runs") {
        StudyConfig cfg;
        cfg.topologies = {Topology::S};
        cfg.strains = {0.01};
        cfg.cases = {StiffnessCase::make(StiffnessCaseId::ActuatorStiff)};
        const auto real = run_study(cfg);
        const auto r = size_independence_report(real);
        REQUIRE(r.size() == 1);
        CHECK(r[0].sizes == 4);
        CHECK(r[0].max_spread() < 0.05);
    }
}

TEST_CASE("rankings") {
    ResultTable t;
    t.insert(entry(Topology::T, 750, StiffnessCaseId::ActuatorStiff, 77, 29));
    t.insert(entry(Topology::S, 750, StiffnessCaseId::ActuatorStiff, 66, 0.009));
    t.insert(entry(Topology::T3S2, 750, StiffnessCaseId::ActuatorStiff, 67, 0.027));
    t.insert(entry(Topology::H, 750, StiffnessCaseId::ActuatorStiff, 0.04, 0.0105));

    const auto r = rank_report(t, 0.01, StiffnessCaseId::ActuatorStiff);
    REQUIRE(r.e.size() == 4);
    CHECK(r.e[0].topology == Topology::T);
    CHECK(r.e[1].topology == Topology::T3S2);
    CHECK(r.e[1].tied_with_next);
    CHECK_FALSE(r.e[0].tied_with_next);
    CHECK(format_ranking(r.e) == "T > T3S2 = S > H");
    CHECK(r.g[0].topology == Topology::T);
    CHECK(r.g.back().topology == Topology::S);

    const Topology expect[] = {Topology::T, Topology::S, Topology::T3S2, Topology::H};
    CHECK(ranking_agrees(r.e, expect));
    const Topology wrong[] = {Topology::H, Topology::T, Topology::S, Topology::T3S2};
    CHECK_FALSE(ranking_agrees(r.e, wrong));
    const Topology extra[] = {Topology::T, Topology::THTH};
    CHECK_FALSE(ranking_agrees(r.e, extra));

    ResultTable one;
    one.insert(entry(Topology::THTH, 750, StiffnessCaseId::ActuatorStiff, 38, 14));
    CHECK(rank_report(one, 0.01, StiffnessCaseId::ActuatorStiff).e.size() == 1);
    const Topology need[] = {Topology::T};
    CHECK(kind_of([&] { rank_report(one, 0.01, StiffnessCaseId::ActuatorStiff, need); }) ==
          ErrorKind::MissingTopology);
    CHECK(kind_of([&] { rank_report(one, 0.01, StiffnessCaseId::NodeStiff); }) == ErrorKind::MissingTopology);
}

TEST_CASE("heat map and classification") {
    ResultTable t;
    const double scale[] = {1, 2, 1, 5};
    for (int k = 0; k < 4; ++k) {
        t.insert(entry(Topology::T, 750, kAllCases[k], 77 * scale[k], 29 * scale[k]));
        t.insert(entry(Topology::H, 750, kAllCases[k], 0.04 * scale[k] * (k == 3 ? 24 : 1), 0.01 * scale[k]));
    }
    const auto map = stiffness_case_heatmap(t, 0.01);
    REQUIRE(map.topologies.size() == 2);
    for (const auto topo : map.topologies) {
        const auto& r = map.ratios_for(topo);
        CHECK(r.e1[0] == 1.0);
        CHECK(r.e2[0] == 1.0);
        CHECK(r.g12[0] == 1.0);
    }
    CHECK(map.ratios_for(Topology::T).e1[1] == doctest::Approx(2));
    CHECK(kind_of([&] { map.ratios_for(Topology::S); }) == ErrorKind::MissingTopology);

    const auto classes = classify_topologies(map);
    REQUIRE(classes.size() == 2);
    for (const auto& c : classes) {
        if (c.topology == Topology::T) {
            CHECK(c.axial == Deformation::Stretching);
            CHECK(c.axial_ratio == doctest::Approx(5));
        } else {
            CHECK(c.axial == Deformation::Bending);
        }
    }
    CHECK(classify_ratio(5.0) == Deformation::Stretching);
    CHECK(classify_ratio(4.0) == Deformation::Stretching);
    CHECK(classify_ratio(6.0) == Deformation::Stretching);
    CHECK(classify_ratio(3.9) == Deformation::Bending);
    CHECK(classify_ratio(120) == Deformation::Bending);
    CHECK(to_string(Deformation::Stretching) == "stretching");

    ResultTable partial;
    partial.insert(entry(Topology::T, 750, StiffnessCaseId::ActuatorStiff, 77, 29));
    CHECK(kind_of([&] { stiffness_case_heatmap(partial, 0.01); }) == ErrorKind::MissingCase);
}

TEST_CASE("export") {
    SUBCASE("one record") {
        ResultTable t;
        t.insert(entry(Topology::S, 750, StiffnessCaseId::ActuatorStiff, 66, 1));
        const auto dir = scratch("lattice_export1");
        const auto files = export_study(t, dir);
        CHECK_FALSE(files.empty());
        const auto text = read_file(dir / "results.csv");
        CHECK(std::count(text.begin(), text.end(), '\n') == 2);
        CHECK(text.rfind(std::string(results_csv_header()) + "\n", 0) == 0);
        const auto back = read_results_csv(dir / "results.csv");
        REQUIRE(back.size() == 1);
        CHECK(results_csv_row(back.entries()[0]) == results_csv_row(t.entries()[0]));
        fs::remove_all(dir);
    }
    SUBCASE("empty table") {
        CHECK(kind_of([] { export_study(ResultTable{}, scratch("lattice_empty")); }) == ErrorKind::EmptyTable);
    }
    SUBCASE("unwritable target") {
        ResultTable t;
        t.insert(entry(Topology::S, 750, StiffnessCaseId::ActuatorStiff, 66, 1));
        const auto dir = scratch("lattice_blocked");
        std::ofstream(dir) << "a file";
        CHECK(kind_of([&] { export_study(t, dir / "sub"); }) == ErrorKind::IoError);
        fs::remove_all(dir);
        CHECK(kind_of([] { read_results_csv("/nonexistent/results.csv"); }) == ErrorKind::IoError);
    }
    SUBCASE("bundles and reproducibility") {
        auto cfg = small_config();
        cfg.strains = {0.01};
        const auto a = run_study(cfg);
        const auto b = run_study(cfg);
        const auto da = scratch("lattice_export_a");
        const auto db = scratch("lattice_export_b");
        ExportOptions opt;
        opt.format = "json";
        const auto fa = export_study(a, da, opt);
        export_study(b, db, opt);
        for (const auto* sub : {"curves", "bars.csv", "heatmaps"}) CHECK(fs::exists(da / "plot_data" / sub));
        for (const auto* name : {"ranking_E.txt", "ranking_G.txt", "heatmap_E.csv", "heatmap_G.csv", "poisson.csv",
                                 "results.json", "timings.csv"}) {
            CHECK(fs::exists(da / name));
        }
        for (const auto& f : fa) {
            const auto rel = fs::relative(f, da);
            if (rel == "timings.csv") continue;
            CAPTURE(rel.string());
            CHECK(read_file(f) == read_file(db / rel));
        }
        const auto json = nlohmann::json::parse(read_file(da / "results.json"));
        CHECK(json.size() == a.size());
        fs::remove_all(da);
        fs::remove_all(db);
    }
}
