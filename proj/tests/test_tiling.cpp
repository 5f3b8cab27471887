#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "lattice/error.hpp"
#include "lattice/tiling.hpp"

using namespace lattice;

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

TilingGraph square_grid(int n, double e) {
    TilingGraph g;
    g.topology = Topology::S;
    g.edge_length = e;
    g.bbox = {(n - 1) * e, (n - 1) * e};
    const double o = -(n - 1) * e / 2.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) g.vertices.emplace_back(o + i * e, o + j * e);
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v = j * n + i;
            if (i + 1 < n) g.edges.push_back({v, v + 1});
            if (j + 1 < n) g.edges.push_back({v, v + n});
        }
    }
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

std::set<std::pair<long long, long long>> point_set(const std::vector<Vec2>& pts, double scale) {
    std::set<std::pair<long long, long long>> out;
    for (const auto& p : pts) out.insert({std::llround(p.x() * scale), std::llround(p.y() * scale)});
    return out;
}

}  // namespace

TEST_CASE("catalog lists the eleven tilings in order") {
    const auto all = list_topologies();
    REQUIRE(all.size() == 11);
    const char* codes[] = {"T", "S", "H", "T3S2", "T2STS", "THTH", "TSHS", "TD2", "SO2", "SHD", "T4H"};
    int regular = 0;
    for (std::size_t k = 0; k < all.size(); ++k) {
        CHECK(all[k].code == codes[k]);
        CHECK(all[k].vertex_degree == static_cast<int>(all[k].vertex_config.size()));
        CHECK(all[k].orthotropic_rve == (all[k].id != Topology::T4H));
        const auto& c = all[k].vertex_config;
        if (std::all_of(c.begin(), c.end(), [&](int s) { return s == c.front(); })) ++regular;
    }
    CHECK(regular == 3);
    CHECK(topology_info(Topology::THTH).config_string() == "3.6.3.6");
    CHECK(topology_info(Topology::THTH).vertex_degree == 4);
    CHECK(parse_topology("T3S2") == Topology::T3S2);
    CHECK(kind_of([] { parse_topology("X9"); }) == ErrorKind::UnknownTopology);
    CHECK(kind_of([] { parse_topology("thth"); }) == ErrorKind::UnknownTopology);
}

TEST_CASE("generate_tiling examples") {
    SUBCASE("square 200 is a 5x5 grid") {
        const auto g = generate_tiling(Topology::S, {200, 200}, 50);
        CHECK(g.vertices.size() == 25);
        CHECK(g.edges.size() == 40);
        CHECK(perimeter_vertices(g).size() == 16);
    }
    SUBCASE("triangular 100x50 has full-degree interior") {
        const auto g = generate_tiling(Topology::T, {100, 50}, 50);
        CHECK_FALSE(g.edges.empty());
        CHECK(validate_tiling(g).passed());
        const auto rim = perimeter_vertices(g);
        const auto degree = vertex_degrees(g);
        for (std::size_t v = 0; v < g.vertices.size(); ++v) {
            if (std::find(rim.begin(), rim.end(), static_cast<int>(v)) == rim.end()) CHECK(degree[v] == 6);
        }
    }
    SUBCASE("hexagon does not fit in 60x60") {
        CHECK(kind_of([] { generate_tiling(Topology::H, {60, 60}, 50); }) == ErrorKind::BboxTooSmall);
    }
    SUBCASE("bad sizes") {
        CHECK(kind_of([] { generate_tiling(Topology::S, {-1, 200}, 50); }) == ErrorKind::InvalidInput);
        CHECK(kind_of([] { generate_tiling(Topology::S, {200, 200}, 0); }) == ErrorKind::InvalidInput);
    }
}

TEST_CASE("validate_tiling reports constructed defects") {
    const auto good = square_grid(5, 50);
    CHECK(validate_tiling(good).passed());

    SUBCASE("short edge") {
        auto g = good;
        g.vertices[24].x() -= 0.1;  // corner, edges to 23 and 19
        const auto report = validate_tiling(g);
        REQUIRE(report.has("equal-edge"));
        const auto it = std::find_if(report.violations.begin(), report.violations.end(), [](const Violation& v) {
            return v.rule == "equal-edge" && std::abs(v.measured - 49.9) < 1e-9;
        });
        CHECK(it != report.violations.end());
    }
    SUBCASE("crossing diagonal") {
        auto g = good;
        g.edges.push_back({0, 6});
        g.edges.push_back({1, 5});
        CHECK(validate_tiling(g).has("edge-to-edge"));
    }
    SUBCASE("duplicates and ranges") {
        auto g = good;
        g.edges.push_back(g.edges.front());
        CHECK(validate_tiling(g).has("duplicate-edge"));
        g = good;
        g.vertices.push_back(g.vertices.front());
        CHECK(validate_tiling(g).has("duplicate-vertex"));
        g = good;
        g.edges.push_back({0, 99});
        CHECK(validate_tiling(g).has("index-range"));
    }
    SUBCASE("two components") {
        auto g = good;
        g.vertices.emplace_back(500, 500);
        g.vertices.emplace_back(550, 500);
        g.edges.push_back({25, 26});
        CHECK(validate_tiling(g).has("connected"));
    }
}

TEST_CASE("perimeter vertices") {
    const auto grid = square_grid(5, 50);
    const auto p = perimeter_vertices(grid);
    CHECK(p.size() == 16);
    for (const int v : p) {
        const auto& x = grid.vertices[v];
        CHECK((std::abs(std::abs(x.x()) - 100) < 1e-9 || std::abs(std::abs(x.y()) - 100) < 1e-9));
    }

    TilingGraph tri;
    tri.topology = Topology::T;
    tri.edge_length = 50;
    tri.bbox = {50, 50};
    tri.vertices = {{-25, 0}, {25, 0}, {0, 25 * std::sqrt(3.0)}};
    tri.edges = {{0, 1}, {0, 2}, {1, 2}};
    CHECK(perimeter_vertices(tri) == std::vector<int>{0, 1, 2});

    TilingGraph one;
    one.topology = Topology::S;
    one.edge_length = 50;
    one.vertices = {{0, 0}, {50, 0}};
    one.edges = {{0, 1}};
    CHECK(perimeter_vertices(one) == std::vector<int>{0, 1});
}

TEST_CASE("every topology generates a valid, symmetric, deterministic pattern") {
    for (const auto& info : list_topologies()) {
        CAPTURE(info.code);
        const auto g = generate_tiling(info.id, {500, 500}, 50);
        const auto report = validate_tiling(g);
        CHECK(report.passed());
        for (const auto& e : g.edges) CHECK(e[0] < e[1]);

        const auto again = generate_tiling(info.id, {500, 500}, 50);
        CHECK(again.vertices == g.vertices);
        CHECK(again.edges == g.edges);

        const auto big = generate_tiling(info.id, {1000, 1000}, 50);
        const auto bigger = generate_tiling(info.id, {2000, 2000}, 50);
        const double ratio = static_cast<double>(bigger.edges.size()) / static_cast<double>(big.edges.size());
        CHECK(ratio > 3.2);
        CHECK(ratio < 4.8);

        if (!info.orthotropic_rve) continue;
        const auto pts = point_set(g.vertices, 1e5);
        std::vector<Vec2> mx, my;
        for (const auto& v : g.vertices) {
            mx.emplace_back(-v.x(), v.y());
            my.emplace_back(v.x(), -v.y());
        }
        CHECK(point_set(mx, 1e5) == pts);
        CHECK(point_set(my, 1e5) == pts);
    }
}

TEST_CASE("mirror line spacing") {
    CHECK(mirror_line_spacing(Topology::S, 50).x() == doctest::Approx(25));
    CHECK(mirror_line_spacing(Topology::T, 50).y() == doctest::Approx(25 * std::sqrt(3.0)));
    CHECK(kind_of([] { mirror_line_spacing(Topology::T4H, 50); }) == ErrorKind::NotOrthotropic);
}

TEST_CASE("enclosed faces of a square grid") {
    const auto faces = enclosed_faces(square_grid(5, 50));
    CHECK(faces.faces.size() == 16);
    for (const auto& f : faces.faces) CHECK(f.area == doctest::Approx(2500));
    const int total = std::accumulate(faces.faces_per_edge.begin(), faces.faces_per_edge.end(), 0);
    CHECK(total == 64);
}

TEST_CASE("tiling JSON round trip") {
    const auto g = generate_tiling(Topology::THTH, {400, 400}, 50);
    const auto doc = to_json(g);
    CHECK(doc.at("edge_length_mm") == 50.0);
    const auto back = tiling_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(back.topology == g.topology);
    CHECK(back.vertices == g.vertices);
    CHECK(back.edges == g.edges);
}
