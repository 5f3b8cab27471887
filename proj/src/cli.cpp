#include "lattice/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "lattice/error.hpp"
#include "lattice/studies.hpp"

namespace lattice::cli {

namespace fs = std::filesystem;

namespace {

Bbox parse_size(const std::string& text) {
    const auto x = text.find('x');
    try {
        std::size_t used = 0;
        if (x == std::string::npos) {
            const double s = std::stod(text, &used);
            if (used == text.size()) return {s, s};
        } else {
            const double w = std::stod(text.substr(0, x), &used);
            if (used == x) {
                const std::string rest = text.substr(x + 1);
                const double h = std::stod(rest, &used);
                if (used == rest.size()) return {w, h};
            }
        }
    } catch (const std::logic_error&) {
    }
    throw UsageError(fmt::format("--size: expected W or WxH in mm, got '{}'", text));
}

void add_lattice_options(CLI::App* sub, Command& cmd, bool with_strain) {
    sub->add_option("--topology", cmd.topology, "Tiling code, e.g. THTH")->required();
    sub->add_option("--size", cmd.size, "Bounding box in mm: W or WxH")->capture_default_str();
    sub->add_option("--edge", cmd.edge, "Edge length in mm")->capture_default_str();
    sub->add_option("--case", cmd.stiffness_case, "actuator-stiff, node-stiff, equal-low or equal-high")
        ->capture_default_str();
    sub->add_option("--depth", cmd.depth, "Out-of-plane depth in mm")->capture_default_str();
    if (with_strain) {
        sub->add_option("--strain", cmd.strain, "Strain magnitude of the load cases")->capture_default_str();
        sub->add_option("--bc", cmd.boundary, "Boundary realization")
            ->check(CLI::IsMember({"symmetry", "affine"}))
            ->capture_default_str();
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::IoError, fmt::format("cannot write '{}'", path));
    return f;
}

void emit(const Command& cmd, std::ostream& out, const std::string& payload) {
    if (cmd.out) {
        auto f = open_out(*cmd.out);
        f << payload;
        if (!f) throw Error(ErrorKind::IoError, fmt::format("failed writing '{}'", *cmd.out));
    } else {
        out << payload;
    }
}

int list_topologies_cmd(const Command& cmd, std::ostream& out) {
    std::string payload;
    if (cmd.format == "json") {
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& t : list_topologies()) {
            doc.push_back({{"code", std::string(t.code)},
                           {"vertex_config", t.config_string()},
                           {"vertex_degree", t.vertex_degree},
                           {"orthotropic", t.orthotropic_rve}});
        }
        payload = doc.dump(2) + "\n";
    } else {
        payload = "code,vertex_config,vertex_degree,orthotropic\n";
        for (const auto& t : list_topologies()) {
            payload += fmt::format("{},{},{},{}\n", t.code, t.config_string(), t.vertex_degree, t.orthotropic_rve);
        }
    }
    emit(cmd, out, payload);
    return kExitOk;
}

int gen_mesh_cmd(const Command& cmd, std::ostream& out) {
    const Topology topology = parse_topology(cmd.topology);
    const TilingGraph graph = generate_tiling(topology, parse_size(cmd.size), cmd.edge);
    const BeamMesh mesh =
        build_beam_mesh(graph, StiffnessCase::make(parse_stiffness_case(cmd.stiffness_case)), Material{}, cmd.depth);
    spdlog::info("{}: {} vertices, {} edges, {} FE nodes", cmd.topology, graph.vertices.size(), graph.edges.size(),
                 mesh.fe_nodes.size());
    const nlohmann::json doc = {{"tiling", to_json(graph)}, {"mesh", to_json(mesh)}};
    emit(cmd, out, doc.dump() + "\n");
    return kExitOk;
}

int homogenize_cmd(const Command& cmd, std::ostream& out) {
    const Topology topology = parse_topology(cmd.topology);
    LatticeParameters params;
    params.edge_length = cmd.edge;
    params.depth = cmd.depth;
    params.homogenize.boundary = cmd.boundary == "affine" ? BoundaryMode::Affine : BoundaryMode::Symmetry;
    const ResultRecord r = homogenize(topology, parse_size(cmd.size),
                                      StiffnessCase::make(parse_stiffness_case(cmd.stiffness_case)), cmd.strain,
                                      params);
    spdlog::info("{}: {} DOF solved in {:.3f} s", cmd.topology, r.dof_count, r.solve_seconds);
    if (cmd.format == "csv") {
        const ResultEntry entry{{r.topology, r.bbox, r.stiffness_case, r.strain}, r, {}};
        emit(cmd, out, fmt::format("{}\n{}\n", results_csv_header(), results_csv_row(entry)));
    } else {
        emit(cmd, out, to_json(r).dump(2) + "\n");
    }
    return kExitOk;
}

int study_cmd(const Command& cmd, std::ostream& out) {
    StudyConfig cfg = cmd.config ? load_study_config(*cmd.config) : StudyConfig{};
    if (cmd.out) cfg.output_dir = *cmd.out;
    if (cmd.jobs) cfg.jobs = *cmd.jobs;
    cfg.validate();

    const auto start = std::chrono::steady_clock::now();
    const ResultTable table = run_study(cfg, [](std::size_t done, std::size_t total) {
        spdlog::info("study: {}/{} meshes done", done, total);
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    spdlog::info("study: {} records, {} failed, {:.1f} s", table.size(), table.failure_count(), seconds);

    ExportOptions options;
    options.report_strain = cfg.report_strain;
    options.format = cmd.format;
    for (const auto& p : export_study(table, cfg.output_dir, options)) out << p.string() << '\n';
    return table.failure_count() == 0 ? kExitOk : kExitDomain;
}

int report_cmd(const Command& cmd, std::ostream& out) {
    fs::path dir;
    double strain = 0.01;
    if (cmd.out) {
        dir = *cmd.out;
    } else if (cmd.config) {
        const StudyConfig cfg = load_study_config(*cmd.config);
        dir = cfg.output_dir;
        strain = cfg.report_strain;
    } else {
        throw UsageError("report: give the study directory with --out or its config with --config");
    }
    const ResultTable table = read_results_csv(dir / "results.csv");
    ExportOptions options;
    options.report_strain = strain;
    options.include_results = false;
    export_study(table, dir, options);

    const RankReport ranks = rank_report(table, strain, StiffnessCaseId::ActuatorStiff);
    out << "E: " << format_ranking(ranks.e) << '\n';
    out << "G: " << format_ranking(ranks.g) << '\n';
    try {
        for (const auto& s : size_independence_report(table, strain)) {
            out << fmt::format("size spread {} {}: E1 {:.4f} E2 {:.4f} G12 {:.4f}{}\n", code(s.topology),
                               to_string(s.stiffness_case), s.e1, s.e2, s.g12, s.flagged ? " FLAGGED" : "");
        }
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientData) throw;
        spdlog::warn("{}", e.what());
    }
    try {
        for (const auto& c : classify_topologies(stiffness_case_heatmap(table, strain))) {
            out << fmt::format("class {}: axial {} ({:.3f}), shear {} ({:.3f})\n", code(c.topology),
                               to_string(c.axial), c.axial_ratio, to_string(c.shear), c.shear_ratio);
        }
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::MissingCase) throw;
        spdlog::warn("{}", e.what());
    }
    return kExitOk;
}

}  // namespace

Command parse_args(const std::vector<std::string>& argv) {
    Command cmd;
    CLI::App app{"Homogenized elastic properties of actuator lattices on uniform tilings", "lattice_homog"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    auto* list = app.add_subcommand("list-topologies", "Print the tiling catalog");
    list->add_option("--format", cmd.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    list->add_option("--out", cmd.out, "Write to this file instead of stdout");

    auto* gen = app.add_subcommand("gen-mesh", "Generate a clipped tiling and its beam mesh as JSON");
    add_lattice_options(gen, cmd, false);
    gen->add_option("--out", cmd.out, "Write to this file instead of stdout");

    auto* hom = app.add_subcommand("homogenize", "Homogenize one mesh and print its result record");
    add_lattice_options(hom, cmd, true);
    hom->add_option("--format", cmd.format, "json or csv")->check(CLI::IsMember({"csv", "json"}));
    hom->add_option("--out", cmd.out, "Write to this file instead of stdout");

    auto* study = app.add_subcommand("study", "Run a study matrix and export tables and plot data");
    study->add_option("--config", cmd.config, "Study config (.json or .toml)")->check(CLI::ExistingFile);
    study->add_option("--out", cmd.out, "Output directory (overrides the config)");
    study->add_option("--jobs", cmd.jobs, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    study->add_option("--format", cmd.format, "csv, or json to add results.json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* report = app.add_subcommand("report", "Recompute reports from an existing study directory");
    report->add_option("--out", cmd.out, "Study output directory");
    report->add_option("--config", cmd.config, "Study config, used to locate the output directory")
        ->check(CLI::ExistingFile);

    std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
    std::reverse(args.begin(), args.end());
    const bool list_default_format = std::find(args.begin(), args.end(), "--format") == args.end();
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        cmd.subcommand = Subcommand::Help;
        cmd.help_text = app.help();
        return cmd;
    } catch (const CLI::CallForAllHelp&) {
        cmd.subcommand = Subcommand::Help;
        cmd.help_text = app.help("", CLI::AppFormatMode::All);
        return cmd;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (list->parsed()) {
        cmd.subcommand = Subcommand::ListTopologies;
        if (list_default_format) cmd.format = "csv";
    } else if (gen->parsed()) {
        cmd.subcommand = Subcommand::GenMesh;
    } else if (hom->parsed()) {
        cmd.subcommand = Subcommand::Homogenize;
    } else if (study->parsed()) {
        cmd.subcommand = Subcommand::Study;
        if (list_default_format) cmd.format = "csv";
    } else {
        cmd.subcommand = Subcommand::Report;
    }
    if (cmd.subcommand == Subcommand::GenMesh || cmd.subcommand == Subcommand::Homogenize) parse_size(cmd.size);
    return cmd;
}

int run(const Command& cmd, std::ostream& out, std::ostream& err) {
    try {
        switch (cmd.subcommand) {
            case Subcommand::Help: out << cmd.help_text; return kExitOk;
            case Subcommand::ListTopologies: return list_topologies_cmd(cmd, out);
            case Subcommand::GenMesh: return gen_mesh_cmd(cmd, out);
            case Subcommand::Homogenize: return homogenize_cmd(cmd, out);
            case Subcommand::Study: return study_cmd(cmd, out);
            case Subcommand::Report: return report_cmd(cmd, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::IoError ? kExitIo : kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitDomain;
}

int main_entry(int argc, const char* const* argv) {
    auto logger = spdlog::stderr_logger_mt("lattice_homog");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("LATTICE_HOMOG_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string_view(env) != "off") {
            spdlog::warn("LATTICE_HOMOG_LOG='{}' is not a log level; using info", env);
        } else {
            spdlog::set_level(level);
        }
    }

    const std::vector<std::string> args(argv, argv + argc);
    Command cmd;
    try {
        cmd = parse_args(args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    }
    return run(cmd, std::cout, std::cerr);
}

}  // namespace lattice::cli
