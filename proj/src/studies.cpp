#include "lattice/studies.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <toml++/toml.hpp>

#include "lattice/error.hpp"

namespace lattice {

namespace fs = std::filesystem;

namespace {

constexpr double kStrainMatch = 1e-12;

bool same_strain(double a, double b) { return std::abs(a - b) <= kStrainMatch; }

std::size_t case_index(StiffnessCaseId id) {
    for (std::size_t k = 0; k < std::size(kAllCases); ++k) {
        if (kAllCases[k] == id) return k;
    }
    return 0;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double m = mean(v);
    return m == 0.0 ? 0.0 : (*hi - *lo) / std::abs(m);
}

}  // namespace

std::vector<Topology> analyzed_topologies() {
    std::vector<Topology> out;
    for (const auto& info : list_topologies()) {
        if (info.orthotropic_rve) out.push_back(info.id);
    }
    return out;
}

void StudyConfig::validate() const {
    if (topologies.empty()) throw Error(ErrorKind::InvalidInput, "study needs at least one topology");
    if (sizes.empty()) throw Error(ErrorKind::InvalidInput, "study needs at least one size");
    if (strains.empty()) throw Error(ErrorKind::InvalidInput, "study needs at least one strain");
    if (cases.empty()) throw Error(ErrorKind::InvalidInput, "study needs at least one stiffness case");
    for (const Topology t : topologies) {
        if (!topology_info(t).orthotropic_rve) {
            throw Error(ErrorKind::NotOrthotropic,
                        fmt::format("{} is chiral and not orthotropic; it cannot be part of a study", code(t)));
        }
    }
    for (const Bbox& b : sizes) {
        if (!(b.width > 0.0 && b.height > 0.0)) {
            throw Error(ErrorKind::InvalidInput, fmt::format("size {} x {} must be positive", b.width, b.height));
        }
    }
    for (const double s : strains) load_case_strain(LoadCase::A, s);
    load_case_strain(LoadCase::A, report_strain);
    for (const StiffnessCase& c : cases) {
        if (!(c.actuator_width > 0.0 && c.node_width > 0.0)) {
            throw Error(ErrorKind::InvalidInput, "section widths must be positive");
        }
    }
    lattice.material.validate();
    if (!(lattice.depth > 0.0)) throw Error(ErrorKind::InvalidInput, "depth must be positive");
    if (!(lattice.edge_length > 0.0)) throw Error(ErrorKind::InvalidInput, "edge length must be positive");
    if (lattice.mesh.subdivisions < 1) throw Error(ErrorKind::InvalidInput, "subdivisions must be at least 1");
    if (jobs < 0) throw Error(ErrorKind::InvalidInput, "jobs must be non-negative");
}

StudyConfig study_config_from_json(const nlohmann::json& doc) {
    static const std::set<std::string> known = {
        "topologies", "sizes_mm",       "strains",       "cases",    "wide_width_mm", "narrow_width_mm",
        "young_modulus_mpa", "poisson_ratio", "depth_mm", "edge_length_mm", "subdivisions", "boundary",
        "report_strain", "output_dir",  "jobs"};
    if (!doc.is_object()) throw Error(ErrorKind::InvalidInput, "study config must be an object");
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) throw Error(ErrorKind::InvalidInput, fmt::format("unknown config key '{}'", key));
    }

    StudyConfig cfg;
    try {
        if (doc.contains("topologies")) {
            cfg.topologies.clear();
            for (const auto& t : doc.at("topologies")) cfg.topologies.push_back(parse_topology(t.get<std::string>()));
        }
        if (doc.contains("sizes_mm")) {
            cfg.sizes.clear();
            for (const auto& s : doc.at("sizes_mm")) {
                if (s.is_array()) {
                    if (s.size() != 2) throw Error(ErrorKind::InvalidInput, "a size pair must be [width, height]");
                    cfg.sizes.push_back({s[0].get<double>(), s[1].get<double>()});
                } else {
                    cfg.sizes.push_back({s.get<double>(), s.get<double>()});
                }
            }
        }
        if (doc.contains("strains")) cfg.strains = doc.at("strains").get<std::vector<double>>();
        const double wide = doc.value("wide_width_mm", 5.0);
        const double narrow = doc.value("narrow_width_mm", 1.0);
        std::vector<StiffnessCaseId> ids(std::begin(kAllCases), std::end(kAllCases));
        if (doc.contains("cases")) {
            ids.clear();
            for (const auto& c : doc.at("cases")) ids.push_back(parse_stiffness_case(c.get<std::string>()));
        }
        cfg.cases.clear();
        for (const auto id : ids) cfg.cases.push_back(StiffnessCase::make(id, wide, narrow));

        cfg.lattice.material.young_modulus = doc.value("young_modulus_mpa", cfg.lattice.material.young_modulus);
        cfg.lattice.material.poisson_ratio = doc.value("poisson_ratio", cfg.lattice.material.poisson_ratio);
        cfg.lattice.depth = doc.value("depth_mm", cfg.lattice.depth);
        cfg.lattice.edge_length = doc.value("edge_length_mm", cfg.lattice.edge_length);
        cfg.lattice.mesh.subdivisions = doc.value("subdivisions", cfg.lattice.mesh.subdivisions);
        if (doc.contains("boundary")) {
            const auto mode = doc.at("boundary").get<std::string>();
            if (mode == "symmetry") {
                cfg.lattice.homogenize.boundary = BoundaryMode::Symmetry;
            } else if (mode == "affine") {
                cfg.lattice.homogenize.boundary = BoundaryMode::Affine;
            } else {
                throw Error(ErrorKind::InvalidInput,
                            fmt::format("boundary must be 'symmetry' or 'affine', got '{}'", mode));
            }
        }
        cfg.report_strain = doc.value("report_strain", cfg.report_strain);
        if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
        cfg.jobs = doc.value("jobs", cfg.jobs);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, fmt::format("bad study config: {}", e.what()));
    }
    cfg.validate();
    return cfg;
}

StudyConfig study_config_from_toml(std::string_view text) {
    toml::table table;
    try {
        table = toml::parse(text);
    } catch (const toml::parse_error& e) {
        throw Error(ErrorKind::InvalidInput, fmt::format("bad TOML at line {}: {}", e.source().begin.line,
                                                         e.description()));
    }
    std::ostringstream json;
    json << toml::json_formatter{table};
    return study_config_from_json(nlohmann::json::parse(json.str()));
}

StudyConfig load_study_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read config '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    const std::string ext = path.extension().string();
    StudyConfig cfg;
    if (ext == ".toml") {
        cfg = study_config_from_toml(text);
    } else if (ext == ".json") {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::InvalidInput, fmt::format("bad JSON in '{}': {}", path.string(), e.what()));
        }
        cfg = study_config_from_json(doc);
    } else {
        throw Error(ErrorKind::InvalidInput,
                    fmt::format("config '{}' must end in .json or .toml", path.string()));
    }
    if (cfg.output_dir.is_relative()) cfg.output_dir = path.parent_path() / cfg.output_dir;
    return cfg;
}

bool ResultKey::operator<(const ResultKey& o) const {
    return std::tie(topology, bbox.width, bbox.height, stiffness_case, strain) <
           std::tie(o.topology, o.bbox.width, o.bbox.height, o.stiffness_case, o.strain);
}

bool ResultKey::operator==(const ResultKey& o) const { return !(*this < o) && !(o < *this); }

void ResultTable::insert(ResultEntry entry) {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), entry,
                                     [](const ResultEntry& a, const ResultEntry& b) { return a.key < b.key; });
    if (it != entries_.end() && it->key == entry.key) {
        throw Error(ErrorKind::InvalidInput,
                    fmt::format("duplicate result key {} {}x{} {} {}", code(entry.key.topology), entry.key.bbox.width,
                                entry.key.bbox.height, to_string(entry.key.stiffness_case), entry.key.strain));
    }
    entries_.insert(it, std::move(entry));
}

std::size_t ResultTable::failure_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [](const ResultEntry& e) { return !e.record; }));
}

const ResultRecord* ResultTable::find(const ResultKey& key) const {
    for (const auto& e : entries_) {
        if (e.record && e.key.topology == key.topology && e.key.bbox.width == key.bbox.width &&
            e.key.bbox.height == key.bbox.height && e.key.stiffness_case == key.stiffness_case &&
            same_strain(e.key.strain, key.strain)) {
            return &*e.record;
        }
    }
    return nullptr;
}

std::vector<const ResultRecord*> ResultTable::select(Topology topology, StiffnessCaseId stiffness_case,
                                                     double strain) const {
    std::vector<const ResultRecord*> out;
    for (const auto& e : entries_) {
        if (e.record && e.key.topology == topology && e.key.stiffness_case == stiffness_case &&
            same_strain(e.key.strain, strain)) {
            out.push_back(&*e.record);
        }
    }
    return out;
}

ResultTable run_study(const StudyConfig& config, const ProgressCallback& progress) {
    config.validate();
    struct Task {
        Topology topology;
        Bbox bbox;
        StiffnessCase stiffness_case;
    };
    std::vector<Task> tasks;
    for (const Topology t : config.topologies) {
        for (const Bbox& b : config.sizes) {
            for (const StiffnessCase& c : config.cases) tasks.push_back({t, b, c});
        }
    }

    std::vector<std::vector<ResultEntry>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
            const Task& task = tasks[k];
            auto& out = results[k];
            try {
                const auto records =
                    homogenize_sweep(task.topology, task.bbox, task.stiffness_case, config.strains, config.lattice);
                for (const auto& r : records) {
                    out.push_back({{task.topology, task.bbox, task.stiffness_case.id, r.strain}, r, {}});
                }
                spdlog::debug("{} {}x{} {}: {} DOF, {:.3f} s", code(task.topology), task.bbox.width,
                              task.bbox.height, to_string(task.stiffness_case.id), records.front().dof_count,
                              records.front().solve_seconds * static_cast<double>(records.size()));
            } catch (const std::exception& e) {
                spdlog::warn("{} {}x{} {} failed: {}", code(task.topology), task.bbox.width, task.bbox.height,
                             to_string(task.stiffness_case.id), e.what());
                for (const double s : config.strains) {
                    out.push_back({{task.topology, task.bbox, task.stiffness_case.id, s}, std::nullopt, e.what()});
                }
            }
            const std::size_t finished = ++done;
            if (progress) {
                const std::lock_guard lock(progress_mutex);
                progress(finished, tasks.size());
            }
        }
    };

    std::size_t jobs = config.jobs > 0 ? static_cast<std::size_t>(config.jobs)
                                       : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, std::max<std::size_t>(tasks.size(), 1));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ResultTable table;
    for (auto& batch : results) {
        for (auto& entry : batch) table.insert(std::move(entry));
    }
    return table;
}

double SizeSpread::max_spread() const { return std::max({e1, e2, g12}); }

std::vector<SizeSpread> size_independence_report(const ResultTable& table, double strain, double threshold) {
    std::map<std::pair<Topology, StiffnessCaseId>, std::vector<const ResultRecord*>> groups;
    for (const auto& e : table.entries()) {
        if (e.record && same_strain(e.key.strain, strain)) groups[{e.key.topology, e.key.stiffness_case}].push_back(&*e.record);
    }
    if (groups.empty()) {
        throw Error(ErrorKind::InsufficientData, fmt::format("no results at strain {}", strain));
    }
    std::vector<SizeSpread> out;
    for (const auto& [key, records] : groups) {
        if (records.size() < 2) {
            throw Error(ErrorKind::InsufficientData,
                        fmt::format("{} {} has {} size(s) at strain {}; at least two are needed", code(key.first),
                                    to_string(key.second), records.size(), strain));
        }
        std::vector<double> e1, e2, g;
        for (const auto* r : records) {
            e1.push_back(r->constants.e1);
            e2.push_back(r->constants.e2);
            g.push_back(r->constants.g12);
        }
        SizeSpread s{key.first, key.second, static_cast<int>(records.size()), spread(e1), spread(e2), spread(g)};
        s.flagged = s.max_spread() > threshold;
        out.push_back(s);
    }
    return out;
}

namespace {

std::vector<RankEntry> rank_by(std::vector<RankEntry> entries, double tolerance) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RankEntry& a, const RankEntry& b) { return a.value > b.value; });
    for (std::size_t k = 0; k + 1 < entries.size(); ++k) {
        const double hi = entries[k].value;
        entries[k].tied_with_next = hi > 0.0 && (hi - entries[k + 1].value) <= tolerance * hi;
    }
    return entries;
}

}  // namespace

RankReport rank_report(const ResultTable& table, double strain, StiffnessCaseId stiffness_case,
                       std::span<const Topology> required) {
    std::vector<RankEntry> e, g;
    std::set<Topology> present;
    for (const auto& info : list_topologies()) {
        const auto records = table.select(info.id, stiffness_case, strain);
        if (records.empty()) continue;
        std::vector<double> ev, gv;
        for (const auto* r : records) {
            ev.push_back(0.5 * (r->constants.e1 + r->constants.e2));
            gv.push_back(r->constants.g12);
        }
        e.push_back({info.id, mean(ev), false});
        g.push_back({info.id, mean(gv), false});
        present.insert(info.id);
    }
    for (const Topology t : required) {
        if (!present.contains(t)) {
            throw Error(ErrorKind::MissingTopology, fmt::format("{} has no {} result at strain {}", code(t),
                                                                to_string(stiffness_case), strain));
        }
    }
    if (present.empty()) {
        throw Error(ErrorKind::MissingTopology,
                    fmt::format("no {} results at strain {}", to_string(stiffness_case), strain));
    }
    return {rank_by(std::move(e), kTieTolerance), rank_by(std::move(g), kTieTolerance)};
}

bool ranking_agrees(std::span<const RankEntry> ranking, std::span<const Topology> expected, double tolerance) {
    std::map<Topology, double> value;
    for (const auto& r : ranking) value[r.topology] = r.value;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (!value.contains(expected[i])) return false;
        for (std::size_t j = i + 1; j < expected.size(); ++j) {
            if (!value.contains(expected[j])) return false;
            const double a = value[expected[i]];
            const double b = value[expected[j]];
            if (a < b && (b - a) > tolerance * b) return false;
        }
    }
    return true;
}

std::string format_ranking(std::span<const RankEntry> ranking) {
    std::string out;
    for (std::size_t k = 0; k < ranking.size(); ++k) {
        out += code(ranking[k].topology);
        if (k + 1 < ranking.size()) out += ranking[k].tied_with_next ? " = " : " > ";
    }
    return out;
}

const CaseRatios& Heatmap::ratios_for(Topology topology) const {
    for (std::size_t k = 0; k < topologies.size(); ++k) {
        if (topologies[k] == topology) return ratios[k];
    }
    throw Error(ErrorKind::MissingTopology, fmt::format("{} is not in the heat map", code(topology)));
}

Heatmap stiffness_case_heatmap(const ResultTable& table, double strain) {
    Heatmap map;
    for (const auto& info : list_topologies()) {
        std::array<std::vector<const ResultRecord*>, 4> by_case;
        bool any = false;
        for (std::size_t c = 0; c < 4; ++c) {
            by_case[c] = table.select(info.id, kAllCases[c], strain);
            any = any || !by_case[c].empty();
        }
        if (!any) continue;
        CaseRatios abs;
        for (std::size_t c = 0; c < 4; ++c) {
            if (by_case[c].empty()) {
                throw Error(ErrorKind::MissingCase, fmt::format("{} lacks the {} case at strain {}", code(info.id),
                                                                to_string(kAllCases[c]), strain));
            }
            std::vector<double> e1, e2, g;
            for (const auto* r : by_case[c]) {
                e1.push_back(r->constants.e1);
                e2.push_back(r->constants.e2);
                g.push_back(r->constants.g12);
            }
            abs.e1[c] = mean(e1);
            abs.e2[c] = mean(e2);
            abs.g12[c] = mean(g);
        }
        CaseRatios rel;
        for (std::size_t c = 0; c < 4; ++c) {
            rel.e1[c] = c == 0 ? 1.0 : abs.e1[c] / abs.e1[0];
            rel.e2[c] = c == 0 ? 1.0 : abs.e2[c] / abs.e2[0];
            rel.g12[c] = c == 0 ? 1.0 : abs.g12[c] / abs.g12[0];
        }
        map.topologies.push_back(info.id);
        map.ratios.push_back(rel);
        map.absolute.push_back(abs);
    }
    if (map.topologies.empty()) throw Error(ErrorKind::MissingCase, fmt::format("no results at strain {}", strain));
    return map;
}

std::string_view to_string(Deformation d) { return d == Deformation::Stretching ? "stretching" : "bending"; }

Deformation classify_ratio(double ratio) {
    return ratio >= 4.0 && ratio <= 6.0 ? Deformation::Stretching : Deformation::Bending;
}

std::vector<Classification> classify_topologies(const Heatmap& heatmap) {
    const std::size_t high = case_index(StiffnessCaseId::EqualHigh);
    const std::size_t low = case_index(StiffnessCaseId::EqualLow);
    std::vector<Classification> out;
    for (std::size_t k = 0; k < heatmap.topologies.size(); ++k) {
        const CaseRatios& a = heatmap.absolute[k];
        Classification c;
        c.topology = heatmap.topologies[k];
        c.axial_ratio = (a.e1[high] + a.e2[high]) / (a.e1[low] + a.e2[low]);
        c.shear_ratio = a.g12[high] / a.g12[low];
        c.axial = classify_ratio(c.axial_ratio);
        c.shear = classify_ratio(c.shear_ratio);
        out.push_back(c);
    }
    return out;
}

namespace {

class OutFile {
public:
    explicit OutFile(const fs::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw Error(ErrorKind::IoError, fmt::format("cannot write '{}'", path.string()));
    }

    template <typename... Args>
    void line(fmt::format_string<Args...> f, Args&&... args) {
        out_ << fmt::format(f, std::forward<Args>(args)...) << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw Error(ErrorKind::IoError, fmt::format("failed writing '{}'", path_.string()));
    }

private:
    fs::path path_;
    std::ofstream out_;
};

std::string csv_safe(std::string text) {
    std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
    return text;
}

constexpr std::string_view kResultsHeader =
    "topology,width_mm,height_mm,case,strain,status,c1111,c2222,c1122,c1212,e1,e2,g12,nu12,nu21,dof_count,error";

void write_results_csv(const ResultTable& table, const fs::path& path) {
    OutFile f(path);
    f.line("{}", kResultsHeader);
    for (const auto& e : table.entries()) f.line("{}", results_csv_row(e));
    f.close();
}

void write_results_json(const ResultTable& table, const fs::path& path) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& e : table.entries()) {
        if (e.record) {
            doc.push_back(to_json(*e.record));
        } else {
            doc.push_back({{"topology", std::string(code(e.key.topology))},
                           {"bbox_mm", {e.key.bbox.width, e.key.bbox.height}},
                           {"case", std::string(to_string(e.key.stiffness_case))},
                           {"strain", e.key.strain},
                           {"error", e.error}});
        }
    }
    OutFile f(path);
    f.line("{}", doc.dump(2));
    f.close();
}

void write_ranking(std::span<const RankEntry> ranking, std::string_view quantity, double strain,
                   const fs::path& path) {
    OutFile f(path);
    f.line("# {} ranking, actuator-stiff, strain {}; '=' joins values within {}%", quantity, strain,
           kTieTolerance * 100.0);
    f.line("{}", format_ranking(ranking));
    for (std::size_t k = 0; k < ranking.size(); ++k) {
        f.line("{},{},{}", k + 1, code(ranking[k].topology), ranking[k].value);
    }
    f.close();
}

std::string case_header() {
    std::string h;
    for (const auto id : kAllCases) h += fmt::format(",{}", to_string(id));
    return h;
}

std::string row(const std::array<double, 4>& v) { return fmt::format("{},{},{},{}", v[0], v[1], v[2], v[3]); }

}  // namespace

std::string_view results_csv_header() { return kResultsHeader; }

std::string results_csv_row(const ResultEntry& e) {
    const auto& k = e.key;
    if (!e.record) {
        return fmt::format("{},{},{},{},{},failed,,,,,,,,,,,{}", code(k.topology), k.bbox.width, k.bbox.height,
                           to_string(k.stiffness_case), k.strain, csv_safe(e.error));
    }
    const auto& r = *e.record;
    return fmt::format("{},{},{},{},{},ok,{},{},{},{},{},{},{},{},{},{},", code(k.topology), k.bbox.width,
                       k.bbox.height, to_string(k.stiffness_case), k.strain, r.tensor.c1111, r.tensor.c2222,
                       r.tensor.c1122, r.tensor.c1212, r.constants.e1, r.constants.e2, r.constants.g12,
                       r.constants.nu12, r.constants.nu21, r.dof_count);
}

std::vector<fs::path> export_study(const ResultTable& table, const fs::path& dir, const ExportOptions& options) {
    if (table.empty()) throw Error(ErrorKind::EmptyTable, "nothing to export");
    if (options.format != "csv" && options.format != "json") {
        throw Error(ErrorKind::InvalidInput, fmt::format("unknown export format '{}'", options.format));
    }
    std::error_code ec;
    fs::create_directories(dir / "plot_data" / "curves", ec);
    if (!ec) fs::create_directories(dir / "plot_data" / "heatmaps", ec);
    if (ec) throw Error(ErrorKind::IoError, fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

    std::vector<fs::path> written;
    auto track = [&written](const fs::path& p) {
        written.push_back(p);
        return p;
    };
    const double s = options.report_strain;

    if (options.include_results) {
        write_results_csv(table, track(dir / "results.csv"));
        if (options.format == "json") write_results_json(table, track(dir / "results.json"));
        OutFile f(track(dir / "timings.csv"));
        f.line("topology,width_mm,height_mm,case,strain,solve_seconds,dof_count");
        for (const auto& e : table.entries()) {
            if (!e.record) continue;
            f.line("{},{},{},{},{},{:.6f},{}", code(e.key.topology), e.key.bbox.width, e.key.bbox.height,
                   to_string(e.key.stiffness_case), e.key.strain, e.record->solve_seconds, e.record->dof_count);
        }
        f.close();
    }

    // strain curves, one file per topology
    std::set<Topology> topologies;
    for (const auto& e : table.entries()) {
        if (e.record) topologies.insert(e.key.topology);
    }
    for (const Topology t : topologies) {
        OutFile f(track(dir / "plot_data" / "curves" / fmt::format("{}.csv", code(t))));
        f.line("case,width_mm,height_mm,strain,e1,e2,g12,nu12,nu21");
        for (const auto& e : table.entries()) {
            if (!e.record || e.key.topology != t) continue;
            const auto& c = e.record->constants;
            f.line("{},{},{},{},{},{},{},{},{}", to_string(e.key.stiffness_case), e.key.bbox.width,
                   e.key.bbox.height, e.key.strain, c.e1, c.e2, c.g12, c.nu12, c.nu21);
        }
        f.close();
    }

    try {
        const RankReport ranks = rank_report(table, s, StiffnessCaseId::ActuatorStiff);
        write_ranking(ranks.e, "E", s, track(dir / "ranking_E.txt"));
        write_ranking(ranks.g, "G", s, track(dir / "ranking_G.txt"));
        OutFile f(track(dir / "plot_data" / "bars.csv"));
        f.line("topology,e1,e2,g12,nu12,nu21");
        for (const auto& info : list_topologies()) {
            const auto records = table.select(info.id, StiffnessCaseId::ActuatorStiff, s);
            if (records.empty()) continue;
            std::vector<double> e1, e2, g, n12, n21;
            for (const auto* r : records) {
                e1.push_back(r->constants.e1);
                e2.push_back(r->constants.e2);
                g.push_back(r->constants.g12);
                n12.push_back(r->constants.nu12);
                n21.push_back(r->constants.nu21);
            }
            f.line("{},{},{},{},{},{}", info.code, mean(e1), mean(e2), mean(g), mean(n12), mean(n21));
        }
        f.close();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw;
        spdlog::warn("rankings skipped: {}", e.what());
    }

    std::optional<Heatmap> heatmap;
    try {
        heatmap = stiffness_case_heatmap(table, s);
    } catch (const Error& e) {
        spdlog::warn("heat maps skipped: {}", e.what());
    }
    std::map<Topology, Classification> classes;
    if (heatmap) {
        for (const auto& c : classify_topologies(*heatmap)) classes[c.topology] = c;
        OutFile fe(track(dir / "heatmap_E.csv"));
        OutFile fg(track(dir / "heatmap_G.csv"));
        fe.line("topology,quantity{}", case_header());
        fg.line("topology,quantity{}", case_header());
        for (std::size_t k = 0; k < heatmap->topologies.size(); ++k) {
            const auto t = code(heatmap->topologies[k]);
            const auto& r = heatmap->ratios[k];
            fe.line("{},E1,{}", t, row(r.e1));
            fe.line("{},E2,{}", t, row(r.e2));
            fg.line("{},G12,{}", t, row(r.g12));
        }
        fe.close();
        fg.close();
        const std::pair<std::string_view, std::array<double, 4> CaseRatios::*> quantities[] = {
            {"E1", &CaseRatios::e1}, {"E2", &CaseRatios::e2}, {"G12", &CaseRatios::g12}};
        for (const auto& [name, member] : quantities) {
            OutFile f(track(dir / "plot_data" / "heatmaps" / fmt::format("{}.csv", name)));
            f.line("topology{}", case_header());
            for (std::size_t k = 0; k < heatmap->topologies.size(); ++k) {
                f.line("{},{}", code(heatmap->topologies[k]), row(heatmap->ratios[k].*member));
            }
            f.close();
        }
    }

    {
        OutFile f(track(dir / "poisson.csv"));
        f.line("topology,case,nu12,nu21,axial_class");
        for (const auto& info : list_topologies()) {
            for (const auto id : kAllCases) {
                const auto records = table.select(info.id, id, s);
                if (records.empty()) continue;
                std::vector<double> n12, n21;
                for (const auto* r : records) {
                    n12.push_back(r->constants.nu12);
                    n21.push_back(r->constants.nu21);
                }
                const auto it = classes.find(info.id);
                f.line("{},{},{},{},{}", info.code, to_string(id), mean(n12), mean(n21),
                       it == classes.end() ? std::string_view{} : to_string(it->second.axial));
            }
        }
        f.close();
    }
    return written;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

ResultTable read_results_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read '{}'", path.string()));
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader) {
        throw Error(ErrorKind::IoError, fmt::format("'{}' is not a results table", path.string()));
    }
    ResultTable table;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 17) {
            throw Error(ErrorKind::IoError, fmt::format("{}:{}: expected 17 fields, got {}", path.string(), line_no,
                                                        f.size()));
        }
        try {
            ResultEntry e;
            e.key = {parse_topology(f[0]), {std::stod(f[1]), std::stod(f[2])}, parse_stiffness_case(f[3]),
                     std::stod(f[4])};
            if (f[5] == "ok") {
                ResultRecord r;
                r.topology = e.key.topology;
                r.bbox = e.key.bbox;
                r.stiffness_case = e.key.stiffness_case;
                r.strain = e.key.strain;
                r.tensor = {std::stod(f[6]), std::stod(f[7]), std::stod(f[8]), std::stod(f[9])};
                r.constants = {std::stod(f[10]), std::stod(f[11]), std::stod(f[12]), std::stod(f[13]),
                               std::stod(f[14])};
                r.dof_count = std::stoul(f[15]);
                e.record = r;
            } else {
                e.error = f[16];
            }
            table.insert(std::move(e));
        } catch (const std::exception& ex) {
            throw Error(ErrorKind::IoError, fmt::format("{}:{}: {}", path.string(), line_no, ex.what()));
        }
    }
    return table;
}

}  // namespace lattice
