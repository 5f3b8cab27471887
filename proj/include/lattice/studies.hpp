#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lattice/homogenize.hpp"

namespace lattice {

// The ten orthotropic tilings in catalog order.
std::vector<Topology> analyzed_topologies();

// Full experiment matrix: every topology x size x case x strain.
struct StudyConfig {
    std::vector<Topology> topologies = analyzed_topologies();
    std::vector<Bbox> sizes = {{750, 750}, {1000, 1000}, {1250, 1250}, {1500, 1500}};
    std::vector<double> strains = {0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.045};
    std::vector<StiffnessCase> cases = {StiffnessCase::make(StiffnessCaseId::ActuatorStiff),
                                        StiffnessCase::make(StiffnessCaseId::NodeStiff),
                                        StiffnessCase::make(StiffnessCaseId::EqualLow),
                                        StiffnessCase::make(StiffnessCaseId::EqualHigh)};
    LatticeParameters lattice;
    std::filesystem::path output_dir = "study_out";
    double report_strain = 0.01;  // strain at which rankings, heat maps and Poisson tables are taken
    int jobs = 0;                 // worker threads, 0 = hardware concurrency

    /// Throws Error(InvalidInput) for empty lists or bad values and
    /// Error(NotOrthotropic) when T4H is requested.
    void validate() const;
};

/// Keys (all optional): topologies, sizes_mm (numbers or [w, h] pairs),
/// strains, cases, wide_width_mm, narrow_width_mm, young_modulus_mpa,
/// poisson_ratio, depth_mm, edge_length_mm, subdivisions, boundary
/// ("symmetry" | "affine"), report_strain, output_dir, jobs.
/// The result is validated.
StudyConfig study_config_from_json(const nlohmann::json& doc);

/// Same schema as TOML (top-level keys). Throws Error(InvalidInput) on a
/// syntax error.
StudyConfig study_config_from_toml(std::string_view text);

/// Dispatches on the extension (.json or .toml). Relative output_dir values
/// are resolved against the config file's directory. Throws Error(IoError)
/// if the file cannot be read.
StudyConfig load_study_config(const std::filesystem::path& path);

struct ResultKey {
    Topology topology = Topology::S;
    Bbox bbox;
    StiffnessCaseId stiffness_case = StiffnessCaseId::ActuatorStiff;
    double strain = 0.0;

    bool operator<(const ResultKey& other) const;
    bool operator==(const ResultKey& other) const;
};

struct ResultEntry {
    ResultKey key;
    std::optional<ResultRecord> record;  // empty on failure
    std::string error;                    // "Kind: message" on failure
};

// Entries kept sorted by key; keys are unique.
class ResultTable {
public:
    /// Throws Error(InvalidInput) on a duplicate key.
    void insert(ResultEntry entry);

    const std::vector<ResultEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::size_t failure_count() const;

    const ResultRecord* find(const ResultKey& key) const;

    /// Successful records at `strain` for one topology and case, any size.
    std::vector<const ResultRecord*> select(Topology topology, StiffnessCaseId stiffness_case, double strain) const;

private:
    std::vector<ResultEntry> entries_;
};

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Runs the matrix on a worker pool. Per-key failures are recorded in the
/// table, never thrown. Content does not depend on the number of workers.
ResultTable run_study(const StudyConfig& config, const ProgressCallback& progress = {});

struct SizeSpread {
    Topology topology = Topology::S;
    StiffnessCaseId stiffness_case = StiffnessCaseId::ActuatorStiff;
    int sizes = 0;
    double e1 = 0.0;  // (max - min) / mean over sizes
    double e2 = 0.0;
    double g12 = 0.0;
    bool flagged = false;  // any spread above the threshold

    double max_spread() const;
};

/// One row per (topology, case) present at `strain`. Throws
/// Error(InsufficientData) if any such group has fewer than two sizes or the
/// table holds nothing at `strain`.
std::vector<SizeSpread> size_independence_report(const ResultTable& table, double strain = 0.01,
                                                 double threshold = 0.05);

struct RankEntry {
    Topology topology = Topology::S;
    double value = 0.0;             // MPa, averaged over sizes
    bool tied_with_next = false;    // within the tie tolerance of the next entry
};

struct RankReport {
    std::vector<RankEntry> e;  // by (E1 + E2) / 2, descending
    std::vector<RankEntry> g;  // by G12, descending
};

inline constexpr double kTieTolerance = 0.05;

/// Ranks the topologies present at (strain, case). Throws
/// Error(MissingTopology) if one of `required` has no record there, or if
/// nothing at all is present.
RankReport rank_report(const ResultTable& table, double strain, StiffnessCaseId stiffness_case,
                       std::span<const Topology> required = {});

/// True when `ranking` agrees with `expected` up to ties: every pair that
/// `expected` orders a > b either has value(a) > value(b) or lies within the
/// tie tolerance. Topologies missing from `ranking` count as disagreement.
bool ranking_agrees(std::span<const RankEntry> ranking, std::span<const Topology> expected,
                    double tolerance = kTieTolerance);

std::string format_ranking(std::span<const RankEntry> ranking);  // "T > T3S2 = S > ..."

struct CaseRatios {
    std::array<double, 4> e1{};  // indexed like kAllCases
    std::array<double, 4> e2{};
    std::array<double, 4> g12{};
};

struct Heatmap {
    std::vector<Topology> topologies;
    std::vector<CaseRatios> ratios;       // value(case) / value(ActuatorStiff), parallel to topologies
    std::vector<CaseRatios> absolute;     // MPa, averaged over sizes

    const CaseRatios& ratios_for(Topology topology) const;
};

/// Throws Error(MissingCase) unless every topology at `strain` has all four
/// stiffness cases.
Heatmap stiffness_case_heatmap(const ResultTable& table, double strain);

enum class Deformation { Stretching, Bending };
std::string_view to_string(Deformation d);

struct Classification {
    Topology topology = Topology::S;
    Deformation axial = Deformation::Bending;
    Deformation shear = Deformation::Bending;
    double axial_ratio = 0.0;  // E(EqualHigh) / E(EqualLow), E = (E1 + E2) / 2
    double shear_ratio = 0.0;  // G(EqualHigh) / G(EqualLow)
};

/// Stretching iff the EqualHigh / EqualLow modulus ratio lies in [4, 6].
Deformation classify_ratio(double ratio);
std::vector<Classification> classify_topologies(const Heatmap& heatmap);

struct ExportOptions {
    double report_strain = 0.01;
    std::string format = "csv";  // "json" adds results.json next to results.csv
    bool include_results = true; // false: reports only, no results/timings files
};

/// One line of results.csv, without the newline.
std::string_view results_csv_header();
std::string results_csv_row(const ResultEntry& entry);

/// Writes results.csv, timings.csv, ranking_E.txt,
/// ranking_G.txt, heatmap_E.csv, heatmap_G.csv, poisson.csv and
/// plot_data/{curves,bars,heatmaps}. Reports that the table cannot support
/// (missing cases or topologies) are skipped with a warning. All files except
/// timings.csv are byte-identical for identical tables. Returns the written
/// paths. Throws Error(EmptyTable) or Error(IoError).
std::vector<std::filesystem::path> export_study(const ResultTable& table, const std::filesystem::path& dir,
                                                const ExportOptions& options = {});

/// Reads back a results.csv written by export_study. Throws Error(IoError).
ResultTable read_results_csv(const std::filesystem::path& path);

}  // namespace lattice
