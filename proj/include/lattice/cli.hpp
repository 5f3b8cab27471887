#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lattice::cli {

enum class Subcommand { ListTopologies, GenMesh, Homogenize, Study, Report, Help };

struct Command {
    Subcommand subcommand = Subcommand::Help;
    std::string topology;            // required by gen-mesh and homogenize
    std::string size = "750";        // "W" or "WxH", mm
    double edge = 50.0;              // mm
    std::string stiffness_case = "actuator-stiff";
    double strain = 0.01;
    double depth = 5.0;              // mm
    std::string boundary = "symmetry";
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<int> jobs;
    std::string format = "json";     // homogenize/list-topologies: json or csv
    std::string help_text;           // filled for Help
};

// Raised for malformed command lines; the message names the offending flag.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

/// argv[0] is the program name. Throws UsageError.
Command parse_args(const std::vector<std::string>& argv);

/// Executes the command, writing payloads to `out` and diagnostics to
/// `err`. Returns the process exit code.
int run(const Command& command, std::ostream& out, std::ostream& err);

/// parse_args + run with usage errors mapped to exit code 2. Configures the
/// stderr logger from LATTICE_HOMOG_LOG (trace, debug, info, warn, error,
/// off; default info).
int main_entry(int argc, const char* const* argv);

}  // namespace lattice::cli
