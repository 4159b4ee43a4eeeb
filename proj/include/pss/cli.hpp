#ifndef PSS_CLI_HPP
#define PSS_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pss/defaults.hpp"
#include "pss/grid.hpp"

namespace pss::cli {

// line is 0 when the problem is not tied to one line; field is
// "section.key" or empty.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line = 0, std::string field = {})
        : std::runtime_error(what), line(line), field(std::move(field)) {}
    std::size_t line;
    std::string field;
};

struct ChartSpec {
    std::vector<double> origin;
    std::vector<double> extent;
    std::vector<std::size_t> counts;
};

struct RunConfig {
    // [model]
    std::string model;  // camassa_holm | sine_gordon | igsge | flat | horocyclic | external
    double m = 0.5;
    double period = 20.0;
    std::size_t samples = 128;
    std::size_t steps = 200;
    double time = 2.0;
    double u0_mean = 0.2;
    double u0_amplitude = 0.1;
    double u0_mode = 1.0;
    double eta = 0.0;
    std::string kink = "static";
    double velocity = 0.0;
    std::vector<double> c{0.6, 0.8};
    std::string u_file, v_file, frame_file;

    // [chart]
    std::optional<ChartSpec> chart;

    // [solver]
    double phi0 = 0.0;
    std::vector<double> L0;  // row-major; empty means identity
    std::optional<NodeIndex> base;
    double gate_factor = defaults::gate_factor;
    double nondegeneracy = defaults::nondegeneracy;
    bool special_coordinates = false;
    std::vector<double> scalings;

    // [hierarchy]
    std::size_t order = 1;
    std::size_t order_cap = defaults::hierarchy_order_cap;
    std::vector<double> phi_init;
    bool periodic_seed = false;

    // [conservation]
    std::optional<std::size_t> time_axis;  // 1-based
    double drift_tolerance = 1e-4;
    std::string theta_file;

    // [converge]
    std::string converge_command = "solve-frame";
    std::string converge_metric = "closed_residual";
    std::size_t levels = 3;
    double order_floor = defaults::order_floor;

    // [output]
    std::string out_dir = "out";

    std::string source_text;
    std::filesystem::path source_dir;
};

RunConfig parse_config(const std::string& text, const std::filesystem::path& source_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// FNV-1a 64-bit, printed as 16 hex digits.
std::string config_hash(const std::string& text);

struct CommandContext {
    std::filesystem::path out_dir;
    std::size_t grid_scale = 1;
    bool write_files = true;
};

struct CommandResult {
    int exit_code = 0;
    std::map<std::string, double> metrics;
    std::vector<std::string> lines;
    std::vector<std::string> files;
};

CommandResult cmd_verify(const RunConfig& cfg, const CommandContext& ctx);
CommandResult cmd_solve(const RunConfig& cfg, const CommandContext& ctx);
CommandResult cmd_hierarchy(const RunConfig& cfg, const CommandContext& ctx);
CommandResult cmd_conserve(const RunConfig& cfg, const CommandContext& ctx);
CommandResult cmd_converge(const RunConfig& cfg, const CommandContext& ctx);

// Runs a command, prints its lines and writes manifest.json. Exit codes:
// 0 success, 1 gate or check failure, 2 configuration or usage error.
int run(const std::string& command, const std::filesystem::path& config_path,
        const std::optional<std::filesystem::path>& out_dir, std::size_t grid_scale, std::ostream& out,
        std::ostream& err);

} // namespace pss::cli

#endif // PSS_CLI_HPP
