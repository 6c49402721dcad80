#pragma once

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "critns/criticality.hpp"
#include "critns/profiles.hpp"
#include "json.hpp"

namespace critns {

using json = nlohmann::json;

// Relative CFD1 paths in a config resolve against base_dir.
struct ConfigContext {
    std::filesystem::path base_dir;
};

// Throws ConfigError naming `where` for any key outside `allowed`.
void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where);

Grid grid_from_json(const json& j);
json grid_to_json(const Grid& g);
SolverConfig solver_from_json(const json& j);
json solver_to_json(const SolverConfig& c);
ScaleCore core_from_json(const json& j);
json core_to_json(const ScaleCore& c);
ScaleCoreSequence cores_from_json(const json& j);

// A field is either a CFD1 path or a generator object {"type": ...}; random generators need a seed.
RealField field_from_json(const json& j, const Grid* g, const ConfigContext& ctx);

// {"profiles": [{"field", "scale_cores"}], "remainder": {"field", "decay"}, "J"}. When profiles has
// J entries instead of J + 1, a zero weak-limit profile is prepended.
ProfileSystem profile_system_from_json(const json& j, const Grid* g, const ConfigContext& ctx);

json to_json(const PerturbationReport& r);
json to_json(const ThresholdReport& r);
json to_json(const SupNormReport& r);
json to_json(const SerrinReport& r);
json to_json(const WeakProbeTable& t);

const std::vector<std::string>& command_names();

// Runs one subcommand, writes artifacts and manifest.json under out_dir and returns the exit code:
// 0 success, 1 validation failure (error JSON on err), 2 non-finite numerics.
int run_command(const std::string& command, const json& config, const ConfigContext& ctx,
                const std::filesystem::path& out_dir, int threads, std::ostream& out, std::ostream& err);

// Manifest keys that legitimately differ between identical runs.
const std::vector<std::string>& volatile_manifest_keys();

}  // namespace critns
