#pragma once

// Experiment manifests. A manifest is a YAML mapping with a few top-level
// scalars and one section per simulator; any numeric field inside a section
// may be a single value or a list, and lists form the sweep grid. Unknown
// keys are rejected with their file position.

#include <string>

#include "msdpool/experiments.hpp"

namespace msdpool::config {

/// Environment variable naming the directory searched for relative manifest
/// paths that do not exist in the working directory.
inline constexpr const char* kConfigDirEnv = "MSDPOOL_CONFIG_DIR";

std::string resolve_config_path(const std::string& path);

/// Throws IoError when the file cannot be read, ValidationError on bad content.
experiments::SweepSpec load_sweep_spec(const std::string& path);

experiments::SweepSpec parse_sweep_spec(const std::string& text, const std::string& source_name = "<config>");

}  // namespace msdpool::config
