#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace ftn::lab {

struct RunOptions {
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

struct RunReport {
    std::vector<std::string> files;
    double elapsed_s = 0.0;
};

/// Runs `cfg` and writes <table>.csv files plus meta.json into opt.out_dir.
RunReport run_to_directory(ExperimentConfig cfg, const RunOptions& opt);

struct CatalogEntry {
    std::string name;
    ExperimentKind kind = ExperimentKind::Spectrum;
    std::string description;
    /// "builtin" or the file path.
    std::string source;
};

/// Bundled configs in catalog order, then *.toml files of `user_dir` sorted by name.
std::vector<CatalogEntry> list_experiments(const std::string& user_dir = "");

/// Raw text of a bundled config, if `name` is one.
std::optional<std::string> builtin_config_text(const std::string& name);

/// Bundled config name or a path to a TOML file.
ExperimentConfig resolve_config(const std::string& name_or_path);

/// Name/text pairs generated from configs/*.toml at build time.
struct BuiltinConfig {
    const char* name;
    const char* text;
};
const std::vector<BuiltinConfig>& builtin_configs();

} // namespace ftn::lab
