#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "experiments.hpp"

#ifndef FTNLAB_VERSION
#define FTNLAB_VERSION "unknown"
#endif

namespace ftn::lab {

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp(std::chrono::system_clock::time_point t)
{
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace

RunReport run_to_directory(ExperimentConfig cfg, const RunOptions& opt)
{
    if (opt.seed) {
        cfg.seed = *opt.seed;
        cfg.echo["seed"] = *opt.seed;
    }
    const fs::path dir = opt.out_dir.empty() ? fs::path("out") / cfg.name : fs::path(opt.out_dir);
    const auto started = std::chrono::system_clock::now();
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<CsvTable> tables = run_experiment(cfg, opt.threads);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::create_directories(dir);
    RunReport report;
    report.elapsed_s = elapsed;
    for (const CsvTable& t : tables) {
        const fs::path p = dir / (t.name + ".csv");
        write_file(p, t.render());
        report.files.push_back(p.string());
    }
    nlohmann::ordered_json meta;
    meta["config"] = cfg.echo;
    meta["seed"] = cfg.seed;
    meta["version"] = FTNLAB_VERSION;
    meta["started_at"] = utc_timestamp(started);
    meta["elapsed_s"] = elapsed;
    const fs::path mp = dir / "meta.json";
    write_file(mp, meta.dump(2) + "\n");
    report.files.push_back(mp.string());
    return report;
}

std::optional<std::string> builtin_config_text(const std::string& name)
{
    for (const auto& b : builtin_configs())
        if (name == b.name) return std::string(b.text);
    return std::nullopt;
}

std::vector<CatalogEntry> list_experiments(const std::string& user_dir)
{
    std::vector<CatalogEntry> out;
    for (const auto& b : builtin_configs()) {
        ExperimentConfig cfg = parse_config(b.text, std::string(b.name) + ".toml");
        out.push_back({b.name, cfg.kind, cfg.description, "builtin"});
    }
    if (user_dir.empty()) return out;
    if (!fs::is_directory(user_dir)) throw ConfigError(user_dir, "config-dir", "not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(user_dir))
        if (e.is_regular_file() && e.path().extension() == ".toml") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        ExperimentConfig cfg = load_config(f.string());
        out.push_back({cfg.name, cfg.kind, cfg.description, f.string()});
    }
    return out;
}

ExperimentConfig resolve_config(const std::string& name_or_path)
{
    if (auto text = builtin_config_text(name_or_path)) {
        ExperimentConfig cfg = parse_config(*text, name_or_path + ".toml");
        cfg.name = name_or_path;
        return cfg;
    }
    return load_config(name_or_path);
}

} // namespace ftn::lab
