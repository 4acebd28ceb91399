#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lab/experiments.hpp"
#include "lab/runner.hpp"

using namespace ftn;
using namespace ftn::lab;

namespace {

std::string error_of(const std::string& text)
{
    try {
        parse_config(text, "t.toml");
    }
    catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string field_of(const std::string& text)
{
    try {
        parse_config(text, "t.toml");
    }
    catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST_CASE("config errors name the field and position")
{
    const std::string bad_tau = "experiment = \"capacity\"\n[capacity]\ntau = [0.8, 1.2]\nEbN0_dB = [1.0]\n";
    CHECK(field_of(bad_tau) == "capacity.tau");
    CHECK(error_of(bad_tau).find("t.toml:3:") == 0);
    CHECK(error_of(bad_tau).find("1.2") != std::string::npos);

    CHECK(field_of("experiment = \"capacity\"\n[capacity]\ntau = [1.0]\nEbN0_dB = [1.0]\ncolor = 2\n") == "capacity.color");
    CHECK(field_of("experiment = \"capacity\"\nextra = 1\n[capacity]\ntau = [1.0]\nEbN0_dB = [1.0]\n") == "extra");
    CHECK(field_of("experiment = \"warp\"\n") == "experiment");
    CHECK(field_of("seed = 3\n") == "experiment");
    CHECK(field_of("experiment = \"capacity\"\n") == "capacity");
    CHECK(field_of("experiment = \"capacity\"\n[capacity]\nEbN0_dB = [1.0]\n") == "capacity.tau");
    CHECK(field_of("experiment = \"capacity\"\n[capacity]\ntau = \"fast\"\nEbN0_dB = [1.0]\n") == "capacity.tau");
    CHECK(field_of("experiment = \"ber-td\"\n[ber-td]\ntau = [0.8]\nEbN0_dB = [1.0]\nequalizer = \"zf\"\n") ==
          "ber-td.equalizer");
    CHECK(field_of("experiment = \"sense-af\"\n[sense-af]\ntau = [0.85]\n") == "sense-af.tau");
    CHECK(field_of("experiment = \"capacity\"\n[pulse]\nbeta = 2.0\n[capacity]\ntau = [1.0]\nEbN0_dB = [1.0]\n") ==
          "pulse.beta");
    CHECK(field_of("experiment = \"mazo\"\n[mazo]\npulses = [\"gauss\"]\n") == "mazo.pulses");
    CHECK(field_of("experiment = = 1\n") == "syntax");
}

TEST_CASE("defaults are echoed")
{
    const auto cfg = parse_config("experiment = \"ber-fd\"\n[ber-fd]\ntau = [0.8]\nEbN0_dB = [3]\n", "t.toml");
    CHECK(cfg.kind == ExperimentKind::BerFd);
    CHECK(cfg.seed == 1);
    CHECK(cfg.stochastic());
    const auto& p = std::get<BerFdParams>(cfg.params);
    CHECK(p.N == 256);
    CHECK(p.cp_len == -1);
    CHECK(cfg.echo["ber-fd"]["N"] == 256);
    CHECK(cfg.echo["pulse"]["beta"] == 0.3);
}

TEST_CASE("catalog lists bundled configs then user configs")
{
    const auto builtin = list_experiments();
    REQUIRE(builtin.size() == 7);
    CHECK(builtin.front().name == "fig1c-gaussian");
    CHECK(builtin.back().name == "fig3-two-target");
    for (const auto& e : builtin) CHECK(e.source == "builtin");

    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ftn_cli_catalog_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "b-mine.toml") << "experiment = \"spectrum\"\n[spectrum]\ntau = [0.7]\n";
    std::ofstream(dir / "a-mine.toml") << "experiment = \"mazo\"\ndescription = \"mine\"\n[mazo]\n";
    std::ofstream(dir / "notes.txt") << "ignored\n";
    const auto all = list_experiments(dir.string());
    REQUIRE(all.size() == 9);
    CHECK(all[7].name == "a-mine");
    CHECK(all[7].description == "mine");
    CHECK(all[8].name == "b-mine");
    CHECK(all[8].kind == ExperimentKind::Spectrum);
    fs::remove_all(dir);
}

TEST_CASE("bundled configs resolve by name")
{
    const auto cfg = resolve_config("coded-waterfall");
    CHECK(cfg.name == "coded-waterfall");
    CHECK(cfg.kind == ExperimentKind::Coded);
    CHECK_THROWS_AS(resolve_config("/nonexistent/x.toml"), ConfigError);
}

TEST_CASE("capacity table carries the documented columns")
{
    const auto cfg = parse_config("experiment = \"capacity\"\n[capacity]\ntau = [1.0, 0.8]\nEbN0_dB = [2.0, 4.0]\n", "t");
    const auto ts = run_experiment(cfg);
    REQUIRE(ts.size() == 1);
    for (const char* c : {"tau", "beta", "EbN0_dB", "rate", "method"})
        CHECK(std::find(ts[0].header.begin(), ts[0].header.end(), c) != ts[0].header.end());
    CHECK(ts[0].rows.size() == 4);
}

TEST_CASE("csv rendering quotes and formats")
{
    CsvTable t{"x", {"a", "b", "c"}, {}};
    t.add({1.0 / 3.0, std::int64_t{7}, std::string("p,q")});
    t.add({std::nan(""), std::int64_t{-1}, std::string("say \"hi\"")});
    CHECK(t.render() == "a,b,c\n0.333333333,7,\"p,q\"\nnan,-1,\"say \"\"hi\"\"\"\n");
    CHECK_THROWS(t.add({1.0}));
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
}

TEST_CASE("same seed gives the same payload and a new seed changes it")
{
    const std::string text = "experiment = \"ber-td\"\nseed = 5\n[ber-td]\ntau = [0.8]\nEbN0_dB = [2.0]\nframe_len = 300\n"
                             "frames = 5\nequalizer = \"bcjr\"\n";
    auto cfg = parse_config(text, "t");
    const auto a = run_experiment(cfg, 1)[0].render();
    CHECK(a == run_experiment(cfg, 3)[0].render());
    cfg.seed = 6;
    CHECK(a != run_experiment(cfg, 1)[0].render());
}

TEST_CASE("spectrum grid must suit the FFT")
{
    CHECK(field_of("experiment = \"spectrum\"\n[spectrum]\ntau = [0.8]\npoints = 300\n") == "spectrum.points");
    CHECK(field_of("experiment = \"spectrum\"\n[spectrum]\ntau = [0.8]\npoints = 128\n") == "spectrum.points");
}
