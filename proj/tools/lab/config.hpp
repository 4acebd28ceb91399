#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ftn/constellation.hpp"
#include "ftn/pulse.hpp"

namespace ftn::lab {

/// Invalid configuration; `where` is "file:line:column" when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string where, std::string field, const std::string& message);
    const std::string& where() const { return where_; }
    const std::string& field() const { return field_; }

private:
    std::string where_;
    std::string field_;
};

enum class ExperimentKind { Spectrum, Capacity, Rates, Mazo, BerTd, BerFd, Coded, SenseAf, SenseMl };

std::string_view to_string(ExperimentKind k);
/// Throws std::invalid_argument for unknown names.
ExperimentKind parse_kind(std::string_view name);
const std::vector<ExperimentKind>& all_kinds();

struct PulseParams {
    PulseKind kind = PulseKind::RootRaisedCosine;
    double beta = 0.3;
    int span = 16;
    int samples_per_T = 16;

    PulseShape make() const;
    std::string label() const;
};

struct SpectrumParams {
    std::vector<double> tau;
    Index points = 512;
};

struct CapacityParams {
    std::vector<double> tau;
    std::vector<double> EbN0_dB;
    /// Fixed transmit power rows: energy per T over N0.
    std::vector<double> PTN0_dB;
    std::vector<std::string> methods{"flat"};
    Index grid = 4096;
};

struct RatesParams {
    std::vector<double> tau;
    std::vector<double> EbN0_dB;
    /// Fixed per-symbol Es/N0 rows.
    std::vector<double> EsN0_dB;
    Modulation modulation = Modulation::QPSK;
    Index n_symbols = 10000;
    Index n_trials = 10;
    double energy_fraction = 0.999;
};

struct MazoParams {
    /// Entries "sinc" or "rrc:<beta>"; empty means the [pulse] table.
    std::vector<std::string> pulses;
    double tau_hi = 1.0;
    double tau_lo = 0.6;
    double step = 0.002;
    Index max_len = 14;
    double tolerance = 0.01;
    bool stop_at_limit = true;
};

struct BerTdParams {
    std::vector<double> tau;
    std::vector<double> EbN0_dB;
    Modulation modulation = Modulation::BPSK;
    std::string equalizer = "mlse";
    Index frame_len = 1000;
    Index frames = 100;
    double energy_fraction = 0.999;
    /// Reduced-state MLSE: taps kept in the state (-1: use energy_fraction only).
    Index memory = -1;
    Index M = 64;
};

struct BerFdParams {
    std::vector<double> tau;
    std::vector<double> EbN0_dB;
    Modulation modulation = Modulation::BPSK;
    Index N = 256;
    /// -1 selects the minimum 2K.
    Index cp_len = -1;
    Index frames = 100;
    /// Optional time-domain equalizer run on the same symbols ("" for none).
    std::string td_reference;
    double energy_fraction = 0.999;
    Index M = 64;
};

struct CodedParams {
    std::vector<double> tau;
    std::vector<double> EbN0_dB;
    Index info_len = 8192;
    Index iterations = 10;
    Index frames = 24;
    std::string equalizer = "bcjr";
    Index M = 64;
    double energy_fraction = 0.99;
};

struct SenseAfParams {
    std::vector<double> tau;
    Index N = 256;
    Index trials = 500;
    Modulation modulation = Modulation::QPSK;
    std::vector<double> delay{0.0};
    double doppler_min = -2.5;
    double doppler_max = 2.5;
    Index doppler_points = 2001;
    double threshold = 3.0;
    double exclusion = 0.1;
    double neighborhood = 0.25;
};

struct SenseMlParams {
    std::vector<double> tau;
    Index N = 1024;
    double N0 = 0.5;
    std::vector<double> dopplers{0.5, -0.4};
    std::vector<double> amplitudes{1.0, 0.15};
    Index runs = 100;
    Modulation modulation = Modulation::QPSK;
    double grid_min = -1.0;
    double grid_max = 1.0;
    Index grid_points = 201;
    std::vector<std::string> methods{"matched-filter", "least-squares"};
    double mainlobe_cells = 4.0;
    /// <= 0 selects half a grid cell.
    double tolerance = 0.0;
};

using ExperimentParams = std::variant<SpectrumParams, CapacityParams, RatesParams, MazoParams, BerTdParams,
                                      BerFdParams, CodedParams, SenseAfParams, SenseMlParams>;

struct ExperimentConfig {
    std::string name;
    std::string description;
    ExperimentKind kind = ExperimentKind::Spectrum;
    std::uint64_t seed = 1;
    PulseParams pulse;
    ExperimentParams params;
    /// Normalized echo of every setting, defaults included.
    nlohmann::ordered_json echo;

    bool stochastic() const;
};

/// Parses and validates a TOML config. `source` names the text in messages.
ExperimentConfig parse_config(std::string_view text, const std::string& source);
ExperimentConfig load_config(const std::string& path);

} // namespace ftn::lab
