#pragma once

#include <cstdint>
#include <string_view>

#include "ftn/constellation.hpp"
#include "ftn/eq_time.hpp"
#include "ftn/pulse.hpp"

namespace ftn {

/// Midpoint rule over the xi grid: (1/(tau T)) mean log2(1 + Sx H_fold / N0), bits/s.
double constrained_capacity(const FoldedSpectrum& fs, const VectorXd& Sx, double N0);

/// Flat input PSD for transmit energy Es per T (power Es/T); each symbol then
/// carries tau * Es.
VectorXd flat_input(const FoldedSpectrum& fs, double Es);

struct WaterFilling {
    VectorXd Sx;
    double level = 0.0;
    double rate = 0.0;
};

/// Sx = max(0, level - N0 / H_fold) with mean(Sx) = total_power / T.
WaterFilling waterfill_input_psd(const FoldedSpectrum& fs, double total_power, double N0);

struct InfoRate {
    double bits_per_symbol = 0.0;
    double std_err = 0.0;
    Index trials = 0;
};

struct InfoRateOptions {
    Index n_symbols = 10000;
    Index n_trials = 10;
    std::uint64_t seed = 1;
    /// Forney taps kept up to this fraction of the factor energy.
    double energy_fraction = 0.999;
    Index budget = kDefaultStateBudget;
};

/// Simulation-based i.i.d. information rate of the whitened ISI channel at
/// per-symbol Es/N0: (1/n)[log2 p(y|x) - log2 p(y)] averaged over trials.
InfoRate info_rate_arnold_loeliger(const IsiChannel& whitened, Modulation m, double EsN0_dB,
                                   const InfoRateOptions& opt = {});

enum class RateMethod { Flat, WaterFill, ArnoldLoeliger };
std::string_view to_string(RateMethod m);

struct RatePoint {
    double tau = 1.0;
    double beta = 0.0;
    double EbN0_dB = 0.0;
    /// Energy per symbol over N0.
    double EsN0_dB = 0.0;
    /// bits/s with T = 1.
    double rate = 0.0;
    double bits_per_symbol = 0.0;
    RateMethod method = RateMethod::Flat;
    double mc_std_err = 0.0;
};

/// Operating point where the energy per bit (transmit power over bit rate)
/// equals Eb; rate 0 when Eb/N0 is below the achievable limit.
RatePoint gaussian_rate_at_ebn0(const PulseShape& p, double tau, double EbN0_dB, bool waterfill = false,
                                Index G = 4096);

/// Rate at fixed transmit power: `PTN0_dB` is the energy per T over N0.
RatePoint gaussian_rate_at_power(const PulseShape& p, double tau, double PTN0_dB, bool waterfill = false,
                                 Index G = 4096);

/// Finite-alphabet counterpart with Eb = Es / (bits per symbol); common random
/// numbers across the fixed-point iterations keep the search deterministic.
RatePoint al_rate_at_ebn0(const PulseShape& p, double tau, Modulation m, double EbN0_dB,
                          const InfoRateOptions& opt = {});

} // namespace ftn
