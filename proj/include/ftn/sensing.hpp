#pragma once

#include <cstdint>
#include <vector>

#include "ftn/model.hpp"

namespace ftn {

/// Expected squared ambiguity function on a delay x Doppler grid.
///
/// Delays are in time units (multiples of the pulse sample spacing) and
/// Dopplers in cycles per time unit, so with T = 1 both are normalized to the
/// symbol period. `value(i, j)` belongs to delay(i), doppler(j) and is
/// normalized so the (0, 0) value is 1.
struct AmbiguityGrid {
    VectorXd delay;
    VectorXd doppler;
    MatrixXd value;
    /// Monte-Carlo standard error of each entry, same normalization.
    MatrixXd std_err;
    Index trials = 0;
    std::uint64_t seed = 0;
};

AmbiguityGrid expected_af(const FtnConfig& cfg, const VectorXd& delay_grid, const VectorXd& doppler_grid, Index trials,
                          std::uint64_t seed, int threads = 1);

/// sum_i r_i exp(-j 2 pi nu (t0 + i dt)) dt for every nu in the grid.
VectorXcd doppler_transform(const VectorXcd& r, double t0, double dt, const VectorXd& grid);

struct PeakOptions {
    /// Peaks with |doppler| <= exclusion_radius belong to the mainlobe.
    double exclusion_radius = 0.1;
    double threshold = 3.0;
    /// Half-width of the Doppler window whose median is the local floor.
    double neighborhood = 0.25;
};

struct AfPeak {
    double delay = 0.0;
    double doppler = 0.0;
    double value = 0.0;
    double local_median = 0.0;
};

/// Local maxima along each Doppler slice that exceed threshold x the local median.
std::vector<AfPeak> af_peak_report(const AmbiguityGrid& grid, const PeakOptions& opt = {});

struct Target {
    double doppler = 0.0;
    cd reflectivity{1.0, 0.0};
};

struct SensingScene {
    std::vector<Target> targets;
    /// One-sided noise PSD at the receiver.
    double N0 = 0.0;
    FtnConfig frame;

    void validate() const;
};

/// Symbol-rate matched-filter samples of the echo sum_k a_k s(t) exp(j 2 pi nu_k t)
/// plus white noise, for a known transmitted frame.
VectorXcd sense_echo(const SensingScene& scene, const SymbolFrame& frame, std::uint64_t noise_seed);

/// Matched-filter response of s(t) exp(j 2 pi nu t) at the symbol instants.
VectorXcd doppler_steering(const FtnConfig& cfg, const SymbolFrame& frame, double doppler);

struct DopplerEstimate {
    std::vector<double> doppler;
    std::vector<cd> amplitude;
    double residual = 0.0;
    /// Candidate pairs skipped because their steering vectors were collinear.
    Index skipped_pairs = 0;
};

enum class DopplerMethod {
    /// Joint least-squares fit of all Doppler-shifted copies (the ML estimate).
    LeastSquares,
    /// Strongest local maxima of the single-copy matched-filter response; each
    /// pick masks `mainlobe_cells` resolution cells 1/(N tau T) around it.
    MatchedFilter,
};

struct DopplerOptions {
    DopplerMethod method = DopplerMethod::LeastSquares;
    double mainlobe_cells = 4.0;
};

/// Doppler fit with scene.targets.size() (1 or 2) components: exhaustive
/// search over the candidate grid, then one parabolic refinement step per
/// Doppler, kept only if it improves the objective. Amplitudes are the joint
/// least-squares fit at the final Dopplers. Throws IllConditioned if every
/// candidate pair is collinear.
DopplerEstimate ml_doppler(const SensingScene& scene, const SymbolFrame& frame, const VectorXcd& received,
                           const VectorXd& candidates, const DopplerOptions& opt = {});

/// Per true target: whether its matched estimate lies within `tolerance`.
/// Estimates and targets are matched in order of decreasing magnitude.
std::vector<bool> recovered_targets(const std::vector<Target>& truth, const DopplerEstimate& est, double tolerance);

} // namespace ftn
