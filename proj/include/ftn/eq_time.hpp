#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ftn/constellation.hpp"
#include "ftn/model.hpp"

namespace ftn {

enum class TrellisMetric {
    /// White-noise models (Forney, orthogonal basis): -|y - sum f x|^2 / N0.
    Euclidean,
    /// Matched-filter output with colored noise: (2 Re(x* y) - x* G x) / N0.
    Ungerboeck,
};

constexpr Index kDefaultStateBudget = Index{1} << 20;
constexpr double kLlrClamp = 50.0;

/// ISI trellis description. State = last L symbols, most recent in the
/// least-significant digit.
struct TrellisSpec {
    VectorXcd taps;
    Modulation constellation = Modulation::BPSK;
    TrellisMetric metric = TrellisMetric::Euclidean;
    Index budget = kDefaultStateBudget;
    /// Symbol amplitude, sqrt(Es) for alphabets scaled to energy Es.
    double amplitude = 1.0;
    /// Euclidean taps beyond `taps` that Viterbi cancels per survivor
    /// (reduced-state sequence estimation). Ignored by the BCJR variants.
    VectorXcd survivor_taps;

    Index memory() const { return taps.size() - 1; }
    Index alphabet_size() const { return bits_per_symbol(constellation) == 1 ? 2 : 4; }
    /// |alphabet|^L; throws StateExplosion when this exceeds the budget.
    Index state_count() const;
    /// |alphabet|^L without the budget check (saturates at INT64_MAX).
    Index raw_state_count() const;
};

/// Forney trellis keeping taps up to `energy_fraction` of the factor energy.
TrellisSpec forney_trellis(const IsiChannel& whitened, Modulation m, double energy_fraction = 0.999);

/// Reduced-state Forney trellis: `memory` taps in the state, the rest of the
/// factor (up to `survivor_fraction` of its energy) cancelled per survivor.
TrellisSpec forney_trellis_reduced(const IsiChannel& whitened, Modulation m, Index memory,
                                   double survivor_fraction = 1.0 - 1e-7);

/// Ungerboeck trellis keeping g[0..L] covering `abs_fraction` of sum_k |g[k]|
/// (two-sided sum). Remaining taps are ignored (reduce-size by truncation).
TrellisSpec ungerboeck_trellis(const IsiChannel& ch, Modulation m, double abs_fraction = 0.99);

/// Trellis that matches an observation's own effective taps (Forney/OrthoBasis
/// white-noise models), optionally truncated by energy.
TrellisSpec observation_trellis(const Observation& obs, Modulation m, double energy_fraction = 1.0);

/// Number of symbols carried by an observation.
Index frame_symbols(const Observation& obs);

struct SoftInfo {
    /// Per-bit LLRs ln P(b=0)/P(b=1), clamped to +-kLlrClamp.
    std::vector<double> llr;
    bool extrinsic = true;
    /// A-posteriori LLRs (llr + prior when extrinsic).
    std::vector<double> posterior;
    /// Per-symbol a-posteriori probabilities, N x |alphabet| (bcjr_full only).
    MatrixXd symbol_app;
};

/// Uniform priors are expressed by an empty span.
using Priors = std::span<const double>;

/// Maximum-metric path. Exact MLSE for a Euclidean spec whose taps cover
/// the observation's channel.
VectorXcd viterbi_mlse(const TrellisSpec& spec, const Observation& obs, Priors priors = {});

/// Exact log-domain BCJR; returns extrinsic LLRs.
SoftInfo bcjr_full(const TrellisSpec& spec, const Observation& obs, Priors priors = {});

/// Reduced-search BCJR keeping the M best states per depth. For the
/// Ungerboeck metric the ranking adds a best-extension bonus over the next
/// `lookahead` trellis steps.
SoftInfo mbcjr(const TrellisSpec& spec, const Observation& obs, Priors priors, Index M, Index lookahead = 2);

/// ln sum_x |A|^-N exp(metric(x)) by the forward recursion with per-step
/// renormalization; metric(x) is the same path metric the equalizers use.
double sequence_log_evidence(const TrellisSpec& spec, const Observation& obs);

double clamp_llr(double v);

} // namespace ftn
