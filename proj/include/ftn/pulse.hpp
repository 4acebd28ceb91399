#pragma once

#include <optional>

#include "ftn/linalg.hpp"

namespace ftn {

enum class PulseKind { Sinc, RootRaisedCosine };

/// Truncated, sampled, energy-normalized real even shaping pulse.
///
/// Samples cover t in [-span*T, span*T] at T/samples_per_T spacing, so
/// `samples.size() == 2*span*samples_per_T + 1` and the pulse peak sits at
/// index `center()`. The discrete energy sum(h^2)*dt is 1.
struct PulseShape {
    PulseKind kind = PulseKind::RootRaisedCosine;
    double beta = 0.0;
    double T = 1.0;
    int span = 16;
    int samples_per_T = 16;
    VectorXd samples;
    /// Scale applied to the closed-form pulse to reach unit discrete energy.
    double scale = 1.0;

    double dt() const { return T / samples_per_T; }
    Index center() const { return static_cast<Index>(span) * samples_per_T; }
    /// Two-sided bandwidth W.
    double bandwidth() const { return (1.0 + beta) / T; }
    /// Normalized, truncated continuous-time pulse at arbitrary t.
    double value(double t) const;
};

/// Closed-form pulse shape (unit-energy untruncated form, not rescaled).
double pulse_closed_form(PulseKind kind, double beta, double T, double t);

PulseShape make_pulse(PulseKind kind, double beta, double T = 1.0, int span = 16,
                      int samples_per_T = 16);

/// |H(f)|^2 of the untruncated pulse, in seconds. Exactly zero for |f| > W/2.
double pulse_spectrum(const PulseShape& p, double f);

/// Discrete ISI description of an FTN link.
///
/// `g` holds the one-sided Ungerboeck taps g[0..K]; g[-k] = g[k] for the real
/// even pulses handled here. `f`, when present, holds causal minimum-phase
/// Forney taps with f * reverse(f) ~= g + epsilon*delta.
struct IsiChannel {
    VectorXd g;
    std::optional<VectorXd> f;
    double tau = 1.0;
    double T = 1.0;
    double epsilon = 0.0;
    std::optional<PulseShape> pulse;
    /// Set by isi_taps when |g[K]| > 1e-3, i.e. the tap window is too short.
    bool tail_warning = false;

    Index K() const { return g.size() - 1; }
    double tap(Index k) const
    {
        const Index a = k < 0 ? -k : k;
        return a < g.size() ? g(a) : 0.0;
    }
};

/// Number of one-sided lags needed to cover the full autocorrelation support.
Index full_support_taps(const PulseShape& p, double tau);

/// g[k] = integral h(t) h(t - k tau T) dt by inner products on the oversampled
/// grid, normalized so g[0] = 1. `K < 0` selects full_support_taps.
IsiChannel isi_taps(const PulseShape& p, double tau, Index K = -1);

/// Cell-centered grid xi_i = -1/2 + (i + 1/2)/G.
VectorXd xi_grid(Index G);

/// |H_fold(xi)|^2 sampled on a grid over [-1/2, 1/2]; units of seconds.
struct FoldedSpectrum {
    VectorXd xi;
    VectorXd values;
    double tau = 1.0;
    double T = 1.0;

    Index size() const { return values.size(); }
};

/// Direct evaluation of the folded spectrum (sum of shifted |H|^2 replicas).
double folded_value(const PulseShape& p, double tau, double xi);

FoldedSpectrum folded_spectrum(const PulseShape& p, double tau, Index G);

/// Folded spectrum rebuilt from taps: tau*T * sum_k g[k] exp(-j 2 pi k xi).
/// With g from isi_taps this realizes the same quantity as folded_spectrum.
FoldedSpectrum folded_from_taps(const IsiChannel& ch, const VectorXd& xi);

/// Largest tau for which the folded spectrum still has no aliasing, 1/(W T).
inline double aliasing_threshold(const PulseShape& p) { return 1.0 / (p.bandwidth() * p.T); }

} // namespace ftn
