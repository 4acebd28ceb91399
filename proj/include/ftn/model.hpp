#pragma once

#include <cstdint>
#include <optional>

#include "ftn/constellation.hpp"
#include "ftn/pulse.hpp"
#include "ftn/random.hpp"

namespace ftn {

struct FtnConfig {
    PulseShape pulse;
    double tau = 1.0;
    Index N = 1;
    Modulation constellation = Modulation::BPSK;
    double Es = 1.0;
    Index cp_len = 0;

    /// Oversampling ticks between consecutive symbols (tau * samples_per_T).
    Index step() const;
    /// Throws InvalidArgument when a field is out of range or tau*samples_per_T
    /// is not an integer.
    void validate() const;
};

struct SymbolFrame {
    Modulation constellation = Modulation::BPSK;
    VectorXcd symbols;
    Index cp_len = 0;

    Index size() const { return symbols.size(); }
    /// Symbol sequence as transmitted: last cp_len symbols copied in front.
    VectorXcd with_prefix() const;
};

/// Draws i.i.d. uniform symbols scaled to E|x|^2 = cfg.Es; bits are returned
/// alongside so error counting does not need to demap.
struct RandomFrame {
    SymbolFrame frame;
    std::vector<std::uint8_t> bits;
};
RandomFrame random_frame(const FtnConfig& cfg, Rng& rng);

/// Oversampled baseband signal with the bookkeeping frontends need.
///
/// Symbol m of the transmitted (prefixed) sequence is centered at sample
/// `origin + m * step`; there is at least two pulse half-lengths of silence
/// before the first and after the last pulse.
struct Waveform {
    VectorXcd samples;
    Index origin = 0;
    Index step = 1;
    Index transmitted = 0;
    Index cp_len = 0;
    double dt = 1.0;
};

Waveform modulate(const FtnConfig& cfg, const SymbolFrame& frame);

/// Adds circularly symmetric complex Gaussian noise of per-sample variance
/// N0 / dt, so the continuous-time one-sided PSD is N0.
Waveform awgn(const Waveform& w, double N0, std::uint64_t seed);

enum class ObservationModel { Ungerboeck, Forney, OrthoBasis, FreqDomain };

/// Receiver observation.
///
/// Ungerboeck / FreqDomain: y has N entries, y = G x + colored noise.
/// Forney / OrthoBasis: y_j = sum_i taps[i] x_{j-i} + white noise for
/// j = 0 .. N - 1 + taps.size() - 1 (symbols outside the frame are zero).
struct Observation {
    ObservationModel model = ObservationModel::Ungerboeck;
    VectorXcd y;
    double N0 = 0.0;
    IsiChannel channel;
    /// Causal effective taps for the white-noise models.
    VectorXcd taps;
};

/// Matched-filter output at symbol index n of the transmitted sequence
/// (n may lie outside the frame; the signal there is silent).
cd matched_filter_sample(const PulseShape& p, const Waveform& w, Index n);

Observation mf_frontend(const FtnConfig& cfg, const Waveform& signal, double N0 = 0.0);

/// Minimum-phase spectral factor of g + epsilon*delta via the real cepstrum on
/// a 4G-point grid. A negative `epsilon` selects the default 1e-4 * g[0] when
/// the folded spectrum has nulls and 0 otherwise; epsilon == 0 with nulls throws
/// NullSpectrum.
IsiChannel whiten_forney(const IsiChannel& ch, double epsilon = 0.0);

constexpr double kDefaultNullRegularizer = 1e-4;

/// Minimum of the folded spectrum on a fine grid (closed form when the
/// originating pulse is known).
double folded_minimum(const IsiChannel& ch);

/// Whitened-matched-filter observation computed from the received waveform.
Observation forney_frontend(const FtnConfig& cfg, const IsiChannel& whitened, const Waveform& signal,
                            double N0 = 0.0);

/// Discrete-time Forney model z = f * x + w drawn directly at symbol level.
Observation forney_observation(const IsiChannel& whitened, const VectorXcd& x, double N0, Rng& rng);

struct OrthoBasisOptions {
    double beta_b = 0.25;
    int span = 16;
};

/// Projection onto tau*T-orthogonal RRC basis pulses of roll-off beta_b.
Observation ortho_basis_frontend(const FtnConfig& cfg, const Waveform& signal, double N0 = 0.0,
                                 const OrthoBasisOptions& opt = {});

/// Keeps the taps needed to reach `fraction` of the cumulative energy.
VectorXd truncate_energy(const VectorXd& taps, double fraction);

/// Smallest one-sided K such that sum_{k > K} |g[k]| <= tail.
Index effective_half_length(const IsiChannel& ch, double tail = 2e-4);

} // namespace ftn
