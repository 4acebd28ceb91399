#pragma once

#include "ftn/eq_time.hpp"
#include "ftn/model.hpp"

namespace ftn {

/// Circulant view of a cyclic-prefixed frame: eigenvalues are the DFT of the
/// wrapped Ungerboeck taps, i.e. folded-spectrum samples / (tau T) at xi = k/N.
struct FdeSetting {
    Index N = 0;
    Index cp_len = 0;
    /// Tap half-length K the prefix has to cover.
    Index K = 0;
    VectorXd eigenvalues;
    /// N0 / Es.
    double regularization = 0.0;
    double Es = 1.0;
    double tau = 1.0;
    double T = 1.0;
};

/// Throws CpTooShort when cp_len < 2K (the two-sided response needs K prefix
/// symbols on each side of the receive window) unless `allow_short_cp`.
FdeSetting fde_setting(const IsiChannel& ch, Index N, Index cp_len, double N0, double Es = 1.0,
                       bool allow_short_cp = false);

/// Eigenvalues scaled back to folded-spectrum units at xi = k/N mapped to [-1/2, 1/2).
FoldedSpectrum eigen_spectrum(const FdeSetting& s);

/// Symbol-rate matched-filter window rotated so y = C x + noise exactly.
Observation fde_frontend(const FtnConfig& cfg, const Waveform& signal, double N0, bool allow_short_cp = false);

/// Circulant model drawn at symbol level: y = C x + n, cov(n) = N0 C.
Observation circulant_observation(const FdeSetting& s, const IsiChannel& ch, const VectorXcd& x, double N0, Rng& rng);

struct FdeResult {
    /// Biased MMSE estimates in symbol units.
    VectorXcd estimates;
    SoftInfo soft;
    /// Per-frame gain mu: z = mu x + e with E|e|^2 = Es (mu - mu^2).
    double mu = 0.0;
};

/// Linear MMSE in the DFT domain, X_k = Y_k / (lambda_k + N0/Es). With priors,
/// performs soft interference cancellation and returns extrinsic estimates.
/// LLRs use one averaged post-equalization SNR per frame.
FdeResult fde_mmse(const Observation& obs, const FdeSetting& s, Modulation m, Priors priors = {});

struct Precoding {
    VectorXd power;
    double predicted_rate = 0.0;
};

/// Water-filling over the N circulant bins; rate = sum log2(1 + p_k H_k / N0) / (N tau T).
Precoding evd_precode(const FoldedSpectrum& bins, double total_power, double N0);

/// Gaussian-approximation LLRs for z = mu x + e with E|e|^2 = var.
std::vector<double> gaussian_llrs(const VectorXcd& z, Modulation m, double mu, double var, double amplitude);

} // namespace ftn
