#include "ftn/eq_freq.hpp"

#include <cmath>
#include <numbers>

#include "ftn/capacity.hpp"
#include "ftn/errors.hpp"

namespace ftn {

FdeSetting fde_setting(const IsiChannel& ch, Index N, Index cp_len, double N0, double Es, bool allow_short_cp)
{
    if (N < 2) throw InvalidArgument("fde_setting: N must be >= 2");
    if (!(Es > 0.0) || N0 < 0.0) throw InvalidArgument("fde_setting: need Es > 0 and N0 >= 0");
    FdeSetting s;
    s.N = N;
    s.cp_len = cp_len;
    s.K = effective_half_length(ch);
    s.tau = ch.tau;
    s.T = ch.T;
    s.regularization = N0 / Es;
    s.Es = Es;
    if (cp_len < 2 * s.K && !allow_short_cp)
        throw CpTooShort("fde_setting: cp_len " + std::to_string(cp_len) + " < 2K = " + std::to_string(2 * s.K) +
                         "; the frame is not circulant");
    s.eigenvalues.resize(N);
    for (Index m = 0; m < N; ++m) {
        double acc = ch.g(0);
        for (Index k = 1; k <= ch.K(); ++k)
            acc += 2.0 * ch.g(k) * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * m % N) / static_cast<double>(N));
        s.eigenvalues(m) = acc;
    }
    return s;
}

FoldedSpectrum eigen_spectrum(const FdeSetting& s)
{
    FoldedSpectrum fs;
    fs.tau = s.tau;
    fs.T = s.T;
    fs.xi.resize(s.N);
    fs.values.resize(s.N);
    for (Index k = 0; k < s.N; ++k) {
        double xi = static_cast<double>(k) / static_cast<double>(s.N);
        if (xi >= 0.5) xi -= 1.0;
        fs.xi(k) = xi;
        fs.values(k) = std::max(0.0, s.eigenvalues(k)) * s.tau * s.T;
    }
    return fs;
}

Observation fde_frontend(const FtnConfig& cfg, const Waveform& signal, double N0, bool allow_short_cp)
{
    cfg.validate();
    Observation obs;
    obs.model = ObservationModel::FreqDomain;
    obs.N0 = N0;
    obs.channel = isi_taps(cfg.pulse, cfg.tau);
    const Index K = effective_half_length(obs.channel);
    if (cfg.cp_len < 2 * K && !allow_short_cp)
        throw CpTooShort("fde_frontend: cp_len " + std::to_string(cfg.cp_len) + " < 2K = " + std::to_string(2 * K));
    const Index shift = std::min(K, cfg.cp_len / 2);
    obs.y.resize(cfg.N);
    // Window n in [-shift, N - shift) of the frame, stored at position n mod N.
    for (Index n = -shift; n < cfg.N - shift; ++n)
        obs.y((n + cfg.N) % cfg.N) = matched_filter_sample(cfg.pulse, signal, signal.cp_len + n);
    return obs;
}

Observation circulant_observation(const FdeSetting& s, const IsiChannel& ch, const VectorXcd& x, double N0, Rng& rng)
{
    if (x.size() != s.N) throw InvalidArgument("circulant_observation: frame length differs from the setting");
    const ArrayXd lambda = s.eigenvalues.array().max(0.0);
    VectorXcd X = fft(x);
    X.array() *= lambda.cast<cd>();
    if (N0 > 0.0) {
        // Unit-variance DFT-domain noise has variance N per bin under the unnormalized FFT.
        for (Index k = 0; k < s.N; ++k)
            X(k) += complex_gaussian(rng, N0 * static_cast<double>(s.N)) * std::sqrt(lambda(k));
    }
    Observation obs;
    obs.model = ObservationModel::FreqDomain;
    obs.N0 = N0;
    obs.channel = ch;
    obs.y = ifft(X);
    return obs;
}

std::vector<double> gaussian_llrs(const VectorXcd& z, Modulation m, double mu, double var, double amplitude)
{
    const int bps = bits_per_symbol(m);
    std::vector<double> llr(static_cast<std::size_t>(z.size() * bps));
    const double coord = bps == 1 ? amplitude : amplitude / std::numbers::sqrt2;
    const double scale = var > 0.0 ? 4.0 * mu * coord / var : 0.0;
    for (Index n = 0; n < z.size(); ++n) {
        llr[n * bps] = clamp_llr(scale * z(n).real());
        if (bps == 2) llr[n * bps + 1] = clamp_llr(scale * z(n).imag());
    }
    return llr;
}

FdeResult fde_mmse(const Observation& obs, const FdeSetting& s, Modulation m, Priors priors)
{
    if (obs.y.size() != s.N) throw InvalidArgument("fde_mmse: observation length differs from the setting");
    const int bps = bits_per_symbol(m);
    if (!priors.empty() && static_cast<Index>(priors.size()) != s.N * bps)
        throw InvalidArgument("fde_mmse: prior length must equal N * bits_per_symbol");

    // Work in unit-energy symbol units: y / sqrt(Es), noise N0 / Es.
    const double amp = std::sqrt(s.Es);
    const double rho = s.regularization;
    const ArrayXd lambda = s.eigenvalues.array().max(0.0);

    VectorXcd xbar = VectorXcd::Zero(s.N);
    double vbar = 1.0;
    if (!priors.empty()) {
        double vsum = 0.0;
        for (Index n = 0; n < s.N; ++n) {
            if (bps == 1) {
                xbar(n) = std::tanh(0.5 * priors[n]);
            }
            else {
                xbar(n) = cd(std::tanh(0.5 * priors[2 * n]), std::tanh(0.5 * priors[2 * n + 1])) / std::numbers::sqrt2;
            }
            vsum += 1.0 - std::norm(xbar(n));
        }
        vbar = std::max(vsum / static_cast<double>(s.N), 1e-12);
    }

    VectorXcd R = fft(obs.y / amp);
    R -= (lambda.cast<cd>() * fft(xbar).array()).matrix();
    double gamma = 0.0;
    for (Index k = 0; k < s.N; ++k) {
        const double den = vbar * lambda(k) + rho;
        if (lambda(k) <= 0.0 || den <= 0.0) {
            R(k) = 0.0;
            continue;
        }
        R(k) /= den;
        gamma += lambda(k) / den;
    }
    gamma /= static_cast<double>(s.N);
    const VectorXcd r = ifft(R);

    FdeResult out;
    const double denom = 1.0 + (1.0 - vbar) * gamma;
    out.mu = gamma / denom;
    const VectorXcd z = (r + gamma * xbar) / denom;
    out.estimates = z * amp;
    const double var = out.mu - out.mu * out.mu;
    out.soft.llr = gaussian_llrs(z, m, out.mu, var, 1.0);
    out.soft.extrinsic = true;
    out.soft.posterior = out.soft.llr;
    for (std::size_t i = 0; i < priors.size(); ++i) out.soft.posterior[i] = clamp_llr(out.soft.llr[i] + priors[i]);
    return out;
}

Precoding evd_precode(const FoldedSpectrum& bins, double total_power, double N0)
{
    const WaterFilling wf = waterfill_input_psd(bins, total_power, N0);
    Precoding p;
    p.power = wf.Sx;
    double acc = 0.0;
    for (Index k = 0; k < bins.size(); ++k) acc += std::log2(1.0 + p.power(k) * bins.values(k) / N0);
    p.predicted_rate = acc / (static_cast<double>(bins.size()) * bins.tau * bins.T);
    return p;
}

} // namespace ftn
