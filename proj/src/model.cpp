#include "ftn/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ftn/errors.hpp"

namespace ftn {

Index FtnConfig::step() const
{
    return static_cast<Index>(std::llround(tau * pulse.samples_per_T));
}

void FtnConfig::validate() const
{
    if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in (0, 1]");
    if (N < 1) throw InvalidArgument("N must be >= 1");
    if (cp_len < 0 || cp_len >= N) throw InvalidArgument("cp_len must satisfy 0 <= cp_len < N");
    if (!(Es > 0.0)) throw InvalidArgument("Es must be positive");
    const double ticks = tau * pulse.samples_per_T;
    if (std::abs(ticks - std::round(ticks)) > 1e-9) {
        std::ostringstream msg;
        msg << "tau * samples_per_T = " << ticks
            << " is not an integer; choose samples_per_T so that tau * samples_per_T is whole "
               "(e.g. a multiple of the denominator of tau)";
        throw InvalidArgument(msg.str());
    }
}

VectorXcd SymbolFrame::with_prefix() const
{
    VectorXcd out(cp_len + symbols.size());
    out.head(cp_len) = symbols.tail(cp_len);
    out.tail(symbols.size()) = symbols;
    return out;
}

RandomFrame random_frame(const FtnConfig& cfg, Rng& rng)
{
    RandomFrame rf;
    const int bps = bits_per_symbol(cfg.constellation);
    rf.bits.resize(static_cast<std::size_t>(cfg.N * bps));
    std::uniform_int_distribution<int> coin(0, 1);
    for (auto& b : rf.bits) b = static_cast<std::uint8_t>(coin(rng));
    rf.frame.constellation = cfg.constellation;
    rf.frame.cp_len = cfg.cp_len;
    rf.frame.symbols = map_bits(cfg.constellation, rf.bits) * std::sqrt(cfg.Es);
    return rf;
}

Waveform modulate(const FtnConfig& cfg, const SymbolFrame& frame)
{
    cfg.validate();
    if (frame.size() != cfg.N) throw InvalidArgument("modulate: frame length differs from cfg.N");
    const VectorXcd tx = frame.cp_len > 0 ? frame.with_prefix() : frame.symbols;
    const PulseShape& p = cfg.pulse;
    const Index half = p.center();

    Waveform w;
    w.step = cfg.step();
    w.origin = 2 * half;
    w.transmitted = tx.size();
    w.cp_len = frame.cp_len;
    w.dt = p.dt();
    w.samples = VectorXcd::Zero(w.origin + (tx.size() - 1) * w.step + 2 * half + 1);
    for (Index m = 0; m < tx.size(); ++m) {
        const Index start = w.origin + m * w.step - half;
        w.samples.segment(start, p.samples.size()) += tx(m) * p.samples.cast<cd>();
    }
    return w;
}

Waveform awgn(const Waveform& w, double N0, std::uint64_t seed)
{
    if (N0 < 0.0) throw InvalidArgument("awgn: N0 must be nonnegative");
    Waveform out = w;
    if (N0 == 0.0) return out;
    Rng rng(seed);
    const double variance = N0 / w.dt;
    for (Index i = 0; i < out.samples.size(); ++i) out.samples(i) += complex_gaussian(rng, variance);
    return out;
}

cd matched_filter_sample(const PulseShape& p, const Waveform& w, Index n)
{
    const Index half = p.center();
    const Index start = w.origin + n * w.step - half;
    const Index lo = std::max<Index>(0, -start);
    const Index hi = std::min<Index>(p.samples.size(), w.samples.size() - start);
    cd acc{0.0, 0.0};
    for (Index i = lo; i < hi; ++i) acc += w.samples(start + i) * p.samples(i);
    return acc * w.dt;
}

Observation mf_frontend(const FtnConfig& cfg, const Waveform& signal, double N0)
{
    cfg.validate();
    Observation obs;
    obs.model = ObservationModel::Ungerboeck;
    obs.N0 = N0;
    obs.channel = isi_taps(cfg.pulse, cfg.tau);
    obs.y.resize(cfg.N);
    for (Index n = 0; n < cfg.N; ++n) obs.y(n) = matched_filter_sample(cfg.pulse, signal, signal.cp_len + n);
    return obs;
}

double folded_minimum(const IsiChannel& ch)
{
    constexpr Index grid = 4096;
    const VectorXd xi = xi_grid(grid);
    if (ch.pulse) {
        double m = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < grid; ++i) m = std::min(m, folded_value(*ch.pulse, ch.tau, xi(i)));
        return m;
    }
    return folded_from_taps(ch, xi).values.minCoeff();
}

namespace {

Index factor_grid(const IsiChannel& ch)
{
    return 4 * next_power_of_two(std::max<Index>(256, 2 * ch.K() + 1));
}

VectorXcd spectrum_on_fft_grid(const VectorXd& taps, Index M)
{
    VectorXcd padded = VectorXcd::Zero(M);
    padded.head(taps.size()) = taps.cast<cd>();
    return fft(padded);
}

} // namespace

IsiChannel whiten_forney(const IsiChannel& ch, double epsilon)
{
    const double g0 = ch.g(0);
    const bool nulls = folded_minimum(ch) < 1e-9;
    if (epsilon < 0.0) epsilon = nulls ? kDefaultNullRegularizer * g0 : 0.0;
    if (nulls && epsilon == 0.0)
        throw NullSpectrum("whiten_forney: folded spectrum has nulls (tau < 1/(W T)); supply epsilon > 0");

    const Index M = factor_grid(ch);
    // S(xi_m) = sum_k g[k] e^{-j 2 pi k m / M} + epsilon, g conjugate-symmetric.
    VectorXd S(M);
    for (Index m = 0; m < M; ++m) {
        double acc = g0 + epsilon;
        for (Index k = 1; k <= ch.K(); ++k)
            acc += 2.0 * ch.g(k) * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * m % M) / M);
        S(m) = std::max(acc, 1e-3 * epsilon + 1e-15);
    }

    VectorXcd log_s = S.array().log().cast<cd>();
    VectorXcd cep = ifft(log_s);
    VectorXcd folded = VectorXcd::Zero(M);
    folded(0) = 0.5 * cep(0);
    for (Index n = 1; n < M / 2; ++n) folded(n) = cep(n);
    folded(M / 2) = 0.5 * cep(M / 2);
    VectorXcd F = fft(folded).array().exp();
    VectorXcd f_full = ifft(F);

    // Keep the minimum-phase factor up to the point where the remaining energy
    // is negligible.
    VectorXd f = f_full.head(M / 2).real();
    const double total = f.squaredNorm();
    double tail = 0.0;
    Index keep = f.size();
    while (keep > 1 && tail + f(keep - 1) * f(keep - 1) < 1e-14 * total) {
        tail += f(keep - 1) * f(keep - 1);
        --keep;
    }

    IsiChannel out = ch;
    out.epsilon = epsilon;
    out.f = f.head(keep);
    return out;
}

Observation forney_frontend(const FtnConfig& cfg, const IsiChannel& whitened, const Waveform& signal, double N0)
{
    if (!whitened.f) throw InvalidArgument("forney_frontend: channel has no Forney taps; call whiten_forney first");
    const VectorXd& f = *whitened.f;
    const Index M = 4 * next_power_of_two(4 * (f.size() + whitened.K()) + 64);

    // Anticausal whitening filter v with sum_k v_k e^{+j2 pi k xi} = 1 / conj(F(xi)).
    const VectorXcd F = spectrum_on_fft_grid(f, M);
    VectorXcd V = F.conjugate().cwiseInverse();
    VectorXcd v = fft(V) / static_cast<double>(M);
    const double total = v.head(M / 2).squaredNorm();
    Index keep = M / 2;
    double tail = 0.0;
    while (keep > 1 && tail + std::norm(v(keep - 1)) < 1e-14 * total) {
        tail += std::norm(v(keep - 1));
        --keep;
    }

    const Index out_len = cfg.N + f.size() - 1;
    VectorXcd mf(out_len + keep);
    for (Index n = 0; n < mf.size(); ++n) mf(n) = matched_filter_sample(cfg.pulse, signal, signal.cp_len + n);

    Observation obs;
    obs.model = ObservationModel::Forney;
    obs.N0 = N0;
    obs.channel = whitened;
    obs.taps = f.cast<cd>();
    obs.y.resize(out_len);
    for (Index n = 0; n < out_len; ++n) {
        cd acc{0.0, 0.0};
        for (Index k = 0; k < keep; ++k) acc += v(k) * mf(n + k);
        obs.y(n) = acc;
    }
    return obs;
}

Observation forney_observation(const IsiChannel& whitened, const VectorXcd& x, double N0, Rng& rng)
{
    if (!whitened.f) throw InvalidArgument("forney_observation: channel has no Forney taps");
    Observation obs;
    obs.model = ObservationModel::Forney;
    obs.N0 = N0;
    obs.channel = whitened;
    obs.taps = whitened.f->cast<cd>();
    obs.y = convolve<cd, cd>(obs.taps, x);
    if (N0 > 0.0)
        for (Index j = 0; j < obs.y.size(); ++j) obs.y(j) += complex_gaussian(rng, N0);
    return obs;
}

Observation ortho_basis_frontend(const FtnConfig& cfg, const Waveform& signal, double N0, const OrthoBasisOptions& opt)
{
    cfg.validate();
    const PulseShape& h = cfg.pulse;
    const double symbol_time = cfg.tau * h.T;
    if (!(1.0 / symbol_time > h.bandwidth()))
        throw InvalidArgument("ortho_basis_frontend: needs 1/(tau T) > W; no tau T-orthogonal wideband basis exists");
    const Index step = cfg.step();
    if (step % 2 != 0 || step < 8)
        throw InvalidArgument("ortho_basis_frontend: tau * samples_per_T must be even and >= 8 for the basis pulse grid");

    const PulseShape phi = make_pulse(PulseKind::RootRaisedCosine, opt.beta_b, symbol_time, opt.span, static_cast<int>(step));
    const Index n_phi = phi.samples.size();
    for (Index k = 1; k <= 4; ++k) {
        const Index shift = k * step;
        double acc = 0.0;
        for (Index i = shift; i < n_phi; ++i) acc += phi.samples(i) * phi.samples(i - shift);
        if (std::abs(acc * phi.dt()) > 1e-4)
            throw InvalidArgument("ortho_basis_frontend: basis pulse is not tau T-orthogonal within 1e-4");
    }

    // Cross-correlation taps c[m] = <h, phi(. - m tau T)>; symmetric in m.
    const Index max_lag = (h.center() + phi.center()) / step + 1;
    VectorXd c(max_lag + 1);
    for (Index m = 0; m <= max_lag; ++m) {
        double acc = 0.0;
        const Index shift = m * step;
        for (Index i = 0; i < n_phi; ++i) {
            const Index j = i - phi.center() + shift + h.center();
            if (j >= 0 && j < h.samples.size()) acc += phi.samples(i) * h.samples(j);
        }
        c(m) = acc * h.dt();
    }
    Index Kc = max_lag;
    double tail = 0.0;
    while (Kc > 0 && tail + std::abs(c(Kc)) <= 1e-4) {
        tail += std::abs(c(Kc));
        --Kc;
    }

    Observation obs;
    obs.model = ObservationModel::OrthoBasis;
    obs.N0 = N0;
    obs.channel = isi_taps(h, cfg.tau);
    obs.taps.resize(2 * Kc + 1);
    for (Index i = 0; i <= 2 * Kc; ++i) obs.taps(i) = c(std::abs(i - Kc));

    const Index out_len = cfg.N + 2 * Kc;
    obs.y.resize(out_len);
    const Index half = phi.center();
    for (Index j = 0; j < out_len; ++j) {
        const Index n = signal.cp_len + j - Kc;
        const Index start = signal.origin + n * signal.step - half;
        const Index lo = std::max<Index>(0, -start);
        const Index hi = std::min<Index>(n_phi, signal.samples.size() - start);
        cd acc{0.0, 0.0};
        for (Index i = lo; i < hi; ++i) acc += signal.samples(start + i) * phi.samples(i);
        obs.y(j) = acc * signal.dt;
    }
    return obs;
}

VectorXd truncate_energy(const VectorXd& taps, double fraction)
{
    const double total = taps.squaredNorm();
    double acc = 0.0;
    for (Index i = 0; i < taps.size(); ++i) {
        acc += taps(i) * taps(i);
        if (acc >= fraction * total) return taps.head(i + 1);
    }
    return taps;
}

Index effective_half_length(const IsiChannel& ch, double tail)
{
    double acc = 0.0;
    Index K = ch.K();
    while (K > 0 && acc + std::abs(ch.g(K)) <= tail) {
        acc += std::abs(ch.g(K));
        --K;
    }
    return K;
}

} // namespace ftn
