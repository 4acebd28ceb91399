#include "ftn/capacity.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ftn/errors.hpp"
#include "ftn/model.hpp"
#include "ftn/random.hpp"

namespace ftn {

namespace {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double v) { return 10.0 * std::log10(v); }

/// Positive root of s = c * R(s), 0 when none exists. Illinois regula falsi
/// on g(u) = u - log(c R(e^u)) keeps a bracket and needs few rate calls.
template <typename Rate>
double solve_operating_point(double c, double s_max, Rate&& rate)
{
    auto g = [&](double u) {
        const double r = c * rate(std::exp(u));
        return r > 0.0 ? u - std::log(r) : std::numeric_limits<double>::infinity();
    };
    double a = std::log(1e-2), b = std::log(s_max);
    double ga = g(a);
    if (ga >= 0.0) return 0.0;
    double gb = g(b);
    if (gb <= 0.0) return s_max;
    int side = 0;
    for (int it = 0; it < 100 && b - a > 1e-10; ++it) {
        const double u = std::isfinite(gb) ? b - gb * (b - a) / (gb - ga) : 0.5 * (a + b);
        const double gu = g(u);
        if (gu == 0.0) return std::exp(u);
        if (gu < 0.0) {
            a = u;
            ga = gu;
            if (side == -1) gb *= 0.5;
            side = -1;
        }
        else {
            b = u;
            gb = gu;
            if (side == 1) ga *= 0.5;
            side = 1;
        }
        if (std::abs(gu) < 1e-12) break;
    }
    return std::exp(std::abs(ga) < std::abs(gb) ? a : b);
}

} // namespace

double constrained_capacity(const FoldedSpectrum& fs, const VectorXd& Sx, double N0)
{
    if (Sx.size() != fs.size()) throw InvalidArgument("constrained_capacity: Sx must be sampled on the spectrum grid");
    if (!(N0 > 0.0)) throw InvalidArgument("constrained_capacity: N0 must be positive");
    if ((Sx.array() < 0.0).any()) throw InvalidArgument("constrained_capacity: Sx must be nonnegative");
    const double mean_log = (1.0 + Sx.array() * fs.values.array() / N0).log().mean() / std::numbers::ln2;
    return mean_log / (fs.tau * fs.T);
}

VectorXd flat_input(const FoldedSpectrum& fs, double Es)
{
    return VectorXd::Constant(fs.size(), Es / fs.T);
}

WaterFilling waterfill_input_psd(const FoldedSpectrum& fs, double total_power, double N0)
{
    if (!(total_power > 0.0)) throw InvalidArgument("waterfill_input_psd: total_power must be positive");
    if (!(N0 > 0.0)) throw InvalidArgument("waterfill_input_psd: N0 must be positive");
    if (!(fs.values.maxCoeff() > 0.0)) throw AllNull("waterfill_input_psd: folded spectrum is identically zero");

    const double P = total_power / fs.T;
    const ArrayXd inv = (fs.values.array() > 0.0).select(N0 / fs.values.array(), std::numeric_limits<double>::infinity());
    auto power_at = [&](double level) { return (level - inv).max(0.0).mean(); };

    double lo = 0.0, hi = inv.minCoeff() + P;
    while (power_at(hi) < P) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (power_at(mid) < P ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    WaterFilling wf;
    wf.level = 0.5 * (lo + hi);
    wf.Sx = (wf.level - inv).max(0.0).matrix();
    // Exact power constraint despite the finite bisection width.
    wf.Sx *= P / wf.Sx.mean();
    wf.rate = constrained_capacity(fs, wf.Sx, N0);
    return wf;
}

InfoRate info_rate_arnold_loeliger(const IsiChannel& whitened, Modulation m, double EsN0_dB, const InfoRateOptions& opt)
{
    if (opt.n_symbols < 1 || opt.n_trials < 1) throw InvalidArgument("info_rate_arnold_loeliger: need n_symbols, n_trials >= 1");
    TrellisSpec spec = forney_trellis(whitened, m, opt.energy_fraction);
    spec.budget = opt.budget;
    spec.state_count();
    spec.amplitude = std::sqrt(db_to_linear(EsN0_dB));
    const double N0 = 1.0;
    const auto alph = alphabet(m);

    std::vector<double> est(static_cast<std::size_t>(opt.n_trials));
    for (Index k = 0; k < opt.n_trials; ++k) {
        Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(k)));
        VectorXcd x(opt.n_symbols);
        for (Index j = 0; j < x.size(); ++j) x(j) = spec.amplitude * alph[rng() % alph.size()];
        Observation obs;
        obs.model = ObservationModel::Forney;
        obs.N0 = N0;
        obs.channel = whitened;
        obs.taps = spec.taps;
        obs.y = convolve<cd, cd>(spec.taps, x);
        double cond = 0.0;
        for (Index j = 0; j < obs.y.size(); ++j) {
            const cd n = complex_gaussian(rng, N0);
            obs.y(j) += n;
            cond -= std::norm(n) / N0;
        }
        const double evidence = sequence_log_evidence(spec, obs);
        est[k] = (cond - evidence) / (static_cast<double>(opt.n_symbols) * std::numbers::ln2);
    }
    InfoRate r;
    r.trials = opt.n_trials;
    double mean = 0.0;
    for (double v : est) mean += v;
    mean /= static_cast<double>(est.size());
    double var = 0.0;
    for (double v : est) var += (v - mean) * (v - mean);
    r.bits_per_symbol = mean;
    r.std_err = est.size() > 1 ? std::sqrt(var / static_cast<double>(est.size() - 1) / static_cast<double>(est.size())) : 0.0;
    return r;
}

std::string_view to_string(RateMethod m)
{
    switch (m) {
    case RateMethod::Flat: return "flat";
    case RateMethod::WaterFill: return "waterfill";
    case RateMethod::ArnoldLoeliger: return "arnold-loeliger";
    }
    return "?";
}

RatePoint gaussian_rate_at_ebn0(const PulseShape& p, double tau, double EbN0_dB, bool waterfill, Index G)
{
    const FoldedSpectrum fs = folded_spectrum(p, tau, G);
    // Bits per T at transmit energy es per T; Eb = Es / R.
    auto bits_per_T = [&](double es) {
        if (waterfill) return waterfill_input_psd(fs, es, 1.0).rate * p.T;
        return constrained_capacity(fs, flat_input(fs, es), 1.0) * p.T;
    };
    const double c = db_to_linear(EbN0_dB);
    double s_max = 1.0;
    while (s_max - c * bits_per_T(s_max) < 0.0) s_max *= 2.0;
    const double es = solve_operating_point(c, s_max, bits_per_T);

    RatePoint r;
    r.tau = tau;
    r.beta = p.beta;
    r.EbN0_dB = EbN0_dB;
    r.method = waterfill ? RateMethod::WaterFill : RateMethod::Flat;
    if (es > 0.0) {
        r.EsN0_dB = linear_to_db(es * tau);
        r.rate = bits_per_T(es) / p.T;
        r.bits_per_symbol = r.rate * tau * p.T;
    }
    else {
        r.EsN0_dB = -std::numeric_limits<double>::infinity();
    }
    return r;
}

RatePoint gaussian_rate_at_power(const PulseShape& p, double tau, double PTN0_dB, bool waterfill, Index G)
{
    const FoldedSpectrum fs = folded_spectrum(p, tau, G);
    const double es = db_to_linear(PTN0_dB);
    const double bits = waterfill ? waterfill_input_psd(fs, es, 1.0).rate * p.T
                                  : constrained_capacity(fs, flat_input(fs, es), 1.0) * p.T;
    RatePoint r;
    r.tau = tau;
    r.beta = p.beta;
    r.method = waterfill ? RateMethod::WaterFill : RateMethod::Flat;
    r.EsN0_dB = linear_to_db(es * tau);
    r.rate = bits / p.T;
    r.bits_per_symbol = r.rate * tau * p.T;
    r.EbN0_dB = linear_to_db(es / bits);
    return r;
}

RatePoint al_rate_at_ebn0(const PulseShape& p, double tau, Modulation m, double EbN0_dB, const InfoRateOptions& opt)
{
    const IsiChannel w = whiten_forney(isi_taps(p, tau), -1.0);
    double last_err = 0.0;
    // Per-symbol energy es; Eb = es / (bits per symbol).
    auto rate_at = [&](double es) {
        const InfoRate ir = info_rate_arnold_loeliger(w, m, linear_to_db(es), opt);
        last_err = ir.std_err;
        return std::max(0.0, ir.bits_per_symbol);
    };
    const double c = db_to_linear(EbN0_dB);
    const double es = solve_operating_point(c, c * static_cast<double>(bits_per_symbol(m)), rate_at);

    RatePoint r;
    r.tau = tau;
    r.beta = p.beta;
    r.EbN0_dB = EbN0_dB;
    r.method = RateMethod::ArnoldLoeliger;
    if (es > 0.0) {
        r.EsN0_dB = linear_to_db(es);
        r.bits_per_symbol = rate_at(es);
        r.mc_std_err = last_err / (tau * p.T);
        r.rate = r.bits_per_symbol / (tau * p.T);
    }
    else {
        r.EsN0_dB = -std::numeric_limits<double>::infinity();
    }
    return r;
}

} // namespace ftn
