#include "ftn/pulse.hpp"

#include <cmath>
#include <numbers>

#include "ftn/errors.hpp"

namespace ftn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSingularGuard = 1e-8;

double sinc_pulse(double x)
{
    if (std::abs(x) < kSingularGuard) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

double rrc_pulse(double beta, double x)
{
    if (beta == 0.0) return sinc_pulse(x);
    if (std::abs(x) < kSingularGuard) return 1.0 - beta + 4.0 * beta / kPi;
    const double x_sing = 1.0 / (4.0 * beta);
    if (std::abs(std::abs(x) - x_sing) < kSingularGuard) {
        const double a = kPi / (4.0 * beta);
        return beta / std::sqrt(2.0) *
               ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    const double num = std::sin(kPi * x * (1.0 - beta)) + 4.0 * beta * x * std::cos(kPi * x * (1.0 + beta));
    const double den = kPi * x * (1.0 - 16.0 * beta * beta * x * x);
    return num / den;
}

} // namespace

double pulse_closed_form(PulseKind kind, double beta, double T, double t)
{
    const double x = t / T;
    const double v = kind == PulseKind::Sinc ? sinc_pulse(x) : rrc_pulse(beta, x);
    return v / std::sqrt(T);
}

double PulseShape::value(double t) const
{
    if (std::abs(t) > span * T * (1.0 + 1e-12)) return 0.0;
    return scale * pulse_closed_form(kind, beta, T, t);
}

PulseShape make_pulse(PulseKind kind, double beta, double T, int span, int samples_per_T)
{
    if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("make_pulse: roll-off beta must lie in [0, 1]");
    if (kind == PulseKind::Sinc && beta != 0.0) throw InvalidArgument("make_pulse: sinc pulse requires beta = 0");
    if (!(T > 0.0)) throw InvalidArgument("make_pulse: symbol time T must be positive");
    if (span < 4) throw InvalidArgument("make_pulse: span must be >= 4");
    if (samples_per_T < 8 || samples_per_T % 2 != 0)
        throw InvalidArgument("make_pulse: samples_per_T must be even and >= 8");

    PulseShape p;
    p.kind = kind;
    p.beta = beta;
    p.T = T;
    p.span = span;
    p.samples_per_T = samples_per_T;

    const Index n = 2 * static_cast<Index>(span) * samples_per_T + 1;
    p.samples.resize(n);
    const double dt = p.dt();
    for (Index i = 0; i < n; ++i) p.samples(i) = pulse_closed_form(kind, beta, T, (i - p.center()) * dt);
    const double energy = p.samples.squaredNorm() * dt;
    p.scale = 1.0 / std::sqrt(energy);
    p.samples *= p.scale;
    return p;
}

double pulse_spectrum(const PulseShape& p, double f)
{
    const double af = std::abs(f);
    const double T = p.T;
    if (p.kind == PulseKind::Sinc || p.beta == 0.0) {
        const double edge = 0.5 / T;
        if (af < edge) return T;
        if (af == edge) return 0.5 * T;
        return 0.0;
    }
    const double f1 = (1.0 - p.beta) / (2.0 * T);
    const double f2 = (1.0 + p.beta) / (2.0 * T);
    if (af <= f1) return T;
    if (af > f2) return 0.0;
    return 0.5 * T * (1.0 + std::cos(kPi * T / p.beta * (af - f1)));
}

Index full_support_taps(const PulseShape& p, double tau)
{
    return static_cast<Index>(std::ceil(2.0 * p.span / tau - 1e-9));
}

IsiChannel isi_taps(const PulseShape& p, double tau, Index K)
{
    if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("isi_taps: tau must lie in (0, 1]");
    if (K < 0) K = full_support_taps(p, tau);

    IsiChannel ch;
    ch.tau = tau;
    ch.T = p.T;
    ch.pulse = p;
    ch.g.resize(K + 1);

    const double dt = p.dt();
    const double ticks_per_symbol = tau * p.samples_per_T;
    const bool integer_shift = std::abs(ticks_per_symbol - std::round(ticks_per_symbol)) < 1e-9;
    const Index n = p.samples.size();
    for (Index k = 0; k <= K; ++k) {
        double acc = 0.0;
        if (integer_shift) {
            const Index shift = k * static_cast<Index>(std::llround(ticks_per_symbol));
            for (Index i = shift; i < n; ++i) acc += p.samples(i) * p.samples(i - shift);
        } else {
            const double lag = k * tau * p.T;
            for (Index i = 0; i < n; ++i) {
                const double t = (i - p.center()) * dt;
                acc += p.samples(i) * p.value(t - lag);
            }
        }
        ch.g(k) = acc * dt;
    }
    ch.g /= ch.g(0);
    ch.tail_warning = std::abs(ch.g(K)) > 1e-3;
    return ch;
}

VectorXd xi_grid(Index G)
{
    VectorXd xi(G);
    for (Index i = 0; i < G; ++i) xi(i) = -0.5 + (static_cast<double>(i) + 0.5) / static_cast<double>(G);
    return xi;
}

double folded_value(const PulseShape& p, double tau, double xi)
{
    if (std::abs(xi) > 0.5) return 0.0;
    const double period = 1.0 / (tau * p.T);
    const int nmax = static_cast<int>(std::ceil(0.5 * p.bandwidth() / period)) + 1;
    double acc = 0.0;
    for (int n = -nmax; n <= nmax; ++n) acc += pulse_spectrum(p, (xi + n) * period);
    return acc;
}

FoldedSpectrum folded_spectrum(const PulseShape& p, double tau, Index G)
{
    if (!is_power_of_two(G) || G < 256) throw InvalidArgument("folded_spectrum: G must be a power of two >= 256");
    if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("folded_spectrum: tau must lie in (0, 1]");
    FoldedSpectrum fs;
    fs.tau = tau;
    fs.T = p.T;
    fs.xi = xi_grid(G);
    fs.values.resize(G);
    for (Index i = 0; i < G; ++i) fs.values(i) = folded_value(p, tau, fs.xi(i));
    return fs;
}

FoldedSpectrum folded_from_taps(const IsiChannel& ch, const VectorXd& xi)
{
    FoldedSpectrum fs;
    fs.tau = ch.tau;
    fs.T = ch.T;
    fs.xi = xi;
    fs.values.resize(xi.size());
    for (Index i = 0; i < xi.size(); ++i) {
        double acc = ch.g(0);
        for (Index k = 1; k <= ch.K(); ++k) acc += 2.0 * ch.g(k) * std::cos(2.0 * kPi * k * xi(i));
        fs.values(i) = ch.tau * ch.T * acc;
    }
    return fs;
}

} // namespace ftn
