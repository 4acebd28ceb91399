#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ftn/capacity.hpp"
#include "ftn/errors.hpp"
#include "ftn/model.hpp"
#include "oracles.hpp"

using namespace ftn;
using oracle::bpsk_mutual_information;

TEST_CASE("zero input carries no information")
{
    const auto fs = folded_spectrum(make_pulse(PulseKind::RootRaisedCosine, 0.5), 0.8, 512);
    CHECK(constrained_capacity(fs, VectorXd::Zero(fs.size()), 1.0) == 0.0);
}

TEST_CASE("nyquist capacity reduces to the scalar formula")
{
    const auto fs = folded_spectrum(make_pulse(PulseKind::RootRaisedCosine, 0.5), 1.0, 1024);
    CHECK(constrained_capacity(fs, flat_input(fs, 10.0), 1.0) == doctest::Approx(std::log2(11.0)).epsilon(1e-4));
}

TEST_CASE("without aliasing capacity is the integral over the pulse spectrum")
{
    const auto p = make_pulse(PulseKind::RootRaisedCosine, 0.5);
    const auto fs = folded_spectrum(p, 0.6, 8192);
    const double es = 4.0;
    // Direct integral over physical frequency, midpoint rule on a finer grid.
    const int n = 200000;
    const double half = 0.5 / 0.6, df = 2.0 * half / n;
    double direct = 0.0;
    for (int i = 0; i < n; ++i) direct += std::log2(1.0 + es * pulse_spectrum(p, -half + (i + 0.5) * df)) * df;
    CHECK(constrained_capacity(fs, flat_input(fs, es), 1.0) == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("capacity quadrature converges")
{
    const auto p = make_pulse(PulseKind::RootRaisedCosine, 0.3);
    for (double tau : {0.9, 0.7}) {
        const auto a = folded_spectrum(p, tau, 2048);
        const auto b = folded_spectrum(p, tau, 4096);
        const double ca = constrained_capacity(a, flat_input(a, 10.0), 1.0);
        const double cb = constrained_capacity(b, flat_input(b, 10.0), 1.0);
        CHECK(std::abs(ca - cb) < 1e-4 * cb);
    }
}

TEST_CASE("beta = 0.5 capacity saturates at its own threshold 2/3")
{
    const auto p = make_pulse(PulseKind::RootRaisedCosine, 0.5);
    auto cap = [&](double tau) {
        const auto fs = folded_spectrum(p, tau, 4096);
        return constrained_capacity(fs, flat_input(fs, 10.0), 1.0);
    };
    CHECK(cap(0.9) > cap(1.0));
    CHECK(cap(0.7) > cap(0.8));
    CHECK(cap(0.6) == doctest::Approx(cap(0.65)).epsilon(1e-6));
    CHECK(cap(0.5) == doctest::Approx(cap(0.65)).epsilon(1e-6));
}

TEST_CASE("water-filling on a flat spectrum is uniform")
{
    const auto fs = folded_spectrum(make_pulse(PulseKind::RootRaisedCosine, 0.5), 1.0, 512);
    const auto wf = waterfill_input_psd(fs, 3.0, 0.5);
    CHECK((wf.Sx.array() - 3.0).abs().maxCoeff() < 1e-3);
}

TEST_CASE("two-bin water-filling matches the closed form")
{
    FoldedSpectrum fs;
    fs.tau = 1.0;
    fs.values.resize(2);
    fs.values << 1.0, 0.5;
    fs.xi = xi_grid(2);
    // Both bins active: level = P + (N0/1 + N0/0.5)/2.
    const double P = 5.0, N0 = 1.0;
    const auto wf = waterfill_input_psd(fs, P, N0);
    const double level = P + 1.5 * N0;
    CHECK(wf.level == doctest::Approx(level).epsilon(1e-9));
    CHECK(wf.Sx(0) == doctest::Approx(level - 1.0).epsilon(1e-9));
    CHECK(wf.Sx(1) == doctest::Approx(level - 2.0).epsilon(1e-9));
    // Low power: only the strong bin is filled.
    const auto low = waterfill_input_psd(fs, 0.25, N0);
    CHECK(low.Sx(1) == 0.0);
    CHECK(low.Sx(0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("water-filling dominates flat input and skips nulls")
{
    const auto p = make_pulse(PulseKind::RootRaisedCosine, 0.5);
    for (double tau : {1.0, 0.8, 0.6}) {
        const auto fs = folded_spectrum(p, tau, 1024);
        const auto wf = waterfill_input_psd(fs, 2.0, 1.0);
        CHECK(wf.Sx.mean() == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(wf.rate >= constrained_capacity(fs, flat_input(fs, 2.0), 1.0) - 1e-9);
        for (Index i = 0; i < fs.size(); ++i)
            if (fs.values(i) == 0.0) CHECK(wf.Sx(i) == 0.0);
    }
    FoldedSpectrum zero;
    zero.values = VectorXd::Zero(4);
    zero.xi = xi_grid(4);
    CHECK_THROWS_AS(waterfill_input_psd(zero, 1.0, 1.0), AllNull);
}

TEST_CASE("arnold-loeliger on an identity channel matches the bpsk integral")
{
    IsiChannel id;
    id.g = VectorXd::Ones(1);
    id.f = VectorXd::Ones(1);
    for (double es : {-2.0, 0.0, 2.0, 4.0}) {
        const auto r = info_rate_arnold_loeliger(id, Modulation::BPSK, es, {20000, 10, 5});
        CHECK(std::abs(r.bits_per_symbol - bpsk_mutual_information(es)) < 3.0 * r.std_err + 1e-3);
    }
    CHECK(bpsk_mutual_information(-10.0 * std::log10(2.0)) == doctest::Approx(0.486).epsilon(2e-3));
    CHECK(bpsk_mutual_information(0.0) == doctest::Approx(0.7214).epsilon(1e-3));
}

TEST_CASE("qpsk saturates at two bits")
{
    const auto w = whiten_forney(isi_taps(make_pulse(PulseKind::RootRaisedCosine, 0.5), 0.8));
    const auto r = info_rate_arnold_loeliger(w, Modulation::QPSK, 25.0, {2000, 3, 2});
    CHECK(r.bits_per_symbol == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("finite alphabet stays below the gaussian rate")
{
    const auto p = make_pulse(PulseKind::RootRaisedCosine, 0.5);
    const double tau = 0.8, es_db = 3.0;
    const auto w = whiten_forney(isi_taps(p, tau));
    const auto r = info_rate_arnold_loeliger(w, Modulation::QPSK, es_db, {4000, 6, 3});
    const auto fs = folded_spectrum(p, tau, 4096);
    // Per-symbol energy es means energy es / tau per T.
    const double gauss = constrained_capacity(fs, flat_input(fs, std::pow(10.0, es_db / 10.0) / tau), 1.0) * tau;
    CHECK(r.bits_per_symbol <= gauss + 3.0 * r.std_err);
}

TEST_CASE("arnold-loeliger is reproducible from its seed")
{
    const auto w = whiten_forney(isi_taps(make_pulse(PulseKind::RootRaisedCosine, 0.5), 0.8));
    const auto a = info_rate_arnold_loeliger(w, Modulation::BPSK, 2.0, {1000, 3, 9});
    const auto b = info_rate_arnold_loeliger(w, Modulation::BPSK, 2.0, {1000, 3, 9});
    CHECK(a.bits_per_symbol == b.bits_per_symbol);
}

TEST_CASE("eb/n0 bookkeeping")
{
    const auto p = make_pulse(PulseKind::RootRaisedCosine, 0.3);
    const auto r = gaussian_rate_at_ebn0(p, 1.0, 6.0);
    // Eb = Es / R at the operating point.
    CHECK(r.EsN0_dB - 10.0 * std::log10(r.bits_per_symbol) == doctest::Approx(6.0).epsilon(1e-6));
    CHECK(gaussian_rate_at_ebn0(p, 1.0, -2.0).rate == 0.0);
    CHECK(gaussian_rate_at_ebn0(p, 0.8, 6.0).rate > r.rate);
    CHECK(gaussian_rate_at_ebn0(p, 0.8, 6.0, true).rate >= gaussian_rate_at_ebn0(p, 0.8, 6.0).rate);
}

TEST_CASE("fixed-power rate is consistent with the Eb/N0 operating point")
{
    auto p = make_pulse(PulseKind::RootRaisedCosine, 0.3);
    const auto a = gaussian_rate_at_power(p, 0.8, 10.0);
    const auto b = gaussian_rate_at_ebn0(p, 0.8, a.EbN0_dB);
    CHECK(b.rate == doctest::Approx(a.rate).epsilon(1e-6));
    CHECK(b.EsN0_dB == doctest::Approx(a.EsN0_dB).epsilon(1e-6));
    CHECK(a.EsN0_dB == doctest::Approx(10.0 + 10.0 * std::log10(0.8)));
}
