#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "ftn/coded.hpp"
#include "ftn/errors.hpp"
#include "ftn/model.hpp"
#include "ftn/pulse.hpp"
#include "ftn/random.hpp"

using namespace ftn;

namespace {

double lse(double a, double b)
{
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

/// Shift-register encoder written directly from the generator taps.
Bits reference_encode(const Bits& info, unsigned g1, unsigned g2, int m)
{
    std::vector<int> reg(m + 1, 0);
    Bits out;
    Bits padded = info;
    padded.resize(info.size() + m, 0);
    for (auto b : padded) {
        for (int i = m; i > 0; --i) reg[i] = reg[i - 1];
        reg[0] = b;
        int o1 = 0, o2 = 0;
        for (int i = 0; i <= m; ++i) {
            o1 ^= ((g1 >> (m - i)) & 1) & reg[i];
            o2 ^= ((g2 >> (m - i)) & 1) & reg[i];
        }
        out.push_back(static_cast<std::uint8_t>(o1));
        out.push_back(static_cast<std::uint8_t>(o2));
    }
    return out;
}

} // namespace

TEST_CASE("(7,5) impulse response and memory")
{
    ConvCode c;
    CHECK(c.memory() == 2);
    CHECK(c.states() == 4);
    const Bits one{1};
    CHECK(cc_encode(one, c) == Bits{1, 1, 1, 0, 1, 1});
    CHECK(c.rate(8192) == doctest::Approx(8192.0 / 16388.0));
}

TEST_CASE("encoder matches a shift-register reference")
{
    Rng rng(4);
    for (auto [g1, g2] : {std::pair{07u, 05u}, std::pair{015u, 017u}, std::pair{023u, 035u}}) {
        ConvCode c{g1, g2};
        Bits info(40);
        for (auto& b : info) b = rng() & 1;
        CHECK(cc_encode(info, c) == reference_encode(info, g1, g2, c.memory()));
    }
}

TEST_CASE("log-map decoder equals codeword enumeration")
{
    Rng rng(21);
    ConvCode c;
    const Index K = 6;
    const Index n = 2 * (K + c.memory());
    std::vector<Bits> words;
    for (unsigned v = 0; v < (1u << K); ++v) {
        Bits info(K);
        for (Index i = 0; i < K; ++i) info[i] = (v >> i) & 1;
        words.push_back(cc_encode(info, c));
    }
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> llr(n);
        for (auto& l : llr) l = 3.0 * (static_cast<double>(rng() % 2001) / 1000.0 - 1.0);
        const auto out = cc_decode_siso(llr, c, K);

        const double ninf = -std::numeric_limits<double>::infinity();
        std::vector<double> info0(K, ninf), info1(K, ninf), c0(n, ninf), c1(n, ninf);
        for (unsigned v = 0; v < words.size(); ++v) {
            double lp = 0.0;
            for (Index i = 0; i < n; ++i) lp += (words[v][i] ? -0.5 : 0.5) * llr[i];
            for (Index i = 0; i < K; ++i) ((v >> i) & 1 ? info1[i] : info0[i]) = lse((v >> i) & 1 ? info1[i] : info0[i], lp);
            for (Index i = 0; i < n; ++i) (words[v][i] ? c1[i] : c0[i]) = lse(words[v][i] ? c1[i] : c0[i], lp);
        }
        for (Index i = 0; i < K; ++i) CHECK(out.info_posterior[i] == doctest::Approx(info0[i] - info1[i]).epsilon(1e-9));
        for (Index i = 0; i < n; ++i)
            CHECK(out.coded_extrinsic[i] == doctest::Approx(c0[i] - c1[i] - llr[i]).epsilon(1e-9));
    }
}

TEST_CASE("decoder rejects a mismatched LLR length")
{
    std::vector<double> llr(10, 0.0);
    CHECK_THROWS_AS(cc_decode_siso(llr, ConvCode{}, 8), InvalidArgument);
    CHECK_THROWS_AS(cc_encode(Bits{}, ConvCode{}), InvalidArgument);
}

TEST_CASE("interleaver is a seeded bijection")
{
    Interleaver a(1000, 5), b(1000, 5), c(1000, 6);
    CHECK(a.permutation() == b.permutation());
    CHECK(a.permutation() != c.permutation());
    std::set<Index> seen(a.permutation().begin(), a.permutation().end());
    CHECK(seen.size() == 1000);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 999);
    std::vector<double> v(1000);
    for (Index i = 0; i < 1000; ++i) v[i] = static_cast<double>(i);
    const auto w = a.apply<double>(v);
    CHECK(a.invert<double>(w) == v);
}

TEST_CASE("zero priors are the same as no priors")
{
    auto p = make_pulse(PulseKind::RootRaisedCosine, 0.5);
    auto ch = whiten_forney(isi_taps(p, 0.8));
    auto spec = forney_trellis(ch, Modulation::BPSK, 0.99);
    Rng rng(8);
    VectorXcd x(64);
    for (Index j = 0; j < x.size(); ++j) x(j) = rng() & 1 ? -1.0 : 1.0;
    const auto obs = forney_observation(ch, x, 0.5, rng);
    const std::vector<double> zeros(64, 0.0);
    const auto a = bcjr_full(spec, obs);
    const auto b = bcjr_full(spec, obs, zeros);
    for (Index i = 0; i < 64; ++i) CHECK(a.llr[i] == doctest::Approx(b.llr[i]).epsilon(1e-12));
}

TEST_CASE("extrinsic output is not clamped through a saturated prior")
{
    auto p = make_pulse(PulseKind::RootRaisedCosine, 0.5);
    auto ch = whiten_forney(isi_taps(p, 0.8));
    auto spec = forney_trellis(ch, Modulation::BPSK, 0.99);
    Rng rng(9);
    VectorXcd x(32);
    for (Index j = 0; j < x.size(); ++j) x(j) = rng() & 1 ? -1.0 : 1.0;
    const auto obs = forney_observation(ch, x, 0.05, rng);
    std::vector<double> priors(32);
    for (Index j = 0; j < 32; ++j) priors[j] = x(j).real() > 0 ? kLlrClamp : -kLlrClamp;
    const auto soft = bcjr_full(spec, obs, priors);
    for (Index j = 0; j < 32; ++j) CHECK(soft.llr[j] * x(j).real() > 10.0);
}

TEST_CASE("turbo loop decodes a clean frame and reports per-iteration errors")
{
    auto p = make_pulse(PulseKind::RootRaisedCosine, 0.3);
    auto ch = whiten_forney(isi_taps(p, 0.8), kDefaultNullRegularizer);
    auto spec = forney_trellis(ch, Modulation::BPSK, 0.99);
    TurboConfig cfg;
    cfg.iterations = 3;
    const Index K = 256;
    Interleaver pi(2 * (K + 2), 3);
    Rng rng(17);
    Bits info(K);
    for (auto& b : info) b = rng() & 1;
    const auto f = encode_frame(info, cfg, pi);
    const auto obs = forney_observation(ch, f.symbols, 0.1, rng);
    const auto r = turbo_equalize(obs, spec, cfg, pi, K, &info);
    REQUIRE(r.errors.size() == 3);
    CHECK(r.errors.back() == 0);
    CHECK(r.decoded == info);

    cfg.equalizer = EqualizerKind::MBcjr;
    cfg.M = 4;
    const auto rm = turbo_equalize(obs, spec, cfg, pi, K, &info);
    CHECK(rm.errors.back() == 0);

    cfg.iterations = 0;
    CHECK_THROWS_AS(turbo_equalize(obs, spec, cfg, pi, K), InvalidArgument);
}

TEST_CASE("turbo loop with the frequency-domain equalizer")
{
    auto p = make_pulse(PulseKind::RootRaisedCosine, 0.3);
    const double tau = 0.8;
    const auto ch = isi_taps(p, tau);
    TurboConfig cfg;
    cfg.iterations = 4;
    cfg.equalizer = EqualizerKind::Fde;
    const Index K = 254;
    Interleaver pi(2 * (K + 2), 3);
    const double N0 = 0.2;
    const auto s = fde_setting(ch, 2 * (K + 2), 2 * ch.K(), N0);
    Rng rng(5);
    Bits info(K);
    for (auto& b : info) b = rng() & 1;
    const auto f = encode_frame(info, cfg, pi);
    const auto obs = circulant_observation(s, ch, f.symbols, N0, rng);
    const auto r = turbo_equalize(obs, s, cfg, pi, K, &info);
    CHECK(r.errors.back() <= r.errors.front());
    CHECK(r.errors.back() == 0);
}

TEST_CASE("coded throughput bookkeeping")
{
    CHECK(coded_throughput_report(0.5, Modulation::BPSK, 2.0 / 3.0, 0.3).spectral_efficiency ==
          doctest::Approx(0.5 / (2.0 / 3.0 * 1.3)));
    CHECK(coded_throughput_report(0.5, Modulation::BPSK, 1.0, 0.3).spectral_efficiency == doctest::Approx(0.5 / 1.3));
    const auto q = coded_throughput_report(0.5, Modulation::QPSK, 0.8, 0.3, 256, 32);
    CHECK(q.cp_fraction == doctest::Approx(256.0 / 288.0));
    CHECK(q.spectral_efficiency == doctest::Approx(1.0 / (0.8 * 1.3) * 256.0 / 288.0));
    CHECK_THROWS_AS(coded_throughput_report(0.5, Modulation::BPSK, 1.2, 0.3), InvalidArgument);
}
