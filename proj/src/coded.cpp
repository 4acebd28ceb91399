#include "ftn/coded.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>

#include "ftn/errors.hpp"
#include "ftn/random.hpp"

namespace ftn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lse(double a, double b)
{
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

int parity(unsigned v) { return std::popcount(v) & 1; }

/// Register holds (input, s1, ..., sm) with the input in the top bit.
std::pair<int, int> code_outputs(const ConvCode& c, int state, int in)
{
    const int m = c.memory();
    const unsigned reg = (static_cast<unsigned>(in) << m) | static_cast<unsigned>(state);
    return {parity(reg & c.g1), parity(reg & c.g2)};
}

int next_state(const ConvCode& c, int state, int in)
{
    const int m = c.memory();
    return ((in << m) | state) >> 1;
}

} // namespace

int ConvCode::memory() const
{
    const unsigned g = g1 | g2;
    if (g == 0) throw InvalidArgument("ConvCode: generators must be nonzero");
    return std::bit_width(g) - 1;
}

double ConvCode::rate(Index info_len) const
{
    return static_cast<double>(info_len) / (2.0 * static_cast<double>(info_len + memory()));
}

Bits cc_encode(std::span<const std::uint8_t> bits, const ConvCode& code)
{
    if (bits.empty()) throw InvalidArgument("cc_encode: info_len must be >= 1");
    const int m = code.memory();
    Bits out;
    out.reserve(2 * (bits.size() + m));
    int state = 0;
    auto step = [&](int in) {
        const auto [a, b] = code_outputs(code, state, in);
        out.push_back(static_cast<std::uint8_t>(a));
        out.push_back(static_cast<std::uint8_t>(b));
        state = next_state(code, state, in);
    };
    for (auto b : bits) step(b & 1);
    for (int i = 0; i < m; ++i) step(0);
    return out;
}

DecoderOutput cc_decode_siso(std::span<const double> coded_llr, const ConvCode& code, Index info_len)
{
    const int m = code.memory();
    const int S = code.states();
    const Index steps = info_len + m;
    if (static_cast<Index>(coded_llr.size()) != 2 * steps)
        throw InvalidArgument("cc_decode_siso: expected 2 * (info_len + memory) LLRs");

    auto gamma = [&](Index j, int out_a, int out_b) {
        return (out_a ? -0.5 : 0.5) * coded_llr[2 * j] + (out_b ? -0.5 : 0.5) * coded_llr[2 * j + 1];
    };
    std::vector<double> alpha(static_cast<std::size_t>((steps + 1) * S), kNegInf);
    alpha[0] = 0.0;
    for (Index j = 0; j < steps; ++j) {
        const int max_in = j < info_len ? 1 : 0;
        for (int s = 0; s < S; ++s) {
            const double a = alpha[j * S + s];
            if (a == kNegInf) continue;
            for (int in = 0; in <= max_in; ++in) {
                const auto [oa, ob] = code_outputs(code, s, in);
                double& dst = alpha[(j + 1) * S + next_state(code, s, in)];
                dst = lse(dst, a + gamma(j, oa, ob));
            }
        }
    }

    DecoderOutput out;
    out.coded_extrinsic.assign(coded_llr.size(), 0.0);
    out.info_posterior.assign(static_cast<std::size_t>(info_len), 0.0);
    std::vector<double> beta(S, kNegInf), prev(S);
    beta[0] = 0.0;
    for (Index j = steps - 1; j >= 0; --j) {
        const int max_in = j < info_len ? 1 : 0;
        std::fill(prev.begin(), prev.end(), kNegInf);
        double in0 = kNegInf, in1 = kNegInf;
        double c[2][2] = {{kNegInf, kNegInf}, {kNegInf, kNegInf}};
        for (int s = 0; s < S; ++s) {
            for (int in = 0; in <= max_in; ++in) {
                const int ns = next_state(code, s, in);
                if (beta[ns] == kNegInf) continue;
                const auto [oa, ob] = code_outputs(code, s, in);
                const double g = gamma(j, oa, ob);
                prev[s] = lse(prev[s], g + beta[ns]);
                const double a = alpha[j * S + s];
                if (a == kNegInf) continue;
                const double v = a + g + beta[ns];
                (in ? in1 : in0) = lse(in ? in1 : in0, v);
                c[0][oa] = lse(c[0][oa], v);
                c[1][ob] = lse(c[1][ob], v);
            }
        }
        for (int k = 0; k < 2; ++k) {
            out.coded_extrinsic[2 * j + k] = clamp_llr(c[k][0] - c[k][1] - coded_llr[2 * j + k]);
        }
        if (j < info_len) out.info_posterior[j] = clamp_llr(in0 - in1);
        double mx = kNegInf;
        for (double v : prev) mx = std::max(mx, v);
        for (auto& v : prev) v -= mx;
        beta.swap(prev);
    }
    return out;
}

Interleaver::Interleaver(Index n, std::uint64_t seed)
{
    if (n < 1) throw InvalidArgument("Interleaver: size must be >= 1");
    perm_.resize(n);
    for (Index i = 0; i < n; ++i) perm_[i] = i;
    // Fisher-Yates with an explicit draw so the permutation is identical on every platform.
    Rng rng(seed);
    for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(perm_[i], perm_[j]);
    }
}

CodedFrame encode_frame(std::span<const std::uint8_t> info, const TurboConfig& cfg, const Interleaver& pi, double Es)
{
    CodedFrame f;
    f.info.assign(info.begin(), info.end());
    f.coded = cc_encode(info, cfg.code);
    if (pi.size() != static_cast<Index>(f.coded.size()))
        throw InvalidArgument("encode_frame: interleaver size must equal the codeword length");
    if (f.coded.size() % bits_per_symbol(cfg.constellation) != 0)
        throw InvalidArgument("encode_frame: codeword length must be a multiple of bits per symbol");
    const Bits mixed = pi.apply<std::uint8_t>(f.coded);
    f.symbols = map_bits(cfg.constellation, mixed) * std::sqrt(Es);
    return f;
}

namespace {

TurboResult turbo_loop(const TurboConfig& cfg, const Interleaver& pi, Index info_len, const Bits* truth,
                       const std::function<std::vector<double>(std::span<const double>)>& equalize)
{
    if (cfg.iterations < 1) throw InvalidArgument("turbo_equalize: iterations must be >= 1");
    std::vector<double> priors;
    TurboResult r;
    for (int it = 0; it < cfg.iterations; ++it) {
        const std::vector<double> eq_ext = equalize(priors);
        const std::vector<double> coded_llr = pi.invert<double>(eq_ext);
        const DecoderOutput dec = cc_decode_siso(coded_llr, cfg.code, info_len);
        priors = pi.apply<double>(dec.coded_extrinsic);
        r.decoded = hard_bits_from_llr(dec.info_posterior);
        if (truth) {
            Index e = 0;
            for (Index i = 0; i < info_len; ++i) e += r.decoded[i] != (*truth)[i];
            r.errors.push_back(e);
            r.ber.push_back(static_cast<double>(e) / static_cast<double>(info_len));
        }
    }
    return r;
}

} // namespace

TurboResult turbo_equalize(const Observation& obs, const TrellisSpec& spec, const TurboConfig& cfg,
                           const Interleaver& pi, Index info_len, const Bits* truth)
{
    return turbo_loop(cfg, pi, info_len, truth, [&](std::span<const double> priors) {
        if (cfg.equalizer == EqualizerKind::MBcjr) return mbcjr(spec, obs, priors, cfg.M, cfg.lookahead).llr;
        if (cfg.equalizer == EqualizerKind::Fde)
            throw InvalidArgument("turbo_equalize: FDE needs an FdeSetting, not a trellis");
        return bcjr_full(spec, obs, priors).llr;
    });
}

TurboResult turbo_equalize(const Observation& obs, const FdeSetting& setting, const TurboConfig& cfg,
                           const Interleaver& pi, Index info_len, const Bits* truth)
{
    return turbo_loop(cfg, pi, info_len, truth, [&](std::span<const double> priors) {
        return fde_mmse(obs, setting, cfg.constellation, priors).soft.llr;
    });
}

ThroughputReport coded_throughput_report(double code_rate, Modulation m, double tau, double beta, Index N, Index cp_len)
{
    if (!(code_rate > 0.0 && code_rate <= 1.0)) throw InvalidArgument("coded_throughput_report: code rate must lie in (0, 1]");
    if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("coded_throughput_report: tau must lie in (0, 1]");
    if (N < 1 || cp_len < 0) throw InvalidArgument("coded_throughput_report: need N >= 1 and cp_len >= 0");
    ThroughputReport r;
    r.code_rate = code_rate;
    r.bits_per_symbol = bits_per_symbol(m);
    r.tau = tau;
    r.beta = beta;
    r.cp_fraction = static_cast<double>(N) / static_cast<double>(N + cp_len);
    r.spectral_efficiency = code_rate * r.bits_per_symbol / (tau * (1.0 + beta)) * r.cp_fraction;
    return r;
}

} // namespace ftn
