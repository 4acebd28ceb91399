#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ftn/eq_freq.hpp"
#include "ftn/eq_time.hpp"

namespace ftn {

using Bits = std::vector<std::uint8_t>;

/// Rate-1/2 feedforward convolutional code; generators in octal with the
/// most significant bit tapping the current input, e.g. (7, 5).
struct ConvCode {
    unsigned g1 = 07;
    unsigned g2 = 05;

    int memory() const;
    int states() const { return 1 << memory(); }
    double rate(Index info_len) const;
};

/// Terminated codeword: 2 * (info_len + memory) bits, pairs (g1, g2) per step.
Bits cc_encode(std::span<const std::uint8_t> bits, const ConvCode& code = {});

struct DecoderOutput {
    /// Extrinsic LLRs on the coded bits.
    std::vector<double> coded_extrinsic;
    /// Posterior LLRs on the information bits.
    std::vector<double> info_posterior;
};

/// Log-MAP decoder for the terminated code given coded-bit LLRs (ln P0/P1).
DecoderOutput cc_decode_siso(std::span<const double> coded_llr, const ConvCode& code, Index info_len);

/// Seeded uniform permutation; out[i] = in[perm[i]].
class Interleaver {
public:
    Interleaver(Index n, std::uint64_t seed);

    Index size() const { return static_cast<Index>(perm_.size()); }
    const std::vector<Index>& permutation() const { return perm_; }

    template <typename T>
    std::vector<T> apply(std::span<const T> in) const
    {
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) out[i] = in[perm_[i]];
        return out;
    }
    template <typename T>
    std::vector<T> invert(std::span<const T> in) const
    {
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) out[perm_[i]] = in[i];
        return out;
    }

private:
    std::vector<Index> perm_;
};

enum class EqualizerKind { BcjrFull, MBcjr, Fde };

struct TurboConfig {
    ConvCode code;
    std::uint64_t interleaver_seed = 1;
    int iterations = 10;
    EqualizerKind equalizer = EqualizerKind::BcjrFull;
    Index M = 64;
    Index lookahead = 2;
    Modulation constellation = Modulation::BPSK;
};

/// Coded frame ready for modulation: interleaved code bits mapped to symbols.
struct CodedFrame {
    Bits info;
    Bits coded;
    VectorXcd symbols;
};

CodedFrame encode_frame(std::span<const std::uint8_t> info, const TurboConfig& cfg, const Interleaver& pi, double Es = 1.0);

struct TurboResult {
    Bits decoded;
    /// Bit errors after each iteration (filled when truth is supplied).
    std::vector<Index> errors;
    std::vector<double> ber;
};

/// Time-domain equalizer variant: `spec` describes the trellis used on `obs`.
TurboResult turbo_equalize(const Observation& obs, const TrellisSpec& spec, const TurboConfig& cfg,
                           const Interleaver& pi, Index info_len, const Bits* truth = nullptr);

/// FDE variant.
TurboResult turbo_equalize(const Observation& obs, const FdeSetting& setting, const TurboConfig& cfg,
                           const Interleaver& pi, Index info_len, const Bits* truth = nullptr);

struct ThroughputReport {
    double code_rate = 0.5;
    int bits_per_symbol = 1;
    double tau = 1.0;
    double beta = 0.0;
    double cp_fraction = 1.0;
    double spectral_efficiency = 0.0;
};

/// bits/s/Hz = rate * bits_per_symbol / (tau (1 + beta)) * N / (N + cp_len).
ThroughputReport coded_throughput_report(double code_rate, Modulation m, double tau, double beta, Index N = 1,
                                         Index cp_len = 0);

} // namespace ftn
