#include "ftn/constellation.hpp"

#include <cmath>
#include <string>

#include "ftn/errors.hpp"

namespace ftn {

int bits_per_symbol(Modulation m) { return m == Modulation::BPSK ? 1 : 2; }

std::vector<cd> alphabet(Modulation m)
{
    if (m == Modulation::BPSK) return {cd{1.0, 0.0}, cd{-1.0, 0.0}};
    const double a = 1.0 / std::sqrt(2.0);
    return {cd{a, a}, cd{-a, a}, cd{a, -a}, cd{-a, -a}};
}

VectorXcd map_bits(Modulation m, std::span<const std::uint8_t> bits)
{
    const int bps = bits_per_symbol(m);
    if (bits.size() % static_cast<std::size_t>(bps) != 0)
        throw InvalidArgument("map_bits: bit count is not a multiple of bits per symbol");
    const auto points = alphabet(m);
    VectorXcd out(static_cast<Index>(bits.size() / bps));
    for (Index n = 0; n < out.size(); ++n) {
        int idx = 0;
        for (int b = 0; b < bps; ++b) idx |= (bits[static_cast<std::size_t>(n * bps + b)] & 1) << b;
        out(n) = points[static_cast<std::size_t>(idx)];
    }
    return out;
}

std::vector<std::uint8_t> hard_bits(Modulation m, const VectorXcd& symbols)
{
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(symbols.size() * bits_per_symbol(m)));
    for (Index n = 0; n < symbols.size(); ++n) {
        out.push_back(symbols(n).real() < 0.0 ? 1 : 0);
        if (m == Modulation::QPSK) out.push_back(symbols(n).imag() < 0.0 ? 1 : 0);
    }
    return out;
}

std::vector<std::uint8_t> hard_bits_from_llr(std::span<const double> llr)
{
    std::vector<std::uint8_t> out(llr.size());
    for (std::size_t i = 0; i < llr.size(); ++i) out[i] = llr[i] < 0.0 ? 1 : 0;
    return out;
}

Modulation parse_modulation(std::string_view name)
{
    if (name == "BPSK" || name == "bpsk") return Modulation::BPSK;
    if (name == "QPSK" || name == "qpsk") return Modulation::QPSK;
    throw InvalidArgument("unknown constellation '" + std::string(name) + "'");
}

std::string_view to_string(Modulation m) { return m == Modulation::BPSK ? "BPSK" : "QPSK"; }

} // namespace ftn
