#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ftn/linalg.hpp"

namespace ftn {

/// Unit-energy Gray-mapped alphabets. Bit value 0 maps to the positive
/// coordinate; BPSK index 0 is +1, QPSK index b0 + 2*b1 is ((+-1) + j(+-1))/sqrt(2).
enum class Modulation { BPSK, QPSK };

int bits_per_symbol(Modulation m);
std::vector<cd> alphabet(Modulation m);
/// Bit b (0-based) of alphabet entry `symbol_index`.
inline int symbol_bit(int symbol_index, int b) { return (symbol_index >> b) & 1; }

VectorXcd map_bits(Modulation m, std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> hard_bits(Modulation m, const VectorXcd& symbols);
std::vector<std::uint8_t> hard_bits_from_llr(std::span<const double> llr);

Modulation parse_modulation(std::string_view name);
std::string_view to_string(Modulation m);

} // namespace ftn
