#pragma once

#include <optional>
#include <vector>

#include "ftn/constellation.hpp"
#include "ftn/pulse.hpp"

namespace ftn {

enum class DistanceSearch { Auto, Exhaustive, BranchAndBound };

/// Minimum squared distance between BPSK sequences, normalized so the
/// single-symbol (antipodal) error event scores exactly 2.
struct DistanceReport {
    double tau = 1.0;
    double d2min = 2.0;
    /// Error sequence in units of half the antipodal step, entries in {-1, 0, 1}.
    std::vector<int> argmin;
    Index depth = 0;
    /// Search tree nodes visited.
    long long nodes = 0;
};

/// Auto runs the exhaustive search up to max_len 12 and branch-and-bound
/// beyond. Only BPSK is supported.
DistanceReport min_distance(const IsiChannel& ch, Modulation m, Index max_len,
                            DistanceSearch search = DistanceSearch::Auto);

struct MazoTable {
    std::vector<DistanceReport> rows;
    /// Grid point just above the first tau where d2min < 2 - tol.
    std::optional<double> limit;
};

/// Scans a descending tau grid and stops at the first distance loss.
MazoTable mazo_scan(const PulseShape& p, const std::vector<double>& tau_grid, Modulation m, Index max_len,
                    double tol = 0.01, bool stop_at_limit = true);

/// Descending grid hi, hi - step, ..., down to lo.
std::vector<double> descending_grid(double hi, double lo, double step);

} // namespace ftn
