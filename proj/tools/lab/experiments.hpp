#pragma once

#include <string>
#include <variant>
#include <vector>

#include "config.hpp"

namespace ftn::lab {

/// One CSV artifact. Numbers are rendered with 9 significant digits.
struct CsvTable {
    using Cell = std::variant<double, std::int64_t, std::string>;

    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::initializer_list<Cell> cells);
    std::string render() const;
};

std::string format_number(double v);

/// Runs the experiment described by `cfg`; `threads` only changes speed.
std::vector<CsvTable> run_experiment(const ExperimentConfig& cfg, int threads = 1);

} // namespace ftn::lab
