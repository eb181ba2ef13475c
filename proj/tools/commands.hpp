#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qrect/pointset.hpp"

namespace qrect::cli {

struct RunConfig {
    std::string command;
    std::filesystem::path input;
    std::filesystem::path output;
    std::filesystem::path out_dir = ".";
    GeneratorSpec generator;
    std::string family = "segment";
    int depth = 6;
    std::vector<std::string> coefficients{"beta_p:2"};
    int k = 1;
    std::uint64_t pair_budget = 2'000'000;
    int starts = 1;
    std::uint64_t seed = 0;
    int threads = 1;
    bool emit_svg = false;
    std::string suite = "all";
    std::size_t trials = 0;  // 0 selects the per-suite default
    int heis_n = 3;
    double p = 1.0;
    std::vector<double> eps_list{0.1, 0.03, 0.01, 0.003};
    double q = 1.0;
};

int cmd_gen(const RunConfig& cfg);
int cmd_cubes(const RunConfig& cfg);
int cmd_analyze(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);
int cmd_scaling(const RunConfig& cfg);

}  // namespace qrect::cli
