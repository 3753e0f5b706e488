#pragma once

#include <string>
#include <vector>

#include "popt/diffusion.hpp"

namespace popt {

/// One preset column of the comparison protocol.
struct ComparePreset {
    std::string label;
    OptimKind optimizer;
    SamplerKind sampler;
    LossKind loss;
    double lr;
    std::size_t default_epochs;
};

/// Group 1: the SGD family at lr 0.002; group 2: the AdamW family at
/// lr 0.0002, including the hyperbolic-loss variant.
std::vector<ComparePreset> compare_group_presets(int group);

/// Entry point behind main(): parses one subcommand (train, sample, bench,
/// embed, compare) and executes it. Returns 0 on success, 2 on usage or
/// configuration errors, 1 on runtime failures.
int run_command(int argc, const char* const* argv);

}  // namespace popt
