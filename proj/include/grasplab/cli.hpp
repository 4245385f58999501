#pragma once

#include <string>
#include <vector>

#include "grasplab/dataset.hpp"
#include "grasplab/model.hpp"
#include "grasplab/trainer.hpp"

namespace grasplab::cli {

// Everything a run can configure, loadable from a flat JSON file with
// key=value overrides on top. Unknown keys are rejected by name.
struct ExperimentConfig {
    ArchConfig arch;
    TrainConfig train;
    SynthConfig synth;
    std::uint64_t seed = 0;
};

ExperimentConfig load_experiment_config(const std::string& config_path,
                                        const std::vector<std::string>& overrides);

// args excludes the program name. Returns the process exit code: 0 success,
// 1 configuration/runtime failure, 2 usage errors.
int run_command(const std::vector<std::string>& args);

}  // namespace grasplab::cli
