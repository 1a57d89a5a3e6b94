#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tap/config.hpp"

namespace tap {

struct GenerateArgs {
    std::filesystem::path spec_file;
    std::filesystem::path out_dir;
    std::uint64_t seed = 1;
};

struct TrainArgs {
    std::filesystem::path data_dir;
    std::filesystem::path out_dir;
    std::optional<std::filesystem::path> resume_dir;
    RunConfig config;
};

struct DetectArgs {
    std::filesystem::path data_dir;
    std::filesystem::path models_dir;
    std::string ablation = "full";  // full | no-pool | no-pool-no-rgn
    std::filesystem::path out_file;
    RunConfig config;
};

struct EvalArgs {
    std::filesystem::path proposals_file;
    std::filesystem::path data_dir;
    std::string classifier = "oracle";  // oracle | centroid
    std::filesystem::path out_dir;
    RunConfig config;
};

void cmd_generate(const GenerateArgs& args);
void cmd_train(const TrainArgs& args);
void cmd_detect(const DetectArgs& args);
void cmd_eval(const EvalArgs& args);

/// Re-run the command recorded in a run_manifest.json with a new output
/// location. Inputs and the resolved config come from the manifest.
void cmd_replay(const std::filesystem::path& manifest_file, const std::filesystem::path& out);

/// Full command-line entry point. Exit codes: 0 success, 1 usage error,
/// 2 data error, 3 internal invariant violation.
int cli_main(int argc, const char* const* argv);

}  // namespace tap
