/* Copyright 2026 The liquidseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LIQUIDSEG_TOOLS_COMMANDS_H_
#define LIQUIDSEG_TOOLS_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

#include "liquidseg/run_config.h"

namespace liquidseg::tools {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitRuntime = 2,
};

inline constexpr const char* kOutputRootEnv = "LIQUIDSEG_OUTPUT_ROOT";

struct CommandContext {
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  std::string output_root;  // prefix for relative output.dir; may be empty
};

// Each writes resolved_config.cfg into its output directory and returns an
// exit code; exceptions escape to run_command.
int cmd_train(const RunConfig& cfg, const CommandContext& ctx);
int cmd_eval(const RunConfig& cfg, const CommandContext& ctx);
int cmd_infer(const RunConfig& cfg, const CommandContext& ctx);
int cmd_split(const RunConfig& cfg, const CommandContext& ctx);
int cmd_stats(const RunConfig& cfg, const CommandContext& ctx);
int cmd_synth(const RunConfig& cfg, const CommandContext& ctx);

const std::vector<std::string>& command_names();

// Dispatches by name and maps exceptions to exit codes: configuration,
// dataset and model-manifest problems give 1, anything else 2.
int run_command(const std::string& name, const RunConfig& cfg,
                const CommandContext& ctx);

// Full command line: `liquidseg <command> [--config FILE] [options]
// [key=value ...]`. Reads the output-root environment variable.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace liquidseg::tools

#endif  // LIQUIDSEG_TOOLS_COMMANDS_H_
