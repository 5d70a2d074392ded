#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "cli/config.hpp"

namespace spinfreeze::cli {

// Shared runtime arguments resolved from the command line.
struct CommandArgs {
  RunConfig config;
  std::optional<std::filesystem::path> out_dir;
  std::ostream* out = nullptr;  // report stream (stdout in the CLI)
};

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kExitIoError = 4;

int cmd_scales(const CommandArgs& args);
int cmd_scan(const CommandArgs& args);
int cmd_figure2(const CommandArgs& args);
int cmd_calibrate(const CommandArgs& args);
int cmd_fit(const CommandArgs& args, const std::filesystem::path& data_path);

// Maps the exception taxonomy onto exit codes and prints the message.
int run_guarded(const std::string& command_name, const std::function<int()>& body,
                std::ostream& err);

}  // namespace spinfreeze::cli
