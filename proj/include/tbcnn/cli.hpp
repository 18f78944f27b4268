#pragma once

#include <ostream>

namespace tbcnn {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

// Entry point shared by the tbcnn binary and the tests. Subcommands: train,
// eval, visualize, gradcheck, pretrain-rae.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tbcnn
