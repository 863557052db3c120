#pragma once

namespace brw {

// Full command-line surface; returns the process exit code
// (0 ok, 1 verification failure, 2 usage, 3 guard violation).
int run_cli(int argc, const char* const* argv);

}  // namespace brw
