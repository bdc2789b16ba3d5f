#pragma once

namespace rfs::cli {

// Full command-line front end. Returns the process exit code:
// 0 success, 1 verification failure, 2 usage or computation error.
int run(int argc, const char* const* argv);

}  // namespace rfs::cli
