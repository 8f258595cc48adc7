#pragma once

namespace bliss {

// full command-line entry point; returns the process exit code
// (0 success, 1 runtime failure, 2 usage error)
int dispatch(int argc, const char* const* argv);

}  // namespace bliss
