#pragma once

namespace arnold {

// Entry point behind the arnold binary; exposed so tests can drive the CLI
// in-process. Returns the process exit code: 0 success, 1 infeasible or
// timeout, 2 usage or IO error.
int cli_main(int argc, const char* const* argv);

}  // namespace arnold
