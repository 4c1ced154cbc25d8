#pragma once

namespace storynet {

// Entry point of the `storynet` executable. Exit codes: 0 success, 1 runtime
// failure, 2 usage or input error.
int run_cli(int argc, char** argv);

}  // namespace storynet
