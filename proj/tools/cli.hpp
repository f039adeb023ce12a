#pragma once

namespace lipread::cli {

/// Entry point of the `lipread` tool. Returns the process exit status:
/// 0 on success, 2 for usage errors, the error's own code otherwise.
int run(int argc, char** argv);

}  // namespace lipread::cli
