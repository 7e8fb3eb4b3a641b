#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vsnt::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kFailure = 2 };

// Runs one vsentinel invocation. `args` excludes the program name. Frames
// for `infer --stream` come from `in` unless --input names a file.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace vsnt::cli
