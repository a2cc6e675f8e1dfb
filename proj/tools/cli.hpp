#pragma once

namespace moqc::cli {

/// Runs the command line. Exit codes: 0 success, 2 negative answer
/// (Infeasible, NotAchievable), 1 error.
int run(int argc, char** argv);

} // namespace moqc::cli
