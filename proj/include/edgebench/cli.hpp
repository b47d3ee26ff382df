#pragma once

namespace edgebench {

// Entry point behind main(). Exit codes: 0 success, 1 validation findings,
// 2 runtime failure, 3 usage error.
int run_cli(int argc, const char* const* argv);

} // namespace edgebench
