#pragma once
// Command-line surface. Kept in the library so tests can drive it
// in-process; the binary is a thin wrapper.

namespace arblink {

// Exit codes: 0 ok, 2 usage/config, 3 data, 4 numeric divergence.
int cli_main(int argc, const char* const* argv);

}  // namespace arblink
