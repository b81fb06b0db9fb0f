#pragma once

namespace annealil::harness {

/// Entry point of the `annealil` tool. Returns the process exit status.
int cli(int argc, char** argv);

}  // namespace annealil::harness
