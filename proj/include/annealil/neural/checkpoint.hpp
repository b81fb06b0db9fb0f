#pragma once

#include "annealil/neural/network.hpp"

#include <filesystem>

namespace annealil::neural {

/// Text checkpoint: one JSON header line (version, input_dim, hidden, head,
/// head_size, num_params) followed by one parameter per line in shortest
/// round-trip decimal form, so load(save(net)) is bit-exact.
void save_checkpoint(const Network<double>& net, const std::filesystem::path& path);
Network<double> load_checkpoint(const std::filesystem::path& path);

const char* head_kind_name(HeadKind kind);
HeadKind parse_head_kind(const std::string& name);

}  // namespace annealil::neural
