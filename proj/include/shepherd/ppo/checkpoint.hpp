#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "shepherd/ppo/network.hpp"

namespace shepherd::ppo {

/// Text checkpoint. First line "SHEPHERD-PPO v1"; then one line per tensor:
///
///   <name> <rows>x<cols> <v_0> <v_1> ...
///
/// with values in row-major order, written in shortest round-trip form so a
/// save/load cycle is bit-exact. The action bound is stored as the 1x1 tensor
/// "meta.action_bound".
void save_checkpoint(const PolicyNetwork& net, const std::filesystem::path& path);
void write_checkpoint(const PolicyNetwork& net, std::ostream& out);

/// Throws std::runtime_error with a descriptive message on a bad header,
/// malformed line, missing tensor, or a shape that does not fit the
/// architecture (or `expected`, when given).
PolicyNetwork load_checkpoint(const std::filesystem::path& path,
                              const std::optional<NetworkSpec>& expected = std::nullopt);
PolicyNetwork read_checkpoint(std::istream& in,
                              const std::optional<NetworkSpec>& expected = std::nullopt);

}  // namespace shepherd::ppo
