#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "linucbd/model.hpp"

namespace linucbd {

/// Seed that fixes theta for the `paper62` preset: among seeds 0..999, the one
/// whose least-often optimal arm is optimal most often (13% of rounds).
inline constexpr std::uint64_t kPaper62ThetaSeed = 876;

struct Preset {
  std::string name;
  Instance instance;
  std::size_t horizon = 500'000;
  std::size_t runs = 100;
  std::vector<std::string> policies;
};

/// `paper61`, `paper61-diverse`, `paper62`. Throws kUnknownPreset.
Preset preset(std::string_view name);
std::vector<std::string> preset_names();

/// Instance document: {"kind", "K", "d", "n", "theta", "features", "l", "s",
/// "delta", "seed", "noise"}. A general instance without "theta" draws it on
/// the radius-s sphere from "seed".
nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& doc);

}  // namespace linucbd
