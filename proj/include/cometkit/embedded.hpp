#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace cometkit::embedded {

struct Resource {
  std::string_view name;
  std::string_view data;
};

// Data files compiled into the library (citation database, language seed corpora).
std::span<const Resource> resources();

inline std::optional<std::string_view> find(std::string_view name) {
  for (const auto& r : resources()) {
    if (r.name == name) return r.data;
  }
  return std::nullopt;
}

}  // namespace cometkit::embedded
