#pragma once

#include <string>

#include "treeffuse/treeffuser.hpp"

namespace treeffuse {

// Versioned, self-describing JSON model file. Loading checks the magic and
// version before touching the payload.
inline constexpr const char* kModelMagic = "treeffuse-model";
inline constexpr int kModelVersion = 1;

std::string serialize_model(const TreeffuserModel& m);
TreeffuserModel deserialize_model(const std::string& text);

void save_model(const TreeffuserModel& m, const std::string& path);
TreeffuserModel load_model(const std::string& path);

}  // namespace treeffuse
