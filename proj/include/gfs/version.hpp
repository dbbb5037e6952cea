#pragma once

namespace gfs {
inline constexpr const char* kToolName = "gfselect";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kResultsSchemaVersion = 1;
}  // namespace gfs
