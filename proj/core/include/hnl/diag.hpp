// SPDX-License-Identifier: Apache-2.0
// Stderr diagnostics, gated by the HNL_LOG_LEVEL environment variable
// (off | error | info | debug; default error).
#pragma once

#include <string_view>

namespace hnl::diag {

enum class Level { Off = 0, Error = 1, Info = 2, Debug = 3 };

Level level();

void log(Level lvl, std::string_view msg);

inline void error(std::string_view msg) { log(Level::Error, msg); }
inline void info(std::string_view msg) { log(Level::Info, msg); }
inline void debug(std::string_view msg) { log(Level::Debug, msg); }

}  // namespace hnl::diag
