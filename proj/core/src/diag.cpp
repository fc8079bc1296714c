// SPDX-License-Identifier: Apache-2.0
#include "hnl/diag.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace hnl::diag {

namespace {

Level parse_level() {
    const char* env = std::getenv("HNL_LOG_LEVEL");
    if (env == nullptr) return Level::Error;
    if (std::strcmp(env, "off") == 0) return Level::Off;
    if (std::strcmp(env, "error") == 0) return Level::Error;
    if (std::strcmp(env, "info") == 0) return Level::Info;
    if (std::strcmp(env, "debug") == 0) return Level::Debug;
    return Level::Error;
}

const char* tag(Level lvl) {
    switch (lvl) {
        case Level::Error: return "error";
        case Level::Info: return "info";
        case Level::Debug: return "debug";
        default: return "?";
    }
}

std::mutex g_mutex;

}  // namespace

Level level() {
    static const Level lvl = parse_level();
    return lvl;
}

void log(Level lvl, std::string_view msg) {
    if (static_cast<int>(lvl) > static_cast<int>(level())) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "hnl [%s] %.*s\n", tag(lvl), static_cast<int>(msg.size()), msg.data());
}

}  // namespace hnl::diag
