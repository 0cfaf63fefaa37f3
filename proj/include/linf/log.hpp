#pragma once

#include <cstdio>
#include <cstdlib>
#include <string_view>
#include <utility>

namespace linf::log {

enum class Level { quiet = 0, info = 1, debug = 2 };

/// Level taken from LINF_LOG (quiet, info, debug); defaults to quiet.
inline Level level()
{
    static const Level lvl = [] {
        const char* env = std::getenv("LINF_LOG");
        if (env == nullptr) return Level::quiet;
        std::string_view v{env};
        if (v == "debug") return Level::debug;
        if (v == "info") return Level::info;
        return Level::quiet;
    }();
    return lvl;
}

template <typename... Args>
void info(const char* fmt, Args&&... args)
{
    if (level() >= Level::info) {
        std::fprintf(stderr, fmt, std::forward<Args>(args)...);
        std::fputc('\n', stderr);
    }
}

template <typename... Args>
void debug(const char* fmt, Args&&... args)
{
    if (level() >= Level::debug) {
        std::fprintf(stderr, fmt, std::forward<Args>(args)...);
        std::fputc('\n', stderr);
    }
}

}  // namespace linf::log
