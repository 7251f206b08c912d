#pragma once

#include <string>
#include <vector>

#include <spdlog/spdlog.h>

namespace hsi {

// Collects warnings for the caller while also emitting them through spdlog.
struct Warnings {
    std::vector<std::string> messages;

    void add(std::string msg) {
        spdlog::warn("{}", msg);
        messages.push_back(std::move(msg));
    }
    bool empty() const { return messages.empty(); }
};

}  // namespace hsi
