#include "mitodet/common.hpp"

#include <cstdio>
#include <mutex>

namespace mitodet {

void warn(const std::string& message) {
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::fprintf(stderr, "warning: %s\n", message.c_str());
    std::fflush(stderr);
}

}  // namespace mitodet
