#include "ccshap/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ccshap {

namespace {

std::size_t initial_thread_count() {
    if (const char* env = std::getenv("CCSHAP_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::atomic<std::size_t>& count_slot() {
    static std::atomic<std::size_t> count{initial_thread_count()};
    return count;
}

} // namespace

std::size_t thread_count() { return count_slot().load(); }

void set_thread_count(std::size_t n) { count_slot().store(std::max<std::size_t>(1, n)); }

} // namespace ccshap
