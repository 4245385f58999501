#include "grasplab/tensor.hpp"

#include <atomic>

namespace grasplab {

namespace {
std::atomic<bool> g_verification_mode{true};
}

bool verification_mode() { return g_verification_mode.load(std::memory_order_relaxed); }

void set_verification_mode(bool on) { g_verification_mode.store(on, std::memory_order_relaxed); }

}  // namespace grasplab
