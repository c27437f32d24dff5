#include "attribnet/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace attribnet {
namespace kernels {

namespace {

std::atomic<const Ops*> g_active{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const Ops* resolve_default(Backend* picked) {
  const char* env = std::getenv("ATTRIBNET_KERNELS");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) {
    *picked = Backend::scalar;
    return &scalar_ops();
  }
  if (const Ops* avx2 = avx2_ops();
      avx2 != nullptr && (env == nullptr || std::strcmp(env, "avx2") == 0)) {
    *picked = Backend::avx2;
    return avx2;
  }
  *picked = Backend::scalar;
  return &scalar_ops();
}

void ensure_resolved() {
  if (g_active.load(std::memory_order_acquire) == nullptr) {
    Backend picked = Backend::scalar;
    const Ops* ops = resolve_default(&picked);
    g_backend.store(picked, std::memory_order_relaxed);
    g_active.store(ops, std::memory_order_release);
  }
}

}  // namespace

const Ops& active() {
  ensure_resolved();
  return *g_active.load(std::memory_order_acquire);
}

Backend active_backend() {
  ensure_resolved();
  return g_backend.load(std::memory_order_relaxed);
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::avx2:
      return "avx2";
    case Backend::scalar:
    default:
      return "scalar";
  }
}

bool backend_supported(Backend b) {
  return b == Backend::scalar || (b == Backend::avx2 && avx2_ops() != nullptr);
}

bool set_backend(Backend b) {
  if (b == Backend::avx2) {
    if (const Ops* avx2 = avx2_ops()) {
      g_backend.store(Backend::avx2, std::memory_order_relaxed);
      g_active.store(avx2, std::memory_order_release);
      return true;
    }
    g_backend.store(Backend::scalar, std::memory_order_relaxed);
    g_active.store(&scalar_ops(), std::memory_order_release);
    return false;
  }
  g_backend.store(Backend::scalar, std::memory_order_relaxed);
  g_active.store(&scalar_ops(), std::memory_order_release);
  return true;
}

}  // namespace kernels
}  // namespace attribnet
