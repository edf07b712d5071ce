#include <cstdlib>
#include <string>

#include "muhdi/errors.hpp"
#include "muhdi/kernels.hpp"

namespace muhdi::kern {
namespace {

const Ops* g_active = nullptr;

const Ops* resolve(const std::string& name) {
  if (name == "scalar") return &scalar_ops();
  if (name == "avx2") {
    const Ops* a = avx2_ops();
    if (!a) throw ValidationError("kernel backend 'avx2' is not available on this machine");
    return a;
  }
  if (name == "auto" || name.empty()) {
    if (const Ops* a = avx2_ops()) return a;
    return &scalar_ops();
  }
  throw ValidationError("unknown kernel backend '" + name + "' (use scalar|avx2|auto)");
}

}  // namespace

#ifndef MUHDI_HAVE_AVX2
const Ops* avx2_ops() { return nullptr; }
#endif

const Ops& ops() {
  if (!g_active) {
    const char* env = std::getenv("MUHDI_KERNELS");
    g_active = resolve(env ? env : "auto");
  }
  return *g_active;
}

void force_backend(const std::string& name) { g_active = resolve(name); }

}  // namespace muhdi::kern
