#include "aoisim/kernels.hpp"

namespace aoisim::kernels {

#if defined(AOISIM_HAVE_AVX2_TU)
const Ops* avx2_ops_impl();
#endif

const Ops* avx2_ops() {
#if defined(AOISIM_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? avx2_ops_impl() : nullptr;
#else
    return nullptr;
#endif
}

namespace {
const Ops* pick_default() {
    if (const Ops* v = avx2_ops()) return v;
    return &scalar_ops();
}
const Ops*& active_slot() {
    static const Ops* slot = pick_default();
    return slot;
}
}  // namespace

const Ops& active() { return *active_slot(); }

bool select_backend(std::string_view name) {
    if (name == "auto") {
        active_slot() = pick_default();
        return true;
    }
    if (name == "scalar") {
        active_slot() = &scalar_ops();
        return true;
    }
    if (name == "avx2") {
        if (const Ops* v = avx2_ops()) {
            active_slot() = v;
            return true;
        }
        return false;
    }
    return false;
}

}  // namespace aoisim::kernels
