#include "fracpar/simd.hpp"

#include <cstdlib>
#include <string_view>

namespace fracpar::simd {

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const kernel_table& table_for(isa which) {
    static const kernel_table scalar{detail::lattice_synthesis_scalar, detail::axpy_scalar,
                                     detail::dot_scalar};
    static const kernel_table avx2{detail::lattice_synthesis_avx2, detail::axpy_avx2,
                                   detail::dot_avx2};
    if (which == isa::avx2) {
        if (!avx2_supported()) return scalar;
        return avx2;
    }
    return scalar;
}

isa active_isa() {
    static const isa chosen = [] {
        const char* env = std::getenv("FRACPAR_SIMD");
        if (env && std::string_view(env) == "scalar") return isa::scalar;
        return avx2_supported() ? isa::avx2 : isa::scalar;
    }();
    return chosen;
}

const kernel_table& active() { return table_for(active_isa()); }

std::string isa_name(isa which) { return which == isa::avx2 ? "avx2" : "scalar"; }

}  // namespace fracpar::simd
