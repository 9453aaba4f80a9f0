#include "pvhc/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace pvhc::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const Ops& select() {
    if (const char* env = std::getenv("PVHC_KERNELS")) {
        std::string_view v(env);
        if (v == "scalar") return scalar_ops();
        if (v == "avx2") {
            if (!avx2_available())
                throw std::runtime_error("PVHC_KERNELS=avx2 but CPU lacks AVX2/FMA");
            return avx2_ops();
        }
        throw std::runtime_error("PVHC_KERNELS must be 'scalar' or 'avx2'");
    }
    return avx2_available() ? avx2_ops() : scalar_ops();
}

}  // namespace

const Ops& ops() {
    static const Ops& table = select();
    return table;
}

}  // namespace pvhc::kernels
