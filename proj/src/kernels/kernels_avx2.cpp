// AVX2+FMA variants. Compiled with -mavx2 -mfma for this translation unit
// only; callers must check avx2_available() before using this table.

#include "pvhc/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define PVHC_HAVE_AVX2_TU 1
#include <immintrin.h>
#else
#define PVHC_HAVE_AVX2_TU 0
#endif

#include <algorithm>
#include <cmath>

namespace pvhc::kernels {

#if PVHC_HAVE_AVX2_TU

namespace avx2 {

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d m = _mm_max_pd(lo, hi);
    __m128d s = _mm_unpackhi_pd(m, m);
    return _mm_cvtsd_f64(_mm_max_sd(m, s));
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d s = _mm_add_pd(lo, hi);
    __m128d t = _mm_unpackhi_pd(s, s);
    return _mm_cvtsd_f64(_mm_add_sd(s, t));
}

void add(double* dst, const double* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_loadu_pd(dst + i);
        __m256d s = _mm256_loadu_pd(src + i);
        _mm256_storeu_pd(dst + i, _mm256_add_pd(d, s));
    }
    for (; i < n; ++i) dst[i] += src[i];
}

void sub(double* dst, const double* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_loadu_pd(dst + i);
        __m256d s = _mm256_loadu_pd(src + i);
        _mm256_storeu_pd(dst + i, _mm256_sub_pd(d, s));
    }
    for (; i < n; ++i) dst[i] -= src[i];
}

void scale(double* dst, const double* src, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(vc, _mm256_loadu_pd(src + i)));
    for (; i < n; ++i) dst[i] = c * src[i];
}

void scale_add(double* dst, const double* src, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_loadu_pd(dst + i);
        _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(vc, _mm256_loadu_pd(src + i), d));
    }
    for (; i < n; ++i) dst[i] = std::fma(c, src[i], dst[i]);
}

void sub_scaled(double* out, const double* a, const double* b, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        _mm256_storeu_pd(out + i, _mm256_fnmadd_pd(vc, _mm256_loadu_pd(b + i), va));
    }
    for (; i < n; ++i) out[i] = std::fma(-c, b[i], a[i]);
}

double reduce_max(const double* x, std::size_t n) {
    std::size_t i = 0;
    double m = x[0];
    if (n >= 4) {
        __m256d vm = _mm256_loadu_pd(x);
        for (i = 4; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(x + i));
        m = hmax(vm);
    }
    for (; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

double add_reduce_max(double* dst, const double* src, std::size_t n) {
    __m256d vm = _mm256_set1_pd(-HUGE_VAL);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_add_pd(_mm256_loadu_pd(dst + i), _mm256_loadu_pd(src + i));
        _mm256_storeu_pd(dst + i, d);
        vm = _mm256_max_pd(vm, d);
    }
    double m = hmax(vm);
    for (; i < n; ++i) {
        dst[i] += src[i];
        m = std::max(m, dst[i]);
    }
    return m;
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s = std::fma(a[i], b[i], s);
    return s;
}

void block_mean(double* out, const double* in, std::size_t blocks, std::size_t block) {
    const double inv = 1.0 / static_cast<double>(block);
    for (std::size_t j = 0; j < blocks; ++j) {
        const double* p = in + j * block;
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = 0;
        for (; i + 4 <= block; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(p + i));
        double s = hsum(acc);
        for (; i < block; ++i) s += p[i];
        out[j] = s * inv;
    }
}

void net_load(double* out, const double* load, const double* shape, double pv_kw,
              std::size_t n) {
    const __m256d vc = _mm256_set1_pd(pv_kw);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d net = _mm256_fnmadd_pd(vc, _mm256_loadu_pd(shape + i), _mm256_loadu_pd(load + i));
        _mm256_storeu_pd(out + i, _mm256_max_pd(zero, net));
    }
    for (; i < n; ++i) out[i] = std::max(0.0, std::fma(-pv_kw, shape[i], load[i]));
}

double energy_peak(const double* load, const double* shape, const double* rate, double pv_kw,
                   std::size_t n, double* peak) {
    const __m256d vc = _mm256_set1_pd(pv_kw);
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc = _mm256_setzero_pd();
    __m256d vm = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d net = _mm256_fnmadd_pd(vc, _mm256_loadu_pd(shape + i), _mm256_loadu_pd(load + i));
        net = _mm256_max_pd(zero, net);
        vm = _mm256_max_pd(vm, net);
        acc = _mm256_fmadd_pd(net, _mm256_loadu_pd(rate + i), acc);
    }
    double s = hsum(acc);
    double m = hmax(vm);
    for (; i < n; ++i) {
        double net = std::max(0.0, std::fma(-pv_kw, shape[i], load[i]));
        s = std::fma(net, rate[i], s);
        m = std::max(m, net);
    }
    *peak = m;
    return s;
}

}  // namespace avx2

const Ops& avx2_ops() {
    static const Ops table{
        "avx2",
        avx2::add,
        avx2::sub,
        avx2::scale,
        avx2::scale_add,
        avx2::sub_scaled,
        avx2::reduce_max,
        avx2::add_reduce_max,
        avx2::dot,
        avx2::block_mean,
        avx2::net_load,
        avx2::energy_peak,
    };
    return table;
}

#else

const Ops& avx2_ops() { return scalar_ops(); }

#endif

}  // namespace pvhc::kernels
