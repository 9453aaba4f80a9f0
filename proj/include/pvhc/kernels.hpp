#pragma once

#include <cstddef>
#include <span>

namespace pvhc::kernels {

// Data-parallel primitives behind the time-series pipeline: profile
// aggregation, billing passes, resampling, and voltage/peak reductions.
// Two implementations exist — a scalar reference and an AVX2 variant —
// selected once at startup. Elementwise kernels are bit-identical between
// the two (the scalar versions use std::fma wherever the vector versions
// fuse); reduction kernels may differ by accumulation order and are
// equivalence-tested under a relative tolerance.
struct Ops {
    const char* name;

    // dst[i] += src[i]
    void (*add)(double* dst, const double* src, std::size_t n);
    // dst[i] -= src[i]
    void (*sub)(double* dst, const double* src, std::size_t n);
    // dst[i] = c * src[i]
    void (*scale)(double* dst, const double* src, double c, std::size_t n);
    // dst[i] += c * src[i]
    void (*scale_add)(double* dst, const double* src, double c, std::size_t n);
    // out[i] = a[i] - c * b[i]
    void (*sub_scaled)(double* out, const double* a, const double* b, double c, std::size_t n);
    // max over x[0..n), n >= 1
    double (*reduce_max)(const double* x, std::size_t n);
    // dst[i] += src[i]; returns max over dst[0..n)
    double (*add_reduce_max)(double* dst, const double* src, std::size_t n);
    // sum a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // out[j] = mean(in[j*block .. (j+1)*block)) for j in [0, blocks)
    void (*block_mean)(double* out, const double* in, std::size_t blocks, std::size_t block);
    // out[i] = max(0, load[i] - pv_kw*shape[i])
    void (*net_load)(double* out, const double* load, const double* shape, double pv_kw,
                     std::size_t n);
    // returns sum_i max(0, load[i] - pv_kw*shape[i]) * rate[i];
    // *peak = max_i max(0, load[i] - pv_kw*shape[i])  (0 when n == 0)
    double (*energy_peak)(const double* load, const double* shape, const double* rate,
                          double pv_kw, std::size_t n, double* peak);
};

const Ops& scalar_ops();
bool avx2_available();
// Valid only when avx2_available(); falls back to scalar_ops() otherwise.
const Ops& avx2_ops();

// Runtime-selected table. Honors PVHC_KERNELS=scalar|avx2 if set.
const Ops& ops();

// Convenience wrappers over ops() for the common span call sites.
inline void add(std::span<double> dst, std::span<const double> src) {
    ops().add(dst.data(), src.data(), dst.size());
}
inline double reduce_max(std::span<const double> x) { return ops().reduce_max(x.data(), x.size()); }

}  // namespace pvhc::kernels
