#include "pvhc/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace pvhc::kernels {

namespace scalar {

void add(double* dst, const double* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
}

void sub(double* dst, const double* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] -= src[i];
}

void scale(double* dst, const double* src, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = c * src[i];
}

void scale_add(double* dst, const double* src, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = std::fma(c, src[i], dst[i]);
}

void sub_scaled(double* out, const double* a, const double* b, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::fma(-c, b[i], a[i]);
}

double reduce_max(const double* x, std::size_t n) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

double add_reduce_max(double* dst, const double* src, std::size_t n) {
    double m = -HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
        dst[i] += src[i];
        m = std::max(m, dst[i]);
    }
    return m;
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s = std::fma(a[i], b[i], s);
    return s;
}

void block_mean(double* out, const double* in, std::size_t blocks, std::size_t block) {
    const double inv = 1.0 / static_cast<double>(block);
    for (std::size_t j = 0; j < blocks; ++j) {
        double s = 0.0;
        const double* p = in + j * block;
        for (std::size_t i = 0; i < block; ++i) s += p[i];
        out[j] = s * inv;
    }
}

void net_load(double* out, const double* load, const double* shape, double pv_kw,
              std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::max(0.0, std::fma(-pv_kw, shape[i], load[i]));
}

double energy_peak(const double* load, const double* shape, const double* rate, double pv_kw,
                   std::size_t n, double* peak) {
    double s = 0.0;
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double net = std::max(0.0, std::fma(-pv_kw, shape[i], load[i]));
        s = std::fma(net, rate[i], s);
        m = std::max(m, net);
    }
    *peak = m;
    return s;
}

}  // namespace scalar

const Ops& scalar_ops() {
    static const Ops table{
        "scalar",
        scalar::add,
        scalar::sub,
        scalar::scale,
        scalar::scale_add,
        scalar::sub_scaled,
        scalar::reduce_max,
        scalar::add_reduce_max,
        scalar::dot,
        scalar::block_mean,
        scalar::net_load,
        scalar::energy_peak,
    };
    return table;
}

}  // namespace pvhc::kernels
