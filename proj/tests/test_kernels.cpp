#include <doctest.h>

#include <cmath>
#include <vector>

#include "pvhc/kernels.hpp"
#include "pvhc/rng.hpp"

using namespace pvhc;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Sizes chosen to cover the empty, sub-vector-width, unaligned-tail, and
// multi-lane cases.
const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 16, 33, 100, 1024, 10007};

}  // namespace

TEST_CASE("scalar and avx2 kernels agree") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available; skipping equivalence suite");
        return;
    }
    const auto& s = kernels::scalar_ops();
    const auto& v = kernels::avx2_ops();
    Rng rng(20240817);

    for (std::size_t n : kSizes) {
        auto a = random_vec(rng, n, -5.0, 10.0);
        auto b = random_vec(rng, n, -2.0, 8.0);
        auto r = random_vec(rng, n, 0.01, 0.3);
        const double c = rng.uniform(-3.0, 3.0);

        CAPTURE(n);

        // Elementwise kernels must match bit for bit.
        {
            auto d1 = a, d2 = a;
            s.add(d1.data(), b.data(), n);
            v.add(d2.data(), b.data(), n);
            CHECK(d1 == d2);
            s.sub(d1.data(), b.data(), n);
            v.sub(d2.data(), b.data(), n);
            CHECK(d1 == d2);
            s.scale(d1.data(), b.data(), c, n);
            v.scale(d2.data(), b.data(), c, n);
            CHECK(d1 == d2);
        }
        {
            auto d1 = a, d2 = a;
            s.scale_add(d1.data(), b.data(), c, n);
            v.scale_add(d2.data(), b.data(), c, n);
            CHECK(d1 == d2);
        }
        {
            std::vector<double> o1(n), o2(n);
            s.sub_scaled(o1.data(), a.data(), b.data(), c, n);
            v.sub_scaled(o2.data(), a.data(), b.data(), c, n);
            CHECK(o1 == o2);
            s.net_load(o1.data(), a.data(), b.data(), c, n);
            v.net_load(o2.data(), a.data(), b.data(), c, n);
            CHECK(o1 == o2);
        }

        // Max reductions are order-insensitive, so they match exactly too.
        CHECK(s.reduce_max(a.data(), n) == v.reduce_max(a.data(), n));
        {
            auto d1 = a, d2 = a;
            const double m1 = s.add_reduce_max(d1.data(), b.data(), n);
            const double m2 = v.add_reduce_max(d2.data(), b.data(), n);
            CHECK(d1 == d2);
            CHECK(m1 == m2);
        }

        // Summing reductions differ by accumulation order only.
        {
            const double d1 = s.dot(a.data(), b.data(), n);
            const double d2 = v.dot(a.data(), b.data(), n);
            CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
        }
        {
            double p1 = 0.0, p2 = 0.0;
            const double e1 = s.energy_peak(a.data(), b.data(), r.data(), c, n, &p1);
            const double e2 = v.energy_peak(a.data(), b.data(), r.data(), c, n, &p2);
            CHECK(e1 == doctest::Approx(e2).epsilon(1e-12));
            CHECK(p1 == p2);
        }
    }
}

TEST_CASE("block_mean agrees and preserves totals") {
    const auto& s = kernels::scalar_ops();
    Rng rng(7);
    for (std::size_t block : {1u, 2u, 5u, 30u, 48u}) {
        for (std::size_t blocks : {1u, 3u, 64u}) {
            auto in = random_vec(rng, blocks * block, 0.0, 12.0);
            std::vector<double> out_s(blocks);
            s.block_mean(out_s.data(), in.data(), blocks, block);
            if (kernels::avx2_available()) {
                std::vector<double> out_v(blocks);
                kernels::avx2_ops().block_mean(out_v.data(), in.data(), blocks, block);
                for (std::size_t j = 0; j < blocks; ++j)
                    CHECK(out_s[j] == doctest::Approx(out_v[j]).epsilon(1e-13));
            }
            double total_in = 0.0, total_out = 0.0;
            for (double x : in) total_in += x;
            for (double x : out_s) total_out += x * static_cast<double>(block);
            CHECK(total_out == doctest::Approx(total_in).epsilon(1e-12));
        }
    }
}

TEST_CASE("net_load clamps at zero and matches the definition") {
    const auto& ops = kernels::ops();
    Rng rng(99);
    auto load = random_vec(rng, 1000, 0.0, 5.0);
    auto shape = random_vec(rng, 1000, 0.0, 1.0);
    std::vector<double> out(1000);
    ops.net_load(out.data(), load.data(), shape.data(), 8.0, 1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        const double expect = std::max(0.0, load[i] - 8.0 * shape[i]);
        CHECK(out[i] == doctest::Approx(expect).epsilon(1e-15));
        CHECK(out[i] >= 0.0);
    }
}

TEST_CASE("energy_peak equals net_load followed by dot and max") {
    const auto& ops = kernels::ops();
    Rng rng(1234);
    for (std::size_t n : {5u, 333u, 10080u}) {
        auto load = random_vec(rng, n, 0.0, 6.0);
        auto shape = random_vec(rng, n, 0.0, 1.0);
        auto rate = random_vec(rng, n, 0.05, 0.25);
        std::vector<double> net(n);
        ops.net_load(net.data(), load.data(), shape.data(), 4.0, n);
        const double expect_sum = ops.dot(net.data(), rate.data(), n);
        const double expect_peak = ops.reduce_max(net.data(), n);
        double peak = -1.0;
        const double sum = ops.energy_peak(load.data(), shape.data(), rate.data(), 4.0, n, &peak);
        CHECK(sum == doctest::Approx(expect_sum).epsilon(1e-12));
        CHECK(peak == doctest::Approx(expect_peak).epsilon(1e-15));
    }
}
