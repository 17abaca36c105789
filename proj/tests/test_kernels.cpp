#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "sfrlab/kernels.hpp"

using namespace sfrlab;

namespace {

Tensor random_tensor(std::mt19937& rng, int c, int h, int w) {
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    Tensor t(c, h, w);
    for (float& v : t.data()) v = d(rng);
    return t;
}

KernelTensor random_kernel(std::mt19937& rng, int o, int i, int kh, int kw) {
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    KernelTensor k(o, i, kh, kw);
    for (float& v : k.data()) v = d(rng);
    return k;
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
    REQUIRE(a.shape() == b.shape());
    float m = 0.0f;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() && a.data() == b.data();
}

} // namespace

TEST_CASE("dilated conv equals conv with a zero-inserted kernel") {
    std::mt19937 rng(101);
    int trials = 0;
    for (int rep = 0; rep < 25; ++rep) {
        for (int rate : {1, 2, 4, 8, 16}) {
            ++trials;
            const int k = 3;
            const int eff = (k - 1) * rate + 1;
            const int h = eff + 1 + static_cast<int>(rng() % 4);
            const int w = eff + static_cast<int>(rng() % 4);
            const int c = 1 + static_cast<int>(rng() % 4);
            Tensor in = random_tensor(rng, c, h, w);
            KernelTensor kern = random_kernel(rng, 2, c, k, k);

            Conv2dOpts dil;
            dil.dilation = rate;
            Tensor a = serial::conv2d(in, kern, dil);

            // Same taps written into an (eff x eff) kernel at stride `rate`.
            KernelTensor expanded(2, c, eff, eff);
            for (int o = 0; o < 2; ++o)
                for (int ci = 0; ci < c; ++ci)
                    for (int m = 0; m < k; ++m)
                        for (int n = 0; n < k; ++n)
                            expanded.at(o, ci, m * rate, n * rate) = kern.at(o, ci, m, n);
            Tensor b = serial::conv2d(in, expanded, Conv2dOpts{});
            CHECK(bitwise_equal(a, b));
        }
    }
    CHECK(trials >= 100);
}

TEST_CASE("factorized kx1+1xk equals the rank-1 2D kernel") {
    std::mt19937 rng(202);
    for (int rep = 0; rep < 120; ++rep) {
        const int c = 1 + static_cast<int>(rng() % 4);
        const int h = 5 + static_cast<int>(rng() % 12);
        const int w = 5 + static_cast<int>(rng() % 12);
        Tensor in = random_tensor(rng, c, h, w);
        KernelTensor kh = random_kernel(rng, c, 1, 3, 1);
        KernelTensor kw = random_kernel(rng, c, 1, 1, 3);

        Tensor fac = serial::factorized_conv(in, kh, kw, 1, 1, c);

        KernelTensor rank1(c, 1, 3, 3);
        for (int ch = 0; ch < c; ++ch)
            for (int m = 0; m < 3; ++m)
                for (int n = 0; n < 3; ++n)
                    rank1.at(ch, 0, m, n) = kh.at(ch, 0, m, 0) * kw.at(ch, 0, 0, n);
        Conv2dOpts o;
        o.pad_h = o.pad_w = 1;
        o.groups = c;
        Tensor full = serial::conv2d(in, rank1, o);

        // Same linear map; only the summation grouping differs.
        CHECK(max_abs_diff(fac, full) <= 1e-5f);
    }
}

TEST_CASE("grouped conv equals block-diagonal full conv") {
    std::mt19937 rng(303);
    for (int rep = 0; rep < 120; ++rep) {
        const int groups = 1 + static_cast<int>(rng() % 4);
        const int cpg = 1 + static_cast<int>(rng() % 2); // channels per group
        const int opg = 1 + static_cast<int>(rng() % 2); // outputs per group
        const int c = groups * cpg;
        const int h = 4 + static_cast<int>(rng() % 12);
        const int w = 4 + static_cast<int>(rng() % 12);
        Tensor in = random_tensor(rng, c, h, w);
        KernelTensor grouped = random_kernel(rng, groups * opg, cpg, 3, 3);

        Conv2dOpts og;
        og.groups = groups;
        og.pad_h = og.pad_w = 1;
        Tensor a = serial::conv2d(in, grouped, og);

        // The same weights as a dense kernel, zero off the block diagonal.
        KernelTensor dense(groups * opg, c, 3, 3);
        for (int o = 0; o < groups * opg; ++o) {
            const int g = o / opg;
            for (int ci = 0; ci < cpg; ++ci)
                for (int m = 0; m < 3; ++m)
                    for (int n = 0; n < 3; ++n)
                        dense.at(o, g * cpg + ci, m, n) = grouped.at(o, ci, m, n);
        }
        Conv2dOpts od;
        od.pad_h = od.pad_w = 1;
        Tensor b = serial::conv2d(in, dense, od);
        CHECK(bitwise_equal(a, b));
    }
}

TEST_CASE("transposed conv equals the zero-insertion oracle") {
    std::mt19937 rng(404);
    for (int rep = 0; rep < 120; ++rep) {
        const int c = 1 + static_cast<int>(rng() % 3);
        const int o = 1 + static_cast<int>(rng() % 3);
        const int h = 2 + static_cast<int>(rng() % 8);
        const int w = 2 + static_cast<int>(rng() % 8);
        const int stride = 1 + static_cast<int>(rng() % 3);
        const int k = stride + static_cast<int>(rng() % 2); // k >= stride
        const int op = static_cast<int>(rng() % stride);
        const int pad = (k - stride + op) / 2;
        if (k - 1 - pad < 0) continue;
        Tensor in = random_tensor(rng, c, h, w);
        KernelTensor kern = random_kernel(rng, o, c, k, k);

        Tensor a = serial::transposed_conv2d(in, kern, stride, pad, op);

        // Oracle: zero-insert the input at the stride grid, then run a plain
        // stride-1 conv with the spatially flipped kernel.
        const int zh = (h - 1) * stride + 1 + op;
        const int zw = (w - 1) * stride + 1 + op;
        Tensor z(c, zh, zw);
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) z.at(ci, y * stride, x * stride) = in.at(ci, y, x);
        KernelTensor flipped(o, c, k, k);
        for (int om = 0; om < o; ++om)
            for (int ci = 0; ci < c; ++ci)
                for (int m = 0; m < k; ++m)
                    for (int n = 0; n < k; ++n)
                        flipped.at(om, ci, m, n) = kern.at(om, ci, k - 1 - m, k - 1 - n);
        Conv2dOpts oc;
        oc.pad_h = oc.pad_w = k - 1 - pad;
        Tensor b = serial::conv2d(z, flipped, oc);
        CHECK(bitwise_equal(a, b));
    }
}

TEST_CASE("conv is linear") {
    std::mt19937 rng(505);
    for (int rep = 0; rep < 100; ++rep) {
        const int c = 1 + static_cast<int>(rng() % 4);
        const int h = 4 + static_cast<int>(rng() % 12);
        const int w = 4 + static_cast<int>(rng() % 12);
        Tensor a = random_tensor(rng, c, h, w);
        Tensor b = random_tensor(rng, c, h, w);
        KernelTensor k = random_kernel(rng, 2, c, 3, 3);
        Conv2dOpts o;
        o.pad_h = o.pad_w = 1;
        Tensor sum_then_conv = serial::conv2d(serial::add(a, b), k, o);
        Tensor conv_then_sum = serial::add(serial::conv2d(a, k, o), serial::conv2d(b, k, o));
        CHECK(max_abs_diff(sum_then_conv, conv_then_sum) <= 1e-5f);
    }
}

TEST_CASE("parallel kernels match the serial reference bitwise") {
    std::mt19937 rng(606);
    for (int rep = 0; rep < 30; ++rep) {
        const int c = 2 + static_cast<int>(rng() % 3);
        const int h = 6 + static_cast<int>(rng() % 10);
        const int w = 6 + static_cast<int>(rng() % 10);
        Tensor in = random_tensor(rng, c, h, w);
        KernelTensor k = random_kernel(rng, 3, c, 3, 3);
        Conv2dOpts o;
        o.pad_h = o.pad_w = 1;
        o.dilation = 1 + static_cast<int>(rng() % 2);
        CHECK(bitwise_equal(serial::conv2d(in, k, o), kernels::conv2d(in, k, o)));

        KernelTensor tk = random_kernel(rng, 2, c, 3, 3);
        CHECK(bitwise_equal(serial::transposed_conv2d(in, tk, 2, 1, 1),
                            kernels::transposed_conv2d(in, tk, 2, 1, 1)));
        CHECK(bitwise_equal(serial::maxpool2d(in, 2, 2), kernels::maxpool2d(in, 2, 2)));
        CHECK(bitwise_equal(serial::relu(in), kernels::relu(in)));
        CHECK(bitwise_equal(serial::bilinear_upsample(in, 2),
                            kernels::bilinear_upsample(in, 2)));
        CHECK(bitwise_equal(serial::argmax_channels(in), kernels::argmax_channels(in)));

        std::vector<float> g, bta, mn, vr;
        std::uniform_real_distribution<float> d(0.1f, 2.0f);
        for (int i = 0; i < c; ++i) {
            g.push_back(d(rng));
            bta.push_back(d(rng) - 1.0f);
            mn.push_back(d(rng) - 1.0f);
            vr.push_back(d(rng));
        }
        CHECK(bitwise_equal(serial::batchnorm_inference(in, g, bta, mn, vr, 1e-5f),
                            kernels::batchnorm_inference(in, g, bta, mn, vr, 1e-5f)));
    }
}

TEST_CASE("bilinear upsample fixture") {
    // A single row [0, 1] doubled: half-pixel centers give 0, 0.25, 0.75, 1.
    Tensor in(1, 1, 2, {0.0f, 1.0f});
    Tensor out = serial::bilinear_upsample(in, 2);
    REQUIRE(out.height() == 2);
    REQUIRE(out.width() == 4);
    for (int y = 0; y < 2; ++y) {
        CHECK(out.at(0, y, 0) == doctest::Approx(0.0f));
        CHECK(out.at(0, y, 1) == doctest::Approx(0.25f));
        CHECK(out.at(0, y, 2) == doctest::Approx(0.75f));
        CHECK(out.at(0, y, 3) == doctest::Approx(1.0f));
    }
}

TEST_CASE("channel shuffle permutation") {
    Tensor in(4, 1, 1, {0.0f, 1.0f, 2.0f, 3.0f});
    Tensor out = serial::channel_shuffle(in, 2);
    CHECK(out.at(0, 0, 0) == 0.0f);
    CHECK(out.at(1, 0, 0) == 2.0f);
    CHECK(out.at(2, 0, 0) == 1.0f);
    CHECK(out.at(3, 0, 0) == 3.0f);
    // Shuffling by g then by C/g restores the original order.
    Tensor back = serial::channel_shuffle(out, 2);
    CHECK(back.data() == in.data());
    CHECK_THROWS_AS(serial::channel_shuffle(in, 3), KernelError);
}

TEST_CASE("maxpool, add, concat, argmax basics") {
    Tensor in(1, 2, 2, {1.0f, -2.0f, 3.0f, 0.5f});
    Tensor pooled = serial::maxpool2d(in, 2, 2);
    CHECK(pooled.at(0, 0, 0) == 3.0f);

    Tensor negated = in;
    for (float& v : negated.data()) v = -v;
    Tensor sum = serial::add(in, negated);
    for (float v : sum.data()) CHECK(v == 0.0f);
    CHECK_THROWS_AS(serial::add(in, Tensor(1, 2, 3)), KernelError);

    Tensor other(2, 2, 2);
    Tensor cat = serial::concat({&in, &other});
    CHECK(cat.channels() == 3);
    CHECK(cat.at(0, 1, 0) == 3.0f);
    CHECK_THROWS_AS(serial::concat({&in}), KernelError);

    // Ties resolve toward the lowest channel index.
    Tensor tie(3, 1, 1, {5.0f, 5.0f, 1.0f});
    CHECK(serial::argmax_channels(tie).at(0, 0, 0) == 0.0f);
    Tensor strict(3, 1, 1, {1.0f, 5.0f, 4.0f});
    CHECK(serial::argmax_channels(strict).at(0, 0, 0) == 1.0f);
}

TEST_CASE("relu") {
    Tensor in(1, 1, 4, {-1.0f, 0.0f, 2.5f, -0.0f});
    Tensor out = serial::relu(in);
    CHECK(out.at(0, 0, 0) == 0.0f);
    CHECK(out.at(0, 0, 1) == 0.0f);
    CHECK(out.at(0, 0, 2) == 2.5f);
    CHECK(out.at(0, 0, 3) == 0.0f);
}

TEST_CASE("argument validation") {
    Tensor in(2, 4, 4);
    KernelTensor k(2, 2, 3, 3);
    Conv2dOpts bad;
    bad.stride_h = 0;
    CHECK_THROWS_AS(serial::conv2d(in, k, bad), KernelError);
    Conv2dOpts wrong_groups;
    wrong_groups.groups = 3;
    CHECK_THROWS_AS(serial::conv2d(in, k, wrong_groups), KernelError);
    KernelTensor mismatched(2, 3, 3, 3);
    CHECK_THROWS_AS(serial::conv2d(in, mismatched, Conv2dOpts{}), KernelError);
    CHECK_THROWS_AS(serial::maxpool2d(in, 5, 1), KernelError);
    CHECK_THROWS_AS(serial::batchnorm_inference(in, {1.0f}, {0.0f}, {0.0f}, {1.0f}, 1e-5f),
                    KernelError);
    CHECK_THROWS_AS(serial::transposed_conv2d(in, KernelTensor(2, 2, 3, 2), 2, 1, 1),
                    KernelError);
}

TEST_CASE("worker count honours SFRLAB_THREADS") {
    setenv("SFRLAB_THREADS", "3", 1);
    CHECK(worker_count() == 3);
    setenv("SFRLAB_THREADS", "zero", 1);
    CHECK_THROWS_AS(worker_count(), KernelError);
    setenv("SFRLAB_THREADS", "0", 1);
    CHECK_THROWS_AS(worker_count(), KernelError);
    unsetenv("SFRLAB_THREADS");
    CHECK(worker_count() >= 1);
}

TEST_CASE("results identical across worker counts") {
    std::mt19937 rng(707);
    Tensor in = random_tensor(rng, 4, 16, 16);
    KernelTensor k = random_kernel(rng, 4, 4, 3, 3);
    Conv2dOpts o;
    o.pad_h = o.pad_w = 1;
    setenv("SFRLAB_THREADS", "1", 1);
    Tensor one = kernels::conv2d(in, k, o);
    setenv("SFRLAB_THREADS", "4", 1);
    Tensor four = kernels::conv2d(in, k, o);
    unsetenv("SFRLAB_THREADS");
    CHECK(bitwise_equal(one, four));
}
