#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "sfrlab/cost.hpp"
#include "sfrlab/executor.hpp"
#include "sfrlab/kernels.hpp"
#include "sfrlab/lower.hpp"
#include "sfrlab/presets.hpp"

using namespace sfrlab;

namespace {

Tensor patterned_input(int c, int h, int w) {
    Tensor t(c, h, w);
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                t.at(ci, y, x) = static_cast<float>(((ci + 1) * (y + 2 * x)) % 97) / 97.0f;
    return t;
}

struct TempFile {
    std::string path;
    explicit TempFile(const char* name) : path(std::string("exec_test_") + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("weight initialization is seed-deterministic") {
    NetworkGraph low = lower(build_preset("esf-mini-ex"));
    WeightStore a = init_weights(low, 7);
    WeightStore b = init_weights(low, 7);
    CHECK(a == b);
    WeightStore c = init_weights(low, 8);
    CHECK_FALSE(a == c);

    // Bounds: every kernel value inside [-b, b] for its fan-in.
    for (const auto& [key, e] : a.entries) {
        if (e.name != "kernel") continue;
        const double bound =
            std::sqrt(6.0 / (static_cast<double>(e.dims[1]) * e.dims[2] * e.dims[3]));
        for (float v : e.values) {
            REQUIRE(v <= bound);
            REQUIRE(v >= -bound);
        }
    }
}

TEST_CASE("learnable scalar count equals the cost model's parameter total") {
    for (const char* id : {"esfnet-base", "esf-mini", "esf-mini-ex", "esf-enet-down",
                           "esf-shuffle-down", "esf-trans2x4x", "esf-trans8x", "esf-interp8x",
                           "block:Bt", "block:NonBt-Fac"}) {
        CAPTURE(id);
        NetworkGraph g = build_preset(id);
        WeightStore w = init_weights(lower(g), 1);
        CHECK(w.learnable_scalar_count() ==
              graph_cost(g, preset_default_input(id)).total.params);
    }
}

TEST_CASE("weights survive a save/load round trip") {
    NetworkGraph low = lower(build_preset("block:Bt-Fac-Dw"));
    WeightStore w = init_weights(low, 42);
    TempFile f("roundtrip.sfrw");
    save_weights(w, f.path);
    WeightStore loaded = load_weights(f.path);
    CHECK(w == loaded);
    CHECK_NOTHROW(check_weights(low, loaded));

    SUBCASE("bad magic is rejected") {
        TempFile g("bad_magic.sfrw");
        std::ofstream os(g.path, std::ios::binary);
        os << "NOTW garbage";
        os.close();
        CHECK_THROWS_AS(load_weights(g.path), ExecutorError);
    }
    SUBCASE("wrong graph is rejected") {
        NetworkGraph other = lower(build_preset("block:NonBt"));
        CHECK_THROWS_AS(check_weights(other, loaded), ExecutorError);
    }
    SUBCASE("truncated file is rejected") {
        std::ifstream is(f.path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(is)),
                          std::istreambuf_iterator<char>());
        TempFile g("truncated.sfrw");
        std::ofstream os(g.path, std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
        os.close();
        CHECK_THROWS_AS(load_weights(g.path), ExecutorError);
    }
    SUBCASE("missing tensor is rejected") {
        WeightStore broken = loaded;
        broken.entries.erase(broken.entries.begin());
        CHECK_THROWS_AS(check_weights(low, broken), ExecutorError);
    }
}

TEST_CASE("residual block with zeroed body is relu(identity)") {
    NetworkGraph low = lower(build_preset("block:Bt-Fac-Dw"));
    WeightStore w = init_weights(low, 3);
    for (auto& [key, e] : w.entries)
        if (e.name == "kernel") std::fill(e.values.begin(), e.values.end(), 0.0f);

    Tensor in = patterned_input(128, 8, 8);
    for (float& v : in.data()) v -= 0.3f; // make some pixels negative
    ForwardResult r = forward(low, w, in);
    Tensor expect = kernels::relu(in);
    REQUIRE(r.output.shape() == expect.shape());
    CHECK(r.output.data() == expect.data());
}

TEST_CASE("forward is deterministic and traces every node") {
    NetworkGraph low = lower(build_preset("block:NonBt-Fac-Dw"));
    WeightStore w = init_weights(low, 11);
    Tensor in = patterned_input(128, 8, 8);

    ForwardResult a = forward(low, w, in, {"block/pw1"});
    ForwardResult b = forward(low, w, in, {"block/pw1"});
    CHECK(a.output.data() == b.output.data());
    REQUIRE(a.trace.records.size() == low.nodes.size());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
        CHECK(a.trace.records[i].node == b.trace.records[i].node);
        CHECK(a.trace.records[i].checksum == b.trace.records[i].checksum);
    }
    REQUIRE(a.taps.count("block/pw1") == 1);
    CHECK(a.taps.at("block/pw1").data() == b.taps.at("block/pw1").data());

    SUBCASE("identical results across worker counts") {
        setenv("SFRLAB_THREADS", "3", 1);
        ForwardResult c = forward(low, w, in);
        unsetenv("SFRLAB_THREADS");
        CHECK(a.output.data() == c.output.data());
    }
    SUBCASE("unknown tap is rejected") {
        CHECK_THROWS_AS(forward(low, w, in, {"no/such/node"}), ExecutorError);
    }
    SUBCASE("composite graphs are rejected") {
        CHECK_THROWS_AS(forward(build_preset("block:Bt"), w, in), ExecutorError);
        CHECK_THROWS_AS(init_weights(build_preset("block:Bt"), 1), ExecutorError);
    }
}

TEST_CASE("runtime peak matches the cost model's activation footprint") {
    for (const char* id : {"block:Bt-Fac-Dw", "esf-mini-ex"}) {
        CAPTURE(id);
        NetworkGraph low = lower(build_preset(id));
        TensorShape shape = std::string(id) == "esf-mini-ex" ? TensorShape(64, 64, 3)
                                                             : TensorShape(8, 8, 128);
        WeightStore w = init_weights(low, 5);
        Tensor in(shape.channels, shape.height, shape.width);
        for (std::size_t i = 0; i < in.data().size(); ++i)
            in.data()[i] = static_cast<float>(i % 13) / 13.0f;
        ForwardResult r = forward(low, w, in);
        CHECK(r.trace.peak_live_bytes == peak_activation_bytes(low, shape));
    }
}

TEST_CASE("whole-network forward produces a two-channel map") {
    NetworkGraph low = lower(build_preset("esf-mini-ex"));
    WeightStore w = init_weights(low, 7);
    Tensor in = patterned_input(3, 64, 64);
    ForwardResult r = forward(low, w, in);
    CHECK(r.output.shape() == TensorShape(64, 64, 2));
    Tensor classes = kernels::argmax_channels(r.output);
    for (float v : classes.data()) CHECK((v == 0.0f || v == 1.0f));
}

TEST_CASE("fnv1a reference values") {
    // Published FNV-1a 64-bit test vectors.
    CHECK(fnv1a("", 0) == 14695981039346656037ULL);
    CHECK(fnv1a("a", 1) == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar", 6) == 0x85944171f73967e8ULL);
}
