#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "aros/corrupt.hpp"
#include "aros/dataset.hpp"
#include "aros/errors.hpp"
#include "aros/rng.hpp"
#include "doctest.h"

using namespace aros;
using namespace aros::data;

TEST_SUITE_BEGIN("data");

TEST_CASE("two moons with zero noise lie exactly on the two arcs") {
    const Dataset d = gen_two_moons(101, 0.0, 3);
    REQUIRE(d.n() == 101);
    REQUIRE(d.num_classes() == 2);
    std::int64_t n0 = 0;
    for (std::int64_t i = 0; i < d.n(); ++i) {
        const double px = d.x.at(i, 0), py = d.x.at(i, 1);
        if (d.y[static_cast<std::size_t>(i)] == 0) {
            ++n0;
            CHECK(std::abs(std::hypot(px, py) - 1.0) < 1e-12);
            CHECK(py >= -1e-12);  // upper arc only
        } else {
            CHECK(std::abs(std::hypot(px - 1.0, py - 0.5) - 1.0) < 1e-12);
            CHECK(py <= 0.5 + 1e-12);  // lower arc only
        }
    }
    CHECK(n0 == 51);  // odd n hands the extra point to class 0
}

TEST_CASE("two moons class centroids match the arc means") {
    // The mean of (cos t, sin t) for t uniform on [0, pi] is (0, 2/pi); the
    // second arc is that reflected and shifted to (1, 0.5). With n = 1000 and
    // noise 0.1 the sample means land within 0.05 of the limits.
    const Dataset d = gen_two_moons(1000, 0.1, 42);
    double m0x = 0, m0y = 0, m1x = 0, m1y = 0;
    std::int64_t n0 = 0, n1 = 0;
    for (std::int64_t i = 0; i < d.n(); ++i) {
        if (d.y[static_cast<std::size_t>(i)] == 0) {
            m0x += d.x.at(i, 0);
            m0y += d.x.at(i, 1);
            ++n0;
        } else {
            m1x += d.x.at(i, 0);
            m1y += d.x.at(i, 1);
            ++n1;
        }
    }
    const double two_over_pi = 2.0 / std::numbers::pi;
    CHECK(std::abs(m0x / n0 - 0.0) < 0.05);
    CHECK(std::abs(m0y / n0 - two_over_pi) < 0.05);
    CHECK(std::abs(m1x / n1 - 1.0) < 0.05);
    CHECK(std::abs(m1y / n1 - (0.5 - two_over_pi)) < 0.05);
}

TEST_CASE("generators are deterministic in the seed") {
    const Dataset a = gen_two_moons(64, 0.2, 9);
    const Dataset b = gen_two_moons(64, 0.2, 9);
    const Dataset c = gen_two_moons(64, 0.2, 10);
    REQUIRE(a.x.numel() == b.x.numel());
    for (std::int64_t i = 0; i < a.x.numel(); ++i) CHECK(a.x.data()[i] == b.x.data()[i]);
    bool any_diff = false;
    for (std::int64_t i = 0; i < a.x.numel(); ++i) any_diff |= a.x.data()[i] != c.x.data()[i];
    CHECK(any_diff);
}

TEST_CASE("ring with zero noise has exact radius and covers all octants") {
    const Dataset d = gen_ring(200, 2.0, 0.0, 7);
    REQUIRE(d.n() == 200);
    int octant_hits[8] = {0};
    for (std::int64_t i = 0; i < d.n(); ++i) {
        const double px = d.x.at(i, 0), py = d.x.at(i, 1);
        CHECK(std::abs(std::hypot(px, py) - 2.0) < 1e-12);
        CHECK(d.y[static_cast<std::size_t>(i)] == 0);
        double ang = std::atan2(py, px);
        if (ang < 0) ang += 2.0 * std::numbers::pi;
        ++octant_hits[std::min(7, static_cast<int>(ang / (std::numbers::pi / 4.0)))];
    }
    for (int o = 0; o < 8; ++o) CHECK(octant_hits[o] > 0);
}

TEST_CASE("stratified split hits the requested size with balanced classes") {
    const Dataset d = gen_two_moons(20, 0.1, 11);  // 10 per class
    const auto [train, test] = split(d, 0.5, 5);
    CHECK(train.n() == 10);
    CHECK(test.n() == 10);
    std::int64_t c0 = 0;
    for (std::int64_t v : train.y) c0 += v == 0;
    CHECK(c0 == 5);  // quotas are integral here, so exactly half per class
}

TEST_CASE("split parts are disjoint and their union is the input") {
    const Dataset d = gen_two_moons(37, 0.3, 21);
    const auto [a, b] = split(d, 0.7, 8);
    CHECK(a.n() + b.n() == d.n());
    CHECK(a.n() == 26);  // round(0.7 * 37)
    // Coordinates are almost surely unique, so they identify rows.
    std::set<std::pair<double, double>> seen;
    for (std::int64_t i = 0; i < a.n(); ++i) seen.insert({a.x.at(i, 0), a.x.at(i, 1)});
    for (std::int64_t i = 0; i < b.n(); ++i) seen.insert({b.x.at(i, 0), b.x.at(i, 1)});
    CHECK(static_cast<std::int64_t>(seen.size()) == d.n());
    // Per-class counts stay within one of the exact proportional share.
    for (std::int64_t cls = 0; cls < 2; ++cls) {
        std::int64_t in_a = 0, in_d = 0;
        for (std::int64_t v : a.y) in_a += v == cls;
        for (std::int64_t v : d.y) in_d += v == cls;
        CHECK(std::abs(static_cast<double>(in_a) - 0.7 * static_cast<double>(in_d)) <= 1.0);
    }
}

TEST_CASE("split rejects unusable inputs") {
    const Dataset d = gen_two_moons(10, 0.1, 1);
    CHECK_THROWS_AS(split(d, 0.0, 1), ContractError);
    CHECK_THROWS_AS(split(d, 1.0, 1), ContractError);
    Dataset tiny;
    tiny.x = Tensor::zeros({3, 2});
    tiny.y = {0, 0, 1};  // class 1 has a single sample
    CHECK_THROWS_AS(split(tiny, 0.5, 1), ContractError);
}

TEST_CASE("csv round trip is bit exact") {
    const Dataset d = gen_two_moons(17, 0.3, 13);
    const Dataset back = dataset_from_csv(dataset_to_csv(d));
    REQUIRE(back.n() == d.n());
    for (std::int64_t i = 0; i < d.x.numel(); ++i) CHECK(back.x.data()[i] == d.x.data()[i]);
    CHECK(back.y == d.y);
}

TEST_CASE("csv parser rejects malformed input with the offending line") {
    CHECK_THROWS_AS(dataset_from_csv(""), FormatError);
    CHECK_THROWS_AS(dataset_from_csv("a,b,c\n1,2,0\n"), FormatError);
    CHECK_THROWS_WITH_AS(dataset_from_csv("x0,x1,label\n1.0,2.0,0\n1.0,oops,1\n"),
                         doctest::Contains("line 3"), FormatError);
    CHECK_THROWS_AS(dataset_from_csv("x0,x1,label\n1.0,2.0\n"), FormatError);
    CHECK_THROWS_AS(dataset_from_csv("x0,x1,label\n1.0,2.0,-3\n"), FormatError);
}

TEST_CASE("zero-sigma gaussian noise is the identity") {
    const Dataset d = gen_two_moons(32, 0.2, 17);
    const Tensor out = add_gaussian_noise(d.x, 0.0, 99);
    for (std::int64_t i = 0; i < d.x.numel(); ++i) CHECK(out.data()[i] == d.x.data()[i]);
}

TEST_CASE("gaussian corruption perturbs images inside the unit range") {
    Dataset img;
    img.domain = Domain::kImage;
    img.x = Tensor::full({4, 6, 6}, 0.5);
    img.y.assign(4, 0);
    const CorruptionSpec spec{CorruptionKind::kGaussianNoise, 3};
    const Dataset out = corrupt(img, spec, 5);
    const Dataset out2 = corrupt(img, spec, 5);
    bool moved = false;
    for (std::int64_t i = 0; i < out.x.numel(); ++i) {
        CHECK(out.x.data()[i] >= 0.0);
        CHECK(out.x.data()[i] <= 1.0);
        CHECK(out.x.data()[i] == out2.x.data()[i]);
        moved |= out.x.data()[i] != 0.5;
    }
    CHECK(moved);
    // The input dataset itself is untouched.
    for (std::int64_t i = 0; i < img.x.numel(); ++i) CHECK(img.x.data()[i] == 0.5);
}

TEST_CASE("impulse noise flips close to the tabled fraction of pixels") {
    // Severity 5 flips each pixel with probability 0.10; over 10^4 pixels the
    // binomial deviation is about 0.003, so a 0.01 tolerance is comfortable.
    Dataset img;
    img.domain = Domain::kImage;
    img.x = Tensor::full({100, 10, 10}, 0.5);
    img.y.assign(100, 0);
    const Dataset out = corrupt(img, {CorruptionKind::kImpulseNoise, 5}, 23);
    std::int64_t flipped = 0, extreme = 0;
    for (std::int64_t i = 0; i < out.x.numel(); ++i) {
        flipped += out.x.data()[i] != 0.5;
        extreme += out.x.data()[i] == 0.0 || out.x.data()[i] == 1.0;
    }
    CHECK(flipped == extreme);  // flips go straight to the range ends
    CHECK(std::abs(static_cast<double>(flipped) / 1e4 - 0.10) < 0.01);
}

TEST_CASE("contrast keeps every image mean fixed") {
    Dataset img;
    img.domain = Domain::kImage;
    img.x = Tensor::zeros({3, 5, 5});
    Rng rng(31);
    for (std::int64_t i = 0; i < img.x.numel(); ++i) img.x.data()[i] = rng.uniform();
    img.y.assign(3, 0);
    for (int sev = 1; sev <= 5; ++sev) {
        const Dataset out = corrupt(img, {CorruptionKind::kContrast, sev}, 2);
        for (std::int64_t im = 0; im < 3; ++im) {
            double before = 0, after = 0;
            for (std::int64_t p = 0; p < 25; ++p) {
                before += img.x.data()[im * 25 + p];
                after += out.x.data()[im * 25 + p];
            }
            CHECK(std::abs(before - after) / 25.0 < 1e-12);
        }
    }
}

TEST_CASE("brightness shifts up and clamps at one") {
    Dataset img;
    img.domain = Domain::kImage;
    img.x = Tensor::zeros({1, 2, 2});
    img.x.data()[0] = 0.0;
    img.x.data()[1] = 0.5;
    img.x.data()[2] = 0.9;
    img.x.data()[3] = 1.0;
    img.y.assign(1, 0);
    const Dataset out = corrupt(img, {CorruptionKind::kBrightness, 4}, 3);  // shift 0.20
    CHECK(out.x.data()[0] == doctest::Approx(0.20));
    CHECK(out.x.data()[1] == doctest::Approx(0.70));
    CHECK(out.x.data()[2] == 1.0);
    CHECK(out.x.data()[3] == 1.0);
}

TEST_CASE("shot noise stays near the signal at mild severity") {
    Dataset img;
    img.domain = Domain::kImage;
    img.x = Tensor::full({10, 8, 8}, 0.4);
    img.y.assign(10, 0);
    const Dataset out = corrupt(img, {CorruptionKind::kShotNoise, 1}, 77);
    double mean_abs = 0.0;
    for (std::int64_t i = 0; i < out.x.numel(); ++i) {
        CHECK(out.x.data()[i] >= 0.0);
        CHECK(out.x.data()[i] <= 1.0);
        mean_abs += std::abs(out.x.data()[i] - 0.4);
    }
    // Poisson at rate 0.4 * 500 has sd/rate about 0.045 after rescaling.
    CHECK(mean_abs / static_cast<double>(out.x.numel()) < 0.1);
    CHECK(mean_abs > 0.0);
}

TEST_CASE("defocus blur leaves constant images alone and smooths others") {
    Dataset flat;
    flat.domain = Domain::kImage;
    flat.x = Tensor::full({1, 9, 9}, 0.7);
    flat.y.assign(1, 0);
    const Dataset still = corrupt(flat, {CorruptionKind::kDefocusBlur, 3}, 1);
    for (std::int64_t i = 0; i < still.x.numel(); ++i)
        CHECK(still.x.data()[i] == doctest::Approx(0.7).epsilon(1e-12));

    Dataset noisy;
    noisy.domain = Domain::kImage;
    noisy.x = Tensor::zeros({1, 9, 9});
    Rng rng(5);
    for (std::int64_t i = 0; i < noisy.x.numel(); ++i) noisy.x.data()[i] = rng.uniform();
    noisy.y.assign(1, 0);
    const Dataset smooth = corrupt(noisy, {CorruptionKind::kDefocusBlur, 2}, 1);
    auto variance = [](const Tensor& t) {
        double m = 0;
        for (std::int64_t i = 0; i < t.numel(); ++i) m += t.data()[i];
        m /= static_cast<double>(t.numel());
        double v = 0;
        for (std::int64_t i = 0; i < t.numel(); ++i)
            v += (t.data()[i] - m) * (t.data()[i] - m);
        return v / static_cast<double>(t.numel());
    };
    CHECK(variance(smooth.x) < 0.5 * variance(noisy.x));
}

TEST_CASE("synthetic data accepts noise kinds only") {
    const Dataset d = gen_two_moons(16, 0.1, 2);
    CHECK_THROWS_AS(corrupt(d, {CorruptionKind::kDefocusBlur, 1}, 1), ContractError);
    CHECK_THROWS_AS(corrupt(d, {CorruptionKind::kBrightness, 1}, 1), ContractError);
    CHECK_THROWS_AS(corrupt(d, {CorruptionKind::kContrast, 1}, 1), ContractError);
    CHECK_THROWS_AS(corrupt(d, {CorruptionKind::kGaussianNoise, 0}, 1), ContractError);
    CHECK_THROWS_AS(corrupt(d, {CorruptionKind::kGaussianNoise, 6}, 1), ContractError);
    CHECK_NOTHROW(corrupt(d, {CorruptionKind::kGaussianNoise, 3}, 1));
    CHECK_NOTHROW(corrupt(d, {CorruptionKind::kShotNoise, 3}, 1));
    CHECK_NOTHROW(corrupt(d, {CorruptionKind::kImpulseNoise, 3}, 1));
}

TEST_CASE("synthetic impulse noise snaps to the per-dimension bounding box") {
    const Dataset d = gen_two_moons(64, 0.1, 19);
    double lo[2], hi[2];
    for (int j = 0; j < 2; ++j) {
        lo[j] = hi[j] = d.x.at(0, j);
        for (std::int64_t i = 1; i < d.n(); ++i) {
            lo[j] = std::min(lo[j], d.x.at(i, j));
            hi[j] = std::max(hi[j], d.x.at(i, j));
        }
    }
    const Dataset out = corrupt(d, {CorruptionKind::kImpulseNoise, 5}, 4);
    std::int64_t changed = 0;
    for (std::int64_t i = 0; i < d.n(); ++i)
        for (int j = 0; j < 2; ++j)
            if (out.x.at(i, j) != d.x.at(i, j)) {
                ++changed;
                CHECK((out.x.at(i, j) == lo[j] || out.x.at(i, j) == hi[j]));
            }
    CHECK(changed > 0);
}

TEST_CASE("corruption names round trip and bad ones are config errors") {
    for (CorruptionKind k :
         {CorruptionKind::kGaussianNoise, CorruptionKind::kShotNoise,
          CorruptionKind::kImpulseNoise, CorruptionKind::kDefocusBlur,
          CorruptionKind::kBrightness, CorruptionKind::kContrast})
        CHECK(corruption_from_name(corruption_name(k)) == k);
    CHECK_THROWS_AS(corruption_from_name("salt"), ConfigError);
    CHECK(corruption_param(CorruptionKind::kGaussianNoise, 3) == 0.08);
    CHECK(corruption_param(CorruptionKind::kContrast, 5) == 0.3);
}

TEST_SUITE_END();
