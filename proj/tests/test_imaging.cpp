#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "ladderdet/image.hpp"
#include "ladderdet/image_io.hpp"

using namespace ladderdet;

namespace {

GrayImage ramp_image(int w, int h, double a, double bx, double by) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = a + bx * x + by * y;
    return img;
}

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("crop_pad interior, exterior and straddling rects") {
    GrayImage img(8, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) img.at(x, y) = (y * 8 + x) / 100.0;

    const GrayImage inside = crop_pad(img, {2, 1, 6, 4});
    CHECK(inside.width == 4);
    CHECK(inside.height == 3);
    CHECK(inside.at(0, 0) == doctest::Approx(img.at(2, 1)));
    CHECK(inside.at(3, 2) == doctest::Approx(img.at(5, 3)));

    const GrayImage outside = crop_pad(img, {100, 100, 110, 105});
    for (double v : outside.data) CHECK(v == 0.0);

    const GrayImage straddle = crop_pad(img, {-2, -2, 3, 3});
    CHECK(straddle.width == 5);
    CHECK(straddle.height == 5);
    CHECK(straddle.at(0, 0) == 0.0);                          // padded corner
    CHECK(straddle.at(2, 2) == doctest::Approx(img.at(0, 0))); // interior preserved
    CHECK(straddle.at(4, 4) == doctest::Approx(img.at(2, 2)));
}

TEST_CASE("crop_pad of the full rect is idempotent") {
    GrayImage img(7, 5);
    for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<double>(i) / 40.0;
    const GrayImage once = crop_pad(img, {0, 0, 7, 5});
    const GrayImage twice = crop_pad(once, {0, 0, 7, 5});
    CHECK(once.data == img.data);
    CHECK(twice.data == once.data);
}

TEST_CASE("resize_bicubic identity and constants") {
    GrayImage img(9, 7);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : img.data) v = unit(rng);

    const GrayImage same = resize_bicubic(img, 9, 7);
    for (size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::abs(same.data[i] - img.data[i]) < 1e-12);

    GrayImage flat(5, 5, 0.37);
    const GrayImage big = resize_bicubic(flat, 12, 9);
    for (double v : big.data) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("resize_bicubic reproduces a linear ramp on 2x upscale") {
    // Catmull-Rom reproduces linear functions; compare the interior against
    // the analytically resampled ramp.
    const double a = 0.2, bx = 0.004, by = 0.003;
    const GrayImage img = ramp_image(32, 24, a, bx, by);
    const GrayImage up = resize_bicubic(img, 64, 48);
    for (int y = 4; y < 44; ++y) {
        for (int x = 4; x < 60; ++x) {
            const double sx = (x + 0.5) * (32.0 / 64.0) - 0.5;
            const double sy = (y + 0.5) * (24.0 / 48.0) - 0.5;
            const double expect = a + bx * sx + by * sy;
            CHECK(std::abs(up.at(x, y) - expect) < 1e-6);
        }
    }
}

TEST_CASE("resize_bicubic reproduces a bilinear surface away from borders") {
    GrayImage img(30, 30);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 30; ++x) img.at(x, y) = 0.1 + 0.002 * x + 0.004 * y + 0.0005 * x * y;
    const GrayImage out = resize_bicubic(img, 45, 45);
    for (int y = 6; y < 39; ++y) {
        for (int x = 6; x < 39; ++x) {
            const double sx = (x + 0.5) * (30.0 / 45.0) - 0.5;
            const double sy = (y + 0.5) * (30.0 / 45.0) - 0.5;
            const double expect = 0.1 + 0.002 * sx + 0.004 * sy + 0.0005 * sx * sy;
            CHECK(std::abs(out.at(x, y) - expect) < 1e-6);
        }
    }
}

TEST_CASE("gaussian_blur identity, normalization and impulse response") {
    GrayImage img(16, 16);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : img.data) v = unit(rng);
    const GrayImage same = gaussian_blur(img, 0.0);
    CHECK(same.data == img.data);

    GrayImage flat(20, 20, 0.6);
    const GrayImage blurred = gaussian_blur(flat, 4.0);
    for (double v : blurred.data) CHECK(v == doctest::Approx(0.6).epsilon(1e-12));

    // Unit impulse: center value approaches 1/(2 pi sigma^2).
    const double sigma = 3.0;
    GrayImage impulse(64, 64, 0.0);
    impulse.at(32, 32) = 1.0;
    const GrayImage resp = gaussian_blur(impulse, sigma);
    const double expect = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
    CHECK(std::abs(resp.at(32, 32) - expect) / expect < 0.01);

    // mass preserved for an interior-supported impulse
    double mass = 0.0;
    for (double v : resp.data) mass += v;
    CHECK(std::abs(mass - 1.0) < 1e-6);
}

TEST_CASE("flip_horizontal") {
    GrayImage img(5, 3);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 5; ++x) img.at(x, y) = x * 0.1 + y * 0.01;

    const GrayImage flipped = flip_horizontal(img);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 5; ++x) CHECK(flipped.at(x, y) == img.at(4 - x, y));

    const GrayImage twice = flip_horizontal(flipped);
    CHECK(twice.data == img.data);

    GrayImage symmetric(5, 2);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 5; ++x) symmetric.at(x, y) = std::abs(2 - x) * 0.2;
    const GrayImage still = flip_horizontal(symmetric);
    CHECK(still.data == symmetric.data);
}

TEST_CASE("normalize_minmax") {
    GrayImage img(4, 1);
    img.data = {0.2, 0.4, 0.6, 1.0};
    const GrayImage n = normalize_minmax(img);
    CHECK(n.data[0] == doctest::Approx(0.0));
    CHECK(n.data[3] == doctest::Approx(1.0));
    CHECK(n.data[1] == doctest::Approx(0.25));

    GrayImage flat(3, 3, 0.5);
    const GrayImage z = normalize_minmax(flat);
    for (double v : z.data) CHECK(v == 0.0);
}

TEST_CASE("png round trip at 16 bits") {
    GrayImage img(23, 17);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : img.data) v = unit(rng);

    const auto path = temp_path("ladderdet_test16.png");
    save_png16(img, path.string());
    const GrayImage back = load_image(path.string());
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    for (size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::abs(back.data[i] - img.data[i]) < 1.0 / 65535.0);
    std::filesystem::remove(path);
}

TEST_CASE("png round trip at 8 bits") {
    GrayImage img(9, 11);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : img.data) v = unit(rng);

    const auto path = temp_path("ladderdet_test8.png");
    save_png8(img, path.string());
    const GrayImage back = load_image(path.string());
    REQUIRE(back.width == img.width);
    for (size_t i = 0; i < img.data.size(); ++i)
        CHECK(std::abs(back.data[i] - img.data[i]) < 1.0 / 255.0);
    std::filesystem::remove(path);
}

TEST_CASE("pgm round trip at both depths") {
    GrayImage img(13, 6);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : img.data) v = unit(rng);

    for (int bits : {8, 16}) {
        const auto path = temp_path("ladderdet_test.pgm");
        save_pgm(img, path.string(), bits);
        const GrayImage back = load_image(path.string());
        REQUIRE(back.width == img.width);
        REQUIRE(back.height == img.height);
        const double tol = bits == 8 ? 1.0 / 255.0 : 1.0 / 65535.0;
        for (size_t i = 0; i < img.data.size(); ++i)
            CHECK(std::abs(back.data[i] - img.data[i]) <= tol);
        std::filesystem::remove(path);
    }
}

TEST_CASE("load_image rejects unknown formats") {
    const auto path = temp_path("ladderdet_bogus.bin");
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    std::fputs("not an image", f);
    std::fclose(f);
    CHECK_THROWS(load_image(path.string()));
    std::filesystem::remove(path);
}
