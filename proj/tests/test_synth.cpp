#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "ladderdet/errors.hpp"
#include "ladderdet/synth.hpp"

using namespace ladderdet;

TEST_CASE("degenerate spec stacks congruent quads with equal gaps") {
    ChainSpec spec;
    spec.count = 5;
    spec.shrink = 1.0;
    spec.rotation_jitter = 0.0;
    spec.curve_amplitude = 0.0;
    spec.noise_std = 0.0;
    spec.seed = 1;
    auto [img, ann] = generate_chain(spec);

    REQUIRE(ann.count() == 5);
    const double w0 = distance(ann.quads[0].corners[0], ann.quads[0].corners[1]);
    const double h0 = distance(ann.quads[0].corners[0], ann.quads[0].corners[3]);
    double prev_gap = -1.0;
    for (int k = 0; k < 5; ++k) {
        const Quad& q = ann.quads[static_cast<size_t>(k)];
        CHECK(distance(q.corners[0], q.corners[1]) == doctest::Approx(w0));
        CHECK(distance(q.corners[0], q.corners[3]) == doctest::Approx(h0));
        CHECK(centroid(q).x == doctest::Approx(spec.width / 2.0));
        // axis aligned: TL and TR share y
        CHECK(q.corners[0].y == doctest::Approx(q.corners[1].y));
        if (k > 0) {
            const double gap = ann.quads[static_cast<size_t>(k - 1)].corners[0].y -
                               ann.quads[static_cast<size_t>(k)].corners[3].y;
            if (prev_gap >= 0) CHECK(gap == doctest::Approx(prev_gap).epsilon(1e-9));
            prev_gap = gap;
        }
    }
}

TEST_CASE("generation is deterministic in the seed") {
    ChainSpec spec;
    spec.count = 6;
    spec.seed = 42;
    auto [img1, ann1] = generate_chain(spec);
    auto [img2, ann2] = generate_chain(spec);
    CHECK(img1.data == img2.data);
    REQUIRE(ann1.count() == ann2.count());
    for (int i = 0; i < ann1.count(); ++i)
        for (int c = 0; c < 4; ++c) {
            CHECK(ann1.quads[i].corners[c].x == ann2.quads[i].corners[c].x);
            CHECK(ann1.quads[i].corners[c].y == ann2.quads[i].corners[c].y);
        }

    ChainSpec other = spec;
    other.seed = 43;
    auto [img3, ann3] = generate_chain(other);
    CHECK(img3.data != img1.data);
}

TEST_CASE("annotation is ordered bottom-to-top with the requested count") {
    const ChainSpec spec = sample_spec(ChainSpecRanges::lumbar_like(), 7);
    auto [img, ann] = generate_chain(spec);
    REQUIRE(ann.count() == 7);
    for (int i = 1; i < 7; ++i)
        CHECK(centroid(ann.quads[static_cast<size_t>(i)]).y <
              centroid(ann.quads[static_cast<size_t>(i - 1)]).y);
    CHECK(ann.labels[0] == "V0");
    CHECK(ann.labels[6] == "V6");
}

TEST_CASE("centroids lie inside their own quad and outside all others") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const ChainSpec spec = sample_spec(ChainSpecRanges::wholespine_like(), seed);
        auto [img, ann] = generate_chain(spec);
        for (int i = 0; i < ann.count(); ++i) {
            const Point2 c = centroid(ann.quads[static_cast<size_t>(i)]);
            for (int j = 0; j < ann.count(); ++j) {
                const bool inside = point_in_quad(c, ann.quads[static_cast<size_t>(j)]);
                CHECK(inside == (i == j));
            }
        }
    }
}

TEST_CASE("rendered bodies are detectable above the background") {
    const ChainSpec spec = sample_spec(ChainSpecRanges::lumbar_like(), 11);
    auto [img, ann] = generate_chain(spec);

    // background mean: pixels far from every quad
    double bg_sum = 0.0;
    long bg_n = 0;
    for (int y = 0; y < img.height; y += 3) {
        for (int x = 0; x < img.width; x += 3) {
            bool near = false;
            for (const Quad& q : ann.quads) {
                const Point2 c = centroid(q);
                if (std::abs(c.x - x) < 60 && std::abs(c.y - y) < 60) {
                    near = true;
                    break;
                }
            }
            if (!near) {
                bg_sum += img.at(x, y);
                ++bg_n;
            }
        }
    }
    REQUIRE(bg_n > 0);
    const double bg_mean = bg_sum / static_cast<double>(bg_n);

    for (const Quad& q : ann.quads) {
        double sum = 0.0;
        long n = 0;
        const Rect r = tight_rect(q);
        for (int y = static_cast<int>(r.y0); y <= static_cast<int>(r.y1); ++y)
            for (int x = static_cast<int>(r.x0); x <= static_cast<int>(r.x1); ++x)
                if (point_in_quad({static_cast<double>(x), static_cast<double>(y)}, q)) {
                    sum += img.at(x, y);
                    ++n;
                }
        REQUIRE(n > 0);
        CHECK(sum / static_cast<double>(n) > bg_mean + 3.0 * spec.noise_std);
    }
}

TEST_CASE("chains that cannot fit are rejected") {
    ChainSpec spec;
    spec.count = 30;
    spec.width = 120;
    spec.height = 160; // far too small for 30 instances
    spec.seed = 3;
    CHECK_THROWS_AS(generate_chain(spec), DataError);

    ChainSpec bad;
    bad.count = 1;
    CHECK_THROWS_AS(generate_chain(bad), std::invalid_argument);
}

TEST_CASE("split_dataset sizes, disjointness and determinism") {
    const auto ranges = ChainSpecRanges::lumbar_like();
    const DatasetSplit s = split_dataset(10, ranges, 0.8, 0.1, 0.1, 5);
    CHECK(s.specs.size() == 10);
    CHECK(s.train.size() == 8);
    CHECK(s.val.size() == 1);
    CHECK(s.test.size() == 1);

    std::set<int> all;
    for (int i : s.train) all.insert(i);
    for (int i : s.val) all.insert(i);
    for (int i : s.test) all.insert(i);
    CHECK(all.size() == 10);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 9);

    const DatasetSplit again = split_dataset(10, ranges, 0.8, 0.1, 0.1, 5);
    CHECK(again.train == s.train);
    CHECK(again.val == s.val);
    CHECK(again.test == s.test);
    for (size_t i = 0; i < s.specs.size(); ++i) CHECK(again.specs[i].seed == s.specs[i].seed);

    CHECK_THROWS_AS(split_dataset(10, ranges, 0.5, 0.1, 0.1, 5), std::invalid_argument);
}

TEST_CASE("sampled specs stay inside the requested ranges") {
    const auto ranges = ChainSpecRanges::wholespine_like();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ChainSpec s = sample_spec(ranges, seed);
        CHECK(s.count == 23);
        CHECK(s.base_size >= ranges.base_size.lo);
        CHECK(s.base_size <= ranges.base_size.hi);
        CHECK(s.shrink >= ranges.shrink.lo);
        CHECK(s.shrink <= ranges.shrink.hi);
        CHECK(s.noise_std >= ranges.noise_std.lo);
        CHECK(s.noise_std <= ranges.noise_std.hi);
    }
}
