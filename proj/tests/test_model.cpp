#include <cmath>
#include <random>

#include <doctest.h>

#include "gmface/model.hpp"
#include "gmface/transform.hpp"
#include "support.hpp"

using namespace gmface;

TEST_CASE("pixel_coords maps 1-based indices to the normalized grid") {
    CHECK(pixel_coords(120, 120, 120, 120).x1 == 1.0);
    CHECK(pixel_coords(120, 120, 120, 120).x2 == 1.0);
    CHECK(pixel_coords(1, 1, 120, 120).x1 == doctest::Approx(1.0 / 120).epsilon(1e-15));
    CHECK(pixel_coords(1, 1, 120, 120).x2 == doctest::Approx(1.0 / 120).epsilon(1e-15));
    CHECK(pixel_coords(60, 30, 120, 120).x1 == 0.5);
    CHECK(pixel_coords(60, 30, 120, 120).x2 == 0.25);

    CHECK_THROWS_AS(pixel_coords(0, 1, 120, 120), std::invalid_argument);
    CHECK_THROWS_AS(pixel_coords(1, 121, 120, 120), std::invalid_argument);
}

TEST_CASE("precision_matrix is L * L^T") {
    const SymMatrix2 a = precision_matrix({2.0, 1.0, 2.0});
    CHECK(a.a11 == 4.0);
    CHECK(a.a12 == 2.0);
    CHECK(a.a22 == 5.0);

    const SymMatrix2 id = precision_matrix({1.0, 0.0, 1.0});
    CHECK(id.a11 == 1.0);
    CHECK(id.a12 == 0.0);
    CHECK(id.a22 == 1.0);

    const SymMatrix2 b = precision_matrix({3.0, -4.0, 1.0});
    CHECK(b.a11 == 9.0);
    CHECK(b.a12 == -12.0);
    CHECK(b.a22 == 17.0);
    // cross-check via re-factorization
    const CholFactor back = cholesky2(b);
    CHECK(back.l11 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(back.l21 == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(back.l22 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("precision_matrix output is positive definite for valid factors") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> diag(1e-3, 50.0);
    std::uniform_real_distribution<double> off(-30.0, 30.0);
    for (int i = 0; i < 500; ++i) {
        const SymMatrix2 a = precision_matrix({diag(rng), off(rng), diag(rng)});
        CHECK(a.a11 > 0.0);
        CHECK(a.a22 > 0.0);
        CHECK(a.det() > 0.0);
    }
}

TEST_CASE("eval_gaussian") {
    GaussianComponent comp;
    comp.w = 3.0;  // must not affect eval_gaussian
    comp.mu = {0.3, 0.7};
    comp.chol = {2.0, -1.0, 1.5};

    SUBCASE("is exactly 1 at the center") {
        CHECK(eval_gaussian(comp, comp.mu) == 1.0);
    }
    SUBCASE("unit quadratic form") {
        GaussianComponent iso;
        iso.mu = {0.0, 0.0};
        iso.chol = {1.0, 0.0, 1.0};
        CHECK(eval_gaussian(iso, {1.0, 0.0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    }
    SUBCASE("matches the published first reference component to 3 significant figures") {
        GaussianComponent ref;
        ref.mu = {0.0592, 0.0641};
        ref.chol = cholesky2({513.51, -75.36, 1226.44});
        CHECK(eval_gaussian(ref, {0.1, 0.1}) == doctest::Approx(0.109).epsilon(5e-3));
    }
    SUBCASE("lies in (0, 1], attaining 1 only at the center") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> unit(-0.5, 1.5);
        for (int i = 0; i < 1000; ++i) {
            const Vec2 x{unit(rng), unit(rng)};
            const double g = eval_gaussian(comp, x);
            CHECK(g > 0.0);
            CHECK(g <= 1.0);
            if (x.x1 != comp.mu.x1 || x.x2 != comp.mu.x2) CHECK(g < 1.0);
        }
    }
}

TEST_CASE("eval_model") {
    GmModel model;
    model.height = model.width = 16;
    GaussianComponent comp;
    comp.mu = {0.5, 0.5};
    comp.chol = {4.0, 0.0, 4.0};

    SUBCASE("zero weight gives zero everywhere") {
        comp.w = 0.0;
        model.components = {comp};
        CHECK(eval_model(model, {0.1, 0.9}) == 0.0);
        CHECK(eval_model(model, comp.mu) == 0.0);
    }
    SUBCASE("peak value equals the weight") {
        comp.w = 0.5;
        model.components = {comp};
        CHECK(eval_model(model, comp.mu) == 0.5);
    }
    SUBCASE("is additive over identical components") {
        comp.w = 0.3;
        model.components = {comp, comp};
        CHECK(eval_model(model, comp.mu) == doctest::Approx(0.6).epsilon(1e-15));
    }
    SUBCASE("is linear in the weight vector") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            GmModel m = gmtest::random_model(rng, 6, 16, 16);
            GmModel scaled = m;
            const double s = 2.75;
            for (auto& cmp : scaled.components) cmp.w *= s;
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            for (int i = 0; i < 10; ++i) {
                const Vec2 x{unit(rng), unit(rng)};
                const double a = eval_model(m, x) * s;
                const double b = eval_model(scaled, x);
                CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
            }
        }
    }
}

TEST_CASE("render") {
    SUBCASE("zero-weight model renders an all-zero grid") {
        GmModel model;
        model.height = 8;
        model.width = 12;
        model.components.push_back({0.0, {0.5, 0.5}, {3.0, 0.0, 3.0}});
        const ImageGrid grid = render(model);
        for (double p : grid.pixels) CHECK(p == 0.0);
    }

    SUBCASE("is pointwise consistent with eval_model") {
        std::mt19937_64 rng(19);
        const GmModel model = gmtest::random_model(rng, 5, 24, 17);
        const ImageGrid grid = render(model);
        std::uniform_int_distribution<int> rr(1, 24), cc(1, 17);
        for (int i = 0; i < 100; ++i) {
            const int r = rr(rng), c = cc(rng);
            CHECK(grid.at(r, c) == eval_model(model, pixel_coords(r, c, 24, 17)));
        }
    }

    SUBCASE("is deterministic") {
        const GmModel model = gmtest::load_reference_model();
        const ImageGrid a = render(model);
        const ImageGrid b = render(model);
        REQUIRE(a.pixels.size() == b.pixels.size());
        for (size_t i = 0; i < a.pixels.size(); ++i) CHECK(a.pixels[i] == b.pixels[i]);
    }

    SUBCASE("mirror-symmetric models render mirrored grids") {
        std::mt19937_64 rng(23);
        const int h = 14, w = 14;
        const GmModel model = gmtest::random_model(rng, 6, h, w);
        // Reflect about the grid's vertical midline: column c maps to
        // W+1-c, i.e. x2 -> (1 + 1/W) - x2; the precision matrix is
        // conjugated by diag(1, -1), which negates l21.
        GmModel mirrored = model;
        for (auto& comp : mirrored.components) {
            comp.mu.x2 = (1.0 + 1.0 / w) - comp.mu.x2;
            comp.chol.l21 = -comp.chol.l21;
        }
        const ImageGrid a = render(model);
        const ImageGrid b = render(mirrored);
        for (int r = 1; r <= h; ++r) {
            for (int c = 1; c <= w; ++c) {
                CHECK(std::abs(b.at(r, c) - a.at(r, w + 1 - c)) < 1e-12);
            }
        }
    }
}

TEST_CASE("parameter_size is 6 per component") {
    CHECK(parameter_size(80) == 480);
    CHECK(parameter_size(40) == 240);
    CHECK(parameter_size(1) == 6);
    CHECK_THROWS_AS(parameter_size(0), std::invalid_argument);
}
