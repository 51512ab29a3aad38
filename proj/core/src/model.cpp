#include "gmface/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gmface {

ImageGrid ImageGrid::zeros(int height, int width) {
    if (height < 1 || width < 1) {
        throw std::invalid_argument("ImageGrid: dimensions must be positive");
    }
    ImageGrid g;
    g.height = height;
    g.width = width;
    g.pixels.assign(static_cast<size_t>(height) * width, 0.0);
    return g;
}

Vec2 pixel_coords(int r, int c, int height, int width) {
    if (r < 1 || r > height || c < 1 || c > width) {
        throw std::invalid_argument("pixel_coords: index (" + std::to_string(r) + ", " +
                                    std::to_string(c) + ") out of range for " +
                                    std::to_string(height) + "x" + std::to_string(width));
    }
    return {static_cast<double>(r) / height, static_cast<double>(c) / width};
}

SymMatrix2 precision_matrix(const CholFactor& chol) {
    SymMatrix2 a;
    a.a11 = chol.l11 * chol.l11;
    a.a12 = chol.l11 * chol.l21;
    a.a22 = chol.l21 * chol.l21 + chol.l22 * chol.l22;
    return a;
}

double eval_gaussian(const GaussianComponent& comp, Vec2 x) {
    const double d1 = x.x1 - comp.mu.x1;
    const double d2 = x.x2 - comp.mu.x2;
    // Quadratic form via u = L^T d, so q = |u|^2 >= 0 by construction.
    const double u1 = comp.chol.l11 * d1 + comp.chol.l21 * d2;
    const double u2 = comp.chol.l22 * d2;
    return std::exp(-(u1 * u1 + u2 * u2));
}

double eval_model(const GmModel& model, Vec2 x) {
    double sum = 0.0;
    for (const auto& comp : model.components) {
        sum += comp.w * eval_gaussian(comp, x);
    }
    return sum;
}

namespace {

int thread_budget() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("GMFACE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned long>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return static_cast<int>(n);
}

}  // namespace

ImageGrid render(const GmModel& model) {
    if (model.components.empty() || model.height < 1 || model.width < 1) {
        throw std::invalid_argument("render: invalid model");
    }
    ImageGrid grid = ImageGrid::zeros(model.height, model.width);
    const int h = model.height;
    const int w = model.width;

    auto render_rows = [&](int r_begin, int r_end) {
        for (int r = r_begin; r < r_end; ++r) {
            const double x1 = static_cast<double>(r + 1) / h;
            for (int c = 0; c < w; ++c) {
                const double x2 = static_cast<double>(c + 1) / w;
                grid.pixels[static_cast<size_t>(r) * w + c] = eval_model(model, {x1, x2});
            }
        }
    };

    // Each pixel is written independently, so the output is bit-identical
    // for any thread count.
    const int threads = std::min(thread_budget(), h);
    if (threads <= 1) {
        render_rows(0, h);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        const int chunk = (h + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(h, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(render_rows, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return grid;
}

int parameter_size(int m) {
    if (m < 1) {
        throw std::invalid_argument("parameter_size: m must be >= 1");
    }
    return 6 * m;
}

}  // namespace gmface
