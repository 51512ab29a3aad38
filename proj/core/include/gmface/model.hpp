// Multi-Gaussian image model: data types and surface evaluation.
//
// An image is represented as a weighted sum of m anisotropic 2D Gaussian
// bells over normalized pixel coordinates. Each bell is parameterized by a
// weight w, a center mu, and the lower-triangular Cholesky factor L of its
// precision matrix A = L*L^T, which keeps A positive definite under
// unconstrained optimization of the L entries.
//
// Coordinate convention (fixed repo-wide): x1 = r/H runs over rows,
// x2 = c/W runs over columns, with 1-based pixel indices, so the grid covers
// [1/H, 1] x [1/W, 1].

#pragma once

#include <cstddef>
#include <vector>

namespace gmface {

struct Vec2 {
    double x1 = 0.0;  // normalized row coordinate
    double x2 = 0.0;  // normalized column coordinate
};

// Lower-triangular 2x2 Cholesky factor; l12 is implicitly zero.
// Valid instances have l11 > 0 and l22 > 0.
struct CholFactor {
    double l11 = 1.0;
    double l21 = 0.0;
    double l22 = 1.0;

    bool valid() const { return l11 > 0.0 && l22 > 0.0; }
};

// Symmetric 2x2 matrix, a21 = a12 implied.
struct SymMatrix2 {
    double a11 = 1.0;
    double a12 = 0.0;
    double a22 = 1.0;

    double det() const { return a11 * a22 - a12 * a12; }
};

struct GaussianComponent {
    double w = 0.0;
    Vec2 mu;
    CholFactor chol;
};

struct GmModel {
    std::vector<GaussianComponent> components;
    int height = 0;  // H, pixels
    int width = 0;   // W, pixels

    int component_count() const { return static_cast<int>(components.size()); }
};

// Row-major H x W grid of gray intensities. Fit targets hold values in
// [0, 1]; rendered grids are unclamped (clamping happens at image export
// only, clamping inside the optimizer would zero gradients).
struct ImageGrid {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;  // length height * width

    // 1-based pixel access matching the coordinate convention.
    double& at(int r, int c) { return pixels[static_cast<size_t>(r - 1) * width + (c - 1)]; }
    double at(int r, int c) const { return pixels[static_cast<size_t>(r - 1) * width + (c - 1)]; }

    static ImageGrid zeros(int height, int width);
};

// Normalized coordinates of pixel (r, c), 1-based: (r/H, c/W).
// Throws std::invalid_argument on out-of-range indices.
Vec2 pixel_coords(int r, int c, int height, int width);

// A = L*L^T.
SymMatrix2 precision_matrix(const CholFactor& chol);

// exp{-(x-mu)^T A (x-mu)}; in (0, 1], equal to 1 only at x = mu.
// The weight w is not applied here.
double eval_gaussian(const GaussianComponent& comp, Vec2 x);

// sum_i w_i * eval_gaussian(comp_i, x); unclamped.
double eval_model(const GmModel& model, Vec2 x);

// Evaluate the model over its own H x W pixel grid. Deterministic and
// independent of the internal thread count (each pixel is computed
// independently); GMFACE_THREADS caps the parallelism.
ImageGrid render(const GmModel& model);

// Total scalar parameter count of an m-component model: 6 per component
// (w, two mu entries, three L entries). Throws for m < 1.
int parameter_size(int m);

}  // namespace gmface
