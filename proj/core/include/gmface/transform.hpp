// Closed-form image transforms in parameter space.
//
// Translation, scaling, and rotation of the modeled image are exact
// parameter rewrites of (mu, A): no resampling, no interpolation. Each
// transform T satisfies eval(T(model), x) == eval(model, T_inv(x)) as an
// analytic identity.

#pragma once

#include "gmface/model.hpp"

namespace gmface {

struct RotationSpec {
    double theta = 0.0;  // radians
    Vec2 center;         // rotation center in normalized coordinates
};

// Shift the image content by t: mu_i += t. eval(result, x) == eval(model, x - t).
GmModel translate(const GmModel& model, Vec2 t);

// Sampling semantics: eval(result, x) == eval(model, k * x), so k > 1
// shrinks the rendered content toward the origin (image scales down) and
// k < 1 enlarges it. mu /= k, A *= k^2 (each L entry scaled by |k|), w
// unchanged. Throws for k == 0 or non-finite k; negative k (reflection)
// is rejected.
GmModel scale(const GmModel& model, double k);

// Rotate the content by theta about spec.center, with rotation matrix
// F = [[cos, sin], [-sin, cos]]: A' = F^T A F (re-factorized to L), and
// mu' = F^{-1} (mu + F c - c). eval(result, x) == eval(model, F (x - c) + c).
GmModel rotate(const GmModel& model, const RotationSpec& spec);

// Cholesky factorization of a symmetric positive definite 2x2 matrix.
// Throws std::domain_error if A is not positive definite.
CholFactor cholesky2(const SymMatrix2& a);

// The k components of largest |w|, original relative order preserved, ties
// broken toward the lower original index. Throws for k outside [1, m].
GmModel top_k(const GmModel& model, int k);

}  // namespace gmface
