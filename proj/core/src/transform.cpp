#include "gmface/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace gmface {

GmModel translate(const GmModel& model, Vec2 t) {
    GmModel out = model;
    for (GaussianComponent& comp : out.components) {
        comp.mu.x1 += t.x1;
        comp.mu.x2 += t.x2;
    }
    return out;
}

GmModel scale(const GmModel& model, double k) {
    if (k == 0.0 || !std::isfinite(k)) {
        throw std::invalid_argument("scale: k must be finite and nonzero");
    }
    if (k < 0.0) {
        throw std::invalid_argument("scale: negative k (reflection) is not supported");
    }
    GmModel out = model;
    for (GaussianComponent& comp : out.components) {
        comp.mu.x1 /= k;
        comp.mu.x2 /= k;
        // A -> k^2 A is L -> k L on the factor.
        comp.chol.l11 *= k;
        comp.chol.l21 *= k;
        comp.chol.l22 *= k;
    }
    return out;
}

GmModel rotate(const GmModel& model, const RotationSpec& spec) {
    const double cs = std::cos(spec.theta);
    const double sn = std::sin(spec.theta);
    // F = [[cs, sn], [-sn, cs]]; F^{-1} = F^T.
    const Vec2 c = spec.center;
    // F*c - c
    const double fc1 = cs * c.x1 + sn * c.x2 - c.x1;
    const double fc2 = -sn * c.x1 + cs * c.x2 - c.x2;

    GmModel out = model;
    for (GaussianComponent& comp : out.components) {
        const double v1 = comp.mu.x1 + fc1;
        const double v2 = comp.mu.x2 + fc2;
        comp.mu.x1 = cs * v1 - sn * v2;
        comp.mu.x2 = sn * v1 + cs * v2;

        // A' = F^T A F, positive definite by congruence; re-factorize so the
        // model keeps its canonical L representation.
        const SymMatrix2 a = precision_matrix(comp.chol);
        const double b11 = a.a11 * cs + a.a12 * (-sn);
        const double b12 = a.a11 * sn + a.a12 * cs;
        const double b21 = a.a12 * cs + a.a22 * (-sn);
        const double b22 = a.a12 * sn + a.a22 * cs;
        SymMatrix2 rotated;
        rotated.a11 = cs * b11 - sn * b21;
        rotated.a12 = cs * b12 - sn * b22;
        rotated.a22 = sn * b12 + cs * b22;
        comp.chol = cholesky2(rotated);
    }
    return out;
}

CholFactor cholesky2(const SymMatrix2& a) {
    if (!(a.a11 > 0.0)) {
        throw std::domain_error("cholesky2: matrix not positive definite (a11 <= 0)");
    }
    CholFactor l;
    l.l11 = std::sqrt(a.a11);
    l.l21 = a.a12 / l.l11;
    const double rem = a.a22 - l.l21 * l.l21;
    if (!(rem > 0.0)) {
        throw std::domain_error("cholesky2: matrix not positive definite (Schur complement <= 0)");
    }
    l.l22 = std::sqrt(rem);
    return l;
}

GmModel top_k(const GmModel& model, int k) {
    const int m = model.component_count();
    if (k < 1 || k > m) {
        throw std::invalid_argument("top_k: k must lie in [1, m]");
    }
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    // Largest |w| first; stable sort keeps ties at their lower original index.
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::abs(model.components[a].w) > std::abs(model.components[b].w);
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());  // restore original relative order

    GmModel out;
    out.height = model.height;
    out.width = model.width;
    out.components.reserve(k);
    for (int i : idx) out.components.push_back(model.components[i]);
    return out;
}

}  // namespace gmface
