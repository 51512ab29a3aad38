// Loss, analytic gradients, and the Adam fitting loop.
//
// The training objective is Loss = L2 + alpha * Linf, where L2 is the mean
// squared pixel error over all target images and Linf is the peak absolute
// pixel error (a max, not a mean). Gradients of the model surface w.r.t.
// every parameter are hand-derived in closed form; the Linf term is routed
// as a subgradient through the single maximizing pixel.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gmface/model.hpp"

namespace gmface {

struct FitConfig {
    int epochs = 2000;
    double alpha = 0.1;           // weight of the peak-absolute-error term
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int batch_size = 256;         // pixels per mini-batch
    std::uint64_t seed = 0;
    double l_diag_floor = 1e-6;   // clamp floor for l11, l22 after each step

    // Random initialization with this many components, unless init_from is
    // set, in which case fitting warm-starts from a copy of that model.
    int components = 80;
    std::optional<GmModel> init_from;

    void validate() const;  // throws std::invalid_argument on bad settings
};

struct ComponentGrad {
    double d_w = 0.0;
    Vec2 d_mu;
    double d_l11 = 0.0;
    double d_l21 = 0.0;
    double d_l22 = 0.0;
};

using GradientSet = std::vector<ComponentGrad>;

struct PixelRef {
    int image = 0;  // 0-based index into the target sequence
    int r = 1;      // 1-based pixel indices
    int c = 1;
};

struct LossReport {
    double l2 = 0.0;     // mean squared error over all images and pixels
    double l_inf = 0.0;  // peak absolute error
    double total = 0.0;  // l2 + alpha * l_inf
    PixelRef argmax_pixel;
};

struct FitResult {
    GmModel model;
    std::vector<std::pair<int, LossReport>> history;  // one entry per epoch
    LossReport final_loss;
};

// Per-scalar Adam moment accumulators, laid out as 6 doubles per component
// in the order (w, mu.x1, mu.x2, l11, l21, l22).
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;

    static AdamState zeros(int components);
};

// Optional hooks into the fitting loop. on_epoch fires after the epoch-end
// full-dataset loss evaluation; on_step fires after every Adam step and
// constraint projection (step index starts at 1).
struct FitObserver {
    std::function<void(int epoch, const LossReport&)> on_epoch;
    std::function<void(long step, const GmModel&)> on_step;
};

// Loss over the full target set. Ties in the argmax are broken by the first
// pixel in (image, row-major) order. Throws on an empty target set or a
// dimension mismatch with the model grid.
LossReport compute_loss(const GmModel& model, std::span<const ImageGrid> targets,
                        double alpha);

// d(total)/d(params). The L2 part is (2/(N*H*W)) * sum e * dGmFace/dp over
// every pixel of every target; with alpha != 0 the Linf subgradient
// alpha * sign(e) * dGmFace/dp at the argmax pixel is added. With alpha == 0
// the Linf path is not evaluated at all, so alpha = 0 is bitwise identical
// to a pure-MSE computation.
GradientSet compute_gradients(const GmModel& model, std::span<const ImageGrid> targets,
                              double alpha);

// Central-difference gradients of the same objective, (loss(p+h) -
// loss(p-h)) / 2h per scalar; the test oracle for compute_gradients.
// Throws for h <= 0.
GradientSet finite_diff_gradients(const GmModel& model, std::span<const ImageGrid> targets,
                                  double alpha, double h = 1e-6);

// One Adam update with bias correction, applied elementwise to every scalar
// parameter. t is the 1-based step index.
void adam_step(GmModel& model, const GradientSet& grads, AdamState& state, int t,
               const FitConfig& cfg);

// Clamp l11 and l22 up to l_diag_floor; l21 untouched. Keeps every
// precision matrix positive definite after unconstrained Adam steps.
GmModel project_constraints(GmModel model, double l_diag_floor);

// Seed-deterministic random model: mu uniform in [0,1]^2, l11 and l22
// uniform in [5, 15], l21 = 0, w uniform in [-0.1, 0.1].
GmModel init_model(int m, int height, int width, std::uint64_t seed);

// Run the fitting loop: per epoch, seed-deterministic shuffle of every pixel
// of every target, mini-batches of cfg.batch_size pixels, per batch a
// gradient step (the peak-error term uses the batch maximum) plus constraint
// projection, then an epoch-end loss over the full target set.
FitResult fit(std::span<const ImageGrid> targets, const FitConfig& cfg,
              const FitObserver& observer = {});

}  // namespace gmface
