#include "gmface/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace gmface {

namespace {

void check_targets(const GmModel& model, std::span<const ImageGrid* const> targets) {
    if (targets.empty()) {
        throw std::invalid_argument("empty target set");
    }
    for (const ImageGrid* t : targets) {
        if (t->height != model.height || t->width != model.width) {
            throw std::invalid_argument(
                "target dimensions " + std::to_string(t->height) + "x" +
                std::to_string(t->width) + " do not match model grid " +
                std::to_string(model.height) + "x" + std::to_string(model.width));
        }
    }
}

std::vector<const ImageGrid*> as_pointers(std::span<const ImageGrid> targets) {
    std::vector<const ImageGrid*> ptrs;
    ptrs.reserve(targets.size());
    for (const ImageGrid& t : targets) ptrs.push_back(&t);
    return ptrs;
}

LossReport loss_impl(const GmModel& model, std::span<const ImageGrid* const> targets,
                     double alpha) {
    check_targets(model, targets);
    const int h = model.height;
    const int w = model.width;
    const double n_terms =
        static_cast<double>(targets.size()) * h * w;

    double sq_sum = 0.0;
    double max_abs = -1.0;
    PixelRef argmax;
    for (size_t j = 0; j < targets.size(); ++j) {
        const ImageGrid& f = *targets[j];
        for (int r = 1; r <= h; ++r) {
            const double x1 = static_cast<double>(r) / h;
            for (int c = 1; c <= w; ++c) {
                const double x2 = static_cast<double>(c) / w;
                const double e = eval_model(model, {x1, x2}) - f.at(r, c);
                sq_sum += e * e;
                if (std::abs(e) > max_abs) {
                    max_abs = std::abs(e);
                    argmax = {static_cast<int>(j), r, c};
                }
            }
        }
    }

    LossReport report;
    report.l2 = sq_sum / n_terms;
    report.l_inf = max_abs;
    report.total = report.l2 + alpha * report.l_inf;
    report.argmax_pixel = argmax;
    return report;
}

// dGmFace/dp for every parameter of one component at one point, given the
// unweighted Gaussian value g there.
ComponentGrad surface_partials(const GaussianComponent& comp, Vec2 x, double g) {
    const double d1 = x.x1 - comp.mu.x1;
    const double d2 = x.x2 - comp.mu.x2;
    const double u1 = comp.chol.l11 * d1 + comp.chol.l21 * d2;
    const double u2 = comp.chol.l22 * d2;
    const double wg2 = 2.0 * comp.w * g;
    ComponentGrad p;
    p.d_w = g;
    p.d_mu.x1 = wg2 * (comp.chol.l11 * u1);
    p.d_mu.x2 = wg2 * (comp.chol.l21 * u1 + comp.chol.l22 * u2);
    p.d_l11 = -wg2 * d1 * u1;
    p.d_l21 = -wg2 * d2 * u1;
    p.d_l22 = -wg2 * d2 * u2;
    return p;
}

// Accumulates e * dGmFace/dp over a set of pixels, tracking the peak error
// for the Linf subgradient. finish() turns the raw sums into the gradient of
// mean(e^2) + alpha * max|e| over the pixels seen.
class GradAccum {
public:
    explicit GradAccum(int m) : m_(m), grads_(m), g_buf_(m), d1_buf_(m), d2_buf_(m) {}

    void add_pixel(const GmModel& model, const ImageGrid& f, int r, int c) {
        const double x1 = static_cast<double>(r) / model.height;
        const double x2 = static_cast<double>(c) / model.width;
        double gmface = 0.0;
        for (int i = 0; i < m_; ++i) {
            const GaussianComponent& comp = model.components[i];
            const double g = eval_gaussian(comp, {x1, x2});
            g_buf_[i] = g;
            d1_buf_[i] = x1 - comp.mu.x1;
            d2_buf_[i] = x2 - comp.mu.x2;
            gmface += comp.w * g;
        }
        const double e = gmface - f.at(r, c);
        for (int i = 0; i < m_; ++i) {
            const GaussianComponent& comp = model.components[i];
            const double g = g_buf_[i];
            const double d1 = d1_buf_[i];
            const double d2 = d2_buf_[i];
            const double u1 = comp.chol.l11 * d1 + comp.chol.l21 * d2;
            const double u2 = comp.chol.l22 * d2;
            const double ewg2 = 2.0 * e * comp.w * g;
            grads_[i].d_w += e * g;
            grads_[i].d_mu.x1 += ewg2 * (comp.chol.l11 * u1);
            grads_[i].d_mu.x2 += ewg2 * (comp.chol.l21 * u1 + comp.chol.l22 * u2);
            grads_[i].d_l11 += -ewg2 * d1 * u1;
            grads_[i].d_l21 += -ewg2 * d2 * u1;
            grads_[i].d_l22 += -ewg2 * d2 * u2;
        }
        if (std::abs(e) > max_abs_) {
            max_abs_ = std::abs(e);
            argmax_err_ = e;
            argmax_x_ = {x1, x2};
        }
        ++count_;
    }

    GradientSet finish(const GmModel& model, double alpha) {
        const double scale = 2.0 / static_cast<double>(count_);
        for (ComponentGrad& g : grads_) {
            g.d_w *= scale;
            g.d_mu.x1 *= scale;
            g.d_mu.x2 *= scale;
            g.d_l11 *= scale;
            g.d_l21 *= scale;
            g.d_l22 *= scale;
        }
        if (alpha != 0.0) {
            // Subgradient of the max term: route alpha * sign(e) through the
            // single maximizing pixel.
            const double s = argmax_err_ >= 0.0 ? alpha : -alpha;
            for (int i = 0; i < m_; ++i) {
                const GaussianComponent& comp = model.components[i];
                const ComponentGrad p =
                    surface_partials(comp, argmax_x_, eval_gaussian(comp, argmax_x_));
                grads_[i].d_w += s * p.d_w;
                grads_[i].d_mu.x1 += s * p.d_mu.x1;
                grads_[i].d_mu.x2 += s * p.d_mu.x2;
                grads_[i].d_l11 += s * p.d_l11;
                grads_[i].d_l21 += s * p.d_l21;
                grads_[i].d_l22 += s * p.d_l22;
            }
        }
        return std::move(grads_);
    }

private:
    int m_;
    GradientSet grads_;
    std::vector<double> g_buf_, d1_buf_, d2_buf_;
    long count_ = 0;
    double max_abs_ = -1.0;
    double argmax_err_ = 0.0;
    Vec2 argmax_x_;
};

GradientSet gradients_impl(const GmModel& model, std::span<const ImageGrid* const> targets,
                           double alpha) {
    check_targets(model, targets);
    GradAccum accum(model.component_count());
    for (const ImageGrid* f : targets) {
        for (int r = 1; r <= model.height; ++r) {
            for (int c = 1; c <= model.width; ++c) {
                accum.add_pixel(model, *f, r, c);
            }
        }
    }
    return accum.finish(model, alpha);
}

GradientSet pixel_batch_gradients(const GmModel& model,
                                  std::span<const ImageGrid* const> targets,
                                  std::span<const PixelRef> batch, double alpha) {
    GradAccum accum(model.component_count());
    for (const PixelRef& px : batch) {
        accum.add_pixel(model, *targets[px.image], px.r, px.c);
    }
    return accum.finish(model, alpha);
}

// Flat parameter indexing, 6 scalars per component.
double& param_ref(GmModel& model, int flat) {
    GaussianComponent& comp = model.components[flat / 6];
    switch (flat % 6) {
        case 0: return comp.w;
        case 1: return comp.mu.x1;
        case 2: return comp.mu.x2;
        case 3: return comp.chol.l11;
        case 4: return comp.chol.l21;
        default: return comp.chol.l22;
    }
}

double grad_at(const GradientSet& grads, int flat) {
    const ComponentGrad& g = grads[flat / 6];
    switch (flat % 6) {
        case 0: return g.d_w;
        case 1: return g.d_mu.x1;
        case 2: return g.d_mu.x2;
        case 3: return g.d_l11;
        case 4: return g.d_l21;
        default: return g.d_l22;
    }
}

}  // namespace

void FitConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("FitConfig: epochs must be >= 1");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("FitConfig: alpha must be finite and >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("FitConfig: learning_rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
        throw std::invalid_argument("FitConfig: beta1, beta2 must lie in (0, 1)");
    if (!(adam_epsilon > 0.0)) throw std::invalid_argument("FitConfig: adam_epsilon must be positive");
    if (batch_size < 1) throw std::invalid_argument("FitConfig: batch_size must be >= 1");
    if (!(l_diag_floor > 0.0)) throw std::invalid_argument("FitConfig: l_diag_floor must be positive");
    if (!init_from && components < 1)
        throw std::invalid_argument("FitConfig: components must be >= 1");
}

AdamState AdamState::zeros(int components) {
    AdamState s;
    s.m.assign(static_cast<size_t>(components) * 6, 0.0);
    s.v.assign(static_cast<size_t>(components) * 6, 0.0);
    return s;
}

LossReport compute_loss(const GmModel& model, std::span<const ImageGrid> targets,
                        double alpha) {
    const auto ptrs = as_pointers(targets);
    return loss_impl(model, ptrs, alpha);
}

GradientSet compute_gradients(const GmModel& model, std::span<const ImageGrid> targets,
                              double alpha) {
    const auto ptrs = as_pointers(targets);
    return gradients_impl(model, ptrs, alpha);
}

GradientSet finite_diff_gradients(const GmModel& model, std::span<const ImageGrid> targets,
                                  double alpha, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("finite_diff_gradients: h must be positive");
    }
    const auto ptrs = as_pointers(targets);
    const int n = model.component_count() * 6;
    GmModel probe = model;
    GradientSet grads(model.component_count());
    for (int flat = 0; flat < n; ++flat) {
        double& p = param_ref(probe, flat);
        const double saved = p;
        p = saved + h;
        const double above = loss_impl(probe, ptrs, alpha).total;
        p = saved - h;
        const double below = loss_impl(probe, ptrs, alpha).total;
        p = saved;
        const double d = (above - below) / (2.0 * h);
        ComponentGrad& g = grads[flat / 6];
        switch (flat % 6) {
            case 0: g.d_w = d; break;
            case 1: g.d_mu.x1 = d; break;
            case 2: g.d_mu.x2 = d; break;
            case 3: g.d_l11 = d; break;
            case 4: g.d_l21 = d; break;
            default: g.d_l22 = d; break;
        }
    }
    return grads;
}

void adam_step(GmModel& model, const GradientSet& grads, AdamState& state, int t,
               const FitConfig& cfg) {
    if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");
    const int n = model.component_count() * 6;
    if (static_cast<int>(state.m.size()) != n || static_cast<int>(grads.size()) * 6 != n) {
        throw std::invalid_argument("adam_step: state or gradient shape mismatch");
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (int flat = 0; flat < n; ++flat) {
        const double g = grad_at(grads, flat);
        state.m[flat] = cfg.beta1 * state.m[flat] + (1.0 - cfg.beta1) * g;
        state.v[flat] = cfg.beta2 * state.v[flat] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[flat] / bc1;
        const double v_hat = state.v[flat] / bc2;
        param_ref(model, flat) -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
    }
}

GmModel project_constraints(GmModel model, double l_diag_floor) {
    if (!(l_diag_floor > 0.0)) {
        throw std::invalid_argument("project_constraints: l_diag_floor must be positive");
    }
    for (GaussianComponent& comp : model.components) {
        comp.chol.l11 = std::max(comp.chol.l11, l_diag_floor);
        comp.chol.l22 = std::max(comp.chol.l22, l_diag_floor);
    }
    return model;
}

GmModel init_model(int m, int height, int width, std::uint64_t seed) {
    if (m < 1 || height < 1 || width < 1) {
        throw std::invalid_argument("init_model: m, height, width must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> diag(5.0, 15.0);
    std::uniform_real_distribution<double> weight(-0.1, 0.1);

    GmModel model;
    model.height = height;
    model.width = width;
    model.components.resize(m);
    for (GaussianComponent& comp : model.components) {
        comp.mu.x1 = unit(rng);
        comp.mu.x2 = unit(rng);
        comp.chol.l11 = diag(rng);
        comp.chol.l21 = 0.0;
        comp.chol.l22 = diag(rng);
        comp.w = weight(rng);
    }
    return model;
}

FitResult fit(std::span<const ImageGrid> targets, const FitConfig& cfg,
              const FitObserver& observer) {
    cfg.validate();
    if (targets.empty()) {
        throw std::invalid_argument("fit: empty target set");
    }
    const int h = targets[0].height;
    const int w = targets[0].width;

    GmModel model;
    if (cfg.init_from) {
        model = *cfg.init_from;
        if (model.height != h || model.width != w) {
            throw std::invalid_argument("fit: init model grid does not match targets");
        }
    } else {
        model = init_model(cfg.components, h, w, cfg.seed);
    }

    const auto all = as_pointers(targets);
    check_targets(model, all);

    AdamState state = AdamState::zeros(model.component_count());
    std::mt19937_64 rng(cfg.seed);
    std::vector<PixelRef> pixels;
    pixels.reserve(targets.size() * static_cast<size_t>(h) * w);
    for (size_t j = 0; j < targets.size(); ++j) {
        for (int r = 1; r <= h; ++r) {
            for (int c = 1; c <= w; ++c) {
                pixels.push_back({static_cast<int>(j), r, c});
            }
        }
    }

    FitResult result;
    result.history.reserve(cfg.epochs);

    int t = 0;
    const size_t batch_size = static_cast<size_t>(cfg.batch_size);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(pixels.begin(), pixels.end(), rng);
        for (size_t begin = 0; begin < pixels.size(); begin += batch_size) {
            const size_t end = std::min(pixels.size(), begin + batch_size);
            const std::span<const PixelRef> batch(pixels.data() + begin, end - begin);
            const GradientSet grads = pixel_batch_gradients(model, all, batch, cfg.alpha);
            adam_step(model, grads, state, ++t, cfg);
            model = project_constraints(std::move(model), cfg.l_diag_floor);
            if (observer.on_step) observer.on_step(t, model);
        }
        const LossReport report = loss_impl(model, all, cfg.alpha);
        result.history.emplace_back(epoch, report);
        if (observer.on_epoch) observer.on_epoch(epoch, report);
    }

    result.final_loss = result.history.back().second;
    result.model = std::move(model);
    return result;
}

}  // namespace gmface
