// gmface: fit, render, transform, and inspect multi-Gaussian image models.
//
// Exit codes: 0 success, 1 usage error, 2 runtime/data error.
// Progress goes to stderr; machine-readable results to stdout.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gmface/io.hpp"
#include "gmface/model.hpp"
#include "gmface/train.hpp"
#include "gmface/transform.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

void print_loss(const gmface::LossReport& report) {
    std::printf("l2=%.17g l_inf=%.17g total=%.17g\n", report.l2, report.l_inf, report.total);
}

struct FitArgs {
    std::string input;
    std::string out;
    std::string history;
    std::string init = "random";
    int components = 80;
    int epochs = 2000;
    double alpha = 0.1;
    double lr = 1e-3;
    int batch_size = 256;
    std::uint64_t seed = 0;
    int log_every = 100;
};

int run_fit(const FitArgs& args) {
    std::vector<gmface::ImageGrid> targets;
    if (std::filesystem::is_directory(args.input)) {
        targets = gmface::load_dataset(args.input);
    } else {
        targets.push_back(gmface::read_image(args.input));
    }
    std::fprintf(stderr, "loaded %zu target image(s), %dx%d\n", targets.size(),
                 targets.front().height, targets.front().width);

    gmface::FitConfig cfg;
    cfg.epochs = args.epochs;
    cfg.alpha = args.alpha;
    cfg.learning_rate = args.lr;
    cfg.batch_size = args.batch_size;
    cfg.seed = args.seed;
    cfg.components = args.components;
    if (args.init != "random") {
        cfg.init_from = gmface::read_model(args.init);
    }

    gmface::FitObserver observer;
    observer.on_epoch = [&](int epoch, const gmface::LossReport& report) {
        if (args.log_every > 0 && (epoch % args.log_every == 0 || epoch == args.epochs)) {
            std::fprintf(stderr, "epoch %d: l2=%.6g l_inf=%.6g total=%.6g\n", epoch, report.l2,
                         report.l_inf, report.total);
        }
    };

    const gmface::FitResult result = gmface::fit(targets, cfg, observer);
    gmface::write_model(result.model, args.out);
    if (!args.history.empty()) {
        gmface::export_loss_history(result.history, args.history);
    }
    print_loss(result.final_loss);
    return 0;
}

struct TransformArgs {
    std::string model;
    std::string out;
    std::vector<double> translate;
    std::optional<double> scale;
    std::optional<double> rotate_deg;
    std::vector<double> center{0.5, 0.5};
};

int run_transform(const TransformArgs& args) {
    const int selected = (!args.translate.empty() ? 1 : 0) + (args.scale ? 1 : 0) +
                         (args.rotate_deg ? 1 : 0);
    if (selected != 1) {
        std::fprintf(stderr, "transform: exactly one of --translate, --scale, --rotate required\n");
        return kExitUsage;
    }
    if (args.scale && (*args.scale == 0.0 || !std::isfinite(*args.scale) || *args.scale < 0.0)) {
        std::fprintf(stderr, "transform: --scale requires a finite positive factor\n");
        return kExitUsage;
    }

    const gmface::GmModel model = gmface::read_model(args.model);
    gmface::GmModel out;
    if (!args.translate.empty()) {
        out = gmface::translate(model, {args.translate[0], args.translate[1]});
    } else if (args.scale) {
        out = gmface::scale(model, *args.scale);
    } else {
        gmface::RotationSpec spec;
        spec.theta = *args.rotate_deg * std::numbers::pi / 180.0;
        spec.center = {args.center[0], args.center[1]};
        out = gmface::rotate(model, spec);
    }
    gmface::write_model(out, args.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-Gaussian image models: fitting, rendering, and parameter-space transforms"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Fit a model to one image or a directory of images");
    fit->add_option("--input", fit_args.input, "Target PGM file or directory of PGM files")
        ->required();
    fit->add_option("--components", fit_args.components, "Number of Gaussian components (random init)");
    fit->add_option("--epochs", fit_args.epochs, "Training epochs");
    fit->add_option("--alpha", fit_args.alpha, "Weight of the peak-absolute-error loss term");
    fit->add_option("--lr", fit_args.lr, "Adam learning rate");
    fit->add_option("--batch-size", fit_args.batch_size, "Pixels per mini-batch");
    fit->add_option("--seed", fit_args.seed, "RNG seed (init + shuffling)");
    fit->add_option("--init", fit_args.init, "'random' or a model file to warm-start from");
    fit->add_option("--out", fit_args.out, "Output model file")->required();
    fit->add_option("--history", fit_args.history, "Optional per-epoch loss CSV");
    fit->add_option("--log-every", fit_args.log_every, "Progress print interval in epochs (0 = quiet)");

    std::string render_model, render_out;
    CLI::App* render = app.add_subcommand("render", "Render a model to a PGM image");
    render->add_option("--model", render_model, "Model file")->required();
    render->add_option("--out", render_out, "Output PGM file")->required();

    TransformArgs tr_args;
    CLI::App* transform = app.add_subcommand(
        "transform", "Apply a closed-form parameter-space transform to a model");
    transform->add_option("--model", tr_args.model, "Model file")->required();
    transform->add_option("--out", tr_args.out, "Output model file")->required();
    transform->add_option("--translate", tr_args.translate, "Shift by (dx1, dx2)")
        ->expected(2);
    transform
        ->add_option("--scale", tr_args.scale,
                     "Scaling factor k; k > 1 shrinks the rendered content (samples at k*x), "
                     "k < 1 enlarges it")
        ->check(CLI::NonNegativeNumber);
    transform->add_option("--rotate", tr_args.rotate_deg, "Rotation angle in degrees");
    transform->add_option("--center", tr_args.center, "Rotation center (default 0.5 0.5)")
        ->expected(2);

    std::string eval_model_path, eval_image;
    double eval_alpha = 0.1;
    CLI::App* eval = app.add_subcommand("eval", "Report MSE / peak error of a model against an image");
    eval->add_option("--model", eval_model_path, "Model file")->required();
    eval->add_option("--image", eval_image, "Target PGM image")->required();
    eval->add_option("--alpha", eval_alpha, "Weight of the peak-absolute-error term");

    std::string topk_model, topk_out;
    int topk_k = 1;
    CLI::App* topk = app.add_subcommand("topk", "Keep the k components of largest |w|");
    topk->add_option("--model", topk_model, "Model file")->required();
    topk->add_option("--k", topk_k, "Component count to keep")->required();
    topk->add_option("--out", topk_out, "Output model file")->required();

    std::string surf_model, surf_image, surf_out;
    bool surf_invert = false;
    std::vector<int> surf_rows, surf_cols;
    CLI::App* surface = app.add_subcommand("surface", "Export a surface or cross sections as CSV");
    surface->add_option("--model", surf_model, "Model file (rendered at its stored size)");
    surface->add_option("--image", surf_image, "PGM image as the surface source");
    surface->add_option("--out", surf_out, "Output CSV")->required();
    surface->add_flag("--invert", surf_invert, "Export 1 - value");
    surface->add_option("--rows", surf_rows, "Comma-separated row cross sections")
        ->delimiter(',');
    surface->add_option("--cols", surf_cols, "Comma-separated column cross sections")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*fit) {
            return run_fit(fit_args);
        }
        if (*render) {
            const gmface::GmModel model = gmface::read_model(render_model);
            gmface::write_image(gmface::render(model), render_out);
            return 0;
        }
        if (*transform) {
            return run_transform(tr_args);
        }
        if (*eval) {
            const gmface::GmModel model = gmface::read_model(eval_model_path);
            const gmface::ImageGrid image = gmface::read_image(eval_image);
            const std::vector<gmface::ImageGrid> targets{image};
            print_loss(gmface::compute_loss(model, targets, eval_alpha));
            return 0;
        }
        if (*topk) {
            const gmface::GmModel model = gmface::read_model(topk_model);
            if (topk_k < 1 || topk_k > model.component_count()) {
                std::fprintf(stderr, "topk: --k must lie in [1, %d]\n", model.component_count());
                return kExitUsage;
            }
            gmface::write_model(gmface::top_k(model, topk_k), topk_out);
            return 0;
        }
        if (*surface) {
            if (surf_model.empty() == surf_image.empty()) {
                std::fprintf(stderr, "surface: exactly one of --model or --image required\n");
                return kExitUsage;
            }
            const gmface::ImageGrid grid = surf_model.empty()
                                               ? gmface::read_image(surf_image)
                                               : gmface::render(gmface::read_model(surf_model));
            if (surf_rows.empty() && surf_cols.empty()) {
                gmface::export_surface(grid, surf_out, surf_invert);
            } else {
                gmface::export_cross_sections(grid, surf_out, surf_invert, surf_rows, surf_cols);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
