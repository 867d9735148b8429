// subedge: sub-pixel contour estimation with a maximum-likelihood B-spline fit.

#include <subedge/app.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace subedge;
using namespace subedge::app;

void add_rect_option(CLI::App* cmd, std::vector<double>& storage) {
    cmd->add_option("--rect", storage, "rectangle corners x0 y0 x1 y1")->expected(4)->delimiter(',');
}

void add_pipeline_options(CLI::App* cmd, PipelineConfig& cfg, std::optional<double>& sigma_b, bool& fixed_scale,
                          bool& open) {
    cmd->add_option("--kernel-sigma", cfg.kernel_sigma, "derivative-of-Gaussian kernel sigma (starting scale)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--fixed-scale", fixed_scale, "use --kernel-sigma as is, without scale selection");
    cmd->add_option("--max-kernel-sigma", cfg.max_kernel_sigma, "largest scale tried by scale selection")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threshold", cfg.edge_threshold, "edge threshold as a fraction of the largest gradient")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--sigma-b", sigma_b, "image noise std (estimated from the image when omitted)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--open", open, "fit an open curve instead of a closed contour");
    cmd->add_option("--ctrl-ratio", cfg.fit.ctrl_ratio, "observations per control point")->check(CLI::PositiveNumber);
    cmd->add_option("--num-ctrl", cfg.fit.num_ctrl, "control point count (overrides --ctrl-ratio)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--iters", cfg.fit.max_iters, "orientation re-weighting iterations")->check(CLI::PositiveNumber);
    cmd->add_option("--degree", cfg.fit.degree, "spline degree")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Sub-pixel contour estimation with a maximum-likelihood B-spline fit"};
    cli.require_subcommand(1);

    // generate
    GenerateArgs gen;
    std::vector<double> gen_rect;
    std::string gen_noise = "none";
    auto* generate = cli.add_subcommand("generate", "write a synthetic square image and its ground truth");
    generate->add_option("--size", gen.size, "image width and height")->check(CLI::PositiveNumber);
    add_rect_option(generate, gen_rect);
    generate->add_option("--lo", gen.lo, "background intensity");
    generate->add_option("--hi", gen.hi, "rectangle intensity");
    generate->add_option("--blur", gen.blur, "Gaussian blur sigma in pixels");
    generate->add_option("--noise", gen_noise, "none | gaussian | salt-pepper");
    generate->add_option("--sigma", gen.noise.sigma, "Gaussian noise std");
    generate->add_option("--p0", gen.noise.p0, "probability of each impulse sign");
    generate->add_option("--gamma", gen.noise.gamma, "impulse amplitude");
    generate->add_option("--seed", gen.noise.seed, "noise seed");
    generate->add_option("--out", gen.out, "output PGM path");

    // fit
    FitArgs fit;
    std::string fit_method = "stochastic";
    std::string fit_truth;
    std::string fit_out;
    std::optional<double> fit_sigma_b;
    bool fit_fixed = false;
    bool fit_open = false;
    auto* fit_cmd = cli.add_subcommand("fit", "estimate the contour of a PGM image");
    fit_cmd->add_option("image", fit.image, "input PGM")->required();
    fit_cmd->add_option("--truth", fit_truth, "ground-truth JSON; adds error metrics to the report");
    fit_cmd->add_option("--method", fit_method, "stochastic | classical");
    fit_cmd->add_option("--out", fit_out, "output prefix for <prefix>.model.json and <prefix>.report.json");
    fit_cmd->add_option("--samples", fit.samples, "curve samples for error metrics")->check(CLI::Range(100, 1000000));
    fit_cmd->add_option("--corner-mask", fit.corner_mask, "exclude samples this close to a truth corner")
        ->check(CLI::NonNegativeNumber);
    add_pipeline_options(fit_cmd, fit.pipeline, fit_sigma_b, fit_fixed, fit_open);

    // compare
    CompareArgs cmp;
    std::string cmp_out;
    int cmp_threads = 0;
    auto* compare = cli.add_subcommand("compare", "run a stochastic vs classical comparison experiment");
    compare->add_option("spec", cmp.spec, "experiment spec JSON")->required();
    compare->add_option("--out", cmp_out, "report path (default <out_dir>/comparison.json)");
    compare->add_option("--threads", cmp_threads, "worker threads (capped by SUBEDGE_THREADS)")
        ->check(CLI::PositiveNumber);

    // render
    RenderArgs ren;
    std::string ren_truth;
    std::string ren_stoch;
    std::string ren_class;
    auto* render = cli.add_subcommand("render", "draw fitted contours over an image");
    render->add_option("image", ren.image, "background PGM")->required();
    render->add_option("--truth", ren_truth, "ground-truth JSON (white)");
    render->add_option("--stochastic", ren_stoch, "stochastic model JSON (red)");
    render->add_option("--classical", ren_class, "classical model JSON (blue)");
    render->add_option("--out", ren.out, "output PPM path");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*generate) {
            if (!gen_rect.empty()) {
                gen.rect = Rect{gen_rect[0], gen_rect[1], gen_rect[2], gen_rect[3]};
            }
            gen.noise.kind = noise_kind_from_string(gen_noise);
            return cmd_generate(gen, std::cout, std::cerr);
        }
        if (*fit_cmd) {
            fit.method = method_from_string(fit_method);
            if (!fit_truth.empty()) {
                fit.truth = fit_truth;
            }
            if (!fit_out.empty()) {
                fit.out = fit_out;
            }
            fit.pipeline.sigma_b = fit_sigma_b;
            fit.pipeline.select_scale = !fit_fixed;
            fit.pipeline.closed = !fit_open;
            fit.pipeline.max_kernel_sigma = std::max(fit.pipeline.max_kernel_sigma, fit.pipeline.kernel_sigma);
            return cmd_fit(fit, std::cout, std::cerr);
        }
        if (*compare) {
            if (!cmp_out.empty()) {
                cmp.out = cmp_out;
            }
            if (cmp_threads > 0) {
                cmp.threads = cmp_threads;
            }
            return cmd_compare(cmp, std::cout, std::cerr);
        }
        if (*render) {
            if (!ren_truth.empty()) {
                ren.truth = ren_truth;
            }
            if (!ren_stoch.empty()) {
                ren.stochastic = ren_stoch;
            }
            if (!ren_class.empty()) {
                ren.classical = ren_class;
            }
            return cmd_render(ren, std::cout, std::cerr);
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return exit_code_for(e.code());
    }
    return kExitUsage;
}
