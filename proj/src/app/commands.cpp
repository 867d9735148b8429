#include <subedge/app.hpp>

#include <ostream>

namespace subedge::app {

namespace {

template <typename F>
int guarded_command(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const std::string& suffix) {
    return prefix.string() + suffix;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument:
            return kExitUsage;
        case ErrorCode::Io:
            return kExitIo;
        case ErrorCode::NoEdges:
            return kExitNoEdges;
        case ErrorCode::AmbiguousTopology:
            return kExitTopology;
        case ErrorCode::Underdetermined:
            return kExitUnderdetermined;
        case ErrorCode::SingularSystem:
            return kExitSingular;
        case ErrorCode::DomainError:
        case ErrorCode::NotAMaximum:
            break;
    }
    return kExitFailure;
}

std::filesystem::path truth_path_for(const std::filesystem::path& image) {
    std::filesystem::path p = image;
    p.replace_extension(".truth.json");
    return p;
}

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
    return guarded_command(err, [&] {
        args.noise.validate();
        const SquareScene scene = make_square_image(args.size, args.rect, args.lo, args.hi, args.blur);
        const GrayImage img = apply_noise(scene.image, args.noise);
        write_pgm(args.out, img);
        const std::filesystem::path truth = truth_path_for(args.out);
        write_json(truth, truth_to_json(scene.truth));
        out << "wrote " << args.out.string() << " (" << args.noise.label() << ", seed " << args.noise.seed << ")\n"
            << "wrote " << truth.string() << '\n';
        return static_cast<int>(kExitOk);
    });
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
    return guarded_command(err, [&] {
        const GrayImage img = read_pgm(args.image);
        std::optional<GroundTruth> truth;
        if (args.truth) {
            truth = truth_from_json(read_json(*args.truth));
        }
        const PipelineResult result = run_pipeline(img, args.method, args.pipeline);
        json report = fit_report_to_json(result);
        if (truth) {
            const ErrorMetrics m = contour_error(result.fit.model, *truth, args.samples, args.corner_mask);
            report["metrics"] = metrics_to_json(m);
        }
        std::filesystem::path prefix;
        if (args.out) {
            prefix = *args.out;
        } else {
            prefix = args.image;
            prefix.replace_extension("");
            prefix += std::string(".") + to_string(args.method);
        }
        const auto model_path = with_suffix(prefix, ".model.json");
        const auto report_path = with_suffix(prefix, ".report.json");
        write_json(model_path, model_to_json(result.fit.model));
        write_json(report_path, report);
        out << to_string(args.method) << ": " << result.fit.report.num_obs << " observations, "
            << result.fit.report.num_ctrl << " control points, kernel sigma " << result.kernel_sigma;
        if (report.contains("metrics")) {
            out << ", mean_dist " << report["metrics"]["mean_dist"].get<double>() << " px";
        }
        out << "\nwrote " << model_path.string() << "\nwrote " << report_path.string() << '\n';
        return static_cast<int>(kExitOk);
    });
}

int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err) {
    return guarded_command(err, [&] {
        const ExperimentSpec spec = spec_from_json(read_json(args.spec));
        int threads = thread_limit();
        if (args.threads) {
            if (*args.threads < 1) {
                throw Error(ErrorCode::InvalidArgument, "--threads must be at least 1");
            }
            threads = std::min(threads, *args.threads);
        }
        const ComparisonReport report = run_comparison(spec, threads);
        std::filesystem::path path;
        if (args.out) {
            path = *args.out;
        } else {
            std::filesystem::create_directories(spec.out_dir);
            path = std::filesystem::path(spec.out_dir) / "comparison.json";
        }
        write_json(path, comparison_to_json(report));
        out << summary_table(report) << "wrote " << path.string() << '\n';
        return static_cast<int>(kExitOk);
    });
}

int cmd_render(const RenderArgs& args, std::ostream& out, std::ostream& err) {
    return guarded_command(err, [&] {
        const GrayImage img = read_pgm(args.image);
        std::optional<GroundTruth> truth;
        std::optional<ContourModel> stochastic;
        std::optional<ContourModel> classical;
        if (args.truth) {
            truth = truth_from_json(read_json(*args.truth));
        }
        if (args.stochastic) {
            stochastic = model_from_json(read_json(*args.stochastic));
        }
        if (args.classical) {
            classical = model_from_json(read_json(*args.classical));
        }
        const RgbImage overlay = render_overlay(img, truth ? &*truth : nullptr, stochastic ? &*stochastic : nullptr,
                                                classical ? &*classical : nullptr);
        write_ppm(args.out, overlay);
        out << "wrote " << args.out.string() << '\n';
        return static_cast<int>(kExitOk);
    });
}

}  // namespace subedge::app
