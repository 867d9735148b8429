#include <subedge/app.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <thread>

namespace subedge::app {

namespace {

struct Scene {
    GrayImage image;
    GroundTruth truth;
};

Scene load_scene(const ImageSource& src) {
    if (src.generated) {
        SquareScene s = make_square_image(src.size, src.rect, src.lo, src.hi, src.blur);
        return {std::move(s.image), s.truth};
    }
    return {read_pgm(src.path), truth_from_json(read_json(src.truth_path))};
}

MethodOutcome fit_one(const Detection& det, Method method, PipelineConfig cfg, const FitConfig& fit,
                      const GroundTruth& truth, const ExperimentSpec& spec) {
    cfg.fit = fit;
    MethodOutcome out;
    try {
        const PipelineResult r = fit_detection(det, method, cfg);
        out.metrics = contour_error(r.fit.model, truth, spec.samples, spec.corner_mask);
        out.iterations_used = r.fit.report.iterations_used;
        out.ok = true;
    } catch (const Error& e) {
        out.error = to_string(e.code());
    }
    return out;
}

TrialResult run_trial(const Scene& scene, const ExperimentSpec& spec, const NoiseSpec& cell, int trial) {
    TrialResult r;
    r.trial = trial;
    r.seed = spec.seed + static_cast<std::uint64_t>(trial);
    NoiseSpec noise = cell;
    noise.seed = r.seed;
    PipelineConfig cfg = spec.pipeline;
    if (!spec.estimate_sigma_b) {
        cfg.sigma_b = noise.noise_std();
    }
    try {
        const Detection det = detect(apply_noise(scene.image, noise), cfg);
        r.kernel_sigma = det.kernels.sigma;
        r.stochastic = fit_one(det, Method::Stochastic, cfg, spec.stochastic, scene.truth, spec);
        r.classical = fit_one(det, Method::Classical, cfg, spec.classical, scene.truth, spec);
    } catch (const Error& e) {
        r.stochastic.error = r.classical.error = to_string(e.code());
    }
    r.win = r.stochastic.ok && (!r.classical.ok || r.stochastic.metrics.mean_dist < r.classical.metrics.mean_dist);
    return r;
}

json outcome_to_json(const MethodOutcome& m) {
    json doc{{"ok", m.ok}};
    if (m.ok) {
        doc["metrics"] = metrics_to_json(m.metrics);
        doc["iterations_used"] = m.iterations_used;
    } else {
        doc["error"] = m.error;
    }
    return doc;
}

json aggregate_to_json(const Aggregate& a) {
    return json{{"succeeded", a.succeeded}, {"mean_dist", a.mean}, {"std_dist", a.std},
                {"mean_rms_dist", a.rms}, {"max_dist", a.max}};
}

}  // namespace

Aggregate aggregate(const std::vector<TrialResult>& trials, bool stochastic) {
    Aggregate a;
    double sum = 0.0;
    double sum_rms = 0.0;
    for (const TrialResult& t : trials) {
        const MethodOutcome& m = stochastic ? t.stochastic : t.classical;
        if (m.ok) {
            ++a.succeeded;
            sum += m.metrics.mean_dist;
            sum_rms += m.metrics.rms_dist;
            a.max = std::max(a.max, m.metrics.max_dist);
        }
    }
    if (a.succeeded == 0) {
        return a;
    }
    a.mean = sum / a.succeeded;
    a.rms = sum_rms / a.succeeded;
    if (a.succeeded > 1) {
        double ss = 0.0;
        for (const TrialResult& t : trials) {
            const MethodOutcome& m = stochastic ? t.stochastic : t.classical;
            if (m.ok) {
                ss += (m.metrics.mean_dist - a.mean) * (m.metrics.mean_dist - a.mean);
            }
        }
        a.std = std::sqrt(ss / (a.succeeded - 1));
    }
    return a;
}

int thread_limit() {
    int n = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("SUBEDGE_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap >= 1) {
            n = std::min<long>(n, cap);
        }
    }
    return n;
}

ComparisonReport run_comparison(const ExperimentSpec& spec, int threads) {
    spec.validate();
    ComparisonReport report;
    report.spec = spec;
    report.cells.resize(spec.noise_grid.size());
    for (size_t c = 0; c < spec.noise_grid.size(); ++c) {
        report.cells[c].noise = spec.noise_grid[c];
    }

    Scene scene;
    try {
        scene = load_scene(spec.image);
    } catch (const Error& e) {
        for (CellResult& cell : report.cells) {
            cell.error = std::string(to_string(e.code())) + ": " + e.what();
        }
        return report;
    }

    const size_t per_cell = static_cast<size_t>(spec.trials);
    const size_t jobs = report.cells.size() * per_cell;
    std::vector<TrialResult> results(jobs);
    std::atomic<size_t> next{0};
    const auto worker = [&] {
        for (size_t j = next++; j < jobs; j = next++) {
            const size_t cell = j / per_cell;
            results[j] = run_trial(scene, spec, spec.noise_grid[cell], static_cast<int>(j % per_cell));
        }
    };
    const size_t n_workers = std::min(jobs, static_cast<size_t>(std::max(1, threads)));
    {
        std::vector<std::jthread> pool;
        for (size_t w = 1; w < n_workers; ++w) {
            pool.emplace_back(worker);
        }
        worker();
    }

    for (size_t c = 0; c < report.cells.size(); ++c) {
        CellResult& cell = report.cells[c];
        cell.trials.assign(results.begin() + static_cast<std::ptrdiff_t>(c * per_cell),
                           results.begin() + static_cast<std::ptrdiff_t>((c + 1) * per_cell));
        cell.stochastic = aggregate(cell.trials, true);
        cell.classical = aggregate(cell.trials, false);
        const auto wins = std::count_if(cell.trials.begin(), cell.trials.end(), [](const TrialResult& t) { return t.win; });
        cell.win_rate = static_cast<double>(wins) / static_cast<double>(cell.trials.size());
    }
    return report;
}

json comparison_to_json(const ComparisonReport& report) {
    json cells = json::array();
    for (const CellResult& cell : report.cells) {
        json trials = json::array();
        for (const TrialResult& t : cell.trials) {
            trials.push_back(json{{"trial", t.trial},
                                  {"seed", t.seed},
                                  {"kernel_sigma", t.kernel_sigma},
                                  {"stochastic", outcome_to_json(t.stochastic)},
                                  {"classical", outcome_to_json(t.classical)},
                                  {"win", t.win}});
        }
        json doc{{"noise", noise_to_json(cell.noise)},
                 {"label", cell.noise.label()},
                 {"trials", std::move(trials)},
                 {"stochastic", aggregate_to_json(cell.stochastic)},
                 {"classical", aggregate_to_json(cell.classical)},
                 {"win_rate", cell.win_rate}};
        if (!cell.error.empty()) {
            doc["error"] = cell.error;
        }
        cells.push_back(std::move(doc));
    }
    return json{{"rng", kRngAlgorithm}, {"spec", spec_to_json(report.spec)}, {"cells", std::move(cells)}};
}

std::string summary_table(const ComparisonReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(34) << "noise" << std::right << std::setw(8) << "trials" << std::setw(12)
        << "stoch mean" << std::setw(12) << "class mean" << std::setw(10) << "win rate" << std::setw(10) << "failures"
        << '\n';
    out << std::fixed;
    for (const CellResult& cell : report.cells) {
        out << std::left << std::setw(34) << cell.noise.label() << std::right;
        if (!cell.error.empty()) {
            out << "  error: " << cell.error << '\n';
            continue;
        }
        const int trials = static_cast<int>(cell.trials.size());
        const int failures = 2 * trials - cell.stochastic.succeeded - cell.classical.succeeded;
        out << std::setw(8) << trials << std::setw(12) << std::setprecision(4) << cell.stochastic.mean << std::setw(12)
            << cell.classical.mean << std::setw(10) << std::setprecision(2) << cell.win_rate << std::setw(10)
            << failures << '\n';
    }
    return out.str();
}

}  // namespace subedge::app
