/**
 * @file app.hpp
 * @brief Command-line front end: JSON documents, comparison experiments, overlays.
 */

#pragma once

#include <subedge/error.hpp>
#include <subedge/pipeline.hpp>
#include <subedge/simdata.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace subedge::app {

using nlohmann::json;

/// Process exit codes of the `subedge` tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitIo = 3,
    kExitNoEdges = 4,
    kExitTopology = 5,
    kExitUnderdetermined = 6,
    kExitSingular = 7,
    kExitFailure = 8,
};

int exit_code_for(ErrorCode code) noexcept;

// ---- JSON documents -------------------------------------------------------

json read_json(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
void write_json(const std::filesystem::path& path, const json& doc);

json model_to_json(const ContourModel& model);
ContourModel model_from_json(const json& doc);

json truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const json& doc);

json metrics_to_json(const ErrorMetrics& m);

/// Serializes kind-specific fields only; the seed is omitted (it belongs to a trial).
json noise_to_json(const NoiseSpec& spec);
NoiseSpec noise_from_json(const json& doc);

/// Fit report plus pipeline context (method, scale, noise, edge count).
json fit_report_to_json(const PipelineResult& result);

// ---- comparison experiments ----------------------------------------------

struct ImageSource {
    bool generated = true;
    int size = 128;
    Rect rect;
    double lo = 0.2;
    double hi = 0.8;
    double blur = 1.0;
    std::string path;        ///< PGM when not generated
    std::string truth_path;  ///< truth JSON when not generated
};

struct ExperimentSpec {
    ImageSource image;
    std::vector<NoiseSpec> noise_grid;
    int trials = 20;
    std::uint64_t seed = 0;          ///< trial k uses seed + k
    bool estimate_sigma_b = false;   ///< false: the fit is told the true noise std
    PipelineConfig pipeline;         ///< shared detection settings
    FitConfig stochastic;
    FitConfig classical;
    int samples = 1000;              ///< curve samples per error metric
    double corner_mask = 0.0;
    std::string out_dir = ".";

    void validate() const;
};

ExperimentSpec spec_from_json(const json& doc);
json spec_to_json(const ExperimentSpec& spec);

struct MethodOutcome {
    bool ok = false;
    ErrorMetrics metrics;
    int iterations_used = 0;
    std::string error;  ///< error code name when !ok
};

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    double kernel_sigma = 0.0;
    MethodOutcome stochastic;
    MethodOutcome classical;
    /// Stochastic succeeded and either classical failed or had the larger mean_dist.
    bool win = false;
};

/// Statistics of per-trial mean_dist over the successful trials.
struct Aggregate {
    int succeeded = 0;
    double mean = 0.0;
    double std = 0.0;   ///< sample standard deviation (0 when fewer than 2)
    double rms = 0.0;   ///< mean of per-trial rms_dist
    double max = 0.0;   ///< largest per-trial max_dist
};

struct CellResult {
    NoiseSpec noise;
    std::vector<TrialResult> trials;
    Aggregate stochastic;
    Aggregate classical;
    double win_rate = 0.0;  ///< wins / trials
    std::string error;      ///< set when the cell could not run at all
};

struct ComparisonReport {
    ExperimentSpec spec;
    std::vector<CellResult> cells;
};

Aggregate aggregate(const std::vector<TrialResult>& trials, bool stochastic);

/// Runs every cell x trial on up to `threads` workers. The result does not
/// depend on the thread count.
ComparisonReport run_comparison(const ExperimentSpec& spec, int threads);

json comparison_to_json(const ComparisonReport& report);
std::string summary_table(const ComparisonReport& report);

/// Worker count: hardware concurrency, capped by SUBEDGE_THREADS when set.
int thread_limit();

// ---- overlays -------------------------------------------------------------

inline constexpr Rgb kTruthColor{255, 255, 255};
inline constexpr Rgb kClassicalColor{0, 0, 255};
inline constexpr Rgb kStochasticColor{255, 0, 0};

/// Draws curves 1 px wide on a 4x supersampled canvas over the grayscale
/// background. An output pixel takes the color of the topmost curve covering
/// at least a quarter of its subsamples (stochastic over classical over truth),
/// otherwise its gray level.
RgbImage render_overlay(const GrayImage& background, const GroundTruth* truth, const ContourModel* stochastic,
                        const ContourModel* classical);

// ---- commands -------------------------------------------------------------

struct GenerateArgs {
    int size = 128;
    Rect rect;
    double lo = 0.2;
    double hi = 0.8;
    double blur = 1.0;
    NoiseSpec noise;
    std::filesystem::path out = "square.pgm";
};

struct FitArgs {
    std::filesystem::path image;
    std::optional<std::filesystem::path> truth;
    Method method = Method::Stochastic;
    PipelineConfig pipeline;
    std::optional<std::filesystem::path> out;  ///< prefix; default is the image path without extension
    int samples = 1000;
    double corner_mask = 0.0;
};

struct CompareArgs {
    std::filesystem::path spec;
    std::optional<std::filesystem::path> out;  ///< default <out_dir>/comparison.json
    std::optional<int> threads;
};

struct RenderArgs {
    std::filesystem::path image;
    std::optional<std::filesystem::path> truth;
    std::optional<std::filesystem::path> stochastic;
    std::optional<std::filesystem::path> classical;
    std::filesystem::path out = "overlay.ppm";
};

/// Path of the ground-truth file written next to a generated image.
std::filesystem::path truth_path_for(const std::filesystem::path& image);

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);
int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareArgs& args, std::ostream& out, std::ostream& err);
int cmd_render(const RenderArgs& args, std::ostream& out, std::ostream& err);

}  // namespace subedge::app
