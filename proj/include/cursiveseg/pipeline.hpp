#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cursiveseg/features.hpp"
#include "cursiveseg/mlp.hpp"
#include "cursiveseg/raster.hpp"
#include "cursiveseg/segmentation.hpp"

namespace cseg {

struct PipelineConfig {
    int merge_threshold = kDefaultMergeThreshold;
    WindowConfig window{};
    double decision_threshold = 0.5;
    // Only meaningful when a model is supplied.
    bool use_validator = true;
    int match_tolerance = 2;
    bool deslant = true;
    InkPolarity polarity = InkPolarity::Dark;

    void validate() const;
};

// Everything computed for a word before any validator decision.
struct PreparedWord {
    int width = 0;
    int height = 0;
    OtsuResult otsu;
    std::optional<int> slant_degrees;  // empty when deslanting is disabled
    ShearGeometry geometry;
    BinaryImage binary;                // binarized input, input frame
    BinaryImage working;               // deslanted and thinned
    ColumnProfile profile;             // of `working`
    CandidateColumns candidates;       // raw CSC of `working`
    std::vector<MergedRun> runs;       // merged CSC runs
};

enum class CutVerdict {
    Accepted,
    RejectedMargin,     // would open an ink-free segment, or maps outside the word
    RejectedValidator,  // classified as an incorrect segmentation point
};

const char* to_string(CutVerdict v);

struct CandidateAudit {
    MergedRun run;                   // columns in the working frame
    int column = 0;                  // the run's cut mapped back to the input frame
    int profile_count = 0;           // working-image count at run.column
    std::optional<double> confidence;
    CutVerdict verdict = CutVerdict::Accepted;
};

struct WordSegmentation {
    SegmentationResult result;  // input frame
    std::vector<CandidateAudit> audit;
    PreparedWord prepared;
};

// Binarize, deslant, thin, profile, collect CSC and merge them.
PreparedWord prepare_word(const GrayImage& gray, const PipelineConfig& cfg);

// Working-frame column -> input-frame column, through the vertical middle of
// the word (exact when deslanting is off).
int to_input_column(const PreparedWord& word, int working_column);

// Audit entries for the merged runs after the margin rule, without any
// validator; verdicts are Accepted or RejectedMargin.
std::vector<CandidateAudit> geometric_candidates(const PreparedWord& word);

// Throws ConfigError when the model cannot consume windows of cfg.window.
void check_model_compatible(const MlpModel& model, const PipelineConfig& cfg);

// Full word pipeline. With a model and cfg.use_validator, every geometric
// cut is classified and the ones judged incorrect are dropped.
WordSegmentation segment_word(const GrayImage& gray, const MlpModel* model, const PipelineConfig& cfg);

// Original image with accepted cuts drawn solid black and validator
// rejections drawn as a dashed mid-gray line.
GrayImage make_overlay(const GrayImage& gray, const WordSegmentation& seg);

// --- evaluation -----------------------------------------------------------

struct LabeledWord {
    std::string id;
    GrayImage image;
    std::vector<int> truth_columns;
};

struct CutMatch {
    std::size_t truth_index = 0;
    std::size_t predicted_index = 0;
    int distance = 0;
};

// Greedy nearest-first one-to-one matching of pairs within max_distance,
// ordered by (distance, truth column, predicted column).
std::vector<CutMatch> greedy_match(std::span<const int> truth, std::span<const int> predicted,
                                   int max_distance);

struct SegmentationCounts {
    long long truth_total = 0;
    long long predicted_total = 0;
    long long correct = 0;  // truth matched within tolerance
    long long bad = 0;      // truth matched at distance in (tolerance, 2 * tolerance]
    long long miss = 0;     // truth without a match
    long long over = 0;     // prediction without a match

    SegmentationCounts& operator+=(const SegmentationCounts& o);
};

SegmentationCounts score_word(std::span<const int> truth, std::span<const int> predicted, int tolerance);

struct EvaluationReport {
    SegmentationCounts counts;
    long long words = 0;
    double mean_time_per_word = 0.0;  // seconds, around segment_word only
    bool validator_used = false;
    PipelineConfig config;

    // Percentages; correct, miss and bad are of truth columns, over is of
    // predicted cuts. A zero denominator gives 0.
    double correct_rate() const;
    double miss_rate() const;
    double bad_rate() const;
    double over_rate() const;
};

// Per-word work may be spread over `jobs` threads; counts are reduced in
// corpus order so the result does not depend on scheduling.
EvaluationReport evaluate(std::span<const LabeledWord> corpus, const MlpModel* model,
                          const PipelineConfig& cfg, int jobs = 1);

// Deterministic renderings. Timing is kept out of these two so repeated runs
// are byte-identical; format_timing renders it separately.
std::string format_report_table(const EvaluationReport& report);
std::string format_report_kv(const EvaluationReport& report);
std::string format_timing(const EvaluationReport& report);

std::string describe(const PipelineConfig& cfg);

}  // namespace cseg
