#include "cursiveseg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>
#include <tuple>

#include "cursiveseg/error.hpp"

namespace cseg {

void PipelineConfig::validate() const {
    if (merge_threshold < 1) throw ConfigError("merge threshold must be >= 1");
    window.validate();
    if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0)) {
        throw ConfigError("decision threshold must be in [0, 1]");
    }
    if (match_tolerance < 0) throw ConfigError("match tolerance must be >= 0");
}

const char* to_string(CutVerdict v) {
    switch (v) {
        case CutVerdict::Accepted: return "accepted";
        case CutVerdict::RejectedMargin: return "rejected-margin";
        case CutVerdict::RejectedValidator: return "rejected-validator";
    }
    return "?";
}

PreparedWord prepare_word(const GrayImage& gray, const PipelineConfig& cfg) {
    PreparedWord w;
    w.width = gray.width();
    w.height = gray.height();
    w.otsu = otsu_threshold(gray);
    // A single-intensity image has no contrast, hence no ink.
    w.binary = w.otsu.degenerate ? BinaryImage(w.width, w.height) : binarize(gray, w.otsu.level, cfg.polarity);
    BinaryImage upright = w.binary;
    if (cfg.deslant) {
        // estimate_slant returns the corrective angle directly
        w.slant_degrees = estimate_slant(w.binary);
        w.geometry = shear_geometry(w.width, w.height, *w.slant_degrees);
        if (*w.slant_degrees != 0) upright = shear(w.binary, *w.slant_degrees);
    } else {
        w.geometry = {0, w.width};
    }
    w.working = thin(upright);
    w.profile = column_profile(w.working);
    w.candidates = candidate_columns(w.profile);
    w.runs = merge_runs(w.candidates, cfg.merge_threshold);
    return w;
}

int to_input_column(const PreparedWord& word, int working_column) {
    const int angle = word.slant_degrees.value_or(0);
    if (angle == 0) return working_column - word.geometry.offset;
    const double mid_rows_above_bottom = (word.height - 1) / 2.0;
    const double shift = mid_rows_above_bottom * std::tan(angle * std::numbers::pi / 180.0);
    return static_cast<int>(std::lround(working_column - word.geometry.offset - shift));
}

std::vector<CandidateAudit> geometric_candidates(const PreparedWord& word) {
    std::vector<int> cuts;
    cuts.reserve(word.runs.size());
    for (const auto& run : word.runs) cuts.push_back(run.column);
    const auto survivors = margin_survivors(word.profile, cuts);

    std::vector<CandidateAudit> audit;
    audit.reserve(word.runs.size());
    std::size_t next_survivor = 0;
    int last_accepted = 0;
    for (std::size_t i = 0; i < word.runs.size(); ++i) {
        CandidateAudit a;
        a.run = word.runs[i];
        a.profile_count = word.profile.counts[static_cast<std::size_t>(a.run.column)];
        a.column = to_input_column(word, a.run.column);
        const bool survived = next_survivor < survivors.size() && survivors[next_survivor] == i;
        if (survived) ++next_survivor;
        // Mapped columns must still open a non-empty segment in the input frame.
        if (survived && a.column > last_accepted && a.column < word.width) {
            a.verdict = CutVerdict::Accepted;
            last_accepted = a.column;
        } else {
            a.verdict = CutVerdict::RejectedMargin;
        }
        audit.push_back(a);
    }
    return audit;
}

void check_model_compatible(const MlpModel& model, const PipelineConfig& cfg) {
    if (model.window && *model.window != cfg.window) {
        std::ostringstream os;
        os << "model was trained on " << model.window->window_width << "x" << model.window->normalized_height
           << " windows but the pipeline is configured for " << cfg.window.window_width << "x"
           << cfg.window.normalized_height;
        throw ConfigError(os.str());
    }
    if (model.input_size != static_cast<std::size_t>(cfg.window.input_size())) {
        throw ConfigError("model input size " + std::to_string(model.input_size) +
                          " does not match window input size " + std::to_string(cfg.window.input_size()));
    }
}

WordSegmentation segment_word(const GrayImage& gray, const MlpModel* model, const PipelineConfig& cfg) {
    cfg.validate();
    const bool validate_points = model != nullptr && cfg.use_validator;
    if (validate_points) check_model_compatible(*model, cfg);

    WordSegmentation out;
    out.prepared = prepare_word(gray, cfg);
    out.audit = geometric_candidates(out.prepared);

    CandidateColumns accepted;
    for (auto& a : out.audit) {
        if (a.verdict != CutVerdict::Accepted) continue;
        if (validate_points) {
            const auto features = extract_window(out.prepared.working, a.run.column, cfg.window);
            const auto verdict = classify_point(*model, features, cfg.decision_threshold);
            a.confidence = verdict.confidence;
            if (verdict.label == PointLabel::Incorrect) {
                a.verdict = CutVerdict::RejectedValidator;
                continue;
            }
        }
        accepted.columns.push_back(a.column);
    }
    out.result = cut_segments(gray.width(), accepted);
    return out;
}

GrayImage make_overlay(const GrayImage& gray, const WordSegmentation& seg) {
    GrayImage out = gray;
    for (const auto& a : seg.audit) {
        if (a.column < 0 || a.column >= gray.width()) continue;
        if (a.verdict == CutVerdict::Accepted) {
            for (int y = 0; y < gray.height(); ++y) out.set(a.column, y, 0);
        } else if (a.verdict == CutVerdict::RejectedValidator) {
            for (int y = 0; y < gray.height(); y += 2) out.set(a.column, y, 128);
        }
    }
    return out;
}

std::vector<CutMatch> greedy_match(std::span<const int> truth, std::span<const int> predicted,
                                   int max_distance) {
    std::vector<CutMatch> pairs;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        for (std::size_t p = 0; p < predicted.size(); ++p) {
            const int d = std::abs(truth[t] - predicted[p]);
            if (d <= max_distance) pairs.push_back({t, p, d});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [&](const CutMatch& a, const CutMatch& b) {
        return std::tuple(a.distance, truth[a.truth_index], predicted[a.predicted_index]) <
               std::tuple(b.distance, truth[b.truth_index], predicted[b.predicted_index]);
    });
    std::vector<char> truth_used(truth.size(), 0), pred_used(predicted.size(), 0);
    std::vector<CutMatch> matches;
    for (const auto& m : pairs) {
        if (truth_used[m.truth_index] || pred_used[m.predicted_index]) continue;
        truth_used[m.truth_index] = 1;
        pred_used[m.predicted_index] = 1;
        matches.push_back(m);
    }
    return matches;
}

SegmentationCounts& SegmentationCounts::operator+=(const SegmentationCounts& o) {
    truth_total += o.truth_total;
    predicted_total += o.predicted_total;
    correct += o.correct;
    bad += o.bad;
    miss += o.miss;
    over += o.over;
    return *this;
}

SegmentationCounts score_word(std::span<const int> truth, std::span<const int> predicted, int tolerance) {
    SegmentationCounts c;
    c.truth_total = static_cast<long long>(truth.size());
    c.predicted_total = static_cast<long long>(predicted.size());
    const auto matches = greedy_match(truth, predicted, 2 * tolerance);
    for (const auto& m : matches) {
        if (m.distance <= tolerance) {
            ++c.correct;
        } else {
            ++c.bad;
        }
    }
    const auto matched = static_cast<long long>(matches.size());
    c.miss = c.truth_total - matched;
    c.over = c.predicted_total - matched;
    return c;
}

namespace {

double percent(long long part, long long whole) {
    return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

double EvaluationReport::correct_rate() const { return percent(counts.correct, counts.truth_total); }
double EvaluationReport::miss_rate() const { return percent(counts.miss, counts.truth_total); }
double EvaluationReport::bad_rate() const { return percent(counts.bad, counts.truth_total); }
double EvaluationReport::over_rate() const { return percent(counts.over, counts.predicted_total); }

EvaluationReport evaluate(std::span<const LabeledWord> corpus, const MlpModel* model,
                          const PipelineConfig& cfg, int jobs) {
    cfg.validate();
    if (model != nullptr && cfg.use_validator) check_model_compatible(*model, cfg);

    struct WordOutcome {
        SegmentationCounts counts;
        double seconds = 0.0;
    };
    std::vector<WordOutcome> outcomes(corpus.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < corpus.size(); i = next++) {
            const auto& word = corpus[i];
            const auto start = std::chrono::steady_clock::now();
            const auto seg = segment_word(word.image, model, cfg);
            const auto stop = std::chrono::steady_clock::now();
            outcomes[i].seconds = std::chrono::duration<double>(stop - start).count();
            outcomes[i].counts = score_word(word.truth_columns, seg.result.cut_columns, cfg.match_tolerance);
        }
    };

    const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(corpus.size(), 1)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    EvaluationReport report;
    report.config = cfg;
    report.validator_used = model != nullptr && cfg.use_validator;
    report.words = static_cast<long long>(corpus.size());
    double total_seconds = 0.0;
    for (const auto& o : outcomes) {
        report.counts += o.counts;
        total_seconds += o.seconds;
    }
    report.mean_time_per_word = corpus.empty() ? 0.0 : total_seconds / static_cast<double>(corpus.size());
    return report;
}

std::string describe(const PipelineConfig& cfg) {
    std::ostringstream os;
    os << "merge_threshold=" << cfg.merge_threshold << " window=" << cfg.window.window_width << "x"
       << cfg.window.normalized_height << " decision_threshold=" << cfg.decision_threshold
       << " use_validator=" << (cfg.use_validator ? "true" : "false") << " match_tolerance=" << cfg.match_tolerance
       << " deslant=" << (cfg.deslant ? "true" : "false")
       << " polarity=" << (cfg.polarity == InkPolarity::Dark ? "dark-ink" : "light-ink");
    return os.str();
}

namespace {

constexpr const char* kDefinitions[][2] = {
    {"correct", "truth column matched 1:1 (greedy nearest-first) by a cut within +/-tolerance"},
    {"bad", "truth column matched by a cut at distance in (tolerance, 2*tolerance]"},
    {"miss", "truth column with no cut within 2*tolerance"},
    {"over", "cut matching no truth column; rate is over all predicted cuts"},
};

}  // namespace

std::string format_report_kv(const EvaluationReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6);
    os << "words=" << r.words << "\n";
    os << "validator=" << (r.validator_used ? "yes" : "no") << "\n";
    os << "truth_columns=" << r.counts.truth_total << "\n";
    os << "predicted_cuts=" << r.counts.predicted_total << "\n";
    os << "correct=" << r.counts.correct << "\n";
    os << "bad=" << r.counts.bad << "\n";
    os << "miss=" << r.counts.miss << "\n";
    os << "over=" << r.counts.over << "\n";
    os << "correct_rate=" << r.correct_rate() << "\n";
    os << "miss_rate=" << r.miss_rate() << "\n";
    os << "over_rate=" << r.over_rate() << "\n";
    os << "bad_rate=" << r.bad_rate() << "\n";
    const auto& c = r.config;
    os << "config.merge_threshold=" << c.merge_threshold << "\n";
    os << "config.window_width=" << c.window.window_width << "\n";
    os << "config.normalized_height=" << c.window.normalized_height << "\n";
    os << "config.decision_threshold=" << c.decision_threshold << "\n";
    os << "config.use_validator=" << (c.use_validator ? "true" : "false") << "\n";
    os << "config.match_tolerance=" << c.match_tolerance << "\n";
    os << "config.deslant=" << (c.deslant ? "true" : "false") << "\n";
    os << "config.polarity=" << (c.polarity == InkPolarity::Dark ? "dark-ink" : "light-ink") << "\n";
    for (const auto& d : kDefinitions) os << "definition." << d[0] << "=" << d[1] << "\n";
    return os.str();
}

std::string format_report_table(const EvaluationReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "Segmentation results over " << r.words << " words (" << r.counts.truth_total << " true boundaries, "
       << r.counts.predicted_total << " predicted cuts, validator " << (r.validator_used ? "on" : "off") << ")\n";
    const auto row = [&](const char* name, double rate, long long count, long long of) {
        os << "  " << std::left << std::setw(28) << name << std::right << std::setw(7) << rate << " %   ("
           << count << "/" << of << ")\n";
    };
    row("Correct segmentation rate", r.correct_rate(), r.counts.correct, r.counts.truth_total);
    row("Miss-segmentation rate", r.miss_rate(), r.counts.miss, r.counts.truth_total);
    row("Over-segmentation rate", r.over_rate(), r.counts.over, r.counts.predicted_total);
    row("Bad-segmentation rate", r.bad_rate(), r.counts.bad, r.counts.truth_total);
    os << "Definitions (tolerance = " << r.config.match_tolerance << " columns):\n";
    for (const auto& d : kDefinitions) os << "  " << d[0] << ": " << d[1] << "\n";
    os << "Config: " << describe(r.config) << "\n";
    return os.str();
}

std::string format_timing(const EvaluationReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << "mean_time_per_word_seconds=" << r.mean_time_per_word << "\n";
    return os.str();
}

}  // namespace cseg
