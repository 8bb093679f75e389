// cursiveseg: command-line front end for the segmentation pipeline.
//
// Exit codes: 0 success, 1 usage, 2 input/decode/configuration error,
// 3 internal invariant violation.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "cursiveseg/corpus.hpp"
#include "cursiveseg/error.hpp"
#include "cursiveseg/mlp.hpp"
#include "cursiveseg/pipeline.hpp"
#include "cursiveseg/pnm.hpp"

namespace fs = std::filesystem;
using namespace cseg;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInputError = 2, kInternalError = 3 };

std::string str(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string str(bool v) { return v ? "true" : "false"; }

// Effective configuration, printed to stdout before any work is done.
class Banner {
public:
    explicit Banner(std::string command) : command_(std::move(command)) {}

    Banner& add(const std::string& key, const std::string& value) {
        entries_.emplace_back(key, value);
        return *this;
    }
    Banner& add(const std::string& key, const char* value) { return add(key, std::string(value)); }
    Banner& add(const std::string& key, double value) { return add(key, str(value)); }
    Banner& add(const std::string& key, long long value) { return add(key, std::to_string(value)); }
    Banner& add(const std::string& key, int value) { return add(key, std::to_string(value)); }
    Banner& add(const std::string& key, std::uint64_t value) { return add(key, std::to_string(value)); }
    Banner& add(const std::string& key, bool value) { return add(key, str(value)); }

    void print() const {
        std::cout << "# cursiveseg " << command_ << " effective configuration\n";
        for (const auto& [k, v] : entries_) std::cout << "config." << k << "=" << v << "\n";
    }

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct PipelineFlags {
    PipelineConfig cfg;
    bool no_validator = false;
    bool no_deslant = false;
    bool invert = false;

    void attach(CLI::App* app, bool with_validator) {
        app->add_option("--merge-threshold", cfg.merge_threshold,
                        "Merge candidate columns closer than this many columns")
            ->capture_default_str();
        app->add_option("--window-width", cfg.window.window_width, "Feature window width in columns")
            ->capture_default_str();
        app->add_option("--normalized-height", cfg.window.normalized_height,
                        "Rows the word height is resampled to for features")
            ->capture_default_str();
        app->add_option("--tolerance", cfg.match_tolerance, "Match tolerance in columns for scoring and labels")
            ->capture_default_str();
        app->add_flag("--no-deslant", no_deslant, "Skip slant estimation and correction");
        app->add_flag("--invert", invert, "Treat light pixels as ink (light-on-dark scans)");
        if (with_validator) {
            app->add_option("--decision-threshold", cfg.decision_threshold,
                            "Validator activation at or above which a cut is kept")
                ->capture_default_str();
            app->add_flag("--no-validator", no_validator, "Ignore the model and keep every geometric cut");
        }
    }

    PipelineConfig resolve() const {
        PipelineConfig out = cfg;
        out.use_validator = !no_validator;
        out.deslant = !no_deslant;
        out.polarity = invert ? InkPolarity::Light : InkPolarity::Dark;
        out.validate();
        return out;
    }

    static void describe(Banner& b, const PipelineConfig& c) {
        b.add("merge_threshold", c.merge_threshold)
            .add("window_width", c.window.window_width)
            .add("normalized_height", c.window.normalized_height)
            .add("decision_threshold", c.decision_threshold)
            .add("use_validator", c.use_validator)
            .add("match_tolerance", c.match_tolerance)
            .add("deslant", c.deslant)
            .add("polarity", c.polarity == InkPolarity::Dark ? "dark-ink" : "light-ink");
    }
};

std::span<const std::uint8_t> as_bytes(const std::string& s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Writes every file or none: on failure the files already written are removed.
void write_all(const std::vector<std::pair<fs::path, std::vector<std::uint8_t>>>& files) {
    std::vector<fs::path> done;
    try {
        for (const auto& [path, bytes] : files) {
            write_file_bytes(path, bytes);
            done.push_back(path);
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : done) fs::remove(p, ec);
        throw;
    }
}

std::vector<std::uint8_t> text_bytes(const std::string& s) {
    return {s.begin(), s.end()};
}

MlpModel read_model(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return load_model(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

struct PreprocessCmd {
    fs::path input, output_dir;
    bool no_deslant = false, invert = false, pbm = false;

    void attach(CLI::App* app) {
        app->add_option("--input", input, "Input PGM (P5) image")->required();
        app->add_option("--output-dir", output_dir, "Directory for the binary and thinned images")->required();
        app->add_flag("--no-deslant", no_deslant, "Skip slant estimation and correction");
        app->add_flag("--invert", invert, "Treat light pixels as ink");
        app->add_flag("--pbm", pbm, "Also write plain-text PBM copies");
    }

    int run() const {
        PipelineConfig cfg;
        cfg.deslant = !no_deslant;
        cfg.polarity = invert ? InkPolarity::Light : InkPolarity::Dark;
        Banner b("preprocess");
        b.add("input", input.string()).add("output_dir", output_dir.string()).add("pbm", pbm);
        b.add("deslant", cfg.deslant).add("polarity", invert ? "light-ink" : "dark-ink");
        b.print();

        const GrayImage gray = read_gray_file(input);
        const PreparedWord w = prepare_word(gray, cfg);

        const std::string stem = input.stem().string();
        std::vector<std::pair<fs::path, std::vector<std::uint8_t>>> files;
        files.emplace_back(output_dir / (stem + ".binary.pgm"), save_gray(to_gray(w.binary)));
        files.emplace_back(output_dir / (stem + ".thin.pgm"), save_gray(to_gray(w.working)));
        if (pbm) {
            files.emplace_back(output_dir / (stem + ".binary.pbm"), text_bytes(to_plain_pbm(w.binary)));
            files.emplace_back(output_dir / (stem + ".thin.pbm"), text_bytes(to_plain_pbm(w.working)));
        }
        fs::create_directories(output_dir);
        write_all(files);

        std::cout << "otsu=" << int{w.otsu.level} << (w.otsu.degenerate ? " (single intensity)" : "")
                  << " slant=" << (w.slant_degrees ? std::to_string(*w.slant_degrees) : "skipped") << "\n";
        for (const auto& f : files) std::cout << "wrote " << f.first.string() << "\n";
        return kOk;
    }
};

struct SegmentCmd {
    fs::path input, model_path, cuts_path, overlay_path;
    PipelineFlags flags;

    void attach(CLI::App* app) {
        app->add_option("--input", input, "Input PGM (P5) word image")->required();
        app->add_option("--model", model_path, "Validator model file");
        app->add_option("--cuts", cuts_path, "Cuts sidecar path (default: <input>.cuts)");
        app->add_option("--overlay", overlay_path, "Write the image with cut columns drawn");
        flags.attach(app, true);
    }

    int run() const {
        const PipelineConfig cfg = flags.resolve();
        const fs::path sidecar = cuts_path.empty() ? fs::path(input.string() + ".cuts") : cuts_path;
        Banner b("segment");
        b.add("input", input.string())
            .add("model", model_path.empty() ? "none" : model_path.string())
            .add("cuts", sidecar.string())
            .add("overlay", overlay_path.empty() ? "none" : overlay_path.string());
        PipelineFlags::describe(b, cfg);
        b.print();

        std::optional<MlpModel> model;
        if (!model_path.empty()) model = read_model(model_path);
        const GrayImage gray = read_gray_file(input);
        const auto seg = segment_word(gray, model ? &*model : nullptr, cfg);

        const auto& p = seg.prepared;
        std::cout << "otsu=" << int{p.otsu.level}
                  << " slant=" << (p.slant_degrees ? std::to_string(*p.slant_degrees) : "skipped") << "\n";
        std::cout << "candidate\trun\tprofile\tconfidence\tverdict\n";
        for (const auto& a : seg.audit) {
            std::cout << a.column << "\t[" << a.run.first << "," << a.run.last << "]x" << a.run.size << "\t"
                      << a.profile_count << "\t";
            if (a.confidence) {
                std::cout << std::fixed << std::setprecision(4) << *a.confidence << std::defaultfloat;
            } else {
                std::cout << "-";
            }
            std::cout << "\t" << to_string(a.verdict) << "\n";
        }
        std::cout << "cuts=" << format_cuts(seg.result.cut_columns) << "\n";

        std::vector<std::pair<fs::path, std::vector<std::uint8_t>>> files;
        files.emplace_back(sidecar, text_bytes(format_cuts(seg.result.cut_columns) + "\n"));
        if (!overlay_path.empty()) files.emplace_back(overlay_path, save_gray(make_overlay(gray, seg)));
        write_all(files);
        return kOk;
    }
};

struct BuildTrainCmd {
    fs::path manifest, out;
    PipelineFlags flags;

    void attach(CLI::App* app) {
        app->add_option("--manifest", manifest, "Word manifest (tab-separated)")->required();
        app->add_option("--out", out, "Training file to write")->required();
        flags.attach(app, false);
    }

    int run() const {
        const PipelineConfig cfg = flags.resolve();
        Banner b("build-train");
        b.add("manifest", manifest.string()).add("out", out.string());
        PipelineFlags::describe(b, cfg);
        b.print();

        const Manifest m = load_manifest(manifest);
        for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
        const auto words = load_words(m);
        const TrainingFile tf = build_training_file(words, cfg);
        write_file_bytes(out, save_training_file(tf));

        const auto correct = std::count_if(tf.records.begin(), tf.records.end(),
                                           [](const LabeledPoint& p) { return p.label == PointLabel::Correct; });
        std::cout << "words=" << tf.word_count << " patterns=" << tf.records.size() << " correct=" << correct
                  << " incorrect=" << static_cast<long long>(tf.records.size()) - correct << "\n";
        return kOk;
    }
};

struct TrainCmd {
    fs::path training_file, out, loss_log;
    std::size_t hidden = kDefaultHiddenUnits;
    TrainingConfig tc;
    bool no_shuffle = false;

    void attach(CLI::App* app) {
        app->add_option("--training-file", training_file, "Training file from build-train")->required();
        app->add_option("--out", out, "Model file to write")->required();
        app->add_option("--loss-log", loss_log, "Per-epoch loss log (default: <out>.loss.tsv)");
        app->add_option("--hidden", hidden, "Hidden units (published range 21-35)")->capture_default_str();
        app->add_option("--epochs", tc.epochs, "Training epochs (published value 315)")->capture_default_str();
        app->add_option("--lr", tc.learning_rate, "Learning rate eta (published value 0.1)")->capture_default_str();
        app->add_option("--momentum", tc.momentum, "Momentum alpha (published value 0.3)")->capture_default_str();
        app->add_option("--seed", tc.seed, "Seed for weight init and shuffling")->capture_default_str();
        app->add_flag("--no-shuffle", no_shuffle, "Present patterns in file order every epoch");
    }

    int run() {
        tc.shuffle = !no_shuffle;
        const fs::path log_path = loss_log.empty() ? fs::path(out.string() + ".loss.tsv") : loss_log;
        Banner b("train");
        b.add("training_file", training_file.string())
            .add("out", out.string())
            .add("loss_log", log_path.string())
            .add("hidden", static_cast<std::uint64_t>(hidden))
            .add("epochs", tc.epochs)
            .add("lr", tc.learning_rate)
            .add("momentum", tc.momentum)
            .add("seed", tc.seed)
            .add("shuffle", tc.shuffle);
        b.print();
        tc.validate();
        if (hidden < 1) throw ConfigError("--hidden must be >= 1");

        const auto bytes = read_file_bytes(training_file);
        TrainingFile tf;
        try {
            tf = load_training_file(bytes);
        } catch (const DecodeError& e) {
            throw DecodeError(training_file.string() + ": " + e.what());
        }
        if (tf.records.empty()) throw InputError(training_file.string() + ": training file has no patterns");

        auto model = init_model(static_cast<std::size_t>(tf.window.input_size()), hidden, tc.seed, tf.window);
        const TrainResult r = train(std::move(model), tf.records, tc);
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";

        std::ostringstream log;
        log << "epoch\tmse\n" << std::setprecision(17);
        for (std::size_t e = 0; e < r.loss_history.size(); ++e) log << (e + 1) << "\t" << r.loss_history[e] << "\n";
        write_all({{out, save_model(r.model)}, {log_path, text_bytes(log.str())}});

        std::cout << "patterns=" << tf.records.size() << " epochs=" << r.loss_history.size()
                  << " final_mse=" << std::setprecision(6) << r.loss_history.back() << "\n";
        std::cout << "wrote " << out.string() << "\nwrote " << log_path.string() << "\n";
        return kOk;
    }
};

struct EvaluateCmd {
    fs::path manifest, model_path, report, overlays;
    int jobs = 1;
    PipelineFlags flags;

    void attach(CLI::App* app) {
        app->add_option("--manifest", manifest, "Word manifest with truth columns")->required();
        app->add_option("--model", model_path, "Validator model file");
        app->add_option("--report", report, "Key-value report path; <report>.table.txt and <report>.timing too")
            ->required();
        app->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--overlays", overlays, "Directory for per-word overlay images");
        flags.attach(app, true);
    }

    int run() const {
        const PipelineConfig cfg = flags.resolve();
        Banner b("evaluate");
        b.add("manifest", manifest.string())
            .add("model", model_path.empty() ? "none" : model_path.string())
            .add("report", report.string())
            .add("jobs", jobs)
            .add("overlays", overlays.empty() ? "none" : overlays.string());
        PipelineFlags::describe(b, cfg);
        b.print();

        std::optional<MlpModel> model;
        if (!model_path.empty()) model = read_model(model_path);
        const Manifest m = load_manifest(manifest);
        for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
        const auto words = load_words(m);
        if (words.empty()) throw InputError(manifest.string() + ": corpus is empty");

        const MlpModel* mp = model ? &*model : nullptr;
        const EvaluationReport r = evaluate(words, mp, cfg, jobs);
        const std::string table = format_report_table(r);
        const std::string timing = format_timing(r);

        std::vector<std::pair<fs::path, std::vector<std::uint8_t>>> files;
        files.emplace_back(report, text_bytes(format_report_kv(r)));
        files.emplace_back(fs::path(report.string() + ".table.txt"), text_bytes(table));
        files.emplace_back(fs::path(report.string() + ".timing"), text_bytes(timing));
        if (!overlays.empty()) {
            fs::create_directories(overlays);
            for (const auto& w : words) {
                const auto seg = segment_word(w.image, mp, cfg);
                files.emplace_back(overlays / (w.id + ".overlay.pgm"), save_gray(make_overlay(w.image, seg)));
            }
        }
        write_all(files);

        std::cout << table << timing;
        return kOk;
    }
};

struct SynthCmd {
    fs::path glyphset, out_dir;
    int words = 10;
    int gap = -1, overlap = 0;
    bool connectors = false, mixed = false;
    int min_glyphs = 2, max_glyphs = 5, jitter = 1;
    std::uint64_t seed = 1;
    std::string prefix = "w";

    void attach(CLI::App* app) {
        app->add_option("--glyphset", glyphset, "Glyph set text file (default: built-in glyphs)");
        app->add_option("--out-dir", out_dir, "Directory for images and manifest.tsv")->required();
        app->add_option("--words", words, "Number of words")->capture_default_str()->check(CLI::NonNegativeNumber);
        app->add_option("--gap", gap, "Fixed gap between glyphs (default: random 2-4)");
        app->add_option("--overlap", overlap, "Fixed overlap between glyphs; requires --gap 0 or no --gap")
            ->capture_default_str()
            ->check(CLI::NonNegativeNumber);
        app->add_flag("--connectors", connectors, "Bridge every gap with a ligature stroke");
        app->add_flag("--mixed", mixed, "Mix gaps, overlaps and connectors (ignores --gap/--overlap)");
        app->add_option("--min-glyphs", min_glyphs, "Fewest glyphs per word")->capture_default_str();
        app->add_option("--max-glyphs", max_glyphs, "Most glyphs per word")->capture_default_str();
        app->add_option("--jitter", jitter, "Max vertical glyph displacement in rows")->capture_default_str();
        app->add_option("--seed", seed, "Corpus seed")->capture_default_str();
        app->add_option("--prefix", prefix, "Word id prefix")->capture_default_str();
    }

    int run() const {
        CorpusRecipe r = mixed ? mixed_recipe() : separable_recipe();
        if (!mixed) {
            if (overlap > 0) {
                if (gap > 0) throw ConfigError("--gap and --overlap are mutually exclusive");
                r.overlap_probability = 1.0;
                r.min_overlap = r.max_overlap = overlap;
            } else if (gap >= 0) {
                r.min_gap = r.max_gap = gap;
            }
            if (connectors) r.connector_probability = 1.0;
        }
        r.min_glyphs = min_glyphs;
        r.max_glyphs = max_glyphs;
        r.jitter = jitter;

        Banner b("synth");
        b.add("glyphset", glyphset.empty() ? "builtin" : glyphset.string())
            .add("out_dir", out_dir.string())
            .add("words", words)
            .add("seed", seed)
            .add("prefix", prefix)
            .add("min_glyphs", r.min_glyphs)
            .add("max_glyphs", r.max_glyphs)
            .add("min_gap", r.min_gap)
            .add("max_gap", r.max_gap)
            .add("overlap_probability", r.overlap_probability)
            .add("min_overlap", r.min_overlap)
            .add("max_overlap", r.max_overlap)
            .add("connector_probability", r.connector_probability)
            .add("jitter", r.jitter);
        b.print();

        const GlyphSet set = glyphset.empty() ? builtin_glyphs() : load_glyph_set(glyphset);
        const auto corpus = generate_corpus(set, r, words, seed, prefix);
        write_corpus(out_dir, corpus);
        std::cout << "wrote " << corpus.size() << " words to " << out_dir.string() << "\n";
        return kOk;
    }
};

struct InspectModelCmd {
    fs::path model_path;

    void attach(CLI::App* app) { app->add_option("--model", model_path, "Model file")->required(); }

    int run() const {
        Banner b("inspect-model");
        b.add("model", model_path.string());
        b.print();

        const MlpModel m = read_model(model_path);
        const auto stats = [](const char* name, const std::vector<double>& v) {
            double lo = v.front(), hi = v.front(), sum_abs = 0.0;
            for (double x : v) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
                sum_abs += std::abs(x);
            }
            std::cout << name << ": count=" << v.size() << " min=" << lo << " max=" << hi
                      << " mean_abs=" << sum_abs / static_cast<double>(v.size()) << "\n";
        };
        std::cout << "format_version=" << kModelFormatVersion << "\n";
        std::cout << "inputs=" << m.input_size << " hidden=" << m.hidden_size << " outputs=" << m.output_size << "\n";
        if (m.window) {
            std::cout << "window=" << m.window->window_width << "x" << m.window->normalized_height << "\n";
        } else {
            std::cout << "window=none\n";
        }
        stats("weights_ih", m.weights_ih);
        stats("bias_h", m.bias_h);
        stats("weights_ho", m.weights_ho);
        stats("bias_o", m.bias_o);
        return kOk;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cursive handwritten word segmentation: column-profile cuts checked by a trained perceptron"};
    app.set_config("--config", "", "TOML/INI file with default option values, one [section] per subcommand");
    app.require_subcommand(1);

    PreprocessCmd preprocess;
    SegmentCmd segment;
    BuildTrainCmd build_train;
    TrainCmd train_cmd;
    EvaluateCmd evaluate_cmd;
    SynthCmd synth;
    InspectModelCmd inspect;

    auto* s_pre = app.add_subcommand("preprocess", "Binarize, deslant and thin one image");
    auto* s_seg = app.add_subcommand("segment", "Segment one word image");
    auto* s_bt = app.add_subcommand("build-train", "Extract labelled candidate windows from a corpus");
    auto* s_tr = app.add_subcommand("train", "Train the segmentation-point validator");
    auto* s_ev = app.add_subcommand("evaluate", "Score the pipeline against a labelled corpus");
    auto* s_sy = app.add_subcommand("synth", "Generate a synthetic word corpus");
    auto* s_in = app.add_subcommand("inspect-model", "Describe a model file");
    preprocess.attach(s_pre);
    segment.attach(s_seg);
    build_train.attach(s_bt);
    train_cmd.attach(s_tr);
    evaluate_cmd.attach(s_ev);
    synth.attach(s_sy);
    inspect.attach(s_in);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (const auto* cfg = app.get_option("--config"); cfg->count() > 0) {
            std::cout << "# config file: " << cfg->as<std::string>() << "\n";
        }
        if (s_pre->parsed()) return preprocess.run();
        if (s_seg->parsed()) return segment.run();
        if (s_bt->parsed()) return build_train.run();
        if (s_tr->parsed()) return train_cmd.run();
        if (s_ev->parsed()) return evaluate_cmd.run();
        if (s_sy->parsed()) return synth.run();
        if (s_in->parsed()) return inspect.run();
    } catch (const ContractError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternalError;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kInputError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kUsage;
}
