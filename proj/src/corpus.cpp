#include "cursiveseg/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "byteio.hpp"
#include "cursiveseg/error.hpp"
#include "cursiveseg/pnm.hpp"

namespace cseg {

namespace {

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Lowest ink row in the last column of a glyph, or -1.
int lowest_ink_in_last_column(const BinaryImage& g) {
    const int x = g.width() - 1;
    for (int y = g.height() - 1; y >= 0; --y) {
        if (g.at(x, y)) return y;
    }
    return -1;
}

}  // namespace

SynthesizedWord synthesize_word(const GlyphSet& glyphs, std::span<const std::string> sequence,
                                const WordLayout& layout, std::uint64_t seed) {
    if (sequence.empty()) throw ContractError("synthesize_word: empty glyph sequence");
    if (layout.gap < 0 || layout.overlap < 0 || layout.jitter < 0) {
        throw ContractError("synthesize_word: gap, overlap and jitter must be >= 0");
    }
    if (layout.gap > 0 && layout.overlap > 0) {
        throw ContractError("synthesize_word: gap and overlap are mutually exclusive");
    }

    std::vector<const Glyph*> parts;
    for (const auto& name : sequence) {
        const Glyph* g = glyphs.find(name);
        if (!g) throw InputError("unknown glyph '" + name + "'");
        if (g->image.width() <= layout.overlap) {
            throw ContractError("synthesize_word: overlap exceeds width of glyph '" + name + "'");
        }
        parts.push_back(g);
    }

    std::mt19937_64 rng(seed);
    int height = 0;
    std::vector<int> xs, ys;
    int x = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) x += layout.gap - layout.overlap;
        xs.push_back(x);
        ys.push_back(layout.jitter + uniform_int(rng, -layout.jitter, layout.jitter));
        x += parts[i]->image.width();
        height = std::max(height, parts[i]->image.height());
    }
    const int width = x;
    height += 2 * layout.jitter;

    SynthesizedWord out{BinaryImage(width, height), {}};
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& g = parts[i]->image;
        for (int gy = 0; gy < g.height(); ++gy) {
            for (int gx = 0; gx < g.width(); ++gx) {
                if (g.at(gx, gy)) out.image.set(xs[i] + gx, ys[i] + gy, 1);
            }
        }
    }

    for (std::size_t i = 1; i < parts.size(); ++i) {
        const int left_end = xs[i - 1] + parts[i - 1]->image.width();
        if (layout.overlap > 0) {
            out.truth_columns.push_back(xs[i] + layout.overlap / 2);
        } else {
            out.truth_columns.push_back(left_end + layout.gap / 2);
        }
        if (layout.connector && layout.gap > 0) {
            const int low = lowest_ink_in_last_column(parts[i - 1]->image);
            if (low < 0) continue;
            const int row = ys[i - 1] + low;
            for (int cx = left_end; cx < xs[i]; ++cx) {
                out.image.set(cx, row, 1);
                if (row > 0) out.image.set(cx, row - 1, 1);
            }
        }
    }
    return out;
}

CorpusRecipe separable_recipe() {
    return {};
}

CorpusRecipe mixed_recipe() {
    CorpusRecipe r;
    r.min_gap = 1;
    r.max_gap = 5;
    r.overlap_probability = 0.15;
    r.max_overlap = 2;
    r.connector_probability = 0.5;
    return r;
}

std::vector<GeneratedWord> generate_corpus(const GlyphSet& glyphs, const CorpusRecipe& recipe, int count,
                                           std::uint64_t seed, std::string_view id_prefix) {
    if (count < 0) throw ContractError("generate_corpus: negative word count");
    if (recipe.min_glyphs < 1 || recipe.max_glyphs < recipe.min_glyphs) {
        throw ConfigError("generate_corpus: invalid glyph count range");
    }
    if (recipe.min_gap < 0 || recipe.max_gap < recipe.min_gap) throw ConfigError("generate_corpus: invalid gap range");
    if (recipe.min_overlap < 1 || recipe.max_overlap < recipe.min_overlap) {
        throw ConfigError("generate_corpus: invalid overlap range");
    }
    const auto pool = recipe.glyph_pool.empty() ? glyphs.names() : recipe.glyph_pool;
    if (pool.empty()) throw ConfigError("generate_corpus: empty glyph pool");

    std::mt19937_64 rng(seed);
    std::vector<GeneratedWord> words;
    words.reserve(static_cast<std::size_t>(count));
    const int digits = std::max(4, static_cast<int>(std::to_string(count).size()));
    for (int i = 0; i < count; ++i) {
        GeneratedWord w;
        std::ostringstream id;
        id << id_prefix << std::setw(digits) << std::setfill('0') << i;
        w.id = id.str();
        const int n = uniform_int(rng, recipe.min_glyphs, recipe.max_glyphs);
        for (int k = 0; k < n; ++k) {
            w.sequence.push_back(pool[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(pool.size()) - 1))]);
        }
        w.layout.jitter = recipe.jitter;
        if (uniform_unit(rng) < recipe.overlap_probability) {
            w.layout.overlap = uniform_int(rng, recipe.min_overlap, recipe.max_overlap);
        } else {
            w.layout.gap = uniform_int(rng, recipe.min_gap, recipe.max_gap);
            w.layout.connector = w.layout.gap > 0 && uniform_unit(rng) < recipe.connector_probability;
        }
        w.word = synthesize_word(glyphs, w.sequence, w.layout, rng());
        words.push_back(std::move(w));
    }
    return words;
}

LabeledWord to_labeled_word(const GeneratedWord& w) {
    return {w.id, to_gray(w.word.image), w.word.truth_columns};
}

std::vector<LabeledWord> to_labeled_words(std::span<const GeneratedWord> words) {
    std::vector<LabeledWord> out;
    out.reserve(words.size());
    for (const auto& w : words) out.push_back(to_labeled_word(w));
    return out;
}

void write_corpus(const std::filesystem::path& dir, std::span<const GeneratedWord> words) {
    std::filesystem::create_directories(dir);
    std::vector<WordRecord> records;
    for (const auto& w : words) {
        const std::string file = w.id + ".pgm";
        write_gray_file(dir / file, to_gray(w.word.image));
        records.push_back({w.id, file, w.word.truth_columns, std::nullopt});
    }
    const std::string text = format_manifest(records);
    write_file_bytes(dir / "manifest.tsv",
                     std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
    Manifest m;
    m.base_dir = base_dir;
    std::vector<std::string> errors;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto where = "line " + std::to_string(line_no) + ": ";
        const auto fields = split(line, '\t');
        if (fields.size() < 3 || fields.size() > 4) {
            errors.push_back(where + "expected 3 or 4 tab-separated fields, found " + std::to_string(fields.size()));
            continue;
        }
        WordRecord rec;
        rec.id = fields[0];
        rec.image_path = fields[1];
        if (fields.size() == 4 && !fields[3].empty()) rec.script_tag = fields[3];
        if (rec.id.empty()) errors.push_back(where + "empty id");
        if (rec.image_path.empty()) errors.push_back(where + "empty image path");

        bool ok = true;
        if (!fields[2].empty()) {
            for (const auto& tok : split(fields[2], ',')) {
                const auto v = parse_int(tok);
                if (!v || *v < 0) {
                    errors.push_back(where + "invalid truth column '" + tok + "'");
                    ok = false;
                    break;
                }
                if (!rec.truth_columns.empty() && *v <= rec.truth_columns.back()) {
                    errors.push_back(where + "truth columns must be strictly increasing ('" + fields[2] + "')");
                    ok = false;
                    break;
                }
                rec.truth_columns.push_back(*v);
            }
        }
        if (!ok || rec.id.empty() || rec.image_path.empty()) continue;

        const auto path = base_dir / rec.image_path;
        if (!std::filesystem::exists(path)) {
            errors.push_back(where + "image file '" + path.string() + "' not found");
            continue;
        }
        try {
            const auto img = read_gray_file(path);
            if (!rec.truth_columns.empty() && rec.truth_columns.back() >= img.width()) {
                errors.push_back(where + "truth column " + std::to_string(rec.truth_columns.back()) +
                                 " is outside image width " + std::to_string(img.width()));
                continue;
            }
        } catch (const Error& e) {
            errors.push_back(where + e.what());
            continue;
        }
        m.records.push_back(std::move(rec));
    }
    if (!errors.empty()) {
        std::ostringstream os;
        os << "manifest has " << errors.size() << " invalid line(s):";
        for (const auto& e : errors) os << "\n  " << e;
        throw InputError(os.str());
    }
    if (m.records.empty()) m.warnings.push_back("manifest contains no records");
    return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                          path.parent_path());
}

std::string format_manifest(std::span<const WordRecord> records) {
    std::ostringstream os;
    for (const auto& r : records) {
        os << r.id << '\t' << r.image_path << '\t';
        for (std::size_t i = 0; i < r.truth_columns.size(); ++i) os << (i ? "," : "") << r.truth_columns[i];
        if (r.script_tag) os << '\t' << *r.script_tag;
        os << '\n';
    }
    return os.str();
}

std::vector<LabeledWord> load_words(const Manifest& manifest) {
    std::vector<LabeledWord> words;
    words.reserve(manifest.records.size());
    for (const auto& r : manifest.records) {
        words.push_back({r.id, read_gray_file(manifest.base_dir / r.image_path), r.truth_columns});
    }
    return words;
}

// ---------------------------------------------------------------------------

std::vector<PointLabel> label_candidates(std::span<const int> truth, std::span<const int> candidates,
                                         int match_tolerance) {
    std::vector<PointLabel> labels(candidates.size(), PointLabel::Incorrect);
    for (const auto& m : greedy_match(truth, candidates, match_tolerance)) {
        labels[m.predicted_index] = PointLabel::Correct;
    }
    return labels;
}

TrainingFile build_training_file(std::span<const LabeledWord> corpus, const PipelineConfig& cfg) {
    cfg.validate();
    if (corpus.empty()) throw InputError("build_training_file: empty corpus");
    TrainingFile file;
    file.window = cfg.window;
    file.word_count = corpus.size();
    for (const auto& word : corpus) {
        const auto prepared = prepare_word(word.image, cfg);
        std::vector<const CandidateAudit*> kept;
        std::vector<int> columns;
        const auto audit = geometric_candidates(prepared);
        for (const auto& a : audit) {
            if (a.verdict != CutVerdict::Accepted) continue;
            kept.push_back(&a);
            columns.push_back(a.column);
        }
        const auto labels = label_candidates(word.truth_columns, columns, cfg.match_tolerance);
        for (std::size_t i = 0; i < kept.size(); ++i) {
            file.records.push_back({extract_window(prepared.working, kept[i]->run.column, cfg.window), labels[i],
                                    {word.id, columns[i]}});
        }
    }
    return file;
}

namespace {

constexpr char kTrainingMagic[] = "CSEGTRN";

}  // namespace

std::vector<std::uint8_t> save_training_file(const TrainingFile& file) {
    file.window.validate();
    const auto n_inputs = static_cast<std::size_t>(file.window.input_size());

    // ids are numbered in order of first appearance
    std::vector<std::string> ids;
    std::map<std::string, std::uint32_t> index_of;
    std::vector<std::uint32_t> id_index;
    for (const auto& r : file.records) {
        if (r.features.size() != n_inputs) throw ContractError("training record length does not match window");
        const auto [it, inserted] = index_of.try_emplace(r.source.word_id, static_cast<std::uint32_t>(ids.size()));
        if (inserted) ids.push_back(r.source.word_id);
        id_index.push_back(it->second);
    }

    detail::ByteWriter w;
    w.bytes(std::string_view(kTrainingMagic, sizeof(kTrainingMagic)));
    w.uint<std::uint32_t>(kTrainingFormatVersion);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(file.window.window_width));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(file.window.normalized_height));
    w.uint<std::uint64_t>(file.word_count);
    w.uint<std::uint64_t>(file.records.size());
    w.uint<std::uint64_t>(ids.size());
    for (const auto& id : ids) {
        w.uint<std::uint32_t>(static_cast<std::uint32_t>(id.size()));
        w.bytes(id);
    }
    for (std::size_t i = 0; i < file.records.size(); ++i) {
        const auto& r = file.records[i];
        w.uint<std::uint32_t>(id_index[i]);
        w.uint<std::uint32_t>(static_cast<std::uint32_t>(r.source.column));
        w.uint<std::uint8_t>(static_cast<std::uint8_t>(r.label));
        for (double v : r.features) w.f32(static_cast<float>(v));
    }
    return w.take();
}

TrainingFile load_training_file(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes, "training file");
    r.expect_magic(std::string_view(kTrainingMagic, sizeof(kTrainingMagic)));
    const auto version = r.uint<std::uint32_t>("version");
    if (version != kTrainingFormatVersion) r.fail("version", "unsupported format version " + std::to_string(version));

    TrainingFile file;
    file.window.window_width = static_cast<int>(r.uint<std::uint32_t>("window_width"));
    file.window.normalized_height = static_cast<int>(r.uint<std::uint32_t>("normalized_height"));
    try {
        file.window.validate();
    } catch (const ConfigError& e) {
        r.fail("window", e.what());
    }
    file.word_count = r.uint<std::uint64_t>("word_count");
    const auto n_records = r.uint<std::uint64_t>("pattern_count");
    const auto n_ids = r.uint<std::uint64_t>("id_count");
    if (n_ids > r.remaining() / 4) r.fail("id_count", "more ids than the file can hold");

    std::vector<std::string> ids;
    ids.reserve(n_ids);
    for (std::uint64_t i = 0; i < n_ids; ++i) {
        const auto len = r.uint<std::uint32_t>("id_length");
        ids.push_back(r.str(len, "id"));
    }

    const auto n_inputs = static_cast<std::size_t>(file.window.input_size());
    const std::size_t record_size = 4 + 4 + 1 + 4 * n_inputs;
    if (n_records * record_size != r.remaining()) {
        r.fail("records", "payload holds " + std::to_string(r.remaining()) + " bytes, expected " +
                              std::to_string(n_records * record_size) + " for " + std::to_string(n_records) +
                              " records");
    }
    file.records.reserve(n_records);
    for (std::uint64_t i = 0; i < n_records; ++i) {
        LabeledPoint p;
        const auto idx = r.uint<std::uint32_t>("id_index");
        if (idx >= ids.size()) r.fail("id_index", "record refers to unknown word id");
        p.source.word_id = ids[idx];
        p.source.column = static_cast<int>(r.uint<std::uint32_t>("column"));
        const auto label = r.uint<std::uint8_t>("label");
        if (label > 1) r.fail("label", "label must be 0 or 1");
        p.label = static_cast<PointLabel>(label);
        p.features.resize(n_inputs);
        for (auto& v : p.features) {
            v = r.f32("features");
            if (!(v >= 0.0 && v <= 1.0)) r.fail("features", "feature value outside [0, 1]");
        }
        file.records.push_back(std::move(p));
    }
    return file;
}

}  // namespace cseg
