#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cursiveseg/features.hpp"
#include "cursiveseg/mlp.hpp"
#include "cursiveseg/pipeline.hpp"
#include "cursiveseg/raster.hpp"

namespace cseg {

// ---------------------------------------------------------------------------
// Glyphs and word synthesis
// ---------------------------------------------------------------------------

// Shape families of cursive letters: closed loops, semi-loops, and open
// letters whose thin internal strokes look like ligatures.
enum class GlyphClass { Loop, SemiLoop, Ligature };

const char* to_string(GlyphClass c);
std::optional<GlyphClass> parse_glyph_class(std::string_view s);

struct Glyph {
    std::string name;
    GlyphClass shape = GlyphClass::Loop;
    BinaryImage image;
};

class GlyphSet {
public:
    void add(Glyph glyph);
    const Glyph* find(std::string_view name) const;
    const std::vector<Glyph>& glyphs() const { return glyphs_; }
    std::vector<std::string> names(std::optional<GlyphClass> shape = std::nullopt) const;
    bool empty() const { return glyphs_.empty(); }

private:
    std::vector<Glyph> glyphs_;
};

// The glyphs bundled with the library. All share a 26-row canvas with the
// baseline on row 21, strokes are two pixels thick.
const GlyphSet& builtin_glyphs();

// Text format, one block per glyph separated by blank lines:
//
//   glyph <name> <loop|semi-loop|ligature>
//   ..####..
//   .#....#.
//
// '#' is ink, any other character is background. Lines starting with ';'
// are comments.
GlyphSet parse_glyph_set(std::string_view text);
GlyphSet load_glyph_set(const std::filesystem::path& path);

struct WordLayout {
    int gap = 0;              // blank columns between consecutive glyphs
    int overlap = 0;          // columns shared (OR-ed) by consecutive glyphs
    bool connector = false;   // draw a 2-pixel ligature stroke across each gap
    int jitter = 0;           // max vertical displacement of a glyph, in rows
};

struct SynthesizedWord {
    BinaryImage image;
    std::vector<int> truth_columns;
};

// Glyphs are laid left to right; truth columns are the midpoints of the
// inter-glyph gaps, or of the overlapped columns. `seed` drives the vertical
// jitter only.
SynthesizedWord synthesize_word(const GlyphSet& glyphs, std::span<const std::string> sequence,
                                const WordLayout& layout, std::uint64_t seed);

// Distribution of words for a generated corpus. Each word draws one layout:
// with overlap_probability an overlap in [min_overlap, max_overlap], otherwise a gap in
// [min_gap, max_gap] bridged by a connector with connector_probability.
struct CorpusRecipe {
    int min_glyphs = 2;
    int max_glyphs = 5;
    int min_gap = 2;
    int max_gap = 4;
    double overlap_probability = 0.0;
    int min_overlap = 1;
    int max_overlap = 2;
    double connector_probability = 0.0;
    int jitter = 1;
    std::vector<std::string> glyph_pool;  // empty = every glyph in the set
};

// Recipe for clean, well-separated words.
CorpusRecipe separable_recipe();
// Recipe mixing gaps, touching/overlapping letters, and ligature connectors.
CorpusRecipe mixed_recipe();

struct GeneratedWord {
    std::string id;
    std::vector<std::string> sequence;
    WordLayout layout;
    SynthesizedWord word;
};

std::vector<GeneratedWord> generate_corpus(const GlyphSet& glyphs, const CorpusRecipe& recipe, int count,
                                           std::uint64_t seed, std::string_view id_prefix = "w");

// Ink 0 on paper 255.
LabeledWord to_labeled_word(const GeneratedWord& w);
std::vector<LabeledWord> to_labeled_words(std::span<const GeneratedWord> words);

// Writes <dir>/<id>.pgm for each word plus <dir>/manifest.tsv.
void write_corpus(const std::filesystem::path& dir, std::span<const GeneratedWord> words);

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

struct WordRecord {
    std::string id;
    std::string image_path;  // as written in the manifest, relative to it
    std::vector<int> truth_columns;
    std::optional<std::string> script_tag;
};

struct Manifest {
    std::filesystem::path base_dir;
    std::vector<WordRecord> records;
    std::vector<std::string> warnings;
};

// Tab-separated lines: id, image path, comma-separated truth columns and an
// optional script tag. Blank lines and lines starting with '#' are skipped.
// Every malformed line is reported in a single InputError.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

std::string format_manifest(std::span<const WordRecord> records);

std::vector<LabeledWord> load_words(const Manifest& manifest);

// ---------------------------------------------------------------------------
// Training files
// ---------------------------------------------------------------------------

struct TrainingFile {
    WindowConfig window;
    std::uint64_t word_count = 0;  // words the patterns were extracted from
    std::vector<LabeledPoint> records;
};

// Runs the geometric segmenter over each word and labels every surviving
// candidate: correct when it is matched 1:1 (greedy nearest-first) to a
// truth column within +/-match_tolerance, incorrect otherwise.
TrainingFile build_training_file(std::span<const LabeledWord> corpus, const PipelineConfig& cfg);

// Labels for one word's candidate columns, in candidate order.
std::vector<PointLabel> label_candidates(std::span<const int> truth, std::span<const int> candidates,
                                         int match_tolerance);

// Versioned little-endian container:
//   "CSEGTRN\0" | u32 version | u32 window_width | u32 normalized_height
//   | u64 word_count | u64 pattern_count | u64 id_count
//   | id table: (u32 length, bytes)*
//   | records: (u32 id_index, i32 column, u8 label, f32 features[w*h])*
inline constexpr std::uint32_t kTrainingFormatVersion = 1;

std::vector<std::uint8_t> save_training_file(const TrainingFile& file);
TrainingFile load_training_file(std::span<const std::uint8_t> bytes);

}  // namespace cseg
