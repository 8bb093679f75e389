#pragma once

#include <span>
#include <string>
#include <vector>

#include "cursiveseg/raster.hpp"

namespace cseg {

// Foreground pixel count of every column.
struct ColumnProfile {
    std::vector<int> counts;
};

// Strictly increasing column indices.
struct CandidateColumns {
    std::vector<int> columns;

    friend bool operator==(const CandidateColumns&, const CandidateColumns&) = default;
};

// Half-open column range [begin, end).
struct ColumnRange {
    int begin = 0;
    int end = 0;

    int width() const { return end - begin; }
    friend bool operator==(const ColumnRange&, const ColumnRange&) = default;
};

struct SegmentationResult {
    std::vector<int> cut_columns;
    std::vector<ColumnRange> segments;
};

inline constexpr int kDefaultMergeThreshold = 3;

ColumnProfile column_profile(const BinaryImage& image);

// Columns whose count is 0 or 1.
CandidateColumns candidate_columns(const ColumnProfile& profile);

// One maximal run of candidates whose consecutive gaps are below the merge
// threshold, and the single column it collapsed to.
struct MergedRun {
    int first = 0;
    int last = 0;
    int size = 0;
    int column = 0;
};

// Splits `csc` into maximal runs where each consecutive gap is < threshold
// and replaces each run by its mean rounded half-up.
std::vector<MergedRun> merge_runs(const CandidateColumns& csc, int threshold = kDefaultMergeThreshold);
CandidateColumns merge_candidates(const CandidateColumns& csc, int threshold = kDefaultMergeThreshold);

// Indices into `cuts` that survive the margin rule: a cut is kept only when
// the segment it would close on its left and everything to its right both
// contain ink. Leading and trailing blank margins therefore never produce
// ink-free segments.
std::vector<std::size_t> margin_survivors(const ColumnProfile& profile, std::span<const int> cuts);

SegmentationResult cut_segments(int width, const CandidateColumns& cuts);
inline SegmentationResult cut_segments(const BinaryImage& image, const CandidateColumns& cuts) {
    return cut_segments(image.width(), cuts);
}

// Sidecar text format: the cut columns separated by single spaces.
std::string format_cuts(std::span<const int> cuts);

}  // namespace cseg
