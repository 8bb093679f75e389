#include "cursiveseg/segmentation.hpp"

#include <sstream>

#include "cursiveseg/error.hpp"

namespace cseg {

ColumnProfile column_profile(const BinaryImage& image) {
    ColumnProfile profile;
    profile.counts.assign(static_cast<std::size_t>(image.width()), 0);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) profile.counts[x] += image.at(x, y);
    }
    return profile;
}

CandidateColumns candidate_columns(const ColumnProfile& profile) {
    CandidateColumns csc;
    for (std::size_t c = 0; c < profile.counts.size(); ++c) {
        if (profile.counts[c] <= 1) csc.columns.push_back(static_cast<int>(c));
    }
    return csc;
}

std::vector<MergedRun> merge_runs(const CandidateColumns& csc, int threshold) {
    if (threshold < 1) throw ContractError("merge_candidates: threshold must be >= 1");
    std::vector<MergedRun> runs;
    const auto& cols = csc.columns;
    std::size_t i = 0;
    while (i < cols.size()) {
        std::size_t j = i;
        long long sum = cols[i];
        while (j + 1 < cols.size() && cols[j + 1] - cols[j] < threshold) {
            ++j;
            sum += cols[j];
        }
        const long long n = static_cast<long long>(j - i + 1);
        // floor(sum / n + 1/2) with nonnegative integers
        const int mean = static_cast<int>((2 * sum + n) / (2 * n));
        runs.push_back({cols[i], cols[j], static_cast<int>(n), mean});
        i = j + 1;
    }
    return runs;
}

CandidateColumns merge_candidates(const CandidateColumns& csc, int threshold) {
    CandidateColumns out;
    for (const auto& run : merge_runs(csc, threshold)) out.columns.push_back(run.column);
    return out;
}

std::vector<std::size_t> margin_survivors(const ColumnProfile& profile, std::span<const int> cuts) {
    const auto& counts = profile.counts;
    std::vector<long long> prefix(counts.size() + 1, 0);
    for (std::size_t c = 0; c < counts.size(); ++c) prefix[c + 1] = prefix[c] + counts[c];
    const auto ink = [&](int begin, int end) { return prefix[end] - prefix[begin] > 0; };
    const int width = static_cast<int>(counts.size());

    std::vector<std::size_t> kept;
    int previous = 0;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const int c = cuts[i];
        if (c < 0 || c >= width) continue;
        if (ink(previous, c) && ink(c, width)) {
            kept.push_back(i);
            previous = c;
        }
    }
    return kept;
}

SegmentationResult cut_segments(int width, const CandidateColumns& cuts) {
    SegmentationResult result;
    int previous = 0;
    for (int c : cuts.columns) {
        if (c <= previous || c >= width) {
            throw ContractError("cut_segments: cuts must be strictly increasing and inside (0, width)");
        }
        result.segments.push_back({previous, c});
        result.cut_columns.push_back(c);
        previous = c;
    }
    result.segments.push_back({previous, width});
    return result;
}

std::string format_cuts(std::span<const int> cuts) {
    std::ostringstream os;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        if (i) os << ' ';
        os << cuts[i];
    }
    return os.str();
}

}  // namespace cseg
