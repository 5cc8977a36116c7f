#pragma once

// Multi-scale cosine affinity over window groups and spectral clustering
// (symmetric normalized Laplacian, row-normalized eigenvectors, seeded
// k-means++), with oracle or eigen-gap speaker count.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diarkit/segmentation.hpp"
#include "diarkit/types.hpp"

namespace diarkit {

// Embedding vectors rearranged to line up with planned windows: one vector
// per (scale, window) slot, plus the source line for error reporting.
struct EmbeddingSet {
    std::vector<std::vector<std::vector<double>>> vecs;  // [scale][window][dim]
    std::vector<std::vector<int>> source_lines;          // [scale][window]
};

// Match records to windows by nearest center within the same scale. A record
// farther than half a window length from every window of its scale cannot be
// placed and any window left without a record is an error.
EmbeddingSet align_embeddings(const std::vector<EmbeddingRecord>& records,
                              const std::vector<ScaleWindows>& windows);

struct AffinityMatrix {
    Eigen::MatrixXd m;  // symmetric, unit diagonal, entries in [-1, 1]

    int n() const { return static_cast<int>(m.rows()); }
};

AffinityMatrix multi_scale_affinity(const EmbeddingSet& set, const std::vector<WindowGroup>& groups,
                                    const std::vector<double>& weights);

namespace serial {
AffinityMatrix multi_scale_affinity(const EmbeddingSet& set, const std::vector<WindowGroup>& groups,
                                    const std::vector<double>& weights);
}  // namespace serial

enum class CountMethod { oracle, eigen_gap };

struct ClusterResult {
    std::vector<int> labels;  // in [0, k), relabelled by first occurrence
    int k = 0;
    CountMethod method = CountMethod::oracle;
};

// Eigen-gap estimate over k in [1, min(max_k, n-1)]; ties pick the lowest k.
int estimate_num_speakers(const AffinityMatrix& aff, int max_k);

ClusterResult spectral_cluster(const AffinityMatrix& aff, int k, std::uint64_t seed);

// Merge consecutive equal-label base windows (gap <= 0.1 s) into turns
// named speaker_<label>.
std::vector<SpeakerTurn> labels_to_turns(const ScaleWindows& base_windows,
                                         const std::vector<int>& labels,
                                         const std::string& file_id);

}  // namespace diarkit
