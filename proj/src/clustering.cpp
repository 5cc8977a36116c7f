#include "diarkit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace diarkit {

namespace {

// Uniform [0,1) from the top 53 bits, independent of the standard library's
// distribution implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b, double na, double nb) {
    double dot = 0.0;
    for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot / (na * nb);
}

std::vector<std::vector<double>> vector_norms(const EmbeddingSet& set) {
    std::vector<std::vector<double>> norms(set.vecs.size());
    for (size_t s = 0; s < set.vecs.size(); ++s) {
        norms[s].resize(set.vecs[s].size());
        for (size_t i = 0; i < set.vecs[s].size(); ++i) {
            double ss = 0.0;
            for (double x : set.vecs[s][i]) ss += x * x;
            double n = std::sqrt(ss);
            if (n < 1e-12) {
                int line = set.source_lines[s][i];
                throw std::runtime_error(
                    "zero-norm embedding at scale " + std::to_string(s) + ", window " +
                    std::to_string(i) +
                    (line > 0 ? " (input line " + std::to_string(line) + ")" : ""));
            }
            norms[s][i] = n;
        }
    }
    return norms;
}

void check_affinity_inputs(const EmbeddingSet& set, const std::vector<WindowGroup>& groups,
                           const std::vector<double>& weights) {
    if (weights.size() != set.vecs.size())
        throw std::invalid_argument("one weight per scale required");
    double sum = 0.0;
    for (double w : weights) sum += w;
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
    for (const auto& g : groups) {
        if (g.scale_indices.size() != set.vecs.size())
            throw std::invalid_argument("group arity does not match scale count");
        for (size_t s = 0; s < set.vecs.size(); ++s)
            if (g.scale_indices[s] < 0 ||
                g.scale_indices[s] >= static_cast<int>(set.vecs[s].size()))
                throw std::invalid_argument("group references a missing embedding slot");
    }
}

double group_affinity(const EmbeddingSet& set, const std::vector<std::vector<double>>& norms,
                      const std::vector<WindowGroup>& groups, const std::vector<double>& weights,
                      int i, int j) {
    double a = 0.0;
    for (size_t s = 0; s < weights.size(); ++s) {
        int wi = groups[i].scale_indices[s];
        int wj = groups[j].scale_indices[s];
        a += weights[s] * cosine(set.vecs[s][wi], set.vecs[s][wj], norms[s][wi], norms[s][wj]);
    }
    return a;
}

// Symmetric normalized Laplacian of the affinity with negatives clamped to 0.
Eigen::MatrixXd normalized_laplacian(const AffinityMatrix& aff) {
    const int n = aff.n();
    Eigen::MatrixXd w = aff.m.cwiseMax(0.0);
    Eigen::VectorXd d = w.rowwise().sum();
    Eigen::VectorXd dis(n);
    for (int i = 0; i < n; ++i) dis(i) = d(i) > 1e-12 ? 1.0 / std::sqrt(d(i)) : 0.0;
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n) - dis.asDiagonal() * w * dis.asDiagonal();
    return 0.5 * (l + l.transpose());  // enforce exact symmetry
}

std::vector<int> kmeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed) {
    const int n = static_cast<int>(x.rows());
    std::mt19937_64 rng(seed);

    // k-means++ seeding
    Eigen::MatrixXd centers(k, x.cols());
    std::vector<double> dist2(n);
    {
        int first = std::min(n - 1, static_cast<int>(uniform01(rng) * n));
        centers.row(0) = x.row(first);
        for (int c = 1; c < k; ++c) {
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                double best = (x.row(i) - centers.row(0)).squaredNorm();
                for (int cc = 1; cc < c; ++cc)
                    best = std::min(best, (x.row(i) - centers.row(cc)).squaredNorm());
                dist2[i] = best;
                total += best;
            }
            int pick;
            if (total <= 0.0) {
                pick = std::min(n - 1, static_cast<int>(uniform01(rng) * n));
            } else {
                double r = uniform01(rng) * total;
                double cum = 0.0;
                pick = n - 1;
                for (int i = 0; i < n; ++i) {
                    cum += dist2[i];
                    if (cum > r) {
                        pick = i;
                        break;
                    }
                }
            }
            centers.row(c) = x.row(pick);
        }
    }

    std::vector<int> labels(n, 0);
    for (int iter = 0; iter < 300; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (x.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                double d = (x.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        // repair empty clusters with the point farthest from its center
        std::vector<int> counts(k, 0);
        for (int l : labels) ++counts[l];
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (counts[labels[i]] <= 1) continue;
                double d = (x.row(i) - centers.row(labels[i])).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far < 0) break;
            --counts[labels[far]];
            labels[far] = c;
            counts[c] = 1;
            centers.row(c) = x.row(far);
            changed = true;
        }
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, x.cols());
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < n; ++i) {
            next.row(labels[i]) += x.row(i);
            ++counts[labels[i]];
        }
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) next.row(c) /= counts[c];
            else next.row(c) = centers.row(c);
            shift = std::max(shift, (next.row(c) - centers.row(c)).norm());
        }
        centers = next;
        if (!changed || shift < 1e-6) break;
    }
    return labels;
}

std::vector<int> canonical_relabel(const std::vector<int>& labels, int k) {
    std::vector<int> remap(k, -1);
    std::vector<int> out(labels.size());
    int next = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (remap[labels[i]] < 0) remap[labels[i]] = next++;
        out[i] = remap[labels[i]];
    }
    return out;
}

}  // namespace

EmbeddingSet align_embeddings(const std::vector<EmbeddingRecord>& records,
                              const std::vector<ScaleWindows>& windows) {
    // bucket records per scale, keeping file order
    std::vector<std::vector<const EmbeddingRecord*>> by_scale(windows.size());
    for (const auto& r : records) {
        if (r.scale_index >= static_cast<int>(windows.size()))
            throw std::runtime_error("embedding scale " + std::to_string(r.scale_index) +
                                     " outside the plan (" + std::to_string(windows.size()) +
                                     " scales)");
        by_scale[r.scale_index].push_back(&r);
    }
    EmbeddingSet set;
    set.vecs.resize(windows.size());
    set.source_lines.resize(windows.size());
    for (size_t s = 0; s < windows.size(); ++s) {
        set.vecs[s].resize(windows[s].size());
        set.source_lines[s].assign(windows[s].size(), 0);
        for (size_t i = 0; i < windows[s].size(); ++i) {
            const Window& w = windows[s][i];
            const double tol = 0.5 * (w.end_s - w.start_s) + 1e-9;
            const EmbeddingRecord* best = nullptr;
            double best_d = 0.0;
            for (const auto* r : by_scale[s]) {
                double d = std::abs(r->center_s() - w.center_s());
                if (!best || d < best_d) {
                    best = r;
                    best_d = d;
                }
            }
            if (!best || best_d > tol)
                throw std::runtime_error("no embedding for scale " + std::to_string(s) +
                                         " window [" + std::to_string(w.start_s) + ", " +
                                         std::to_string(w.end_s) + ")");
            set.vecs[s][i] = best->vec;
            set.source_lines[s][i] = best->source_line;
        }
    }
    return set;
}

AffinityMatrix multi_scale_affinity(const EmbeddingSet& set, const std::vector<WindowGroup>& groups,
                                    const std::vector<double>& weights) {
    check_affinity_inputs(set, groups, weights);
    const auto norms = vector_norms(set);
    const int n = static_cast<int>(groups.size());
    AffinityMatrix aff;
    aff.m.resize(n, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        aff.m(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j)
            aff.m(i, j) = group_affinity(set, norms, groups, weights, i, j);
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) aff.m(i, j) = aff.m(j, i);
    return aff;
}

namespace serial {

AffinityMatrix multi_scale_affinity(const EmbeddingSet& set, const std::vector<WindowGroup>& groups,
                                    const std::vector<double>& weights) {
    check_affinity_inputs(set, groups, weights);
    const auto norms = vector_norms(set);
    const int n = static_cast<int>(groups.size());
    AffinityMatrix aff;
    aff.m.resize(n, n);
    for (int i = 0; i < n; ++i) {
        aff.m(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j)
            aff.m(i, j) = group_affinity(set, norms, groups, weights, i, j);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) aff.m(i, j) = aff.m(j, i);
    return aff;
}

}  // namespace serial

int estimate_num_speakers(const AffinityMatrix& aff, int max_k) {
    if (max_k < 1) throw std::invalid_argument("max_k must be >= 1");
    const int n = aff.n();
    if (n < 2) return 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normalized_laplacian(aff));
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
    int best_k = 1;
    double best_gap = ev(1) - ev(0);
    for (int k = 2; k <= std::min(max_k, n - 1); ++k) {
        double gap = ev(k) - ev(k - 1);
        if (gap > best_gap) {  // ties keep the lowest k
            best_gap = gap;
            best_k = k;
        }
    }
    return best_k;
}

ClusterResult spectral_cluster(const AffinityMatrix& aff, int k, std::uint64_t seed) {
    const int n = aff.n();
    if (k < 1 || k > n)
        throw std::invalid_argument("k must be in [1, " + std::to_string(n) + "]");
    ClusterResult res;
    res.k = k;
    if (k == 1) {
        res.labels.assign(n, 0);
        return res;
    }
    if (k == n) {
        res.labels.resize(n);
        for (int i = 0; i < n; ++i) res.labels[i] = i;
        return res;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normalized_laplacian(aff));
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    Eigen::MatrixXd emb = solver.eigenvectors().leftCols(k);
    for (int i = 0; i < n; ++i) {
        double norm = emb.row(i).norm();
        if (norm > 1e-12) emb.row(i) /= norm;
    }
    res.labels = canonical_relabel(kmeans(emb, k, seed), k);
    return res;
}

std::vector<SpeakerTurn> labels_to_turns(const ScaleWindows& base_windows,
                                         const std::vector<int>& labels,
                                         const std::string& file_id) {
    if (base_windows.size() != labels.size())
        throw std::invalid_argument("one label per base window required");
    std::vector<SpeakerTurn> turns;
    int last_label = -1;
    double turn_start = 0.0, turn_end = 0.0;
    auto flush = [&]() {
        if (last_label >= 0)
            turns.push_back({file_id, 1, turn_start, turn_end - turn_start,
                             "speaker_" + std::to_string(last_label)});
    };
    for (size_t i = 0; i < base_windows.size(); ++i) {
        const Window& w = base_windows[i];
        if (labels[i] == last_label && w.start_s - turn_end <= 0.1 + 1e-9) {
            turn_end = std::max(turn_end, w.end_s);
        } else {
            flush();
            last_label = labels[i];
            turn_start = w.start_s;
            turn_end = w.end_s;
        }
    }
    flush();
    return turns;
}

}  // namespace diarkit
