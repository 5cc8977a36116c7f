#include "diarkit/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace diarkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct IndexedTurn {
    int speaker = 0;
    double start = 0.0, end = 0.0;
    int turn_index = 0;  // into the file's original turn list
};

struct FileTurns {
    std::vector<SpeakerTurn> ref, hyp;
};

std::map<std::string, FileTurns> group_by_file(const std::vector<SpeakerTurn>& ref,
                                               const std::vector<SpeakerTurn>& hyp) {
    std::map<std::string, FileTurns> files;
    for (const auto& t : ref) files[t.file_id].ref.push_back(t);
    for (const auto& t : hyp) files[t.file_id].hyp.push_back(t);
    return files;
}

std::vector<std::string> sorted_speakers(const std::vector<SpeakerTurn>& turns) {
    std::set<std::string> s;
    for (const auto& t : turns) s.insert(t.speaker);
    return {s.begin(), s.end()};
}

int speaker_index(const std::vector<std::string>& names, const std::string& name) {
    return static_cast<int>(std::lower_bound(names.begin(), names.end(), name) - names.begin());
}

std::vector<IndexedTurn> index_turns(const std::vector<SpeakerTurn>& turns,
                                     const std::vector<std::string>& names) {
    std::vector<IndexedTurn> out;
    out.reserve(turns.size());
    for (size_t i = 0; i < turns.size(); ++i)
        out.push_back({speaker_index(names, turns[i].speaker), turns[i].start_s, turns[i].end_s(),
                       static_cast<int>(i)});
    return out;
}

// One file's scoring timeline: cut points at every turn boundary and collar
// edge, with the collar-excised intervals merged for midpoint lookup.
struct Timeline {
    std::vector<double> cuts;
    std::vector<std::pair<double, double>> excluded;

    Timeline(const std::vector<IndexedTurn>& ref, const std::vector<IndexedTurn>& hyp,
             double collar) {
        for (const auto& t : ref) {
            cuts.push_back(t.start);
            cuts.push_back(t.end);
        }
        for (const auto& t : hyp) {
            cuts.push_back(t.start);
            cuts.push_back(t.end);
        }
        if (collar > 0.0) {
            std::vector<std::pair<double, double>> raw;
            for (const auto& t : ref) {
                raw.push_back({t.start - collar, t.start + collar});
                raw.push_back({t.end - collar, t.end + collar});
            }
            std::sort(raw.begin(), raw.end());
            for (const auto& iv : raw) {
                if (!excluded.empty() && iv.first <= excluded.back().second)
                    excluded.back().second = std::max(excluded.back().second, iv.second);
                else
                    excluded.push_back(iv);
            }
            for (const auto& iv : excluded) {
                cuts.push_back(iv.first);
                cuts.push_back(iv.second);
            }
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    }

    bool is_excluded(double t) const {
        auto it = std::upper_bound(excluded.begin(), excluded.end(), std::make_pair(t, kInf));
        if (it == excluded.begin()) return false;
        --it;
        return t < it->second;
    }
};

std::vector<int> active_speakers(const std::vector<IndexedTurn>& turns, double t,
                                 std::vector<char>& flags) {
    std::fill(flags.begin(), flags.end(), 0);
    for (const auto& turn : turns)
        if (turn.start <= t && t < turn.end) flags[turn.speaker] = 1;
    std::vector<int> out;
    for (size_t i = 0; i < flags.size(); ++i)
        if (flags[i]) out.push_back(static_cast<int>(i));
    return out;
}

// fn(dt, ref_ids, hyp_ids, midpoint) over every scored slice.
template <class F>
void for_each_slice(const Timeline& tl, const std::vector<IndexedTurn>& ref,
                    const std::vector<IndexedTurn>& hyp, int n_ref, int n_hyp, bool score_overlap,
                    F&& fn) {
    std::vector<char> ref_flags(n_ref), hyp_flags(n_hyp);
    for (size_t c = 0; c + 1 < tl.cuts.size(); ++c) {
        double t0 = tl.cuts[c], t1 = tl.cuts[c + 1];
        double dt = t1 - t0;
        if (dt <= 0.0) continue;
        double mid = 0.5 * (t0 + t1);
        if (tl.is_excluded(mid)) continue;
        auto r = active_speakers(ref, mid, ref_flags);
        if (!score_overlap && r.size() > 1) continue;
        auto h = active_speakers(hyp, mid, hyp_flags);
        if (r.empty() && h.empty()) continue;
        fn(dt, r, h, mid);
    }
}

// === assignment ===

// Minimum-cost perfect assignment on a square matrix (O(n^3), potentials).
// Returns row assigned to each column.
std::vector<int> hungarian(const std::vector<std::vector<double>>& a) {
    const int n = static_cast<int>(a.size());
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_of_col(n);
    for (int j = 1; j <= n; ++j) row_of_col[j - 1] = p[j] - 1;
    return row_of_col;
}

// Maximum total overlap over one-to-one partial mappings: pad to square,
// negate, solve exactly.
double max_assignment(const std::vector<std::vector<double>>& m, int rows, int cols) {
    if (rows == 0 || cols == 0) return 0.0;
    int n = std::max(rows, cols);
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (int r = 0; r < rows; ++r)
        for (int h = 0; h < cols; ++h) cost[r][h] = -m[r][h];
    auto row_of_col = hungarian(cost);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        int i = row_of_col[j];
        if (i < rows && j < cols) total += m[i][j];
    }
    return total;
}

// Lexicographically first optimal partial mapping over (ref, hyp) index
// pairs: fix candidate pairs in order, keeping each only if the optimum is
// still attainable; zero-overlap pairs never map.
std::vector<std::pair<int, int>> canonical_optimal_pairs(const std::vector<std::vector<double>>& m,
                                                         int rows, int cols) {
    const double best = max_assignment(m, rows, cols);
    const double tol = 1e-9 * std::max(1.0, best);
    std::vector<std::pair<int, int>> fixed;
    std::vector<char> row_used(rows, 0), col_used(cols, 0);
    double fixed_sum = 0.0;

    auto residual_best = [&](int extra_row, int extra_col) {
        std::vector<int> rmap, cmap;
        for (int r = 0; r < rows; ++r)
            if (!row_used[r] && r != extra_row) rmap.push_back(r);
        for (int h = 0; h < cols; ++h)
            if (!col_used[h] && h != extra_col) cmap.push_back(h);
        std::vector<std::vector<double>> sub(rmap.size(), std::vector<double>(cmap.size(), 0.0));
        for (size_t i = 0; i < rmap.size(); ++i)
            for (size_t j = 0; j < cmap.size(); ++j) sub[i][j] = m[rmap[i]][cmap[j]];
        return max_assignment(sub, static_cast<int>(rmap.size()), static_cast<int>(cmap.size()));
    };

    for (int r = 0; r < rows; ++r) {
        for (int h = 0; h < cols; ++h) {
            if (col_used[h] || m[r][h] <= 0.0) continue;
            double with_pair = fixed_sum + m[r][h] + residual_best(r, h);
            if (with_pair >= best - tol) {
                fixed.push_back({r, h});
                row_used[r] = 1;
                col_used[h] = 1;
                fixed_sum += m[r][h];
                break;
            }
        }
    }
    return fixed;
}

// Accumulated per-file scoring: overlap matrix on the scored timeline,
// canonical mapping, then the error decomposition under that mapping.
struct FileScore {
    std::vector<std::string> ref_names, hyp_names;
    std::vector<std::pair<int, int>> pairs;  // (ref, hyp)
    double total = 0.0, fa = 0.0, miss = 0.0, cer = 0.0;
};

FileScore score_file(const FileTurns& ft, double collar, bool score_overlap) {
    FileScore fs;
    fs.ref_names = sorted_speakers(ft.ref);
    fs.hyp_names = sorted_speakers(ft.hyp);
    const int nr = static_cast<int>(fs.ref_names.size());
    const int nh = static_cast<int>(fs.hyp_names.size());
    auto ref = index_turns(ft.ref, fs.ref_names);
    auto hyp = index_turns(ft.hyp, fs.hyp_names);
    Timeline tl(ref, hyp, collar);

    std::vector<std::vector<double>> overlap(nr, std::vector<double>(nh, 0.0));
    for_each_slice(tl, ref, hyp, nr, nh, score_overlap,
                   [&](double dt, const std::vector<int>& r, const std::vector<int>& h, double) {
                       for (int ri : r)
                           for (int hi : h) overlap[ri][hi] += dt;
                   });
    fs.pairs = canonical_optimal_pairs(overlap, nr, nh);

    std::vector<int> ref_of_hyp(nh, -1);
    for (auto [r, h] : fs.pairs) ref_of_hyp[h] = r;
    std::vector<char> ref_flags(nr);
    for_each_slice(tl, ref, hyp, nr, nh, score_overlap,
                   [&](double dt, const std::vector<int>& r, const std::vector<int>& h, double) {
                       std::fill(ref_flags.begin(), ref_flags.end(), 0);
                       for (int ri : r) ref_flags[ri] = 1;
                       int matched = 0;
                       for (int hi : h)
                           if (ref_of_hyp[hi] >= 0 && ref_flags[ref_of_hyp[hi]]) ++matched;
                       int nr_act = static_cast<int>(r.size());
                       int nh_act = static_cast<int>(h.size());
                       fs.total += nr_act * dt;
                       fs.miss += std::max(0, nr_act - nh_act) * dt;
                       fs.fa += std::max(0, nh_act - nr_act) * dt;
                       fs.cer += (std::min(nr_act, nh_act) - matched) * dt;
                   });
    return fs;
}

int duration_bucket(double dur_s) {
    if (dur_s < 2.0) return 0;
    if (dur_s <= 5.0) return 1;
    return 2;
}

}  // namespace

OverlapMatrix overlap_matrix(const std::vector<SpeakerTurn>& ref,
                             const std::vector<SpeakerTurn>& hyp) {
    OverlapMatrix m;
    m.ref_speakers = sorted_speakers(ref);
    m.hyp_speakers = sorted_speakers(hyp);
    m.seconds.assign(m.ref_speakers.size() * m.hyp_speakers.size(), 0.0);
    for (const auto& [file, ft] : group_by_file(ref, hyp)) {
        auto ref_names = sorted_speakers(ft.ref);
        auto hyp_names = sorted_speakers(ft.hyp);
        auto rturns = index_turns(ft.ref, ref_names);
        auto hturns = index_turns(ft.hyp, hyp_names);
        Timeline tl(rturns, hturns, 0.0);
        for_each_slice(tl, rturns, hturns, static_cast<int>(ref_names.size()),
                       static_cast<int>(hyp_names.size()), true,
                       [&](double dt, const std::vector<int>& r, const std::vector<int>& h, double) {
                           for (int ri : r)
                               for (int hi : h)
                                   m.at(speaker_index(m.ref_speakers, ref_names[ri]),
                                        speaker_index(m.hyp_speakers, hyp_names[hi])) += dt;
                       });
    }
    return m;
}

std::vector<std::pair<int, int>> optimal_mapping(const OverlapMatrix& m) {
    const int nr = static_cast<int>(m.ref_speakers.size());
    const int nh = static_cast<int>(m.hyp_speakers.size());
    std::vector<std::vector<double>> grid(nr, std::vector<double>(nh, 0.0));
    for (int r = 0; r < nr; ++r)
        for (int h = 0; h < nh; ++h) {
            if (m.at(r, h) < 0.0) throw std::invalid_argument("overlap matrix must be non-negative");
            grid[r][h] = m.at(r, h);
        }
    return canonical_optimal_pairs(grid, nr, nh);
}

DerReport der(const std::vector<SpeakerTurn>& ref, const std::vector<SpeakerTurn>& hyp,
              double collar_s, bool score_overlap) {
    if (collar_s < 0.0) throw std::invalid_argument("collar must be >= 0");
    DerReport rep;
    rep.collar_s = collar_s;
    rep.score_overlap = score_overlap;
    for (const auto& [file, ft] : group_by_file(ref, hyp)) {
        FileScore fs = score_file(ft, collar_s, score_overlap);
        rep.total_ref_speech_s += fs.total;
        rep.fa_s += fs.fa;
        rep.miss_s += fs.miss;
        rep.cer_s += fs.cer;
        auto& fmap = rep.mapping[file];
        for (auto [r, h] : fs.pairs) fmap[fs.hyp_names[h]] = fs.ref_names[r];
    }
    if (!(rep.total_ref_speech_s > 0.0)) throw std::runtime_error("no reference speech");
    rep.fa_rate = rep.fa_s / rep.total_ref_speech_s;
    rep.miss_rate = rep.miss_s / rep.total_ref_speech_s;
    rep.cer_rate = rep.cer_s / rep.total_ref_speech_s;
    rep.der = rep.fa_rate + rep.miss_rate + rep.cer_rate;
    return rep;
}

ErrorBreakdown error_breakdown(const std::vector<SpeakerTurn>& ref,
                               const std::vector<SpeakerTurn>& hyp,
                               const std::map<std::string, std::string>& roles) {
    for (const auto& t : ref)
        if (roles.find(t.speaker) == roles.end())
            throw std::runtime_error("no role for reference speaker " + t.speaker);

    struct Acc {
        double correct = 0, cer = 0, miss = 0, fa = 0;
        int segments = 0;
    };
    std::map<std::string, std::array<Acc, 3>> acc;

    for (const auto& [file, ft] : group_by_file(ref, hyp)) {
        auto ref_names = sorted_speakers(ft.ref);
        auto hyp_names = sorted_speakers(ft.hyp);
        const int nr = static_cast<int>(ref_names.size());
        const int nh = static_cast<int>(hyp_names.size());
        auto rturns = index_turns(ft.ref, ref_names);
        auto hturns = index_turns(ft.hyp, hyp_names);
        FileScore fs = score_file(ft, 0.0, true);
        std::vector<int> ref_of_hyp(nh, -1);
        for (auto [r, h] : fs.pairs) ref_of_hyp[h] = r;

        for (const auto& t : ft.ref)
            ++acc[roles.at(t.speaker)][duration_bucket(t.dur_s)].segments;

        Timeline tl(rturns, hturns, 0.0);
        for_each_slice(
            tl, rturns, hturns, nr, nh, true,
            [&](double dt, const std::vector<int>& r, const std::vector<int>& h, double mid) {
                // first active turn of each speaker at the midpoint
                auto active_turn = [&](const std::vector<IndexedTurn>& turns, int spk) -> int {
                    for (const auto& t : turns)
                        if (t.speaker == spk && t.start <= mid && mid < t.end) return t.turn_index;
                    return -1;
                };
                std::vector<char> ref_flags(nr, 0);
                for (int ri : r) ref_flags[ri] = 1;

                std::vector<int> matched, unmatched;
                for (int ri : r) {
                    bool hit = false;
                    for (int hi : h)
                        if (ref_of_hyp[hi] == ri) hit = true;
                    (hit ? matched : unmatched).push_back(ri);
                }
                int n_cer = std::min(static_cast<int>(r.size()), static_cast<int>(h.size())) -
                            static_cast<int>(matched.size());
                for (int ri : matched) {
                    const auto& turn = ft.ref[active_turn(rturns, ri)];
                    acc[roles.at(turn.speaker)][duration_bucket(turn.dur_s)].correct += dt;
                }
                // unmatched reference speakers split into confused then missed,
                // in sorted-name order (a declared convention)
                for (size_t i = 0; i < unmatched.size(); ++i) {
                    const auto& turn = ft.ref[active_turn(rturns, unmatched[i])];
                    auto& cell = acc[roles.at(turn.speaker)][duration_bucket(turn.dur_s)];
                    if (static_cast<int>(i) < n_cer) cell.cer += dt;
                    else cell.miss += dt;
                }
                int n_fa = static_cast<int>(h.size()) - static_cast<int>(r.size());
                if (n_fa > 0) {
                    std::vector<int> spare;
                    for (int hi : h)
                        if (ref_of_hyp[hi] < 0 || !ref_flags[ref_of_hyp[hi]]) spare.push_back(hi);
                    for (int i = 0; i < n_fa && i < static_cast<int>(spare.size()); ++i) {
                        int hi = spare[i];
                        const auto& turn = ft.hyp[active_turn(hturns, hi)];
                        std::string role;
                        if (ref_of_hyp[hi] >= 0) {
                            role = roles.at(ref_names[ref_of_hyp[hi]]);
                        } else {
                            auto it = roles.find(hyp_names[hi]);
                            if (it == roles.end())
                                throw std::runtime_error("no role for hypothesis speaker " +
                                                         hyp_names[hi]);
                            role = it->second;
                        }
                        acc[role][duration_bucket(turn.dur_s)].fa += dt;
                    }
                }
            });
    }

    ErrorBreakdown out;
    for (const auto& [role, buckets] : acc) {
        auto& cells = out.cells[role];
        int role_segments = 0;
        for (const auto& b : buckets) role_segments += b.segments;
        for (int b = 0; b < 3; ++b) {
            const Acc& a = buckets[b];
            double total = a.correct + a.cer + a.miss + a.fa;
            if (total > 0.0) {
                cells[b].empty = false;
                cells[b].correct_pct = 100.0 * a.correct / total;
                cells[b].cer_pct = 100.0 * a.cer / total;
                cells[b].miss_pct = 100.0 * a.miss / total;
                cells[b].fa_pct = 100.0 * a.fa / total;
            }
            if (role_segments > 0) cells[b].ratio_pct = 100.0 * a.segments / role_segments;
        }
    }
    return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
    if (x.size() < 2) throw std::invalid_argument("need at least 2 points");
    auto ranks = [](const std::vector<double>& v) {
        const size_t n = v.size();
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw std::runtime_error("undefined correlation: constant input");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace diarkit
