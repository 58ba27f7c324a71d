#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ccx/csv.hpp"
#include "ccx/errors.hpp"
#include "ccx/scoring.hpp"
#include "ccx/transcript.hpp"

namespace ccx {

// Outcome rates of one complexity band. Contacts missing a flag are excluded
// from that rate's denominator; an empty denominator leaves the rate unset.
struct GroupMetrics {
    std::string name;
    std::int64_t count = 0;
    std::optional<double> resolution_rate;
    std::optional<double> transfer_rate;
};

namespace detail {

inline GroupMetrics rates_for(const std::string& name, const std::vector<const Transcript*>& group) {
    GroupMetrics gm;
    gm.name = name;
    gm.count = static_cast<std::int64_t>(group.size());
    std::int64_t res_n = 0, res_true = 0, tr_n = 0, tr_true = 0;
    for (const Transcript* t : group) {
        if (t->resolved) {
            ++res_n;
            if (*t->resolved) ++res_true;
        }
        if (t->transferred) {
            ++tr_n;
            if (*t->transferred) ++tr_true;
        }
    }
    if (res_n > 0) gm.resolution_rate = static_cast<double>(res_true) / static_cast<double>(res_n);
    if (tr_n > 0) gm.transfer_rate = static_cast<double>(tr_true) / static_cast<double>(tr_n);
    return gm;
}

}  // namespace detail

// Resolution/transfer rates for the extreme bands {Q < t_lo} and {Q > t_hi}.
// Records and corpus are matched by id; a record without a transcript is an
// error.
inline std::pair<GroupMetrics, GroupMetrics> group_metrics(const std::vector<ScoreRecord>& records,
                                                           const std::vector<Transcript>& corpus,
                                                           double t_lo = 0.05, double t_hi = 0.95) {
    std::unordered_map<std::string, const Transcript*> by_id;
    by_id.reserve(corpus.size());
    for (const auto& t : corpus) by_id.emplace(t.id, &t);
    std::vector<const Transcript*> low, high;
    for (const auto& r : records) {
        auto it = by_id.find(r.id);
        if (it == by_id.end())
            throw error("group_metrics: record id \"" + r.id + "\" not found in corpus");
        if (r.relative < t_lo) low.push_back(it->second);
        else if (r.relative > t_hi) high.push_back(it->second);
    }
    return {detail::rates_for("low", low), detail::rates_for("high", high)};
}

enum class ComplexityLabel { Low, Normal, High };

inline ComplexityLabel parse_complexity_label(const std::string& s) {
    if (s == "low") return ComplexityLabel::Low;
    if (s == "normal") return ComplexityLabel::Normal;
    if (s == "high") return ComplexityLabel::High;
    throw parse_error("unknown complexity label \"" + s + "\"");
}

inline const char* complexity_label_name(ComplexityLabel l) {
    switch (l) {
        case ComplexityLabel::Low: return "low";
        case ComplexityLabel::Normal: return "normal";
        case ComplexityLabel::High: return "high";
    }
    return "normal";
}

constexpr std::size_t kScoreBins = 20;

// Bin index for a relative score: 20 equal intervals over [0,1], left-closed
// right-open except the last bin which is closed at 1.
inline std::size_t score_bin(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw domain_error("score_bin: Q outside [0,1]");
    auto b = static_cast<std::size_t>(q * static_cast<double>(kScoreBins));
    return std::min(b, kScoreBins - 1);
}

// Per-bin empirical label frequencies over the labeled records. Bins with no
// support stay empty rather than zero-filled.
struct BinCurve {
    struct Bin {
        double lo = 0.0, hi = 0.0;
        std::int64_t support = 0;
        double p_low = 0.0, p_normal = 0.0, p_high = 0.0;
    };
    std::vector<Bin> bins;  // always kScoreBins entries
    std::int64_t labeled_records = 0;
};

inline BinCurve binned_label_probabilities(
    const std::vector<ScoreRecord>& records,
    const std::map<std::string, ComplexityLabel>& labels) {
    BinCurve curve;
    curve.bins.resize(kScoreBins);
    for (std::size_t b = 0; b < kScoreBins; ++b) {
        curve.bins[b].lo = static_cast<double>(b) / static_cast<double>(kScoreBins);
        curve.bins[b].hi = static_cast<double>(b + 1) / static_cast<double>(kScoreBins);
    }
    std::vector<std::array<std::int64_t, 3>> counts(kScoreBins, {0, 0, 0});
    for (const auto& r : records) {
        auto it = labels.find(r.id);
        if (it == labels.end()) continue;  // unlabeled records do not participate
        std::size_t b = score_bin(r.relative);
        ++counts[b][static_cast<std::size_t>(it->second)];
        ++curve.labeled_records;
    }
    for (std::size_t b = 0; b < kScoreBins; ++b) {
        std::int64_t support = counts[b][0] + counts[b][1] + counts[b][2];
        curve.bins[b].support = support;
        if (support > 0) {
            curve.bins[b].p_low = static_cast<double>(counts[b][0]) / static_cast<double>(support);
            curve.bins[b].p_normal =
                static_cast<double>(counts[b][1]) / static_cast<double>(support);
            curve.bins[b].p_high = static_cast<double>(counts[b][2]) / static_cast<double>(support);
        }
    }
    return curve;
}

// Histograms of the raw hypotheses split by complexity band. All bands share
// per-hypothesis edges so their shapes are comparable.
struct BandHistograms {
    static constexpr std::size_t kBins = 20;
    struct Axis {
        double lo = 0.0, hi = 0.0;  // value range covered by the bins
    };
    Axis length, entropy, skillfulness;
    // [band][bin] counts, bands: 0 = low, 1 = medium, 2 = high
    std::array<std::array<std::int64_t, kBins>, 3> length_counts{};
    std::array<std::array<std::int64_t, kBins>, 3> entropy_counts{};
    std::array<std::array<std::int64_t, kBins>, 3> skillfulness_counts{};
    std::array<std::int64_t, 3> band_totals{};
};

namespace detail {

inline std::size_t value_bin(double v, const BandHistograms::Axis& ax) {
    if (ax.hi <= ax.lo) return 0;
    double t = (v - ax.lo) / (ax.hi - ax.lo);
    auto b = static_cast<std::size_t>(t * static_cast<double>(BandHistograms::kBins));
    return std::min(b, BandHistograms::kBins - 1);
}

}  // namespace detail

inline BandHistograms hypothesis_histograms(const std::vector<ScoreRecord>& records,
                                            double t_lo = 0.05, double t_hi = 0.95) {
    BandHistograms h;
    if (records.empty()) return h;
    auto axis = [](auto get, const std::vector<ScoreRecord>& rs) {
        BandHistograms::Axis ax;
        ax.lo = get(rs.front());
        ax.hi = get(rs.front());
        for (const auto& r : rs) {
            ax.lo = std::min(ax.lo, get(r));
            ax.hi = std::max(ax.hi, get(r));
        }
        return ax;
    };
    h.length = axis([](const ScoreRecord& r) { return static_cast<double>(r.length); }, records);
    h.entropy = axis([](const ScoreRecord& r) { return r.entropy; }, records);
    h.skillfulness = axis([](const ScoreRecord& r) { return r.skillfulness; }, records);

    for (const auto& r : records) {
        std::size_t band = r.relative < t_lo ? 0 : (r.relative > t_hi ? 2 : 1);
        ++h.band_totals[band];
        ++h.length_counts[band][detail::value_bin(static_cast<double>(r.length), h.length)];
        ++h.entropy_counts[band][detail::value_bin(r.entropy, h.entropy)];
        ++h.skillfulness_counts[band][detail::value_bin(r.skillfulness, h.skillfulness)];
    }
    return h;
}

// Labels file: CSV "id,label" with label in {low, normal, high}. Duplicate
// ids are rejected.
inline std::map<std::string, ComplexityLabel> read_labels_csv(const std::string& path) {
    auto rows = csv::read_rows(path, "id,label");
    std::map<std::string, ComplexityLabel> labels;
    for (const auto& row : rows) {
        if (row.size() != 2) throw parse_error(path + ": label row must have 2 fields");
        if (!labels.emplace(row[0], parse_complexity_label(row[1])).second)
            throw parse_error(path + ": duplicate label for id " + row[0]);
    }
    return labels;
}

inline void write_labels_csv(const std::vector<std::pair<std::string, ComplexityLabel>>& labels,
                             const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write labels CSV " + path);
    out << "id,label\n";
    for (const auto& [id, label] : labels)
        out << csv::join({id, complexity_label_name(label)}) << '\n';
    if (!out) throw error("short write on labels CSV " + path);
}

inline void write_group_metrics_csv(const GroupMetrics& low, const GroupMetrics& high,
                                    const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write group metrics CSV " + path);
    out << "group,count,resolution_rate,transfer_rate\n";
    auto cell = [](const std::optional<double>& v) { return v ? csv::fmt(*v) : std::string(); };
    for (const GroupMetrics* g : {&low, &high})
        out << csv::join({g->name, std::to_string(g->count), cell(g->resolution_rate),
                          cell(g->transfer_rate)})
            << '\n';
    if (!out) throw error("short write on group metrics CSV " + path);
}

inline void write_bin_curve_csv(const BinCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write bin curve CSV " + path);
    out << "bin_lo,bin_hi,support,p_low,p_normal,p_high\n";
    for (const auto& b : curve.bins) {
        if (b.support == 0) {
            out << csv::join({csv::fmt(b.lo), csv::fmt(b.hi), "0", "", "", ""}) << '\n';
        } else {
            out << csv::join({csv::fmt(b.lo), csv::fmt(b.hi), std::to_string(b.support),
                              csv::fmt(b.p_low), csv::fmt(b.p_normal), csv::fmt(b.p_high)})
                << '\n';
        }
    }
    if (!out) throw error("short write on bin curve CSV " + path);
}

inline void write_band_histograms_csv(const BandHistograms& h, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write histogram CSV " + path);
    out << "band,hypothesis,bin_lo,bin_hi,count\n";
    static const char* kBands[3] = {"low", "medium", "high"};
    auto emit = [&](const char* name, const BandHistograms::Axis& ax, const auto& counts) {
        double width = (ax.hi - ax.lo) / static_cast<double>(BandHistograms::kBins);
        for (std::size_t band = 0; band < 3; ++band)
            for (std::size_t b = 0; b < BandHistograms::kBins; ++b)
                out << csv::join({kBands[band], name,
                                  csv::fmt(ax.lo + width * static_cast<double>(b)),
                                  csv::fmt(ax.lo + width * static_cast<double>(b + 1)),
                                  std::to_string(counts[band][b])})
                    << '\n';
    };
    emit("L", h.length, h.length_counts);
    emit("E", h.entropy, h.entropy_counts);
    emit("S", h.skillfulness, h.skillfulness_counts);
    if (!out) throw error("short write on histogram CSV " + path);
}

}  // namespace ccx
