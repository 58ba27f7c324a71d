#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ccx/csv.hpp"
#include "ccx/errors.hpp"
#include "ccx/introspect.hpp"
#include "ccx/quantiles.hpp"

namespace ccx {

struct ComplexityConfig {
    double length_weight = 2.0;  // the w applied to the normalized length

    void validate() const {
        if (!(length_weight > 0.0)) throw config_error("ComplexityConfig: weight must be > 0");
    }
};

// The quantile maps fitted over one corpus: three hypothesis->normal maps and
// the absolute-score->uniform map.
struct ScoreMaps {
    QuantileMap length, entropy, skillfulness, absolute;
};

// The full scorer: AI expert, its vocabulary, the class-index -> SIC table,
// and the fitted quantile maps. All components are fitted on the same corpus.
struct ComplexityModel {
    Ensemble expert;
    Vocabulary vocabulary;
    std::vector<std::string> class_labels;  // class index -> SIC code
    ScoreMaps maps;
    ComplexityConfig config;
};

// Per-contact scores: raw hypotheses, their normalized versions, the absolute
// score C = w*Ln + En + Sn and the relative score Q in [eps, 1-eps].
struct ScoreRecord {
    std::string id;
    std::int64_t length = 0;
    double entropy = 0.0;
    double skillfulness = 0.0;
    double length_n = 0.0;
    double entropy_n = 0.0;
    double skillfulness_n = 0.0;
    double absolute = 0.0;
    double relative = 0.0;
};

inline double combine(const ComplexityConfig& cfg, double length_n, double entropy_n,
                      double skillfulness_n) {
    return cfg.length_weight * length_n + entropy_n + skillfulness_n;
}

inline std::vector<Hypotheses> compute_hypotheses_batch(const Ensemble& expert,
                                                        const Vocabulary& vocab,
                                                        const std::vector<Transcript>& corpus) {
    std::vector<Hypotheses> out;
    out.reserve(corpus.size());
    for (const auto& t : corpus) out.push_back(compute_hypotheses(expert, vocab, t));
    return out;
}

// Fits the three hypothesis->normal maps and the absolute->uniform map from a
// column of hypotheses.
inline ScoreMaps fit_score_maps(const std::vector<Hypotheses>& hyps, const ComplexityConfig& cfg) {
    cfg.validate();
    if (hyps.size() < 2) throw fit_error("fit_score_maps: need at least 2 contacts");
    std::vector<double> col_l, col_e, col_s;
    col_l.reserve(hyps.size());
    col_e.reserve(hyps.size());
    col_s.reserve(hyps.size());
    for (const auto& h : hyps) {
        col_l.push_back(static_cast<double>(h.length));
        col_e.push_back(h.entropy);
        col_s.push_back(h.skillfulness);
    }
    ScoreMaps maps;
    maps.length = fit_quantile_map(col_l);
    maps.entropy = fit_quantile_map(col_e);
    maps.skillfulness = fit_quantile_map(col_s);

    std::vector<double> col_c;
    col_c.reserve(hyps.size());
    for (const auto& h : hyps) {
        double c = combine(cfg, to_normal(maps.length, static_cast<double>(h.length)),
                           to_normal(maps.entropy, h.entropy),
                           to_normal(maps.skillfulness, h.skillfulness));
        col_c.push_back(c);
    }
    maps.absolute = fit_quantile_map(col_c);
    return maps;
}

inline ComplexityModel fit_scorer(Ensemble expert, Vocabulary vocab,
                                  std::vector<std::string> class_labels,
                                  const std::vector<Transcript>& corpus,
                                  const ComplexityConfig& cfg = {}) {
    cfg.validate();
    if (corpus.size() < 2) throw fit_error("fit_scorer: need at least 2 contacts");
    auto hyps = compute_hypotheses_batch(expert, vocab, corpus);
    ComplexityModel model;
    model.expert = std::move(expert);
    model.vocabulary = std::move(vocab);
    model.class_labels = std::move(class_labels);
    model.maps = fit_score_maps(hyps, cfg);
    model.config = cfg;
    return model;
}

inline ScoreRecord score_hypotheses(const ComplexityModel& model, const std::string& id,
                                    const Hypotheses& h) {
    ScoreRecord rec;
    rec.id = id;
    rec.length = h.length;
    rec.entropy = h.entropy;
    rec.skillfulness = h.skillfulness;
    rec.length_n = to_normal(model.maps.length, static_cast<double>(h.length));
    rec.entropy_n = to_normal(model.maps.entropy, h.entropy);
    rec.skillfulness_n = to_normal(model.maps.skillfulness, h.skillfulness);
    rec.absolute = combine(model.config, rec.length_n, rec.entropy_n, rec.skillfulness_n);
    rec.relative = to_uniform(model.maps.absolute, rec.absolute);
    return rec;
}

inline ScoreRecord score(const ComplexityModel& model, const Transcript& t) {
    return score_hypotheses(model, t.id, compute_hypotheses(model.expert, model.vocabulary, t));
}

inline std::vector<ScoreRecord> batch_score(const ComplexityModel& model,
                                            const std::vector<Transcript>& corpus) {
    std::vector<ScoreRecord> out;
    out.reserve(corpus.size());
    for (const auto& t : corpus) out.push_back(score(model, t));
    return out;
}

// Adjusted Fisher-Pearson sample skewness; empty when the column has zero
// variance or fewer than 3 values.
inline std::optional<double> sample_skewness(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 3) return std::nullopt;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0;
    for (double x : xs) {
        double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    if (m2 <= 0.0) return std::nullopt;
    double g1 = m3 / std::pow(m2, 1.5);
    double nn = static_cast<double>(n);
    return g1 * std::sqrt(nn * (nn - 1.0)) / (nn - 2.0);
}

struct SkewnessPoint {
    double weight = 0.0;
    std::optional<double> skewness;  // empty: undefined (degenerate column)
};

// For each candidate weight, the sample skewness of the absolute-score column
// that weight would produce over the corpus.
inline std::vector<SkewnessPoint> skewness_report(const Ensemble& expert, const Vocabulary& vocab,
                                                  const std::vector<Transcript>& corpus,
                                                  const std::vector<double>& weights) {
    if (corpus.size() < 3) throw fit_error("skewness_report: need at least 3 contacts");
    auto hyps = compute_hypotheses_batch(expert, vocab, corpus);
    std::vector<SkewnessPoint> out;
    out.reserve(weights.size());
    for (double w : weights) {
        ComplexityConfig cfg;
        cfg.length_weight = w;
        ScoreMaps maps = fit_score_maps(hyps, cfg);
        std::vector<double> col_c;
        col_c.reserve(hyps.size());
        for (const auto& h : hyps)
            col_c.push_back(combine(cfg, to_normal(maps.length, static_cast<double>(h.length)),
                                    to_normal(maps.entropy, h.entropy),
                                    to_normal(maps.skillfulness, h.skillfulness)));
        out.push_back({w, sample_skewness(col_c)});
    }
    return out;
}

inline const std::string kScoreCsvHeader = "id,L,E,S,Ln,En,Sn,C,Q";

inline void write_score_csv(const std::vector<ScoreRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write score CSV " + path);
    out << kScoreCsvHeader << '\n';
    for (const auto& r : records) {
        out << csv::join({r.id, std::to_string(r.length), csv::fmt(r.entropy),
                          csv::fmt(r.skillfulness), csv::fmt(r.length_n), csv::fmt(r.entropy_n),
                          csv::fmt(r.skillfulness_n), csv::fmt(r.absolute), csv::fmt(r.relative)})
            << '\n';
    }
    if (!out) throw error("short write on score CSV " + path);
}

inline std::vector<ScoreRecord> read_score_csv(const std::string& path) {
    auto rows = csv::read_rows(path, kScoreCsvHeader);
    std::vector<ScoreRecord> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (row.size() != 9) throw parse_error(path + ": score row must have 9 fields");
        ScoreRecord r;
        try {
            r.id = row[0];
            r.length = std::stoll(row[1]);
            r.entropy = std::stod(row[2]);
            r.skillfulness = std::stod(row[3]);
            r.length_n = std::stod(row[4]);
            r.entropy_n = std::stod(row[5]);
            r.skillfulness_n = std::stod(row[6]);
            r.absolute = std::stod(row[7]);
            r.relative = std::stod(row[8]);
        } catch (const std::exception&) {
            throw parse_error(path + ": malformed numeric field in score row for id " + row[0]);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace ccx
