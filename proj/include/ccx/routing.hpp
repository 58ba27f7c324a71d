#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ccx/csv.hpp"
#include "ccx/errors.hpp"
#include "ccx/scoring.hpp"

namespace ccx {

struct RoutingConfig {
    double low_threshold = 0.05;
    double high_threshold = 0.95;
    std::map<std::string, std::string> queue_map;  // SIC code -> queue name
    std::string default_queue = "general";

    void validate() const {
        if (!(low_threshold > 0.0 && low_threshold < high_threshold && high_threshold < 1.0))
            throw config_error("RoutingConfig: need 0 < t_lo < t_hi < 1");
        if (default_queue.empty()) throw config_error("RoutingConfig: empty default queue");
    }
};

enum class RouteKind { Junior, Senior, ProductBased };

inline const char* route_kind_name(RouteKind k) {
    switch (k) {
        case RouteKind::Junior: return "junior";
        case RouteKind::Senior: return "senior";
        case RouteKind::ProductBased: return "product";
    }
    return "product";
}

struct RoutingDecision {
    RouteKind kind = RouteKind::ProductBased;
    std::string queue;          // non-empty iff kind == ProductBased
    std::string predicted_sic;  // the expert's argmax SIC, set for ProductBased
    bool queue_mapped = false;  // false for ProductBased when the SIC fell to the default queue
};

// The routing rule alone: extremes go straight to junior/senior agents, the
// boundary values inclusive fall through to product-based routing.
inline RouteKind decide_band(double relative_score, const RoutingConfig& cfg) {
    if (relative_score < cfg.low_threshold) return RouteKind::Junior;
    if (relative_score > cfg.high_threshold) return RouteKind::Senior;
    return RouteKind::ProductBased;
}

// Queue lookup for the product-based stage given the expert's most probable
// SIC (probability ties break toward the lower class index).
inline RoutingDecision product_route(const ComplexityModel& model, const SparseVector& x,
                                     const RoutingConfig& cfg) {
    ProbDist p = predict_proba(model.expert, x);
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.size(); ++k)
        if (p[k] > p[best]) best = k;
    RoutingDecision d;
    d.kind = RouteKind::ProductBased;
    d.predicted_sic = model.class_labels[best];
    const std::string& sic = d.predicted_sic;
    auto it = cfg.queue_map.find(sic);
    if (it != cfg.queue_map.end()) {
        d.queue = it->second;
        d.queue_mapped = true;
    } else {
        d.queue = cfg.default_queue;
        d.queue_mapped = false;
    }
    return d;
}

inline std::pair<ScoreRecord, RoutingDecision> route(const ComplexityModel& model,
                                                     const RoutingConfig& cfg,
                                                     const Transcript& t) {
    cfg.validate();
    ScoreRecord rec = score(model, t);
    RouteKind kind = decide_band(rec.relative, cfg);
    RoutingDecision d;
    if (kind == RouteKind::ProductBased) {
        d = product_route(model, transform(model.vocabulary, t), cfg);
    } else {
        d.kind = kind;
    }
    return {std::move(rec), std::move(d)};
}

struct RoutingSummary {
    std::int64_t junior = 0;
    std::int64_t senior = 0;
    std::int64_t product = 0;
    std::vector<std::string> unmapped_sics;  // distinct SICs that used the default queue

    std::int64_t total() const { return junior + senior + product; }
};

struct RoutedContact {
    std::string id;
    double relative = 0.0;
    RoutingDecision decision;
};

inline std::pair<std::vector<RoutedContact>, RoutingSummary> route_batch(
    const ComplexityModel& model, const RoutingConfig& cfg, const std::vector<Transcript>& corpus) {
    cfg.validate();
    std::vector<RoutedContact> out;
    out.reserve(corpus.size());
    RoutingSummary summary;
    std::map<std::string, bool> seen_unmapped;
    for (const auto& t : corpus) {
        auto [rec, decision] = route(model, cfg, t);
        switch (decision.kind) {
            case RouteKind::Junior: ++summary.junior; break;
            case RouteKind::Senior: ++summary.senior; break;
            case RouteKind::ProductBased: ++summary.product; break;
        }
        if (decision.kind == RouteKind::ProductBased && !decision.queue_mapped)
            seen_unmapped.emplace(decision.predicted_sic, true);
        out.push_back({t.id, rec.relative, std::move(decision)});
    }
    for (const auto& [sic, _] : seen_unmapped) summary.unmapped_sics.push_back(sic);
    return {std::move(out), std::move(summary)};
}

// Queue map file: CSV with header "sic,queue".
inline std::map<std::string, std::string> read_queue_map(const std::string& path) {
    auto rows = csv::read_rows(path, "sic,queue");
    std::map<std::string, std::string> map;
    for (const auto& row : rows) {
        if (row.size() != 2) throw parse_error(path + ": queue map row must have 2 fields");
        if (row[1].empty()) throw parse_error(path + ": empty queue name for sic " + row[0]);
        map[row[0]] = row[1];
    }
    return map;
}

inline void write_routing_csv(const std::vector<RoutedContact>& routed, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write routing CSV " + path);
    out << "id,Q,decision,queue\n";
    for (const auto& r : routed)
        out << csv::join({r.id, csv::fmt(r.relative), route_kind_name(r.decision.kind),
                          r.decision.queue})
            << '\n';
    if (!out) throw error("short write on routing CSV " + path);
}

}  // namespace ccx
