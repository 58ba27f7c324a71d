#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ccx/errors.hpp"
#include "ccx/evaluation.hpp"
#include "ccx/model_io.hpp"
#include "ccx/rng.hpp"
#include "ccx/routing.hpp"
#include "ccx/scoring.hpp"
#include "ccx/synth.hpp"
#include "ccx/transcript.hpp"

namespace ccx::cli {

// ---- key = value config files ----

inline std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        auto is_space = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; };
        while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
        while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.pop_back();
        return s;
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw config_error(path + ":" + std::to_string(lineno) + ": duplicate key " + key);
    }
    return kv;
}

namespace detail {

inline std::int64_t kv_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        std::int64_t v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw config_error("config value for " + key + " is not an integer: \"" + value + "\"");
    }
}

inline double kv_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw config_error("config value for " + key + " is not a number: \"" + value + "\"");
    }
}

inline void reject_unknown(const std::map<std::string, std::string>& kv,
                           const std::set<std::string>& known, const std::string& path) {
    for (const auto& [key, _] : kv)
        if (!known.count(key)) throw config_error(path + ": unknown config key \"" + key + "\"");
}

}  // namespace detail

inline SynthConfig load_synth_config(const std::string& path) {
    auto kv = read_kv_file(path);
    detail::reject_unknown(kv,
                           {"seed", "classes", "size", "easy_fraction", "medium_fraction",
                            "class_vocab", "shared_vocab", "easy_turns_min", "easy_turns_max",
                            "hard_turns_min", "hard_turns_max", "mixing_rate", "easy_resolved_rate",
                            "easy_transferred_rate", "hard_resolved_rate", "hard_transferred_rate"},
                           path);
    SynthConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::kv_int(key, value));
        else if (key == "classes") cfg.classes = static_cast<std::int32_t>(detail::kv_int(key, value));
        else if (key == "size") cfg.size = detail::kv_int(key, value);
        else if (key == "easy_fraction") cfg.easy_fraction = detail::kv_double(key, value);
        else if (key == "medium_fraction") cfg.medium_fraction = detail::kv_double(key, value);
        else if (key == "class_vocab") cfg.class_vocab = static_cast<std::int32_t>(detail::kv_int(key, value));
        else if (key == "shared_vocab") cfg.shared_vocab = static_cast<std::int32_t>(detail::kv_int(key, value));
        else if (key == "easy_turns_min") cfg.easy_turns_min = static_cast<std::int32_t>(detail::kv_int(key, value));
        else if (key == "easy_turns_max") cfg.easy_turns_max = static_cast<std::int32_t>(detail::kv_int(key, value));
        else if (key == "hard_turns_min") cfg.hard_turns_min = static_cast<std::int32_t>(detail::kv_int(key, value));
        else if (key == "hard_turns_max") cfg.hard_turns_max = static_cast<std::int32_t>(detail::kv_int(key, value));
        else if (key == "mixing_rate") cfg.mixing_rate = detail::kv_double(key, value);
        else if (key == "easy_resolved_rate") cfg.easy_resolved_rate = detail::kv_double(key, value);
        else if (key == "easy_transferred_rate") cfg.easy_transferred_rate = detail::kv_double(key, value);
        else if (key == "hard_resolved_rate") cfg.hard_resolved_rate = detail::kv_double(key, value);
        else if (key == "hard_transferred_rate") cfg.hard_transferred_rate = detail::kv_double(key, value);
    }
    return cfg;
}

struct TrainSettings {
    TrainConfig tree;
    std::int64_t max_features = 20000;
    double val_fraction = 0.2;
    double length_weight = 2.0;

    void validate() const {
        tree.validate();
        if (max_features < 1) throw config_error("TrainSettings: max_features must be >= 1");
        if (!(val_fraction >= 0.0 && val_fraction < 1.0))
            throw config_error("TrainSettings: val_fraction must be in [0,1)");
        if (!(length_weight > 0.0)) throw config_error("TrainSettings: length_weight must be > 0");
    }
};

inline TrainSettings load_train_settings(const std::string& path) {
    auto kv = read_kv_file(path);
    detail::reject_unknown(kv,
                           {"rounds", "learning_rate", "max_depth", "min_samples_leaf", "l2_lambda",
                            "seed", "max_features", "val_fraction", "length_weight"},
                           path);
    TrainSettings s;
    for (const auto& [key, value] : kv) {
        if (key == "rounds") s.tree.rounds = static_cast<std::int32_t>(detail::kv_int(key, value));
        else if (key == "learning_rate") s.tree.learning_rate = detail::kv_double(key, value);
        else if (key == "max_depth") s.tree.max_depth = static_cast<std::int32_t>(detail::kv_int(key, value));
        else if (key == "min_samples_leaf") s.tree.min_samples_leaf = static_cast<std::int32_t>(detail::kv_int(key, value));
        else if (key == "l2_lambda") s.tree.l2_lambda = detail::kv_double(key, value);
        else if (key == "seed") s.tree.seed = static_cast<std::uint64_t>(detail::kv_int(key, value));
        else if (key == "max_features") s.max_features = detail::kv_int(key, value);
        else if (key == "val_fraction") s.val_fraction = detail::kv_double(key, value);
        else if (key == "length_weight") s.length_weight = detail::kv_double(key, value);
    }
    return s;
}

inline RoutingConfig load_routing_config(const std::string& path) {
    auto kv = read_kv_file(path);
    detail::reject_unknown(kv, {"t_lo", "t_hi", "default_queue", "queue_map"}, path);
    RoutingConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "t_lo") cfg.low_threshold = detail::kv_double(key, value);
        else if (key == "t_hi") cfg.high_threshold = detail::kv_double(key, value);
        else if (key == "default_queue") cfg.default_queue = value;
        else if (key == "queue_map") cfg.queue_map = read_queue_map(value);
    }
    cfg.validate();
    return cfg;
}

// ---- the train pipeline ----

struct TrainOutcome {
    ComplexityModel model;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> val_indices;  // empty when val_fraction rounds to zero
    std::optional<double> val_top1;
    std::optional<double> val_topk;
    std::int32_t topk = 15;
};

// Trains the expert on a seeded train split, evaluates it held-out, then fits
// the quantile maps over the full corpus.
inline TrainOutcome train_pipeline(const std::vector<Transcript>& corpus, const TrainSettings& s) {
    s.validate();
    if (corpus.size() < 2) throw fit_error("train: corpus must have at least 2 contacts");
    for (const auto& t : corpus)
        if (!t.sic) throw fit_error("train: transcript " + t.id + " has no sic label");

    std::vector<std::string> labels;
    labels.reserve(corpus.size());
    for (const auto& t : corpus) labels.push_back(*t.sic);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (labels.size() < 2) throw fit_error("train: need at least 2 distinct sic labels");
    std::map<std::string, std::int32_t> class_of;
    for (std::size_t k = 0; k < labels.size(); ++k)
        class_of[labels[k]] = static_cast<std::int32_t>(k);

    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    ccx::detail::Rng rng(s.tree.seed);
    rng.shuffle(order);
    auto n_val = static_cast<std::size_t>(static_cast<double>(corpus.size()) * s.val_fraction);
    TrainOutcome out;
    out.val_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    out.train_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(out.val_indices.begin(), out.val_indices.end());
    std::sort(out.train_indices.begin(), out.train_indices.end());

    std::vector<Transcript> train_split;
    train_split.reserve(out.train_indices.size());
    for (std::size_t i : out.train_indices) train_split.push_back(corpus[i]);

    Vocabulary vocab = fit_vocabulary(train_split, s.max_features);
    std::vector<SparseVector> X;
    std::vector<std::int32_t> y;
    X.reserve(train_split.size());
    y.reserve(train_split.size());
    for (const auto& t : train_split) {
        X.push_back(transform(vocab, t));
        y.push_back(class_of.at(*t.sic));
    }
    Ensemble expert = train(X, y, static_cast<std::int32_t>(labels.size()), s.tree);

    if (!out.val_indices.empty()) {
        std::vector<SparseVector> Xv;
        std::vector<std::int32_t> yv;
        Xv.reserve(out.val_indices.size());
        for (std::size_t i : out.val_indices) {
            Xv.push_back(transform(vocab, corpus[i]));
            yv.push_back(class_of.at(*corpus[i].sic));
        }
        out.topk = std::min<std::int32_t>(15, static_cast<std::int32_t>(labels.size()));
        out.val_top1 = top_k_accuracy(expert, Xv, yv, 1);
        out.val_topk = top_k_accuracy(expert, Xv, yv, out.topk);
    }

    ComplexityConfig cc;
    cc.length_weight = s.length_weight;
    out.model = fit_scorer(std::move(expert), std::move(vocab), std::move(labels), corpus, cc);
    return out;
}

// ---- commands ----

inline void cmd_gen(const std::optional<std::string>& config_path, const std::string& out_path,
                    const std::string& labels_path, std::optional<std::uint64_t> seed,
                    std::ostream& log) {
    SynthConfig cfg = config_path ? load_synth_config(*config_path) : SynthConfig{};
    if (seed) cfg.seed = *seed;
    auto corpus = generate_corpus(cfg);
    write_corpus(corpus, out_path);
    write_labels_csv(synth_labels(corpus), labels_path);
    log << "wrote " << corpus.size() << " contacts to " << out_path << " and labels to "
        << labels_path << "\n";
}

inline void cmd_train(const std::string& corpus_path, const std::optional<std::string>& config_path,
                      const std::string& model_out, std::optional<std::uint64_t> seed,
                      std::ostream& log) {
    TrainSettings s = config_path ? load_train_settings(*config_path) : TrainSettings{};
    if (seed) s.tree.seed = *seed;
    auto corpus = parse_corpus(corpus_path);
    TrainOutcome outcome = train_pipeline(corpus, s);
    save_model(outcome.model, model_out);
    log << "trained on " << outcome.train_indices.size() << " contacts, "
        << outcome.model.expert.num_classes << " classes, " << outcome.model.expert.rounds
        << " rounds\n";
    if (outcome.val_top1) {
        log << "held-out top-1 accuracy: " << csv::fmt(*outcome.val_top1) << "\n";
        log << "held-out top-" << outcome.topk << " accuracy: " << csv::fmt(*outcome.val_topk)
            << "\n";
    } else {
        log << "no validation split (val_fraction too small)\n";
    }
    log << "model written to " << model_out << "\n";
}

inline void cmd_score(const std::string& model_path, const std::string& corpus_path,
                      const std::string& out_csv, std::ostream& log) {
    ComplexityModel model = load_model(model_path);
    auto corpus = parse_corpus(corpus_path);
    auto records = batch_score(model, corpus);
    write_score_csv(records, out_csv);
    log << "scored " << records.size() << " contacts to " << out_csv << "\n";
}

inline void cmd_route(const std::string& model_path, const std::string& corpus_path,
                      const std::optional<std::string>& config_path, const std::string& out_csv,
                      std::ostream& log, std::ostream& warn) {
    ComplexityModel model = load_model(model_path);
    RoutingConfig cfg = config_path ? load_routing_config(*config_path) : RoutingConfig{};
    auto corpus = parse_corpus(corpus_path);
    auto [routed, summary] = route_batch(model, cfg, corpus);
    write_routing_csv(routed, out_csv);
    for (const auto& sic : summary.unmapped_sics)
        warn << "warning: sic \"" << sic << "\" has no queue mapping, using default queue \""
             << cfg.default_queue << "\"\n";
    log << "routed " << summary.total() << " contacts: " << summary.junior << " junior, "
        << summary.senior << " senior, " << summary.product << " product-based\n";
    log << "routing written to " << out_csv << "\n";
}

inline void cmd_eval(const std::string& scores_csv, const std::string& labels_csv,
                     const std::string& corpus_path, const std::string& out_dir, double t_lo,
                     double t_hi, std::ostream& log) {
    auto records = read_score_csv(scores_csv);
    auto labels = read_labels_csv(labels_csv);
    if (labels.empty()) throw parse_error(labels_csv + ": labels file has no entries");
    auto corpus = parse_corpus(corpus_path);

    std::filesystem::create_directories(out_dir);
    auto [low, high] = group_metrics(records, corpus, t_lo, t_hi);
    write_group_metrics_csv(low, high, out_dir + "/group_metrics.csv");
    BinCurve curve = binned_label_probabilities(records, labels);
    write_bin_curve_csv(curve, out_dir + "/bin_curve.csv");
    BandHistograms hist = hypothesis_histograms(records, t_lo, t_hi);
    write_band_histograms_csv(hist, out_dir + "/hypothesis_histograms.csv");
    log << "evaluation written to " << out_dir << " (" << curve.labeled_records
        << " labeled records)\n";
}

inline void cmd_report(const std::string& model_path, const std::string& corpus_path,
                       const std::string& out_dir, std::int64_t trace_count,
                       const std::vector<double>& weights, std::ostream& log) {
    ComplexityModel model = load_model(model_path);
    auto corpus = parse_corpus(corpus_path);
    std::filesystem::create_directories(out_dir);

    // boosting-function traces for the first few contacts
    std::int64_t traces = std::min<std::int64_t>(trace_count, static_cast<std::int64_t>(corpus.size()));
    for (std::int64_t i = 0; i < traces; ++i) {
        const Transcript& t = corpus[static_cast<std::size_t>(i)];
        BoostingTrace trace = boosting_trace(model.expert, transform(model.vocabulary, t));
        std::string path = out_dir + "/trace_" + t.id + ".csv";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw error("cannot write trace CSV " + path);
        out << "round,phi\n";
        for (std::size_t r = 0; r < trace.phi.size(); ++r)
            out << (r + 1) << ',' << csv::fmt(trace.phi[r]) << '\n';
        if (!out) throw error("short write on trace CSV " + path);
    }

    // raw and normalized hypothesis distributions
    auto records = batch_score(model, corpus);
    {
        std::string path = out_dir + "/hypothesis_distributions.csv";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw error("cannot write distribution CSV " + path);
        out << "hypothesis,kind,bin_lo,bin_hi,count\n";
        constexpr std::size_t kBins = 20;
        auto emit = [&](const char* name, const char* kind, auto get) {
            if (records.empty()) return;
            double lo = get(records.front()), hi = lo;
            for (const auto& r : records) {
                lo = std::min(lo, get(r));
                hi = std::max(hi, get(r));
            }
            std::vector<std::int64_t> counts(kBins, 0);
            double width = hi > lo ? (hi - lo) / static_cast<double>(kBins) : 1.0;
            for (const auto& r : records) {
                auto b = static_cast<std::size_t>((get(r) - lo) / width);
                ++counts[std::min(b, kBins - 1)];
            }
            for (std::size_t b = 0; b < kBins; ++b)
                out << csv::join({name, kind, csv::fmt(lo + width * static_cast<double>(b)),
                                  csv::fmt(lo + width * static_cast<double>(b + 1)),
                                  std::to_string(counts[b])})
                    << '\n';
        };
        emit("L", "raw", [](const ScoreRecord& r) { return static_cast<double>(r.length); });
        emit("E", "raw", [](const ScoreRecord& r) { return r.entropy; });
        emit("S", "raw", [](const ScoreRecord& r) { return r.skillfulness; });
        emit("L", "normalized", [](const ScoreRecord& r) { return r.length_n; });
        emit("E", "normalized", [](const ScoreRecord& r) { return r.entropy_n; });
        emit("S", "normalized", [](const ScoreRecord& r) { return r.skillfulness_n; });
        if (!out) throw error("short write on distribution CSV " + path);
    }

    // skewness of the absolute score for each candidate length weight
    {
        auto report = skewness_report(model.expert, model.vocabulary, corpus, weights);
        std::string path = out_dir + "/skewness.csv";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw error("cannot write skewness CSV " + path);
        out << "w,skewness\n";
        for (const auto& pt : report)
            out << csv::fmt(pt.weight) << ','
                << (pt.skewness ? csv::fmt(*pt.skewness) : std::string()) << '\n';
        if (!out) throw error("short write on skewness CSV " + path);
    }
    log << "report written to " << out_dir << "\n";
}

}  // namespace ccx::cli
