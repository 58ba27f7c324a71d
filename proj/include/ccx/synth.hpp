#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ccx/errors.hpp"
#include "ccx/evaluation.hpp"
#include "ccx/rng.hpp"
#include "ccx/textfeat.hpp"
#include "ccx/transcript.hpp"

namespace ccx {

// Deterministic synthetic corpus with controllable complexity levers.
//
// Easy contacts are short and draw tokens from a single class vocabulary, so
// a classifier separates them quickly and confidently. Hard contacts are long
// and mix in tokens from confuser classes, which keeps the classifier
// uncertain and makes its staged predictions settle slowly.
struct SynthConfig {
    std::uint64_t seed = 42;
    std::int32_t classes = 10;
    std::int64_t size = 1000;
    double easy_fraction = 0.5;
    double medium_fraction = 0.0;  // mixture contacts labeled "normal"
    std::int32_t class_vocab = 50;
    std::int32_t shared_vocab = 30;
    std::int32_t easy_turns_min = 2;
    std::int32_t easy_turns_max = 6;
    std::int32_t hard_turns_min = 10;
    std::int32_t hard_turns_max = 30;
    double mixing_rate = 0.35;  // per-token probability of a confuser-class token

    // outcome-flag probabilities by difficulty
    double easy_resolved_rate = 0.85;
    double easy_transferred_rate = 0.11;
    double hard_resolved_rate = 0.26;
    double hard_transferred_rate = 0.62;

    void validate() const {
        if (classes < 2) throw config_error("SynthConfig: classes must be >= 2");
        if (size < classes) throw config_error("SynthConfig: size must be >= classes");
        if (!(easy_fraction >= 0.0 && easy_fraction <= 1.0))
            throw config_error("SynthConfig: easy_fraction outside [0,1]");
        if (!(medium_fraction >= 0.0 && medium_fraction <= 1.0) ||
            easy_fraction + medium_fraction > 1.0)
            throw config_error("SynthConfig: fractions must partition [0,1]");
        if (class_vocab < 1 || shared_vocab < 0) throw config_error("SynthConfig: bad vocab sizes");
        if (easy_turns_min < 1 || easy_turns_max < easy_turns_min)
            throw config_error("SynthConfig: bad easy turn range");
        if (hard_turns_min <= easy_turns_max || hard_turns_max < hard_turns_min)
            throw config_error("SynthConfig: hard turn range must lie above the easy range");
        if (medium_fraction > 0.0 && hard_turns_min <= easy_turns_max + 1)
            throw config_error("SynthConfig: no room for a medium turn band");
        if (!(mixing_rate >= 0.0 && mixing_rate <= 1.0))
            throw config_error("SynthConfig: mixing_rate outside [0,1]");
    }
};

namespace detail {

enum class Difficulty { Easy, Medium, Hard };

inline std::string class_token(std::int32_t cls, std::int32_t word) {
    return "c" + std::to_string(cls) + "w" + std::to_string(word);
}

inline std::string shared_token(std::int32_t word) { return "xw" + std::to_string(word); }

}  // namespace detail

inline std::vector<Transcript> generate_corpus(const SynthConfig& cfg) {
    cfg.validate();
    detail::Rng rng(cfg.seed);
    const std::int64_t n = cfg.size;
    const std::int32_t K = cfg.classes;

    auto n_easy = static_cast<std::int64_t>(std::llround(static_cast<double>(n) * cfg.easy_fraction));
    auto n_med =
        static_cast<std::int64_t>(std::llround(static_cast<double>(n) * cfg.medium_fraction));
    if (n_easy + n_med > n) n_med = n - n_easy;

    std::vector<detail::Difficulty> difficulty;
    difficulty.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        difficulty.push_back(i < n_easy ? detail::Difficulty::Easy
                             : i < n_easy + n_med ? detail::Difficulty::Medium
                                                  : detail::Difficulty::Hard);
    rng.shuffle(difficulty);

    std::vector<std::int32_t> cls;
    cls.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) cls.push_back(static_cast<std::int32_t>(i % K));
    rng.shuffle(cls);

    constexpr double kSharedTokenRate = 0.25;
    std::vector<Transcript> corpus;
    corpus.reserve(static_cast<std::size_t>(n));

    for (std::int64_t i = 0; i < n; ++i) {
        const detail::Difficulty d = difficulty[static_cast<std::size_t>(i)];
        const std::int32_t own = cls[static_cast<std::size_t>(i)];

        // two confuser classes supply the misleading tokens of non-easy contacts
        std::int32_t confuser_a = static_cast<std::int32_t>(rng.range(0, K - 2));
        if (confuser_a >= own) ++confuser_a;
        std::int32_t confuser_b = static_cast<std::int32_t>(rng.range(0, K - 2));
        if (confuser_b >= own) ++confuser_b;

        std::int32_t agent_turns;
        double mix;
        const char* prefix;
        double p_resolved, p_transferred;
        switch (d) {
            case detail::Difficulty::Easy:
                agent_turns = static_cast<std::int32_t>(rng.range(cfg.easy_turns_min, cfg.easy_turns_max));
                mix = 0.0;
                prefix = "easy";
                p_resolved = cfg.easy_resolved_rate;
                p_transferred = cfg.easy_transferred_rate;
                break;
            case detail::Difficulty::Medium:
                agent_turns = static_cast<std::int32_t>(
                    rng.range(cfg.easy_turns_max + 1, cfg.hard_turns_min - 1));
                mix = cfg.mixing_rate * 0.5;
                prefix = "med";
                p_resolved = 0.5 * (cfg.easy_resolved_rate + cfg.hard_resolved_rate);
                p_transferred = 0.5 * (cfg.easy_transferred_rate + cfg.hard_transferred_rate);
                break;
            case detail::Difficulty::Hard:
            default:
                agent_turns = static_cast<std::int32_t>(rng.range(cfg.hard_turns_min, cfg.hard_turns_max));
                mix = cfg.mixing_rate;
                prefix = "hard";
                p_resolved = cfg.hard_resolved_rate;
                p_transferred = cfg.hard_transferred_rate;
                break;
        }

        auto draw_token = [&]() -> std::string {
            if (cfg.shared_vocab > 0 && rng.chance(kSharedTokenRate))
                return detail::shared_token(static_cast<std::int32_t>(rng.range(0, cfg.shared_vocab - 1)));
            std::int32_t pool = own;
            if (mix > 0.0 && rng.chance(mix)) pool = rng.chance(0.5) ? confuser_a : confuser_b;
            return detail::class_token(pool, static_cast<std::int32_t>(rng.range(0, cfg.class_vocab - 1)));
        };
        auto draw_turn = [&]() {
            std::int64_t len = rng.range(4, 9);
            std::string text;
            for (std::int64_t w = 0; w < len; ++w) {
                if (w) text += ' ';
                text += draw_token();
            }
            return text;
        };

        Transcript t;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "%s-%06lld", prefix, static_cast<long long>(i));
        t.id = idbuf;
        t.sic = std::to_string(own);
        for (std::int32_t turn = 0; turn < agent_turns; ++turn) {
            t.utterances.push_back({Speaker::Customer, draw_turn()});
            t.utterances.push_back({Speaker::Agent, draw_turn()});
        }
        t.resolved = rng.chance(p_resolved);
        t.transferred = rng.chance(p_transferred);
        corpus.push_back(std::move(t));
    }
    return corpus;
}

// The ground-truth complexity labels implied by the generator's id prefixes.
inline std::vector<std::pair<std::string, ComplexityLabel>> synth_labels(
    const std::vector<Transcript>& corpus) {
    std::vector<std::pair<std::string, ComplexityLabel>> labels;
    labels.reserve(corpus.size());
    for (const auto& t : corpus) {
        if (t.id.rfind("easy-", 0) == 0) labels.emplace_back(t.id, ComplexityLabel::Low);
        else if (t.id.rfind("hard-", 0) == 0) labels.emplace_back(t.id, ComplexityLabel::High);
        else if (t.id.rfind("med-", 0) == 0) labels.emplace_back(t.id, ComplexityLabel::Normal);
    }
    return labels;
}

struct CorpusStats {
    std::int64_t contacts = 0;
    std::map<std::string, std::int64_t> class_counts;        // by SIC code
    std::map<std::string, std::int64_t> difficulty_counts;   // by id prefix
    std::map<std::string, double> mean_agent_turns;          // by id prefix
    std::int64_t total_tokens = 0;
    std::int64_t distinct_tokens = 0;
    double oov_rate = 0.0;  // token occurrences a cap-limited vocabulary would drop
};

inline CorpusStats corpus_stats(const std::vector<Transcript>& corpus, std::int64_t cap = 20000) {
    CorpusStats s;
    s.contacts = static_cast<std::int64_t>(corpus.size());
    if (corpus.empty()) return s;

    std::map<std::string, std::int64_t> turns_sum;
    for (const auto& t : corpus) {
        if (t.sic) ++s.class_counts[*t.sic];
        std::string prefix = t.id.substr(0, t.id.find('-'));
        ++s.difficulty_counts[prefix];
        turns_sum[prefix] += agent_sentence_length(t);
    }
    for (const auto& [prefix, total] : turns_sum)
        s.mean_agent_turns[prefix] =
            static_cast<double>(total) / static_cast<double>(s.difficulty_counts[prefix]);

    Vocabulary v = fit_vocabulary(corpus, cap);
    std::int64_t oov = 0;
    for (const auto& t : corpus) {
        for (const auto& tok : transcript_tokens(t)) {
            ++s.total_tokens;
            if (v.index_of(tok) < 0) ++oov;
        }
    }
    std::map<std::string, bool> distinct;
    for (const auto& t : corpus)
        for (const auto& tok : transcript_tokens(t)) distinct.emplace(tok, true);
    s.distinct_tokens = static_cast<std::int64_t>(distinct.size());
    if (s.total_tokens > 0) s.oov_rate = static_cast<double>(oov) / static_cast<double>(s.total_tokens);
    return s;
}

}  // namespace ccx
