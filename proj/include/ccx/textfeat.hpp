#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ccx/errors.hpp"
#include "ccx/transcript.hpp"

namespace ccx {

// Lowercases and splits on every non-alphanumeric byte, dropping tokens
// shorter than 2. Only ASCII [0-9a-zA-Z] count as token characters; every
// other byte (including all multi-byte UTF-8 sequences) acts as a separator.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            cur.push_back(static_cast<char>(c));
        } else if (c >= 'A' && c <= 'Z') {
            cur.push_back(static_cast<char>(c - 'A' + 'a'));
        } else {
            if (cur.size() >= 2) tokens.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= 2) tokens.push_back(cur);
    return tokens;
}

// A transcript's tokens: each utterance tokenized separately, concatenated in
// conversation order (keeps utterance boundaries from fusing tokens).
inline std::vector<std::string> transcript_tokens(const Transcript& t) {
    std::vector<std::string> tokens;
    for (const auto& u : t.utterances) {
        auto tt = tokenize(u.text);
        tokens.insert(tokens.end(), tt.begin(), tt.end());
    }
    return tokens;
}

struct SparseEntry {
    std::int32_t index = 0;
    double value = 0.0;

    bool operator==(const SparseEntry&) const = default;
};

// Indices strictly increasing, no zero weights; L2 norm 1 when non-empty.
struct SparseVector {
    std::vector<SparseEntry> entries;

    double get(std::int32_t index) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                   [](const SparseEntry& e, std::int32_t i) { return e.index < i; });
        return (it != entries.end() && it->index == index) ? it->value : 0.0;
    }

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }

    bool operator==(const SparseVector&) const = default;
};

// TF-IDF fit state: the retained tokens (lexicographic index order), their
// document frequencies, and the corpus document count.
struct Vocabulary {
    std::vector<std::string> tokens;     // index -> token, sorted lexicographically
    std::vector<std::int64_t> doc_freq;  // aligned with tokens
    std::int64_t num_docs = 0;
    std::int64_t cap = 0;

    std::size_t size() const { return tokens.size(); }

    // Smoothed idf; >= 1 for every retained token since df <= N.
    double idf(std::size_t index) const {
        return std::log((1.0 + static_cast<double>(num_docs)) /
                        (1.0 + static_cast<double>(doc_freq[index]))) +
               1.0;
    }

    std::int32_t index_of(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? -1 : it->second;
    }

    void rebuild_index() {
        index_.clear();
        index_.reserve(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i)
            index_.emplace(tokens[i], static_cast<std::int32_t>(i));
    }

private:
    std::unordered_map<std::string, std::int32_t> index_;
};

// Retains the `cap` highest-document-frequency tokens, breaking df ties by
// lexicographic token order. A transcript's document is the concatenation of
// its utterances' tokens.
inline Vocabulary fit_vocabulary(const std::vector<Transcript>& corpus, std::int64_t cap = 20000) {
    if (corpus.empty()) throw fit_error("fit_vocabulary: empty corpus");
    if (cap < 1) throw fit_error("fit_vocabulary: cap must be >= 1");

    std::map<std::string, std::int64_t> df;  // ordered: deterministic iteration
    std::vector<std::string> doc_distinct;
    for (const auto& t : corpus) {
        auto tokens = transcript_tokens(t);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (auto& tok : tokens) ++df[tok];
    }

    std::vector<std::pair<std::string, std::int64_t>> ranked(df.begin(), df.end());
    // highest df first; ties by lexicographically smaller token
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (static_cast<std::int64_t>(ranked.size()) > cap) ranked.resize(static_cast<std::size_t>(cap));

    std::sort(ranked.begin(), ranked.end());  // final indices in token order

    Vocabulary v;
    v.num_docs = static_cast<std::int64_t>(corpus.size());
    v.cap = cap;
    v.tokens.reserve(ranked.size());
    v.doc_freq.reserve(ranked.size());
    for (auto& [tok, d] : ranked) {
        v.tokens.push_back(tok);
        v.doc_freq.push_back(d);
    }
    v.rebuild_index();
    return v;
}

// tf * idf with raw term counts, L2-normalized. Out-of-vocabulary tokens are
// ignored; an all-OOV document maps to the empty vector.
inline SparseVector transform(const Vocabulary& v, const Transcript& t) {
    std::map<std::int32_t, std::int64_t> counts;
    for (const auto& tok : transcript_tokens(t)) {
        std::int32_t idx = v.index_of(tok);
        if (idx >= 0) ++counts[idx];
    }
    SparseVector out;
    out.entries.reserve(counts.size());
    double norm_sq = 0.0;
    for (const auto& [idx, tf] : counts) {
        double w = static_cast<double>(tf) * v.idf(static_cast<std::size_t>(idx));
        out.entries.push_back({idx, w});
        norm_sq += w * w;
    }
    if (!out.entries.empty()) {
        double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& e : out.entries) e.value *= inv;
    }
    return out;
}

}  // namespace ccx
