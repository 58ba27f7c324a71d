#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ccx/errors.hpp"

namespace ccx {

enum class Speaker { Agent, Customer, Bot };

inline const char* speaker_name(Speaker s) {
    switch (s) {
        case Speaker::Agent: return "agent";
        case Speaker::Customer: return "customer";
        case Speaker::Bot: return "bot";
    }
    return "agent";
}

// Closed enumeration: anything else is rejected at parse time.
inline Speaker parse_speaker(const std::string& s) {
    if (s == "agent") return Speaker::Agent;
    if (s == "customer") return Speaker::Customer;
    if (s == "bot") return Speaker::Bot;
    throw parse_error("unknown speaker role \"" + s + "\"");
}

struct Utterance {
    Speaker speaker = Speaker::Customer;
    std::string text;  // may be empty

    bool operator==(const Utterance&) const = default;
};

// One contact: an ordered conversation plus optional outcome metadata.
// Immutable by convention once parsed; safe to share across threads.
struct Transcript {
    std::string id;
    std::vector<Utterance> utterances;
    std::optional<std::string> sic;       // standardized issue code
    std::optional<bool> resolved;
    std::optional<bool> transferred;

    bool operator==(const Transcript&) const = default;
};

// Length hypothesis: the number of agent turns. Customer and bot turns are
// intentionally not counted.
inline std::int64_t agent_sentence_length(const Transcript& t) {
    std::int64_t n = 0;
    for (const auto& u : t.utterances)
        if (u.speaker == Speaker::Agent) ++n;
    return n;
}

namespace detail {

inline Transcript transcript_from_json(const nlohmann::json& j, const std::string& file,
                                       std::size_t line) {
    Transcript t;
    if (!j.is_object()) throw parse_error(file, line, "expected a JSON object");
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
        throw parse_error(file, line, "missing or empty \"id\"");
    t.id = j["id"].get<std::string>();
    if (!j.contains("utterances") || !j["utterances"].is_array())
        throw parse_error(file, line, "missing \"utterances\" array");
    for (const auto& ju : j["utterances"]) {
        if (!ju.is_object() || !ju.contains("speaker") || !ju["speaker"].is_string())
            throw parse_error(file, line, "utterance missing \"speaker\"");
        Utterance u;
        try {
            u.speaker = parse_speaker(ju["speaker"].get<std::string>());
        } catch (const parse_error& e) {
            throw parse_error(file, line, e.what());
        }
        if (ju.contains("text")) {
            if (!ju["text"].is_string()) throw parse_error(file, line, "\"text\" must be a string");
            u.text = ju["text"].get<std::string>();
        }
        t.utterances.push_back(std::move(u));
    }
    if (j.contains("sic")) {
        if (!j["sic"].is_string()) throw parse_error(file, line, "\"sic\" must be a string");
        t.sic = j["sic"].get<std::string>();
    }
    if (j.contains("resolved")) {
        if (!j["resolved"].is_boolean()) throw parse_error(file, line, "\"resolved\" must be a boolean");
        t.resolved = j["resolved"].get<bool>();
    }
    if (j.contains("transferred")) {
        if (!j["transferred"].is_boolean())
            throw parse_error(file, line, "\"transferred\" must be a boolean");
        t.transferred = j["transferred"].get<bool>();
    }
    return t;
}

inline nlohmann::ordered_json transcript_to_json(const Transcript& t) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& u : t.utterances) {
        nlohmann::ordered_json ju;
        ju["speaker"] = speaker_name(u.speaker);
        ju["text"] = u.text;
        arr.push_back(std::move(ju));
    }
    j["utterances"] = std::move(arr);
    if (t.sic) j["sic"] = *t.sic;
    if (t.resolved) j["resolved"] = *t.resolved;
    if (t.transferred) j["transferred"] = *t.transferred;
    return j;
}

}  // namespace detail

// Parses a JSONL corpus: one transcript object per line, UTF-8, LF endings.
// Blank lines are not allowed except a single trailing newline.
// Throws parse_error with the offending line number on malformed input and
// on duplicate ids.
inline std::vector<Transcript> parse_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open corpus file " + path);
    std::vector<Transcript> corpus;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            // tolerate a trailing blank line only
            if (in.peek() == EOF) break;
            throw parse_error(path, lineno, "blank line inside corpus");
        }
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw parse_error(path, lineno, "malformed JSON");
        Transcript t = detail::transcript_from_json(j, path, lineno);
        if (!seen.insert(t.id).second)
            throw parse_error(path, lineno, "duplicate transcript id \"" + t.id + "\"");
        corpus.push_back(std::move(t));
    }
    return corpus;
}

// Serializes one transcript to its JSONL line (no trailing newline).
inline std::string to_jsonl(const Transcript& t) {
    return detail::transcript_to_json(t).dump();
}

inline void write_corpus(const std::vector<Transcript>& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write corpus file " + path);
    for (const auto& t : corpus) out << to_jsonl(t) << '\n';
    if (!out) throw error("short write on corpus file " + path);
}

}  // namespace ccx
