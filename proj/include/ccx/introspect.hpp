#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ccx/errors.hpp"
#include "ccx/gbdt.hpp"
#include "ccx/textfeat.hpp"
#include "ccx/transcript.hpp"

namespace ccx {

namespace detail {

inline void check_distribution(const ProbDist& p, const char* who) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw domain_error(std::string(who) + ": negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw domain_error(std::string(who) + ": probabilities do not sum to 1");
}

}  // namespace detail

// Shannon entropy in nats, with the convention 0*log(0) = 0.
inline double entropy(const ProbDist& p) {
    detail::check_distribution(p, "entropy");
    double e = 0.0;
    for (double v : p)
        if (v > 0.0) e -= v * std::log(v);
    return e < 0.0 ? 0.0 : e;
}

// KL(p || q) in nats. Undefined (throws) when p puts mass where q has none.
inline double kl_divergence(const ProbDist& p, const ProbDist& q) {
    if (p.size() != q.size()) throw domain_error("kl_divergence: dimension mismatch");
    detail::check_distribution(p, "kl_divergence");
    detail::check_distribution(q, "kl_divergence");
    double d = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] == 0.0) continue;
        if (q[k] == 0.0)
            throw domain_error("kl_divergence: undefined, p has mass where q is zero");
        d += p[k] * std::log(p[k] / q[k]);
    }
    return d < 0.0 ? 0.0 : d;  // clamp float noise; KL is nonnegative
}

// The divergence boosting function of one input: the prefix distributions
// P_1..P_M and phi(i) = KL(P_i || P_M). phi at i = M is exactly 0.
struct BoostingTrace {
    std::vector<ProbDist> distributions;
    std::vector<double> phi;

    std::size_t rounds() const { return phi.size(); }
};

inline BoostingTrace boosting_trace(const Ensemble& m, const SparseVector& x) {
    BoostingTrace trace;
    trace.distributions = staged_proba(m, x);
    trace.phi.resize(trace.distributions.size());
    const ProbDist& full = trace.distributions.back();
    for (std::size_t i = 0; i + 1 < trace.distributions.size(); ++i)
        trace.phi[i] = kl_divergence(trace.distributions[i], full);
    trace.phi.back() = 0.0;
    return trace;
}

// Discrete integral of the boosting function: large when the model needs many
// rounds to settle on its final distribution.
inline double skillfulness(const BoostingTrace& trace) {
    double s = 0.0;
    for (double v : trace.phi) s += v;
    return s;
}

// The three per-contact complexity signals.
struct Hypotheses {
    std::int64_t length = 0;      // agent turns
    double entropy = 0.0;         // nats, uncertainty of the full prediction
    double skillfulness = 0.0;    // nats summed over rounds
};

inline Hypotheses compute_hypotheses(const Ensemble& m, const Vocabulary& v, const Transcript& t) {
    Hypotheses h;
    h.length = agent_sentence_length(t);
    BoostingTrace trace = boosting_trace(m, transform(v, t));
    h.entropy = entropy(trace.distributions.back());
    h.skillfulness = skillfulness(trace);
    return h;
}

}  // namespace ccx
