#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "ccx/errors.hpp"
#include "ccx/textfeat.hpp"

namespace ccx {

// Probability distribution over classes: entries in (0,1), summing to 1.
using ProbDist = std::vector<double>;

// One regression tree node. Leaves have left == right == -1 and carry the
// learning-rate-scaled output value; internal nodes route "go left iff
// feature value <= threshold", with absent sparse features reading as 0.0.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;

    bool is_leaf() const { return left < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // pre-order, root at 0

    double predict(const SparseVector& x) const {
        std::int32_t i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(i)];
            i = x.get(nd.feature) <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }
};

struct TrainConfig {
    std::int32_t rounds = 60;
    double learning_rate = 0.1;
    std::int32_t max_depth = 4;
    std::int32_t min_samples_leaf = 5;
    double l2_lambda = 1.0;
    std::uint64_t seed = 0;  // reserved; the exact greedy trainer draws nothing

    void validate() const {
        if (rounds < 1) throw config_error("TrainConfig: rounds must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw config_error("TrainConfig: learning_rate must be in (0,1]");
        if (max_depth < 1) throw config_error("TrainConfig: max_depth must be >= 1");
        if (min_samples_leaf < 1) throw config_error("TrainConfig: min_samples_leaf must be >= 1");
        if (!(l2_lambda >= 0.0)) throw config_error("TrainConfig: l2_lambda must be >= 0");
    }
};

// Multiclass gradient-boosted trees with softmax outputs: K one-vs-rest
// regression trees per boosting round, Newton leaf values, exact greedy
// split search. The grid of trees is rectangular: tree(r, k) is round r's
// tree for class k.
struct Ensemble {
    std::int32_t num_classes = 0;
    std::int32_t rounds = 0;
    double learning_rate = 0.0;
    std::vector<double> base_scores;  // log class priors
    std::vector<Tree> trees;          // rounds * num_classes

    const Tree& tree(std::int32_t round, std::int32_t k) const {
        return trees[static_cast<std::size_t>(round) * static_cast<std::size_t>(num_classes) +
                     static_cast<std::size_t>(k)];
    }

    bool trained() const { return num_classes >= 2 && rounds >= 1; }
};

namespace detail {

inline ProbDist softmax(const std::vector<double>& margins) {
    double mx = margins[0];
    for (double m : margins) mx = std::max(mx, m);
    ProbDist p(margins.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < margins.size(); ++k) {
        p[k] = std::exp(margins[k] - mx);
        sum += p[k];
    }
    for (double& v : p) v /= sum;
    return p;
}

inline void accumulate_round(const Ensemble& m, const SparseVector& x, std::int32_t round,
                             std::vector<double>& margins) {
    for (std::int32_t k = 0; k < m.num_classes; ++k)
        margins[static_cast<std::size_t>(k)] += m.tree(round, k).predict(x);
}

// ---- training internals ----

struct CscColumn {
    std::vector<std::int32_t> rows;
    std::vector<double> values;  // sorted ascending (ties by row), never zero
};

struct BuildNode {
    double sum_g = 0.0, sum_h = 0.0;
    std::int64_t count = 0;
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1, right = -1;
    double best_gain = 0.0;
    double value = 0.0;
};

struct ScanState {
    double col_g = 0.0, col_h = 0.0;
    std::int64_t col_cnt = 0;
    double run_g = 0.0, run_h = 0.0;
    std::int64_t run_cnt = 0;
    double last_value = 0.0;
    bool has_prev = false;
    bool zero_pending = false;
};

class TreeBuilder {
public:
    TreeBuilder(const std::vector<CscColumn>& columns, std::int64_t num_rows,
                const TrainConfig& cfg)
        : columns_(columns), num_rows_(num_rows), cfg_(cfg) {}

    // Builds one tree for the given per-row gradients/hessians and returns it
    // as a pre-order node list. X is the row-major view used to route rows.
    Tree build(const std::vector<SparseVector>& X, const std::vector<double>& grad,
               const std::vector<double>& hess) {
        nodes_.clear();
        node_of_row_.assign(static_cast<std::size_t>(num_rows_), 0);

        BuildNode root;
        for (std::int64_t r = 0; r < num_rows_; ++r) {
            root.sum_g += grad[static_cast<std::size_t>(r)];
            root.sum_h += hess[static_cast<std::size_t>(r)];
        }
        root.count = num_rows_;
        nodes_.push_back(root);

        std::vector<std::int32_t> level = {0};
        for (std::int32_t depth = 0; depth < cfg_.max_depth && !level.empty(); ++depth) {
            find_splits(level, grad, hess);
            level = apply_splits(level, X, grad, hess);
        }

        finalize_leaves();
        return to_preorder();
    }

private:
    static constexpr double kMinGain = 1e-12;

    double leaf_weight(double g, double h) const { return -g / (h + cfg_.l2_lambda); }

    double score(double g, double h) const { return g * g / (h + cfg_.l2_lambda); }

    void maybe_candidate(BuildNode& nd, ScanState& st, std::int32_t feature, double threshold) {
        std::int64_t cnt_l = st.run_cnt;
        std::int64_t cnt_r = nd.count - cnt_l;
        if (cnt_l < cfg_.min_samples_leaf || cnt_r < cfg_.min_samples_leaf) return;
        double gl = st.run_g, gr = nd.sum_g - gl;
        double hl = st.run_h, hr = nd.sum_h - hl;
        double gain = score(gl, hl) + score(gr, hr) - score(nd.sum_g, nd.sum_h);
        // strict > keeps the first (lowest feature, lowest threshold) winner
        if (gain > kMinGain && gain > nd.best_gain) {
            nd.best_gain = gain;
            nd.feature = feature;
            nd.threshold = threshold;
        }
    }

    void find_splits(const std::vector<std::int32_t>& level, const std::vector<double>& grad,
                     const std::vector<double>& hess) {
        const std::size_t width = level.size();
        slot_of_node_.assign(nodes_.size(), -1);
        for (std::size_t s = 0; s < width; ++s)
            slot_of_node_[static_cast<std::size_t>(level[s])] = static_cast<std::int32_t>(s);
        states_.assign(width, ScanState{});

        for (std::int32_t f = 0; f < static_cast<std::int32_t>(columns_.size()); ++f) {
            const CscColumn& col = columns_[static_cast<std::size_t>(f)];
            if (static_cast<std::int64_t>(col.rows.size()) < cfg_.min_samples_leaf) continue;

            for (std::size_t s = 0; s < width; ++s) states_[s] = ScanState{};
            bool touched = false;
            for (std::size_t e = 0; e < col.rows.size(); ++e) {
                std::int32_t slot = slot_of_node_[static_cast<std::size_t>(
                    node_of_row_[static_cast<std::size_t>(col.rows[e])])];
                if (slot < 0) continue;
                ScanState& st = states_[static_cast<std::size_t>(slot)];
                st.col_g += grad[static_cast<std::size_t>(col.rows[e])];
                st.col_h += hess[static_cast<std::size_t>(col.rows[e])];
                ++st.col_cnt;
                touched = true;
            }
            if (!touched) continue;

            for (std::size_t s = 0; s < width; ++s) {
                ScanState& st = states_[s];
                // rows of the node that lack this feature form an implicit
                // block at value 0.0
                st.zero_pending = st.col_cnt < nodes_[static_cast<std::size_t>(level[s])].count;
            }

            for (std::size_t e = 0; e < col.rows.size(); ++e) {
                std::int32_t row = col.rows[e];
                double v = col.values[e];
                std::int32_t slot =
                    slot_of_node_[static_cast<std::size_t>(node_of_row_[static_cast<std::size_t>(row)])];
                if (slot < 0) continue;
                ScanState& st = states_[static_cast<std::size_t>(slot)];
                BuildNode& nd = nodes_[static_cast<std::size_t>(level[static_cast<std::size_t>(slot)])];

                if (st.zero_pending && v > 0.0) {
                    if (st.has_prev && st.last_value < 0.0)
                        maybe_candidate(nd, st, f, st.last_value * 0.5);
                    add_zero_block(st, nd);
                }
                if (st.has_prev && v != st.last_value)
                    maybe_candidate(nd, st, f, (st.last_value + v) * 0.5);

                st.run_g += grad[static_cast<std::size_t>(row)];
                st.run_h += hess[static_cast<std::size_t>(row)];
                ++st.run_cnt;
                st.last_value = v;
                st.has_prev = true;
            }

            // all-negative columns keep their zero block on the right
            for (std::size_t s = 0; s < width; ++s) {
                ScanState& st = states_[s];
                if (st.zero_pending && st.has_prev && st.last_value < 0.0) {
                    BuildNode& nd = nodes_[static_cast<std::size_t>(level[s])];
                    maybe_candidate(nd, st, f, st.last_value * 0.5);
                }
            }
        }
    }

    void add_zero_block(ScanState& st, const BuildNode& nd) {
        st.run_g += nd.sum_g - st.col_g;
        st.run_h += nd.sum_h - st.col_h;
        st.run_cnt += nd.count - st.col_cnt;
        st.last_value = 0.0;
        st.has_prev = true;
        st.zero_pending = false;
    }

    std::vector<std::int32_t> apply_splits(const std::vector<std::int32_t>& level,
                                           const std::vector<SparseVector>& X,
                                           const std::vector<double>& grad,
                                           const std::vector<double>& hess) {
        std::vector<std::int32_t> next;
        for (std::int32_t id : level) {
            if (nodes_[static_cast<std::size_t>(id)].feature < 0) continue;
            std::int32_t left = static_cast<std::int32_t>(nodes_.size());
            nodes_.emplace_back();
            nodes_.emplace_back();
            nodes_[static_cast<std::size_t>(id)].left = left;
            nodes_[static_cast<std::size_t>(id)].right = left + 1;
            next.push_back(left);
            next.push_back(left + 1);
        }
        if (next.empty()) return next;

        for (std::int64_t r = 0; r < num_rows_; ++r) {
            std::int32_t id = node_of_row_[static_cast<std::size_t>(r)];
            const BuildNode& nd = nodes_[static_cast<std::size_t>(id)];
            if (nd.left < 0) continue;
            double v = X[static_cast<std::size_t>(r)].get(nd.feature);
            std::int32_t child = v <= nd.threshold ? nd.left : nd.right;
            node_of_row_[static_cast<std::size_t>(r)] = child;
            BuildNode& c = nodes_[static_cast<std::size_t>(child)];
            c.sum_g += grad[static_cast<std::size_t>(r)];
            c.sum_h += hess[static_cast<std::size_t>(r)];
            ++c.count;
        }

        // drop children that are too small to split again
        std::vector<std::int32_t> active;
        for (std::int32_t id : next)
            if (nodes_[static_cast<std::size_t>(id)].count >= 2 * cfg_.min_samples_leaf)
                active.push_back(id);
        return active;
    }

    void finalize_leaves() {
        for (BuildNode& nd : nodes_)
            if (nd.left < 0)
                nd.value = cfg_.learning_rate * leaf_weight(nd.sum_g, nd.sum_h);
    }

    Tree to_preorder() const {
        Tree t;
        t.nodes.reserve(nodes_.size());
        emit(0, t);
        return t;
    }

    std::int32_t emit(std::int32_t id, Tree& t) const {
        const BuildNode& nd = nodes_[static_cast<std::size_t>(id)];
        std::int32_t out = static_cast<std::int32_t>(t.nodes.size());
        t.nodes.emplace_back();
        if (nd.left < 0) {
            t.nodes[static_cast<std::size_t>(out)].value = nd.value;
        } else {
            t.nodes[static_cast<std::size_t>(out)].feature = nd.feature;
            t.nodes[static_cast<std::size_t>(out)].threshold = nd.threshold;
            std::int32_t l = emit(nd.left, t);
            std::int32_t r = emit(nd.right, t);
            t.nodes[static_cast<std::size_t>(out)].left = l;
            t.nodes[static_cast<std::size_t>(out)].right = r;
        }
        return out;
    }

    const std::vector<CscColumn>& columns_;
    std::int64_t num_rows_;
    const TrainConfig& cfg_;
    std::vector<BuildNode> nodes_;
    std::vector<std::int32_t> node_of_row_;
    std::vector<std::int32_t> slot_of_node_;
    std::vector<ScanState> states_;
};

inline std::vector<CscColumn> build_csc(const std::vector<SparseVector>& X) {
    std::int32_t max_feature = -1;
    for (const auto& x : X)
        if (!x.entries.empty()) max_feature = std::max(max_feature, x.entries.back().index);

    std::vector<CscColumn> columns(static_cast<std::size_t>(max_feature + 1));
    for (std::size_t r = 0; r < X.size(); ++r) {
        for (const auto& e : X[r].entries) {
            auto& col = columns[static_cast<std::size_t>(e.index)];
            col.rows.push_back(static_cast<std::int32_t>(r));
            col.values.push_back(e.value);
        }
    }
    for (auto& col : columns) {
        std::vector<std::size_t> order(col.rows.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (col.values[a] != col.values[b]) return col.values[a] < col.values[b];
            return col.rows[a] < col.rows[b];
        });
        CscColumn sorted;
        sorted.rows.reserve(col.rows.size());
        sorted.values.reserve(col.values.size());
        for (std::size_t i : order) {
            sorted.rows.push_back(col.rows[i]);
            sorted.values.push_back(col.values[i]);
        }
        col = std::move(sorted);
    }
    return columns;
}

}  // namespace detail

// Trains the ensemble. Requires every class index in [0, num_classes) to be
// present in y. Single-threaded and fully deterministic: identical data and
// config produce an identical model.
inline Ensemble train(const std::vector<SparseVector>& X, const std::vector<std::int32_t>& y,
                      std::int32_t num_classes, const TrainConfig& cfg = {}) {
    cfg.validate();
    if (X.empty()) throw fit_error("train: empty training set");
    if (X.size() != y.size()) throw fit_error("train: |X| != |y|");
    if (num_classes < 2) throw fit_error("train: need at least 2 classes");

    const std::int64_t n = static_cast<std::int64_t>(X.size());
    const std::int32_t K = num_classes;
    std::vector<std::int64_t> class_counts(static_cast<std::size_t>(K), 0);
    for (std::int32_t label : y) {
        if (label < 0 || label >= K)
            throw fit_error("train: label " + std::to_string(label) + " outside [0, " +
                            std::to_string(K) + ")");
        ++class_counts[static_cast<std::size_t>(label)];
    }
    for (std::int32_t k = 0; k < K; ++k)
        if (class_counts[static_cast<std::size_t>(k)] == 0)
            throw fit_error("train: class " + std::to_string(k) + " has no samples");

    Ensemble m;
    m.num_classes = K;
    m.rounds = cfg.rounds;
    m.learning_rate = cfg.learning_rate;
    m.base_scores.resize(static_cast<std::size_t>(K));
    for (std::int32_t k = 0; k < K; ++k)
        m.base_scores[static_cast<std::size_t>(k)] =
            std::log(static_cast<double>(class_counts[static_cast<std::size_t>(k)]) /
                     static_cast<double>(n));

    auto columns = detail::build_csc(X);
    detail::TreeBuilder builder(columns, n, cfg);

    // margins, row-major n x K
    std::vector<double> F(static_cast<std::size_t>(n) * static_cast<std::size_t>(K));
    for (std::int64_t r = 0; r < n; ++r)
        for (std::int32_t k = 0; k < K; ++k)
            F[static_cast<std::size_t>(r) * static_cast<std::size_t>(K) +
              static_cast<std::size_t>(k)] = m.base_scores[static_cast<std::size_t>(k)];

    std::vector<double> prob(F.size());
    std::vector<double> grad(static_cast<std::size_t>(n)), hess(static_cast<std::size_t>(n));
    m.trees.reserve(static_cast<std::size_t>(cfg.rounds) * static_cast<std::size_t>(K));

    for (std::int32_t round = 0; round < cfg.rounds; ++round) {
        // probabilities at the start of the round drive all K trees
        for (std::int64_t r = 0; r < n; ++r) {
            const std::size_t off = static_cast<std::size_t>(r) * static_cast<std::size_t>(K);
            double mx = F[off];
            for (std::int32_t k = 1; k < K; ++k)
                mx = std::max(mx, F[off + static_cast<std::size_t>(k)]);
            double sum = 0.0;
            for (std::int32_t k = 0; k < K; ++k) {
                prob[off + static_cast<std::size_t>(k)] =
                    std::exp(F[off + static_cast<std::size_t>(k)] - mx);
                sum += prob[off + static_cast<std::size_t>(k)];
            }
            for (std::int32_t k = 0; k < K; ++k) prob[off + static_cast<std::size_t>(k)] /= sum;
        }

        for (std::int32_t k = 0; k < K; ++k) {
            for (std::int64_t r = 0; r < n; ++r) {
                double p = prob[static_cast<std::size_t>(r) * static_cast<std::size_t>(K) +
                                static_cast<std::size_t>(k)];
                grad[static_cast<std::size_t>(r)] =
                    p - (y[static_cast<std::size_t>(r)] == k ? 1.0 : 0.0);
                hess[static_cast<std::size_t>(r)] = p * (1.0 - p);
            }
            Tree t = builder.build(X, grad, hess);
            for (std::int64_t r = 0; r < n; ++r)
                F[static_cast<std::size_t>(r) * static_cast<std::size_t>(K) +
                  static_cast<std::size_t>(k)] += t.predict(X[static_cast<std::size_t>(r)]);
            m.trees.push_back(std::move(t));
        }
    }
    return m;
}

// Softmax over the accumulated margins of all rounds.
inline ProbDist predict_proba(const Ensemble& m, const SparseVector& x) {
    std::vector<double> margins = m.base_scores;
    for (std::int32_t r = 0; r < m.rounds; ++r) detail::accumulate_round(m, x, r, margins);
    return detail::softmax(margins);
}

// Prefix predictions: entry i-1 uses only the first i boosting rounds. The
// last entry is bitwise identical to predict_proba (same accumulation order).
inline std::vector<ProbDist> staged_proba(const Ensemble& m, const SparseVector& x) {
    std::vector<ProbDist> out;
    out.reserve(static_cast<std::size_t>(m.rounds));
    std::vector<double> margins = m.base_scores;
    for (std::int32_t r = 0; r < m.rounds; ++r) {
        detail::accumulate_round(m, x, r, margins);
        out.push_back(detail::softmax(margins));
    }
    return out;
}

// Fraction of rows whose true class is among the k most probable classes,
// breaking probability ties by lower class index.
inline double top_k_accuracy(const Ensemble& m, const std::vector<SparseVector>& X,
                             const std::vector<std::int32_t>& y, std::int32_t k) {
    if (X.empty()) throw fit_error("top_k_accuracy: empty input");
    if (X.size() != y.size()) throw fit_error("top_k_accuracy: |X| != |y|");
    if (k < 1) throw fit_error("top_k_accuracy: k must be >= 1");
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        ProbDist p = predict_proba(m, X[i]);
        const std::int32_t truth = y[i];
        std::int32_t ahead = 0;
        for (std::int32_t j = 0; j < m.num_classes; ++j) {
            if (j == truth) continue;
            double pj = p[static_cast<std::size_t>(j)];
            double pt = p[static_cast<std::size_t>(truth)];
            if (pj > pt || (pj == pt && j < truth)) ++ahead;
        }
        if (ahead < k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(X.size());
}

}  // namespace ccx
