#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "longcf/data.hpp"
#include "longcf/errors.hpp"
#include "longcf/rng.hpp"
#include "longcf/schema.hpp"

namespace longcf {

/// Black-box binary classifier. predict_proba returns P(class 1); the
/// predicted class is 1 iff the probability reaches the decision threshold
/// (inclusive, so the boundary case is deterministic).
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual double predict_proba(const FeatureVector& x) const = 0;
    virtual nlohmann::json to_json() const = 0;
    virtual std::string variant() const = 0;

    double threshold() const { return threshold_; }
    void set_threshold(double t) { threshold_ = t; }
    std::uint64_t schema_fingerprint() const { return fingerprint_; }

    std::int32_t predict_class(const FeatureVector& x) const {
        return predict_proba(x) >= threshold_ ? 1 : 0;
    }

protected:
    double threshold_ = 0.5;
    std::uint64_t fingerprint_ = 0;
};

inline std::int32_t predict_class(const Classifier& model, const FeatureVector& x) {
    return model.predict_class(x);
}

inline double training_accuracy(const Classifier& model, const Dataset& data) {
    if (!data.labels) raise(errc::no_labels, "accuracy requires labels");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.rows.size(); ++i)
        if (model.predict_class(data.rows[i]) == (*data.labels)[i]) ++hits;
    return data.rows.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace detail {

inline void require_trainable(const Dataset& data) {
    if (!data.labels || data.rows.empty()) raise(errc::no_labels, "dataset has no labels");
    const auto& y = *data.labels;
    const bool has0 = std::find(y.begin(), y.end(), 0) != y.end();
    const bool has1 = std::find(y.begin(), y.end(), 1) != y.end();
    if (!has0 || !has1) raise(errc::degenerate_labels, "a single class is present");
}

// One-hot expansion of categoricals plus per-column standardization of
// continuous features. Internal to the logistic model; the rest of the
// library always works in raw schema space.
struct Encoder {
    std::vector<std::size_t> offsets;  // encoded start per schema feature
    std::size_t width = 0;
    std::vector<double> means, stds;  // encoded-column aligned; 0/1 for one-hot

    static Encoder fit(const Dataset& data) {
        Encoder enc;
        const auto& schema = data.schema;
        enc.offsets.resize(schema.size());
        for (std::size_t j = 0; j < schema.size(); ++j) {
            enc.offsets[j] = enc.width;
            enc.width += schema.at(j).is_continuous() ? 1 : schema.at(j).levels.size();
        }
        enc.means.assign(enc.width, 0.0);
        enc.stds.assign(enc.width, 1.0);
        const double n = static_cast<double>(data.rows.size());
        for (std::size_t j = 0; j < schema.size(); ++j) {
            if (!schema.at(j).is_continuous()) continue;
            const std::size_t c = enc.offsets[j];
            double mean = 0.0;
            for (const auto& r : data.rows) mean += r.real(j);
            mean /= n;
            double var = 0.0;
            for (const auto& r : data.rows) {
                const double d = r.real(j) - mean;
                var += d * d;
            }
            var /= n;
            enc.means[c] = mean;
            enc.stds[c] = var > 0 ? std::sqrt(var) : 1.0;
        }
        return enc;
    }

    void encode(const FeatureSchema& schema, const FeatureVector& x,
                std::vector<double>& out) const {
        out.assign(width, 0.0);
        for (std::size_t j = 0; j < schema.size(); ++j) {
            const std::size_t c = offsets[j];
            if (schema.at(j).is_continuous())
                out[c] = (x.real(j) - means[c]) / stds[c];
            else
                out[c + static_cast<std::size_t>(x.level(j))] = 1.0;
        }
    }
};

}  // namespace detail

class LogisticModel final : public Classifier {
public:
    LogisticModel(FeatureSchema schema, detail::Encoder enc, std::vector<double> weights,
                  double bias, nlohmann::json hyper)
        : schema_(std::move(schema)),
          enc_(std::move(enc)),
          weights_(std::move(weights)),
          bias_(bias),
          hyper_(std::move(hyper)) {
        fingerprint_ = schema_.fingerprint();
    }

    double predict_proba(const FeatureVector& x) const override {
        validate_row(schema_, x);
        std::vector<double> enc;
        enc_.encode(schema_, x, enc);
        double z = bias_;
        for (std::size_t c = 0; c < enc.size(); ++c) z += weights_[c] * enc[c];
        return 1.0 / (1.0 + std::exp(-z));
    }

    std::string variant() const override { return "logistic"; }

    nlohmann::json to_json() const override {
        nlohmann::json doc;
        doc["format_version"] = 1;
        doc["variant"] = variant();
        doc["schema_fingerprint"] = fingerprint_;
        doc["threshold"] = threshold_;
        doc["hyperparameters"] = hyper_;
        doc["weights"] = weights_;
        doc["bias"] = bias_;
        doc["encoder"] = {{"means", enc_.means}, {"stds", enc_.stds}};
        return doc;
    }

    const std::vector<double>& weights() const { return weights_; }

    static std::unique_ptr<LogisticModel> from_json(const nlohmann::json& doc,
                                                    const FeatureSchema& schema) {
        detail::Encoder enc;
        enc.offsets.resize(schema.size());
        for (std::size_t j = 0; j < schema.size(); ++j) {
            enc.offsets[j] = enc.width;
            enc.width += schema.at(j).is_continuous() ? 1 : schema.at(j).levels.size();
        }
        enc.means = doc.at("encoder").at("means").get<std::vector<double>>();
        enc.stds = doc.at("encoder").at("stds").get<std::vector<double>>();
        auto model = std::make_unique<LogisticModel>(
            schema, std::move(enc), doc.at("weights").get<std::vector<double>>(),
            doc.at("bias").get<double>(), doc.value("hyperparameters", nlohmann::json::object()));
        model->set_threshold(doc.at("threshold").get<double>());
        return model;
    }

private:
    FeatureSchema schema_;
    detail::Encoder enc_;
    std::vector<double> weights_;
    double bias_ = 0.0;
    nlohmann::json hyper_;
};

/// Axis-aligned decision tree. Continuous features split on x_j <= threshold,
/// categorical features on x_j == level; both scored by information gain.
struct DecisionTree {
    struct Node {
        std::int32_t feature = -1;  // -1: leaf
        double threshold = 0.0;
        std::int32_t level = -1;  // >= 0: categorical equality split
        std::int32_t left = -1, right = -1;
        double proba = 0.0;
    };
    std::vector<Node> nodes;

    double predict(const FeatureVector& x) const {
        std::size_t at = 0;
        while (nodes[at].feature >= 0) {
            const Node& nd = nodes[at];
            const double v = x.values[static_cast<std::size_t>(nd.feature)];
            const bool go_left =
                nd.level >= 0 ? static_cast<std::int32_t>(v) == nd.level : v <= nd.threshold;
            at = static_cast<std::size_t>(go_left ? nd.left : nd.right);
        }
        return nodes[at].proba;
    }
};

class ForestModel final : public Classifier {
public:
    ForestModel(FeatureSchema schema, std::vector<DecisionTree> trees, nlohmann::json hyper)
        : schema_(std::move(schema)), trees_(std::move(trees)), hyper_(std::move(hyper)) {
        fingerprint_ = schema_.fingerprint();
    }

    double predict_proba(const FeatureVector& x) const override {
        validate_row(schema_, x);
        double sum = 0.0;
        for (const auto& t : trees_) sum += t.predict(x);
        return trees_.empty() ? 0.0 : sum / static_cast<double>(trees_.size());
    }

    std::string variant() const override { return "forest"; }

    const std::vector<DecisionTree>& trees() const { return trees_; }

    nlohmann::json to_json() const override {
        nlohmann::json forest = nlohmann::json::array();
        for (const auto& t : trees_) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& nd : t.nodes)
                nodes.push_back({{"f", nd.feature},
                                 {"t", nd.threshold},
                                 {"lv", nd.level},
                                 {"l", nd.left},
                                 {"r", nd.right},
                                 {"p", nd.proba}});
            forest.push_back(std::move(nodes));
        }
        nlohmann::json doc;
        doc["format_version"] = 1;
        doc["variant"] = variant();
        doc["schema_fingerprint"] = fingerprint_;
        doc["threshold"] = threshold_;
        doc["hyperparameters"] = hyper_;
        doc["trees"] = std::move(forest);
        return doc;
    }

    static std::unique_ptr<ForestModel> from_json(const nlohmann::json& doc,
                                                  const FeatureSchema& schema) {
        std::vector<DecisionTree> trees;
        for (const auto& jt : doc.at("trees")) {
            DecisionTree tree;
            for (const auto& jn : jt) {
                DecisionTree::Node nd;
                nd.feature = jn.at("f").get<std::int32_t>();
                nd.threshold = jn.at("t").get<double>();
                nd.level = jn.at("lv").get<std::int32_t>();
                nd.left = jn.at("l").get<std::int32_t>();
                nd.right = jn.at("r").get<std::int32_t>();
                nd.proba = jn.at("p").get<double>();
                tree.nodes.push_back(nd);
            }
            trees.push_back(std::move(tree));
        }
        auto model = std::make_unique<ForestModel>(
            schema, std::move(trees), doc.value("hyperparameters", nlohmann::json::object()));
        model->set_threshold(doc.at("threshold").get<double>());
        return model;
    }

private:
    FeatureSchema schema_;
    std::vector<DecisionTree> trees_;
    nlohmann::json hyper_;
};

/// Full-batch gradient descent on the logistic loss. Deterministic for a
/// given dataset and hyperparameters; the seed is recorded for provenance.
inline std::unique_ptr<Classifier> train_logistic(const Dataset& data, std::size_t epochs,
                                                  double learning_rate, std::uint64_t seed) {
    detail::require_trainable(data);
    const auto enc = detail::Encoder::fit(data);
    const std::size_t n = data.rows.size();

    std::vector<std::vector<double>> encoded(n);
    for (std::size_t i = 0; i < n; ++i) enc.encode(data.schema, data.rows[i], encoded[i]);

    std::vector<double> w(enc.width, 0.0);
    double b = 0.0;
    std::vector<double> grad(enc.width);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = b;
            for (std::size_t c = 0; c < enc.width; ++c) z += w[c] * encoded[i][c];
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double err = p - static_cast<double>((*data.labels)[i]);
            for (std::size_t c = 0; c < enc.width; ++c) grad[c] += err * encoded[i][c];
            grad_b += err;
        }
        const double step = learning_rate / static_cast<double>(n);
        for (std::size_t c = 0; c < enc.width; ++c) w[c] -= step * grad[c];
        b -= step * grad_b;
    }

    nlohmann::json hyper = {{"epochs", epochs}, {"learning_rate", learning_rate}, {"seed", seed}};
    return std::make_unique<LogisticModel>(data.schema, enc, std::move(w), b, std::move(hyper));
}

namespace detail {

inline double entropy(std::size_t pos, std::size_t total) {
    if (total == 0 || pos == 0 || pos == total) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(total);
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

struct TreeBuilder {
    const Dataset& data;
    std::size_t max_depth;
    std::size_t n_candidates;
    Rng& rng;
    DecisionTree tree;

    std::int32_t build(std::vector<std::size_t> idx, std::size_t depth) {
        std::size_t pos = 0;
        for (auto i : idx) pos += static_cast<std::size_t>((*data.labels)[i]);
        const double node_proba = idx.empty() ? 0.0
                                              : static_cast<double>(pos) /
                                                    static_cast<double>(idx.size());

        auto make_leaf = [&] {
            DecisionTree::Node leaf;
            leaf.proba = node_proba;
            tree.nodes.push_back(leaf);
            return static_cast<std::int32_t>(tree.nodes.size() - 1);
        };
        if (depth >= max_depth || idx.size() < 2 || pos == 0 || pos == idx.size())
            return make_leaf();

        // random feature subset, then the best split by information gain
        std::vector<std::size_t> features(data.schema.size());
        std::iota(features.begin(), features.end(), 0);
        rng.shuffle(features);
        features.resize(std::min(n_candidates, features.size()));

        const double parent = entropy(pos, idx.size());
        double best_gain = 1e-12;
        std::int32_t best_feature = -1;
        double best_threshold = 0.0;
        std::int32_t best_level = -1;

        for (std::size_t f : features) {
            if (data.schema.at(f).is_continuous()) {
                std::vector<std::pair<double, std::int32_t>> vals;
                vals.reserve(idx.size());
                for (auto i : idx) vals.emplace_back(data.rows[i].real(f), (*data.labels)[i]);
                std::sort(vals.begin(), vals.end());
                std::size_t left_n = 0, left_pos = 0;
                for (std::size_t t = 0; t + 1 < vals.size(); ++t) {
                    ++left_n;
                    left_pos += static_cast<std::size_t>(vals[t].second);
                    if (vals[t].first == vals[t + 1].first) continue;
                    const double gain =
                        parent - (static_cast<double>(left_n) * entropy(left_pos, left_n) +
                                  static_cast<double>(idx.size() - left_n) *
                                      entropy(pos - left_pos, idx.size() - left_n)) /
                                     static_cast<double>(idx.size());
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = static_cast<std::int32_t>(f);
                        best_threshold = 0.5 * (vals[t].first + vals[t + 1].first);
                        best_level = -1;
                    }
                }
            } else {
                const std::size_t n_levels = data.schema.at(f).levels.size();
                std::vector<std::size_t> count(n_levels, 0), count_pos(n_levels, 0);
                for (auto i : idx) {
                    const auto lv = static_cast<std::size_t>(data.rows[i].level(f));
                    ++count[lv];
                    count_pos[lv] += static_cast<std::size_t>((*data.labels)[i]);
                }
                for (std::size_t lv = 0; lv < n_levels; ++lv) {
                    if (count[lv] == 0 || count[lv] == idx.size()) continue;
                    const double gain =
                        parent -
                        (static_cast<double>(count[lv]) * entropy(count_pos[lv], count[lv]) +
                         static_cast<double>(idx.size() - count[lv]) *
                             entropy(pos - count_pos[lv], idx.size() - count[lv])) /
                            static_cast<double>(idx.size());
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = static_cast<std::int32_t>(f);
                        best_level = static_cast<std::int32_t>(lv);
                    }
                }
            }
        }
        if (best_feature < 0) return make_leaf();

        std::vector<std::size_t> left_idx, right_idx;
        for (auto i : idx) {
            const double v = data.rows[i].values[static_cast<std::size_t>(best_feature)];
            const bool go_left = best_level >= 0 ? static_cast<std::int32_t>(v) == best_level
                                                 : v <= best_threshold;
            (go_left ? left_idx : right_idx).push_back(i);
        }

        DecisionTree::Node split;
        split.feature = best_feature;
        split.threshold = best_threshold;
        split.level = best_level;
        tree.nodes.push_back(split);
        const auto at = static_cast<std::int32_t>(tree.nodes.size() - 1);
        tree.nodes[static_cast<std::size_t>(at)].left = build(std::move(left_idx), depth + 1);
        tree.nodes[static_cast<std::size_t>(at)].right = build(std::move(right_idx), depth + 1);
        return at;
    }
};

}  // namespace detail

/// Bagged trees with per-node feature subsampling (sqrt of the feature
/// count); probabilities are the mean of the per-tree leaf probabilities.
inline std::unique_ptr<Classifier> train_forest(const Dataset& data, std::size_t n_trees,
                                                std::size_t max_depth, std::uint64_t seed) {
    detail::require_trainable(data);
    if (n_trees == 0) raise(errc::invalid_argument, "n_trees must be positive");
    const std::size_t n = data.rows.size();
    const auto n_candidates = static_cast<std::size_t>(
        std::max(1.0, std::round(std::sqrt(static_cast<double>(data.schema.size())))));

    std::vector<DecisionTree> trees;
    trees.reserve(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        Rng rng(derive_seed(seed, t));
        std::vector<std::size_t> bootstrap(n);
        for (auto& i : bootstrap) i = static_cast<std::size_t>(rng.below(n));
        detail::TreeBuilder builder{data, max_depth, n_candidates, rng, {}};
        builder.build(std::move(bootstrap), 0);
        trees.push_back(std::move(builder.tree));
    }

    nlohmann::json hyper = {{"n_trees", n_trees}, {"max_depth", max_depth}, {"seed", seed}};
    return std::make_unique<ForestModel>(data.schema, std::move(trees), std::move(hyper));
}

inline void save_model(const Classifier& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(errc::missing_file, "cannot open for writing: " + path.string());
    out << model.to_json().dump(2) << "\n";
}

inline std::unique_ptr<Classifier> load_model(const std::filesystem::path& path,
                                              const FeatureSchema& schema) {
    std::ifstream in(path);
    if (!in) raise(errc::missing_file, path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        raise(errc::malformed_document, path.string() + ": " + e.what());
    }
    if (doc.value("format_version", 0) != 1)
        raise(errc::malformed_document, path.string() + ": unsupported format_version");
    if (doc.at("schema_fingerprint").get<std::uint64_t>() != schema.fingerprint())
        raise(errc::schema_mismatch,
              path.string() + ": model was trained against a different schema");
    const std::string variant = doc.at("variant").get<std::string>();
    if (variant == "logistic") return LogisticModel::from_json(doc, schema);
    if (variant == "forest") return ForestModel::from_json(doc, schema);
    raise(errc::malformed_document, path.string() + ": unknown variant '" + variant + "'");
}

}  // namespace longcf
