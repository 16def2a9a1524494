#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbl/corpus.hpp"
#include "cbl/features.hpp"
#include "cbl/rng.hpp"

// Weighted averaged perceptron over token instances with greedy
// left-to-right decoding. The instance weight scales the learning rate, so
// weight 0 silences an instance entirely: training with v_i = 0 produces
// bitwise the same averaged model as leaving the instance out.

namespace cbl {

struct PerceptronConfig {
    int epochs = 5;
    double alpha = 0.1;
    std::uint64_t seed = 1;
};

class PerceptronModel {
public:
    struct Output {
        std::vector<int> labels;       // flat, best label id per token
        std::vector<double> prob;      // n*L row-major softmax confidences
        std::vector<double> log_prob;  // n*L row-major log-softmax
    };

    // gold: flat label ids; v: flat instance weights; include: optional flat
    // mask, excluded tokens are decoded for context but never update.
    static PerceptronModel train(const Corpus& corpus, const std::vector<int>& gold,
                                 std::vector<std::string> labels, const WeightVector& v,
                                 const PerceptronConfig& cfg,
                                 const ClusterLexicon* clusters = nullptr,
                                 const std::vector<std::uint8_t>* include = nullptr) {
        if (corpus.sentences.empty()) throw std::runtime_error("perceptron: empty training set");
        if (labels.size() < 2) throw std::runtime_error("perceptron: need at least 2 labels");
        TokenIndex idx(corpus);
        if (gold.size() != idx.size() || v.size() != idx.size())
            throw std::runtime_error("perceptron: label/weight size mismatch");
        if (cfg.epochs < 1) throw std::runtime_error("perceptron: epochs must be >= 1");

        PerceptronModel m;
        m.labels_ = std::move(labels);
        m.alpha_ = cfg.alpha;
        const std::size_t L = m.labels_.size();

        // static context features per token; the prev-tag feature is
        // appended at decode time
        std::vector<std::vector<std::uint32_t>> static_feats(idx.size());
        {
            std::vector<std::string> buf;
            std::size_t at = 0;
            for (const auto& s : corpus.sentences)
                for (std::size_t i = 0; i < s.size(); ++i, ++at) {
                    token_features(s, i, std::nullopt, clusters, buf);
                    auto& ids = static_feats[at];
                    ids.reserve(buf.size());
                    for (const auto& f : buf) ids.push_back(m.feats_.intern(f));
                }
        }
        std::vector<std::uint32_t> prev_feat(L + 1);  // one per label + sentence start
        for (std::size_t l = 0; l < L; ++l) prev_feat[l] = m.feats_.intern("prev=" + m.labels_[l]);
        prev_feat[L] = m.feats_.intern("prev=<s>");

        const std::size_t F = m.feats_.size();
        std::vector<std::vector<double>> w(L, std::vector<double>(F, 0.0));
        std::vector<std::vector<double>> acc(L, std::vector<double>(F, 0.0));
        std::vector<std::vector<std::int64_t>> last(L, std::vector<std::int64_t>(F, 0));
        std::int64_t updates = 0;

        std::vector<std::size_t> order(corpus.sentences.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng(cfg.seed);
        std::vector<double> scores(L);

        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            rng.shuffle(order);
            for (std::size_t si : order) {
                const Sentence& sent = corpus.sentences[si];
                std::size_t base = idx.sentence_begin(si);
                std::uint32_t prev = prev_feat[L];
                for (std::size_t i = 0; i < sent.size(); ++i) {
                    std::size_t at = base + i;
                    const auto& feats = static_feats[at];
                    for (std::size_t l = 0; l < L; ++l) {
                        double s = w[l][prev];
                        for (std::uint32_t f : feats) s += w[l][f];
                        scores[l] = s;
                    }
                    std::size_t pred = 0;
                    for (std::size_t l = 1; l < L; ++l)
                        if (scores[l] > scores[pred]) pred = l;

                    const int y = gold[at];
                    const bool active = (!include || (*include)[at]) && v[at] > 0.0;
                    if (active && static_cast<int>(pred) != y) {
                        double step = cfg.alpha * v[at];
                        auto bump = [&](std::size_t l, std::uint32_t f, double d) {
                            acc[l][f] += w[l][f] * static_cast<double>(updates - last[l][f]);
                            last[l][f] = updates;
                            w[l][f] += d;
                        };
                        for (std::uint32_t f : feats) {
                            bump(static_cast<std::size_t>(y), f, step);
                            bump(pred, f, -step);
                        }
                        bump(static_cast<std::size_t>(y), prev, step);
                        bump(pred, prev, -step);
                        ++updates;
                    }
                    prev = prev_feat[pred];
                }
            }
        }

        // averaged weights: mean over the weight snapshots taken after each
        // update; zero updates leaves the zero model
        m.avg_.assign(L, std::vector<double>(F, 0.0));
        if (updates > 0)
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t f = 0; f < F; ++f)
                    m.avg_[l][f] =
                        (acc[l][f] + w[l][f] * static_cast<double>(updates - last[l][f])) /
                        static_cast<double>(updates);
        return m;
    }

    // greedy decoding with the averaged weights; confidences are softmax
    // over the label scores
    Output predict(const Corpus& corpus, const ClusterLexicon* clusters = nullptr) const {
        TokenIndex idx(corpus);
        const std::size_t L = labels_.size();
        Output out;
        out.labels.assign(idx.size(), 0);
        out.prob.assign(idx.size() * L, 0.0);
        out.log_prob.assign(idx.size() * L, 0.0);

        std::vector<std::string> buf;
        std::vector<double> scores(L);
        for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
            const Sentence& sent = corpus.sentences[si];
            std::size_t base = idx.sentence_begin(si);
            std::string prev = "<s>";
            for (std::size_t i = 0; i < sent.size(); ++i) {
                std::size_t at = base + i;
                token_features(sent, i, prev, clusters, buf);
                for (std::size_t l = 0; l < L; ++l) {
                    double s = 0.0;
                    for (const auto& f : buf) {
                        std::int64_t id = feats_.lookup(f);
                        if (id >= 0) s += avg_[l][static_cast<std::size_t>(id)];
                    }
                    scores[l] = s;
                }
                std::size_t best = 0;
                double mx = scores[0];
                for (std::size_t l = 1; l < L; ++l)
                    if (scores[l] > mx) {
                        mx = scores[l];
                        best = l;
                    }
                double z = 0.0;
                for (std::size_t l = 0; l < L; ++l) z += std::exp(scores[l] - mx);
                double log_z = std::log(z) + mx;
                for (std::size_t l = 0; l < L; ++l) {
                    out.log_prob[at * L + l] = scores[l] - log_z;
                    out.prob[at * L + l] = std::exp(scores[l] - log_z);
                }
                out.labels[at] = static_cast<int>(best);
                prev = labels_[best];
            }
        }
        return out;
    }

    // P(O | token) for the binary entity/non-entity model
    std::vector<double> confidence_o(const Corpus& corpus,
                                     const ClusterLexicon* clusters = nullptr) const {
        if (labels_.size() != 2 || labels_[0] != "O")
            throw std::runtime_error("confidence_o: model is not a binary {O, ENT} classifier");
        Output out = predict(corpus, clusters);
        std::vector<double> conf(out.labels.size());
        for (std::size_t i = 0; i < conf.size(); ++i) conf[i] = out.prob[i * 2];
        return conf;
    }

    const std::vector<std::string>& labels() const { return labels_; }
    double alpha() const { return alpha_; }
    const std::vector<std::vector<double>>& averaged() const { return avg_; }
    const FeatureInterner& features() const { return feats_; }

    void save(std::ostream& out) const {
        char buf[400];
        out << "cblner perceptron 1\n";
        std::snprintf(buf, sizeof(buf), "%.17g", alpha_);
        out << "alpha " << buf << "\n";
        out << "labels " << labels_.size() << "\n";
        for (const auto& l : labels_) out << l << "\n";
        // sorted so that equal models serialize identically
        std::vector<std::size_t> order(feats_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return feats_.name(a) < feats_.name(b);
        });
        out << "features " << order.size() << "\n";
        for (std::size_t f : order) {
            out << feats_.name(f);
            for (std::size_t l = 0; l < labels_.size(); ++l) {
                std::snprintf(buf, sizeof(buf), "%.17g", avg_[l][f]);
                out << '\t' << buf;
            }
            out << '\n';
        }
    }

    static PerceptronModel load(std::istream& in) {
        PerceptronModel m;
        std::string line;
        if (!std::getline(in, line) || line != "cblner perceptron 1")
            throw std::runtime_error("perceptron model: bad magic line");
        std::string key;
        std::size_t count = 0;
        in >> key >> m.alpha_;
        if (key != "alpha") throw std::runtime_error("perceptron model: expected alpha");
        in >> key >> count;
        if (key != "labels") throw std::runtime_error("perceptron model: expected labels");
        m.labels_.resize(count);
        for (auto& l : m.labels_) in >> l;
        in >> key >> count;
        if (key != "features") throw std::runtime_error("perceptron model: expected features");
        in >> std::ws;
        m.avg_.assign(m.labels_.size(), std::vector<double>(count, 0.0));
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::getline(in, line))
                throw std::runtime_error("perceptron model: truncated feature table");
            std::size_t tab = line.find('\t');
            if (tab == std::string::npos)
                throw std::runtime_error("perceptron model: bad feature line");
            std::uint32_t id = m.feats_.intern(line.substr(0, tab));
            std::size_t pos = tab;
            for (std::size_t l = 0; l < m.labels_.size(); ++l) {
                std::size_t next = line.find('\t', pos + 1);
                m.avg_[l][id] = std::stod(line.substr(pos + 1, next - pos - 1));
                pos = next;
            }
        }
        return m;
    }

private:
    std::vector<std::string> labels_;
    FeatureInterner feats_;
    std::vector<std::vector<double>> avg_;
    double alpha_ = 0.1;
};

}  // namespace cbl
