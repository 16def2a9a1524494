#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cbl/corpus.hpp"
#include "cbl/rng.hpp"

// Simulates partial annotation by perturbing a gold corpus: first recall is
// lowered by untagging whole surface forms, then precision by inserting
// random noise spans over untagged positions.

namespace cbl {

struct PerturbConfig {
    double target_precision = 0.9;
    double target_recall = 0.5;
    int noise_len_min = 1;
    int noise_len_max = 3;
    std::uint64_t seed = 0;
};

struct PerturbResult {
    Corpus corpus;
    double achieved_precision = 0.0;
    double achieved_recall = 0.0;
};

inline std::string span_surface(const Corpus& c, const Span& sp) {
    const auto& toks = c.sentences[sp.sent].tokens;
    std::string s = toks[sp.start];
    for (int i = sp.start + 1; i < sp.end; ++i) {
        s += ' ';
        s += toks[i];
    }
    return s;
}

// Removes uniformly chosen surface forms -- untagging every span that shares
// the surface -- until the remaining span fraction is <= target_recall
// (stopping at the first state at or below target; the grouping can
// overshoot). Case-sensitive grouping over the concatenated span tokens.
inline Corpus lower_recall(const Corpus& gold, double target_recall, Rng& rng,
                           double* achieved = nullptr) {
    if (target_recall <= 0.0 || target_recall > 1.0)
        throw std::runtime_error("lower_recall: target recall must be in (0,1]");
    auto spans = corpus_spans(gold);
    if (spans.empty() && target_recall < 1.0)
        throw std::runtime_error("lower_recall: corpus has no spans");

    // surface groups in first-appearance order (deterministic)
    std::unordered_map<std::string, std::size_t> group_of;
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::string> surfaces;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        std::string surf = span_surface(gold, spans[i]);
        auto it = group_of.find(surf);
        if (it == group_of.end()) {
            group_of.emplace(surf, groups.size());
            groups.emplace_back();
            surfaces.push_back(surf);
            it = group_of.find(surf);
        }
        groups[it->second].push_back(i);
    }

    std::vector<std::size_t> alive(groups.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;

    std::size_t original = spans.size();
    std::size_t remaining = original;
    std::vector<bool> removed(spans.size(), false);
    while (original > 0 &&
           static_cast<double>(remaining) / static_cast<double>(original) > target_recall) {
        std::size_t pick = rng.index(alive.size());
        std::size_t g = alive[pick];
        alive[pick] = alive.back();
        alive.pop_back();
        for (std::size_t si : groups[g]) {
            removed[si] = true;
            --remaining;
        }
    }
    if (achieved)
        *achieved = original == 0 ? 1.0
                                  : static_cast<double>(remaining) / static_cast<double>(original);

    Corpus out = gold;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (!removed[i]) continue;
        auto& tags = out.sentences[spans[i].sent].tags;
        for (int t = spans[i].start; t < spans[i].end; ++t) tags[t] = "O";
    }
    return out;
}

// Adds m = round(k*(1-p)/p) noise spans (k = spans currently present) so the
// span precision lands at k/(k+m). Each noise span gets a uniform random
// sentence, start, length in [len_min, len_max] clipped at the sentence end,
// and entity type; it is only placed where every covered token is O.
inline Corpus lower_precision(const Corpus& partial, double target_precision, int len_min,
                              int len_max, Rng& rng) {
    if (target_precision <= 0.0 || target_precision > 1.0)
        throw std::runtime_error("lower_precision: target precision must be in (0,1]");
    if (len_min < 1 || len_max < len_min)
        throw std::runtime_error("lower_precision: bad noise length range");

    std::size_t k = corpus_spans(partial).size();
    auto m = static_cast<std::size_t>(
        std::llround(static_cast<double>(k) * (1.0 - target_precision) / target_precision));
    Corpus out = partial;
    if (m == 0) return out;
    if (out.label_set.empty())
        throw std::runtime_error("lower_precision: no entity types to draw noise spans from");

    std::size_t budget = 1000 * m;
    std::size_t added = 0;
    while (added < m && budget > 0) {
        --budget;
        std::size_t si = rng.index(out.sentences.size());
        auto& sent = out.sentences[si];
        if (sent.size() == 0) continue;
        std::size_t start = rng.index(sent.size());
        std::size_t len = static_cast<std::size_t>(len_min) +
                          rng.index(static_cast<std::size_t>(len_max - len_min) + 1);
        std::size_t end = std::min(start + len, sent.size());
        bool clear = true;
        for (std::size_t t = start; t < end; ++t)
            if (sent.tags[t] != "O") {
                clear = false;
                break;
            }
        if (!clear) continue;
        const std::string& type = out.label_set[rng.index(out.label_set.size())];
        sent.tags[start] = "B-" + type;
        for (std::size_t t = start + 1; t < end; ++t) sent.tags[t] = "I-" + type;
        ++added;
    }
    if (added < m)
        throw std::runtime_error("lower_precision: could not place " +
                                 std::to_string(m - added) + " of " + std::to_string(m) +
                                 " noise spans (not enough O tokens)");
    return out;
}

// recall first, then precision computed from the spans that survived;
// achieved values are measured against the gold corpus
inline PerturbResult perturb(const Corpus& gold, const PerturbConfig& cfg) {
    Rng recall_rng(derive_seed(cfg.seed, 1));
    Rng precision_rng(derive_seed(cfg.seed, 2));
    Corpus partial = lower_recall(gold, cfg.target_recall, recall_rng);
    Corpus noisy =
        lower_precision(partial, cfg.target_precision, cfg.noise_len_min, cfg.noise_len_max,
                        precision_rng);
    PrfScore score = span_f1(gold, noisy);
    return {std::move(noisy), score.precision, score.recall};
}

}  // namespace cbl
