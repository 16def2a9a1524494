#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "cbl/corpus.hpp"

// Knowledge-based instance-weight initializers over the default-negative
// set N. Annotated tokens always keep weight 1.

namespace cbl {

inline WeightVector raw_weights(const PartialAnnotation& pa) {
    return WeightVector(pa.total(), 1.0);
}

// counts over the whole training corpus (annotated and unannotated alike)
inline std::unordered_map<std::string, std::uint64_t> surface_counts(const Corpus& c) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& s : c.sentences)
        for (const auto& t : s.tokens) ++counts[t];
    return counts;
}

// Rare surfaces are plausible names and get low weight: v = count/max_count,
// or log(1+count)/log(1+max_count) when the raw counts are too Zipfian.
// An external counts table (any large corpus) may replace the in-corpus one.
inline WeightVector freq_weights(const PartialAnnotation& pa, bool log_scale,
                                 const std::unordered_map<std::string, std::uint64_t>* counts = nullptr) {
    std::unordered_map<std::string, std::uint64_t> own;
    if (!counts) {
        own = surface_counts(*pa.corpus);
        counts = &own;
    }
    std::uint64_t max_count = 0;
    for (const auto& [surface, n] : *counts) max_count = std::max(max_count, n);

    WeightVector v(pa.total(), 1.0);
    std::size_t at = 0;
    for (const auto& s : pa.corpus->sentences)
        for (const auto& tok : s.tokens) {
            if (!pa.in_p[at]) {
                auto it = counts->find(tok);
                std::uint64_t n = it == counts->end() ? 0 : it->second;
                if (max_count == 0)
                    v[at] = 0.0;
                else if (log_scale)
                    v[at] = std::log1p(static_cast<double>(n)) /
                            std::log1p(static_cast<double>(max_count));
                else
                    v[at] = static_cast<double>(n) / static_cast<double>(max_count);
            }
            ++at;
        }
    return v;
}

namespace detail {

// distance to the nearest annotated token in the same sentence; spans are
// contiguous runs of annotated tokens so this equals distance to the
// nearest span boundary. SIZE_MAX where the sentence has no annotation.
inline std::vector<std::size_t> annotation_distances(const PartialAnnotation& pa) {
    constexpr std::size_t far = static_cast<std::size_t>(-1);
    std::vector<std::size_t> d(pa.total(), far);
    std::size_t base = 0;
    for (const auto& s : pa.corpus->sentences) {
        std::size_t n = s.size();
        std::size_t run = far;
        for (std::size_t i = 0; i < n; ++i) {  // left-to-right sweep
            if (pa.in_p[base + i])
                run = 0;
            else if (run != far)
                ++run;
            d[base + i] = run;
        }
        run = far;
        for (std::size_t i = n; i-- > 0;) {  // right-to-left sweep
            if (pa.in_p[base + i])
                run = 0;
            else if (run != far)
                ++run;
            d[base + i] = std::min(d[base + i], run);
        }
        base += n;
    }
    return d;
}

}  // namespace detail

// Names rarely sit immediately next to other names: tokens within distance 1
// of an annotated span get weight 1, everything else 0.
inline WeightVector window_weights(const PartialAnnotation& pa) {
    auto d = detail::annotation_distances(pa);
    WeightVector v(pa.total(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (pa.in_p[i] || d[i] <= 1) v[i] = 1.0;
    return v;
}

// window rule where it applies, frequency weight elsewhere
inline WeightVector combined_weights(const PartialAnnotation& pa, bool log_scale,
                                     const std::unordered_map<std::string, std::uint64_t>* counts = nullptr) {
    WeightVector v = freq_weights(pa, log_scale, counts);
    auto d = detail::annotation_distances(pa);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (pa.in_p[i] || d[i] <= 1) v[i] = 1.0;
    return v;
}

}  // namespace cbl
