#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

// Data model for BIO-tagged corpora: CoNLL column I/O, span<->tag
// conversion, entity-ratio statistics and span-level evaluation.

namespace cbl {

struct Sentence {
    std::vector<std::string> tokens;
    std::vector<std::string> tags;  // BIO, same length as tokens
    std::size_t size() const { return tokens.size(); }
};

// label_set lists entity types in order of first appearance; the full
// tagset is its BIO expansion [O, B-t1, I-t1, B-t2, ...] with O at index 0.
struct Corpus {
    std::vector<Sentence> sentences;
    std::vector<std::string> label_set;

    std::size_t token_count() const {
        std::size_t n = 0;
        for (const auto& s : sentences) n += s.size();
        return n;
    }
};

// Typed entity mention; end is exclusive.
struct Span {
    int sent = 0;
    int start = 0;
    int end = 0;
    std::string type;
    friend bool operator==(const Span&, const Span&) = default;
};

struct TokenRef {
    int sent = 0;
    int tok = 0;
};

// Flat numbering of all tokens in corpus order. Instance weights,
// classifier confidences and inference scores are all indexed this way.
class TokenIndex {
public:
    TokenIndex() = default;
    explicit TokenIndex(const Corpus& c) {
        offsets_.reserve(c.sentences.size() + 1);
        offsets_.push_back(0);
        for (const auto& s : c.sentences) offsets_.push_back(offsets_.back() + s.size());
    }
    std::size_t size() const { return offsets_.empty() ? 0 : offsets_.back(); }
    std::size_t sentences() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t flat(std::size_t sent, std::size_t tok) const { return offsets_[sent] + tok; }
    std::size_t sentence_begin(std::size_t sent) const { return offsets_[sent]; }
    TokenRef ref(std::size_t flat) const {
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
        std::size_t sent = static_cast<std::size_t>(it - offsets_.begin()) - 1;
        return {static_cast<int>(sent), static_cast<int>(flat - offsets_[sent])};
    }

private:
    std::vector<std::size_t> offsets_;
};

// Per-token instance weights, flat token order.
using WeightVector = std::vector<double>;

// View of a corpus as annotated positive tokens P (under non-O tags) and
// default-negative rest N. The corpus must outlive the view.
struct PartialAnnotation {
    const Corpus* corpus = nullptr;
    TokenIndex index;
    std::vector<std::uint8_t> in_p;  // flat mask
    std::size_t p_count = 0;

    static PartialAnnotation make(const Corpus& c) {
        PartialAnnotation pa;
        pa.corpus = &c;
        pa.index = TokenIndex(c);
        pa.in_p.assign(pa.index.size(), 0);
        std::size_t at = 0;
        for (const auto& s : c.sentences)
            for (const auto& t : s.tags) {
                if (t != "O") {
                    pa.in_p[at] = 1;
                    ++pa.p_count;
                }
                ++at;
            }
        return pa;
    }
    std::size_t total() const { return in_p.size(); }
};

inline bool is_entity_tag(std::string_view tag) {
    return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

inline std::string_view tag_type(std::string_view tag) { return tag.substr(2); }

// Maximal typed spans of a BIO sequence. An I-X without a same-typed open
// span starts a new one (the repair convention used throughout).
inline std::vector<Span> spans_from_bio(const Sentence& s, int sent_idx = 0) {
    std::vector<Span> out;
    for (std::size_t i = 0; i < s.tags.size(); ++i) {
        const std::string& t = s.tags[i];
        if (!is_entity_tag(t)) continue;
        std::string_view type = tag_type(t);
        bool continues = t[0] == 'I' && !out.empty() && out.back().sent == sent_idx &&
                         out.back().end == static_cast<int>(i) && out.back().type == type;
        if (continues)
            out.back().end = static_cast<int>(i) + 1;
        else
            out.push_back({sent_idx, static_cast<int>(i), static_cast<int>(i) + 1, std::string(type)});
    }
    return out;
}

inline std::vector<std::string> bio_from_spans(std::size_t length, std::vector<Span> spans) {
    std::sort(spans.begin(), spans.end(),
              [](const Span& a, const Span& b) { return a.start < b.start; });
    std::vector<std::string> tags(length, "O");
    int prev_end = 0;
    for (const Span& sp : spans) {
        if (sp.start < prev_end)
            throw std::runtime_error("bio_from_spans: overlapping spans");
        if (sp.start < 0 || sp.end <= sp.start || static_cast<std::size_t>(sp.end) > length)
            throw std::runtime_error("bio_from_spans: span out of range");
        tags[sp.start] = "B-" + sp.type;
        for (int i = sp.start + 1; i < sp.end; ++i) tags[i] = "I-" + sp.type;
        prev_end = sp.end;
    }
    return tags;
}

inline std::vector<Span> corpus_spans(const Corpus& c) {
    std::vector<Span> out;
    for (std::size_t si = 0; si < c.sentences.size(); ++si) {
        auto ss = spans_from_bio(c.sentences[si], static_cast<int>(si));
        out.insert(out.end(), ss.begin(), ss.end());
    }
    return out;
}

namespace detail {

inline void split_ws(const std::string& line, std::vector<std::string>& cols) {
    cols.clear();
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) cols.emplace_back(line, i, j - i);
        i = j;
    }
}

// dangling I-X (sentence start or after a different type) becomes B-X
inline void repair_bio(Corpus& c) {
    for (auto& s : c.sentences) {
        for (std::size_t i = 0; i < s.tags.size(); ++i) {
            std::string& t = s.tags[i];
            if (t.size() > 2 && t[0] == 'I') {
                bool ok = i > 0 && is_entity_tag(s.tags[i - 1]) &&
                          tag_type(s.tags[i - 1]) == tag_type(t);
                if (!ok) t[0] = 'B';
            }
        }
    }
}

inline void collect_label_set(Corpus& c) {
    c.label_set.clear();
    std::unordered_map<std::string, bool> seen;
    for (const auto& s : c.sentences)
        for (const auto& t : s.tags)
            if (is_entity_tag(t)) {
                std::string type(tag_type(t));
                if (!seen.count(type)) {
                    seen[type] = true;
                    c.label_set.push_back(type);
                }
            }
}

}  // namespace detail

// One token per line, tag in the last whitespace-separated column, blank
// line between sentences. Tolerates 2-column (CoNLL 2002) and 4-column
// (CoNLL 2003) layouts; extra columns are dropped.
inline Corpus read_conll(std::istream& in) {
    Corpus c;
    Sentence cur;
    std::string line;
    std::vector<std::string> cols;
    std::size_t line_no = 0;
    auto flush = [&] {
        if (!cur.tokens.empty()) {
            c.sentences.push_back(std::move(cur));
            cur = {};
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        detail::split_ws(line, cols);
        if (cols.empty()) {
            flush();
            continue;
        }
        if (cols.size() < 2)
            throw std::runtime_error("conll parse error at line " + std::to_string(line_no) +
                                     ": expected at least token and tag columns");
        const std::string& tag = cols.back();
        if (tag != "O" && !is_entity_tag(tag))
            throw std::runtime_error("conll parse error at line " + std::to_string(line_no) +
                                     ": unknown tag '" + tag + "'");
        cur.tokens.push_back(cols.front());
        cur.tags.push_back(tag);
    }
    flush();
    detail::repair_bio(c);
    detail::collect_label_set(c);
    return c;
}

inline void write_conll(const Corpus& c, std::ostream& out) {
    for (const auto& s : c.sentences) {
        for (std::size_t i = 0; i < s.size(); ++i)
            out << s.tokens[i] << ' ' << s.tags[i] << '\n';
        out << '\n';
    }
}

inline Corpus read_conll_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_conll(in);
}

inline void write_conll_file(const Corpus& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_conll(c, out);
}

// token-level entity ratio |P| / (|P| + |N|)
inline double entity_ratio(const PartialAnnotation& pa) {
    if (pa.total() == 0) throw std::runtime_error("entity_ratio: empty corpus");
    return static_cast<double>(pa.p_count) / static_cast<double>(pa.total());
}

// |P| / (|P| + sum of weights over N); P tokens count 1 regardless of v
inline double weighted_entity_ratio(const PartialAnnotation& pa, const WeightVector& v) {
    if (v.size() != pa.total())
        throw std::runtime_error("weighted_entity_ratio: weight vector size mismatch");
    double wn = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < 0) throw std::runtime_error("weighted_entity_ratio: negative weight");
        if (!pa.in_p[i]) wn += v[i];
    }
    double denom = static_cast<double>(pa.p_count) + wn;
    if (denom == 0.0) return 0.0;
    return static_cast<double>(pa.p_count) / denom;
}

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t gold_spans = 0;
    std::size_t pred_spans = 0;
    std::size_t matched = 0;
};

// Micro-averaged exact-match span scoring: a predicted span is correct iff
// boundaries and type both match. Zero denominators score 0, not NaN.
inline PrfScore span_f1(const Corpus& gold, const Corpus& pred) {
    if (gold.sentences.size() != pred.sentences.size())
        throw std::runtime_error("span_f1: tokenization mismatch (sentence counts differ)");
    for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
        if (gold.sentences[i].tokens != pred.sentences[i].tokens)
            throw std::runtime_error("span_f1: tokenization mismatch at sentence " +
                                     std::to_string(i));
    }
    PrfScore r;
    for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
        auto gs = spans_from_bio(gold.sentences[i], static_cast<int>(i));
        auto ps = spans_from_bio(pred.sentences[i], static_cast<int>(i));
        r.gold_spans += gs.size();
        r.pred_spans += ps.size();
        for (const Span& p : ps)
            for (const Span& g : gs)
                if (p == g) {
                    ++r.matched;
                    break;
                }
    }
    if (r.pred_spans > 0) r.precision = static_cast<double>(r.matched) / r.pred_spans;
    if (r.gold_spans > 0) r.recall = static_cast<double>(r.matched) / r.gold_spans;
    if (r.precision + r.recall > 0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

// Weights sidecar: one-line header, then sent_idx<TAB>tok_idx<TAB>weight
// with 9 significant digits.
inline void write_weights(const Corpus& c, const WeightVector& v, std::ostream& out) {
    TokenIndex idx(c);
    if (v.size() != idx.size())
        throw std::runtime_error("write_weights: weight vector size mismatch");
    out << "sent_idx\ttok_idx\tweight\n";
    char buf[64];
    for (std::size_t si = 0; si < c.sentences.size(); ++si)
        for (std::size_t ti = 0; ti < c.sentences[si].size(); ++ti) {
            std::snprintf(buf, sizeof(buf), "%.9g", v[idx.flat(si, ti)]);
            out << si << '\t' << ti << '\t' << buf << '\n';
        }
}

inline WeightVector read_weights(const Corpus& c, std::istream& in) {
    TokenIndex idx(c);
    WeightVector v(idx.size(), -1.0);
    std::string line;
    if (!std::getline(in, line) || line.rfind("sent_idx", 0) != 0)
        throw std::runtime_error("weights file: missing header line");
    std::size_t line_no = 1, seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::size_t si, ti;
        double w;
        if (!(ls >> si >> ti >> w))
            throw std::runtime_error("weights file: bad line " + std::to_string(line_no));
        if (si >= c.sentences.size() || ti >= c.sentences[si].size())
            throw std::runtime_error("weights file: token out of range at line " +
                                     std::to_string(line_no));
        if (w < 0) throw std::runtime_error("weights file: negative weight at line " +
                                            std::to_string(line_no));
        std::size_t f = idx.flat(si, ti);
        if (v[f] >= 0) throw std::runtime_error("weights file: duplicate token at line " +
                                                std::to_string(line_no));
        v[f] = w;
        ++seen;
    }
    if (seen != idx.size())
        throw std::runtime_error("weights file: covers " + std::to_string(seen) + " of " +
                                 std::to_string(idx.size()) + " tokens");
    return v;
}

inline void write_weights_file(const Corpus& c, const WeightVector& v, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_weights(c, v, out);
}

inline WeightVector read_weights_file(const Corpus& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_weights(c, in);
}

// [O, B-t, I-t, ...] in label_set order; O is always index 0
inline std::vector<std::string> bio_label_list(const Corpus& c) {
    std::vector<std::string> out{"O"};
    for (const auto& t : c.label_set) {
        out.push_back("B-" + t);
        out.push_back("I-" + t);
    }
    return out;
}

}  // namespace cbl
