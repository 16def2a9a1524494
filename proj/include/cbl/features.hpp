#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cbl/corpus.hpp"

// Sparse context features shared by the perceptron tagger and the chain
// model's emission scores.

namespace cbl {

// collapsed character-class pattern: "Emery" -> "Xx", "B52s" -> "Xdx",
// "U.N." -> "X.X."
inline std::string word_shape(std::string_view w) {
    std::string out;
    char last = 0;
    for (unsigned char ch : w) {
        char cls;
        if (std::isupper(ch))
            cls = 'X';
        else if (std::islower(ch))
            cls = 'x';
        else if (std::isdigit(ch))
            cls = 'd';
        else
            cls = static_cast<char>(ch);
        if (cls != last) {
            out.push_back(cls);
            last = cls;
        }
    }
    return out;
}

inline std::string lowercased(std::string_view w) {
    std::string out(w);
    for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

// optional word -> Brown-cluster bit path table, `surface<TAB>bitpath` lines
struct ClusterLexicon {
    std::unordered_map<std::string, std::string> paths;

    bool empty() const { return paths.empty(); }

    static ClusterLexicon read(std::istream& in) {
        ClusterLexicon lex;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
                throw std::runtime_error("cluster file: bad line " + std::to_string(line_no));
            lex.paths[line.substr(0, tab)] = line.substr(tab + 1);
        }
        return lex;
    }

    static ClusterLexicon read_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        return read(in);
    }
};

// Feature templates: lowercased words at offsets -2..+2, shapes at -1..+1,
// prefixes/suffixes of length 1-3, bias, and cluster path prefixes (4, 6,
// 10, full) when a lexicon is loaded. prev_tag, when present, adds the
// greedy decoder's previous-tag feature; the chain model omits it.
inline void token_features(const Sentence& s, std::size_t i,
                           std::optional<std::string_view> prev_tag,
                           const ClusterLexicon* clusters, std::vector<std::string>& out) {
    out.clear();
    const std::size_t n = s.size();
    auto word_at = [&](long j) -> std::string {
        if (j < 0) return "<s>";
        if (j >= static_cast<long>(n)) return "</s>";
        return lowercased(s.tokens[static_cast<std::size_t>(j)]);
    };
    auto shape_at = [&](long j) -> std::string {
        if (j < 0) return "<s>";
        if (j >= static_cast<long>(n)) return "</s>";
        return word_shape(s.tokens[static_cast<std::size_t>(j)]);
    };

    out.push_back("bias");
    const long pos = static_cast<long>(i);
    for (long off = -2; off <= 2; ++off)
        out.push_back("w[" + std::to_string(off) + "]=" + word_at(pos + off));
    for (long off = -1; off <= 1; ++off)
        out.push_back("sh[" + std::to_string(off) + "]=" + shape_at(pos + off));

    const std::string& w = s.tokens[i];
    for (std::size_t len = 1; len <= 3 && len <= w.size(); ++len) {
        out.push_back("pre" + std::to_string(len) + "=" + w.substr(0, len));
        out.push_back("suf" + std::to_string(len) + "=" + w.substr(w.size() - len));
    }

    if (prev_tag) out.push_back("prev=" + std::string(*prev_tag));

    if (clusters && !clusters->empty()) {
        auto it = clusters->paths.find(w);
        if (it != clusters->paths.end()) {
            const std::string& path = it->second;
            for (std::size_t len : {std::size_t{4}, std::size_t{6}, std::size_t{10}})
                if (path.size() > len) out.push_back("cl" + std::to_string(len) + "=" + path.substr(0, len));
            out.push_back("cl=" + path);
        }
    }
}

// String features interned to dense ids; ids are assigned in first-intern
// order, so a fixed visit order gives a fixed numbering.
class FeatureInterner {
public:
    std::uint32_t intern(const std::string& name) {
        auto it = ids_.find(name);
        if (it != ids_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(names_.size());
        ids_.emplace(name, id);
        names_.push_back(name);
        return id;
    }

    // -1 when unseen
    std::int64_t lookup(const std::string& name) const {
        auto it = ids_.find(name);
        return it == ids_.end() ? -1 : static_cast<std::int64_t>(it->second);
    }

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t id) const { return names_[id]; }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::unordered_map<std::string, std::uint32_t> ids_;
    std::vector<std::string> names_;
};

}  // namespace cbl
