#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbl/corpus.hpp"
#include "cbl/features.hpp"
#include "cbl/rng.hpp"

// Linear-chain CRF trained on soft gold labelings: the likelihood is
// marginalized over all label sequences, each weighted by the product of
// its per-token soft-label masses. One-hot rows recover the standard CRF;
// uniform rows carry no information. Emissions are linear over the shared
// sparse context features (no previous-tag feature; transitions cover it).

namespace cbl {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Per-token label distributions, row-major n x L, O at column 0.
struct SoftLabelMatrix {
    std::size_t label_count = 0;
    std::vector<double> rows;

    SoftLabelMatrix() = default;
    SoftLabelMatrix(std::size_t tokens, std::size_t labels)
        : label_count(labels), rows(tokens * labels, 0.0) {}

    std::size_t tokens() const { return label_count ? rows.size() / label_count : 0; }
    double* row(std::size_t i) { return &rows[i * label_count]; }
    const double* row(std::size_t i) const { return &rows[i * label_count]; }

    SoftLabelMatrix slice(std::size_t begin, std::size_t count) const {
        SoftLabelMatrix out(count, label_count);
        std::copy(rows.begin() + begin * label_count,
                  rows.begin() + (begin + count) * label_count, out.rows.begin());
        return out;
    }
};

// Soft labeling from instance weights: trusted tokens are one-hot at their
// label; for the rest the O mass is max(1/L, v_i) and the remainder is
// spread evenly over the other labels. v_i is confidence that the token is
// O, clamped to [0,1].
inline SoftLabelMatrix soft_labels(const std::vector<int>& labels_flat,
                                   const std::vector<std::uint8_t>& trusted,
                                   const WeightVector& v, std::size_t L) {
    if (L < 2) throw std::runtime_error("soft_labels: need a labelset of size >= 2");
    const std::size_t n = labels_flat.size();
    if (trusted.size() != n || v.size() != n)
        throw std::runtime_error("soft_labels: input size mismatch");
    SoftLabelMatrix g(n, L);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = g.row(i);
        if (trusted[i]) {
            row[static_cast<std::size_t>(labels_flat[i])] = 1.0;
        } else {
            double vi = v[i];
            if (vi < 0.0) vi = 0.0;
            if (vi > 1.0) vi = 1.0;
            double o = std::max(1.0 / static_cast<double>(L), vi);
            row[0] = o;
            double rest = (1.0 - o) / static_cast<double>(L - 1);
            for (std::size_t l = 1; l < L; ++l) row[l] = rest;
        }
    }
    return g;
}

namespace detail {

inline double log_sum_exp(const double* x, std::size_t n) {
    double mx = kNegInf;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, x[i]);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] != kNegInf) s += std::exp(x[i] - mx);
    return mx + std::log(s);
}

}  // namespace detail

struct CrfConfig {
    int epochs = 10;
    double step = 0.2;   // adagrad base step
    double reg = 1e-4;   // L2 strength;0 disables
    std::uint64_t seed = 1;
};

class CrfModel {
public:
    struct Output {
        std::vector<int> labels;       // flat Viterbi labels
        std::vector<double> marginal;  // n*L row-major token marginals
    };

    struct Gradient {
        std::vector<double> start, stop, trans;   // L, L, L*L
        std::vector<std::vector<double>> emit;    // [L][F]

        double max_abs() const {
            double m = 0.0;
            for (double x : start) m = std::max(m, std::abs(x));
            for (double x : stop) m = std::max(m, std::abs(x));
            for (double x : trans) m = std::max(m, std::abs(x));
            for (const auto& row : emit)
                for (double x : row) m = std::max(m, std::abs(x));
            return m;
        }
    };

    // Interns every feature of the corpus and initializes parameters to
    // zero; epochs = 0 gives the zero model (handy as a test scaffold).
    static CrfModel train(const Corpus& corpus, const SoftLabelMatrix& g,
                          std::vector<std::string> labels, const CrfConfig& cfg,
                          const ClusterLexicon* clusters = nullptr,
                          std::vector<double>* epoch_loss = nullptr) {
        if (corpus.sentences.empty()) throw std::runtime_error("crf: empty training set");
        if (labels.size() < 2) throw std::runtime_error("crf: need at least 2 labels");
        TokenIndex idx(corpus);
        if (g.tokens() != idx.size() || g.label_count != labels.size())
            throw std::runtime_error("crf: soft label matrix size mismatch");

        CrfModel m;
        m.labels_ = std::move(labels);
        m.reg_ = cfg.reg;
        const std::size_t L = m.labels_.size();

        std::vector<std::vector<std::uint32_t>> feats(idx.size());
        {
            std::vector<std::string> buf;
            std::size_t at = 0;
            for (const auto& s : corpus.sentences)
                for (std::size_t i = 0; i < s.size(); ++i, ++at) {
                    token_features(s, i, std::nullopt, clusters, buf);
                    auto& ids = feats[at];
                    ids.reserve(buf.size());
                    for (const auto& f : buf) ids.push_back(m.feats_.intern(f));
                }
        }
        const std::size_t F = m.feats_.size();
        m.start_.assign(L, 0.0);
        m.stop_.assign(L, 0.0);
        m.trans_.assign(L * L, 0.0);
        m.emit_.assign(L, std::vector<double>(F, 0.0));

        // adagrad accumulators
        std::vector<double> a_start(L, 0.0), a_stop(L, 0.0), a_trans(L * L, 0.0);
        std::vector<std::vector<double>> a_emit(L, std::vector<double>(F, 0.0));
        auto adagrad = [&](double& theta, double& acc, double grad) {
            acc += grad * grad;
            theta -= cfg.step * grad / (std::sqrt(acc) + 1e-10);
        };

        std::vector<std::size_t> order(corpus.sentences.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng(cfg.seed);
        const double reg_share =
            cfg.reg / static_cast<double>(corpus.sentences.size());

        Workspace ws;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            rng.shuffle(order);
            for (std::size_t si : order) {
                const Sentence& sent = corpus.sentences[si];
                const std::size_t n = sent.size();
                if (n == 0) continue;
                std::size_t base = idx.sentence_begin(si);

                m.fill_lattice(feats, base, n, g, ws);
                double log_z = m.forward_backward(ws.node_free, n, ws.alpha_f, ws.beta_f);
                double log_zq = m.forward_backward(ws.node_clamp, n, ws.alpha_c, ws.beta_c);
                if (!std::isfinite(log_z) || !std::isfinite(log_z - log_zq))
                    throw std::runtime_error(
                        "crf: training diverged (non-finite loss); reduce the step size");

                // free-minus-clamped expectations, applied in place
                for (std::size_t l = 0; l < L; ++l) {
                    double d = node_marg(ws.alpha_f, ws.beta_f, 0, l, L, log_z) -
                               node_marg(ws.alpha_c, ws.beta_c, 0, l, L, log_zq);
                    adagrad(m.start_[l], a_start[l], d + reg_share * m.start_[l]);
                    d = node_marg(ws.alpha_f, ws.beta_f, n - 1, l, L, log_z) -
                        node_marg(ws.alpha_c, ws.beta_c, n - 1, l, L, log_zq);
                    adagrad(m.stop_[l], a_stop[l], d + reg_share * m.stop_[l]);
                }
                if (n > 1)
                    for (std::size_t l = 0; l < L; ++l)
                        for (std::size_t l2 = 0; l2 < L; ++l2) {
                            double d = 0.0;
                            for (std::size_t i = 0; i + 1 < n; ++i)
                                d += edge_marg(ws.alpha_f, ws.beta_f, ws.node_free, i, l, l2,
                                               L, log_z, m.trans_) -
                                     edge_marg(ws.alpha_c, ws.beta_c, ws.node_clamp, i, l, l2,
                                               L, log_zq, m.trans_);
                            adagrad(m.trans_[l * L + l2], a_trans[l * L + l2],
                                    d + reg_share * m.trans_[l * L + l2]);
                        }
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t l = 0; l < L; ++l) {
                        double d = node_marg(ws.alpha_f, ws.beta_f, i, l, L, log_z) -
                                   node_marg(ws.alpha_c, ws.beta_c, i, l, L, log_zq);
                        if (d == 0.0 && cfg.reg == 0.0) continue;
                        for (std::uint32_t f : feats[base + i])
                            adagrad(m.emit_[l][f], a_emit[l][f],
                                    d + reg_share * m.emit_[l][f]);
                    }
                }
            }
            if (epoch_loss) {
                double total = 0.0;
                std::size_t at = 0;
                for (const auto& s : corpus.sentences) {
                    total += m.loss(s, g.slice(at, s.size()), clusters);
                    at += s.size();
                }
                epoch_loss->push_back(total);
            }
        }
        return m;
    }

    // convenience wrapper: soft labels from (labels, trusted mask, weights)
    static CrfModel train(const Corpus& corpus, const std::vector<int>& gold,
                          const std::vector<std::uint8_t>& trusted, const WeightVector& v,
                          std::vector<std::string> labels, const CrfConfig& cfg,
                          const ClusterLexicon* clusters = nullptr) {
        SoftLabelMatrix g = soft_labels(gold, trusted, v, labels.size());
        return train(corpus, g, std::move(labels), cfg, clusters);
    }

    // -log sum_y q(y) P(y | x) for one sentence, plus the L2 term when
    // regularization is on; g has one row per sentence token
    double loss(const Sentence& s, const SoftLabelMatrix& g,
                const ClusterLexicon* clusters = nullptr) const {
        const std::size_t n = s.size();
        check_soft(g, n);
        Workspace ws;
        fill_lattice_strings(s, g, clusters, ws);
        double log_z = forward_backward(ws.node_free, n, ws.alpha_f, ws.beta_f);
        double log_zq = forward_backward(ws.node_clamp, n, ws.alpha_c, ws.beta_c);
        return log_z - log_zq + 0.5 * reg_ * squared_norm();
    }

    // expected features under P(y|x) minus under the q-clamped posterior,
    // plus reg * theta -- the analytic gradient of loss()
    Gradient gradient(const Sentence& s, const SoftLabelMatrix& g,
                      const ClusterLexicon* clusters = nullptr) const {
        const std::size_t n = s.size();
        check_soft(g, n);
        const std::size_t L = labels_.size();
        Workspace ws;
        fill_lattice_strings(s, g, clusters, ws);
        double log_z = forward_backward(ws.node_free, n, ws.alpha_f, ws.beta_f);
        double log_zq = forward_backward(ws.node_clamp, n, ws.alpha_c, ws.beta_c);

        Gradient grad;
        grad.start.assign(L, 0.0);
        grad.stop.assign(L, 0.0);
        grad.trans.assign(L * L, 0.0);
        grad.emit.assign(L, std::vector<double>(feats_.size(), 0.0));

        for (std::size_t l = 0; l < L; ++l) {
            grad.start[l] = node_marg(ws.alpha_f, ws.beta_f, 0, l, L, log_z) -
                            node_marg(ws.alpha_c, ws.beta_c, 0, l, L, log_zq) +
                            reg_ * start_[l];
            grad.stop[l] = node_marg(ws.alpha_f, ws.beta_f, n - 1, l, L, log_z) -
                           node_marg(ws.alpha_c, ws.beta_c, n - 1, l, L, log_zq) +
                           reg_ * stop_[l];
        }
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t l2 = 0; l2 < L; ++l2) {
                double d = reg_ * trans_[l * L + l2];
                for (std::size_t i = 0; i + 1 < n; ++i)
                    d += edge_marg(ws.alpha_f, ws.beta_f, ws.node_free, i, l, l2, L, log_z,
                                   trans_) -
                         edge_marg(ws.alpha_c, ws.beta_c, ws.node_clamp, i, l, l2, L, log_zq,
                                   trans_);
                grad.trans[l * L + l2] = d;
            }
        if (reg_ != 0.0)
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t f = 0; f < feats_.size(); ++f)
                    grad.emit[l][f] = reg_ * emit_[l][f];
        std::vector<std::string> buf;
        for (std::size_t i = 0; i < n; ++i) {
            token_features(s, i, std::nullopt, clusters, buf);
            for (std::size_t l = 0; l < L; ++l) {
                double d = node_marg(ws.alpha_f, ws.beta_f, i, l, L, log_z) -
                           node_marg(ws.alpha_c, ws.beta_c, i, l, L, log_zq);
                if (d == 0.0) continue;
                for (const auto& f : buf) {
                    std::int64_t id = feats_.lookup(f);
                    if (id >= 0) grad.emit[l][static_cast<std::size_t>(id)] += d;
                }
            }
        }
        return grad;
    }

    // Viterbi labels plus forward-backward token marginals; the O-column
    // marginal is the confidence used by the constrained learning loop
    Output predict(const Corpus& corpus, const ClusterLexicon* clusters = nullptr) const {
        TokenIndex idx(corpus);
        const std::size_t L = labels_.size();
        Output out;
        out.labels.assign(idx.size(), 0);
        out.marginal.assign(idx.size() * L, 0.0);

        Workspace ws;
        std::vector<double> vit;
        std::vector<int> back;
        for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
            const Sentence& s = corpus.sentences[si];
            const std::size_t n = s.size();
            if (n == 0) continue;
            std::size_t base = idx.sentence_begin(si);
            fill_lattice_strings(s, SoftLabelMatrix(), clusters, ws, /*free_only=*/true);
            double log_z = forward_backward(ws.node_free, n, ws.alpha_f, ws.beta_f);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t l = 0; l < L; ++l)
                    out.marginal[(base + i) * L + l] =
                        node_marg(ws.alpha_f, ws.beta_f, i, l, L, log_z);

            // viterbi over the same lattice
            vit.assign(n * L, 0.0);
            back.assign(n * L, 0);
            for (std::size_t l = 0; l < L; ++l) vit[l] = start_[l] + ws.node_free[l];
            for (std::size_t i = 1; i < n; ++i)
                for (std::size_t l2 = 0; l2 < L; ++l2) {
                    double best = kNegInf;
                    int arg = 0;
                    for (std::size_t l = 0; l < L; ++l) {
                        double cand = vit[(i - 1) * L + l] + trans_[l * L + l2];
                        if (cand > best) {
                            best = cand;
                            arg = static_cast<int>(l);
                        }
                    }
                    vit[i * L + l2] = best + ws.node_free[i * L + l2];
                    back[i * L + l2] = arg;
                }
            std::size_t cur = 0;
            double best = kNegInf;
            for (std::size_t l = 0; l < L; ++l)
                if (vit[(n - 1) * L + l] + stop_[l] > best) {
                    best = vit[(n - 1) * L + l] + stop_[l];
                    cur = l;
                }
            for (std::size_t i = n; i-- > 0;) {
                out.labels[base + i] = static_cast<int>(cur);
                cur = static_cast<std::size_t>(back[i * L + cur]);
            }
        }
        return out;
    }

    std::vector<double> confidence_o(const Corpus& corpus,
                                     const ClusterLexicon* clusters = nullptr) const {
        Output out = predict(corpus, clusters);
        const std::size_t L = labels_.size();
        std::vector<double> conf(out.labels.size());
        for (std::size_t i = 0; i < conf.size(); ++i) conf[i] = out.marginal[i * L];
        return conf;
    }

    // start + emissions + transitions + stop along one label path
    double path_score(const Sentence& s, const std::vector<int>& y,
                      const ClusterLexicon* clusters = nullptr) const {
        const std::size_t n = s.size();
        if (y.size() != n) throw std::runtime_error("path_score: length mismatch");
        const std::size_t L = labels_.size();
        Workspace ws;
        fill_lattice_strings(s, SoftLabelMatrix(), clusters, ws, /*free_only=*/true);
        double total = start_[static_cast<std::size_t>(y[0])];
        for (std::size_t i = 0; i < n; ++i) {
            total += ws.node_free[i * L + static_cast<std::size_t>(y[i])];
            if (i > 0)
                total += trans_[static_cast<std::size_t>(y[i - 1]) * L +
                                static_cast<std::size_t>(y[i])];
        }
        return total + stop_[static_cast<std::size_t>(y[n - 1])];
    }

    const std::vector<std::string>& labels() const { return labels_; }
    const FeatureInterner& features() const { return feats_; }
    std::vector<double>& start() { return start_; }
    std::vector<double>& stop() { return stop_; }
    std::vector<double>& trans() { return trans_; }
    std::vector<std::vector<double>>& emit() { return emit_; }
    double& reg() { return reg_; }

    void save(std::ostream& out) const {
        char buf[64];
        auto put = [&](double x) {
            std::snprintf(buf, sizeof(buf), "%.17g", x);
            out << buf;
        };
        out << "cblner crf 1\n";
        out << "reg ";
        put(reg_);
        out << "\nlabels " << labels_.size() << "\n";
        for (const auto& l : labels_) out << l << "\n";
        const std::size_t L = labels_.size();
        out << "start";
        for (std::size_t l = 0; l < L; ++l) {
            out << ' ';
            put(start_[l]);
        }
        out << "\nstop";
        for (std::size_t l = 0; l < L; ++l) {
            out << ' ';
            put(stop_[l]);
        }
        out << "\ntrans\n";
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t l2 = 0; l2 < L; ++l2) {
                if (l2) out << ' ';
                put(trans_[l * L + l2]);
            }
            out << '\n';
        }
        std::vector<std::size_t> order(feats_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return feats_.name(a) < feats_.name(b);
        });
        out << "features " << order.size() << "\n";
        for (std::size_t f : order) {
            out << feats_.name(f);
            for (std::size_t l = 0; l < L; ++l) {
                out << '\t';
                put(emit_[l][f]);
            }
            out << '\n';
        }
    }

    static CrfModel load(std::istream& in) {
        CrfModel m;
        std::string line, key;
        if (!std::getline(in, line) || line != "cblner crf 1")
            throw std::runtime_error("crf model: bad magic line");
        std::size_t count = 0;
        in >> key >> m.reg_;
        if (key != "reg") throw std::runtime_error("crf model: expected reg");
        in >> key >> count;
        if (key != "labels") throw std::runtime_error("crf model: expected labels");
        m.labels_.resize(count);
        for (auto& l : m.labels_) in >> l;
        const std::size_t L = count;
        m.start_.assign(L, 0.0);
        m.stop_.assign(L, 0.0);
        m.trans_.assign(L * L, 0.0);
        in >> key;
        if (key != "start") throw std::runtime_error("crf model: expected start");
        for (auto& x : m.start_) in >> x;
        in >> key;
        if (key != "stop") throw std::runtime_error("crf model: expected stop");
        for (auto& x : m.stop_) in >> x;
        in >> key;
        if (key != "trans") throw std::runtime_error("crf model: expected trans");
        for (auto& x : m.trans_) in >> x;
        in >> key >> count;
        if (key != "features") throw std::runtime_error("crf model: expected features");
        in >> std::ws;
        m.emit_.assign(L, std::vector<double>(count, 0.0));
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::getline(in, line)) throw std::runtime_error("crf model: truncated");
            std::size_t tab = line.find('\t');
            if (tab == std::string::npos) throw std::runtime_error("crf model: bad feature line");
            std::uint32_t id = m.feats_.intern(line.substr(0, tab));
            std::size_t pos = tab;
            for (std::size_t l = 0; l < L; ++l) {
                std::size_t next = line.find('\t', pos + 1);
                m.emit_[l][id] = std::stod(line.substr(pos + 1, next - pos - 1));
                pos = next;
            }
        }
        return m;
    }

private:
    struct Workspace {
        std::vector<double> node_free, node_clamp;  // n*L log scores
        std::vector<double> alpha_f, beta_f, alpha_c, beta_c;
    };

    void check_soft(const SoftLabelMatrix& g, std::size_t n) const {
        if (g.label_count != labels_.size() || g.tokens() != n)
            throw std::runtime_error("crf: soft label matrix size mismatch");
        for (double x : g.rows)
            if (std::isnan(x)) throw std::runtime_error("crf: NaN in soft labels");
    }

    double squared_norm() const {
        double s = 0.0;
        for (double x : start_) s += x * x;
        for (double x : stop_) s += x * x;
        for (double x : trans_) s += x * x;
        for (const auto& row : emit_)
            for (double x : row) s += x * x;
        return s;
    }

    // node scores from pre-interned ids; clamped lattice adds log g
    void fill_lattice(const std::vector<std::vector<std::uint32_t>>& feats, std::size_t base,
                      std::size_t n, const SoftLabelMatrix& g, Workspace& ws) const {
        const std::size_t L = labels_.size();
        ws.node_free.assign(n * L, 0.0);
        ws.node_clamp.assign(n * L, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* grow = g.row(base + i);
            for (std::size_t l = 0; l < L; ++l) {
                double e = 0.0;
                for (std::uint32_t f : feats[base + i]) e += emit_[l][f];
                ws.node_free[i * L + l] = e;
                ws.node_clamp[i * L + l] =
                    grow[l] > 0.0 ? e + std::log(grow[l]) : kNegInf;
            }
        }
    }

    void fill_lattice_strings(const Sentence& s, const SoftLabelMatrix& g,
                              const ClusterLexicon* clusters, Workspace& ws,
                              bool free_only = false) const {
        const std::size_t L = labels_.size();
        const std::size_t n = s.size();
        ws.node_free.assign(n * L, 0.0);
        if (!free_only) ws.node_clamp.assign(n * L, 0.0);
        std::vector<std::string> buf;
        for (std::size_t i = 0; i < n; ++i) {
            token_features(s, i, std::nullopt, clusters, buf);
            for (std::size_t l = 0; l < L; ++l) {
                double e = 0.0;
                for (const auto& f : buf) {
                    std::int64_t id = feats_.lookup(f);
                    if (id >= 0) e += emit_[l][static_cast<std::size_t>(id)];
                }
                ws.node_free[i * L + l] = e;
                if (!free_only) {
                    double gl = g.row(i)[l];
                    ws.node_clamp[i * L + l] = gl > 0.0 ? e + std::log(gl) : kNegInf;
                }
            }
        }
    }

    // log-domain forward/backward over given node scores; returns log Z
    double forward_backward(const std::vector<double>& node, std::size_t n,
                            std::vector<double>& alpha, std::vector<double>& beta) const {
        const std::size_t L = labels_.size();
        alpha.assign(n * L, kNegInf);
        beta.assign(n * L, kNegInf);
        std::vector<double> tmp(L);
        for (std::size_t l = 0; l < L; ++l) alpha[l] = start_[l] + node[l];
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t l2 = 0; l2 < L; ++l2) {
                for (std::size_t l = 0; l < L; ++l)
                    tmp[l] = alpha[(i - 1) * L + l] + trans_[l * L + l2];
                alpha[i * L + l2] = detail::log_sum_exp(tmp.data(), L) + node[i * L + l2];
            }
        for (std::size_t l = 0; l < L; ++l) beta[(n - 1) * L + l] = stop_[l];
        for (std::size_t i = n - 1; i-- > 0;)
            for (std::size_t l = 0; l < L; ++l) {
                for (std::size_t l2 = 0; l2 < L; ++l2)
                    tmp[l2] = trans_[l * L + l2] + node[(i + 1) * L + l2] + beta[(i + 1) * L + l2];
                beta[i * L + l] = detail::log_sum_exp(tmp.data(), L);
            }
        for (std::size_t l = 0; l < L; ++l) tmp[l] = alpha[(n - 1) * L + l] + stop_[l];
        return detail::log_sum_exp(tmp.data(), L);
    }

    static double node_marg(const std::vector<double>& alpha, const std::vector<double>& beta,
                            std::size_t i, std::size_t l, std::size_t L, double log_z) {
        double v = alpha[i * L + l] + beta[i * L + l];
        return v == kNegInf ? 0.0 : std::exp(v - log_z);
    }

    static double edge_marg(const std::vector<double>& alpha, const std::vector<double>& beta,
                            const std::vector<double>& node, std::size_t i, std::size_t l,
                            std::size_t l2, std::size_t L, double log_z,
                            const std::vector<double>& trans) {
        double v = alpha[i * L + l] + trans[l * L + l2] + node[(i + 1) * L + l2] +
                   beta[(i + 1) * L + l2];
        return v == kNegInf ? 0.0 : std::exp(v - log_z);
    }

    std::vector<std::string> labels_;
    FeatureInterner feats_;
    std::vector<std::vector<double>> emit_;
    std::vector<double> trans_, start_, stop_;
    double reg_ = 1e-4;
};

}  // namespace cbl
