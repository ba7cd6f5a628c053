#pragma once

// Plain-text serialization of models, encodings and predictors.
//
// Format, one item per line:
//   # key: value              header comment (provenance, free text)
//   kind <name>               object type, first non-comment line
//   scalar <name> <value>
//   matrix <name> <rows> <cols>
//   <row 0 values, space separated>
//   ...
// Numbers use the shortest round-trip decimal form, so write/read is exact.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "brainval/errors.hpp"
#include "brainval/estimators.hpp"
#include "brainval/hash.hpp"
#include "brainval/linmodel.hpp"

namespace brainval {

/// Parsed contents of one text document.
struct TextDocument {
    std::string kind;
    std::vector<std::pair<std::string, std::string>> comments;
    std::map<std::string, double> scalars;
    std::map<std::string, Eigen::MatrixXd> matrices;

    const std::string* comment(const std::string& key) const {
        for (const auto& [k, v] : comments) {
            if (k == key) return &v;
        }
        return nullptr;
    }

    double scalar(const std::string& name) const {
        auto it = scalars.find(name);
        if (it == scalars.end()) throw ConfigError("missing scalar '" + name + "'");
        return it->second;
    }

    const Eigen::MatrixXd& matrix(const std::string& name) const {
        auto it = matrices.find(name);
        if (it == matrices.end()) throw ConfigError("missing matrix '" + name + "'");
        return it->second;
    }
};

class TextWriter {
public:
    TextWriter(std::ostream& os, std::string_view kind) : os_(os), kind_(kind) {}

    TextWriter& comment(std::string_view key, std::string_view value) {
        os_ << "# " << key << ": " << value << '\n';
        return *this;
    }

    TextWriter& scalar(std::string_view name, double v) {
        begin();
        os_ << "scalar " << name << ' ' << format_double(v) << '\n';
        return *this;
    }

    template <typename Derived>
    TextWriter& matrix(std::string_view name, const Eigen::MatrixBase<Derived>& m) {
        begin();
        os_ << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (j) os_ << ' ';
                os_ << format_double(static_cast<double>(m(i, j)));
            }
            os_ << '\n';
        }
        return *this;
    }

private:
    void begin() {
        if (!started_) {
            os_ << "kind " << kind_ << '\n';
            started_ = true;
        }
    }

    std::ostream& os_;
    std::string kind_;
    bool started_ = false;
};

namespace detail {

inline double parse_number(std::string_view token, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        // from_chars rejects "inf"/"nan" spellings produced by other tools; accept them here.
        if (token == "inf" || token == "+inf") return std::numeric_limits<double>::infinity();
        if (token == "-inf") return -std::numeric_limits<double>::infinity();
        throw ConfigError("line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
    }
    return v;
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

}  // namespace detail

inline TextDocument read_text_document(std::istream& is) {
    TextDocument doc;
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() -> bool {
        while (std::getline(is, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            if (line[0] == '#') {
                const auto colon = line.find(':');
                if (colon != std::string::npos) {
                    const auto kb = line.find_first_not_of(" #");
                    std::string key = line.substr(kb, colon - kb);
                    std::string value = line.substr(std::min(colon + 2, line.size()));
                    doc.comments.emplace_back(std::move(key), std::move(value));
                }
                continue;
            }
            return true;
        }
        return false;
    };
    auto fail = [&](const std::string& msg) { throw ConfigError("line " + std::to_string(lineno) + ": " + msg); };

    while (next()) {
        const auto tok = detail::split_ws(line);
        if (tok[0] == "kind" && tok.size() == 2) {
            if (!doc.kind.empty()) fail("duplicate 'kind'");
            doc.kind = tok[1];
        } else if (tok[0] == "scalar" && tok.size() == 3) {
            doc.scalars[tok[1]] = detail::parse_number(tok[2], lineno);
        } else if (tok[0] == "matrix" && tok.size() == 4) {
            const auto rows = static_cast<Eigen::Index>(detail::parse_number(tok[2], lineno));
            const auto cols = static_cast<Eigen::Index>(detail::parse_number(tok[3], lineno));
            if (rows < 0 || cols < 0) fail("negative matrix shape");
            Eigen::MatrixXd m(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i) {
                if (!next()) fail("matrix '" + tok[1] + "' ends early");
                const auto vals = detail::split_ws(line);
                if (static_cast<Eigen::Index>(vals.size()) != cols) fail("expected " + std::to_string(cols) + " values");
                for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = detail::parse_number(vals[j], lineno);
            }
            doc.matrices[tok[1]] = std::move(m);
        } else {
            fail("unrecognized line '" + line + "'");
        }
    }
    if (doc.kind.empty()) throw ConfigError("document has no 'kind' line");
    return doc;
}

inline TextDocument read_text_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return read_text_document(in);
}

inline void expect_kind(const TextDocument& doc, std::string_view kind) {
    if (doc.kind != kind) throw ConfigError("expected kind '" + std::string(kind) + "', found '" + doc.kind + "'");
}

// Models

inline void write_model(std::ostream& os, const ModelParams& p, const Provenance& prov = {}) {
    TextWriter w(os, "model");
    if (!prov.config_hash.empty()) w.comment("config_hash", prov.config_hash);
    w.comment("seed", std::to_string(prov.seed));
    w.scalar("d_x", static_cast<double>(p.d_x)).scalar("d_l", static_cast<double>(p.d_l));
    w.scalar("d_r", static_cast<double>(p.d_r));
    w.scalar("sigma_r2", p.sigma_r2).scalar("sigma_y2", p.sigma_y2);
    w.matrix("A_star", p.A_star).matrix("H_star", p.H_star);
    w.matrix("beta_star", p.beta_star).matrix("Sigma_l", p.Sigma_l);
}

inline ModelParams model_from_document(const TextDocument& doc) {
    expect_kind(doc, "model");
    ModelParams p;
    p.d_x = static_cast<Eigen::Index>(doc.scalar("d_x"));
    p.d_l = static_cast<Eigen::Index>(doc.scalar("d_l"));
    p.d_r = static_cast<Eigen::Index>(doc.scalar("d_r"));
    p.sigma_r2 = doc.scalar("sigma_r2");
    p.sigma_y2 = doc.scalar("sigma_y2");
    p.A_star = doc.matrix("A_star");
    p.H_star = doc.matrix("H_star");
    const auto& b = doc.matrix("beta_star");
    if (b.cols() != 1) throw ConfigError("beta_star must be a column");
    p.beta_star = b.col(0);
    p.Sigma_l = doc.matrix("Sigma_l");
    validate(p);
    return p;
}

inline ModelParams read_model(std::istream& is) { return model_from_document(read_text_document(is)); }

inline ModelParams read_model_file(const std::string& path) { return model_from_document(read_text_document(path)); }

// Encodings

inline void write_encoding(std::ostream& os, const EncodingModel& enc, const Provenance& prov = {}) {
    TextWriter w(os, "encoding");
    if (!prov.config_hash.empty()) w.comment("config_hash", prov.config_hash);
    w.comment("seed", std::to_string(prov.seed));
    w.matrix("A_hat", enc.A_hat).matrix("H_hat", enc.H_hat);
}

inline EncodingModel read_encoding(std::istream& is) {
    const auto doc = read_text_document(is);
    expect_kind(doc, "encoding");
    EncodingModel enc;
    enc.A_hat = doc.matrix("A_hat");
    enc.H_hat = doc.matrix("H_hat");
    if (enc.H_hat.rows() != enc.A_hat.cols()) throw ConfigError("A_hat and H_hat shapes disagree");
    // The projector is derived, not stored.
    enc.P_A_hat = enc.A_hat * enc.A_hat.transpose();
    return enc;
}

// Predictors

inline const char* kind_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::tos: return "tos";
        case EstimatorKind::soft: return "soft";
        case EstimatorKind::hard: return "hard";
    }
    return "unknown";
}

inline void write_predictor(std::ostream& os, const TaskPredictor& pred) {
    TextWriter w(os, "predictor");
    if (!pred.provenance.config_hash.empty()) w.comment("config_hash", pred.provenance.config_hash);
    w.comment("seed", std::to_string(pred.provenance.seed));
    w.comment("estimator", kind_name(pred.kind));
    w.comment("lambda", pred.is_hard() ? std::string("hard") : format_double(pred.lambda));
    w.scalar("lambda", pred.is_hard() ? std::numeric_limits<double>::infinity() : pred.lambda);
    w.matrix("beta_hat", pred.beta_hat);
}

inline TaskPredictor read_predictor(std::istream& is) {
    const auto doc = read_text_document(is);
    expect_kind(doc, "predictor");
    TaskPredictor pred;
    const auto& b = doc.matrix("beta_hat");
    if (b.cols() != 1) throw ConfigError("beta_hat must be a column");
    pred.beta_hat = b.col(0);
    pred.lambda = doc.scalar("lambda");
    const std::string* est = doc.comment("estimator");
    if (est == nullptr) throw ConfigError("predictor has no estimator comment");
    if (*est == "tos") {
        pred.kind = EstimatorKind::tos;
    } else if (*est == "soft") {
        pred.kind = EstimatorKind::soft;
    } else if (*est == "hard") {
        pred.kind = EstimatorKind::hard;
        pred.lambda = 0.0;
    } else {
        throw ConfigError("unknown estimator '" + *est + "'");
    }
    if (const auto* h = doc.comment("config_hash")) pred.provenance.config_hash = *h;
    if (const auto* s = doc.comment("seed")) pred.provenance.seed = std::stoull(*s);
    return pred;
}

}  // namespace brainval
