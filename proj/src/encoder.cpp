#include "trace/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "trace/error.hpp"

namespace trace {

namespace {

using ordered_json = nlohmann::ordered_json;

void split_identifier(const std::string& word, std::vector<std::string>& out) {
    std::string piece;
    bool prev_lower = false;  // case of the original character, not the stored one
    for (const char c : word) {
        if (c == '_') {
            if (!piece.empty()) {
                out.push_back(piece);
                piece.clear();
            }
            prev_lower = false;
            continue;
        }
        if (std::isupper(static_cast<unsigned char>(c)) && prev_lower && !piece.empty()) {
            out.push_back(piece);
            piece.clear();
        }
        piece.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        prev_lower = std::islower(static_cast<unsigned char>(c)) != 0;
    }
    if (!piece.empty()) out.push_back(piece);
}

}  // namespace

int Vocabulary::index_of(const std::string& token) const {
    auto it = token_to_index.find(token);
    return it == token_to_index.end() ? kUnk : it->second;
}

std::vector<std::string> Vocabulary::tokens_in_index_order() const {
    std::vector<std::string> out(token_to_index.size());
    for (const auto& [token, index] : token_to_index) {
        out[static_cast<std::size_t>(index - kReserved)] = token;
    }
    return out;
}

Vocabulary Vocabulary::build(const std::vector<LabeledPair>& train_pairs) {
    std::set<std::string> seen;
    for (const LabeledPair& pair : train_pairs) {
        for (std::string& t : tokenize(pair.nl_text, ArtifactKind::NL)) seen.insert(std::move(t));
        for (std::string& t : tokenize(pair.pl_text, ArtifactKind::PL)) seen.insert(std::move(t));
    }
    Vocabulary vocab;
    int next = kReserved;
    for (const std::string& token : seen) vocab.token_to_index.emplace(token, next++);
    return vocab;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary vocab;
    int next = kReserved;
    for (const std::string& token : tokens) {
        if (!vocab.token_to_index.emplace(token, next).second) {
            throw TraceError(Errc::ValidationError, "duplicate vocabulary token '" + token + "'");
        }
        ++next;
    }
    return vocab;
}

void EncoderConfig::validate() const {
    if (max_seq_len < 8) throw TraceError(Errc::ConfigError, "max_seq_len must be >= 8");
    if (embed_dim < 2) throw TraceError(Errc::ConfigError, "embed_dim must be >= 2");
    if (backend == EncoderBackend::Remote) {
        if (remote_endpoint.empty()) {
            throw TraceError(Errc::ConfigError, "remote backend needs an endpoint");
        }
        if (remote_dimension < 1) {
            throw TraceError(Errc::ConfigError, "remote backend needs a positive dimension");
        }
    }
}

std::string_view encoder_backend_name(EncoderBackend backend) {
    return backend == EncoderBackend::DeskTrainable ? "desk_trainable" : "remote";
}

EncoderBackend encoder_backend_from_name(std::string_view name) {
    if (name == "desk_trainable") return EncoderBackend::DeskTrainable;
    if (name == "remote") return EncoderBackend::Remote;
    throw TraceError(Errc::ConfigError, "unknown encoder backend '" + std::string(name) + "'");
}

std::vector<std::string> tokenize(const std::string& text, ArtifactKind kind) {
    std::vector<std::string> out;
    if (kind == ArtifactKind::NL) {
        std::string cur;
        for (unsigned char c : text) {
            if (std::isalnum(c)) {
                cur.push_back(static_cast<char>(std::tolower(c)));
            } else if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
        }
        if (!cur.empty()) out.push_back(std::move(cur));
        return out;
    }
    // PL: keep words (with '_') together first, then split each identifier
    std::string word;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '_') {
            word.push_back(static_cast<char>(c));
        } else if (!word.empty()) {
            split_identifier(word, out);
            word.clear();
        }
    }
    if (!word.empty()) split_identifier(word, out);
    return out;
}

std::vector<int> join_and_truncate(const std::vector<std::string>& nl_tokens,
                                   const std::vector<std::string>& pl_tokens,
                                   const Vocabulary& vocab, const EncoderConfig& cfg) {
    cfg.validate();
    std::vector<int> seq;
    seq.reserve(nl_tokens.size() + 1 + pl_tokens.size());
    for (const std::string& t : nl_tokens) seq.push_back(vocab.index_of(t));
    seq.push_back(Vocabulary::kSep);
    for (const std::string& t : pl_tokens) seq.push_back(vocab.index_of(t));
    if (seq.size() > static_cast<std::size_t>(cfg.max_seq_len)) {
        seq.resize(static_cast<std::size_t>(cfg.max_seq_len));
    }
    return seq;
}

Embedding Embedding::init(int rows, int dim, Rng& rng) {
    Embedding emb;
    emb.rows = rows;
    emb.dim = dim;
    emb.values.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(dim));
    for (double& v : emb.values) v = rng.uniform(-0.05, 0.05);
    return emb;
}

std::vector<double> encode(const std::vector<int>& sequence, const Embedding& embedding) {
    std::vector<double> out(static_cast<std::size_t>(embedding.dim), 0.0);
    std::size_t occupied = 0;
    for (int index : sequence) {
        if (index == Vocabulary::kPad) continue;
        if (index < 0 || index >= embedding.rows) {
            throw TraceError(Errc::ValidationError,
                             "sequence index " + std::to_string(index) + " outside embedding table");
        }
        const double* row = embedding.row(index);
        for (int j = 0; j < embedding.dim; ++j) out[static_cast<std::size_t>(j)] += row[j];
        ++occupied;
    }
    if (occupied == 0) {
        throw TraceError(Errc::EncodingEmpty, "sequence has no non-PAD positions to pool");
    }
    for (double& v : out) v /= static_cast<double>(occupied);
    return out;
}

std::vector<double> encode_remote(const std::string& nl_text, const std::string& pl_text,
                                  const EncoderConfig& cfg) {
    cfg.validate();
    if (cfg.backend != EncoderBackend::Remote) {
        throw TraceError(Errc::ConfigError, "encode_remote requires the remote backend");
    }

    std::vector<std::string> tokens = tokenize(nl_text, ArtifactKind::NL);
    tokens.push_back("[SEP]");
    for (std::string& t : tokenize(pl_text, ArtifactKind::PL)) tokens.push_back(std::move(t));
    if (tokens.size() > static_cast<std::size_t>(cfg.max_seq_len)) {
        tokens.resize(static_cast<std::size_t>(cfg.max_seq_len));
    }
    std::string joined;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) joined.push_back(' ');
        joined += tokens[i];
    }

    const std::size_t scheme = cfg.remote_endpoint.find("://");
    if (scheme == std::string::npos) {
        throw TraceError(Errc::ConfigError, "remote endpoint missing scheme: '" + cfg.remote_endpoint + "'");
    }
    const std::size_t slash = cfg.remote_endpoint.find('/', scheme + 3);
    const std::string base =
        slash == std::string::npos ? cfg.remote_endpoint : cfg.remote_endpoint.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : cfg.remote_endpoint.substr(slash);

    ordered_json payload;
    payload["text"] = joined;
    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(60, 0);
    httplib::Result res = client.Post(path, payload.dump(), "application/json");
    if (!res) {
        throw TraceError(Errc::ProviderError,
                         "remote encoder unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw TraceError(Errc::ProviderError,
                         "remote encoder returned status " + std::to_string(res->status));
    }
    ordered_json reply;
    std::vector<double> vec;
    try {
        reply = ordered_json::parse(res->body);
        if (!reply.contains("embedding") || !reply["embedding"].is_array()) {
            throw TraceError(Errc::ProviderError, "remote encoder reply missing 'embedding' array");
        }
        vec = reply["embedding"].get<std::vector<double>>();
    } catch (const ordered_json::out_of_range& e) {
        // JSON cannot encode infinities directly; an overflowing literal
        // (e.g. 1e999) is how they arrive on the wire.
        throw TraceError(Errc::NonFinite,
                         std::string("remote encoder returned a non-finite value: ") + e.what());
    } catch (const ordered_json::exception& e) {
        throw TraceError(Errc::ProviderError, std::string("remote encoder reply unparseable: ") + e.what());
    }
    if (vec.size() != static_cast<std::size_t>(cfg.remote_dimension)) {
        throw TraceError(Errc::DimensionMismatch,
                         "remote encoder returned dimension " + std::to_string(vec.size()) +
                             ", expected " + std::to_string(cfg.remote_dimension));
    }
    for (double v : vec) {
        if (!std::isfinite(v)) {
            throw TraceError(Errc::NonFinite, "remote encoder returned a non-finite value");
        }
    }
    return vec;
}

}  // namespace trace
