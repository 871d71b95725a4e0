#pragma once

#include <map>
#include <string>
#include <vector>

#include "trace/corpus.hpp"
#include "trace/dataset_ops.hpp"
#include "trace/rng.hpp"

namespace trace {

/// Token index table with reserved PAD/UNK/SEP slots. Built from the
/// training split only; out-of-vocabulary tokens map to UNK.
struct Vocabulary {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kSep = 2;
    static constexpr int kReserved = 3;

    std::map<std::string, int> token_to_index;  // indices start at kReserved

    int size() const { return static_cast<int>(token_to_index.size()) + kReserved; }
    int index_of(const std::string& token) const;
    std::vector<std::string> tokens_in_index_order() const;

    static Vocabulary build(const std::vector<LabeledPair>& train_pairs);
    static Vocabulary from_tokens(const std::vector<std::string>& tokens);
};

enum class EncoderBackend { DeskTrainable, Remote };

struct EncoderConfig {
    int max_seq_len = 512;  // alternative setting: 1024
    int embed_dim = 64;
    EncoderBackend backend = EncoderBackend::DeskTrainable;
    std::string remote_endpoint;  // Remote only
    int remote_dimension = 0;     // Remote only

    int feature_dim() const {
        return backend == EncoderBackend::Remote ? remote_dimension : embed_dim;
    }
    void validate() const;  // throws ConfigError
};

std::string_view encoder_backend_name(EncoderBackend backend);
EncoderBackend encoder_backend_from_name(std::string_view name);

/// NL: lowercase, split on non-alphanumeric runs. PL: additionally split
/// identifiers on underscores and camelCase boundaries.
std::vector<std::string> tokenize(const std::string& text, ArtifactKind kind);

/// indices(nl) ++ [SEP] ++ indices(pl), tail-truncated to max_seq_len.
std::vector<int> join_and_truncate(const std::vector<std::string>& nl_tokens,
                                   const std::vector<std::string>& pl_tokens,
                                   const Vocabulary& vocab, const EncoderConfig& cfg);

/// Row-major rows x dim matrix of trainable embeddings.
struct Embedding {
    int rows = 0;
    int dim = 0;
    std::vector<double> values;

    double* row(int i) { return values.data() + static_cast<std::size_t>(i) * dim; }
    const double* row(int i) const { return values.data() + static_cast<std::size_t>(i) * dim; }

    static Embedding init(int rows, int dim, Rng& rng);  // uniform [-0.05, 0.05]
};

/// Arithmetic mean of the embedding rows of all non-PAD positions.
std::vector<double> encode(const std::vector<int>& sequence, const Embedding& embedding);

/// POSTs the SEP-joined, locally truncated token text to cfg.remote_endpoint
/// ({"text": ...} -> {"embedding": [...]}); result is a frozen feature vector.
std::vector<double> encode_remote(const std::string& nl_text, const std::string& pl_text,
                                  const EncoderConfig& cfg);

}  // namespace trace
