#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "trace/corpus.hpp"
#include "trace/dataset_ops.hpp"

namespace fixtures {

/// Synthetic corpus shaped like the EBT benchmark: 40 NL requirement files,
/// 50 Java class files, 98 answer rows. All answers point at three "hot"
/// dispatcher classes whose texts carry a strong repeated token, so a
/// bag-of-words model can separate linked pairs from sampled negatives.
void write_ebt_corpus(const std::filesystem::path& dir);

/// Synthetic corpus shaped like the eTOUR benchmark: 58 NL files, 116 Java
/// class files, 308 answer rows.
void write_etour_corpus(const std::filesystem::path& dir);

/// Ingested copies of the synthetic corpora (written to a temp dir once per
/// process and cached).
const trace::TraceDataset& ebt_dataset();
const trace::TraceDataset& etour_dataset();

/// 200 labeled pairs (100 per class) that are linearly separable for a
/// mean-pooled bag-of-words model: positives carry the token "zqlink" on
/// both sides, negatives on neither.
std::vector<trace::LabeledPair> separable_pairs();

/// Small in-memory dataset: NL ids "N1..Nn", PL ids "P1..Pn" (Java), texts
/// deterministic one-liners, and the given positive links by (nl, pl) index
/// (1-based).
trace::TraceDataset tiny_dataset(int n_nl, int n_pl,
                                 const std::vector<std::pair<int, int>>& links);

/// Unique scratch directory under the system temp dir; removed and recreated
/// if it already exists.
std::filesystem::path fresh_temp_dir(const std::string& tag);

}  // namespace fixtures
