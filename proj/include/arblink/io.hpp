#pragma once
// File formats: line-delimited mention/entity records, the binary
// embedding table, prediction and cluster listings, traces, and eval
// reports. Text for anything a person inspects, binary only for vectors.

#include <filesystem>
#include <string>
#include <vector>

#include "arblink/corpus.hpp"
#include "arblink/metrics.hpp"
#include "arblink/partition.hpp"

namespace arblink {

inline constexpr char kEmbeddingMagic[8] = {'A', 'R', 'B', 'E',
                                            'M', 'B', '1', '\0'};

struct CorpusPaths {
  std::filesystem::path mentions;
  std::filesystem::path entities;
  std::filesystem::path embeddings;
  static CorpusPaths in_dir(const std::filesystem::path& dir);
};

// Binary embedding table: magic, then little-endian u32 dim, u64 mention
// count, u64 entity count, then f32 rows (mentions first), row-major.
void write_store(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore read_store(const std::filesystem::path& path);

void save_corpus(const Corpus& corpus, const CorpusPaths& paths);

// Loads records + embeddings with dense ids in file order. Gold labels
// naming entities absent from the KB become held-out cluster labels.
// Distinct DataError messages for magic mismatch, count mismatch,
// duplicate ids, and non-finite values.
Corpus load_corpus(const CorpusPaths& paths, bool normalize = false);

struct PredictionRow {
  uint32_t mention = 0;                 // dense id
  std::optional<uint32_t> entity;       // nullopt = NIL
  uint32_t cluster = 0;
};

void write_predictions(const Corpus& corpus,
                       const std::vector<PredictionRow>& rows,
                       const std::filesystem::path& path);
std::vector<PredictionRow> read_predictions(const Corpus& corpus,
                                            const std::filesystem::path& path);

// cluster_index <TAB> mention id, one line per member.
void write_discovered(const Corpus& corpus,
                      const std::vector<std::vector<NodeRef>>& clusters,
                      const std::filesystem::path& path);

void write_graph(const Corpus& corpus, const WeightedDigraph& g,
                 const std::filesystem::path& path);
void write_trace(const PartitionTrace& trace, const std::filesystem::path& path);

// Flat key/value text plus a JSON twin next to it (.json appended).
void write_report(const EvalReport& report, const std::filesystem::path& path);

void write_checkpoint_meta(const std::filesystem::path& path, uint32_t epochs,
                           uint64_t config_hash,
                           const std::vector<double>& loss_history);

}  // namespace arblink
