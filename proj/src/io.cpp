#include "arblink/io.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace arblink {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  return in;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

std::string format_weight(double w) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", w);
  return buf;
}

template <class T>
void put_le(std::ofstream& out, T value) {
  // x86 is little-endian; written raw on purpose.
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get_le(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

CorpusPaths CorpusPaths::in_dir(const std::filesystem::path& dir) {
  return {dir / "mentions.tsv", dir / "entities.tsv", dir / "embeddings.bin"};
}

void write_store(const EmbeddingStore& store,
                 const std::filesystem::path& path) {
  std::ofstream out = open_out(path, true);
  out.write(kEmbeddingMagic, sizeof(kEmbeddingMagic));
  put_le<uint32_t>(out, store.dim());
  put_le<uint64_t>(out, store.mention_count());
  put_le<uint64_t>(out, store.entity_count());
  for (uint32_t m = 0; m < store.mention_count(); ++m) {
    auto row = store.mention_row(m);
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size() * sizeof(float)));
  }
  for (uint32_t e = 0; e < store.entity_count(); ++e) {
    auto row = store.entity_row(e);
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size() * sizeof(float)));
  }
  if (!out) throw DataError("write failed: " + path.string());
}

EmbeddingStore read_store(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, true);
  uint64_t file_size = std::filesystem::file_size(path);

  char magic[sizeof(kEmbeddingMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kEmbeddingMagic, sizeof(magic)) != 0)
    throw DataError("embedding magic mismatch in " + path.string());

  uint32_t dim = get_le<uint32_t>(in);
  uint64_t n_mentions = get_le<uint64_t>(in);
  uint64_t n_entities = get_le<uint64_t>(in);
  if (!in) throw DataError("embedding header truncated in " + path.string());
  if (dim == 0) throw DataError("embedding dim must be positive");

  uint64_t expect = sizeof(kEmbeddingMagic) + 4 + 8 + 8 +
                    4ull * dim * (n_mentions + n_entities);
  if (file_size != expect)
    throw DataError("embedding count mismatch: file is " +
                    std::to_string(file_size) + " bytes, header implies " +
                    std::to_string(expect));

  EmbeddingStore store(dim, uint32_t(n_mentions), uint32_t(n_entities));
  for (uint64_t m = 0; m < n_mentions; ++m) {
    auto row = store.mention_row(uint32_t(m));
    in.read(reinterpret_cast<char*>(row.data()),
            std::streamsize(row.size() * sizeof(float)));
  }
  for (uint64_t e = 0; e < n_entities; ++e) {
    auto row = store.entity_row(uint32_t(e));
    in.read(reinterpret_cast<char*>(row.data()),
            std::streamsize(row.size() * sizeof(float)));
  }
  if (!in) throw DataError("embedding payload truncated in " + path.string());
  store.check_finite();
  return store;
}

void save_corpus(const Corpus& corpus, const CorpusPaths& paths) {
  {
    std::ofstream out = open_out(paths.mentions);
    for (uint32_t m = 0; m < corpus.n_mentions(); ++m) {
      const MentionRecord& rec = corpus.mentions[m];
      out << corpus.mention_names[m] << '\t' << rec.doc_id;
      if (rec.gold) {
        out << '\t'
            << (rec.gold->in_kb ? corpus.entity_names[rec.gold->index]
                                : corpus.holdout_names[rec.gold->index]);
      }
      out << '\n';
    }
  }
  {
    std::ofstream out = open_out(paths.entities);
    for (uint32_t e = 0; e < corpus.n_entities(); ++e) {
      const EntityRecord& rec = corpus.entities[e];
      out << corpus.entity_names[e] << '\t' << rec.name << '\t' << rec.metadata
          << '\n';
    }
  }
  write_store(corpus.store, paths.embeddings);
}

Corpus load_corpus(const CorpusPaths& paths, bool normalize) {
  Corpus corpus;
  std::map<std::string, uint32_t> entity_index;
  {
    std::ifstream in = open_in(paths.entities);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f = split_tabs(line);
      if (f.size() > 3)
        throw DataError("entity record has too many fields: " + line);
      uint32_t dense = uint32_t(corpus.entities.size());
      if (!entity_index.emplace(f[0], dense).second)
        throw DataError("duplicate entity id '" + f[0] + "'");
      corpus.entities.push_back(
          {dense, f.size() > 1 ? f[1] : "", f.size() > 2 ? f[2] : ""});
      corpus.entity_names.push_back(f[0]);
    }
  }
  {
    std::ifstream in = open_in(paths.mentions);
    std::map<std::string, uint32_t> mention_index;
    std::map<std::string, uint32_t> holdout_index;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f = split_tabs(line);
      if (f.size() < 2 || f.size() > 3)
        throw DataError("mention record needs 2-3 fields: " + line);
      uint32_t dense = uint32_t(corpus.mentions.size());
      if (!mention_index.emplace(f[0], dense).second)
        throw DataError("duplicate mention id '" + f[0] + "'");
      MentionRecord rec;
      rec.mention_id = dense;
      rec.doc_id = f[1];
      if (f.size() == 3 && !f[2].empty()) {
        auto it = entity_index.find(f[2]);
        if (it != entity_index.end()) {
          rec.gold = GoldRef{true, it->second};
        } else {
          auto [hit, fresh] = holdout_index.emplace(
              f[2], uint32_t(corpus.holdout_names.size()));
          if (fresh) corpus.holdout_names.push_back(f[2]);
          rec.gold = GoldRef{false, hit->second};
        }
      }
      corpus.mentions.push_back(std::move(rec));
      corpus.mention_names.push_back(f[0]);
    }
  }
  corpus.store = read_store(paths.embeddings);
  if (corpus.store.mention_count() != corpus.n_mentions() ||
      corpus.store.entity_count() != corpus.n_entities())
    throw DataError("embedding count mismatch: records " +
                    std::to_string(corpus.n_mentions()) + "m/" +
                    std::to_string(corpus.n_entities()) + "e, store " +
                    std::to_string(corpus.store.mention_count()) + "m/" +
                    std::to_string(corpus.store.entity_count()) + "e");
  if (normalize) corpus.store.l2_normalize_rows();
  corpus.validate();
  return corpus;
}

void write_predictions(const Corpus& corpus,
                       const std::vector<PredictionRow>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (const PredictionRow& r : rows) {
    out << corpus.mention_names[r.mention] << '\t'
        << (r.entity ? corpus.entity_names[*r.entity] : std::string("NIL"))
        << '\t' << r.cluster << '\n';
  }
}

std::vector<PredictionRow> read_predictions(const Corpus& corpus,
                                            const std::filesystem::path& path) {
  std::map<std::string, uint32_t> mention_index, entity_index;
  for (uint32_t m = 0; m < corpus.n_mentions(); ++m)
    mention_index[corpus.mention_names[m]] = m;
  for (uint32_t e = 0; e < corpus.n_entities(); ++e)
    entity_index[corpus.entity_names[e]] = e;

  std::ifstream in = open_in(path);
  std::vector<PredictionRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != 3)
      throw DataError("prediction row needs 3 fields: " + line);
    PredictionRow r;
    auto mit = mention_index.find(f[0]);
    if (mit == mention_index.end())
      throw DataError("prediction for unknown mention '" + f[0] + "'");
    r.mention = mit->second;
    if (f[1] != "NIL") {
      auto eit = entity_index.find(f[1]);
      if (eit == entity_index.end())
        throw DataError("prediction names unknown entity '" + f[1] + "'");
      r.entity = eit->second;
    }
    r.cluster = uint32_t(std::stoul(f[2]));
    rows.push_back(r);
  }
  return rows;
}

void write_discovered(const Corpus& corpus,
                      const std::vector<std::vector<NodeRef>>& clusters,
                      const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (size_t c = 0; c < clusters.size(); ++c)
    for (NodeRef n : clusters[c])
      out << c << '\t' << corpus.mention_names[n.id] << '\n';
}

void write_graph(const Corpus& corpus, const WeightedDigraph& g,
                 const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  auto name = [&](NodeRef n) {
    return n.is_entity() ? "e:" + corpus.entity_names[n.id]
                         : "m:" + corpus.mention_names[n.id];
  };
  for (const Edge& e : g.edges)
    out << name(e.src) << '\t' << name(e.dst) << '\t'
        << format_weight(e.weight) << '\n';
}

void write_trace(const PartitionTrace& trace,
                 const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << trace.to_text();
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  auto line = [&](const char* key, double v) {
    out << key << '\t' << format_weight(v) << '\n';
  };
  line("overall_acc", report.overall_acc);
  line("seen_acc", report.seen_acc);
  line("unseen_acc", report.unseen_acc);
  line("kb_acc", report.kb_acc);
  line("nil_acc", report.nil_acc);
  out << "n_scored\t" << report.n_scored << '\n';
  out << "n_seen\t" << report.n_seen << '\n';
  out << "n_unseen\t" << report.n_unseen << '\n';
  out << "n_kb\t" << report.n_kb << '\n';
  out << "n_nil\t" << report.n_nil << '\n';
  out << "recall_k\t" << report.recall_k << '\n';
  line("recall", report.recall);
  line("nmi", report.nmi);
  line("ari", report.ari);

  nlohmann::json j{{"overall_acc", report.overall_acc},
                   {"seen_acc", report.seen_acc},
                   {"unseen_acc", report.unseen_acc},
                   {"kb_acc", report.kb_acc},
                   {"nil_acc", report.nil_acc},
                   {"n_scored", report.n_scored},
                   {"n_seen", report.n_seen},
                   {"n_unseen", report.n_unseen},
                   {"n_kb", report.n_kb},
                   {"n_nil", report.n_nil},
                   {"recall_k", report.recall_k},
                   {"recall", report.recall},
                   {"nmi", report.nmi},
                   {"ari", report.ari}};
  std::ofstream jout = open_out(path.string() + ".json");
  jout << j.dump(2) << '\n';
}

void write_checkpoint_meta(const std::filesystem::path& path, uint32_t epochs,
                           uint64_t config_hash,
                           const std::vector<double>& loss_history) {
  nlohmann::json j{{"epochs", epochs},
                   {"config_hash", config_hash},
                   {"loss_history", loss_history}};
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace arblink
