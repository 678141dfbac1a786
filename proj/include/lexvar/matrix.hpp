#pragma once

// Sparse word-by-document count matrix and its frequency view.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lexvar/corpus.hpp"
#include "lexvar/error.hpp"
#include "lexvar/io.hpp"
#include "lexvar/parallel.hpp"

namespace lexvar {

using DocId = std::uint32_t;
using Count = std::uint64_t;

/// Nonzero entry of a document column.
struct ColumnEntry {
  WordId word;
  Count count;
};

/// Nonzero entry of a word row.
struct RowEntry {
  DocId doc;
  Count count;
};

struct Triplet {
  WordId word;
  DocId doc;
  Count count;
};

/// N x B matrix of counts n(w, b), stored both column- and row-compressed.
///
/// doc_length(b) is T_b, the full length of document b. For a matrix built
/// straight from a corpus each column sums to T_b; after restrict_top the
/// columns sum to the kept words' share and doc lengths are left untouched.
class TermDocMatrix {
public:
  TermDocMatrix() = default;

  TermDocMatrix(std::vector<std::string> words, std::vector<std::string> doc_ids,
                std::vector<Count> doc_lengths, std::vector<Triplet> triplets)
      : words_(std::move(words)), doc_ids_(std::move(doc_ids)), doc_lengths_(std::move(doc_lengths)) {
    const std::size_t n = words_.size();
    const std::size_t b = doc_ids_.size();
    if (doc_lengths_.size() != b) throw Error("doc_lengths size does not match document count");

    std::sort(triplets.begin(), triplets.end(), [](const Triplet& x, const Triplet& y) {
      return x.doc != y.doc ? x.doc < y.doc : x.word < y.word;
    });
    col_offsets_.assign(b + 1, 0);
    std::vector<std::size_t> row_nnz(n, 0);
    word_totals_.assign(n, 0);
    column_totals_.assign(b, 0);
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      const auto& t = triplets[i];
      if (t.word >= n || t.doc >= b) throw Error("triplet index out of range");
      if (i > 0 && triplets[i - 1].doc == t.doc && triplets[i - 1].word == t.word)
        throw Error("duplicate triplet");
      if (t.count == 0) continue;
      columns_.push_back({t.word, t.count});
      ++col_offsets_[t.doc + 1];
      ++row_nnz[t.word];
      word_totals_[t.word] += t.count;
      column_totals_[t.doc] += t.count;
    }
    std::partial_sum(col_offsets_.begin(), col_offsets_.end(), col_offsets_.begin());
    for (std::size_t d = 0; d < b; ++d)
      if (column_totals_[d] > doc_lengths_[d])
        throw Error("column " + doc_ids_[d] + " holds more tokens than its document length");

    row_offsets_.assign(n + 1, 0);
    for (std::size_t w = 0; w < n; ++w) row_offsets_[w + 1] = row_offsets_[w] + row_nnz[w];
    rows_.resize(columns_.size());
    std::vector<std::size_t> cursor(row_offsets_.begin(), row_offsets_.end() - 1);
    for (std::size_t d = 0; d < b; ++d)
      for (std::size_t k = col_offsets_[d]; k < col_offsets_[d + 1]; ++k)
        rows_[cursor[columns_[k].word]++] = {static_cast<DocId>(d), columns_[k].count};
  }

  std::size_t num_words() const noexcept { return words_.size(); }
  std::size_t num_documents() const noexcept { return doc_ids_.size(); }
  std::size_t nonzeros() const noexcept { return columns_.size(); }

  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }
  const std::vector<Count>& doc_lengths() const noexcept { return doc_lengths_; }
  const std::vector<Count>& word_totals() const noexcept { return word_totals_; }
  /// Sum of stored counts in column b (equals T_b unless restricted).
  const std::vector<Count>& column_totals() const noexcept { return column_totals_; }

  /// T = sum of document lengths.
  Count total_tokens() const noexcept {
    return std::accumulate(doc_lengths_.begin(), doc_lengths_.end(), Count{0});
  }

  std::span<const ColumnEntry> column(std::size_t doc) const {
    return {columns_.data() + col_offsets_[doc], col_offsets_[doc + 1] - col_offsets_[doc]};
  }
  std::span<const RowEntry> row(std::size_t word) const {
    return {rows_.data() + row_offsets_[word], row_offsets_[word + 1] - row_offsets_[word]};
  }

  Count count(std::size_t word, std::size_t doc) const {
    auto col = column(doc);
    auto it = std::lower_bound(col.begin(), col.end(), word,
                               [](const ColumnEntry& e, std::size_t w) { return e.word < w; });
    return (it != col.end() && it->word == word) ? it->count : 0;
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(nonzeros());
    for (std::size_t d = 0; d < num_documents(); ++d)
      for (const auto& e : column(d)) out.push_back({e.word, static_cast<DocId>(d), e.count});
    return out;
  }

  friend bool operator==(const TermDocMatrix& a, const TermDocMatrix& b) {
    return a.words_ == b.words_ && a.doc_ids_ == b.doc_ids_ && a.doc_lengths_ == b.doc_lengths_ &&
           a.col_offsets_ == b.col_offsets_ &&
           std::equal(a.columns_.begin(), a.columns_.end(), b.columns_.begin(), b.columns_.end(),
                      [](const ColumnEntry& x, const ColumnEntry& y) {
                        return x.word == y.word && x.count == y.count;
                      });
  }

private:
  std::vector<std::string> words_;
  std::vector<std::string> doc_ids_;
  std::vector<Count> doc_lengths_;
  std::vector<Count> word_totals_;
  std::vector<Count> column_totals_;
  std::vector<std::size_t> col_offsets_;
  std::vector<ColumnEntry> columns_;
  std::vector<std::size_t> row_offsets_;
  std::vector<RowEntry> rows_;
};

/// Exact counts n(w, b) for every document of the corpus.
inline TermDocMatrix count_matrix(const Corpus& corpus) {
  const auto& docs = corpus.documents();
  std::vector<std::vector<Triplet>> per_doc(docs.size());
  parallel_for(docs.size(), [&](std::size_t d) {
    std::vector<WordId> sorted = docs[d].tokens;
    std::sort(sorted.begin(), sorted.end());
    auto& out = per_doc[d];
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      out.push_back({sorted[i], static_cast<DocId>(d), static_cast<Count>(j - i)});
      i = j;
    }
  });
  std::vector<Triplet> triplets;
  for (auto& v : per_doc) triplets.insert(triplets.end(), v.begin(), v.end());

  std::vector<std::string> ids;
  std::vector<Count> lengths;
  ids.reserve(docs.size());
  lengths.reserve(docs.size());
  for (const auto& d : docs) {
    ids.push_back(d.id);
    lengths.push_back(d.length());
  }
  return TermDocMatrix(corpus.vocabulary().words(), std::move(ids), std::move(lengths),
                       std::move(triplets));
}

/// Word indices ordered by descending total count; ties go to the lower index.
inline std::vector<WordId> words_by_total(const TermDocMatrix& m) {
  std::vector<WordId> order(m.num_words());
  std::iota(order.begin(), order.end(), WordId{0});
  const auto& totals = m.word_totals();
  std::stable_sort(order.begin(), order.end(),
                   [&](WordId a, WordId b) { return totals[a] > totals[b]; });
  return order;
}

struct Restriction {
  TermDocMatrix matrix;
  /// new row -> original word index
  std::vector<WordId> kept;
  /// original word index -> new row, if kept
  std::vector<std::optional<WordId>> old_to_new;
};

/// Keeps the `m` most frequent words, in their original relative order.
/// Document lengths are preserved, so frequencies keep their denominators.
inline Restriction restrict_top(const TermDocMatrix& matrix, std::size_t m) {
  if (m == 0) throw Error("restrict_top: m must be positive");
  if (m > matrix.num_words())
    throw Error("restrict_top: m = " + std::to_string(m) + " exceeds vocabulary size " +
                std::to_string(matrix.num_words()));
  auto order = words_by_total(matrix);
  order.resize(m);
  std::sort(order.begin(), order.end());

  Restriction r;
  r.kept = order;
  r.old_to_new.assign(matrix.num_words(), std::nullopt);
  std::vector<std::string> words;
  words.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    r.old_to_new[order[i]] = static_cast<WordId>(i);
    words.push_back(matrix.words()[order[i]]);
  }
  std::vector<Triplet> triplets;
  for (std::size_t d = 0; d < matrix.num_documents(); ++d)
    for (const auto& e : matrix.column(d))
      if (auto nw = r.old_to_new[e.word]) triplets.push_back({*nw, static_cast<DocId>(d), e.count});
  r.matrix = TermDocMatrix(std::move(words), matrix.doc_ids(), matrix.doc_lengths(), std::move(triplets));
  return r;
}

/// Read-only view of frequencies x(w, b) = n(w, b) / T_b.
///
/// Documents with T_b = 0 have no defined frequencies; they read as zero and
/// are reported by is_empty() so statistics can leave them out.
class FrequencyView {
public:
  explicit FrequencyView(const TermDocMatrix& matrix) : matrix_(&matrix) {
    for (std::size_t d = 0; d < matrix.num_documents(); ++d)
      if (matrix.doc_lengths()[d] == 0) empty_docs_.push_back(static_cast<DocId>(d));
  }

  const TermDocMatrix& matrix() const noexcept { return *matrix_; }

  double operator()(std::size_t word, std::size_t doc) const {
    const Count len = matrix_->doc_lengths()[doc];
    return len == 0 ? 0.0 : static_cast<double>(matrix_->count(word, doc)) / static_cast<double>(len);
  }

  bool is_empty(std::size_t doc) const { return matrix_->doc_lengths()[doc] == 0; }
  const std::vector<DocId>& empty_documents() const noexcept { return empty_docs_; }
  std::size_t num_nonempty_documents() const noexcept {
    return matrix_->num_documents() - empty_docs_.size();
  }

  /// Sum of x(., b); 1 for an unrestricted nonempty column.
  double column_sum(std::size_t doc) const {
    const Count len = matrix_->doc_lengths()[doc];
    if (len == 0) return 0.0;
    double s = 0;
    for (const auto& e : matrix_->column(doc)) s += static_cast<double>(e.count) / static_cast<double>(len);
    return s;
  }

private:
  const TermDocMatrix* matrix_;
  std::vector<DocId> empty_docs_;
};

// Serialization: matrix.mtx holds 1-based (word, doc, count) triples in
// MatrixMarket coordinate form; vocab.csv and docs.csv carry the labels.

inline void write_matrix(const TermDocMatrix& m, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "matrix.mtx", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / "matrix.mtx").string());
    out << "%%MatrixMarket matrix coordinate integer general\n"
        << "% rows are words (vocab.csv), columns are documents (docs.csv)\n"
        << m.num_words() << ' ' << m.num_documents() << ' ' << m.nonzeros() << '\n';
    for (std::size_t d = 0; d < m.num_documents(); ++d)
      for (const auto& e : m.column(d)) out << e.word + 1 << ' ' << d + 1 << ' ' << e.count << '\n';
    if (!out) throw Error("write failed: " + (dir / "matrix.mtx").string());
  }
  io::CsvWriter vocab(dir / "vocab.csv");
  vocab.row("index", "word", "total");
  for (std::size_t w = 0; w < m.num_words(); ++w) vocab.row(w, m.words()[w], m.word_totals()[w]);
  vocab.close();
  io::CsvWriter docs(dir / "docs.csv");
  docs.row("index", "id", "length");
  for (std::size_t d = 0; d < m.num_documents(); ++d) docs.row(d, m.doc_ids()[d], m.doc_lengths()[d]);
  docs.close();
}

inline TermDocMatrix read_matrix(const std::filesystem::path& dir) {
  auto vocab_rows = io::read_csv(dir / "vocab.csv");
  auto doc_rows = io::read_csv(dir / "docs.csv");
  if (vocab_rows.empty() || doc_rows.empty()) throw Error("missing header in " + dir.string());
  std::vector<std::string> words;
  for (std::size_t i = 1; i < vocab_rows.size(); ++i) {
    if (vocab_rows[i].size() < 2) throw Error("malformed vocab.csv row " + std::to_string(i));
    words.push_back(vocab_rows[i][1]);
  }
  std::vector<std::string> ids;
  std::vector<Count> lengths;
  for (std::size_t i = 1; i < doc_rows.size(); ++i) {
    if (doc_rows[i].size() < 3) throw Error("malformed docs.csv row " + std::to_string(i));
    ids.push_back(doc_rows[i][1]);
    lengths.push_back(io::parse_int<Count>(doc_rows[i][2]));
  }

  std::ifstream in(dir / "matrix.mtx", std::ios::binary);
  if (!in) throw Error("cannot open " + (dir / "matrix.mtx").string());
  std::string line;
  std::size_t rows = 0, cols = 0, nnz = 0;
  bool have_size = false;
  std::vector<Triplet> triplets;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    if (!have_size) {
      if (!(ls >> rows >> cols >> nnz)) throw Error("malformed matrix.mtx size line");
      have_size = true;
      triplets.reserve(nnz);
      continue;
    }
    std::size_t w = 0, d = 0;
    Count c = 0;
    if (!(ls >> w >> d >> c) || w == 0 || d == 0) throw Error("malformed matrix.mtx entry: " + line);
    triplets.push_back({static_cast<WordId>(w - 1), static_cast<DocId>(d - 1), c});
  }
  if (rows != words.size() || cols != ids.size() || nnz != triplets.size())
    throw Error("matrix.mtx dimensions disagree with vocab.csv/docs.csv");
  return TermDocMatrix(std::move(words), std::move(ids), std::move(lengths), std::move(triplets));
}

}  // namespace lexvar
