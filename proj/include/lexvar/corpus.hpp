#pragma once

// Text ingestion: tokenizer, vocabulary and the document collection.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "lexvar/error.hpp"
#include "lexvar/io.hpp"
#include "lexvar/parallel.hpp"

namespace lexvar {

using WordId = std::uint32_t;

namespace detail {

inline bool is_hyphen(UChar32 c) { return c == 0x2D || c == 0x2010; }

inline bool is_mark(UChar32 c) {
  auto cat = u_charType(c);
  return cat == U_NON_SPACING_MARK || cat == U_COMBINING_SPACING_MARK;
}

inline void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  std::int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, c);
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace detail

/// Splits UTF-8 text into lowercase word tokens.
///
/// A token is a maximal run of Unicode alphabetic characters, optionally
/// joined by single internal hyphens ("кто-то"). Combining marks attached to
/// a letter stay with it. Any run that touches a decimal digit ("1990-х",
/// "mp3") is dropped as a whole. Everything else separates tokens. Case is
/// folded with the simple lowercase mapping only, so "ё" stays "ё".
///
/// Throws IngestError with the byte offset of the first ill-formed sequence;
/// `source` names the input in the message.
inline std::vector<std::string> tokenize(std::string_view text, std::string_view source = {}) {
  std::vector<std::string> tokens;
  std::string word;
  bool has_digit = false;
  bool pending_hyphen = false;
  bool prev_letter = false;

  auto flush = [&] {
    if (!has_digit && !word.empty()) tokens.push_back(std::move(word));
    word.clear();
    has_digit = false;
    pending_hyphen = false;
    prev_letter = false;
  };

  const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < length) {
    const std::int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) throw IngestError(std::string(source), static_cast<std::size_t>(start), "invalid UTF-8");

    if (u_isUAlphabetic(c) || (prev_letter && detail::is_mark(c))) {
      if (pending_hyphen && !word.empty()) word += '-';
      pending_hyphen = false;
      detail::append_utf8(word, u_tolower(c));
      prev_letter = true;
    } else if (u_isdigit(c)) {
      has_digit = true;
      pending_hyphen = false;
      prev_letter = false;
    } else if (detail::is_hyphen(c)) {
      if (pending_hyphen) {
        flush();
      } else if (!word.empty() || has_digit) {
        pending_hyphen = true;
      }
      prev_letter = false;
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

/// Distinct word types in first-occurrence order.
class Vocabulary {
public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words) {
    for (auto& w : words) {
      if (!index_.emplace(w, static_cast<WordId>(words_.size())).second)
        throw Error("duplicate vocabulary word '" + w + "'");
      words_.push_back(std::move(w));
    }
  }

  /// Index of `word`, appending it if unseen.
  WordId add(std::string_view word) {
    auto it = index_.find(std::string(word));
    if (it != index_.end()) return it->second;
    auto id = static_cast<WordId>(words_.size());
    words_.emplace_back(word);
    index_.emplace(words_.back(), id);
    return id;
  }

  std::optional<WordId> find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& word(WordId id) const { return words_.at(id); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::size_t size() const noexcept { return words_.size(); }

private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
};

struct Document {
  std::string id;
  std::vector<WordId> tokens;

  std::size_t length() const noexcept { return tokens.size(); }
};

/// Immutable document collection over a shared vocabulary.
class Corpus {
public:
  Corpus() = default;

  Corpus(std::vector<Document> documents, Vocabulary vocabulary)
      : documents_(std::move(documents)), vocabulary_(std::move(vocabulary)) {
    std::unordered_set<std::string_view> ids;
    for (const auto& d : documents_) {
      if (!ids.insert(d.id).second) throw Error("duplicate document id '" + d.id + "'");
      for (WordId w : d.tokens)
        if (w >= vocabulary_.size())
          throw Error("document '" + d.id + "' references word index outside the vocabulary");
      total_tokens_ += d.length();
    }
  }

  const std::vector<Document>& documents() const noexcept { return documents_; }
  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  std::size_t num_documents() const noexcept { return documents_.size(); }
  std::size_t num_words() const noexcept { return vocabulary_.size(); }
  std::size_t total_tokens() const noexcept { return total_tokens_; }

private:
  std::vector<Document> documents_;
  Vocabulary vocabulary_;
  std::size_t total_tokens_ = 0;
};

/// One input text. `origin` (usually a file path) is used in error messages.
struct Source {
  std::string id;
  std::string text;
  std::string origin;
};

/// Tokenizes every source (concurrently) and assigns vocabulary indices in
/// source order.
inline Corpus build_corpus(std::span<const Source> sources) {
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& s : sources)
      if (!seen.insert(s.id).second) throw Error("duplicate document id '" + s.id + "'");
  }
  std::vector<std::vector<std::string>> tokenized(sources.size());
  parallel_for(sources.size(), [&](std::size_t i) {
    const auto& src = sources[i];
    tokenized[i] = tokenize(src.text, src.origin.empty() ? src.id : src.origin);
  });

  Vocabulary vocab;
  std::vector<Document> docs;
  docs.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    Document d{sources[i].id, {}};
    d.tokens.reserve(tokenized[i].size());
    for (const auto& tok : tokenized[i]) d.tokens.push_back(vocab.add(tok));
    docs.push_back(std::move(d));
  }
  return Corpus(std::move(docs), std::move(vocab));
}

/// Reads a manifest of `id<TAB>path` lines. Relative paths resolve against
/// the manifest's directory; blank lines are ignored.
inline std::vector<Source> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw IngestError(manifest.string(), 0, "cannot open manifest");
  const auto base = manifest.parent_path();
  std::vector<Source> sources;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw Error(manifest.string() + ":" + std::to_string(lineno) + ": expected 'id<TAB>path'");
    std::filesystem::path p = line.substr(tab + 1);
    if (p.is_relative()) p = base / p;
    Source src{line.substr(0, tab), {}, p.string()};
    try {
      src.text = io::read_file(p);
    } catch (const Error&) {
      throw IngestError(p.string(), 0, "cannot read file");
    }
    sources.push_back(std::move(src));
  }
  return sources;
}

/// Every regular, non-hidden file in `dir`, in lexicographic filename order.
/// The filename is the document id.
inline std::vector<Source> scan_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (name.empty() || name.front() == '.') continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  std::vector<Source> sources;
  sources.reserve(files.size());
  for (const auto& f : files) sources.push_back({f.filename().string(), io::read_file(f), f.string()});
  return sources;
}

/// Writes each document as space-joined tokens under `dir/docs/` plus a
/// `manifest.tsv` that read_manifest can load back.
inline void write_text_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "docs");
  std::string manifest;
  const auto& words = corpus.vocabulary().words();
  for (const auto& d : corpus.documents()) {
    std::string text;
    for (std::size_t t = 0; t < d.tokens.size(); ++t) {
      if (t) text += (t % 20 == 0) ? '\n' : ' ';
      text += words[d.tokens[t]];
    }
    text += '\n';
    auto rel = fs::path("docs") / (d.id + ".txt");
    io::write_file(dir / rel, text);
    manifest += d.id + '\t' + rel.generic_string() + '\n';
  }
  io::write_file(dir / "manifest.tsv", manifest);
}

}  // namespace lexvar
