#pragma once

#include <string>
#include <vector>

#include "lexvar/matrix.hpp"

namespace fixture {

/// Count matrix from dense per-document rows of word counts.
inline lexvar::TermDocMatrix dense_counts(const std::vector<std::vector<lexvar::Count>>& by_doc) {
  using namespace lexvar;
  const std::size_t n = by_doc.front().size();
  std::vector<std::string> words, ids;
  for (std::size_t w = 0; w < n; ++w) words.push_back("w" + std::to_string(w));
  std::vector<Count> lengths;
  std::vector<Triplet> trip;
  for (std::size_t d = 0; d < by_doc.size(); ++d) {
    ids.push_back("d" + std::to_string(d));
    Count len = 0;
    for (std::size_t w = 0; w < n; ++w) {
      len += by_doc[d][w];
      if (by_doc[d][w]) trip.push_back({static_cast<WordId>(w), static_cast<DocId>(d), by_doc[d][w]});
    }
    lengths.push_back(len);
  }
  return TermDocMatrix(words, ids, lengths, trip);
}

}  // namespace fixture
