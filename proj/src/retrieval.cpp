#include "longeval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "longeval/errors.hpp"
#include "longeval/strings.hpp"

namespace longeval {

namespace {

// Little-endian primitives for the canonical index layout.
void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw Error("index file truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

double get_f64(std::istream& in) {
  std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& in) {
  std::uint64_t n = get_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw Error("index file truncated");
  return s;
}

constexpr char kMagic[8] = {'L', 'E', 'V', 'I', 'D', 'X', '0', '1'};

}  // namespace

Bm25Index Bm25Index::build(std::vector<Passage> passages, Bm25Params params) {
  if (passages.empty()) {
    throw Error("build_index: passage list is empty");
  }
  Bm25Index index;
  index.params_ = params;
  index.passages_ = std::move(passages);
  std::sort(index.passages_.begin(), index.passages_.end(),
            [](const Passage& a, const Passage& b) {
              return a.ordinal < b.ordinal;
            });
  for (std::size_t i = 0; i < index.passages_.size(); ++i) {
    if (index.passages_[i].ordinal != i) {
      throw Error("build_index: passage ordinals must be 0..N-1");
    }
  }
  index.doc_lengths_.resize(index.passages_.size());
  for (const Passage& p : index.passages_) {
    const auto terms = strings::alnum_terms(p.text);
    index.doc_lengths_[p.ordinal] = terms.size();
    std::map<std::string, std::size_t> tf;
    for (const std::string& t : terms) ++tf[t];
    for (const auto& [term, count] : tf) {
      index.postings_[term].push_back(Posting{p.ordinal, count});
    }
  }
  index.finalize();
  return index;
}

void Bm25Index::finalize() {
  for (auto& [term, plist] : postings_) {
    std::sort(plist.begin(), plist.end(),
              [](const Posting& a, const Posting& b) {
                return a.ordinal < b.ordinal;
              });
  }
  avg_doc_length_ =
      doc_lengths_.empty()
          ? 0.0
          : static_cast<double>(std::accumulate(doc_lengths_.begin(),
                                                doc_lengths_.end(),
                                                std::size_t{0})) /
                static_cast<double>(doc_lengths_.size());
}

const std::vector<Posting>* Bm25Index::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

double Bm25Index::score(const std::vector<std::string>& query_terms,
                        std::size_t ordinal) const {
  if (ordinal >= passages_.size()) {
    throw Error("score: passage ordinal out of range");
  }
  const double n_docs = static_cast<double>(passages_.size());
  const double len = static_cast<double>(doc_lengths_[ordinal]);
  double total = 0.0;
  for (const std::string& term : query_terms) {
    const auto* plist = postings(term);
    if (plist == nullptr) continue;  // unknown term contributes 0
    const auto it = std::lower_bound(
        plist->begin(), plist->end(), ordinal,
        [](const Posting& p, std::size_t o) { return p.ordinal < o; });
    if (it == plist->end() || it->ordinal != ordinal) continue;
    const double tf = static_cast<double>(it->tf);
    const double df = static_cast<double>(plist->size());
    const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
    const double norm =
        1.0 - params_.b + params_.b * len / avg_doc_length_;
    total += idf * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
  }
  return total;
}

double Bm25Index::score(std::string_view query, std::size_t ordinal) const {
  return score(strings::alnum_terms(query), ordinal);
}

void Bm25Index::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write index file: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_f64(out, params_.k1);
  put_f64(out, params_.b);
  put_u64(out, passages_.size());
  for (const Passage& p : passages_) {
    put_str(out, p.book_id);
    put_u64(out, p.start);
    put_u64(out, p.end);
    put_u64(out, p.token_count);
    put_str(out, p.text);
  }
  for (std::size_t len : doc_lengths_) put_u64(out, len);
  put_u64(out, postings_.size());
  for (const auto& [term, plist] : postings_) {  // std::map: sorted terms
    put_str(out, term);
    put_u64(out, plist.size());
    for (const Posting& p : plist) {
      put_u64(out, p.ordinal);
      put_u64(out, p.tf);
    }
  }
  if (!out) throw Error("failed writing index file: " + path);
}

Bm25Index Bm25Index::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read index file: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error("not an index file (bad magic): " + path);
  }
  Bm25Index index;
  index.params_.k1 = get_f64(in);
  index.params_.b = get_f64(in);
  const std::uint64_t n = get_u64(in);
  index.passages_.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Passage& p = index.passages_[i];
    p.book_id = get_str(in);
    p.ordinal = i;
    p.start = get_u64(in);
    p.end = get_u64(in);
    p.token_count = get_u64(in);
    p.text = get_str(in);
  }
  index.doc_lengths_.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) index.doc_lengths_[i] = get_u64(in);
  const std::uint64_t n_terms = get_u64(in);
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    std::string term = get_str(in);
    const std::uint64_t n_postings = get_u64(in);
    std::vector<Posting> plist(n_postings);
    for (std::uint64_t i = 0; i < n_postings; ++i) {
      plist[i].ordinal = get_u64(in);
      plist[i].tf = get_u64(in);
    }
    index.postings_.emplace(std::move(term), std::move(plist));
  }
  index.finalize();
  return index;
}

std::string ContextBundle::text() const {
  std::string out;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    if (i > 0) out.append("\n\n");
    out.append(strings::trim(passages[i].text));
  }
  return out;
}

ContextBundle retrieve(const Bm25Index& index, std::string_view query,
                       std::size_t budget_tokens) {
  const auto query_terms = strings::alnum_terms(query);

  struct Ranked {
    double score;
    std::size_t ordinal;
  };
  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < index.passage_count(); ++i) {
    const double s = index.score(query_terms, i);
    if (s > 0.0) ranked.push_back(Ranked{s, i});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.ordinal < b.ordinal;
  });

  ContextBundle bundle;
  bundle.budget = budget_tokens;
  std::vector<std::size_t> selected;
  for (const Ranked& r : ranked) {
    const std::size_t cost = index.passage(r.ordinal).token_count;
    if (bundle.total_tokens + cost > budget_tokens) continue;  // skip, try next
    bundle.total_tokens += cost;
    selected.push_back(r.ordinal);
  }
  std::sort(selected.begin(), selected.end());
  bundle.passages.reserve(selected.size());
  for (std::size_t ordinal : selected) {
    bundle.passages.push_back(index.passage(ordinal));
  }
  return bundle;
}

}  // namespace longeval
