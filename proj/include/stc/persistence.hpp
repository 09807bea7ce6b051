#pragma once

// Single-file bundle format. All integers and floats are little-endian.
//
//   "STCB"                     magic
//   u32                        format version
//   section*                   tag[4] u64 length payload
//       MANI  manifest, UTF-8 JSON
//       CORP  corpus records
//       TFTI  title TF-IDF index
//       TFBO  body TF-IDF index
//       PVTI  title paragraph-vector model, f32 row-major matrices
//   u32                        CRC-32 of every preceding byte
//
// Strings are u32 length + bytes. Sparse vectors are u64 count followed by
// (u32 term id, f64 weight) pairs.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "stc/bundle.hpp"
#include "stc/config.hpp"
#include "stc/error.hpp"

namespace stc {

inline constexpr std::array<char, 4> kBundleMagic = {'S', 'T', 'C', 'B'};

namespace io {

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }

  /// Appends a tagged, length-prefixed section.
  void section(std::string_view tag, const Writer& payload) {
    raw(tag);
    u64(payload.bytes_.size());
    bytes_.insert(bytes_.end(), payload.bytes_.begin(), payload.bytes_.end());
  }

  std::vector<std::uint8_t>& bytes() noexcept { return bytes_; }

 private:
  template <typename U>
  void put_le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u32();
    auto s = take(n);
    return {reinterpret_cast<const char*>(s.data()), s.size()};
  }

  /// Reads a section header, checks the tag and returns a reader over its payload.
  Reader section(std::string_view tag) {
    auto t = take(4);
    if (std::memcmp(t.data(), tag.data(), 4) != 0) {
      throw Error(ErrorCode::CorruptBundle, "expected section " + std::string(tag));
    }
    return Reader(take(u64()));
  }

  /// Guards count-driven allocations against corrupt lengths.
  std::uint64_t count(std::uint64_t min_bytes_each) {
    const auto n = u64();
    if (min_bytes_each > 0 && n > remaining() / min_bytes_each) {
      throw Error(ErrorCode::CorruptBundle, "element count exceeds payload");
    }
    return n;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  bool done() const noexcept { return pos_ == bytes_.size(); }

  std::span<const std::uint8_t> take(std::uint64_t n) {
    if (n > remaining()) throw Error(ErrorCode::CorruptBundle, "truncated payload");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  template <typename U>
  U get_le() {
    auto s = take(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(s[i]) << (8 * i);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const auto n = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

inline void write_vocabulary(Writer& w, const Vocabulary& v) {
  w.u64(v.size());
  for (TermId t = 0; t < v.size(); ++t) {
    w.str(v.term(t));
    w.u64(v.count(t));
  }
}

inline Vocabulary read_vocabulary(Reader& r) {
  Vocabulary v;
  const auto n = r.count(12);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string term = r.str();
    const auto count = r.u64();
    if (v.find(term)) throw Error(ErrorCode::CorruptBundle, "duplicate vocabulary term");
    v.add(std::move(term), count);
  }
  return v;
}

inline Writer encode_corpus(const Corpus& c) {
  Writer w;
  w.str(c.source_label);
  w.str(c.ingested_at);
  w.u64(c.posts.size());
  for (const auto& p : c.posts) {
    w.str(p.id);
    w.str(p.title);
    w.str(p.body);
    w.str(p.created_at);
    w.u64(p.comments.size());
    for (const auto& cm : p.comments) {
      w.str(cm.text);
      w.u64(cm.likes);
      w.u64(cm.dislikes);
    }
  }
  return w;
}

inline Corpus decode_corpus(Reader r) {
  Corpus c;
  c.source_label = r.str();
  c.ingested_at = r.str();
  const auto n = r.count(24);
  c.posts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Post p;
    p.id = r.str();
    p.title = r.str();
    p.body = r.str();
    p.created_at = r.str();
    const auto nc = r.count(20);
    for (std::uint64_t k = 0; k < nc; ++k) {
      Comment cm;
      cm.text = r.str();
      cm.likes = r.u64();
      cm.dislikes = r.u64();
      p.comments.push_back(std::move(cm));
    }
    p.corpus_ordinal = c.posts.size();
    c.posts.push_back(std::move(p));
  }
  if (!r.done()) throw Error(ErrorCode::CorruptBundle, "trailing bytes in corpus section");
  return c;
}

inline Writer encode_tfidf(const TfIdfIndex& index) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(index.field()));
  w.u64(index.n_docs());
  write_vocabulary(w, index.vocabulary());
  for (const auto& v : index.doc_vectors()) {
    w.u64(v.size());
    for (const auto& e : v.entries) {
      w.u32(e.id);
      w.f64(e.weight);
    }
  }
  return w;
}

inline TfIdfIndex decode_tfidf(Reader r) {
  const auto field = r.u8();
  if (field > 1) throw Error(ErrorCode::CorruptBundle, "unknown text field");
  const auto n_docs = r.u64();
  Vocabulary vocab = read_vocabulary(r);
  std::vector<SparseVector> docs;
  for (std::uint64_t d = 0; d < n_docs; ++d) {
    SparseVector v;
    const auto nnz = r.count(12);
    v.entries.reserve(nnz);
    for (std::uint64_t k = 0; k < nnz; ++k) {
      SparseEntry e{r.u32(), r.f64()};
      if (e.id >= vocab.size() || (!v.entries.empty() && e.id <= v.entries.back().id)) {
        throw Error(ErrorCode::CorruptBundle, "sparse vector term ids out of order or range");
      }
      v.entries.push_back(e);
    }
    docs.push_back(std::move(v));
  }
  if (!r.done()) throw Error(ErrorCode::CorruptBundle, "trailing bytes in TF-IDF section");
  return TfIdfIndex(static_cast<TextField>(field), std::move(vocab), std::move(docs));
}

inline Writer encode_pv(const PvModel& m) {
  Writer w;
  write_vocabulary(w, m.vocabulary());
  w.u64(m.doc_vectors().rows());
  w.u64(m.dim());
  for (float x : m.doc_vectors().data()) w.f32(x);
  for (float x : m.word_output_vectors().data()) w.f32(x);
  return w;
}

inline PvModel decode_pv(Reader r, const PvConfig& config) {
  Vocabulary vocab = read_vocabulary(r);
  const auto rows = r.u64();
  const auto dim = r.u64();
  if (dim != config.dim) throw Error(ErrorCode::CountMismatch, "PV dimension disagrees with manifest");
  const auto need = (rows + vocab.size()) * dim * 4;
  if (dim == 0 || need / dim / 4 != rows + vocab.size() || need != r.remaining()) {
    throw Error(ErrorCode::CorruptBundle, "PV matrix size disagrees with payload");
  }
  auto read_matrix = [&](std::uint64_t n) {
    std::vector<float> data(n * dim);
    for (float& x : data) x = r.f32();
    return Matrix<float>(n, dim, std::move(data));
  };
  Matrix<float> docs = read_matrix(rows);
  Matrix<float> words = read_matrix(vocab.size());
  return PvModel(config, std::move(vocab), std::move(docs), std::move(words));
}

}  // namespace io

/// Serializes the bundle as written; the manifest is taken from `bundle.manifest` verbatim.
inline std::vector<std::uint8_t> encode_bundle(const IndexBundle& bundle) {
  io::Writer w;
  w.raw({kBundleMagic.data(), kBundleMagic.size()});
  w.u32(bundle.manifest.format_version);
  io::Writer manifest;
  manifest.raw(to_json(bundle.manifest).dump());
  w.section("MANI", manifest);
  w.section("CORP", io::encode_corpus(bundle.corpus));
  w.section("TFTI", io::encode_tfidf(bundle.tfidf_title));
  w.section("TFBO", io::encode_tfidf(bundle.tfidf_body));
  w.section("PVTI", io::encode_pv(bundle.pv_title));
  w.u32(io::crc32_of(w.bytes()));
  return std::move(w.bytes());
}

inline IndexBundle decode_bundle(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw Error(ErrorCode::ChecksumMismatch, "file too short");
  if (std::memcmp(bytes.data(), kBundleMagic.data(), 4) != 0) {
    throw Error(ErrorCode::UnsupportedVersion, "not a bundle file (bad magic)");
  }
  io::Reader header(bytes.subspan(4, 4));
  const auto version = header.u32();
  if (version != kBundleFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "format version " + std::to_string(version));
  }
  const auto body = bytes.first(bytes.size() - 4);
  io::Reader trailer(bytes.last(4));
  if (trailer.u32() != io::crc32_of(body)) throw Error(ErrorCode::ChecksumMismatch, "CRC-32 mismatch");

  io::Reader r(body.subspan(8));
  IndexBundle b;
  {
    auto manifest = r.section("MANI");
    auto text = manifest.take(manifest.remaining());
    json j;
    try {
      j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::CorruptBundle, std::string("manifest: ") + e.what());
    }
    b.manifest = manifest_from_json(j);
  }
  if (b.manifest.format_version != version) {
    throw Error(ErrorCode::UnsupportedVersion, "manifest version disagrees with header");
  }
  b.corpus = io::decode_corpus(r.section("CORP"));
  b.tfidf_title = io::decode_tfidf(r.section("TFTI"));
  b.tfidf_body = io::decode_tfidf(r.section("TFBO"));
  b.pv_title = io::decode_pv(r.section("PVTI"), b.manifest.pv);
  if (!r.done()) throw Error(ErrorCode::CorruptBundle, "trailing bytes after sections");

  if (count_payload(b) != b.manifest.counts) {
    throw Error(ErrorCode::CountMismatch, "manifest counts disagree with payload");
  }
  const auto n = b.corpus.size();
  if (b.tfidf_title.n_docs() != n || b.tfidf_body.n_docs() != n ||
      b.pv_title.doc_vectors().rows() != n) {
    throw Error(ErrorCode::CountMismatch, "index document counts disagree with corpus");
  }
  if (b.tfidf_title.field() != TextField::Title || b.tfidf_body.field() != TextField::Body) {
    throw Error(ErrorCode::CorruptBundle, "TF-IDF sections hold the wrong fields");
  }
  if (corpus_hash(b.corpus) != b.manifest.corpus_hash) {
    throw Error(ErrorCode::ChecksumMismatch, "corpus hash mismatch");
  }
  return b;
}

inline void save_bundle(const IndexBundle& bundle, const std::filesystem::path& path) {
  const auto bytes = encode_bundle(bundle);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "rename to '" + path.string() + "': " + ec.message());
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed for '" + path.string() + "'");
  return bytes;
}

inline IndexBundle load_bundle(const std::filesystem::path& path) {
  return decode_bundle(read_file_bytes(path));
}

}  // namespace stc
