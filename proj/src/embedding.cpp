#include "covr/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "covr/error.hpp"
#include "covr/parallel.hpp"

namespace covr {

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw DataError("embedding dimension must be positive");
}

EmbeddingMatrix EmbeddingMatrix::from_unit_rows(std::size_t dim, std::vector<std::string> ids,
                                                std::vector<double> data) {
  EmbeddingMatrix m(dim);
  if (data.size() != ids.size() * dim) {
    throw DataError("embedding data has " + std::to_string(data.size()) + " values, expected " +
                    std::to_string(ids.size() * dim));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!m.index_.emplace(ids[i], i).second) throw DataError("duplicate vector id '" + ids[i] + "'");
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) sq += data[i * dim + j] * data[i * dim + j];
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
      throw DataError("row '" + ids[i] + "' is not unit norm (norm " + std::to_string(std::sqrt(sq)) + ")");
    }
  }
  m.ids_ = std::move(ids);
  m.data_ = std::move(data);
  return m;
}

std::optional<std::size_t> EmbeddingMatrix::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> EmbeddingMatrix::row(const std::string& id) const {
  auto i = find(id);
  if (!i) throw DataError("no vector for id '" + id + "'");
  return row(*i);
}

double normalize_in_place(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
  return norm;
}

EmbeddingMatrix normalize_rows(std::size_t dim, std::vector<std::string> ids,
                               std::vector<double> rows) {
  if (dim == 0) throw DataError("embedding dimension must be positive");
  if (rows.size() != ids.size() * dim) {
    throw DataError("raw vectors have " + std::to_string(rows.size()) + " values, expected " +
                    std::to_string(ids.size() * dim));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::span<double> r(rows.data() + i * dim, dim);
    double norm = normalize_in_place(r);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DataError("zero-norm vector for id '" + ids[i] + "'");
    }
  }
  return EmbeddingMatrix::from_unit_rows(dim, std::move(ids), std::move(rows));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DataError("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  return std::clamp(dot(a, b), -1.0, 1.0);
}

std::vector<SearchResult> knn_search(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs,
                                     std::size_t k, std::size_t workers) {
  if (k == 0) throw DataError("k must be positive");
  if (queries.dim() != docs.dim()) {
    throw DataError("query dim " + std::to_string(queries.dim()) + " != doc dim " +
                    std::to_string(docs.dim()));
  }
  std::vector<SearchResult> results(queries.size());
  parallel_for(queries.size(), workers, [&](std::size_t qi) {
    auto q = queries.row(qi);
    std::vector<ScoredDoc> scored;
    scored.reserve(docs.size());
    for (std::size_t di = 0; di < docs.size(); ++di) {
      scored.push_back({docs.id(di), cosine(q, docs.row(di))});
    }
    const std::size_t keep = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                      ranks_before);
    scored.resize(keep);
    results[qi] = SearchResult{queries.id(qi), std::move(scored), "dense"};
  });
  return results;
}

namespace detail {

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw VectorFileError(VectorFileError::Kind::Truncated, "vector file truncated");
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }
void put_u16(std::ostream& out, std::uint16_t v) { put_le(out, v); }
void put_u32(std::ostream& out, std::uint32_t v) { put_le(out, v); }
void put_u64(std::ostream& out, std::uint64_t v) { put_le(out, v); }
void put_f32(std::ostream& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }

void put_id(std::ostream& out, const std::string& id) {
  if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw DataError("id longer than 65535 bytes");
  }
  put_u16(out, static_cast<std::uint16_t>(id.size()));
  out.write(id.data(), static_cast<std::streamsize>(id.size()));
}

std::uint8_t get_u8(std::istream& in) { return get_le<std::uint8_t>(in); }
std::uint16_t get_u16(std::istream& in) { return get_le<std::uint16_t>(in); }
std::uint32_t get_u32(std::istream& in) { return get_le<std::uint32_t>(in); }
std::uint64_t get_u64(std::istream& in) { return get_le<std::uint64_t>(in); }
float get_f32(std::istream& in) { return std::bit_cast<float>(get_le<std::uint32_t>(in)); }

std::string get_id(std::istream& in) {
  auto len = get_u16(in);
  std::string id(len, '\0');
  if (len > 0 && !in.read(id.data(), len)) {
    throw VectorFileError(VectorFileError::Kind::Truncated, "vector file truncated inside an id");
  }
  return id;
}

void check_header(std::istream& in, std::uint8_t expected_version) {
  char magic[4];
  if (!in.read(magic, 4)) {
    throw VectorFileError(VectorFileError::Kind::Truncated, "vector file truncated before magic");
  }
  if (!std::equal(magic, magic + 4, kVectorMagic)) {
    throw VectorFileError(VectorFileError::Kind::BadMagic, "bad magic: not a COVR file");
  }
  auto version = get_u8(in);
  if (version != expected_version) {
    throw VectorFileError(VectorFileError::Kind::VersionMismatch,
                          "COVR format version " + std::to_string(version) + ", expected " +
                              std::to_string(expected_version));
  }
}

}  // namespace detail

void write_vectors(const EmbeddingMatrix& m, std::ostream& out) {
  out.write(kVectorMagic, 4);
  detail::put_u8(out, kVectorFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(m.dim()));
  detail::put_u64(out, m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    detail::put_id(out, m.id(i));
    for (double x : m.row(i)) detail::put_f32(out, static_cast<float>(x));
  }
}

EmbeddingMatrix read_vectors(std::istream& in) {
  detail::check_header(in, kVectorFormatVersion);
  const auto dim = detail::get_u32(in);
  const auto count = detail::get_u64(in);
  if (dim == 0) throw VectorFileError(VectorFileError::Kind::Invalid, "vector file declares dim 0");
  std::vector<std::string> ids;
  std::vector<double> data;
  // count comes from the file; grow incrementally so a corrupt header runs
  // into Truncated rather than a huge allocation.
  for (std::uint64_t i = 0; i < count; ++i) {
    ids.push_back(detail::get_id(in));
    for (std::uint32_t j = 0; j < dim; ++j) data.push_back(detail::get_f32(in));
  }
  try {
    return EmbeddingMatrix::from_unit_rows(dim, std::move(ids), std::move(data));
  } catch (const DataError& e) {
    throw VectorFileError(VectorFileError::Kind::Invalid, e.what());
  }
}

}  // namespace covr
