#pragma once

// Dense vector storage with exhaustive cosine search.
//
// On-disk layout (little-endian throughout):
//
//   "COVR"  u8 version=1  u32 dim  u64 count
//   count x { u16 id_len, id bytes (UTF-8), dim x f32 }
//
// Vectors live as f32 on disk and are widened to f64 in memory.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "covr/types.hpp"

namespace covr {

inline constexpr char kVectorMagic[4] = {'C', 'O', 'V', 'R'};
inline constexpr std::uint8_t kVectorFormatVersion = 1;

/// Row-normalized vectors keyed by id. Every row has unit L2 norm (within
/// 1e-6) and ids are unique.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(std::size_t dim = 1);

  /// Adopts rows that are already unit-norm. Throws DataError when a norm is
  /// off by more than 1e-6, an id repeats or the data size is inconsistent.
  static EmbeddingMatrix from_unit_rows(std::size_t dim, std::vector<std::string> ids,
                                        std::vector<double> data);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::optional<std::size_t> find(const std::string& id) const;

  /// Vector for `id`, or DataError naming the missing id.
  std::span<const double> row(const std::string& id) const;

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Divides each row by its L2 norm. `rows` is row-major with rows.size() ==
/// ids.size() * dim. Zero-norm rows raise DataError naming the id.
EmbeddingMatrix normalize_rows(std::size_t dim, std::vector<std::string> ids,
                               std::vector<double> rows);

/// Dot product of two unit vectors, clamped to [-1, 1].
double cosine(std::span<const double> a, std::span<const double> b);

/// Unclamped dot product; the training code differentiates through this.
double dot(std::span<const double> a, std::span<const double> b);

/// L2-normalizes `v` in place and returns the original norm (0 leaves v
/// untouched).
double normalize_in_place(std::span<double> v);

using SearchResult = RankedList;

/// Exact top-k by cosine for every query row, ordered with the global
/// tie-break. Queries are spread over `workers` threads; output order follows
/// the query rows.
std::vector<SearchResult> knn_search(const EmbeddingMatrix& queries, const EmbeddingMatrix& docs,
                                     std::size_t k, std::size_t workers = 1);

void write_vectors(const EmbeddingMatrix& m, std::ostream& out);
EmbeddingMatrix read_vectors(std::istream& in);

namespace detail {

// Little-endian primitives shared with the encoder parameter file.
void put_u8(std::ostream& out, std::uint8_t v);
void put_u16(std::ostream& out, std::uint16_t v);
void put_u32(std::ostream& out, std::uint32_t v);
void put_u64(std::ostream& out, std::uint64_t v);
void put_f32(std::ostream& out, float v);
void put_id(std::ostream& out, const std::string& id);

std::uint8_t get_u8(std::istream& in);
std::uint16_t get_u16(std::istream& in);
std::uint32_t get_u32(std::istream& in);
std::uint64_t get_u64(std::istream& in);
float get_f32(std::istream& in);
std::string get_id(std::istream& in);

void check_header(std::istream& in, std::uint8_t expected_version);

}  // namespace detail

}  // namespace covr
