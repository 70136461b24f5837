#pragma once

// Desk-scale bi-encoder: bag-of-tokens embeddings, an additive mode vector
// standing in for the "search_query:" / "search_document:" prefixes, mean
// pooling, a linear projection and L2 normalization.
//
//   pooled = mean({mode_vectors[mode]} U {token_table[t] : t in text})
//   u      = projection^T pooled
//   v      = u / |u|

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "covr/embedding.hpp"

namespace covr {

enum class EncodeMode : std::uint8_t { Query = 0, Document = 1 };

inline constexpr std::size_t kMaxQueryTokens = 180;
inline constexpr std::size_t kMaxDocumentTokens = 512;

using TokenIds = std::vector<std::uint32_t>;

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Tokens must be unique; index i is tokens[i].
  explicit Vocabulary(std::vector<std::string> tokens);

  /// Sorted set of all tokens in `texts`, so the result only depends on the
  /// token multiset and not on text order.
  static Vocabulary build(const std::vector<std::string>& texts);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::optional<std::uint32_t> index(std::string_view token) const;

  /// Tokenizes, truncates to the mode's maximum length and drops
  /// out-of-vocabulary tokens.
  TokenIds token_ids(std::string_view text, EncodeMode mode) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct EncoderParams {
  std::size_t vocab_size = 0;
  std::size_t hidden = 0;
  std::size_t dim = 0;
  std::vector<double> token_table;   // vocab_size x hidden
  std::vector<double> mode_vectors;  // 2 x hidden
  std::vector<double> projection;    // hidden x dim

  EncoderParams() = default;
  EncoderParams(std::size_t vocab_size, std::size_t hidden, std::size_t dim);

  std::span<const double> token_row(std::uint32_t t) const {
    return {token_table.data() + t * hidden, hidden};
  }
  std::span<const double> mode_row(EncodeMode m) const {
    return {mode_vectors.data() + static_cast<std::size_t>(m) * hidden, hidden};
  }

  /// Mutable views over the three parameter blocks, in a fixed order.
  std::array<std::span<double>, 3> blocks();
  std::array<std::span<const double>, 3> blocks() const;

  bool operator==(const EncoderParams&) const = default;
};

/// Uniform [-0.1, 0.1] entries from a seeded 64-bit Mersenne Twister. The
/// mapping from engine output to doubles is explicit, so the same seed gives
/// bit-identical parameters with any standard library.
EncoderParams init_params(std::uint64_t seed, std::size_t vocab_size, std::size_t hidden,
                          std::size_t dim);

/// Intermediate values of one forward pass, kept for the backward pass.
struct EncodeTrace {
  std::vector<double> pooled;     // hidden
  std::vector<double> projected;  // dim, pre-normalization
  std::vector<double> output;     // dim, unit norm
  double norm = 0.0;
  std::size_t pooled_count = 0;
};

EncodeTrace encode_trace(const EncoderParams& params, std::span<const std::uint32_t> tokens,
                         EncodeMode mode);

std::vector<double> encode(const EncoderParams& params, std::span<const std::uint32_t> tokens,
                           EncodeMode mode);

/// Gradient accumulator shaped like EncoderParams; only touched token rows are
/// materialized.
struct EncoderGrad {
  std::size_t hidden = 0;
  std::size_t dim = 0;
  std::map<std::uint32_t, std::vector<double>> token_rows;
  std::vector<double> mode_vectors;
  std::vector<double> projection;

  EncoderGrad() = default;
  explicit EncoderGrad(const EncoderParams& shape);

  std::vector<double>& token_row(std::uint32_t t);
  double token(std::uint32_t t, std::size_t j) const;

  void add(const EncoderGrad& other);
  void scale(double s);
  /// params -= lr * grad
  void apply(EncoderParams& params, double lr) const;
  /// Dense copy in EncoderParams layout.
  EncoderParams dense(const EncoderParams& shape) const;
};

/// Accumulates d(upstream . encode(tokens, mode)) / d(params) into `grad`.
/// The backward pass includes the normalization Jacobian (I - v v^T) / |u|.
void encode_grad(const EncoderParams& params, std::span<const std::uint32_t> tokens,
                 EncodeMode mode, std::span<const double> upstream, EncoderGrad& grad);

/// Same, reusing a forward trace computed by encode_trace.
void encode_grad(const EncoderParams& params, const EncodeTrace& trace,
                 std::span<const std::uint32_t> tokens, EncodeMode mode,
                 std::span<const double> upstream, EncoderGrad& grad);

/// Vocabulary plus parameters: everything needed to embed raw text.
struct Encoder {
  Vocabulary vocab;
  EncoderParams params;

  std::vector<double> encode(std::string_view text, EncodeMode mode) const;

  EmbeddingMatrix encode_all(const std::vector<std::string>& ids,
                             const std::vector<std::string>& texts, EncodeMode mode,
                             std::size_t workers = 1) const;
};

Encoder make_encoder(Vocabulary vocab, std::uint64_t seed, std::size_t hidden, std::size_t dim);

/// Parameter file: the COVR container with format version 2 and three named
/// sections (token_table keyed by vocabulary token, mode_vectors keyed by
/// "query"/"document", projection keyed by row index). Values are f32.
inline constexpr std::uint8_t kParamsFormatVersion = 2;

void write_params(const Encoder& encoder, std::ostream& out);
Encoder read_params(std::istream& in);

}  // namespace covr
