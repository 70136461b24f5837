#include "covr/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <set>

#include "covr/error.hpp"
#include "covr/parallel.hpp"
#include "covr/text.hpp"

namespace covr {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<std::uint32_t>(i)).second) {
      throw DataError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts) {
  std::set<std::string> all;
  for (const auto& text : texts) {
    for (auto& tok : tokenize(text)) all.insert(std::move(tok));
  }
  return Vocabulary(std::vector<std::string>(all.begin(), all.end()));
}

std::optional<std::uint32_t> Vocabulary::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenIds Vocabulary::token_ids(std::string_view text, EncodeMode mode) const {
  auto tokens = tokenize(text);
  const auto limit = mode == EncodeMode::Query ? kMaxQueryTokens : kMaxDocumentTokens;
  if (tokens.size() > limit) tokens.resize(limit);
  TokenIds ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto i = index(t)) ids.push_back(*i);
  }
  return ids;
}

EncoderParams::EncoderParams(std::size_t vocab_size_, std::size_t hidden_, std::size_t dim_)
    : vocab_size(vocab_size_),
      hidden(hidden_),
      dim(dim_),
      token_table(vocab_size_ * hidden_, 0.0),
      mode_vectors(2 * hidden_, 0.0),
      projection(hidden_ * dim_, 0.0) {
  if (hidden_ == 0 || dim_ == 0) throw DataError("encoder widths must be positive");
}

std::array<std::span<double>, 3> EncoderParams::blocks() {
  return {std::span<double>(token_table), std::span<double>(mode_vectors),
          std::span<double>(projection)};
}

std::array<std::span<const double>, 3> EncoderParams::blocks() const {
  return {std::span<const double>(token_table), std::span<const double>(mode_vectors),
          std::span<const double>(projection)};
}

EncoderParams init_params(std::uint64_t seed, std::size_t vocab_size, std::size_t hidden,
                          std::size_t dim) {
  EncoderParams p(vocab_size, hidden, dim);
  std::mt19937_64 rng(seed);
  auto draw = [&rng] {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    return -0.1 + 0.2 * unit;
  };
  for (auto block : p.blocks()) {
    for (double& x : block) x = draw();
  }
  return p;
}

EncodeTrace encode_trace(const EncoderParams& params, std::span<const std::uint32_t> tokens,
                         EncodeMode mode) {
  const std::size_t h = params.hidden;
  EncodeTrace tr;
  tr.pooled.assign(params.mode_row(mode).begin(), params.mode_row(mode).end());
  for (auto t : tokens) {
    if (t >= params.vocab_size) throw DataError("token id out of range");
    auto row = params.token_row(t);
    for (std::size_t i = 0; i < h; ++i) tr.pooled[i] += row[i];
  }
  tr.pooled_count = tokens.size() + 1;
  const double inv = 1.0 / static_cast<double>(tr.pooled_count);
  for (double& x : tr.pooled) x *= inv;

  tr.projected.assign(params.dim, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    const double p = tr.pooled[i];
    const double* w = params.projection.data() + i * params.dim;
    for (std::size_t j = 0; j < params.dim; ++j) tr.projected[j] += p * w[j];
  }
  tr.output = tr.projected;
  tr.norm = normalize_in_place(tr.output);
  if (!(tr.norm > 0.0) || !std::isfinite(tr.norm)) {
    throw DataError("zero-norm encoder output");
  }
  return tr;
}

std::vector<double> encode(const EncoderParams& params, std::span<const std::uint32_t> tokens,
                           EncodeMode mode) {
  return encode_trace(params, tokens, mode).output;
}

EncoderGrad::EncoderGrad(const EncoderParams& shape)
    : hidden(shape.hidden),
      dim(shape.dim),
      mode_vectors(2 * shape.hidden, 0.0),
      projection(shape.hidden * shape.dim, 0.0) {}

std::vector<double>& EncoderGrad::token_row(std::uint32_t t) {
  auto it = token_rows.find(t);
  if (it == token_rows.end()) it = token_rows.emplace(t, std::vector<double>(hidden, 0.0)).first;
  return it->second;
}

double EncoderGrad::token(std::uint32_t t, std::size_t j) const {
  auto it = token_rows.find(t);
  return it == token_rows.end() ? 0.0 : it->second[j];
}

void EncoderGrad::add(const EncoderGrad& other) {
  for (const auto& [t, row] : other.token_rows) {
    auto& mine = token_row(t);
    for (std::size_t j = 0; j < hidden; ++j) mine[j] += row[j];
  }
  for (std::size_t i = 0; i < mode_vectors.size(); ++i) mode_vectors[i] += other.mode_vectors[i];
  for (std::size_t i = 0; i < projection.size(); ++i) projection[i] += other.projection[i];
}

void EncoderGrad::scale(double s) {
  for (auto& [t, row] : token_rows) {
    for (double& x : row) x *= s;
  }
  for (double& x : mode_vectors) x *= s;
  for (double& x : projection) x *= s;
}

void EncoderGrad::apply(EncoderParams& params, double lr) const {
  for (const auto& [t, row] : token_rows) {
    double* dst = params.token_table.data() + t * params.hidden;
    for (std::size_t j = 0; j < hidden; ++j) dst[j] -= lr * row[j];
  }
  for (std::size_t i = 0; i < mode_vectors.size(); ++i) params.mode_vectors[i] -= lr * mode_vectors[i];
  for (std::size_t i = 0; i < projection.size(); ++i) params.projection[i] -= lr * projection[i];
}

EncoderParams EncoderGrad::dense(const EncoderParams& shape) const {
  EncoderParams out(shape.vocab_size, shape.hidden, shape.dim);
  for (const auto& [t, row] : token_rows) {
    std::copy(row.begin(), row.end(), out.token_table.begin() + static_cast<std::ptrdiff_t>(t * hidden));
  }
  out.mode_vectors = mode_vectors;
  out.projection = projection;
  return out;
}

void encode_grad(const EncoderParams& params, const EncodeTrace& trace,
                 std::span<const std::uint32_t> tokens, EncodeMode mode,
                 std::span<const double> upstream, EncoderGrad& grad) {
  const std::size_t h = params.hidden;
  const std::size_t d = params.dim;
  if (upstream.size() != d) throw DataError("upstream gradient has wrong dimension");

  // dL/du = (I - v v^T) g / |u|
  const auto& v = trace.output;
  double vg = 0.0;
  for (std::size_t j = 0; j < d; ++j) vg += v[j] * upstream[j];
  std::vector<double> du(d);
  for (std::size_t j = 0; j < d; ++j) du[j] = (upstream[j] - v[j] * vg) / trace.norm;

  // u = P^T pooled
  std::vector<double> dpooled(h, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    const double* w = params.projection.data() + i * d;
    double* gw = grad.projection.data() + i * d;
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      gw[j] += trace.pooled[i] * du[j];
      acc += w[j] * du[j];
    }
    dpooled[i] = acc / static_cast<double>(trace.pooled_count);
  }

  double* gm = grad.mode_vectors.data() + static_cast<std::size_t>(mode) * h;
  for (std::size_t i = 0; i < h; ++i) gm[i] += dpooled[i];
  for (auto t : tokens) {
    auto& row = grad.token_row(t);
    for (std::size_t i = 0; i < h; ++i) row[i] += dpooled[i];
  }
}

void encode_grad(const EncoderParams& params, std::span<const std::uint32_t> tokens,
                 EncodeMode mode, std::span<const double> upstream, EncoderGrad& grad) {
  auto trace = encode_trace(params, tokens, mode);
  encode_grad(params, trace, tokens, mode, upstream, grad);
}

std::vector<double> Encoder::encode(std::string_view text, EncodeMode mode) const {
  auto ids = vocab.token_ids(text, mode);
  return covr::encode(params, ids, mode);
}

EmbeddingMatrix Encoder::encode_all(const std::vector<std::string>& ids,
                                    const std::vector<std::string>& texts, EncodeMode mode,
                                    std::size_t workers) const {
  if (ids.size() != texts.size()) throw DataError("ids and texts differ in length");
  std::vector<double> data(ids.size() * params.dim);
  parallel_for(ids.size(), workers, [&](std::size_t i) {
    auto v = encode(texts[i], mode);
    std::copy(v.begin(), v.end(), data.begin() + static_cast<std::ptrdiff_t>(i * params.dim));
  });
  return EmbeddingMatrix::from_unit_rows(params.dim, ids, std::move(data));
}

Encoder make_encoder(Vocabulary vocab, std::uint64_t seed, std::size_t hidden, std::size_t dim) {
  auto params = init_params(seed, vocab.size(), hidden, dim);
  return Encoder{std::move(vocab), std::move(params)};
}

namespace {

void write_section(std::ostream& out, const std::string& name, std::size_t cols,
                   const std::vector<std::string>& row_ids, std::span<const double> values) {
  detail::put_id(out, name);
  detail::put_u32(out, static_cast<std::uint32_t>(cols));
  detail::put_u64(out, row_ids.size());
  for (std::size_t r = 0; r < row_ids.size(); ++r) {
    detail::put_id(out, row_ids[r]);
    for (std::size_t c = 0; c < cols; ++c) detail::put_f32(out, static_cast<float>(values[r * cols + c]));
  }
}

struct Section {
  std::size_t cols = 0;
  std::vector<std::string> row_ids;
  std::vector<double> values;
};

Section read_section(std::istream& in, const std::string& expected_name) {
  auto name = detail::get_id(in);
  if (name != expected_name) {
    throw VectorFileError(VectorFileError::Kind::Invalid,
                          "expected section '" + expected_name + "', found '" + name + "'");
  }
  Section s;
  s.cols = detail::get_u32(in);
  const auto rows = detail::get_u64(in);
  for (std::uint64_t r = 0; r < rows; ++r) {
    s.row_ids.push_back(detail::get_id(in));
    for (std::size_t c = 0; c < s.cols; ++c) s.values.push_back(detail::get_f32(in));
  }
  return s;
}

}  // namespace

void write_params(const Encoder& encoder, std::ostream& out) {
  const auto& p = encoder.params;
  if (encoder.vocab.size() != p.vocab_size) throw DataError("vocabulary and token table differ in size");
  out.write(kVectorMagic, 4);
  detail::put_u8(out, kParamsFormatVersion);
  detail::put_u32(out, 3);
  write_section(out, "token_table", p.hidden, encoder.vocab.tokens(), p.token_table);
  write_section(out, "mode_vectors", p.hidden, {"query", "document"}, p.mode_vectors);
  std::vector<std::string> proj_ids;
  for (std::size_t i = 0; i < p.hidden; ++i) proj_ids.push_back(std::to_string(i));
  write_section(out, "projection", p.dim, proj_ids, p.projection);
}

Encoder read_params(std::istream& in) {
  detail::check_header(in, kParamsFormatVersion);
  const auto sections = detail::get_u32(in);
  if (sections != 3) {
    throw VectorFileError(VectorFileError::Kind::Invalid,
                          "expected 3 parameter sections, found " + std::to_string(sections));
  }
  auto tokens = read_section(in, "token_table");
  auto modes = read_section(in, "mode_vectors");
  auto proj = read_section(in, "projection");
  const std::size_t hidden = proj.row_ids.size();
  if (tokens.cols != hidden || modes.cols != hidden || modes.row_ids.size() != 2 || proj.cols == 0) {
    throw VectorFileError(VectorFileError::Kind::Invalid, "inconsistent parameter shapes");
  }
  Encoder enc;
  enc.vocab = Vocabulary(tokens.row_ids);
  enc.params = EncoderParams(tokens.row_ids.size(), hidden, proj.cols);
  enc.params.token_table = std::move(tokens.values);
  enc.params.mode_vectors = std::move(modes.values);
  enc.params.projection = std::move(proj.values);
  return enc;
}

}  // namespace covr
