#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "toposkit/matrix.hpp"

namespace toposkit {

// One attention head. Shapes follow the head-size convention:
// w_o is d x m, the other three are m x d.
struct HeadParams {
  Matrix w_o, w_v, w_k, w_q;
};

struct FeedForwardParams {
  Matrix w1;               // r x d
  Matrix w2;               // d x r
  std::vector<double> b1;  // length r
};

// Sequence-to-sequence block on d x n inputs: a residual multi-head attention
// layer followed by a residual token-wise feed-forward layer. Blocks are
// immutable value types; forward passes are pure.
class TransformerBlock {
 public:
  TransformerBlock(std::size_t d, std::size_t n, std::size_t h, std::size_t m, std::size_t r)
      : d_(d), n_(n), h_(h), m_(m), r_(r), positional_(d, n) {
    if (d == 0 || n == 0 || h == 0 || m == 0 || r == 0)
      throw std::invalid_argument("TransformerBlock: all dimensions must be positive");
    heads_.reserve(h);
    for (std::size_t i = 0; i < h; ++i)
      heads_.push_back(HeadParams{Matrix(d, m), Matrix(m, d), Matrix(m, d), Matrix(m, d)});
    ff_ = FeedForwardParams{Matrix(r, d), Matrix(d, r), std::vector<double>(r, 0.0)};
  }

  // Entries uniform in [-0.5, 0.5] / sqrt(d).
  static TransformerBlock random(std::size_t d, std::size_t n, std::size_t h, std::size_t m,
                                 std::size_t r, SplitRng& rng) {
    TransformerBlock b(d, n, h, m, r);
    double scale = 0.5 / std::sqrt(static_cast<double>(d));
    auto fill = [&](Matrix& w) {
      for (auto& v : w.data()) v = rng.uniform(-scale, scale);
    };
    for (auto& head : b.heads_) {
      fill(head.w_o);
      fill(head.w_v);
      fill(head.w_k);
      fill(head.w_q);
    }
    fill(b.ff_.w1);
    fill(b.ff_.w2);
    for (auto& v : b.ff_.b1) v = rng.uniform(-scale, scale);
    return b;
  }

  std::size_t d() const { return d_; }
  std::size_t n() const { return n_; }
  std::size_t h() const { return h_; }
  std::size_t m() const { return m_; }
  std::size_t r() const { return r_; }

  const std::vector<HeadParams>& heads() const { return heads_; }
  std::vector<HeadParams>& heads() { return heads_; }
  const FeedForwardParams& ff() const { return ff_; }
  FeedForwardParams& ff() { return ff_; }

  // Optional fixed additive positional term, added to the input before the
  // block proper. Zero by default; not part of the serialized form.
  const Matrix& positional() const { return positional_; }
  void set_positional(Matrix e) {
    if (e.rows() != d_ || e.cols() != n_)
      throw std::invalid_argument("positional: expected " + std::to_string(d_) + "x" +
                                  std::to_string(n_) + ", got " + e.shape_str());
    positional_ = std::move(e);
  }

  std::size_t param_count() const {
    return h_ * (3 * m_ * d_ + d_ * m_) + r_ * d_ + d_ * r_ + r_;
  }

 private:
  std::size_t d_, n_, h_, m_, r_;
  std::vector<HeadParams> heads_;
  FeedForwardParams ff_;
  Matrix positional_;
};

namespace detail {
inline void require_input_shape(const TransformerBlock& b, const Matrix& x) {
  if (x.rows() != b.d() || x.cols() != b.n())
    throw std::invalid_argument("transformer: expected input " + std::to_string(b.d()) + "x" +
                                std::to_string(b.n()) + ", got " + x.shape_str());
}
}  // namespace detail

// Attn(X) = X + sum_i W_O^i W_V^i X . softmax_cols[(W_K^i X)^T (W_Q^i X)]
inline Matrix attn(const TransformerBlock& block, const Matrix& x) {
  detail::require_input_shape(block, x);
  Matrix out = x;
  for (const auto& head : block.heads()) {
    Matrix scores = matmul(matmul(head.w_k, x).transpose(), matmul(head.w_q, x));
    Matrix weights = softmax_columns(scores);
    Matrix values = matmul(head.w_o, matmul(head.w_v, x));
    out += matmul(values, weights);
  }
  return out;
}

// Attn(X) + W2 . ReLU(W1 . Attn(X) + b1 1_n^T), applied to X + E.
inline Matrix forward(const TransformerBlock& block, const Matrix& x) {
  detail::require_input_shape(block, x);
  Matrix a = attn(block, x + block.positional());
  Matrix hidden = matmul(block.ff().w1, a);
  for (std::size_t i = 0; i < block.r(); ++i)
    for (std::size_t j = 0; j < block.n(); ++j) hidden(i, j) += block.ff().b1[i];
  return a + matmul(block.ff().w2, relu(hidden));
}

// Max-norm of forward(XP) - forward(X)P; zero for an equivariant block.
inline double check_equivariance(const TransformerBlock& block, const Matrix& x,
                                 const Permutation& p) {
  detail::require_input_shape(block, x);
  if (p.size() != block.n())
    throw std::invalid_argument("check_equivariance: permutation size " +
                                std::to_string(p.size()) + " vs n=" + std::to_string(block.n()));
  Matrix lhs = forward(block, apply_permutation(x, p));
  Matrix rhs = apply_permutation(forward(block, x), p);
  return max_abs_diff(lhs, rhs);
}

// Flatten order: heads in declaration order, each W_O, W_V, W_K, W_Q
// row-major, then W1, W2, b1.
inline std::vector<double> flatten_params(const TransformerBlock& block) {
  std::vector<double> out;
  out.reserve(block.param_count());
  auto push = [&](const Matrix& m) {
    out.insert(out.end(), m.data().begin(), m.data().end());
  };
  for (const auto& head : block.heads()) {
    push(head.w_o);
    push(head.w_v);
    push(head.w_k);
    push(head.w_q);
  }
  push(block.ff().w1);
  push(block.ff().w2);
  out.insert(out.end(), block.ff().b1.begin(), block.ff().b1.end());
  return out;
}

inline TransformerBlock unflatten_params(const TransformerBlock& templ,
                                         const std::vector<double>& v) {
  if (v.size() != templ.param_count())
    throw std::invalid_argument("unflatten_params: expected " +
                                std::to_string(templ.param_count()) + " values, got " +
                                std::to_string(v.size()));
  TransformerBlock block = templ;
  std::size_t pos = 0;
  auto take = [&](Matrix& m) {
    for (auto& entry : m.data()) entry = v[pos++];
    m.check_finite();
  };
  for (auto& head : block.heads()) {
    take(head.w_o);
    take(head.w_v);
    take(head.w_k);
    take(head.w_q);
  }
  take(block.ff().w1);
  take(block.ff().w2);
  for (auto& entry : block.ff().b1) entry = v[pos++];
  return block;
}

// Text form: header `d n h m r`, then matrices in flatten order using the
// matrix text format (b1 as an r x 1 matrix).
inline std::string block_to_text(const TransformerBlock& block) {
  std::ostringstream os;
  os << block.d() << " " << block.n() << " " << block.h() << " " << block.m() << " " << block.r()
     << "\n";
  for (const auto& head : block.heads()) {
    os << matrix_to_text(head.w_o) << matrix_to_text(head.w_v) << matrix_to_text(head.w_k)
       << matrix_to_text(head.w_q);
  }
  os << matrix_to_text(block.ff().w1) << matrix_to_text(block.ff().w2);
  Matrix b1(block.r(), 1);
  for (std::size_t i = 0; i < block.r(); ++i) b1(i, 0) = block.ff().b1[i];
  os << matrix_to_text(b1);
  return os.str();
}

inline TransformerBlock block_from_text(const std::string& text) {
  std::istringstream is(text);
  std::size_t d, n, h, m, r;
  if (!(is >> d >> n >> h >> m >> r)) throw std::invalid_argument("block text: missing header");
  TransformerBlock block(d, n, h, m, r);
  auto expect = [&](std::size_t rows, std::size_t cols, const char* what) {
    Matrix mm = matrix_from_stream(is);
    if (mm.rows() != rows || mm.cols() != cols)
      throw std::invalid_argument(std::string("block text: bad shape for ") + what);
    return mm;
  };
  for (auto& head : block.heads()) {
    head.w_o = expect(d, m, "w_o");
    head.w_v = expect(m, d, "w_v");
    head.w_k = expect(m, d, "w_k");
    head.w_q = expect(m, d, "w_q");
  }
  block.ff().w1 = expect(r, d, "w1");
  block.ff().w2 = expect(d, r, "w2");
  Matrix b1 = expect(r, 1, "b1");
  for (std::size_t i = 0; i < r; ++i) block.ff().b1[i] = b1(i, 0);
  return block;
}

}  // namespace toposkit
