#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "toposkit/learn.hpp"
#include "toposkit/matrix.hpp"
#include "toposkit/transformer.hpp"

namespace toposkit {

// Pointwise differentiable error e(x, y) whose partial in the first argument
// is invertible for each fixed x0. inverse_de_dx(a, v) solves
// de_dx(a, b) = v for b.
struct ErrorFunction {
  std::function<double(double, double)> e;
  std::function<double(double, double)> de_dx;
  std::function<double(double, double)> inverse_de_dx;

  // e(x, y) = 1/2 (x - y)^2, de/dx(x, y) = x - y, inverse at a: v -> a - v.
  static ErrorFunction quadratic() {
    ErrorFunction err;
    err.e = [](double x, double y) { return 0.5 * (x - y) * (x - y); };
    err.de_dx = [](double x, double y) { return x - y; };
    err.inverse_de_dx = [](double a, double v) { return a - v; };
    return err;
  }
};

// Differentiable parameterized function I: P x A -> B with analytic Jacobians
// w.r.t. parameters (out_dim x param_dim) and input (out_dim x in_dim).
// Jacobians are validated against central finite differences at construction.
struct ParamFn {
  std::size_t param_dim = 0;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::function<Vec(const Vec&, const Vec&)> implement;
  std::function<Matrix(const Vec&, const Vec&)> grad_p;
  std::function<Matrix(const Vec&, const Vec&)> grad_a;
  // Distance from (p, a) to the nearest non-differentiable point; +inf for
  // smooth maps. Sampling-based checks reject points inside the margin.
  std::function<double(const Vec&, const Vec&)> kink_distance;
};

struct JacobianCheck {
  bool pass = false;
  double worst_rel = 0.0;
};

namespace detail {

inline double rel_entry_error(double analytic, double numeric) {
  double scale = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
  return std::fabs(analytic - numeric) / scale;
}

// Draw (p, a) with kink_distance above the margin; nudges deterministically by
// retrying with fresh draws.
inline void sample_point(const ParamFn& pf, SplitRng& rng, Vec& p, Vec& a,
                         double margin = 1e-3) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    p = vecs::random(pf.param_dim, rng);
    a = vecs::random(pf.in_dim, rng);
    if (!pf.kink_distance || pf.kink_distance(p, a) > margin) return;
  }
  throw std::runtime_error("sample_point: could not find a point away from kinks");
}

}  // namespace detail

// Compare both analytic Jacobians against central finite differences at
// `points` sampled (p, a) pairs.
inline JacobianCheck validate_jacobians(const ParamFn& pf, std::size_t points, SplitRng rng,
                                        double step = 1e-5, double tol = 1e-4) {
  JacobianCheck check;
  double worst = 0.0;
  for (std::size_t pt = 0; pt < points; ++pt) {
    Vec p, a;
    detail::sample_point(pf, rng, p, a);
    Matrix jp = pf.grad_p(p, a);
    Matrix ja = pf.grad_a(p, a);
    if (jp.rows() != pf.out_dim || jp.cols() != pf.param_dim)
      throw std::invalid_argument("validate_jacobians: grad_p has shape " + jp.shape_str());
    if (ja.rows() != pf.out_dim || ja.cols() != pf.in_dim)
      throw std::invalid_argument("validate_jacobians: grad_a has shape " + ja.shape_str());
    for (std::size_t out = 0; out < pf.out_dim; ++out) {
      auto component_p = [&](const Vec& pp) { return pf.implement(pp, a)[out]; };
      Vec fd_p = finite_difference_gradient(component_p, p, step);
      for (std::size_t j = 0; j < pf.param_dim; ++j)
        worst = std::max(worst, detail::rel_entry_error(jp(out, j), fd_p[j]));
      auto component_a = [&](const Vec& aa) { return pf.implement(p, aa)[out]; };
      Vec fd_a = finite_difference_gradient(component_a, a, step);
      for (std::size_t j = 0; j < pf.in_dim; ++j)
        worst = std::max(worst, detail::rel_entry_error(ja(out, j), fd_a[j]));
    }
  }
  check.worst_rel = worst;
  check.pass = worst <= tol;
  return check;
}

// Construction gate: every shipped ParamFn passes through here. `validate`
// exists so tests can build deliberately wrong Jacobians.
inline ParamFn make_paramfn(ParamFn pf, bool validate = true, std::size_t points = 4) {
  if (!pf.kink_distance)
    pf.kink_distance = [](const Vec&, const Vec&) {
      return std::numeric_limits<double>::infinity();
    };
  if (validate) {
    JacobianCheck check = validate_jacobians(pf, points, SplitRng(0x9c0ffee).split("ctor"));
    if (!check.pass)
      throw std::invalid_argument("ParamFn: analytic Jacobians disagree with finite differences "
                                  "(worst relative error " +
                                  std::to_string(check.worst_rel) + ")");
  }
  return pf;
}

// ---------------------------------------------------------------------------
// Combinators. Composite Jacobians are assembled by the chain rule; parameter
// layout is the left factor followed by the right factor, matching Learn.
// ---------------------------------------------------------------------------

// Combinators hold their children behind shared pointers: composite values
// are copied freely into closures, and by-value subtrees would make that
// copying exponential in the nesting depth.
inline ParamFn seq_pf(const ParamFn& f_in, const ParamFn& g_in) {
  if (f_in.out_dim != g_in.in_dim)
    throw std::invalid_argument("seq_pf: dimension mismatch (" + std::to_string(f_in.out_dim) +
                                " vs " + std::to_string(g_in.in_dim) + ")");
  auto f = std::make_shared<const ParamFn>(f_in);
  auto g = std::make_shared<const ParamFn>(g_in);
  ParamFn out;
  out.param_dim = f->param_dim + g->param_dim;
  out.in_dim = f->in_dim;
  out.out_dim = g->out_dim;
  std::size_t cut = f->param_dim;
  out.implement = [f, g, cut](const Vec& pq, const Vec& a) {
    Vec p = vecs::slice(pq, 0, cut), q = vecs::slice(pq, cut, pq.size() - cut);
    return g->implement(q, f->implement(p, a));
  };
  out.grad_p = [f, g, cut](const Vec& pq, const Vec& a) {
    Vec p = vecs::slice(pq, 0, cut), q = vecs::slice(pq, cut, pq.size() - cut);
    Vec b = f->implement(p, a);
    Matrix left = matmul(g->grad_a(q, b), f->grad_p(p, a));  // out x |p|
    Matrix right = g->grad_p(q, b);                          // out x |q|
    Matrix jp(g->out_dim, pq.size());
    for (std::size_t i = 0; i < g->out_dim; ++i) {
      for (std::size_t j = 0; j < cut; ++j) jp(i, j) = left(i, j);
      for (std::size_t j = 0; j < right.cols(); ++j) jp(i, cut + j) = right(i, j);
    }
    return jp;
  };
  out.grad_a = [f, g, cut](const Vec& pq, const Vec& a) {
    Vec p = vecs::slice(pq, 0, cut), q = vecs::slice(pq, cut, pq.size() - cut);
    Vec b = f->implement(p, a);
    return matmul(g->grad_a(q, b), f->grad_a(p, a));
  };
  out.kink_distance = [f, g, cut](const Vec& pq, const Vec& a) {
    Vec p = vecs::slice(pq, 0, cut), q = vecs::slice(pq, cut, pq.size() - cut);
    double df = f->kink_distance(p, a);
    double dg = g->kink_distance(q, f->implement(p, a));
    return std::min(df, dg);
  };
  return out;
}

inline ParamFn par_pf(const ParamFn& f_in, const ParamFn& g_in) {
  auto f = std::make_shared<const ParamFn>(f_in);
  auto g = std::make_shared<const ParamFn>(g_in);
  ParamFn out;
  out.param_dim = f->param_dim + g->param_dim;
  out.in_dim = f->in_dim + g->in_dim;
  out.out_dim = f->out_dim + g->out_dim;
  std::size_t pcut = f->param_dim, acut = f->in_dim;
  out.implement = [f, g, pcut, acut](const Vec& pq, const Vec& ac) {
    Vec p = vecs::slice(pq, 0, pcut), q = vecs::slice(pq, pcut, pq.size() - pcut);
    Vec a = vecs::slice(ac, 0, acut), c = vecs::slice(ac, acut, ac.size() - acut);
    return vecs::concat(f->implement(p, a), g->implement(q, c));
  };
  auto block_diag = [f, g, pcut, acut](const Vec& pq, const Vec& ac, bool wrt_params) {
    Vec p = vecs::slice(pq, 0, pcut), q = vecs::slice(pq, pcut, pq.size() - pcut);
    Vec a = vecs::slice(ac, 0, acut), c = vecs::slice(ac, acut, ac.size() - acut);
    Matrix top = wrt_params ? f->grad_p(p, a) : f->grad_a(p, a);
    Matrix bot = wrt_params ? g->grad_p(q, c) : g->grad_a(q, c);
    Matrix jac(top.rows() + bot.rows(), top.cols() + bot.cols());
    for (std::size_t i = 0; i < top.rows(); ++i)
      for (std::size_t j = 0; j < top.cols(); ++j) jac(i, j) = top(i, j);
    for (std::size_t i = 0; i < bot.rows(); ++i)
      for (std::size_t j = 0; j < bot.cols(); ++j) jac(top.rows() + i, top.cols() + j) = bot(i, j);
    return jac;
  };
  out.grad_p = [block_diag](const Vec& pq, const Vec& ac) { return block_diag(pq, ac, true); };
  out.grad_a = [block_diag](const Vec& pq, const Vec& ac) { return block_diag(pq, ac, false); };
  out.kink_distance = [f, g, pcut, acut](const Vec& pq, const Vec& ac) {
    Vec p = vecs::slice(pq, 0, pcut), q = vecs::slice(pq, pcut, pq.size() - pcut);
    Vec a = vecs::slice(ac, 0, acut), c = vecs::slice(ac, acut, ac.size() - acut);
    return std::min(f->kink_distance(p, a), g->kink_distance(q, c));
  };
  return out;
}

// Reindex the parameter vector: new coordinate i supplies old coordinate
// raw_of_new[i]. Used to expose a documented external parameter layout over a
// compositionally built function.
inline ParamFn reparam_permute(const ParamFn& pf_in, std::vector<std::size_t> raw_of_new) {
  if (raw_of_new.size() != pf_in.param_dim)
    throw std::invalid_argument("reparam_permute: permutation size mismatch");
  auto pf = std::make_shared<const ParamFn>(pf_in);
  ParamFn out = pf_in;
  auto to_raw = [pf, raw_of_new](const Vec& p_new) {
    Vec raw(pf->param_dim);
    for (std::size_t i = 0; i < raw_of_new.size(); ++i) raw[raw_of_new[i]] = p_new[i];
    return raw;
  };
  out.implement = [pf, to_raw](const Vec& p, const Vec& a) {
    return pf->implement(to_raw(p), a);
  };
  out.grad_p = [pf, to_raw, raw_of_new](const Vec& p, const Vec& a) {
    Matrix raw = pf->grad_p(to_raw(p), a);
    Matrix jac(raw.rows(), raw.cols());
    for (std::size_t i = 0; i < raw.rows(); ++i)
      for (std::size_t j = 0; j < raw_of_new.size(); ++j) jac(i, j) = raw(i, raw_of_new[j]);
    return jac;
  };
  out.grad_a = [pf, to_raw](const Vec& p, const Vec& a) { return pf->grad_a(to_raw(p), a); };
  out.kink_distance = [pf, to_raw](const Vec& p, const Vec& a) {
    return pf->kink_distance(to_raw(p), a);
  };
  return out;
}

// ---------------------------------------------------------------------------
// Primitive family. Matrix-valued data is flattened row-major.
// ---------------------------------------------------------------------------

namespace pf {

inline ParamFn identity(std::size_t dim) {
  ParamFn out;
  out.param_dim = 0;
  out.in_dim = out.out_dim = dim;
  out.implement = [](const Vec&, const Vec& a) { return a; };
  out.grad_p = [dim](const Vec&, const Vec&) { return Matrix(dim, 0); };
  out.grad_a = [dim](const Vec&, const Vec&) { return Matrix::identity(dim); };
  return make_paramfn(std::move(out));
}

// X -> W X with parameters W (rows x cols), input X (cols x n).
inline ParamFn linear_left(std::size_t rows, std::size_t cols, std::size_t n) {
  ParamFn out;
  out.param_dim = rows * cols;
  out.in_dim = cols * n;
  out.out_dim = rows * n;
  out.implement = [rows, cols, n](const Vec& p, const Vec& a) {
    Matrix w(rows, cols, p), x(cols, n, a);
    return matmul(w, x).data();
  };
  out.grad_p = [rows, cols, n](const Vec&, const Vec& a) {
    Matrix x(cols, n, a);
    Matrix jac(rows * n, rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t k = 0; k < cols; ++k) jac(i * n + c, i * cols + k) = x(k, c);
    return jac;
  };
  out.grad_a = [rows, cols, n](const Vec& p, const Vec&) {
    Matrix w(rows, cols, p);
    Matrix jac(rows * n, cols * n);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t k = 0; k < cols; ++k) jac(i * n + c, k * n + c) = w(i, k);
    return jac;
  };
  return make_paramfn(std::move(out));
}

// X -> X + b 1_n^T with parameters b (rows), input X (rows x n).
inline ParamFn bias_cols(std::size_t rows, std::size_t n) {
  ParamFn out;
  out.param_dim = rows;
  out.in_dim = out.out_dim = rows * n;
  out.implement = [rows, n](const Vec& p, const Vec& a) {
    Vec r = a;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t c = 0; c < n; ++c) r[i * n + c] += p[i];
    return r;
  };
  out.grad_p = [rows, n](const Vec&, const Vec&) {
    Matrix jac(rows * n, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t c = 0; c < n; ++c) jac(i * n + c, i) = 1.0;
    return jac;
  };
  out.grad_a = [rows, n](const Vec&, const Vec&) { return Matrix::identity(rows * n); };
  return make_paramfn(std::move(out));
}

// Entrywise max(0, x); subgradient at 0 is taken as 0.
inline ParamFn relu(std::size_t dim) {
  ParamFn out;
  out.param_dim = 0;
  out.in_dim = out.out_dim = dim;
  out.implement = [](const Vec&, const Vec& a) {
    Vec r = a;
    for (auto& v : r) v = std::max(0.0, v);
    return r;
  };
  out.grad_p = [dim](const Vec&, const Vec&) { return Matrix(dim, 0); };
  out.grad_a = [dim](const Vec&, const Vec& a) {
    Matrix jac(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) jac(i, i) = a[i] > 0.0 ? 1.0 : 0.0;
    return jac;
  };
  out.kink_distance = [](const Vec&, const Vec& a) {
    double d = std::numeric_limits<double>::infinity();
    for (double v : a) d = std::min(d, std::fabs(v));
    return d;
  };
  return make_paramfn(std::move(out));
}

// Column softmax of an r x c matrix; per column the Jacobian block is
// diag(s) - s s^T.
inline ParamFn softmax_cols(std::size_t rows, std::size_t cols) {
  ParamFn out;
  out.param_dim = 0;
  out.in_dim = out.out_dim = rows * cols;
  out.implement = [rows, cols](const Vec&, const Vec& a) {
    return softmax_columns(Matrix(rows, cols, a)).data();
  };
  out.grad_p = [rows, cols](const Vec&, const Vec&) { return Matrix(rows * cols, 0); };
  out.grad_a = [rows, cols](const Vec&, const Vec& a) {
    Matrix s = softmax_columns(Matrix(rows, cols, a));
    Matrix jac(rows * cols, rows * cols);
    for (std::size_t c = 0; c < cols; ++c)
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < rows; ++k)
          jac(i * cols + c, k * cols + c) = s(i, c) * ((i == k ? 1.0 : 0.0) - s(k, c));
    return jac;
  };
  return make_paramfn(std::move(out));
}

// (A, B) -> A B for A (p x q), B (q x r), both taken from the input.
inline ParamFn matmul_pair(std::size_t p, std::size_t q, std::size_t r) {
  ParamFn out;
  out.param_dim = 0;
  out.in_dim = p * q + q * r;
  out.out_dim = p * r;
  std::size_t cut = p * q;
  out.implement = [p, q, r, cut](const Vec&, const Vec& ab) {
    Matrix a(p, q, vecs::slice(ab, 0, cut));
    Matrix b(q, r, vecs::slice(ab, cut, q * r));
    return matmul(a, b).data();
  };
  out.grad_p = [p, r](const Vec&, const Vec&) { return Matrix(p * r, 0); };
  out.grad_a = [p, q, r, cut](const Vec&, const Vec& ab) {
    Matrix a(p, q, vecs::slice(ab, 0, cut));
    Matrix b(q, r, vecs::slice(ab, cut, q * r));
    Matrix jac(p * r, p * q + q * r);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < r; ++j)
        for (std::size_t k = 0; k < q; ++k) {
          jac(i * r + j, i * q + k) = b(k, j);
          jac(i * r + j, cut + k * r + j) = a(i, k);
        }
    return jac;
  };
  return make_paramfn(std::move(out));
}

// Attention scores S = (W_K X)^T (W_Q X) with parameters [W_K, W_Q] each
// m x d; input X (d x n), output S (n x n).
inline ParamFn attention_score(std::size_t d, std::size_t n, std::size_t m) {
  ParamFn out;
  out.param_dim = 2 * m * d;
  out.in_dim = d * n;
  out.out_dim = n * n;
  std::size_t cut = m * d;
  auto split = [cut, m, d](const Vec& p) {
    return std::pair<Matrix, Matrix>(Matrix(m, d, vecs::slice(p, 0, cut)),
                                     Matrix(m, d, vecs::slice(p, cut, cut)));
  };
  out.implement = [split, d, n](const Vec& p, const Vec& a) {
    auto [wk, wq] = split(p);
    Matrix x(d, n, a);
    return matmul(matmul(wk, x).transpose(), matmul(wq, x)).data();
  };
  out.grad_p = [split, d, n, m, cut](const Vec& p, const Vec& av) {
    auto [wk, wq] = split(p);
    Matrix x(d, n, av);
    Matrix kk = matmul(wk, x), qq = matmul(wq, x);
    Matrix jac(n * n, 2 * cut);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t mu = 0; mu < m; ++mu)
          for (std::size_t de = 0; de < d; ++de) {
            jac(a * n + b, mu * d + de) = x(de, a) * qq(mu, b);
            jac(a * n + b, cut + mu * d + de) = kk(mu, a) * x(de, b);
          }
    return jac;
  };
  out.grad_a = [split, d, n, m](const Vec& p, const Vec& av) {
    auto [wk, wq] = split(p);
    Matrix x(d, n, av);
    Matrix kk = matmul(wk, x), qq = matmul(wq, x);
    Matrix wk_t_q = matmul(wk.transpose(), qq);  // d x n
    Matrix wq_t_k = matmul(wq.transpose(), kk);  // d x n
    Matrix jac(n * n, d * n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t de = 0; de < d; ++de) {
          jac(a * n + b, de * n + a) += wk_t_q(de, b);
          jac(a * n + b, de * n + b) += wq_t_k(de, a);
        }
    return jac;
  };
  return make_paramfn(std::move(out));
}

// a -> [a, a, ..., a] (k copies).
inline ParamFn fanout(std::size_t k, std::size_t dim) {
  ParamFn out;
  out.param_dim = 0;
  out.in_dim = dim;
  out.out_dim = k * dim;
  out.implement = [k, dim](const Vec&, const Vec& a) {
    Vec r;
    r.reserve(k * dim);
    for (std::size_t c = 0; c < k; ++c) r.insert(r.end(), a.begin(), a.end());
    return r;
  };
  out.grad_p = [k, dim](const Vec&, const Vec&) { return Matrix(k * dim, 0); };
  out.grad_a = [k, dim](const Vec&, const Vec&) {
    Matrix jac(k * dim, dim);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < dim; ++i) jac(c * dim + i, i) = 1.0;
    return jac;
  };
  return make_paramfn(std::move(out));
}

// [a_1, ..., a_k] -> a_1 + ... + a_k.
inline ParamFn sum_k(std::size_t k, std::size_t dim) {
  ParamFn out;
  out.param_dim = 0;
  out.in_dim = k * dim;
  out.out_dim = dim;
  out.implement = [k, dim](const Vec&, const Vec& a) {
    Vec r(dim, 0.0);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < dim; ++i) r[i] += a[c * dim + i];
    return r;
  };
  out.grad_p = [dim](const Vec&, const Vec&) { return Matrix(dim, 0); };
  out.grad_a = [k, dim](const Vec&, const Vec&) {
    Matrix jac(dim, k * dim);
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t i = 0; i < dim; ++i) jac(i, c * dim + i) = 1.0;
    return jac;
  };
  return make_paramfn(std::move(out));
}

inline ParamFn add_const(Vec shift) {
  std::size_t dim = shift.size();
  ParamFn out;
  out.param_dim = 0;
  out.in_dim = out.out_dim = dim;
  out.implement = [shift](const Vec&, const Vec& a) {
    Vec r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += shift[i];
    return r;
  };
  out.grad_p = [dim](const Vec&, const Vec&) { return Matrix(dim, 0); };
  out.grad_a = [dim](const Vec&, const Vec&) { return Matrix::identity(dim); };
  return make_paramfn(std::move(out));
}

// a -> W a + b with parameters [W row-major, b].
inline ParamFn affine(std::size_t in, std::size_t outdim) {
  ParamFn out;
  out.param_dim = outdim * in + outdim;
  out.in_dim = in;
  out.out_dim = outdim;
  out.implement = [in, outdim](const Vec& p, const Vec& a) {
    Vec r(outdim, 0.0);
    for (std::size_t i = 0; i < outdim; ++i) {
      double sum = p[outdim * in + i];
      for (std::size_t j = 0; j < in; ++j) sum += p[i * in + j] * a[j];
      r[i] = sum;
    }
    return r;
  };
  out.grad_p = [in, outdim](const Vec&, const Vec& a) {
    Matrix jac(outdim, outdim * in + outdim);
    for (std::size_t i = 0; i < outdim; ++i) {
      for (std::size_t j = 0; j < in; ++j) jac(i, i * in + j) = a[j];
      jac(i, outdim * in + i) = 1.0;
    }
    return jac;
  };
  out.grad_a = [in, outdim](const Vec& p, const Vec&) {
    Matrix jac(outdim, in);
    for (std::size_t i = 0; i < outdim; ++i)
      for (std::size_t j = 0; j < in; ++j) jac(i, j) = p[i * in + j];
    return jac;
  };
  return make_paramfn(std::move(out));
}

// Scalar p * a.
inline ParamFn scale() {
  ParamFn out;
  out.param_dim = 1;
  out.in_dim = out.out_dim = 1;
  out.implement = [](const Vec& p, const Vec& a) { return Vec{p[0] * a[0]}; };
  out.grad_p = [](const Vec&, const Vec& a) { return Matrix(1, 1, {a[0]}); };
  out.grad_a = [](const Vec& p, const Vec&) { return Matrix(1, 1, {p[0]}); };
  return make_paramfn(std::move(out));
}

}  // namespace pf

// ---------------------------------------------------------------------------
// The lift: gradient-descent learner attached to a parameterized function.
// ---------------------------------------------------------------------------

struct LiftedLearner {
  Learner learner;
  double eps = 0.0;
  ErrorFunction err;
  ParamFn source;
};

namespace detail {

// Shared body of the lift; a zero rate yields the identity update, which the
// public lift rejects but the training CLI uses for its constant-trace mode.
inline LiftedLearner make_lifted(const ParamFn& pf_in, double eps, const ErrorFunction& err) {
  auto pf = std::make_shared<const ParamFn>(pf_in);
  LiftedLearner lifted;
  lifted.eps = eps;
  lifted.err = err;
  lifted.source = pf_in;
  Learner& l = lifted.learner;
  l.param_dim = pf->param_dim;
  l.in_dim = pf->in_dim;
  l.out_dim = pf->out_dim;
  l.implement = pf->implement;
  auto error_vector = [pf, err](const Vec& p, const Vec& a, const Vec& b) {
    Vec out = pf->implement(p, a);
    Vec d(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) d[j] = err.de_dx(out[j], b[j]);
    return d;
  };
  l.update = [pf, eps, error_vector](const Vec& p, const Vec& a, const Vec& b) {
    Vec d = error_vector(p, a, b);
    Matrix jp = pf->grad_p(p, a);
    Vec next = p;
    for (std::size_t j = 0; j < pf->param_dim; ++j) {
      double grad = 0.0;
      for (std::size_t out = 0; out < pf->out_dim; ++out) grad += jp(out, j) * d[out];
      next[j] -= eps * grad;
    }
    return next;
  };
  l.request = [pf, err, error_vector](const Vec& p, const Vec& a, const Vec& b) {
    Vec d = error_vector(p, a, b);
    Matrix ja = pf->grad_a(p, a);
    Vec req(pf->in_dim);
    for (std::size_t i = 0; i < pf->in_dim; ++i) {
      double grad = 0.0;
      for (std::size_t out = 0; out < pf->out_dim; ++out) grad += ja(out, i) * d[out];
      req[i] = err.inverse_de_dx(a[i], grad);
    }
    return req;
  };
  return lifted;
}

}  // namespace detail

// E(p, a, b) = sum_j e(I_j(p, a), b_j);
// update(p, a, b) = p - eps * grad_p E;
// request(p, a, b)_i = inverse of de/dx(a_i, -) applied to (grad_a E)_i.
inline LiftedLearner lift(const ParamFn& pf, double eps, const ErrorFunction& err) {
  if (!(eps > 0.0)) throw std::invalid_argument("lift: eps must be > 0");
  return detail::make_lifted(pf, eps, err);
}

struct FunctorialityReport {
  bool pass = false;
  double worst = 0.0;
};

// Lift of the composite vs composite of the lifts: implement, update and
// request compared at sampled (p, q, a, c), away from kinks.
inline FunctorialityReport functoriality_check(const ParamFn& pf1, const ParamFn& pf2, double eps,
                                               const ErrorFunction& err, std::size_t samples,
                                               SplitRng rng, double tol = 1e-9) {
  ParamFn composite = seq_pf(pf1, pf2);
  Learner lifted_composite = lift(composite, eps, err).learner;
  Learner composite_of_lifts =
      seq_compose(lift(pf1, eps, err).learner, lift(pf2, eps, err).learner);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Vec pq, a;
    detail::sample_point(composite, rng, pq, a);
    Vec c = vecs::random(pf2.out_dim, rng);
    worst = std::max(worst, vecs::max_abs_diff(lifted_composite.implement(pq, a),
                                               composite_of_lifts.implement(pq, a)));
    worst = std::max(worst, vecs::max_abs_diff(lifted_composite.update(pq, a, c),
                                               composite_of_lifts.update(pq, a, c)));
    worst = std::max(worst, vecs::max_abs_diff(lifted_composite.request(pq, a, c),
                                               composite_of_lifts.request(pq, a, c)));
  }
  FunctorialityReport rep;
  rep.worst = worst;
  rep.pass = worst <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// The transformer block as a parameterized function.
// ---------------------------------------------------------------------------

// Builds the block's forward map compositionally from the primitive family,
// so the chain rule is exactly sequential/parallel composition. The external
// parameter layout matches flatten_params: per head W_O, W_V, W_K, W_Q, then
// W1, W2, b1.
inline ParamFn block_as_paramfn(const TransformerBlock& templ) {
  std::size_t d = templ.d(), n = templ.n(), h = templ.h(), m = templ.m(), r = templ.r();
  std::size_t dn = d * n;

  auto head_pf = [&]() {
    // value path: W_V then W_O  -> params [W_V, W_O]
    ParamFn value = seq_pf(pf::linear_left(m, d, n), pf::linear_left(d, m, n));
    // score path: attention scores then column softmax -> params [W_K, W_Q]
    ParamFn score = seq_pf(pf::attention_score(d, n, m), pf::softmax_cols(n, n));
    ParamFn paths = seq_pf(pf::fanout(2, dn), par_pf(value, score));
    return seq_pf(paths, pf::matmul_pair(d, n, n));
  };

  // Attn(X) = X + sum_i head_i(X); raw head params [W_V, W_O, W_K, W_Q].
  ParamFn branches = pf::identity(dn);
  for (std::size_t i = 0; i < h; ++i) branches = par_pf(branches, head_pf());
  ParamFn attn_pf = seq_pf(seq_pf(pf::fanout(h + 1, dn), branches), pf::sum_k(h + 1, dn));

  // FF(A) = A + W2 relu(W1 A + b1 1^T); raw params [W1, b1, W2].
  ParamFn ff_branch = seq_pf(seq_pf(pf::linear_left(r, d, n), pf::bias_cols(r, n)),
                             seq_pf(pf::relu(r * n), pf::linear_left(d, r, n)));
  ParamFn ff_pf = seq_pf(seq_pf(pf::fanout(2, dn), par_pf(pf::identity(dn), ff_branch)),
                         pf::sum_k(2, dn));

  ParamFn raw = seq_pf(attn_pf, ff_pf);
  if (max_abs(templ.positional()) > 0.0)
    raw = seq_pf(pf::add_const(templ.positional().data()), raw);

  // Map the flatten_params layout onto the raw compositional layout.
  std::vector<std::size_t> raw_of_new(raw.param_dim);
  std::size_t md = m * d, dm = d * m;
  std::size_t head_size = 3 * md + dm;
  for (std::size_t i = 0; i < h; ++i) {
    std::size_t flat = i * head_size;       // W_O, W_V, W_K, W_Q
    std::size_t rawb = i * head_size;       // W_V, W_O, W_K, W_Q
    for (std::size_t k = 0; k < dm; ++k) raw_of_new[flat + k] = rawb + md + k;          // W_O
    for (std::size_t k = 0; k < md; ++k) raw_of_new[flat + dm + k] = rawb + k;          // W_V
    for (std::size_t k = 0; k < 2 * md; ++k)
      raw_of_new[flat + dm + md + k] = rawb + md + dm + k;                              // W_K, W_Q
  }
  std::size_t flat_tail = h * head_size;  // W1, W2, b1
  std::size_t raw_tail = h * head_size;   // W1, b1, W2
  std::size_t rd = r * d, dr = d * r;
  for (std::size_t k = 0; k < rd; ++k) raw_of_new[flat_tail + k] = raw_tail + k;         // W1
  for (std::size_t k = 0; k < dr; ++k) raw_of_new[flat_tail + rd + k] = raw_tail + rd + r + k;  // W2
  for (std::size_t k = 0; k < r; ++k) raw_of_new[flat_tail + rd + dr + k] = raw_tail + rd + k;  // b1

  return make_paramfn(reparam_permute(raw, std::move(raw_of_new)));
}

}  // namespace toposkit
