#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "toposkit/rng.hpp"

namespace toposkit {

using Vec = std::vector<double>;

namespace vecs {

inline Vec concat(const Vec& a, const Vec& b) {
  Vec out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline Vec slice(const Vec& v, std::size_t from, std::size_t len) {
  return Vec(v.begin() + from, v.begin() + from + len);
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("max_abs_diff: length mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  double mx = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mx = std::max(mx, std::fabs(a[i] - b[i]));
  return mx;
}

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline Vec random(std::size_t n, SplitRng& rng, double lo = -1.0, double hi = 1.0) {
  Vec out(n);
  for (auto& x : out) x = rng.uniform(lo, hi);
  return out;
}

}  // namespace vecs

// A learner: parameter space P = R^param_dim together with implementation
// I: P x A -> B, update U: P x A x B -> P, and request r: P x A x B -> A.
struct Learner {
  std::size_t param_dim = 0;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::function<Vec(const Vec&, const Vec&)> implement;
  std::function<Vec(const Vec&, const Vec&, const Vec&)> update;
  std::function<Vec(const Vec&, const Vec&, const Vec&)> request;

  // Trivial parameter space; implement passes the input through, request
  // passes the target back.
  static Learner identity(std::size_t dim) {
    Learner l;
    l.param_dim = 0;
    l.in_dim = l.out_dim = dim;
    l.implement = [](const Vec&, const Vec& a) { return a; };
    l.update = [](const Vec& p, const Vec&, const Vec&) { return p; };
    l.request = [](const Vec&, const Vec&, const Vec& b) { return b; };
    return l;
  }
};

namespace detail {
inline void check_dims(const Learner& l, const Vec& p, const Vec& a, const char* who) {
  if (p.size() != l.param_dim || a.size() != l.in_dim)
    throw std::invalid_argument(std::string(who) + ": got |p|=" + std::to_string(p.size()) +
                                ", |a|=" + std::to_string(a.size()) + ", expected " +
                                std::to_string(l.param_dim) + ", " + std::to_string(l.in_dim));
}
}  // namespace detail

// Sequential composite with parameter space P x Q (left factor first):
//   (I.J)(p,q,a)   = J(q, I(p,a))
//   (U.V)(p,q,a,c) = ( U(p, a, s(q, I(p,a), c)), V(q, I(p,a), c) )
//   (r.s)(p,q,a,c) = r(p, a, s(q, I(p,a), c))
inline Learner seq_compose(const Learner& l1_in, const Learner& l2_in) {
  if (l1_in.out_dim != l2_in.in_dim)
    throw std::invalid_argument("seq_compose: dimension mismatch (" +
                                std::to_string(l1_in.out_dim) + " vs " +
                                std::to_string(l2_in.in_dim) + ")");
  // Children live behind shared pointers so nested composites stay cheap to
  // copy into closures.
  auto l1 = std::make_shared<const Learner>(l1_in);
  auto l2 = std::make_shared<const Learner>(l2_in);
  Learner out;
  out.param_dim = l1->param_dim + l2->param_dim;
  out.in_dim = l1->in_dim;
  out.out_dim = l2->out_dim;
  std::size_t cut = l1->param_dim;
  out.implement = [l1, l2, cut](const Vec& pq, const Vec& a) {
    Vec p = vecs::slice(pq, 0, cut), q = vecs::slice(pq, cut, pq.size() - cut);
    detail::check_dims(*l1, p, a, "seq implement");
    return l2->implement(q, l1->implement(p, a));
  };
  out.update = [l1, l2, cut](const Vec& pq, const Vec& a, const Vec& c) {
    Vec p = vecs::slice(pq, 0, cut), q = vecs::slice(pq, cut, pq.size() - cut);
    Vec b = l1->implement(p, a);
    Vec request_back = l2->request(q, b, c);
    return vecs::concat(l1->update(p, a, request_back), l2->update(q, b, c));
  };
  out.request = [l1, l2, cut](const Vec& pq, const Vec& a, const Vec& c) {
    Vec p = vecs::slice(pq, 0, cut), q = vecs::slice(pq, cut, pq.size() - cut);
    Vec b = l1->implement(p, a);
    return l1->request(p, a, l2->request(q, b, c));
  };
  return out;
}

// Parallel composite on concatenated spaces; update and request act
// componentwise on their respective halves.
inline Learner par_compose(const Learner& l1_in, const Learner& l2_in) {
  auto l1 = std::make_shared<const Learner>(l1_in);
  auto l2 = std::make_shared<const Learner>(l2_in);
  Learner out;
  out.param_dim = l1->param_dim + l2->param_dim;
  out.in_dim = l1->in_dim + l2->in_dim;
  out.out_dim = l1->out_dim + l2->out_dim;
  std::size_t pcut = l1->param_dim, acut = l1->in_dim, bcut = l1->out_dim;
  out.implement = [l1, l2, pcut, acut](const Vec& pq, const Vec& ac) {
    Vec p = vecs::slice(pq, 0, pcut), q = vecs::slice(pq, pcut, pq.size() - pcut);
    Vec a = vecs::slice(ac, 0, acut), c = vecs::slice(ac, acut, ac.size() - acut);
    return vecs::concat(l1->implement(p, a), l2->implement(q, c));
  };
  out.update = [l1, l2, pcut, acut, bcut](const Vec& pq, const Vec& ac, const Vec& bd) {
    Vec p = vecs::slice(pq, 0, pcut), q = vecs::slice(pq, pcut, pq.size() - pcut);
    Vec a = vecs::slice(ac, 0, acut), c = vecs::slice(ac, acut, ac.size() - acut);
    Vec b = vecs::slice(bd, 0, bcut), d = vecs::slice(bd, bcut, bd.size() - bcut);
    return vecs::concat(l1->update(p, a, b), l2->update(q, c, d));
  };
  out.request = [l1, l2, pcut, acut, bcut](const Vec& pq, const Vec& ac, const Vec& bd) {
    Vec p = vecs::slice(pq, 0, pcut), q = vecs::slice(pq, pcut, pq.size() - pcut);
    Vec a = vecs::slice(ac, 0, acut), c = vecs::slice(ac, acut, ac.size() - acut);
    Vec b = vecs::slice(bd, 0, bcut), d = vecs::slice(bd, bcut, bd.size() - bcut);
    return vecs::concat(l1->request(p, a, b), l2->request(q, c, d));
  };
  return out;
}

// Witness of learner equivalence: a bijection between parameter spaces with
// an explicit inverse.
struct LearnerEquivalence {
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> inverse;

  static LearnerEquivalence identity() {
    auto id = [](const Vec& p) { return p; };
    return LearnerEquivalence{id, id};
  }
};

struct EquivalenceReport {
  bool pass = false;
  double worst = 0.0;
};

// Checks I'(f(p), a) = I(p, a), U'(f(p), a, b) = f(U(p, a, b)) and
// r'(f(p), a, b) = r(p, a, b) on sampled points, plus that the bijection's
// round trips hold.
inline EquivalenceReport equivalent(const Learner& l1, const Learner& l2,
                                    const LearnerEquivalence& eq, std::size_t samples,
                                    SplitRng rng, double tol = 1e-9) {
  EquivalenceReport rep;
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Vec p = vecs::random(l1.param_dim, rng);
    Vec a = vecs::random(l1.in_dim, rng);
    Vec b = vecs::random(l1.out_dim, rng);
    Vec fp = eq.forward(p);
    worst = std::max(worst, vecs::max_abs_diff(eq.inverse(fp), p));
    worst = std::max(worst, vecs::max_abs_diff(eq.forward(eq.inverse(fp)), fp));
    worst = std::max(worst, vecs::max_abs_diff(l2.implement(fp, a), l1.implement(p, a)));
    worst = std::max(worst, vecs::max_abs_diff(l2.update(fp, a, b),
                                               eq.forward(l1.update(p, a, b))));
    worst = std::max(worst, vecs::max_abs_diff(l2.request(fp, a, b), l1.request(p, a, b)));
  }
  rep.worst = worst;
  rep.pass = worst <= tol;
  return rep;
}

struct TrainResult {
  Vec params;
  std::vector<double> losses;  // losses[0] is the initial loss, then one per epoch
};

inline double quadratic_sample_loss(const Vec& predicted, const Vec& target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    double d = predicted[i] - target[i];
    sum += 0.5 * d * d;
  }
  return sum;
}

// Iterated application of the update map, one pass over the dataset per
// epoch, in order. Deterministic given p0 and the dataset order. The loss
// trace sums the configured per-sample error over the dataset.
inline TrainResult train(
    const Learner& l, const std::vector<std::pair<Vec, Vec>>& dataset, std::size_t epochs,
    Vec p0,
    const std::function<double(const Vec&, const Vec&)>& sample_loss = quadratic_sample_loss) {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (p0.size() != l.param_dim)
    throw std::invalid_argument("train: |p0|=" + std::to_string(p0.size()) + ", expected " +
                                std::to_string(l.param_dim));
  auto total_loss = [&](const Vec& p) {
    double sum = 0.0;
    for (const auto& [a, b] : dataset) sum += sample_loss(l.implement(p, a), b);
    return sum;
  };
  TrainResult result;
  result.params = std::move(p0);
  result.losses.push_back(total_loss(result.params));
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    for (const auto& [a, b] : dataset) {
      ++step;
      result.params = l.update(result.params, a, b);
      if (!vecs::all_finite(result.params))
        throw std::runtime_error("train: non-finite parameters at step " + std::to_string(step));
    }
    double loss = total_loss(result.params);
    if (!std::isfinite(loss))
      throw std::runtime_error("train: non-finite loss at step " + std::to_string(step));
    result.losses.push_back(loss);
  }
  return result;
}

// Comma-separated `step,loss` lines for external plotting.
inline std::string trace_to_csv(const std::vector<double>& losses) {
  std::ostringstream os;
  os.precision(17);
  os << "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) os << i << "," << losses[i] << "\n";
  return os.str();
}

}  // namespace toposkit
