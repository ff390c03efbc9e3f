#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "toposkit/diagram.hpp"
#include "toposkit/report.hpp"

namespace toposkit {

namespace laws {

struct Outcome {
  bool pass = false;
  double deviation = 0.0;
};

struct LawCheck {
  std::string name;
  double default_tolerance;
  std::function<Outcome(SplitRng, double)> run;  // (per-check stream, tolerance)
};

// --------------------------- random generators ----------------------------

inline FinSet random_finset(SplitRng& rng, std::size_t min_size, std::size_t max_size,
                            const std::string& prefix) {
  std::size_t n = rng.uniform_int(min_size, max_size);
  std::vector<std::string> elems;
  for (std::size_t i = 0; i < n; ++i) elems.push_back(prefix + std::to_string(i));
  return FinSet(prefix, std::move(elems));
}

inline FinFn random_finfn(SplitRng& rng, const FinSet& dom, const FinSet& cod) {
  std::vector<std::size_t> map(dom.size());
  for (auto& v : map) v = rng.uniform_int(0, cod.size() - 1);
  return FinFn(dom, cod, std::move(map));
}

inline ParamFn random_affine(SplitRng&, std::size_t in, std::size_t out) {
  return pf::affine(in, out);
}

// Learner whose three maps are random quadratic polynomials; exercises the
// composition algebra on maps with no special structure.
inline Learner random_poly_learner(SplitRng& rng, std::size_t pdim, std::size_t adim,
                                   std::size_t bdim) {
  auto poly = [&rng](std::size_t in, std::size_t out) {
    std::vector<double> c0(out), c1(out * in), c2(out * in);
    for (auto& v : c0) v = rng.uniform(-0.5, 0.5);
    for (auto& v : c1) v = rng.uniform(-0.5, 0.5);
    for (auto& v : c2) v = rng.uniform(-0.2, 0.2);
    return [c0, c1, c2, in, out](const Vec& x) {
      Vec y(out);
      for (std::size_t o = 0; o < out; ++o) {
        double acc = c0[o];
        for (std::size_t i = 0; i < in; ++i)
          acc += c1[o * in + i] * x[i] + c2[o * in + i] * x[i] * x[i];
        y[o] = acc;
      }
      return y;
    };
  };
  Learner l;
  l.param_dim = pdim;
  l.in_dim = adim;
  l.out_dim = bdim;
  auto impl = poly(pdim + adim, bdim);
  auto upd = poly(pdim + adim + bdim, pdim);
  auto req = poly(pdim + adim + bdim, adim);
  l.implement = [impl](const Vec& p, const Vec& a) { return impl(vecs::concat(p, a)); };
  l.update = [upd](const Vec& p, const Vec& a, const Vec& b) {
    return upd(vecs::concat(vecs::concat(p, a), b));
  };
  l.request = [req](const Vec& p, const Vec& a, const Vec& b) {
    return req(vecs::concat(vecs::concat(p, a), b));
  };
  return l;
}

inline Square random_monic_square(SplitRng& rng) {
  FinSet dom = random_finset(rng, 1, 4, "i");
  FinSet cod = random_finset(rng, 1, 4, "o");
  ArrowObject g = random_finfn(rng, dom, cod);
  std::vector<bool> in_mask(dom.size()), out_mask(cod.size());
  for (std::size_t i = 0; i < cod.size(); ++i) out_mask[i] = rng.uniform_int(0, 1) == 1;
  for (std::size_t i = 0; i < dom.size(); ++i)
    in_mask[i] = out_mask[g.apply(i)] && rng.uniform_int(0, 1) == 1;
  return Subobject(g, in_mask, out_mask).inclusion();
}

// ------------------------------ the registry -------------------------------

inline const std::vector<LawCheck>& registry() {
  static const std::vector<LawCheck> checks = [] {
    std::vector<LawCheck> r;
    auto add = [&r](std::string name, double tol, std::function<Outcome(SplitRng, double)> fn) {
      r.push_back({std::move(name), tol, std::move(fn)});
    };

    // ----- numeric kernel -----
    add("matmul_associativity", 1e-9, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 20; ++t) {
        Matrix a = Matrix::random(3, 4, rng), b = Matrix::random(4, 2, rng),
               c = Matrix::random(2, 5, rng);
        Matrix lhs = matmul(matmul(a, b), c), rhs = matmul(a, matmul(b, c));
        worst = std::max(worst, max_abs_diff(lhs, rhs) / std::max(1.0, max_abs(lhs)));
      }
      return Outcome{worst <= tol, worst};
    });
    add("matmul_identity", 0.0, [](SplitRng rng, double tol) {
      Matrix m = Matrix::random(4, 3, rng);
      double worst = max_abs_diff(matmul(Matrix::identity(4), m), m);
      return Outcome{worst <= tol, worst};
    });
    add("softmax_column_sums", 1e-12, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 20; ++t) {
        Matrix s = softmax_columns(Matrix::random(5, 4, rng, -30.0, 30.0));
        for (std::size_t j = 0; j < s.cols(); ++j) {
          double sum = 0.0;
          for (std::size_t i = 0; i < s.rows(); ++i) sum += s(i, j);
          worst = std::max(worst, std::fabs(sum - 1.0));
        }
      }
      return Outcome{worst <= tol, worst};
    });
    add("softmax_shift_invariance", 1e-12, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 20; ++t) {
        Matrix s = Matrix::random(5, 3, rng, -5.0, 5.0);
        Matrix shifted = s;
        for (std::size_t j = 0; j < s.cols(); ++j) {
          double c = rng.uniform(-100.0, 100.0);
          for (std::size_t i = 0; i < s.rows(); ++i) shifted(i, j) += c;
        }
        worst = std::max(worst, max_abs_diff(softmax_columns(s), softmax_columns(shifted)));
      }
      return Outcome{worst <= tol, worst};
    });
    add("permutation_roundtrip", 0.0, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 20; ++t) {
        Matrix x = Matrix::random(3, 6, rng);
        Permutation p = Permutation::random(6, rng);
        worst = std::max(worst,
                         max_abs_diff(apply_permutation(apply_permutation(x, p), p.inverse()), x));
      }
      return Outcome{worst <= tol, worst};
    });
    add("permutation_matrix_agreement", 0.0, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 20; ++t) {
        Matrix x = Matrix::random(2, 5, rng);
        Permutation p = Permutation::random(5, rng);
        worst = std::max(worst, max_abs_diff(apply_permutation(x, p), matmul(x, p.to_matrix())));
      }
      return Outcome{worst <= tol, worst};
    });
    add("fd_gradient_quadratic", 1e-6, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 10; ++t) {
        std::size_t n = 4;
        Matrix q = Matrix::random(n, n, rng);
        Vec b = vecs::random(n, rng), at = vecs::random(n, rng);
        auto f = [&](const Vec& x) {
          double acc = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            acc += b[i] * x[i];
            for (std::size_t j = 0; j < n; ++j) acc += 0.5 * x[i] * q(i, j) * x[j];
          }
          return acc;
        };
        Vec grad = finite_difference_gradient(f, at, 1e-5);
        for (std::size_t i = 0; i < n; ++i) {
          double analytic = b[i];
          for (std::size_t j = 0; j < n; ++j)
            analytic += 0.5 * (q(i, j) + q(j, i)) * at[j];
          worst = std::max(worst, std::fabs(grad[i] - analytic) / std::max(1.0, std::fabs(analytic)));
        }
      }
      return Outcome{worst <= tol, worst};
    });

    // ----- transformer block -----
    add("equivariance", 1e-8, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 100; ++t) {
        TransformerBlock block = TransformerBlock::random(4, 5, 2, 2, 4, rng);
        Matrix x = Matrix::random(4, 5, rng, -3.0, 3.0);
        Permutation p = Permutation::random(5, rng);
        worst = std::max(worst, check_equivariance(block, x, p));
      }
      return Outcome{worst <= tol, worst};
    });
    add("transformer_zero_identity", 0.0, [](SplitRng rng, double tol) {
      TransformerBlock block(3, 4, 2, 2, 5);
      Matrix x = Matrix::random(3, 4, rng);
      double worst = max_abs_diff(forward(block, x), x);
      return Outcome{worst <= tol, worst};
    });
    add("transformer_flatten_roundtrip", 0.0, [](SplitRng rng, double tol) {
      TransformerBlock block = TransformerBlock::random(4, 3, 2, 2, 4, rng);
      if (block.param_count() != 100) return Outcome{false, 1.0};
      Vec flat = flatten_params(block);
      TransformerBlock back = unflatten_params(block, flat);
      double worst = vecs::max_abs_diff(flatten_params(back), flat);
      return Outcome{worst <= tol, worst};
    });
    add("transformer_continuity", 1e-2, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 10; ++t) {
        TransformerBlock block = TransformerBlock::random(4, 3, 2, 2, 4, rng);
        Matrix x = Matrix::random(4, 3, rng, -10.0, 10.0);
        Matrix y = forward(block, x);
        y.check_finite();
        Matrix dx = Matrix::random(4, 3, rng, -1e-6, 1e-6);
        worst = std::max(worst, max_abs_diff(forward(block, x + dx), y));
      }
      return Outcome{worst <= tol, worst};
    });

    // ----- finite set constructions -----
    auto construction_check = [](ShapeKind kind) {
      return [kind](SplitRng rng, double tol) {
        std::size_t failures = 0;
        for (int t = 0; t < 25; ++t) {
          FinSet x = random_finset(rng, 1, 4, "x"), y = random_finset(rng, 1, 4, "y"),
                 z = random_finset(rng, 1, 4, "z");
          SetDiagram d;
          bool limit = !shape_is_colimit(kind);
          switch (kind) {
            case ShapeKind::pullback:
              d = SetDiagram::cospan(random_finfn(rng, x, z), random_finfn(rng, y, z));
              break;
            case ShapeKind::pushout:
              d = SetDiagram::span(random_finfn(rng, z, x), random_finfn(rng, z, y));
              break;
            case ShapeKind::equalizer:
            case ShapeKind::coequalizer:
              d = SetDiagram::parallel_pair(random_finfn(rng, x, y), random_finfn(rng, x, y));
              break;
            default:
              d = SetDiagram::discrete(x, y);
              break;
          }
          SetConstruction c = detail::set_level_limit(kind, d);
          SetCone cone = detail::full_cone(d, c, limit);
          VerifyResult v = limit ? verify_limit(d, cone) : verify_colimit(d, cone);
          if (!v.pass) ++failures;
        }
        return Outcome{failures == 0, static_cast<double>(failures)};
      };
    };
    add("pullback_universal", 0.0, construction_check(ShapeKind::pullback));
    add("pushout_couniversal", 0.0, construction_check(ShapeKind::pushout));
    add("equalizer_universal", 0.0, construction_check(ShapeKind::equalizer));
    add("coequalizer_couniversal", 0.0, construction_check(ShapeKind::coequalizer));
    add("product_universal", 0.0, construction_check(ShapeKind::product));
    add("coproduct_couniversal", 0.0, construction_check(ShapeKind::coproduct));

    add("pullback_monic_stability", 0.0, [](SplitRng rng, double tol) {
      std::size_t failures = 0;
      for (int t = 0; t < 25; ++t) {
        FinSet z = random_finset(rng, 2, 4, "z");
        FinSet y = random_finset(rng, 1, 4, "y");
        std::size_t sub = rng.uniform_int(1, z.size());
        std::vector<std::string> xs(z.elements.begin(), z.elements.begin() + sub);
        FinSet x("x", xs);
        std::vector<std::size_t> incl(sub);
        for (std::size_t i = 0; i < sub; ++i) incl[i] = i;
        FinFn f(x, z, incl);  // monic
        FinFn g = random_finfn(rng, y, z);
        SetConstruction pb = pullback(f, g);
        if (!pb.legs[1].is_injective()) ++failures;
      }
      return Outcome{failures == 0, static_cast<double>(failures)};
    });

    add("cube_faces", 0.0, [](SplitRng rng, double tol) {
      std::size_t failures = 0;
      for (int t = 0; t < 25; ++t) {
        Square s1 = random_monic_square(rng);  // any commuting square works here
        const ArrowObject& g = s1.dst();
        FinSet i2 = random_finset(rng, 1, 3, "u"), o2 = random_finset(rng, 1, 3, "v");
        ArrowObject h = random_finfn(rng, i2, o2);
        std::vector<Square> homs = hom_squares(h, g);
        if (homs.empty()) continue;
        Square s2 = homs[rng.uniform_int(0, homs.size() - 1)];
        ArrowDiagram d;
        d.objects = {s1.src(), h, g};
        d.arrows = {{"s1", 0, 2, s1}, {"s2", 1, 2, s2}};
        ArrowLimitResult res = arrow_limit(ShapeKind::pullback, d);
        if (!res.dom_check.pass || !res.cod_check.pass || !res.legs_commute) ++failures;
      }
      return Outcome{failures == 0, static_cast<double>(failures)};
    });

    add("arrow_equalizer_componentwise", 0.0, [](SplitRng rng, double tol) {
      std::size_t failures = 0;
      for (int t = 0; t < 15; ++t) {
        FinSet a1 = random_finset(rng, 1, 3, "a"), b1 = random_finset(rng, 1, 3, "b");
        FinSet a2 = random_finset(rng, 1, 3, "c"), b2 = random_finset(rng, 1, 3, "d");
        ArrowObject u = random_finfn(rng, a1, b1), v = random_finfn(rng, a2, b2);
        std::vector<Square> homs = hom_squares(u, v);
        if (homs.size() < 2) continue;
        Square f = homs[rng.uniform_int(0, homs.size() - 1)];
        Square g = homs[rng.uniform_int(0, homs.size() - 1)];
        ArrowDiagram d;
        d.objects = {u, v};
        d.arrows = {{"f", 0, 1, f}, {"g", 0, 1, g}};
        ArrowLimitResult res = arrow_limit(ShapeKind::equalizer, d);
        if (!res.dom_check.pass || !res.cod_check.pass) ++failures;
      }
      return Outcome{failures == 0, static_cast<double>(failures)};
    });

    add("classifier_recovery", 0.0, [](SplitRng rng, double tol) {
      std::size_t failures = 0;
      for (int t = 0; t < 25; ++t) {
        Square sub = random_monic_square(rng);
        Square chi = classify(sub);
        if (!verify_classification(sub, chi).pass) ++failures;
      }
      return Outcome{failures == 0, static_cast<double>(failures)};
    });
    add("classifier_three_values", 0.0, [](SplitRng rng, double tol) {
      std::set<std::string> seen;
      for (int t = 0; t < 60; ++t) {
        Square chi = classify(random_monic_square(rng));
        for (std::size_t v : chi.top().map()) seen.insert(chi.top().cod().elements[v]);
      }
      double missing = 3.0 - static_cast<double>(seen.size());
      return Outcome{missing <= tol, missing};
    });

    add("exponential_currying", 0.0, [](SplitRng rng, double tol) {
      std::size_t failures = 0;
      for (int t = 0; t < 10; ++t) {
        FinSet s1 = random_finset(rng, 0, 2, "e"), s2 = random_finset(rng, 1, 2, "f");
        FinSet s3 = random_finset(rng, 0, 2, "g"), s4 = random_finset(rng, 1, 2, "h");
        FinSet s5 = random_finset(rng, 0, 2, "k"), s6 = random_finset(rng, 1, 2, "l");
        CurryingCheck c = check_currying(random_finfn(rng, s1, s2), random_finfn(rng, s3, s4),
                                         random_finfn(rng, s5, s6));
        if (!c.pass) ++failures;
      }
      return Outcome{failures == 0, static_cast<double>(failures)};
    });
    add("exponential_by_terminal", 0.0, [](SplitRng rng, double tol) {
      std::size_t failures = 0;
      for (int t = 0; t < 10; ++t) {
        FinSet si = random_finset(rng, 1, 3, "i"), so = random_finset(rng, 1, 3, "o");
        ArrowObject g = random_finfn(rng, si, so);
        Exponential e = exponential(terminal_arrow_object(), g);
        if (e.object.dom().size() != g.dom().size() || e.object.cod().size() != g.cod().size()) {
          ++failures;
          continue;
        }
        // The evident bijections E ~ dom(g), F ~ cod(g) must carry g^1 to g.
        for (std::size_t idx = 0; idx < e.element_squares.size(); ++idx) {
          std::size_t x = e.element_squares[idx].top().apply(0);
          std::size_t k_of_x = e.function_elements[e.object.apply(idx)].apply(0);
          if (k_of_x != g.apply(x)) ++failures;
        }
      }
      return Outcome{failures == 0, static_cast<double>(failures)};
    });

    // ----- Learn composition laws -----
    add("learn_seq_associativity", 1e-9, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 10; ++t) {
        Learner l1 = random_poly_learner(rng, 2, 2, 3);
        Learner l2 = random_poly_learner(rng, 1, 3, 2);
        Learner l3 = random_poly_learner(rng, 2, 2, 2);
        Learner lhs = seq_compose(seq_compose(l1, l2), l3);
        Learner rhs = seq_compose(l1, seq_compose(l2, l3));
        Vec p = vecs::random(lhs.param_dim, rng), a = vecs::random(lhs.in_dim, rng),
            c = vecs::random(lhs.out_dim, rng);
        worst = std::max(worst, vecs::max_abs_diff(lhs.implement(p, a), rhs.implement(p, a)));
        worst = std::max(worst, vecs::max_abs_diff(lhs.update(p, a, c), rhs.update(p, a, c)));
        worst = std::max(worst, vecs::max_abs_diff(lhs.request(p, a, c), rhs.request(p, a, c)));
      }
      return Outcome{worst <= tol, worst};
    });
    add("learn_seq_unit", 1e-9, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 10; ++t) {
        Learner l = random_poly_learner(rng, 2, 3, 2);
        Learner left = seq_compose(Learner::identity(3), l);
        Learner right = seq_compose(l, Learner::identity(2));
        Vec p = vecs::random(2, rng), a = vecs::random(3, rng), b = vecs::random(2, rng);
        worst = std::max(worst, vecs::max_abs_diff(left.implement(p, a), l.implement(p, a)));
        worst = std::max(worst, vecs::max_abs_diff(left.update(p, a, b), l.update(p, a, b)));
        worst = std::max(worst, vecs::max_abs_diff(left.request(p, a, b), l.request(p, a, b)));
        worst = std::max(worst, vecs::max_abs_diff(right.implement(p, a), l.implement(p, a)));
        worst = std::max(worst, vecs::max_abs_diff(right.update(p, a, b), l.update(p, a, b)));
        worst = std::max(worst, vecs::max_abs_diff(right.request(p, a, b), l.request(p, a, b)));
      }
      return Outcome{worst <= tol, worst};
    });
    add("learn_interchange", 1e-9, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 10; ++t) {
        Learner l1 = random_poly_learner(rng, 2, 2, 2), l2 = random_poly_learner(rng, 1, 2, 2);
        Learner l3 = random_poly_learner(rng, 2, 3, 2), l4 = random_poly_learner(rng, 1, 2, 3);
        Learner lhs = par_compose(seq_compose(l1, l2), seq_compose(l3, l4));
        Learner rhs = seq_compose(par_compose(l1, l3), par_compose(l2, l4));
        Vec p1 = vecs::random(2, rng), p2 = vecs::random(1, rng), p3 = vecs::random(2, rng),
            p4 = vecs::random(1, rng);
        Vec in = vecs::random(lhs.in_dim, rng), target = vecs::random(lhs.out_dim, rng);
        Vec lp = vecs::concat(vecs::concat(p1, p2), vecs::concat(p3, p4));
        Vec rp = vecs::concat(vecs::concat(p1, p3), vecs::concat(p2, p4));
        worst = std::max(worst, vecs::max_abs_diff(lhs.implement(lp, in), rhs.implement(rp, in)));
        Vec lu = lhs.update(lp, in, target), ru = rhs.update(rp, in, target);
        // Realign the two parameter layouts: [p1 p2 p3 p4] vs [p1 p3 p2 p4].
        Vec ru_aligned = vecs::concat(
            vecs::concat(vecs::slice(ru, 0, 2), vecs::slice(ru, 4, 1)),
            vecs::concat(vecs::slice(ru, 2, 2), vecs::slice(ru, 5, 1)));
        worst = std::max(worst, vecs::max_abs_diff(lu, ru_aligned));
        worst = std::max(worst,
                         vecs::max_abs_diff(lhs.request(lp, in, target), rhs.request(rp, in, target)));
      }
      return Outcome{worst <= tol, worst};
    });
    add("learn_equivalence_reflexive", 1e-9, [](SplitRng rng, double tol) {
      Learner l = random_poly_learner(rng, 3, 2, 2);
      EquivalenceReport rep = equivalent(l, l, LearnerEquivalence::identity(), 20, rng, tol);
      return Outcome{rep.pass, rep.worst};
    });
    add("learn_equivalence_scaling", 1e-9, [](SplitRng rng, double tol) {
      Learner l1 = lift(pf::affine(2, 2), 0.05, ErrorFunction::quadratic()).learner;
      Learner l2 = l1;
      l2.implement = [l1](const Vec& p, const Vec& a) {
        Vec half(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) half[i] = p[i] / 2.0;
        return l1.implement(half, a);
      };
      l2.update = [l1](const Vec& p, const Vec& a, const Vec& b) {
        Vec half(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) half[i] = p[i] / 2.0;
        Vec u = l1.update(half, a, b);
        for (auto& v : u) v *= 2.0;
        return u;
      };
      l2.request = [l1](const Vec& p, const Vec& a, const Vec& b) {
        Vec half(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) half[i] = p[i] / 2.0;
        return l1.request(half, a, b);
      };
      LearnerEquivalence eq;
      eq.forward = [](const Vec& p) {
        Vec q = p;
        for (auto& v : q) v *= 2.0;
        return q;
      };
      eq.inverse = [](const Vec& p) {
        Vec q = p;
        for (auto& v : q) v /= 2.0;
        return q;
      };
      EquivalenceReport rep = equivalent(l1, l2, eq, 20, rng, tol);
      return Outcome{rep.pass, rep.worst};
    });
    add("train_zero_rate_constant", 0.0, [](SplitRng rng, double tol) {
      Learner l = detail::make_lifted(pf::affine(2, 2), 0.0, ErrorFunction::quadratic()).learner;
      Vec p0 = vecs::random(l.param_dim, rng);
      std::vector<std::pair<Vec, Vec>> data;
      for (int i = 0; i < 5; ++i) data.emplace_back(vecs::random(2, rng), vecs::random(2, rng));
      TrainResult res = train(l, data, 3, p0);
      double worst = vecs::max_abs_diff(res.params, p0);
      for (double loss : res.losses) worst = std::max(worst, std::fabs(loss - res.losses[0]));
      return Outcome{worst <= tol, worst};
    });

    // ----- backprop functor -----
    add("lift_fixed_point", 1e-12, [](SplitRng rng, double tol) {
      double worst = 0.0;
      for (int t = 0; t < 10; ++t) {
        ParamFn f = pf::affine(3, 2);
        LiftedLearner lifted = lift(f, 0.1, ErrorFunction::quadratic());
        Vec p = vecs::random(f.param_dim, rng), a = vecs::random(3, rng);
        Vec b = f.implement(p, a);
        worst = std::max(worst, vecs::max_abs_diff(lifted.learner.update(p, a, b), p));
        worst = std::max(worst, vecs::max_abs_diff(lifted.learner.request(p, a, b), a));
      }
      return Outcome{worst <= tol, worst};
    });
    add("lift_hand_example", 1e-15, [](SplitRng, double tol) {
      LiftedLearner lifted = lift(pf::scale(), 0.1, ErrorFunction::quadratic());
      double worst = std::fabs(lifted.learner.update({1.0}, {2.0}, {0.0})[0] - 0.6);
      worst = std::max(worst, std::fabs(lifted.learner.request({1.0}, {2.0}, {0.0})[0] - 0.0));
      return Outcome{worst <= tol, worst};
    });
    add("functoriality_affine", 1e-9, [](SplitRng rng, double tol) {
      FunctorialityReport rep = functoriality_check(pf::affine(2, 3), pf::affine(3, 2), 0.05,
                                                    ErrorFunction::quadratic(), 25, rng, tol);
      return Outcome{rep.pass, rep.worst};
    });
    add("functoriality_relu_softmax", 1e-6, [](SplitRng rng, double tol) {
      ParamFn first = seq_pf(pf::affine(2, 4), pf::relu(4));
      ParamFn second = seq_pf(pf::affine(4, 4), pf::softmax_cols(4, 1));
      FunctorialityReport rep =
          functoriality_check(first, second, 0.05, ErrorFunction::quadratic(), 25, rng, tol);
      return Outcome{rep.pass, rep.worst};
    });
    add("jacobian_primitives", 1e-4, [](SplitRng rng, double tol) {
      double worst = 0.0;
      std::vector<ParamFn> prims = {pf::linear_left(3, 2, 2), pf::bias_cols(3, 2), pf::relu(6),
                                    pf::softmax_cols(3, 2),   pf::matmul_pair(2, 3, 2),
                                    pf::attention_score(3, 2, 2), pf::affine(3, 2), pf::scale()};
      for (const ParamFn& p : prims) {
        JacobianCheck c = validate_jacobians(p, 20, rng.split("point"));
        worst = std::max(worst, c.worst_rel);
      }
      return Outcome{worst <= tol, worst};
    });
    add("jacobian_block", 1e-4, [](SplitRng rng, double tol) {
      ParamFn block = block_as_paramfn(TransformerBlock(2, 2, 1, 1, 2));
      JacobianCheck c = validate_jacobians(block, 20, rng);
      return Outcome{c.worst_rel <= tol, c.worst_rel};
    });
    add("descent_step", 0.0, [](SplitRng rng, double tol) {
      std::size_t failures = 0;
      ErrorFunction err = ErrorFunction::quadratic();
      for (int t = 0; t < 10; ++t) {
        ParamFn f = seq_pf(pf::affine(2, 3), pf::affine(3, 2));
        Vec p = vecs::random(f.param_dim, rng), a = vecs::random(2, rng), b = vecs::random(2, rng);
        auto energy = [&](const Vec& params) {
          Vec out = f.implement(params, a);
          double acc = 0.0;
          for (std::size_t j = 0; j < out.size(); ++j) acc += err.e(out[j], b[j]);
          return acc;
        };
        double before = energy(p);
        if (before < 1e-12) continue;
        bool decreased = false;
        for (double eps = 0.25; eps > 1e-9; eps /= 2.0) {
          if (energy(lift(f, eps, err).learner.update(p, a, b)) < before) {
            decreased = true;
            break;
          }
        }
        if (!decreased) ++failures;
      }
      return Outcome{failures == 0, static_cast<double>(failures)};
    });

    // ----- internal logic -----
    add("heyting_adjunction", 0.0, [](SplitRng rng, double tol) {
      std::size_t violations = 0;
      for (int t = 0; t < 6; ++t) {
        FinSet dom = random_finset(rng, 1, 3, "a"), cod = random_finset(rng, 1, 3, "b");
        SubobjectLattice lat(random_finfn(rng, dom, cod));
        for (const Subobject& x : lat.elements())
          for (const Subobject& y : lat.elements()) {
            Subobject imp = lat.implies(x, y);
            for (const Subobject& z : lat.elements()) {
              bool lhs = lat.leq(z, imp);
              bool rhs = lat.leq(lat.meet(z, x), y);
              if (lhs != rhs) ++violations;
            }
          }
      }
      return Outcome{violations == 0, static_cast<double>(violations)};
    });
    add("heyting_distributivity", 0.0, [](SplitRng rng, double tol) {
      std::size_t violations = 0;
      for (int t = 0; t < 6; ++t) {
        FinSet dom = random_finset(rng, 1, 3, "a"), cod = random_finset(rng, 1, 3, "b");
        SubobjectLattice lat(random_finfn(rng, dom, cod));
        for (const Subobject& x : lat.elements())
          for (const Subobject& y : lat.elements())
            for (const Subobject& z : lat.elements())
              if (!(lat.meet(x, lat.join(y, z)) == lat.join(lat.meet(x, y), lat.meet(x, z))))
                ++violations;
      }
      return Outcome{violations == 0, static_cast<double>(violations)};
    });
    add("heyting_excluded_middle_fails", 0.0, [](SplitRng, double tol) {
      // The two-point collapse and Omega itself both exhibit x with
      // x v not(x) != top.
      FinSet d2("d", {"x", "y"}), c1("c", {"s"});
      SubobjectLattice collapse(FinFn(d2, c1, {0, 0}));
      auto has_violation = [](const SubobjectLattice& lat) {
        for (const Subobject& x : lat.elements())
          if (!(lat.join(x, lat.negate(x)) == lat.top())) return true;
        return false;
      };
      SubobjectLattice omega(SubobjectClassifier::standard().omega);
      bool ok = has_violation(collapse) && has_violation(omega);
      return Outcome{ok, ok ? 0.0 : 1.0};
    });
    add("forcing_characteristic_agreement", 0.0, [](SplitRng, double tol) {
      FinSet ip("Ip", {"a", "b", "c"}), op("Op", {"p", "q"});
      ArrowObject g = FinFn::from_pairs(ip, op, {{"a", "p"}, {"b", "p"}, {"c", "q"}});
      SubobjectLattice lat(g);
      Subobject s = Subobject::from_names(g, {"a"}, {"p"});
      Subobject t = Subobject::from_names(g, {"c"}, {"q"});
      std::vector<Formula> formulas = {
          Formula::in("x", s),
          Formula::negation(Formula::in("x", s)),
          Formula::conj(Formula::in("x", s), Formula::in("x", t)),
          Formula::disj(Formula::in("x", s), Formula::in("x", t)),
          Formula::implies(Formula::in("x", s), Formula::in("x", t)),
      };
      ForcingContext cx(ForcingOptions{2});
      std::size_t disagreements = 0;
      for (const Formula& phi : formulas) {
        Subobject truth = truth_subobject(phi, "x", lat);
        for (const ArrowObject& u : cx.object_pool()) {
          for (const Square& alpha : hom_squares(u, g)) {
            GeneralizedElement ge{alpha};
            bool forced = cx.forces(ge, "x", phi);
            bool expected = characteristic_forced(ge, truth);
            if (forced != expected) ++disagreements;
          }
        }
      }
      return Outcome{disagreements == 0, static_cast<double>(disagreements)};
    });
    add("forcing_monotonicity", 0.0, [](SplitRng, double tol) {
      FinSet ip("Ip", {"a", "b", "c"}), op("Op", {"p", "q"});
      ArrowObject g = FinFn::from_pairs(ip, op, {{"a", "p"}, {"b", "p"}, {"c", "q"}});
      Subobject s = Subobject::from_names(g, {"a", "b"}, {"p"});
      Formula phi = Formula::in("x", s);
      ForcingContext cx(ForcingOptions{2});
      std::size_t violations = 0, checked = 0;
      for (const ArrowObject& u : cx.object_pool()) {
        for (const Square& alpha : hom_squares(u, g)) {
          NaturalityReport rep = check_monotonicity_local_character(phi, "x", {alpha}, cx);
          checked += rep.arrows_checked;
          if (!rep.monotone) ++violations;
        }
      }
      return Outcome{violations == 0 && checked > 0, static_cast<double>(violations)};
    });
    add("forcing_local_character", 0.0, [](SplitRng, double tol) {
      FinSet ip("Ip", {"a", "b", "c"}), op("Op", {"p", "q"});
      ArrowObject g = FinFn::from_pairs(ip, op, {{"a", "p"}, {"b", "p"}, {"c", "q"}});
      Subobject s = Subobject::from_names(g, {"a", "b"}, {"p"});
      Formula phi = Formula::in("x", s);
      ForcingContext cx(ForcingOptions{2});
      std::size_t violations = 0;
      for (const ArrowObject& u : cx.object_pool()) {
        for (const Square& alpha : hom_squares(u, g)) {
          NaturalityReport rep = check_monotonicity_local_character(phi, "x", {alpha}, cx);
          if (!rep.local) ++violations;
        }
      }
      // A stage-size predicate outside the language must be caught.
      Formula bad = Formula::raw("stage-has-two-inputs", [](const ArrowObject& st, const Env&) {
        return st.dom().size() >= 2;
      });
      ArrowObject u1 = FinFn::identity(FinSet("U1", {"u"}));
      Square alpha(u1, g, FinFn::constant(u1.dom(), ip, "a"), FinFn::constant(u1.cod(), op, "p"));
      NaturalityReport rep = check_monotonicity_local_character(bad, "x", {alpha}, cx);
      bool caught = !rep.local;
      return Outcome{violations == 0 && caught, static_cast<double>(violations)};
    });

    // ----- diagram DSL -----
    add("dsl_roundtrip", 0.0, [](SplitRng, double tol) {
      const char* text =
          "shape pullback\n"
          "set X = { x1, x2 }\nset Y = { y1, y2 }\nset Z = { z1, z2 }\n"
          "fn f : X -> Z { x1 -> z1, x2 -> z2 }\n"
          "fn g : Y -> Z { y1 -> z1, y2 -> z1 }\n"
          "assign A := X\nassign B := Y\nassign C := Z\nassign f := f\nassign g := g\n";
      Diagram d = parse_diagram(text);
      Diagram d2 = parse_diagram(serialize_diagram(d));
      bool ok = d == d2;
      return Outcome{ok, ok ? 0.0 : 1.0};
    });
    add("dsl_solve_pullback", 0.0, [](SplitRng, double tol) {
      const char* text =
          "shape pullback\n"
          "set X = { x1, x2 }\nset Y = { y1, y2 }\nset Z = { z1, z2 }\n"
          "fn f : X -> Z { x1 -> z1, x2 -> z2 }\n"
          "fn g : Y -> Z { y1 -> z1, y2 -> z1 }\n"
          "assign A := X\nassign B := Y\nassign C := Z\nassign f := f\nassign g := g\n";
      SolveResult res = solve(parse_diagram(text));
      bool ok = res.verified() && res.set_construction.object.size() == 2;
      return Outcome{ok, ok ? 0.0 : 1.0};
    });
    add("compile_chain_matches_lift", 1e-9, [](SplitRng rng, double tol) {
      const char* text =
          "shape daisy_chain(2)\n"
          "paramfn P = affine 2 3\nparamfn Q = affine 3 2\n"
          "bind a1 := P\nbind a2 := Q\n";
      Learner compiled = compile_to_learner(parse_diagram(text), 0.05, ErrorFunction::quadratic());
      ParamFn composite = seq_pf(pf::affine(2, 3), pf::affine(3, 2));
      Learner direct = lift(composite, 0.05, ErrorFunction::quadratic()).learner;
      double worst = 0.0;
      for (int t = 0; t < 10; ++t) {
        Vec p = vecs::random(compiled.param_dim, rng), a = vecs::random(2, rng),
            c = vecs::random(2, rng);
        worst = std::max(worst, vecs::max_abs_diff(compiled.implement(p, a), direct.implement(p, a)));
        worst = std::max(worst, vecs::max_abs_diff(compiled.update(p, a, c), direct.update(p, a, c)));
        worst = std::max(worst, vecs::max_abs_diff(compiled.request(p, a, c), direct.request(p, a, c)));
      }
      return Outcome{worst <= tol, worst};
    });

    return r;
  }();
  return checks;
}

}  // namespace laws

// Runs every registered law check with a per-check RNG stream split from the
// seed. Tolerance overrides are keyed by exact check name.
inline Report run_laws(const RunConfig& config) {
  Report report;
  SplitRng base(config.seed);
  for (const laws::LawCheck& check : laws::registry()) {
    double tol = check.default_tolerance;
    auto it = config.tolerance_overrides.find(check.name);
    if (it != config.tolerance_overrides.end()) tol = it->second;
    auto start = std::chrono::steady_clock::now();
    laws::Outcome out = check.run(base.split(check.name), tol);
    auto stop = std::chrono::steady_clock::now();
    CheckResult result;
    result.name = check.name;
    result.pass = out.pass;
    result.deviation = out.deviation;
    result.tolerance = tol;
    result.elapsed_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    report.checks.push_back(std::move(result));
  }
  std::sort(report.checks.begin(), report.checks.end(),
            [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
  return report;
}

}  // namespace toposkit
