#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "toposkit/finset.hpp"

namespace toposkit {

// Objects of the arrow category are plain finite functions.
using ArrowObject = FinFn;

// Morphism of the arrow category: a commuting pair (top, bottom) between two
// functions. Commutativity is enforced at construction.
class Square {
 public:
  Square() = default;

  Square(FinFn src, FinFn dst, FinFn top, FinFn bottom)
      : src_(std::move(src)), dst_(std::move(dst)), top_(std::move(top)),
        bottom_(std::move(bottom)) {
    if (top_.dom() != src_.dom() || top_.cod() != dst_.dom() || bottom_.dom() != src_.cod() ||
        bottom_.cod() != dst_.cod())
      throw std::invalid_argument("Square: component endpoints do not match src/dst");
    if (compose(dst_, top_) != compose(bottom_, src_))
      throw std::invalid_argument("Square: top/bottom pair does not commute");
  }

  static Square identity(const ArrowObject& obj) {
    return Square(obj, obj, FinFn::identity(obj.dom()), FinFn::identity(obj.cod()));
  }

  const FinFn& src() const { return src_; }
  const FinFn& dst() const { return dst_; }
  const FinFn& top() const { return top_; }
  const FinFn& bottom() const { return bottom_; }

  bool is_monic() const { return top_.is_injective() && bottom_.is_injective(); }
  bool is_epic() const { return top_.is_surjective() && bottom_.is_surjective(); }

  friend bool operator==(const Square& a, const Square& b) {
    return a.src_ == b.src_ && a.dst_ == b.dst_ && a.top_ == b.top_ && a.bottom_ == b.bottom_;
  }
  friend bool operator!=(const Square& a, const Square& b) { return !(a == b); }

 private:
  FinFn src_, dst_, top_, bottom_;
};

// Horizontal composition: a then b.
inline Square compose_squares(const Square& a, const Square& b) {
  if (a.dst() != b.src())
    throw std::invalid_argument("compose_squares: endpoint mismatch between a.dst and b.src");
  return Square(a.src(), b.dst(), compose(b.top(), a.top()), compose(b.bottom(), a.bottom()));
}

// All squares a -> b, enumerated deterministically.
inline std::vector<Square> hom_squares(const ArrowObject& a, const ArrowObject& b) {
  std::vector<Square> out;
  for (const FinFn& top : all_functions(a.dom(), b.dom()))
    for (const FinFn& bottom : all_functions(a.cod(), b.cod()))
      if (compose(b, top) == compose(bottom, a)) out.emplace_back(a, b, top, bottom);
  return out;
}

inline ArrowObject terminal_arrow_object() {
  return FinFn::identity(FinSet("One", {"*"}));
}

inline ArrowObject initial_arrow_object() {
  return FinFn(FinSet("Zero", {}), FinSet("Zero", {}), {});
}

// The unique square from any object into the terminal arrow object.
inline Square bang_square(const ArrowObject& obj) {
  ArrowObject one = terminal_arrow_object();
  return Square(obj, one, FinFn::constant(obj.dom(), one.dom(), "*"),
                FinFn::constant(obj.cod(), one.cod(), "*"));
}

// ---------------------------------------------------------------------------
// Diagrams in the arrow category and their pointwise (co)limits.
// ---------------------------------------------------------------------------

enum class ShapeKind {
  daisy_chain,
  pullback,
  pushout,
  equalizer,
  coequalizer,
  product,
  coproduct,
  cube,
};

inline bool shape_is_colimit(ShapeKind k) {
  return k == ShapeKind::pushout || k == ShapeKind::coequalizer || k == ShapeKind::coproduct;
}

struct ArrowDiagram {
  struct Arrow {
    std::string label;
    std::size_t src, dst;
    Square sq;
  };
  std::vector<ArrowObject> objects;
  std::vector<Arrow> arrows;
};

struct ArrowLimitResult {
  ArrowObject apex;           // the induced connecting function
  std::vector<Square> legs;   // one per diagram object
  VerifyResult dom_check;     // set-level verification on the domain components
  VerifyResult cod_check;     // set-level verification on the codomain components
  bool legs_commute = false;  // every leg is a genuine square (faces of the cube)
};

namespace detail {

inline SetDiagram component_diagram(const ArrowDiagram& d, bool dom_side) {
  SetDiagram out;
  for (const auto& obj : d.objects) out.objects.push_back(dom_side ? obj.dom() : obj.cod());
  for (const auto& a : d.arrows)
    out.arrows.push_back({a.label, a.src, a.dst, dom_side ? a.sq.top() : a.sq.bottom()});
  return out;
}

inline SetConstruction set_level_limit(ShapeKind kind, const SetDiagram& d) {
  switch (kind) {
    case ShapeKind::pullback:
      return pullback(d.arrows[0].fn, d.arrows[1].fn);
    case ShapeKind::equalizer:
      return equalizer(d.arrows[0].fn, d.arrows[1].fn);
    case ShapeKind::product:
      return product(d.objects[0], d.objects[1]);
    case ShapeKind::pushout:
      return pushout(d.arrows[0].fn, d.arrows[1].fn);
    case ShapeKind::coequalizer:
      return coequalizer(d.arrows[0].fn, d.arrows[1].fn);
    case ShapeKind::coproduct:
      return coproduct(d.objects[0], d.objects[1]);
    default:
      throw std::invalid_argument("set_level_limit: unsupported shape");
  }
}

// Legs of the full set-level cone, including derived legs of non-free
// objects (e.g. the leg into the cospan's shared codomain).
inline SetCone full_cone(const SetDiagram& d, const SetConstruction& c, bool limit) {
  SetCone cone{c.object, {}};
  cone.legs.resize(d.objects.size());
  std::vector<bool> have(d.objects.size(), false);
  // The construction's legs attach to the free objects in declaration order.
  std::vector<bool> bound = limit ? std::vector<bool>(d.objects.size(), false)
                                  : std::vector<bool>(d.objects.size(), false);
  std::vector<bool> is_free(d.objects.size(), true);
  for (const auto& a : d.arrows) is_free[limit ? a.dst : a.src] = false;
  std::size_t k = 0;
  for (std::size_t i = 0; i < d.objects.size(); ++i) {
    if (is_free[i]) {
      cone.legs[i] = c.legs[k++];
      have[i] = true;
    }
  }
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto& a : d.arrows) {
      if (limit) {
        if (have[a.src] && !have[a.dst]) {
          cone.legs[a.dst] = compose(a.fn, cone.legs[a.src]);
          have[a.dst] = true;
          progress = true;
        }
      } else {
        if (have[a.dst] && !have[a.src]) {
          cone.legs[a.src] = compose(cone.legs[a.dst], a.fn);
          have[a.src] = true;
          progress = true;
        }
      }
    }
  }
  for (bool h : have)
    if (!h) throw std::invalid_argument("full_cone: diagram has an unreachable object");
  return cone;
}

}  // namespace detail

// Pointwise (co)limit in the arrow category: build the set-level construction
// on the domain components and on the codomain components, then the connecting
// function between the two apexes is the unique mediating arrow. Every leg is
// returned as a commuting square and both levels carry exhaustive
// universal-property certificates.
inline ArrowLimitResult arrow_limit(ShapeKind kind, const ArrowDiagram& d,
                                    const VerifyOptions& opts = {}) {
  if (kind == ShapeKind::daisy_chain || kind == ShapeKind::cube)
    throw std::invalid_argument("arrow_limit: unsupported shape");
  for (const auto& a : d.arrows) {
    if (a.sq.src() != d.objects[a.src] || a.sq.dst() != d.objects[a.dst])
      throw std::invalid_argument("arrow_limit: square '" + a.label +
                                  "' does not match its endpoints");
  }
  bool limit = !shape_is_colimit(kind);
  SetDiagram dom_diag = detail::component_diagram(d, true);
  SetDiagram cod_diag = detail::component_diagram(d, false);
  SetConstruction dom_c = detail::set_level_limit(kind, dom_diag);
  SetConstruction cod_c = detail::set_level_limit(kind, cod_diag);
  SetCone dom_cone = detail::full_cone(dom_diag, dom_c, limit);
  SetCone cod_cone = detail::full_cone(cod_diag, cod_c, limit);

  ArrowLimitResult result;
  if (limit) {
    // Connecting function P_dom -> P_cod: mediate the cone with legs
    // (object_i о dom-leg_i) through the codomain-level limit.
    SetCone image_cone{dom_cone.apex, {}};
    for (std::size_t i = 0; i < d.objects.size(); ++i)
      image_cone.legs.push_back(compose(d.objects[i], dom_cone.legs[i]));
    FinFn connecting;
    if (detail::count_mediating_over(cod_cone, image_cone, &connecting) != 1)
      throw std::runtime_error("arrow_limit: induced connecting function is not unique");
    result.apex = connecting;
    result.legs_commute = true;
    for (std::size_t i = 0; i < d.objects.size(); ++i) {
      result.legs.emplace_back(result.apex, d.objects[i], dom_cone.legs[i], cod_cone.legs[i]);
    }
    result.dom_check = verify_limit(dom_diag, dom_cone, opts);
    result.cod_check = verify_limit(cod_diag, cod_cone, opts);
  } else {
    SetCone image_cone{cod_cone.apex, {}};
    for (std::size_t i = 0; i < d.objects.size(); ++i)
      image_cone.legs.push_back(compose(cod_cone.legs[i], d.objects[i]));
    FinFn connecting;
    if (detail::count_mediating_under(dom_cone, image_cone, &connecting) != 1)
      throw std::runtime_error("arrow_limit: induced connecting function is not unique");
    result.apex = connecting;
    result.legs_commute = true;
    for (std::size_t i = 0; i < d.objects.size(); ++i) {
      result.legs.emplace_back(d.objects[i], result.apex, dom_cone.legs[i], cod_cone.legs[i]);
    }
    result.dom_check = verify_colimit(dom_diag, dom_cone, opts);
    result.cod_check = verify_colimit(cod_diag, cod_cone, opts);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Subobject classifier.
// ---------------------------------------------------------------------------

// Omega is the three-to-two-valued map t: {0, 1/2, 1} -> {0, 1} with t(0) = 0
// and t(1/2) = t(1) = 1; `truth` selects (1, 1) from the terminal object.
struct SubobjectClassifier {
  ArrowObject omega;
  Square truth;

  static SubobjectClassifier standard() {
    FinSet omega_in("Omega_in", {"0", "1/2", "1"});
    FinSet omega_out("Omega_out", {"0", "1"});
    FinFn t = FinFn::from_pairs(omega_in, omega_out,
                                {{"0", "0"}, {"1/2", "1"}, {"1", "1"}});
    ArrowObject one = terminal_arrow_object();
    Square truth(one, t, FinFn::constant(one.dom(), omega_in, "1"),
                 FinFn::constant(one.cod(), omega_out, "1"));
    return SubobjectClassifier{std::move(t), std::move(truth)};
  }
};

// Characteristic square of a monic square sub: f >-> g. The top component
// sends x in dom(g) to 1 if x is in the image of the top inclusion, to 1/2 if
// g(x) lands in the image of the bottom inclusion, and to 0 otherwise; the
// bottom component is the 0/1 characteristic of the bottom inclusion's image.
inline Square classify(const Square& sub) {
  if (!sub.is_monic())
    throw std::invalid_argument("classify: inclusion square must have injective components");
  const ArrowObject& g = sub.dst();
  SubobjectClassifier cls = SubobjectClassifier::standard();

  std::vector<bool> in_image_top(g.dom().size(), false);
  for (std::size_t i = 0; i < sub.top().dom().size(); ++i) in_image_top[sub.top().apply(i)] = true;
  std::vector<bool> in_image_bottom(g.cod().size(), false);
  for (std::size_t i = 0; i < sub.bottom().dom().size(); ++i)
    in_image_bottom[sub.bottom().apply(i)] = true;

  std::vector<std::size_t> psi(g.dom().size());
  for (std::size_t x = 0; x < g.dom().size(); ++x) {
    if (in_image_top[x])
      psi[x] = 2;  // "1"
    else if (in_image_bottom[g.apply(x)])
      psi[x] = 1;  // "1/2"
    else
      psi[x] = 0;  // "0"
  }
  std::vector<std::size_t> chi(g.cod().size());
  for (std::size_t y = 0; y < g.cod().size(); ++y) chi[y] = in_image_bottom[y] ? 1 : 0;

  FinFn psi_fn(g.dom(), cls.omega.dom(), std::move(psi));
  FinFn chi_fn(g.cod(), cls.omega.cod(), std::move(chi));
  return Square(g, cls.omega, psi_fn, chi_fn);
}

struct ClassifierRecovery {
  bool pass = false;
  std::string failure;
  ArrowLimitResult pullback_result;  // pullback of (chi, truth) against Omega
};

// The defining property: pulling the characteristic square back against
// `truth` must recover the subobject. The pullback is computed pointwise and
// verified exhaustively; recovery is an isomorphism of subobjects, i.e.
// bijections commuting with the inclusion legs.
inline ClassifierRecovery verify_classification(const Square& sub, const Square& chi,
                                                const VerifyOptions& opts = {}) {
  ClassifierRecovery out;
  SubobjectClassifier cls = SubobjectClassifier::standard();
  ArrowDiagram d;
  d.objects = {sub.dst(), cls.truth.src(), cls.omega};
  d.arrows = {{"chi", 0, 2, chi}, {"true", 1, 2, cls.truth}};
  out.pullback_result = arrow_limit(ShapeKind::pullback, d, opts);
  if (!out.pullback_result.dom_check.pass || !out.pullback_result.cod_check.pass) {
    out.failure = "componentwise pullback failed verification";
    return out;
  }
  const Square& proj = out.pullback_result.legs[0];  // apex -> g
  const ArrowObject& apex = out.pullback_result.apex;

  // Match each subobject element to the unique apex element with the same
  // projection; both directions must succeed for an isomorphism.
  auto match_component = [](const FinFn& incl, const FinFn& proj_fn,
                            std::vector<std::size_t>& iso) {
    iso.assign(incl.dom().size(), 0);
    std::vector<bool> used(proj_fn.dom().size(), false);
    for (std::size_t s = 0; s < incl.dom().size(); ++s) {
      bool found = false;
      for (std::size_t p = 0; p < proj_fn.dom().size(); ++p) {
        if (!used[p] && proj_fn.apply(p) == incl.apply(s)) {
          iso[s] = p;
          used[p] = true;
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return std::all_of(used.begin(), used.end(), [](bool b) { return b; });
  };

  std::vector<std::size_t> iso_top, iso_bottom;
  if (!match_component(sub.top(), proj.top(), iso_top)) {
    out.failure = "domain components of the pullback do not match the subobject";
    return out;
  }
  if (!match_component(sub.bottom(), proj.bottom(), iso_bottom)) {
    out.failure = "codomain components of the pullback do not match the subobject";
    return out;
  }
  // The matched bijection must itself be a square sub.src -> apex.
  FinFn iso_top_fn(sub.src().dom(), apex.dom(), std::move(iso_top));
  FinFn iso_bottom_fn(sub.src().cod(), apex.cod(), std::move(iso_bottom));
  if (compose(apex, iso_top_fn) != compose(iso_bottom_fn, sub.src())) {
    out.failure = "recovered isomorphism does not commute with the subobject";
    return out;
  }
  out.pass = true;
  return out;
}

// ---------------------------------------------------------------------------
// Exponential objects.
// ---------------------------------------------------------------------------

struct ArrowProduct {
  ArrowObject obj;
  Square p1, p2;
};

inline ArrowProduct arrow_product(const ArrowObject& a, const ArrowObject& b) {
  SetConstruction dom_p = product(a.dom(), b.dom());
  SetConstruction cod_p = product(a.cod(), b.cod());
  std::vector<std::size_t> map(dom_p.object.size());
  for (std::size_t k = 0; k < map.size(); ++k) {
    std::size_t ai = a.apply(dom_p.legs[0].apply(k));
    std::size_t bj = b.apply(dom_p.legs[1].apply(k));
    map[k] = ai * b.cod().size() + bj;  // matches product() enumeration order
  }
  ArrowObject obj(dom_p.object, cod_p.object, std::move(map));
  Square p1(obj, a, dom_p.legs[0], cod_p.legs[0]);
  Square p2(obj, b, dom_p.legs[1], cod_p.legs[1]);
  return ArrowProduct{std::move(obj), std::move(p1), std::move(p2)};
}

struct Exponential {
  ArrowObject object;                   // g^f : E -> F
  Square eval;                          // (u, v) : g^f x f -> g
  ArrowProduct power_times_f;           // the product object g^f x f
  std::vector<Square> element_squares;  // the square <h, k> behind each E element
  std::vector<FinFn> function_elements; // the function O -> O' behind each F element
};

// g^f where E is the set of commuting squares f -> g (named "<h|k>" by their
// image lists), F is the set of all functions cod(f) -> cod(g) (named "[..]"),
// g^f(<h,k>) = k, and eval applies h on top and ordinary evaluation below.
inline Exponential exponential(const ArrowObject& f, const ArrowObject& g) {
  std::vector<Square> elements;
  std::vector<std::string> e_names;
  auto image_list = [](const FinFn& fn) {
    std::string s;
    for (std::size_t i = 0; i < fn.dom().size(); ++i) {
      if (i) s += ",";
      s += fn.cod().elements[fn.apply(i)];
    }
    return s;
  };
  for (const FinFn& h : all_functions(f.dom(), g.dom()))
    for (const FinFn& k : all_functions(f.cod(), g.cod()))
      if (compose(g, h) == compose(k, f)) {
        elements.emplace_back(f, g, h, k);
        e_names.push_back("<" + image_list(h) + "|" + image_list(k) + ">");
      }
  FinSet e_set("E(" + f.dom().name + "->" + g.dom().name + ")", std::move(e_names));

  std::vector<FinFn> functions = all_functions(f.cod(), g.cod());
  std::vector<std::string> f_names;
  for (const FinFn& k : functions) f_names.push_back("[" + image_list(k) + "]");
  FinSet f_set("F(" + f.cod().name + "->" + g.cod().name + ")", std::move(f_names));

  auto function_index = [&](const FinFn& k) {
    for (std::size_t i = 0; i < functions.size(); ++i)
      if (functions[i] == k) return i;
    throw std::runtime_error("exponential: function not found");
  };

  std::vector<std::size_t> power_map(elements.size());
  for (std::size_t i = 0; i < elements.size(); ++i)
    power_map[i] = function_index(elements[i].bottom());
  ArrowObject power(e_set, f_set, std::move(power_map));

  ArrowProduct prod = arrow_product(power, f);
  // u(<h,k>, x) = h(x);  v(k, o) = k(o).
  std::vector<std::size_t> u_map(prod.obj.dom().size());
  for (std::size_t idx = 0; idx < prod.obj.dom().size(); ++idx) {
    std::size_t e_idx = prod.p1.top().apply(idx);
    std::size_t x_idx = prod.p2.top().apply(idx);
    u_map[idx] = elements[e_idx].top().apply(x_idx);
  }
  std::vector<std::size_t> v_map(prod.obj.cod().size());
  for (std::size_t idx = 0; idx < prod.obj.cod().size(); ++idx) {
    std::size_t k_idx = prod.p1.bottom().apply(idx);
    std::size_t o_idx = prod.p2.bottom().apply(idx);
    v_map[idx] = functions[k_idx].apply(o_idx);
  }
  FinFn u(prod.obj.dom(), g.dom(), std::move(u_map));
  FinFn v(prod.obj.cod(), g.cod(), std::move(v_map));
  Square eval(prod.obj, g, u, v);

  return Exponential{std::move(power), std::move(eval), std::move(prod), std::move(elements),
                     std::move(functions)};
}

// Transpose of s: a x f -> g into a -> g^f.
inline Square curry(const Exponential& e, const ArrowObject& f, const ArrowObject& g,
                    const ArrowObject& a, const Square& s) {
  ArrowProduct axf = arrow_product(a, f);
  if (s.src() != axf.obj || s.dst() != g)
    throw std::invalid_argument("curry: square is not a x f -> g");

  auto pair_dom = [&](std::size_t x, std::size_t i) { return x * f.dom().size() + i; };
  auto pair_cod = [&](std::size_t y, std::size_t o) { return y * f.cod().size() + o; };

  std::vector<std::size_t> top_map(a.dom().size());
  for (std::size_t x = 0; x < a.dom().size(); ++x) {
    std::vector<std::size_t> h_map(f.dom().size()), k_map(f.cod().size());
    for (std::size_t i = 0; i < f.dom().size(); ++i) h_map[i] = s.top().apply(pair_dom(x, i));
    for (std::size_t o = 0; o < f.cod().size(); ++o)
      k_map[o] = s.bottom().apply(pair_cod(a.apply(x), o));
    FinFn h(f.dom(), g.dom(), std::move(h_map));
    FinFn k(f.cod(), g.cod(), std::move(k_map));
    bool found = false;
    for (std::size_t idx = 0; idx < e.element_squares.size(); ++idx)
      if (e.element_squares[idx].top() == h && e.element_squares[idx].bottom() == k) {
        top_map[x] = idx;
        found = true;
        break;
      }
    if (!found) throw std::runtime_error("curry: transposed pair is not a commuting square");
  }
  std::vector<std::size_t> bottom_map(a.cod().size());
  for (std::size_t y = 0; y < a.cod().size(); ++y) {
    std::vector<std::size_t> k_map(f.cod().size());
    for (std::size_t o = 0; o < f.cod().size(); ++o) k_map[o] = s.bottom().apply(pair_cod(y, o));
    FinFn k(f.cod(), g.cod(), std::move(k_map));
    bool found = false;
    for (std::size_t idx = 0; idx < e.function_elements.size(); ++idx)
      if (e.function_elements[idx] == k) {
        bottom_map[y] = idx;
        found = true;
        break;
      }
    if (!found) throw std::runtime_error("curry: transposed function not found");
  }
  FinFn top(a.dom(), e.object.dom(), std::move(top_map));
  FinFn bottom(a.cod(), e.object.cod(), std::move(bottom_map));
  return Square(a, e.object, top, bottom);
}

// Inverse transpose of t: a -> g^f into a x f -> g.
inline Square uncurry(const Exponential& e, const ArrowObject& f, const ArrowObject& g,
                      const ArrowObject& a, const Square& t) {
  if (t.src() != a || t.dst() != e.object)
    throw std::invalid_argument("uncurry: square is not a -> g^f");
  ArrowProduct axf = arrow_product(a, f);
  std::vector<std::size_t> top_map(axf.obj.dom().size());
  for (std::size_t idx = 0; idx < axf.obj.dom().size(); ++idx) {
    std::size_t x = axf.p1.top().apply(idx);
    std::size_t i = axf.p2.top().apply(idx);
    top_map[idx] = e.element_squares[t.top().apply(x)].top().apply(i);
  }
  std::vector<std::size_t> bottom_map(axf.obj.cod().size());
  for (std::size_t idx = 0; idx < axf.obj.cod().size(); ++idx) {
    std::size_t y = axf.p1.bottom().apply(idx);
    std::size_t o = axf.p2.bottom().apply(idx);
    bottom_map[idx] = e.function_elements[t.bottom().apply(y)].apply(o);
  }
  FinFn top(axf.obj.dom(), g.dom(), std::move(top_map));
  FinFn bottom(axf.obj.cod(), g.cod(), std::move(bottom_map));
  return Square(axf.obj, g, top, bottom);
}

struct CurryingCheck {
  bool pass = false;
  std::size_t hom_product = 0;      // |Hom(a x f, g)|
  std::size_t hom_exponential = 0;  // |Hom(a, g^f)|
  std::string failure;
};

// The currying bijection Hom(a x f, g) ~ Hom(a, g^f), checked by full
// enumeration of both sides plus explicit round trips.
inline CurryingCheck check_currying(const ArrowObject& f, const ArrowObject& g,
                                    const ArrowObject& a) {
  CurryingCheck out;
  Exponential e = exponential(f, g);
  ArrowProduct axf = arrow_product(a, f);
  std::vector<Square> hom_prod = hom_squares(axf.obj, g);
  std::vector<Square> hom_exp = hom_squares(a, e.object);
  out.hom_product = hom_prod.size();
  out.hom_exponential = hom_exp.size();
  if (hom_prod.size() != hom_exp.size()) {
    out.failure = "hom-set cardinalities differ";
    return out;
  }
  std::vector<bool> hit(hom_exp.size(), false);
  for (const Square& s : hom_prod) {
    Square t = curry(e, f, g, a, s);
    bool found = false;
    for (std::size_t i = 0; i < hom_exp.size(); ++i)
      if (hom_exp[i] == t) {
        if (hit[i]) {
          out.failure = "curry is not injective";
          return out;
        }
        hit[i] = true;
        found = true;
        break;
      }
    if (!found) {
      out.failure = "curried square missing from Hom(a, g^f)";
      return out;
    }
    if (uncurry(e, f, g, a, t) != s) {
      out.failure = "uncurry does not invert curry";
      return out;
    }
  }
  out.pass = std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
  if (!out.pass) out.failure = "curry is not surjective";
  return out;
}

}  // namespace toposkit
