#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace toposkit {

// Named finite set with ordered, pairwise-distinct text elements. Element
// identity is the pair (set name, element name); equality is structural.
struct FinSet {
  std::string name;
  std::vector<std::string> elements;

  FinSet() = default;
  FinSet(std::string set_name, std::vector<std::string> elems)
      : name(std::move(set_name)), elements(std::move(elems)) {
    for (std::size_t i = 0; i < elements.size(); ++i)
      for (std::size_t j = i + 1; j < elements.size(); ++j)
        if (elements[i] == elements[j])
          throw std::invalid_argument("FinSet " + name + ": duplicate element '" + elements[i] +
                                      "'");
  }

  std::size_t size() const { return elements.size(); }

  std::optional<std::size_t> index_of(const std::string& elem) const {
    for (std::size_t i = 0; i < elements.size(); ++i)
      if (elements[i] == elem) return i;
    return std::nullopt;
  }

  friend bool operator==(const FinSet& a, const FinSet& b) {
    return a.name == b.name && a.elements == b.elements;
  }
  friend bool operator!=(const FinSet& a, const FinSet& b) { return !(a == b); }
  friend bool operator<(const FinSet& a, const FinSet& b) {
    return a.name != b.name ? a.name < b.name : a.elements < b.elements;
  }
};

// Total function between finite sets, stored as an index table.
class FinFn {
 public:
  FinFn() = default;

  FinFn(FinSet dom, FinSet cod, std::vector<std::size_t> map)
      : dom_(std::move(dom)), cod_(std::move(cod)), map_(std::move(map)) {
    if (map_.size() != dom_.size())
      throw std::invalid_argument("FinFn " + dom_.name + " -> " + cod_.name +
                                  ": map covers " + std::to_string(map_.size()) + " of " +
                                  std::to_string(dom_.size()) + " elements");
    for (std::size_t v : map_)
      if (v >= cod_.size())
        throw std::invalid_argument("FinFn " + dom_.name + " -> " + cod_.name +
                                    ": image index out of range");
  }

  static FinFn from_pairs(FinSet dom, FinSet cod,
                          const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<std::size_t> map(dom.size(), dom.size());
    std::vector<bool> assigned(dom.size(), false);
    for (const auto& [a, b] : pairs) {
      auto i = dom.index_of(a);
      if (!i) throw std::invalid_argument("FinFn: '" + a + "' is not in " + dom.name);
      auto j = cod.index_of(b);
      if (!j) throw std::invalid_argument("FinFn: '" + b + "' is not in " + cod.name);
      if (assigned[*i])
        throw std::invalid_argument("FinFn: '" + a + "' mapped twice");
      map[*i] = *j;
      assigned[*i] = true;
    }
    for (std::size_t i = 0; i < dom.size(); ++i)
      if (!assigned[i])
        throw std::invalid_argument("FinFn: no image for '" + dom.elements[i] + "' in " +
                                    dom.name);
    return FinFn(std::move(dom), std::move(cod), std::move(map));
  }

  static FinFn identity(FinSet s) {
    std::vector<std::size_t> map(s.size());
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = i;
    FinSet copy = s;
    return FinFn(std::move(copy), std::move(s), std::move(map));
  }

  static FinFn constant(FinSet dom, FinSet cod, const std::string& value) {
    auto j = cod.index_of(value);
    if (!j) throw std::invalid_argument("FinFn::constant: '" + value + "' not in " + cod.name);
    return FinFn(std::move(dom), std::move(cod), std::vector<std::size_t>(dom.size(), *j));
  }

  const FinSet& dom() const { return dom_; }
  const FinSet& cod() const { return cod_; }
  const std::vector<std::size_t>& map() const { return map_; }

  std::size_t apply(std::size_t i) const { return map_[i]; }

  const std::string& apply_name(const std::string& elem) const {
    auto i = dom_.index_of(elem);
    if (!i) throw std::invalid_argument("FinFn::apply_name: '" + elem + "' not in " + dom_.name);
    return cod_.elements[map_[*i]];
  }

  bool is_injective() const {
    std::vector<bool> seen(cod_.size(), false);
    for (std::size_t v : map_) {
      if (seen[v]) return false;
      seen[v] = true;
    }
    return true;
  }

  bool is_surjective() const {
    std::vector<bool> seen(cod_.size(), false);
    for (std::size_t v : map_) seen[v] = true;
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  }

  bool is_bijective() const { return dom_.size() == cod_.size() && is_injective(); }

  friend bool operator==(const FinFn& a, const FinFn& b) {
    return a.dom_ == b.dom_ && a.cod_ == b.cod_ && a.map_ == b.map_;
  }
  friend bool operator!=(const FinFn& a, const FinFn& b) { return !(a == b); }

  std::string describe() const {
    std::ostringstream os;
    os << dom_.name << " -> " << cod_.name << " {";
    for (std::size_t i = 0; i < map_.size(); ++i) {
      if (i) os << ", ";
      os << dom_.elements[i] << " -> " << cod_.elements[map_[i]];
    }
    os << "}";
    return os.str();
  }

 private:
  FinSet dom_, cod_;
  std::vector<std::size_t> map_;
};

// g after f.
inline FinFn compose(const FinFn& g, const FinFn& f) {
  if (f.cod() != g.dom())
    throw std::invalid_argument("compose: codomain " + f.cod().name + " does not match domain " +
                                g.dom().name);
  std::vector<std::size_t> map(f.dom().size());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = g.apply(f.apply(i));
  return FinFn(f.dom(), g.cod(), std::move(map));
}

// All total functions dom -> cod, in odometer order over image indices.
// Empty domain yields exactly the empty function; empty codomain with a
// nonempty domain yields nothing.
inline std::vector<FinFn> all_functions(const FinSet& dom, const FinSet& cod) {
  std::vector<FinFn> out;
  if (dom.size() == 0) {
    out.push_back(FinFn(dom, cod, {}));
    return out;
  }
  if (cod.size() == 0) return out;
  std::vector<std::size_t> map(dom.size(), 0);
  while (true) {
    out.push_back(FinFn(dom, cod, map));
    std::size_t k = 0;
    while (k < map.size()) {
      if (++map[k] < cod.size()) break;
      map[k++] = 0;
    }
    if (k == map.size()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Universal constructions in the category of finite sets.
// ---------------------------------------------------------------------------

struct SetConstruction {
  FinSet object;
  std::vector<FinFn> legs;  // projections (limits) or injections (colimits)
};

// P = {(x, y) : f(x) = g(y)} with the two projections.
inline SetConstruction pullback(const FinFn& f, const FinFn& g) {
  if (f.cod() != g.cod())
    throw std::invalid_argument("pullback: codomain mismatch (" + f.cod().name + " vs " +
                                g.cod().name + ")");
  std::vector<std::string> elems;
  std::vector<std::size_t> to_x, to_y;
  for (std::size_t i = 0; i < f.dom().size(); ++i)
    for (std::size_t j = 0; j < g.dom().size(); ++j)
      if (f.apply(i) == g.apply(j)) {
        elems.push_back("(" + f.dom().elements[i] + "," + g.dom().elements[j] + ")");
        to_x.push_back(i);
        to_y.push_back(j);
      }
  FinSet p("pb(" + f.dom().name + "," + g.dom().name + ")", std::move(elems));
  FinFn p1(p, f.dom(), std::move(to_x));
  FinFn p2(p, g.dom(), std::move(to_y));
  return SetConstruction{std::move(p), {std::move(p1), std::move(p2)}};
}

// E = {a : f(a) = g(a)} with the inclusion.
inline SetConstruction equalizer(const FinFn& f, const FinFn& g) {
  if (f.dom() != g.dom() || f.cod() != g.cod())
    throw std::invalid_argument("equalizer: parallel pair required (" + f.dom().name + " -> " +
                                f.cod().name + " vs " + g.dom().name + " -> " + g.cod().name +
                                ")");
  std::vector<std::string> elems;
  std::vector<std::size_t> incl;
  for (std::size_t i = 0; i < f.dom().size(); ++i)
    if (f.apply(i) == g.apply(i)) {
      elems.push_back(f.dom().elements[i]);
      incl.push_back(i);
    }
  FinSet e("eq(" + f.dom().name + ")", std::move(elems));
  FinFn inclusion(e, f.dom(), std::move(incl));
  return SetConstruction{std::move(e), {std::move(inclusion)}};
}

inline SetConstruction product(const FinSet& x, const FinSet& y) {
  std::vector<std::string> elems;
  std::vector<std::size_t> to_x, to_y;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      elems.push_back("(" + x.elements[i] + "," + y.elements[j] + ")");
      to_x.push_back(i);
      to_y.push_back(j);
    }
  FinSet p("prod(" + x.name + "," + y.name + ")", std::move(elems));
  FinFn p1(p, x, std::move(to_x));
  FinFn p2(p, y, std::move(to_y));
  return SetConstruction{std::move(p), {std::move(p1), std::move(p2)}};
}

inline SetConstruction coproduct(const FinSet& x, const FinSet& y) {
  std::vector<std::string> elems;
  for (const auto& e : x.elements) elems.push_back("l:" + e);
  for (const auto& e : y.elements) elems.push_back("r:" + e);
  FinSet s("sum(" + x.name + "," + y.name + ")", std::move(elems));
  std::vector<std::size_t> inl(x.size()), inr(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) inl[i] = i;
  for (std::size_t j = 0; j < y.size(); ++j) inr[j] = x.size() + j;
  FinFn i1(x, s, std::move(inl));
  FinFn i2(y, s, std::move(inr));
  return SetConstruction{std::move(s), {std::move(i1), std::move(i2)}};
}

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
  }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

// Quotient of `base` by the equivalence generated by the given pairs.
// Class names are the sorted member lists, so output is deterministic.
inline SetConstruction quotient(const FinSet& base,
                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                const std::string& name) {
  UnionFind uf(base.size());
  for (const auto& [a, b] : pairs) uf.unite(a, b);
  std::map<std::size_t, std::vector<std::string>> members;
  for (std::size_t i = 0; i < base.size(); ++i) members[uf.find(i)].push_back(base.elements[i]);
  // Deterministic class order: by smallest member index.
  std::vector<std::pair<std::size_t, std::string>> classes;
  std::vector<std::size_t> class_of_root(base.size(), 0);
  for (std::size_t i = 0; i < base.size(); ++i) {
    std::size_t root = uf.find(i);
    if (!members.count(root) || members[root].empty()) continue;
    std::vector<std::string> sorted = members[root];
    std::sort(sorted.begin(), sorted.end());
    std::string label = "{";
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (k) label += ",";
      label += sorted[k];
    }
    label += "}";
    class_of_root[root] = classes.size();
    classes.emplace_back(root, std::move(label));
    members.erase(root);
  }
  std::vector<std::string> elems;
  for (auto& [root, label] : classes) elems.push_back(label);
  FinSet q(name, std::move(elems));
  std::vector<std::size_t> proj(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) proj[i] = class_of_root[uf.find(i)];
  FinFn projection(base, q, std::move(proj));
  return SetConstruction{std::move(q), {std::move(projection)}};
}

}  // namespace detail

// Q = (X + Y) / (f(z) ~ g(z)) with the two injections.
inline SetConstruction pushout(const FinFn& f, const FinFn& g) {
  if (f.dom() != g.dom())
    throw std::invalid_argument("pushout: domain mismatch (" + f.dom().name + " vs " +
                                g.dom().name + ")");
  SetConstruction cp = coproduct(f.cod(), g.cod());
  std::vector<std::pair<std::size_t, std::size_t>> glue;
  for (std::size_t z = 0; z < f.dom().size(); ++z)
    glue.emplace_back(cp.legs[0].apply(f.apply(z)), cp.legs[1].apply(g.apply(z)));
  SetConstruction q = detail::quotient(cp.object, glue,
                                       "po(" + f.cod().name + "," + g.cod().name + ")");
  FinFn q1 = compose(q.legs[0], cp.legs[0]);
  FinFn q2 = compose(q.legs[0], cp.legs[1]);
  return SetConstruction{q.object, {std::move(q1), std::move(q2)}};
}

// C = B / (f(a) ~ g(a)) with the projection.
inline SetConstruction coequalizer(const FinFn& f, const FinFn& g) {
  if (f.dom() != g.dom() || f.cod() != g.cod())
    throw std::invalid_argument("coequalizer: parallel pair required");
  std::vector<std::pair<std::size_t, std::size_t>> glue;
  for (std::size_t a = 0; a < f.dom().size(); ++a) glue.emplace_back(f.apply(a), g.apply(a));
  return detail::quotient(f.cod(), glue, "coeq(" + f.cod().name + ")");
}

// ---------------------------------------------------------------------------
// Diagrams of finite sets and the brute-force universal-property verifier.
// ---------------------------------------------------------------------------

struct SetDiagram {
  struct Arrow {
    std::string label;
    std::size_t src, dst;
    FinFn fn;
  };
  std::vector<FinSet> objects;
  std::vector<Arrow> arrows;

  static SetDiagram cospan(const FinFn& f, const FinFn& g) {
    SetDiagram d;
    d.objects = {f.dom(), g.dom(), f.cod()};
    d.arrows = {{"f", 0, 2, f}, {"g", 1, 2, g}};
    return d;
  }
  static SetDiagram span(const FinFn& f, const FinFn& g) {
    SetDiagram d;
    d.objects = {f.cod(), g.cod(), f.dom()};
    d.arrows = {{"f", 2, 0, f}, {"g", 2, 1, g}};
    return d;
  }
  static SetDiagram parallel_pair(const FinFn& f, const FinFn& g) {
    SetDiagram d;
    d.objects = {f.dom(), f.cod()};
    d.arrows = {{"f", 0, 1, f}, {"g", 0, 1, g}};
    return d;
  }
  static SetDiagram discrete(const FinSet& x, const FinSet& y) {
    SetDiagram d;
    d.objects = {x, y};
    return d;
  }
  static SetDiagram empty() { return SetDiagram{}; }
};

// A cone over (legs: apex -> object) or under (legs: object -> apex) a
// diagram, depending on which verifier consumes it.
struct SetCone {
  FinSet apex;
  std::vector<FinFn> legs;
};

struct VerifyOptions {
  std::size_t apex_bound = 4;      // max size of enumerated test apexes
  std::size_t certificate_cap = 16;  // mediating arrows retained in the certificate
};

struct MediatingSample {
  SetCone cone;
  FinFn mediating;
};

struct VerifyResult {
  bool pass = false;
  std::size_t cones_checked = 0;
  std::vector<MediatingSample> certificate;
  std::optional<SetCone> violation;
  std::string failure;
};

namespace detail {

inline bool cone_commutes(const SetDiagram& d, const SetCone& cone, bool over) {
  for (const auto& arrow : d.arrows) {
    const FinFn& a = over ? cone.legs[arrow.src] : cone.legs[arrow.dst];
    const FinFn& b = over ? cone.legs[arrow.dst] : cone.legs[arrow.src];
    if (over) {
      if (compose(arrow.fn, a) != b) return false;
    } else {
      if (compose(a, arrow.fn) != b) return false;
    }
  }
  return true;
}

inline FinSet test_apex(std::size_t size) {
  std::vector<std::string> elems;
  for (std::size_t i = 0; i < size; ++i) elems.push_back("t" + std::to_string(i));
  return FinSet("T" + std::to_string(size), std::move(elems));
}

// Enumerate all cones over `d` with the given apex. Legs of objects with an
// incoming arrow are forced by commutativity, so only source objects are
// enumerated freely; derived legs are checked for consistency.
template <typename Fn>
void for_each_cone_over(const SetDiagram& d, const FinSet& apex, Fn&& visit) {
  std::size_t n = d.objects.size();
  std::vector<bool> has_incoming(n, false);
  for (const auto& a : d.arrows) has_incoming[a.dst] = true;
  std::vector<std::size_t> free_objs;
  for (std::size_t i = 0; i < n; ++i)
    if (!has_incoming[i]) free_objs.push_back(i);

  std::vector<std::vector<FinFn>> choices;
  for (std::size_t i : free_objs) choices.push_back(all_functions(apex, d.objects[i]));
  for (const auto& c : choices)
    if (c.empty()) return;  // no function into an empty object

  std::vector<std::size_t> idx(choices.size(), 0);
  while (true) {
    std::vector<std::optional<FinFn>> legs(n);
    for (std::size_t k = 0; k < free_objs.size(); ++k) legs[free_objs[k]] = choices[k][idx[k]];
    // Propagate along arrows until fixed point; reject on conflict.
    bool ok = true, progress = true;
    while (progress && ok) {
      progress = false;
      for (const auto& a : d.arrows) {
        if (!legs[a.src]) continue;
        FinFn derived = compose(a.fn, *legs[a.src]);
        if (!legs[a.dst]) {
          legs[a.dst] = std::move(derived);
          progress = true;
        } else if (*legs[a.dst] != derived) {
          ok = false;
          break;
        }
      }
    }
    for (std::size_t i = 0; ok && i < n; ++i)
      if (!legs[i]) ok = false;  // unreachable object (not a supported shape)
    if (ok) {
      SetCone cone{apex, {}};
      cone.legs.reserve(n);
      for (auto& l : legs) cone.legs.push_back(std::move(*l));
      visit(cone);
    }
    // Odometer step; the empty odometer runs exactly once.
    std::size_t k = 0;
    while (k < idx.size()) {
      if (++idx[k] < choices[k].size()) break;
      idx[k++] = 0;
    }
    if (k == idx.size() || idx.empty()) break;
  }
}

// Dual enumeration: cocones under `d` with the given apex (legs object->apex).
template <typename Fn>
void for_each_cone_under(const SetDiagram& d, const FinSet& apex, Fn&& visit) {
  std::size_t n = d.objects.size();
  std::vector<bool> has_outgoing(n, false);
  for (const auto& a : d.arrows) has_outgoing[a.src] = true;
  std::vector<std::size_t> free_objs;
  for (std::size_t i = 0; i < n; ++i)
    if (!has_outgoing[i]) free_objs.push_back(i);

  std::vector<std::vector<FinFn>> choices;
  for (std::size_t i : free_objs) choices.push_back(all_functions(d.objects[i], apex));
  for (const auto& c : choices)
    if (c.empty()) return;

  std::vector<std::size_t> idx(choices.size(), 0);
  while (true) {
    std::vector<std::optional<FinFn>> legs(n);
    for (std::size_t k = 0; k < free_objs.size(); ++k) legs[free_objs[k]] = choices[k][idx[k]];
    bool ok = true, progress = true;
    while (progress && ok) {
      progress = false;
      for (const auto& a : d.arrows) {
        if (!legs[a.dst]) continue;
        FinFn derived = compose(*legs[a.dst], a.fn);
        if (!legs[a.src]) {
          legs[a.src] = std::move(derived);
          progress = true;
        } else if (*legs[a.src] != derived) {
          ok = false;
          break;
        }
      }
    }
    for (std::size_t i = 0; ok && i < n; ++i)
      if (!legs[i]) ok = false;
    if (ok) {
      SetCone cone{apex, {}};
      cone.legs.reserve(n);
      for (auto& l : legs) cone.legs.push_back(std::move(*l));
      visit(cone);
    }
    std::size_t k = 0;
    while (k < idx.size()) {
      if (++idx[k] < choices[k].size()) break;
      idx[k++] = 0;
    }
    if (k == idx.size() || idx.empty()) break;
  }
}

// Count functions m: cone.apex -> candidate.apex with candidate.legs o m ==
// cone.legs. Mediating arrows between set cones factor pointwise, so the
// exhaustive search over all |candidate|^|cone| functions reduces to an
// independent scan per element. Returns 0, 1, or 2 (meaning "more than one").
inline std::size_t count_mediating_over(const SetCone& candidate, const SetCone& cone,
                                        FinFn* out) {
  std::size_t apex = candidate.apex.size();
  std::vector<std::size_t> map(cone.apex.size());
  bool unique = true;
  for (std::size_t t = 0; t < cone.apex.size(); ++t) {
    std::size_t matches = 0, pick = 0;
    for (std::size_t p = 0; p < apex; ++p) {
      bool all = true;
      for (std::size_t j = 0; j < candidate.legs.size(); ++j)
        if (candidate.legs[j].apply(p) != cone.legs[j].apply(t)) {
          all = false;
          break;
        }
      if (all) {
        if (++matches == 1) pick = p;
      }
    }
    if (matches == 0) return 0;
    if (matches > 1) unique = false;
    map[t] = pick;
  }
  if (!unique) return 2;
  if (out) *out = FinFn(cone.apex, candidate.apex, std::move(map));
  return 1;
}

// Dual: count m: candidate.apex -> cone.apex with m o candidate.legs ==
// cone.legs. Elements outside the legs' joint image are unconstrained, which
// correctly breaks uniqueness for non-colimits.
inline std::size_t count_mediating_under(const SetCone& candidate, const SetCone& cone,
                                         FinFn* out) {
  std::size_t target = cone.apex.size();
  std::vector<std::optional<std::size_t>> constraint(candidate.apex.size());
  for (std::size_t j = 0; j < candidate.legs.size(); ++j) {
    const FinFn& cl = candidate.legs[j];
    const FinFn& nl = cone.legs[j];
    for (std::size_t x = 0; x < cl.dom().size(); ++x) {
      std::size_t at = cl.apply(x), want = nl.apply(x);
      if (constraint[at] && *constraint[at] != want) return 0;
      constraint[at] = want;
    }
  }
  std::vector<std::size_t> map(candidate.apex.size());
  bool unique = true;
  for (std::size_t e = 0; e < candidate.apex.size(); ++e) {
    if (constraint[e]) {
      map[e] = *constraint[e];
    } else {
      if (target == 0) return 0;
      if (target > 1) unique = false;
      map[e] = 0;
    }
  }
  if (!unique) return 2;
  if (out) *out = FinFn(candidate.apex, cone.apex, std::move(map));
  return 1;
}

template <bool Over>
VerifyResult verify_universal(const SetDiagram& d, const SetCone& candidate,
                              const VerifyOptions& opts) {
  VerifyResult result;
  if (candidate.legs.size() != d.objects.size()) {
    result.failure = "candidate has " + std::to_string(candidate.legs.size()) + " legs for " +
                     std::to_string(d.objects.size()) + " objects";
    return result;
  }
  for (std::size_t i = 0; i < d.objects.size(); ++i) {
    const FinFn& leg = candidate.legs[i];
    const FinSet& expect_apex = candidate.apex;
    const FinSet& expect_obj = d.objects[i];
    bool ok = Over ? (leg.dom() == expect_apex && leg.cod() == expect_obj)
                   : (leg.dom() == expect_obj && leg.cod() == expect_apex);
    if (!ok) {
      result.failure = "candidate leg " + std::to_string(i) + " has wrong endpoints";
      return result;
    }
  }
  if (!cone_commutes(d, candidate, Over)) {
    result.failure = "candidate legs do not commute with the diagram";
    return result;
  }

  bool ok = true;
  for (std::size_t size = 0; size <= opts.apex_bound && ok; ++size) {
    FinSet apex = test_apex(size);
    auto visit = [&](const SetCone& cone) {
      if (!ok) return;
      ++result.cones_checked;
      FinFn mediating;
      std::size_t count = Over ? count_mediating_over(candidate, cone, &mediating)
                               : count_mediating_under(candidate, cone, &mediating);
      if (count == 1) {
        if (result.certificate.size() < opts.certificate_cap)
          result.certificate.push_back({cone, mediating});
      } else {
        ok = false;
        result.violation = cone;
        result.failure = count == 0 ? "no mediating arrow exists for a test cone"
                                    : "mediating arrow is not unique for a test cone";
      }
    };
    if (Over)
      for_each_cone_over(d, apex, visit);
    else
      for_each_cone_under(d, apex, visit);
  }
  result.pass = ok;
  return result;
}

}  // namespace detail

// Check that `candidate` is the limit of `d`: every cone over the diagram
// with apex of size <= apex_bound factors through it via exactly one
// mediating arrow. Failure is a result, not an error.
inline VerifyResult verify_limit(const SetDiagram& d, const SetCone& candidate,
                                 const VerifyOptions& opts = {}) {
  return detail::verify_universal<true>(d, candidate, opts);
}

inline VerifyResult verify_colimit(const SetDiagram& d, const SetCone& candidate,
                                   const VerifyOptions& opts = {}) {
  return detail::verify_universal<false>(d, candidate, opts);
}

}  // namespace toposkit
