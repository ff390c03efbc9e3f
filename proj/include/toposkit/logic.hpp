#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "toposkit/arrow_topos.hpp"

namespace toposkit {

// A subobject of an arrow object g: I' -> O', given by masks on both
// components with g(s_in) contained in s_out.
class Subobject {
 public:
  Subobject(ArrowObject parent, std::vector<bool> in_mask, std::vector<bool> out_mask)
      : parent_(std::move(parent)), in_(std::move(in_mask)), out_(std::move(out_mask)) {
    if (in_.size() != parent_.dom().size() || out_.size() != parent_.cod().size())
      throw std::invalid_argument("Subobject: mask sizes do not match the parent");
    for (std::size_t i = 0; i < in_.size(); ++i)
      if (in_[i] && !out_[parent_.apply(i)])
        throw std::invalid_argument("Subobject: parent does not map the input part into the "
                                    "output part");
  }

  static Subobject from_names(const ArrowObject& parent, const std::vector<std::string>& ins,
                              const std::vector<std::string>& outs) {
    std::vector<bool> in_mask(parent.dom().size(), false);
    std::vector<bool> out_mask(parent.cod().size(), false);
    for (const auto& e : ins) {
      auto i = parent.dom().index_of(e);
      if (!i) throw std::invalid_argument("Subobject: '" + e + "' not in " + parent.dom().name);
      in_mask[*i] = true;
    }
    for (const auto& e : outs) {
      auto i = parent.cod().index_of(e);
      if (!i) throw std::invalid_argument("Subobject: '" + e + "' not in " + parent.cod().name);
      out_mask[*i] = true;
    }
    return Subobject(parent, std::move(in_mask), std::move(out_mask));
  }

  const ArrowObject& parent() const { return parent_; }
  const std::vector<bool>& in_mask() const { return in_; }
  const std::vector<bool>& out_mask() const { return out_; }

  bool same_parent(const Subobject& other) const { return parent_ == other.parent_; }

  friend bool operator==(const Subobject& a, const Subobject& b) {
    return a.parent_ == b.parent_ && a.in_ == b.in_ && a.out_ == b.out_;
  }

  // The restricted arrow object and its inclusion square into the parent.
  ArrowObject restriction() const {
    std::vector<std::string> in_elems, out_elems;
    std::vector<std::size_t> in_idx, out_of_parent(parent_.cod().size(), 0);
    for (std::size_t i = 0; i < in_.size(); ++i)
      if (in_[i]) {
        in_elems.push_back(parent_.dom().elements[i]);
        in_idx.push_back(i);
      }
    std::size_t k = 0;
    for (std::size_t i = 0; i < out_.size(); ++i)
      if (out_[i]) {
        out_elems.push_back(parent_.cod().elements[i]);
        out_of_parent[i] = k++;
      }
    FinSet dom(parent_.dom().name + "[" + mask_label(in_) + "]", std::move(in_elems));
    FinSet cod(parent_.cod().name + "[" + mask_label(out_) + "]", std::move(out_elems));
    std::vector<std::size_t> map(dom.size());
    for (std::size_t i = 0; i < in_idx.size(); ++i) map[i] = out_of_parent[parent_.apply(in_idx[i])];
    return ArrowObject(std::move(dom), std::move(cod), std::move(map));
  }

  Square inclusion() const {
    ArrowObject r = restriction();
    std::vector<std::size_t> top_map, bottom_map;
    for (std::size_t i = 0; i < in_.size(); ++i)
      if (in_[i]) top_map.push_back(i);
    for (std::size_t i = 0; i < out_.size(); ++i)
      if (out_[i]) bottom_map.push_back(i);
    FinFn top(r.dom(), parent_.dom(), std::move(top_map));
    FinFn bottom(r.cod(), parent_.cod(), std::move(bottom_map));
    return Square(r, parent_, top, bottom);
  }

 private:
  static std::string mask_label(const std::vector<bool>& mask) {
    std::string s;
    for (bool b : mask) s += b ? '1' : '0';
    return s;
  }

  ArrowObject parent_;
  std::vector<bool> in_, out_;
};

// All subobjects of a parent, ordered deterministically, with the Heyting
// operations. Meet and join are componentwise; implication is found by
// scanning for the largest z with z meet x <= y; negation is implies(x, 0).
class SubobjectLattice {
 public:
  explicit SubobjectLattice(ArrowObject parent) : parent_(std::move(parent)) {
    std::size_t ni = parent_.dom().size(), no = parent_.cod().size();
    std::vector<bool> in_mask(ni, false);
    while (true) {
      std::vector<bool> out_mask(no, false);
      while (true) {
        bool valid = true;
        for (std::size_t i = 0; i < ni && valid; ++i)
          if (in_mask[i] && !out_mask[parent_.apply(i)]) valid = false;
        if (valid) elements_.push_back(Subobject(parent_, in_mask, out_mask));
        std::size_t k = 0;
        while (k < no && !(out_mask[k] = !out_mask[k])) ++k;
        if (k == no) break;
      }
      std::size_t k = 0;
      while (k < ni && !(in_mask[k] = !in_mask[k])) ++k;
      if (k == ni) break;
    }
  }

  const ArrowObject& parent() const { return parent_; }
  const std::vector<Subobject>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }

  Subobject bottom() const {
    return Subobject(parent_, std::vector<bool>(parent_.dom().size(), false),
                     std::vector<bool>(parent_.cod().size(), false));
  }
  Subobject top() const {
    return Subobject(parent_, std::vector<bool>(parent_.dom().size(), true),
                     std::vector<bool>(parent_.cod().size(), true));
  }

  bool leq(const Subobject& a, const Subobject& b) const {
    require_member(a);
    require_member(b);
    for (std::size_t i = 0; i < a.in_mask().size(); ++i)
      if (a.in_mask()[i] && !b.in_mask()[i]) return false;
    for (std::size_t i = 0; i < a.out_mask().size(); ++i)
      if (a.out_mask()[i] && !b.out_mask()[i]) return false;
    return true;
  }

  Subobject meet(const Subobject& a, const Subobject& b) const {
    require_member(a);
    require_member(b);
    return Subobject(parent_, mask_and(a.in_mask(), b.in_mask()),
                     mask_and(a.out_mask(), b.out_mask()));
  }

  Subobject join(const Subobject& a, const Subobject& b) const {
    require_member(a);
    require_member(b);
    return Subobject(parent_, mask_or(a.in_mask(), b.in_mask()),
                     mask_or(a.out_mask(), b.out_mask()));
  }

  // Largest z with z meet x <= y, found by folding the join of all such z.
  Subobject implies(const Subobject& x, const Subobject& y) const {
    require_member(x);
    require_member(y);
    Subobject acc = bottom();
    for (const Subobject& z : elements_)
      if (leq(meet(z, x), y)) acc = join(acc, z);
    if (!leq(meet(acc, x), y))
      throw std::runtime_error("SubobjectLattice: adjunction maximum is not itself a solution");
    return acc;
  }

  Subobject negate(const Subobject& x) const { return implies(x, bottom()); }

 private:
  void require_member(const Subobject& s) const {
    if (s.parent() != parent_)
      throw std::invalid_argument("SubobjectLattice: element belongs to a different parent");
  }
  static std::vector<bool> mask_and(const std::vector<bool>& a, const std::vector<bool>& b) {
    std::vector<bool> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] && b[i];
    return r;
  }
  static std::vector<bool> mask_or(const std::vector<bool>& a, const std::vector<bool>& b) {
    std::vector<bool> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] || b[i];
    return r;
  }

  ArrowObject parent_;
  std::vector<Subobject> elements_;
};

// ---------------------------------------------------------------------------
// Formulas: a restricted internal-language fragment with variables of arrow
// object type, equality, membership in concrete subobjects, the propositional
// connectives and quantifiers of depth at most two.
// ---------------------------------------------------------------------------

using Env = std::map<std::string, Square>;

class Formula {
 public:
  enum class Kind { Eq, In, And, Or, Implies, Not, Forall, Exists, Raw };

  struct Node {
    Kind kind;
    std::string var_a, var_b;              // Eq / In / quantifier variable
    std::optional<Subobject> subobject;    // In
    std::optional<ArrowObject> quant_type; // Forall / Exists
    std::vector<Formula> children;
    std::string raw_name;
    std::function<bool(const ArrowObject&, const Env&)> raw_pred;
    // Process-unique id; memo tables key on it, so it must never be reused
    // even after a node is destroyed (addresses can be).
    std::size_t serial = next_serial();

    static std::size_t next_serial() {
      static std::size_t counter = 0;
      return ++counter;
    }
  };

  static Formula eq(std::string a, std::string b) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Eq;
    n->var_a = std::move(a);
    n->var_b = std::move(b);
    return Formula(std::move(n));
  }
  static Formula in(std::string var, Subobject s) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::In;
    n->var_a = std::move(var);
    n->subobject = std::move(s);
    return Formula(std::move(n));
  }
  static Formula conj(Formula a, Formula b) { return binary(Kind::And, std::move(a), std::move(b)); }
  static Formula disj(Formula a, Formula b) { return binary(Kind::Or, std::move(a), std::move(b)); }
  static Formula implies(Formula a, Formula b) {
    return binary(Kind::Implies, std::move(a), std::move(b));
  }
  static Formula negation(Formula a) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Not;
    n->children.push_back(std::move(a));
    return Formula(std::move(n));
  }
  static Formula forall(std::string var, ArrowObject type, Formula body) {
    return quant(Kind::Forall, std::move(var), std::move(type), std::move(body));
  }
  static Formula exists(std::string var, ArrowObject type, Formula body) {
    return quant(Kind::Exists, std::move(var), std::move(type), std::move(body));
  }
  // Opaque stage predicate; deliberately outside the internal language, used
  // to demonstrate that the naturality checks detect violations.
  static Formula raw(std::string name, std::function<bool(const ArrowObject&, const Env&)> pred) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Raw;
    n->raw_name = std::move(name);
    n->raw_pred = std::move(pred);
    return Formula(std::move(n));
  }

  const Node& node() const { return *node_; }
  std::size_t id() const { return node_->serial; }

  bool quantifier_free() const {
    if (node_->kind == Kind::Forall || node_->kind == Kind::Exists) return false;
    for (const Formula& c : node_->children)
      if (!c.quantifier_free()) return false;
    return true;
  }

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula binary(Kind k, Formula a, Formula b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->children.push_back(std::move(a));
    n->children.push_back(std::move(b));
    return Formula(std::move(n));
  }
  static Formula quant(Kind k, std::string var, ArrowObject type, Formula body) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->var_a = std::move(var);
    n->quant_type = std::move(type);
    n->children.push_back(std::move(body));
    return Formula(std::move(n));
  }

  std::shared_ptr<const Node> node_;
};

// Term-formation check: every variable is declared with an arrow object
// type, equality relates terms of one type, membership tests against a
// subobject of the variable's type, and quantifier depth is at most 2.
inline void validate_formula(const Formula& f, const std::map<std::string, ArrowObject>& types,
                             std::size_t quant_depth = 0) {
  const auto& n = f.node();
  auto type_of = [&](const std::string& var) -> const ArrowObject& {
    auto it = types.find(var);
    if (it == types.end())
      throw std::invalid_argument("formula: variable '" + var + "' is not declared");
    return it->second;
  };
  switch (n.kind) {
    case Formula::Kind::Eq:
      if (!(type_of(n.var_a) == type_of(n.var_b)))
        throw std::invalid_argument("formula: '" + n.var_a + "' and '" + n.var_b +
                                    "' have different types");
      break;
    case Formula::Kind::In:
      if (!(n.subobject->parent() == type_of(n.var_a)))
        throw std::invalid_argument("formula: membership tests '" + n.var_a +
                                    "' against a subobject of a different type");
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Implies:
    case Formula::Kind::Not:
      for (const Formula& c : n.children) validate_formula(c, types, quant_depth);
      break;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      if (quant_depth >= 2)
        throw std::invalid_argument("formula: quantifier depth exceeds 2");
      if (types.count(n.var_a))
        throw std::invalid_argument("formula: quantifier shadows variable '" + n.var_a + "'");
      auto extended = types;
      extended.emplace(n.var_a, *n.quant_type);
      validate_formula(n.children[0], extended, quant_depth + 1);
      break;
    }
    case Formula::Kind::Raw:
      break;
  }
}

// A generalized element: a stage U together with an arrow U -> X.
struct GeneralizedElement {
  Square arrow;
  const ArrowObject& stage() const { return arrow.src(); }
};

struct ForcingOptions {
  std::size_t size_bound = 3;  // component bound for quantified stages
};

// Evaluator for the forcing relation. Owns the canonical object pool, the
// per-stage arrow lists and a memo table; reuse one context across related
// queries.
class ForcingContext {
 public:
  explicit ForcingContext(ForcingOptions opts = {}) : opts_(opts) { build_pool(); }

  const ForcingOptions& options() const { return opts_; }
  const std::vector<ArrowObject>& object_pool() const { return pool_; }

  bool forces(const ArrowObject& stage, const Env& env, const Formula& f) {
    std::string key = memo_key(stage, env, f);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    bool value = eval(stage, env, f);
    memo_.emplace(std::move(key), value);
    return value;
  }

  bool forces(const GeneralizedElement& alpha, const std::string& var, const Formula& f) {
    Env env;
    env.emplace(var, alpha.arrow);
    return forces(alpha.stage(), env, f);
  }

  // All squares V -> U for V in the pool, plus the identity on U itself.
  const std::vector<Square>& squares_into(const ArrowObject& u) {
    std::size_t id = object_id(u);
    auto it = squares_into_.find(id);
    if (it != squares_into_.end()) return it->second;
    std::vector<Square> list;
    list.push_back(Square::identity(u));
    for (const ArrowObject& v : pool_)
      for (Square& s : hom_squares(v, u)) list.push_back(std::move(s));
    return squares_into_.emplace(id, std::move(list)).first->second;
  }

  const SubobjectLattice& lattice_of(const ArrowObject& u) {
    std::size_t id = object_id(u);
    auto it = lattices_.find(id);
    if (it != lattices_.end()) return it->second;
    return lattices_.emplace(id, SubobjectLattice(u)).first->second;
  }

 private:
  void build_pool() {
    for (std::size_t a = 0; a <= opts_.size_bound; ++a) {
      std::vector<std::string> ins;
      for (std::size_t i = 0; i < a; ++i) ins.push_back("v" + std::to_string(i));
      FinSet dom("V" + std::to_string(a), ins);
      for (std::size_t b = 0; b <= opts_.size_bound; ++b) {
        std::vector<std::string> outs;
        for (std::size_t i = 0; i < b; ++i) outs.push_back("w" + std::to_string(i));
        FinSet cod("W" + std::to_string(b), outs);
        for (FinFn& fn : all_functions(dom, cod)) pool_.push_back(std::move(fn));
      }
    }
  }

  std::size_t object_id(const ArrowObject& u) {
    std::string key = serialize_object(u);
    auto it = object_ids_.find(key);
    if (it != object_ids_.end()) return it->second;
    std::size_t id = object_ids_.size();
    object_ids_.emplace(std::move(key), id);
    return id;
  }

  static std::string serialize_object(const ArrowObject& u) {
    std::ostringstream os;
    os << u.dom().name << "/";
    for (const auto& e : u.dom().elements) os << e << ",";
    os << u.cod().name << "/";
    for (const auto& e : u.cod().elements) os << e << ",";
    for (std::size_t v : u.map()) os << v << ".";
    return os.str();
  }

  std::string square_key(const Square& s) {
    std::ostringstream os;
    os << object_id(s.src()) << ">" << object_id(s.dst()) << ":";
    for (std::size_t v : s.top().map()) os << v << ",";
    os << ";";
    for (std::size_t v : s.bottom().map()) os << v << ",";
    return os.str();
  }

  std::string memo_key(const ArrowObject& stage, const Env& env, const Formula& f) {
    std::ostringstream os;
    os << f.id() << "|" << object_id(stage) << "|";
    for (const auto& [var, sq] : env) os << var << "=" << square_key(sq) << "|";
    return os.str();
  }

  static Env restrict_env(const Env& env, const Square& p) {
    Env out;
    for (const auto& [var, sq] : env) out.emplace(var, compose_squares(p, sq));
    return out;
  }

  static bool factors_through(const Square& sq, const Subobject& s) {
    for (std::size_t v : sq.top().map())
      if (!s.in_mask()[v]) return false;
    for (std::size_t v : sq.bottom().map())
      if (!s.out_mask()[v]) return false;
    return true;
  }

  static bool is_initial(const ArrowObject& u) {
    return u.dom().size() == 0 && u.cod().size() == 0;
  }

  bool eval(const ArrowObject& stage, const Env& env, const Formula& f) {
    const auto& n = f.node();
    switch (n.kind) {
      case Formula::Kind::Eq:
        return env.at(n.var_a) == env.at(n.var_b);
      case Formula::Kind::In:
        return factors_through(env.at(n.var_a), *n.subobject);
      case Formula::Kind::And:
        return forces(stage, env, n.children[0]) && forces(stage, env, n.children[1]);
      case Formula::Kind::Or: {
        if (forces(stage, env, n.children[0]) || forces(stage, env, n.children[1])) return true;
        // Jointly epic pair: two subobjects whose images cover the stage
        // componentwise, each forcing one disjunct after restriction.
        const SubobjectLattice& lat = lattice_of(stage);
        std::vector<char> left_ok(lat.size(), 2), right_ok(lat.size(), 2);
        for (std::size_t i = 0; i < lat.size(); ++i) {
          for (std::size_t j = 0; j < lat.size(); ++j) {
            if (!(lat.join(lat.elements()[i], lat.elements()[j]) == lat.top())) continue;
            if (left_ok[i] == 2) {
              Square incl = lat.elements()[i].inclusion();
              left_ok[i] = forces(incl.src(), restrict_env(env, incl), n.children[0]) ? 1 : 0;
            }
            if (!left_ok[i]) continue;
            if (right_ok[j] == 2) {
              Square incl = lat.elements()[j].inclusion();
              right_ok[j] = forces(incl.src(), restrict_env(env, incl), n.children[1]) ? 1 : 0;
            }
            if (right_ok[j]) return true;
          }
        }
        return false;
      }
      case Formula::Kind::Implies: {
        for (const Square& p : squares_into(stage)) {
          Env restricted = restrict_env(env, p);
          if (forces(p.src(), restricted, n.children[0]) &&
              !forces(p.src(), restricted, n.children[1]))
            return false;
        }
        return true;
      }
      case Formula::Kind::Not: {
        for (const Square& p : squares_into(stage)) {
          if (is_initial(p.src())) continue;
          if (forces(p.src(), restrict_env(env, p), n.children[0])) return false;
        }
        return true;
      }
      case Formula::Kind::Forall: {
        for (const Square& p : squares_into(stage)) {
          Env restricted = restrict_env(env, p);
          for (const Square& beta : hom_squares(p.src(), *n.quant_type)) {
            Env extended = restricted;
            extended.emplace(n.var_a, beta);
            if (!forces(p.src(), extended, n.children[0])) return false;
          }
        }
        return true;
      }
      case Formula::Kind::Exists: {
        for (const Square& p : squares_into(stage)) {
          if (!p.is_epic()) continue;
          Env restricted = restrict_env(env, p);
          for (const Square& beta : hom_squares(p.src(), *n.quant_type)) {
            Env extended = restricted;
            extended.emplace(n.var_a, beta);
            if (forces(p.src(), extended, n.children[0])) return true;
          }
        }
        return false;
      }
      case Formula::Kind::Raw:
        return n.raw_pred(stage, env);
    }
    return false;
  }

  ForcingOptions opts_;
  std::vector<ArrowObject> pool_;
  std::map<std::string, std::size_t> object_ids_;
  std::map<std::size_t, std::vector<Square>> squares_into_;
  std::map<std::size_t, SubobjectLattice> lattices_;
  std::unordered_map<std::string, bool> memo_;
};

// Heyting-algebra value of a quantifier-free single-variable formula, used as
// the independent oracle for the forcing checker: the formula's
// characteristic arrow is the classifying square of this subobject.
inline Subobject truth_subobject(const Formula& f, const std::string& var,
                                 const SubobjectLattice& lat) {
  const auto& n = f.node();
  switch (n.kind) {
    case Formula::Kind::Eq:
      if (n.var_a != n.var_b)
        throw std::invalid_argument("truth_subobject: equality of distinct variables");
      return lat.top();
    case Formula::Kind::In:
      if (n.var_a != var) throw std::invalid_argument("truth_subobject: unknown variable");
      return *n.subobject;
    case Formula::Kind::And:
      return lat.meet(truth_subobject(n.children[0], var, lat),
                      truth_subobject(n.children[1], var, lat));
    case Formula::Kind::Or:
      return lat.join(truth_subobject(n.children[0], var, lat),
                      truth_subobject(n.children[1], var, lat));
    case Formula::Kind::Implies:
      return lat.implies(truth_subobject(n.children[0], var, lat),
                         truth_subobject(n.children[1], var, lat));
    case Formula::Kind::Not:
      return lat.negate(truth_subobject(n.children[0], var, lat));
    default:
      throw std::invalid_argument("truth_subobject: formula is not quantifier-free");
  }
}

// chi_S o alpha == true o !_U, i.e. the generalized element lands entirely in
// the subobject as judged by its characteristic arrow.
inline bool characteristic_forced(const GeneralizedElement& alpha, const Subobject& s) {
  Square chi = classify(s.inclusion());
  Square via_chi = compose_squares(alpha.arrow, chi);
  Square via_truth =
      compose_squares(bang_square(alpha.stage()), SubobjectClassifier::standard().truth);
  return via_chi == via_truth;
}

struct NaturalityReport {
  bool monotone = true;
  bool local = true;
  std::size_t arrows_checked = 0;
  std::string detail;
};

// Monotonicity: if the stage forces phi(alpha), every restriction forces it.
// Local character: if an epic restriction forces phi, the stage does too.
// Both checked over all arrows from pool objects (and the identity).
inline NaturalityReport check_monotonicity_local_character(const Formula& phi,
                                                           const std::string& var,
                                                           const GeneralizedElement& alpha,
                                                           ForcingContext& cx,
                                                           std::size_t max_arrows = 0) {
  NaturalityReport rep;
  Env env;
  env.emplace(var, alpha.arrow);
  bool at_stage = cx.forces(alpha.stage(), env, phi);
  for (const Square& p : cx.squares_into(alpha.stage())) {
    if (max_arrows && rep.arrows_checked >= max_arrows) break;
    ++rep.arrows_checked;
    Env restricted;
    restricted.emplace(var, compose_squares(p, alpha.arrow));
    bool below = cx.forces(p.src(), restricted, phi);
    if (at_stage && !below) {
      rep.monotone = false;
      rep.detail = "monotonicity fails along an arrow from " + p.src().dom().name;
    }
    if (!at_stage && below && p.is_epic()) {
      rep.local = false;
      rep.detail = "local character fails along an epic arrow from " + p.src().dom().name;
    }
    if (!rep.monotone && !rep.local) break;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Prefix text format: (and p q), (or p q), (implies p q), (not p), (eq x y),
// (in x S), (forall v X p), (exists v X p).
// ---------------------------------------------------------------------------

namespace detail {

struct FormulaTokens {
  std::vector<std::string> tokens;
  std::size_t pos = 0;

  explicit FormulaTokens(const std::string& text) {
    std::string cur;
    for (char c : text) {
      if (c == '(' || c == ')') {
        if (!cur.empty()) tokens.push_back(std::exchange(cur, ""));
        tokens.push_back(std::string(1, c));
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (!cur.empty()) tokens.push_back(std::exchange(cur, ""));
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) tokens.push_back(cur);
  }

  const std::string& peek() const {
    if (pos >= tokens.size()) throw std::invalid_argument("formula: unexpected end of input");
    return tokens[pos];
  }
  std::string next() {
    std::string t = peek();
    ++pos;
    return t;
  }
  void expect(const std::string& t) {
    if (next() != t) throw std::invalid_argument("formula: expected '" + t + "'");
  }
  bool done() const { return pos == tokens.size(); }
};

inline Formula parse_formula_impl(FormulaTokens& ts,
                                  const std::map<std::string, Subobject>& subobjects,
                                  const std::map<std::string, ArrowObject>& arrow_objects) {
  ts.expect("(");
  std::string head = ts.next();
  Formula out = [&]() {
    if (head == "and" || head == "or" || head == "implies") {
      Formula a = parse_formula_impl(ts, subobjects, arrow_objects);
      Formula b = parse_formula_impl(ts, subobjects, arrow_objects);
      if (head == "and") return Formula::conj(std::move(a), std::move(b));
      if (head == "or") return Formula::disj(std::move(a), std::move(b));
      return Formula::implies(std::move(a), std::move(b));
    }
    if (head == "not") return Formula::negation(parse_formula_impl(ts, subobjects, arrow_objects));
    if (head == "eq") {
      std::string a = ts.next(), b = ts.next();
      return Formula::eq(std::move(a), std::move(b));
    }
    if (head == "in") {
      std::string var = ts.next(), sname = ts.next();
      auto it = subobjects.find(sname);
      if (it == subobjects.end())
        throw std::invalid_argument("formula: unknown subobject '" + sname + "'");
      return Formula::in(std::move(var), it->second);
    }
    if (head == "forall" || head == "exists") {
      std::string var = ts.next(), tname = ts.next();
      auto it = arrow_objects.find(tname);
      if (it == arrow_objects.end())
        throw std::invalid_argument("formula: unknown arrow object '" + tname + "'");
      Formula body = parse_formula_impl(ts, subobjects, arrow_objects);
      if (head == "forall") return Formula::forall(std::move(var), it->second, std::move(body));
      return Formula::exists(std::move(var), it->second, std::move(body));
    }
    throw std::invalid_argument("formula: unknown form '" + head + "'");
  }();
  ts.expect(")");
  return out;
}

}  // namespace detail

inline Formula parse_formula(const std::string& text,
                             const std::map<std::string, Subobject>& subobjects,
                             const std::map<std::string, ArrowObject>& arrow_objects,
                             const std::map<std::string, ArrowObject>& free_var_types) {
  detail::FormulaTokens ts(text);
  Formula f = detail::parse_formula_impl(ts, subobjects, arrow_objects);
  if (!ts.done()) throw std::invalid_argument("formula: trailing input");
  validate_formula(f, free_var_types);
  return f;
}

}  // namespace toposkit
