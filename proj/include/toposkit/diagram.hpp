#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "toposkit/arrow_topos.hpp"
#include "toposkit/backprop.hpp"
#include "toposkit/logic.hpp"

namespace toposkit {

struct DiagramError : std::runtime_error {
  std::size_t line;
  DiagramError(std::size_t line_no, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + message), line(line_no) {}
};

// Index category of a diagram. Built-in shapes with fixed object and arrow
// labels; daisy_chain(k) is parametric in its length.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::daisy_chain;
  std::size_t chain_len = 1;

  struct ArrowSpec {
    std::string label, src, dst;
  };

  std::vector<std::string> object_labels() const {
    switch (kind) {
      case ShapeKind::daisy_chain: {
        std::vector<std::string> out;
        for (std::size_t i = 0; i <= chain_len; ++i) out.push_back("O" + std::to_string(i));
        return out;
      }
      case ShapeKind::pullback:
      case ShapeKind::pushout:
        return {"A", "B", "C"};
      case ShapeKind::equalizer:
      case ShapeKind::coequalizer:
      case ShapeKind::product:
      case ShapeKind::coproduct:
        return {"A", "B"};
      case ShapeKind::cube:
        return {"F", "G", "H"};
    }
    return {};
  }

  std::vector<ArrowSpec> arrow_specs() const {
    switch (kind) {
      case ShapeKind::daisy_chain: {
        std::vector<ArrowSpec> out;
        for (std::size_t i = 1; i <= chain_len; ++i)
          out.push_back({"a" + std::to_string(i), "O" + std::to_string(i - 1),
                         "O" + std::to_string(i)});
        return out;
      }
      case ShapeKind::pullback:
        return {{"f", "A", "C"}, {"g", "B", "C"}};
      case ShapeKind::pushout:
        return {{"f", "C", "A"}, {"g", "C", "B"}};
      case ShapeKind::equalizer:
      case ShapeKind::coequalizer:
        return {{"f", "A", "B"}, {"g", "A", "B"}};
      case ShapeKind::product:
      case ShapeKind::coproduct:
        return {};
      case ShapeKind::cube:
        return {{"s1", "F", "G"}, {"s2", "H", "G"}};
    }
    return {};
  }

  static ShapeSpec from_name(const std::string& name, std::size_t chain_len, std::size_t line) {
    ShapeSpec s;
    if (name == "daisy_chain") {
      if (chain_len == 0) throw DiagramError(line, "daisy_chain requires a positive length");
      s.kind = ShapeKind::daisy_chain;
      s.chain_len = chain_len;
      return s;
    }
    static const std::map<std::string, ShapeKind> names = {
        {"pullback", ShapeKind::pullback},       {"pushout", ShapeKind::pushout},
        {"equalizer", ShapeKind::equalizer},     {"coequalizer", ShapeKind::coequalizer},
        {"product", ShapeKind::product},         {"coproduct", ShapeKind::coproduct},
        {"cube", ShapeKind::cube}};
    auto it = names.find(name);
    if (it == names.end()) throw DiagramError(line, "unknown shape '" + name + "'");
    s.kind = it->second;
    return s;
  }

  std::string name() const {
    switch (kind) {
      case ShapeKind::daisy_chain:
        return "daisy_chain(" + std::to_string(chain_len) + ")";
      case ShapeKind::pullback: return "pullback";
      case ShapeKind::pushout: return "pushout";
      case ShapeKind::equalizer: return "equalizer";
      case ShapeKind::coequalizer: return "coequalizer";
      case ShapeKind::product: return "product";
      case ShapeKind::coproduct: return "coproduct";
      case ShapeKind::cube: return "cube";
    }
    return "?";
  }

  friend bool operator==(const ShapeSpec& a, const ShapeSpec& b) {
    return a.kind == b.kind && (a.kind != ShapeKind::daisy_chain || a.chain_len == b.chain_len);
  }
};

struct ParamFnSpec {
  enum class Kind { Affine, Relu, Block, Scale } kind = Kind::Scale;
  std::vector<std::size_t> dims;

  ParamFn materialize() const {
    switch (kind) {
      case Kind::Affine:
        return pf::affine(dims.at(0), dims.at(1));
      case Kind::Relu:
        return pf::relu(dims.at(0));
      case Kind::Block:
        return block_as_paramfn(
            TransformerBlock(dims.at(0), dims.at(1), dims.at(2), dims.at(3), dims.at(4)));
      case Kind::Scale:
        return pf::scale();
    }
    throw std::logic_error("ParamFnSpec: bad kind");
  }

  friend bool operator==(const ParamFnSpec& a, const ParamFnSpec& b) {
    return a.kind == b.kind && a.dims == b.dims;
  }
};

struct Relation {
  std::vector<std::string> lhs, rhs;  // fn labels, outermost first (g . h)
  std::size_t line = 0;

  friend bool operator==(const Relation& a, const Relation& b) {
    return a.lhs == b.lhs && a.rhs == b.rhs;
  }
};

struct SubobjDecl {
  std::string parent;  // arrowobj name
  std::vector<std::string> ins, outs;

  friend bool operator==(const SubobjDecl& a, const SubobjDecl& b) {
    return a.parent == b.parent && a.ins == b.ins && a.outs == b.outs;
  }
};

// A parsed architecture file: shape plus named declarations and the
// assignment of shape indices to declared entities.
struct Diagram {
  bool has_shape = false;
  ShapeSpec shape;
  std::vector<std::pair<std::string, FinSet>> sets;
  std::vector<std::pair<std::string, FinFn>> fns;
  std::vector<std::pair<std::string, FinFn>> arrowobjs;
  std::vector<std::pair<std::string, Square>> squares;
  std::vector<std::pair<std::string, SubobjDecl>> subobjs;
  std::vector<std::pair<std::string, std::string>> elements;  // formula var -> square name
  std::vector<std::pair<std::string, ParamFnSpec>> paramfns;
  std::vector<Relation> relations;
  std::vector<std::pair<std::string, std::string>> assignments;  // index label -> name
  std::vector<std::pair<std::string, std::string>> bindings;     // index label -> paramfn name

  template <typename T>
  static const T* find(const std::vector<std::pair<std::string, T>>& table,
                       const std::string& name) {
    for (const auto& [k, v] : table)
      if (k == name) return &v;
    return nullptr;
  }

  const FinSet* set(const std::string& n) const { return find(sets, n); }
  const FinFn* fn(const std::string& n) const { return find(fns, n); }
  const FinFn* arrowobj(const std::string& n) const { return find(arrowobjs, n); }
  const Square* square(const std::string& n) const { return find(squares, n); }
  const SubobjDecl* subobj(const std::string& n) const { return find(subobjs, n); }
  const ParamFnSpec* paramfn(const std::string& n) const { return find(paramfns, n); }

  const std::string* assignment(const std::string& label) const {
    return find(assignments, label);
  }
  const std::string* binding(const std::string& label) const { return find(bindings, label); }

  Subobject subobject(const std::string& n) const {
    const SubobjDecl* decl = subobj(n);
    if (!decl) throw std::invalid_argument("unknown subobject '" + n + "'");
    const FinFn* parent = arrowobj(decl->parent);
    if (!parent) throw std::invalid_argument("subobject parent '" + decl->parent + "' missing");
    return Subobject::from_names(*parent, decl->ins, decl->outs);
  }

  friend bool operator==(const Diagram& a, const Diagram& b) {
    return a.has_shape == b.has_shape && (!a.has_shape || a.shape == b.shape) && a.sets == b.sets && a.fns == b.fns &&
           a.arrowobjs == b.arrowobjs && a.squares == b.squares && a.subobjs == b.subobjs &&
           a.elements == b.elements && a.paramfns == b.paramfns && a.relations == b.relations &&
           a.assignments == b.assignments && a.bindings == b.bindings;
  }
};

// ---------------------------------------------------------------------------
// Parser: line-oriented, `#` comments.
// ---------------------------------------------------------------------------

namespace detail {

struct LineTokens {
  std::vector<std::string> toks;
  std::size_t pos = 0;
  std::size_t line;

  LineTokens(const std::string& text, std::size_t line_no) : line(line_no) {
    std::string cur;
    auto flush = [&] {
      if (!cur.empty()) toks.push_back(std::exchange(cur, ""));
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
      char c = text[i];
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        flush();
        continue;
      }
      if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
        flush();
        toks.push_back("->");
        ++i;
        continue;
      }
      if (c == ':' && i + 1 < text.size() && text[i + 1] == '=') {
        flush();
        toks.push_back(":=");
        ++i;
        continue;
      }
      if (std::string("{}(),=:.").find(c) != std::string::npos) {
        flush();
        toks.push_back(std::string(1, c));
        continue;
      }
      cur += c;
    }
    flush();
  }

  bool done() const { return pos == toks.size(); }
  const std::string& peek() const {
    if (done()) throw DiagramError(line, "unexpected end of line");
    return toks[pos];
  }
  std::string next() {
    std::string t = peek();
    ++pos;
    return t;
  }
  void expect(const std::string& t) {
    std::string got = next();
    if (got != t) throw DiagramError(line, "expected '" + t + "', got '" + got + "'");
  }
  bool accept(const std::string& t) {
    if (!done() && toks[pos] == t) {
      ++pos;
      return true;
    }
    return false;
  }
  std::size_t number(const std::string& what) {
    std::string t = next();
    try {
      return static_cast<std::size_t>(std::stoull(t));
    } catch (...) {
      throw DiagramError(line, "expected a " + what + ", got '" + t + "'");
    }
  }
  void finish() {
    if (!done()) throw DiagramError(line, "trailing tokens starting at '" + peek() + "'");
  }
};

inline std::vector<std::string> parse_name_list(LineTokens& ts) {
  std::vector<std::string> out;
  ts.expect("{");
  while (!ts.accept("}")) {
    out.push_back(ts.next());
    ts.accept(",");
  }
  return out;
}

inline std::vector<std::string> parse_path(LineTokens& ts, const std::string& stop) {
  std::vector<std::string> out;
  out.push_back(ts.next());
  while (!ts.done() && ts.peek() != stop) {
    ts.expect(".");
    out.push_back(ts.next());
  }
  return out;
}

}  // namespace detail

inline Diagram parse_diagram(const std::string& text) {
  Diagram d;
  std::istringstream stream(text);
  std::string raw_line;
  std::size_t line_no = 0;

  auto require_new = [&](const char* what, const std::string& name, bool exists,
                         std::size_t line) {
    if (exists) throw DiagramError(line, std::string(what) + " '" + name + "' declared twice");
  };

  while (std::getline(stream, raw_line)) {
    ++line_no;
    detail::LineTokens ts(raw_line, line_no);
    if (ts.done()) continue;
    std::string stmt = ts.next();

    if (stmt == "shape") {
      std::string name = ts.next();
      std::size_t k = 0;
      if (ts.accept("(")) {
        k = ts.number("chain length");
        ts.expect(")");
      }
      d.shape = ShapeSpec::from_name(name, k, line_no);
      d.has_shape = true;
    } else if (stmt == "set") {
      std::string name = ts.next();
      require_new("set", name, d.set(name) != nullptr, line_no);
      ts.expect("=");
      std::vector<std::string> elems = detail::parse_name_list(ts);
      try {
        d.sets.emplace_back(name, FinSet(name, std::move(elems)));
      } catch (const std::exception& e) {
        throw DiagramError(line_no, e.what());
      }
    } else if (stmt == "fn") {
      std::string name = ts.next();
      require_new("fn", name, d.fn(name) != nullptr, line_no);
      ts.expect(":");
      std::string src = ts.next();
      ts.expect("->");
      std::string dst = ts.next();
      const FinSet* s = d.set(src);
      if (!s) throw DiagramError(line_no, "fn '" + name + "': unknown set '" + src + "'");
      const FinSet* t = d.set(dst);
      if (!t) throw DiagramError(line_no, "fn '" + name + "': unknown set '" + dst + "'");
      std::vector<std::pair<std::string, std::string>> pairs;
      ts.expect("{");
      while (!ts.accept("}")) {
        std::string a = ts.next();
        ts.expect("->");
        std::string b = ts.next();
        pairs.emplace_back(std::move(a), std::move(b));
        ts.accept(",");
      }
      try {
        d.fns.emplace_back(name, FinFn::from_pairs(*s, *t, pairs));
      } catch (const std::exception& e) {
        throw DiagramError(line_no, std::string("fn '") + name + "': " + e.what());
      }
    } else if (stmt == "arrowobj") {
      std::string name = ts.next();
      require_new("arrowobj", name, d.arrowobj(name) != nullptr, line_no);
      ts.expect("=");
      std::string fname = ts.next();
      const FinFn* f = d.fn(fname);
      if (!f) throw DiagramError(line_no, "arrowobj '" + name + "': unknown fn '" + fname + "'");
      d.arrowobjs.emplace_back(name, *f);
    } else if (stmt == "square") {
      std::string name = ts.next();
      require_new("square", name, d.square(name) != nullptr, line_no);
      ts.expect(":");
      std::string src = ts.next();
      ts.expect("->");
      std::string dst = ts.next();
      const FinFn* so = d.arrowobj(src);
      if (!so) throw DiagramError(line_no, "square '" + name + "': unknown arrowobj '" + src + "'");
      const FinFn* to = d.arrowobj(dst);
      if (!to) throw DiagramError(line_no, "square '" + name + "': unknown arrowobj '" + dst + "'");
      ts.expect("{");
      std::string top_name, bottom_name;
      while (!ts.accept("}")) {
        std::string field = ts.next();
        ts.expect("=");
        std::string value = ts.next();
        if (field == "top")
          top_name = value;
        else if (field == "bottom")
          bottom_name = value;
        else
          throw DiagramError(line_no, "square '" + name + "': unknown field '" + field + "'");
        ts.accept(",");
      }
      const FinFn* top = d.fn(top_name);
      if (!top) throw DiagramError(line_no, "square '" + name + "': unknown fn '" + top_name + "'");
      const FinFn* bottom = d.fn(bottom_name);
      if (!bottom)
        throw DiagramError(line_no, "square '" + name + "': unknown fn '" + bottom_name + "'");
      try {
        d.squares.emplace_back(name, Square(*so, *to, *top, *bottom));
      } catch (const std::exception& e) {
        throw DiagramError(line_no, std::string("square '") + name + "': " + e.what());
      }
    } else if (stmt == "relation") {
      Relation rel;
      rel.line = line_no;
      rel.lhs = detail::parse_path(ts, "=");
      ts.expect("=");
      rel.rhs = detail::parse_path(ts, "\n");
      for (const auto& part : {rel.lhs, rel.rhs})
        for (const auto& fname : part)
          if (!d.fn(fname))
            throw DiagramError(line_no, "relation references unknown fn '" + fname + "'");
      d.relations.push_back(std::move(rel));
    } else if (stmt == "assign") {
      std::string label = ts.next();
      ts.expect(":=");
      std::string name = ts.next();
      require_new("assignment", label, d.assignment(label) != nullptr, line_no);
      if (!d.set(name) && !d.fn(name) && !d.arrowobj(name) && !d.square(name))
        throw DiagramError(line_no, "assign: unknown name '" + name + "'");
      d.assignments.emplace_back(label, name);
    } else if (stmt == "subobj") {
      std::string name = ts.next();
      require_new("subobj", name, d.subobj(name) != nullptr, line_no);
      ts.expect("of");
      std::string parent = ts.next();
      if (!d.arrowobj(parent))
        throw DiagramError(line_no, "subobj '" + name + "': unknown arrowobj '" + parent + "'");
      ts.expect("=");
      ts.expect("{");
      SubobjDecl decl;
      decl.parent = parent;
      while (!ts.accept("}")) {
        std::string field = ts.next();
        ts.expect("=");
        std::vector<std::string> names = detail::parse_name_list(ts);
        if (field == "in")
          decl.ins = std::move(names);
        else if (field == "out")
          decl.outs = std::move(names);
        else
          throw DiagramError(line_no, "subobj '" + name + "': unknown field '" + field + "'");
        ts.accept(",");
      }
      d.subobjs.emplace_back(name, std::move(decl));
      try {
        d.subobject(name);
      } catch (const std::exception& e) {
        throw DiagramError(line_no, e.what());
      }
    } else if (stmt == "element") {
      std::string var = ts.next();
      ts.expect(":=");
      std::string sq = ts.next();
      if (!d.square(sq)) throw DiagramError(line_no, "element: unknown square '" + sq + "'");
      d.elements.emplace_back(var, sq);
    } else if (stmt == "paramfn") {
      std::string name = ts.next();
      require_new("paramfn", name, d.paramfn(name) != nullptr, line_no);
      ts.expect("=");
      std::string kind = ts.next();
      ParamFnSpec spec;
      if (kind == "affine") {
        spec.kind = ParamFnSpec::Kind::Affine;
        spec.dims = {ts.number("input dimension"), ts.number("output dimension")};
      } else if (kind == "relu") {
        spec.kind = ParamFnSpec::Kind::Relu;
        spec.dims = {ts.number("dimension")};
      } else if (kind == "block") {
        spec.kind = ParamFnSpec::Kind::Block;
        spec.dims = {ts.number("d"), ts.number("n"), ts.number("h"), ts.number("m"),
                     ts.number("r")};
      } else if (kind == "scale") {
        spec.kind = ParamFnSpec::Kind::Scale;
      } else {
        throw DiagramError(line_no, "paramfn '" + name + "': unknown kind '" + kind + "'");
      }
      d.paramfns.emplace_back(name, std::move(spec));
    } else if (stmt == "bind") {
      std::string label = ts.next();
      ts.expect(":=");
      std::string name = ts.next();
      if (!d.paramfn(name)) throw DiagramError(line_no, "bind: unknown paramfn '" + name + "'");
      require_new("binding", label, d.binding(label) != nullptr, line_no);
      d.bindings.emplace_back(label, name);
    } else {
      throw DiagramError(line_no, "unknown statement '" + stmt + "'");
    }
    if (stmt != "relation") ts.finish();
  }
  // Assignments and bindings must reference declared shape labels.
  if ((!d.assignments.empty() || !d.bindings.empty()) && !d.has_shape)
    throw DiagramError(line_no, "assign/bind require a 'shape' statement");
  std::vector<std::string> labels = d.shape.object_labels();
  for (const auto& a : d.shape.arrow_specs()) labels.push_back(a.label);
  if (!d.has_shape) labels.clear();
  for (const auto& [label, name] : d.assignments) {
    bool known = false;
    for (const auto& l : labels) known = known || l == label;
    if (!known) throw DiagramError(0, "assign: '" + label + "' is not a label of shape " +
                                          d.shape.name());
  }
  for (const auto& [label, name] : d.bindings) {
    bool known = false;
    for (const auto& l : labels) known = known || l == label;
    if (!known) throw DiagramError(0, "bind: '" + label + "' is not a label of shape " +
                                          d.shape.name());
  }
  return d;
}

inline std::string serialize_diagram(const Diagram& d) {
  std::ostringstream os;
  if (d.has_shape) os << "shape " << d.shape.name() << "\n";
  for (const auto& [name, s] : d.sets) {
    os << "set " << name << " = {";
    for (std::size_t i = 0; i < s.elements.size(); ++i)
      os << (i ? ", " : " ") << s.elements[i];
    os << (s.elements.empty() ? "}" : " }") << "\n";
  }
  for (const auto& [name, f] : d.fns) {
    os << "fn " << name << " : " << f.dom().name << " -> " << f.cod().name << " {";
    for (std::size_t i = 0; i < f.dom().size(); ++i)
      os << (i ? ", " : " ") << f.dom().elements[i] << " -> " << f.cod().elements[f.apply(i)];
    os << (f.dom().size() ? " }" : "}") << "\n";
  }
  for (const auto& [name, fnref] : d.arrowobjs) {
    for (const auto& [fname, f] : d.fns)
      if (f == fnref) {
        os << "arrowobj " << name << " = " << fname << "\n";
        break;
      }
  }
  for (const auto& [name, sq] : d.squares) {
    std::string top_name, bottom_name;
    for (const auto& [fname, f] : d.fns) {
      if (f == sq.top() && top_name.empty()) top_name = fname;
      if (f == sq.bottom() && bottom_name.empty()) bottom_name = fname;
    }
    std::string src_name, dst_name;
    for (const auto& [oname, o] : d.arrowobjs) {
      if (o == sq.src() && src_name.empty()) src_name = oname;
      if (o == sq.dst() && dst_name.empty()) dst_name = oname;
    }
    os << "square " << name << " : " << src_name << " -> " << dst_name << " { top = " << top_name
       << ", bottom = " << bottom_name << " }\n";
  }
  for (const auto& [name, decl] : d.subobjs) {
    os << "subobj " << name << " of " << decl.parent << " = { in = {";
    for (std::size_t i = 0; i < decl.ins.size(); ++i) os << (i ? ", " : " ") << decl.ins[i];
    os << (decl.ins.empty() ? "}" : " }") << ", out = {";
    for (std::size_t i = 0; i < decl.outs.size(); ++i) os << (i ? ", " : " ") << decl.outs[i];
    os << (decl.outs.empty() ? "}" : " }") << " }\n";
  }
  for (const auto& [var, sq] : d.elements) os << "element " << var << " := " << sq << "\n";
  for (const auto& [name, spec] : d.paramfns) {
    os << "paramfn " << name << " = ";
    switch (spec.kind) {
      case ParamFnSpec::Kind::Affine: os << "affine"; break;
      case ParamFnSpec::Kind::Relu: os << "relu"; break;
      case ParamFnSpec::Kind::Block: os << "block"; break;
      case ParamFnSpec::Kind::Scale: os << "scale"; break;
    }
    for (std::size_t v : spec.dims) os << " " << v;
    os << "\n";
  }
  for (const auto& rel : d.relations) {
    os << "relation ";
    for (std::size_t i = 0; i < rel.lhs.size(); ++i) os << (i ? " . " : "") << rel.lhs[i];
    os << " = ";
    for (std::size_t i = 0; i < rel.rhs.size(); ++i) os << (i ? " . " : "") << rel.rhs[i];
    os << "\n";
  }
  for (const auto& [label, name] : d.assignments) os << "assign " << label << " := " << name << "\n";
  for (const auto& [label, name] : d.bindings) os << "bind " << label << " := " << name << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Validation: every declared relation holds pointwise.
// ---------------------------------------------------------------------------

struct ValidationResult {
  bool pass = true;
  std::string violated;  // textual relation
  std::string element;   // witness where the two paths diverge
};

namespace detail {

inline FinFn compose_path(const Diagram& d, const std::vector<std::string>& path,
                          std::size_t line) {
  // Path lists outermost first: g . h means g after h.
  FinFn acc = *d.fn(path.back());
  for (std::size_t i = path.size() - 1; i-- > 0;) {
    const FinFn* next = d.fn(path[i]);
    if (acc.cod() != next->dom())
      throw DiagramError(line, "relation path does not compose at '" + path[i] + "'");
    acc = compose(*next, acc);
  }
  return acc;
}

inline std::string path_text(const Relation& rel) {
  std::string s;
  for (std::size_t i = 0; i < rel.lhs.size(); ++i) s += (i ? " . " : "") + rel.lhs[i];
  s += " = ";
  for (std::size_t i = 0; i < rel.rhs.size(); ++i) s += (i ? " . " : "") + rel.rhs[i];
  return s;
}

}  // namespace detail

inline ValidationResult validate(const Diagram& d) {
  ValidationResult out;
  for (const Relation& rel : d.relations) {
    FinFn lhs = detail::compose_path(d, rel.lhs, rel.line);
    FinFn rhs = detail::compose_path(d, rel.rhs, rel.line);
    if (lhs.dom() != rhs.dom() || lhs.cod() != rhs.cod())
      throw DiagramError(rel.line, "relation sides have different endpoints");
    for (std::size_t i = 0; i < lhs.dom().size(); ++i) {
      if (lhs.apply(i) != rhs.apply(i)) {
        out.pass = false;
        out.violated = detail::path_text(rel);
        out.element = lhs.dom().elements[i];
        return out;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solve: dispatch the assigned diagram to the matching construction.
// ---------------------------------------------------------------------------

struct SolveResult {
  enum class Level { SetLevel, ArrowLevel, Composite } level = Level::SetLevel;
  // Set level
  SetConstruction set_construction;
  VerifyResult set_certificate;
  // Arrow level
  std::optional<ArrowLimitResult> arrow_result;
  // Composite (daisy chains)
  std::optional<FinFn> composite_fn;
  std::optional<Square> composite_square;

  bool verified() const {
    switch (level) {
      case Level::SetLevel:
        return set_certificate.pass;
      case Level::ArrowLevel:
        return arrow_result && arrow_result->dom_check.pass && arrow_result->cod_check.pass &&
               arrow_result->legs_commute;
      case Level::Composite:
        return composite_fn.has_value() || composite_square.has_value();
    }
    return false;
  }
};

namespace detail {

inline const std::string& assigned(const Diagram& d, const std::string& label) {
  const std::string* name = d.assignment(label);
  if (!name) throw std::invalid_argument("solve: shape label '" + label + "' is unassigned");
  return *name;
}

}  // namespace detail

inline SolveResult solve(const Diagram& d, const VerifyOptions& opts = {}) {
  if (!d.has_shape) throw std::invalid_argument("solve: file has no 'shape' statement");
  std::vector<std::string> obj_labels = d.shape.object_labels();
  std::vector<ShapeSpec::ArrowSpec> arrow_specs = d.shape.arrow_specs();

  // Level inference from the first object assignment.
  const std::string& first = detail::assigned(d, obj_labels[0]);
  bool set_level = d.set(first) != nullptr;
  bool arrow_level = d.arrowobj(first) != nullptr;
  if (!set_level && !arrow_level)
    throw std::invalid_argument("solve: '" + first + "' is neither a set nor an arrowobj");
  if (d.shape.kind == ShapeKind::cube && set_level)
    throw std::invalid_argument("solve: the cube shape requires arrowobj assignments");

  SolveResult result;
  if (d.shape.kind == ShapeKind::daisy_chain) {
    result.level = SolveResult::Level::Composite;
    if (set_level) {
      std::optional<FinFn> acc;
      for (const auto& spec : arrow_specs) {
        const FinFn* f = d.fn(detail::assigned(d, spec.label));
        if (!f) throw std::invalid_argument("solve: chain arrow '" + spec.label + "' must be a fn");
        acc = acc ? compose(*f, *acc) : *f;
      }
      result.composite_fn = std::move(acc);
    } else {
      std::optional<Square> acc;
      for (const auto& spec : arrow_specs) {
        const Square* s = d.square(detail::assigned(d, spec.label));
        if (!s)
          throw std::invalid_argument("solve: chain arrow '" + spec.label + "' must be a square");
        acc = acc ? compose_squares(*acc, *s) : *s;
      }
      result.composite_square = std::move(acc);
    }
    return result;
  }

  if (set_level) {
    SetDiagram sd;
    for (const auto& label : obj_labels) {
      const FinSet* s = d.set(detail::assigned(d, label));
      if (!s) throw std::invalid_argument("solve: object '" + label + "' must be a set");
      sd.objects.push_back(*s);
    }
    for (std::size_t i = 0; i < arrow_specs.size(); ++i) {
      const FinFn* f = d.fn(detail::assigned(d, arrow_specs[i].label));
      if (!f)
        throw std::invalid_argument("solve: arrow '" + arrow_specs[i].label + "' must be a fn");
      std::size_t src = 0, dst = 0;
      for (std::size_t j = 0; j < obj_labels.size(); ++j) {
        if (obj_labels[j] == arrow_specs[i].src) src = j;
        if (obj_labels[j] == arrow_specs[i].dst) dst = j;
      }
      if (f->dom() != sd.objects[src] || f->cod() != sd.objects[dst])
        throw std::invalid_argument("solve: fn assigned to '" + arrow_specs[i].label +
                                    "' does not match its endpoints");
      sd.arrows.push_back({arrow_specs[i].label, src, dst, *f});
    }
    result.level = SolveResult::Level::SetLevel;
    bool limit = !shape_is_colimit(d.shape.kind);
    result.set_construction = detail::set_level_limit(d.shape.kind, sd);
    SetCone cone = detail::full_cone(sd, result.set_construction, limit);
    result.set_certificate = limit ? verify_limit(sd, cone, opts) : verify_colimit(sd, cone, opts);
    if (!result.set_certificate.pass)
      throw std::runtime_error("solve: construction failed verification: " +
                               result.set_certificate.failure);
    return result;
  }

  // Arrow level.
  ArrowDiagram ad;
  for (const auto& label : obj_labels) {
    const FinFn* o = d.arrowobj(detail::assigned(d, label));
    if (!o) throw std::invalid_argument("solve: object '" + label + "' must be an arrowobj");
    ad.objects.push_back(*o);
  }
  ShapeKind kind = d.shape.kind == ShapeKind::cube ? ShapeKind::pullback : d.shape.kind;
  for (std::size_t i = 0; i < arrow_specs.size(); ++i) {
    const Square* s = d.square(detail::assigned(d, arrow_specs[i].label));
    if (!s)
      throw std::invalid_argument("solve: arrow '" + arrow_specs[i].label + "' must be a square");
    std::size_t src = 0, dst = 0;
    for (std::size_t j = 0; j < obj_labels.size(); ++j) {
      if (obj_labels[j] == arrow_specs[i].src) src = j;
      if (obj_labels[j] == arrow_specs[i].dst) dst = j;
    }
    if (s->src() != ad.objects[src] || s->dst() != ad.objects[dst])
      throw std::invalid_argument("solve: square assigned to '" + arrow_specs[i].label +
                                  "' does not match its endpoints");
    ad.arrows.push_back({arrow_specs[i].label, src, dst, *s});
  }
  result.level = SolveResult::Level::ArrowLevel;
  result.arrow_result = arrow_limit(kind, ad, opts);
  if (!result.arrow_result->dom_check.pass || !result.arrow_result->cod_check.pass)
    throw std::runtime_error("solve: componentwise construction failed verification");
  return result;
}

// ---------------------------------------------------------------------------
// Compilation to learners.
// ---------------------------------------------------------------------------

struct CompileOptions {
  double lambda = 1.0;       // weight of the equalizer consistency penalty
  double task_weight = 1.0;  // weight of the task loss in the equalizer update
};

namespace detail {

// Two parallel maps trained jointly: implement is the pair (f, g); the update
// descends on task_weight * (E_f + E_g) + lambda * |f(a) - g(a)|^2, a soft
// relaxation of the equality constraint of an equalizer.
inline Learner equalizer_learner(const ParamFn& f, const ParamFn& g, double eps,
                                 const ErrorFunction& err, const CompileOptions& opts) {
  if (f.in_dim != g.in_dim || f.out_dim != g.out_dim)
    throw std::invalid_argument("equalizer compilation requires parallel maps");
  Learner l;
  l.param_dim = f.param_dim + g.param_dim;
  l.in_dim = f.in_dim;
  l.out_dim = f.out_dim + g.out_dim;
  std::size_t cut = f.param_dim;
  double lambda = opts.lambda, tw = opts.task_weight;
  l.implement = [f, g, cut](const Vec& pq, const Vec& a) {
    Vec p = vecs::slice(pq, 0, cut), q = vecs::slice(pq, cut, pq.size() - cut);
    return vecs::concat(f.implement(p, a), g.implement(q, a));
  };
  l.update = [f, g, cut, eps, err, lambda, tw](const Vec& pq, const Vec& a, const Vec& b) {
    Vec p = vecs::slice(pq, 0, cut), q = vecs::slice(pq, cut, pq.size() - cut);
    Vec fa = f.implement(p, a), ga = g.implement(q, a);
    Vec bf = vecs::slice(b, 0, fa.size()), bg = vecs::slice(b, fa.size(), ga.size());
    Matrix jf = f.grad_p(p, a), jg = g.grad_p(q, a);
    Vec next = pq;
    for (std::size_t j = 0; j < f.param_dim; ++j) {
      double grad = 0.0;
      for (std::size_t out = 0; out < f.out_dim; ++out) {
        grad += tw * jf(out, j) * err.de_dx(fa[out], bf[out]);
        grad += lambda * 2.0 * jf(out, j) * (fa[out] - ga[out]);
      }
      next[j] -= eps * grad;
    }
    for (std::size_t j = 0; j < g.param_dim; ++j) {
      double grad = 0.0;
      for (std::size_t out = 0; out < g.out_dim; ++out) {
        grad += tw * jg(out, j) * err.de_dx(ga[out], bg[out]);
        grad -= lambda * 2.0 * jg(out, j) * (fa[out] - ga[out]);
      }
      next[cut + j] -= eps * grad;
    }
    return next;
  };
  l.request = [f, g, cut, err, lambda, tw](const Vec& pq, const Vec& a, const Vec& b) {
    Vec p = vecs::slice(pq, 0, cut), q = vecs::slice(pq, cut, pq.size() - cut);
    Vec fa = f.implement(p, a), ga = g.implement(q, a);
    Vec bf = vecs::slice(b, 0, fa.size()), bg = vecs::slice(b, fa.size(), ga.size());
    Matrix jfa = f.grad_a(p, a), jga = g.grad_a(q, a);
    Vec req(f.in_dim);
    for (std::size_t i = 0; i < f.in_dim; ++i) {
      double grad = 0.0;
      for (std::size_t out = 0; out < f.out_dim; ++out) {
        grad += tw * jfa(out, i) * err.de_dx(fa[out], bf[out]);
        grad += tw * jga(out, i) * err.de_dx(ga[out], bg[out]);
        grad += lambda * 2.0 * (jfa(out, i) - jga(out, i)) * (fa[out] - ga[out]);
      }
      req[i] = err.inverse_de_dx(a[i], grad);
    }
    return req;
  };
  return l;
}

}  // namespace detail

// Compile a learnable diagram: daisy chains fold sequential composition of
// the lifted bindings, products compose the two bound pipelines in parallel,
// and equalizers train a pair with a consistency penalty. Other shapes are
// rejected.
namespace detail {

inline Vec initial_params_for(const ParamFnSpec& spec, SplitRng& rng) {
  switch (spec.kind) {
    case ParamFnSpec::Kind::Block: {
      TransformerBlock block = TransformerBlock::random(spec.dims[0], spec.dims[1], spec.dims[2],
                                                        spec.dims[3], spec.dims[4], rng);
      return flatten_params(block);
    }
    case ParamFnSpec::Kind::Affine:
      return vecs::random(spec.dims[0] * spec.dims[1] + spec.dims[1], rng, -0.5, 0.5);
    case ParamFnSpec::Kind::Relu:
      return {};
    case ParamFnSpec::Kind::Scale:
      return vecs::random(1, rng, -0.5, 0.5);
  }
  return {};
}

}  // namespace detail

// Seeded initial parameter vector matching the layout of the compiled
// learner: bound labels in the order the shape composes them.
inline Vec initial_params(const Diagram& d, SplitRng& rng) {
  if (!d.has_shape) throw std::invalid_argument("initial_params: file has no 'shape' statement");
  std::vector<std::string> order;
  switch (d.shape.kind) {
    case ShapeKind::daisy_chain:
      for (const auto& spec : d.shape.arrow_specs()) order.push_back(spec.label);
      break;
    case ShapeKind::product:
      order = {"A", "B"};
      break;
    case ShapeKind::equalizer:
      order = {"f", "g"};
      break;
    default:
      throw std::invalid_argument("initial_params: shape " + d.shape.name() +
                                  " has no learner semantics");
  }
  Vec out;
  for (const std::string& label : order) {
    const std::string* name = d.binding(label);
    if (!name) throw std::invalid_argument("initial_params: no paramfn bound to '" + label + "'");
    Vec part = detail::initial_params_for(*d.paramfn(*name), rng);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

// `eps` may be zero here: the lifted update then reduces to the identity and
// training traces stay constant.
inline Learner compile_to_learner(const Diagram& d, double eps, const ErrorFunction& err,
                                  const CompileOptions& opts = {}) {
  if (!d.has_shape) throw std::invalid_argument("compile: file has no 'shape' statement");
  if (eps < 0.0) throw std::invalid_argument("compile: eps must be >= 0");
  auto bound_pf = [&](const std::string& label) {
    const std::string* name = d.binding(label);
    if (!name) throw std::invalid_argument("compile: no paramfn bound to label '" + label + "'");
    return d.paramfn(*name)->materialize();
  };
  switch (d.shape.kind) {
    case ShapeKind::daisy_chain: {
      std::optional<Learner> acc;
      for (const auto& spec : d.shape.arrow_specs()) {
        Learner next = detail::make_lifted(bound_pf(spec.label), eps, err).learner;
        acc = acc ? seq_compose(*acc, next) : next;
      }
      return *acc;
    }
    case ShapeKind::product:
      return par_compose(detail::make_lifted(bound_pf("A"), eps, err).learner,
                         detail::make_lifted(bound_pf("B"), eps, err).learner);
    case ShapeKind::equalizer:
      return detail::equalizer_learner(bound_pf("f"), bound_pf("g"), eps, err, opts);
    default:
      throw std::invalid_argument("compile: shape " + d.shape.name() +
                                  " has no learner semantics");
  }
}

}  // namespace toposkit
