#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ncpit/field.hpp"

namespace ncpit {

inline constexpr std::size_t kDefaultMonomialCap = 1'000'000;

class VarSet {
 public:
  VarSet() : data_(std::make_shared<Data>()) {}
  explicit VarSet(std::vector<std::string> names) {
    auto d = std::make_shared<Data>();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!d->index.emplace(names[i], static_cast<int>(i)).second)
        throw Error(Errc::VarSetMismatch, "duplicate variable name " + names[i]);
    }
    d->names = std::move(names);
    data_ = std::move(d);
  }
  // prefix1..prefixN
  static VarSet numbered(const std::string& prefix, int n, int first = 1) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back(prefix + std::to_string(first + i));
    return VarSet(std::move(v));
  }

  int size() const { return static_cast<int>(data_->names.size()); }
  const std::string& name(int i) const { return data_->names.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& names() const { return data_->names; }
  int index(const std::string& n) const {
    auto it = data_->index.find(n);
    return it == data_->index.end() ? -1 : it->second;
  }
  bool operator==(const VarSet& o) const { return data_ == o.data_ || data_->names == o.data_->names; }
  bool operator!=(const VarSet& o) const { return !(*this == o); }

 private:
  struct Data {
    std::vector<std::string> names;
    std::unordered_map<std::string, int> index;
  };
  std::shared_ptr<const Data> data_;
};

using Word = std::vector<int>;
using XiPattern = std::vector<int>;

class CPolynomial {
 public:
  CPolynomial(Field f, VarSet v) : f_(f), vars_(std::move(v)) {}
  const Field& field() const { return f_; }
  const VarSet& vars() const { return vars_; }
  const std::map<std::vector<int>, u64>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add_term(const std::vector<int>& e, u64 c) {
    c = f_.reduce(c);
    if (c == 0) return;
    auto [it, fresh] = terms_.emplace(e, c);
    if (!fresh) {
      it->second = f_.add(it->second, c);
      if (it->second == 0) terms_.erase(it);
    }
  }
  u64 coefficient(const std::vector<int>& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0 : it->second;
  }
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << c;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        os << '*' << vars_.name(static_cast<int>(i));
        if (e[i] > 1) os << '^' << e[i];
      }
    }
    return os.str();
  }

 private:
  Field f_;
  VarSet vars_;
  std::map<std::vector<int>, u64> terms_;
};

class NcPolynomial {
 public:
  NcPolynomial(Field f, VarSet v) : f_(f), vars_(std::move(v)) {}

  static NcPolynomial constant(Field f, VarSet v, u64 c) {
    NcPolynomial p(f, std::move(v));
    p.add_term({}, c);
    return p;
  }
  static NcPolynomial monomial(Field f, VarSet v, Word w, u64 c = 1) {
    NcPolynomial p(f, std::move(v));
    p.add_term(w, c);
    return p;
  }
  static NcPolynomial variable(Field f, VarSet v, int i) { return monomial(f, std::move(v), Word{i}); }

  const Field& field() const { return f_; }
  const VarSet& vars() const { return vars_; }
  const std::map<Word, u64>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add_term(const Word& w, u64 c) {
    c = f_.reduce(c);
    if (c == 0) return;
    auto [it, fresh] = terms_.emplace(w, c);
    if (!fresh) {
      it->second = f_.add(it->second, c);
      if (it->second == 0) terms_.erase(it);
    }
  }

  u64 coefficient(const Word& w) const {
    auto it = terms_.find(w);
    return it == terms_.end() ? 0 : it->second;
  }

  int degree() const {
    int d = -1;
    for (const auto& t : terms_) d = std::max(d, static_cast<int>(t.first.size()));
    return d;
  }

  NcPolynomial& operator+=(const NcPolynomial& o) {
    check(o);
    for (const auto& [w, c] : o.terms_) add_term(w, c);
    return *this;
  }
  NcPolynomial operator+(const NcPolynomial& o) const {
    NcPolynomial r = *this;
    r += o;
    return r;
  }
  NcPolynomial scaled(u64 c) const {
    NcPolynomial r(f_, vars_);
    if (f_.reduce(c) == 0) return r;
    for (const auto& [w, a] : terms_) r.terms_.emplace(w, f_.mul(a, c));
    return r;
  }
  NcPolynomial operator-(const NcPolynomial& o) const { return *this + o.scaled(f_.neg(1)); }
  bool operator==(const NcPolynomial& o) const { return vars_ == o.vars_ && terms_ == o.terms_; }

  // Commutative evaluation at scalar points.
  u64 eval(const std::vector<u64>& point) const {
    u64 acc = 0;
    for (const auto& [w, c] : terms_) {
      u64 t = c;
      for (int v : w) t = f_.mul(t, point.at(static_cast<std::size_t>(v)));
      acc = f_.add(acc, t);
    }
    return acc;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [w, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << c;
      for (int v : w) os << '*' << vars_.name(v);
    }
    return os.str();
  }

  void check(const NcPolynomial& o) const {
    if (vars_ != o.vars_ || !(f_ == o.f_)) throw Error(Errc::VarSetMismatch, "operands over different variable sets");
  }

 private:
  Field f_;
  VarSet vars_;
  std::map<Word, u64> terms_;
};

inline NcPolynomial nc_mul(const NcPolynomial& a, const NcPolynomial& b, std::size_t cap = kDefaultMonomialCap) {
  a.check(b);
  const Field& f = a.field();
  NcPolynomial r(f, a.vars());
  Word w;
  for (const auto& [u, cu] : a.terms()) {
    for (const auto& [v, cv] : b.terms()) {
      w = u;
      w.insert(w.end(), v.begin(), v.end());
      r.add_term(w, f.mul(cu, cv));
      if (r.size() > cap) throw Error(Errc::CapExceeded, "product exceeds " + std::to_string(cap) + " monomials");
    }
  }
  return r;
}

inline u64 coefficient(const NcPolynomial& p, const Word& w) { return p.coefficient(w); }

enum class Side { Left, Right };

inline NcPolynomial derivative(const NcPolynomial& p, const Word& m, Side side) {
  NcPolynomial r(p.field(), p.vars());
  for (const auto& [w, c] : p.terms()) {
    if (w.size() < m.size()) continue;
    if (side == Side::Right) {
      if (std::equal(m.begin(), m.end(), w.end() - static_cast<long>(m.size())))
        r.add_term(Word(w.begin(), w.end() - static_cast<long>(m.size())), c);
    } else {
      if (std::equal(m.begin(), m.end(), w.begin()))
        r.add_term(Word(w.begin() + static_cast<long>(m.size()), w.end()), c);
    }
  }
  return r;
}

inline CPolynomial commutative_collapse(const NcPolynomial& p) {
  CPolynomial r(p.field(), p.vars());
  std::vector<int> e(static_cast<std::size_t>(p.vars().size()));
  for (const auto& [w, c] : p.terms()) {
    std::fill(e.begin(), e.end(), 0);
    for (int v : w) ++e[static_cast<std::size_t>(v)];
    r.add_term(e, c);
  }
  return r;
}

inline bool is_ordered_power_sum(const NcPolynomial& p, int k) {
  if (p.vars().size() != k) return false;
  for (const auto& t : p.terms())
    if (!std::is_sorted(t.first.begin(), t.first.end())) return false;
  return true;
}

// Greedy split into strict patterns xi1^l1 .. xis^ls with l1..l_{s-1} > 0.
// Letters are 0-based: index j stands for xi_{j+1}.
inline std::vector<XiPattern> xi_pattern_decompose(const Word& w, int s) {
  std::vector<XiPattern> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& why) {
    throw Error(Errc::NotPatternProduct, why + " at position " + std::to_string(i));
  };
  while (i < w.size()) {
    if (w[i] != 0) fail("segment does not start with xi1");
    XiPattern pat(static_cast<std::size_t>(s), 0);
    int cur = 0;
    while (i < w.size()) {
      int v = w[i];
      if (v < 0 || v >= s) fail("letter outside xi1..xis");
      if (v == cur) {
        ++pat[static_cast<std::size_t>(v)];
        ++i;
      } else if (v == cur + 1) {
        cur = v;
        ++pat[static_cast<std::size_t>(v)];
        ++i;
      } else {
        break;
      }
    }
    if (cur < s - 2) fail("segment ends before xi" + std::to_string(s - 1));
    if (i < w.size() && w[i] != 0) fail("segment skips an index");
    out.push_back(std::move(pat));
  }
  return out;
}

inline Word xi_pattern_concat(const std::vector<XiPattern>& pats) {
  Word w;
  for (const auto& p : pats)
    for (std::size_t j = 0; j < p.size(); ++j) w.insert(w.end(), static_cast<std::size_t>(p[j]), static_cast<int>(j));
  return w;
}

// Inverse of NcPolynomial::to_string. Accepts signed coefficients.
inline NcPolynomial parse_nc_polynomial(const std::string& text, Field f, VarSet vars) {
  NcPolynomial p(f, vars);
  std::string s;
  for (char ch : text)
    if (ch != ' ' && ch != '\t' && ch != '\n') s += ch;
  if (s == "0" || s.empty()) return p;
  std::size_t pos = 0;
  while (pos < s.size()) {
    bool negative = false;
    if (s[pos] == '+') ++pos;
    else if (s[pos] == '-') {
      negative = true;
      ++pos;
    }
    std::size_t end = pos;
    while (end < s.size() && s[end] != '+' && s[end] != '-') ++end;
    std::string term = s.substr(pos, end - pos);
    pos = end;
    if (term.empty()) throw Error(Errc::ParseError, "empty term in polynomial text");
    std::vector<std::string> parts;
    std::size_t a = 0;
    for (std::size_t b; (b = term.find('*', a)) != std::string::npos; a = b + 1) parts.push_back(term.substr(a, b - a));
    parts.push_back(term.substr(a));
    u64 c = 1;
    std::size_t first_var = 0;
    if (!parts[0].empty() && std::isdigit(static_cast<unsigned char>(parts[0][0]))) {
      c = f.reduce(std::stoull(parts[0]));
      first_var = 1;
    }
    Word w;
    for (std::size_t k = first_var; k < parts.size(); ++k) {
      int idx = vars.index(parts[k]);
      if (idx < 0) throw Error(Errc::ParseError, "unknown variable '" + parts[k] + "'");
      w.push_back(idx);
    }
    p.add_term(w, negative ? f.neg(c) : c);
  }
  return p;
}

}  // namespace ncpit
