#pragma once

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ncpit/circuit.hpp"

namespace ncpit {

// c0 + sum_k lin[k] * z_k over some next-stage variable set
struct AffineForm {
  u64 c0 = 0;
  std::map<int, u64> lin;

  static AffineForm scalar(u64 c) { return {c, {}}; }
  static AffineForm var(int k, u64 c = 1) {
    AffineForm a;
    if (c) a.lin[k] = c;
    return a;
  }
  bool is_zero() const { return c0 == 0 && lin.empty(); }
  bool is_scalar() const { return lin.empty(); }
  bool operator==(const AffineForm& o) const { return c0 == o.c0 && lin == o.lin; }
};

inline AffineForm af_add(const Field& f, AffineForm a, const AffineForm& b) {
  a.c0 = f.add(a.c0, b.c0);
  for (const auto& [k, c] : b.lin) {
    u64 v = f.add(a.lin[k], c);
    if (v) a.lin[k] = v;
    else a.lin.erase(k);
  }
  return a;
}

inline AffineForm af_scale(const Field& f, u64 c, const AffineForm& a) {
  AffineForm r;
  if (!c) return r;
  r.c0 = f.mul(c, a.c0);
  for (const auto& [k, v] : a.lin) r.lin[k] = f.mul(c, v);
  return r;
}

inline u64 af_eval(const Field& f, const AffineForm& a, const std::vector<u64>& z) {
  u64 r = a.c0;
  for (const auto& [k, c] : a.lin) r = f.fma(r, c, z.at(static_cast<std::size_t>(k)));
  return r;
}

inline std::string af_to_string(const AffineForm& a, const VarSet& vars) {
  if (a.is_zero()) return "0";
  std::string s;
  for (const auto& [k, c] : a.lin) {
    if (!s.empty()) s += " + ";
    s += std::to_string(c) + "*" + vars.name(k);
  }
  if (a.c0) s += (s.empty() ? "" : " + ") + std::to_string(a.c0);
  return s;
}

// Square sparse matrix; zero entries are never stored.
struct Matrix {
  int dim = 0;
  std::map<std::pair<int, int>, AffineForm> e;

  Matrix() = default;
  explicit Matrix(int d) : dim(d) {}

  static Matrix identity(int d) {
    Matrix m(d);
    for (int i = 0; i < d; ++i) m.e[{i, i}] = AffineForm::scalar(1);
    return m;
  }
  bool is_scalar() const {
    for (const auto& [ij, a] : e)
      if (!a.is_scalar()) return false;
    return true;
  }
  AffineForm get(int i, int j) const {
    auto it = e.find({i, j});
    return it == e.end() ? AffineForm{} : it->second;
  }
  u64 scalar_at(int i, int j) const { return get(i, j).c0; }
  void add(const Field& f, int i, int j, const AffineForm& a) {
    if (a.is_zero()) return;
    auto it = e.find({i, j});
    if (it == e.end()) {
      e.emplace(std::make_pair(i, j), a);
      return;
    }
    it->second = af_add(f, it->second, a);
    if (it->second.is_zero()) e.erase(it);
  }
  void add_scalar(const Field& f, int i, int j, u64 c) { add(f, i, j, AffineForm::scalar(c)); }
  std::size_t nnz() const { return e.size(); }
  bool operator==(const Matrix& o) const { return dim == o.dim && e == o.e; }
};

inline Matrix matmul(const Field& f, const Matrix& a, const Matrix& b) {
  if (a.dim != b.dim) throw Error(Errc::DimensionMismatch, "matmul of " + std::to_string(a.dim) + " and " + std::to_string(b.dim));
  if (!a.is_scalar() || !b.is_scalar()) throw Error(Errc::UnsupportedEntryKinds, "matmul needs scalar entries");
  std::vector<std::vector<std::pair<int, u64>>> brow(static_cast<std::size_t>(b.dim));
  for (const auto& [ij, v] : b.e) brow[static_cast<std::size_t>(ij.first)].push_back({ij.second, v.c0});
  Matrix r(a.dim);
  for (const auto& [ij, v] : a.e)
    for (const auto& [j, w] : brow[static_cast<std::size_t>(ij.second)]) r.add_scalar(f, ij.first, j, f.mul(v.c0, w));
  return r;
}

inline Matrix matadd(const Field& f, Matrix a, const Matrix& b) {
  if (a.dim != b.dim) throw Error(Errc::DimensionMismatch, "matadd dimension mismatch");
  for (const auto& [ij, v] : b.e) a.add(f, ij.first, ij.second, v);
  return a;
}

// Block matrix a_ij * B. Affine entries are allowed only in B.
inline Matrix kron(const Field& f, const Matrix& a, const Matrix& b) {
  if (!a.is_scalar()) throw Error(Errc::UnsupportedEntryKinds, "left Kronecker operand must be scalar");
  Matrix r(a.dim * b.dim);
  for (const auto& [ij, x] : a.e)
    for (const auto& [kl, y] : b.e) r.add(f, ij.first * b.dim + kl.first, ij.second * b.dim + kl.second, af_scale(f, x.c0, y));
  return r;
}

struct AffineParts {
  Matrix a0;
  std::vector<Matrix> lin;  // one per variable
};

inline AffineParts decompose_affine(const Matrix& m, int nvars) {
  AffineParts p{Matrix(m.dim), std::vector<Matrix>(static_cast<std::size_t>(nvars), Matrix(m.dim))};
  for (const auto& [ij, a] : m.e) {
    if (a.c0) p.a0.e[ij] = AffineForm::scalar(a.c0);
    for (const auto& [k, c] : a.lin) {
      if (k < 0 || k >= nvars) throw Error(Errc::VarSetMismatch, "entry uses variable outside the set");
      p.lin[static_cast<std::size_t>(k)].e[ij] = AffineForm::scalar(c);
    }
  }
  return p;
}

inline Matrix reassemble_affine(const Field& f, const AffineParts& p) {
  Matrix m = p.a0;
  for (std::size_t k = 0; k < p.lin.size(); ++k)
    for (const auto& [ij, a] : p.lin[k].e) m.add(f, ij.first, ij.second, AffineForm::var(static_cast<int>(k), a.c0));
  return m;
}

// One automaton stage: variable x of `in` maps to mats[x], entries affine over `out`.
struct SubstMatrixFamily {
  std::string name;
  Field field;
  VarSet in, out;
  int dim = 0;
  int start = 0;
  std::vector<int> accepts;
  std::vector<Matrix> mats;

  void check() const {
    if (static_cast<int>(mats.size()) != in.size()) throw Error(Errc::DimensionMismatch, name + ": one matrix per input variable");
    for (const auto& m : mats) {
      if (m.dim != dim) throw Error(Errc::DimensionMismatch, name + ": matrix dimension differs");
      for (const auto& [ij, a] : m.e)
        for (const auto& [k, c] : a.lin)
          if (k >= out.size()) throw Error(Errc::VarSetMismatch, name + ": entry variable outside output set");
    }
  }
};

using ComposedFamily = SubstMatrixFamily;

// x -> [x], a 1x1 family
inline SubstMatrixFamily identity_family(Field f, const VarSet& v) {
  SubstMatrixFamily fam{"identity", f, v, v, 1, 0, {0}, {}};
  for (int i = 0; i < v.size(); ++i) {
    Matrix m(1);
    m.e[{0, 0}] = AffineForm::var(i);
    fam.mats.push_back(m);
  }
  return fam;
}

inline SubstMatrixFamily compose_pair(const SubstMatrixFamily& a, const SubstMatrixFamily& b) {
  if (!(a.out == b.in)) throw Error(Errc::VarSetMismatch, a.name + " output does not feed " + b.name);
  const Field& f = a.field;
  const int d2 = b.dim;
  SubstMatrixFamily r{a.name + "*" + b.name, f, a.in, b.out, a.dim * d2, a.start * d2 + b.start, {}, {}};
  for (int x : a.accepts)
    for (int y : b.accepts) r.accepts.push_back(x * d2 + y);
  for (const Matrix& m : a.mats) {
    Matrix c(r.dim);
    for (const auto& [ij, form] : m.e) {
      const int R = ij.first * d2, C = ij.second * d2;
      if (form.c0)
        for (int u = 0; u < d2; ++u) c.add_scalar(f, R + u, C + u, form.c0);
      for (const auto& [k, ck] : form.lin)
        for (const auto& [uv, g] : b.mats[static_cast<std::size_t>(k)].e) c.add(f, R + uv.first, C + uv.second, af_scale(f, ck, g));
    }
    r.mats.push_back(std::move(c));
  }
  return r;
}

inline ComposedFamily compose_chain(const std::vector<SubstMatrixFamily>& stages) {
  if (stages.empty()) throw Error(Errc::DimensionMismatch, "empty chain");
  SubstMatrixFamily acc = stages[0];
  for (std::size_t i = 1; i < stages.size(); ++i) acc = compose_pair(acc, stages[i]);
  return acc;
}

// Substitute values for the output variables; the result has scalar entries and no output variables.
inline SubstMatrixFamily scalarize(const SubstMatrixFamily& fam, const std::vector<u64>& z) {
  SubstMatrixFamily r = fam;
  r.out = VarSet(std::vector<std::string>{});
  for (auto& m : r.mats) {
    Matrix s(m.dim);
    for (const auto& [ij, a] : m.e) s.add_scalar(fam.field, ij.first, ij.second, af_eval(fam.field, a, z));
    m = std::move(s);
  }
  return r;
}

inline NcPolynomial af_to_poly(const Field& f, const VarSet& out, const AffineForm& a) {
  NcPolynomial p = NcPolynomial::constant(f, out, a.c0);
  for (const auto& [k, c] : a.lin) p.add_term({k}, c);
  return p;
}

// Row `start` of M_w, entries as polynomials over the output variables.
inline std::vector<NcPolynomial> family_row_word(const SubstMatrixFamily& fam, const Word& w, std::size_t cap = kDefaultMonomialCap) {
  const Field& f = fam.field;
  std::vector<NcPolynomial> row(static_cast<std::size_t>(fam.dim), NcPolynomial(f, fam.out));
  row[static_cast<std::size_t>(fam.start)] = NcPolynomial::constant(f, fam.out, 1);
  for (int x : w) {
    std::vector<NcPolynomial> next(static_cast<std::size_t>(fam.dim), NcPolynomial(f, fam.out));
    for (const auto& [ij, a] : fam.mats.at(static_cast<std::size_t>(x)).e) {
      const NcPolynomial& v = row[static_cast<std::size_t>(ij.first)];
      if (v.is_zero()) continue;
      next[static_cast<std::size_t>(ij.second)] += nc_mul(v, af_to_poly(f, fam.out, a), cap);
    }
    row = std::move(next);
  }
  return row;
}

// Row `start` of f(M) for a polynomial f over the input variables.
inline std::vector<NcPolynomial> family_row(const SubstMatrixFamily& fam, const NcPolynomial& p, std::size_t cap = kDefaultMonomialCap) {
  std::vector<NcPolynomial> acc(static_cast<std::size_t>(fam.dim), NcPolynomial(fam.field, fam.out));
  for (const auto& [w, c] : p.terms()) {
    auto row = family_row_word(fam, w, cap);
    for (std::size_t j = 0; j < row.size(); ++j)
      if (!row[j].is_zero()) acc[j] += row[j].scaled(c);
  }
  return acc;
}

inline NcPolynomial accept_sum(const SubstMatrixFamily& fam, const std::vector<NcPolynomial>& row) {
  NcPolynomial r(fam.field, fam.out);
  for (int a : fam.accepts) r += row.at(static_cast<std::size_t>(a));
  return r;
}

// Matrix of f(M) for scalar families, dense.
inline DenseMatrix to_dense(const Matrix& m) {
  DenseMatrix d(m.dim);
  for (const auto& [ij, a] : m.e) d.at(ij.first, ij.second) = a.c0;
  return d;
}

inline std::string dump_matrix(const Matrix& m, const VarSet& out) {
  std::ostringstream os;
  for (const auto& [ij, a] : m.e) os << ij.first << " " << ij.second << " " << af_to_string(a, out) << "\n";
  return os.str();
}

// Kronecker-factored view of a scalarized chain, used for row-vector queries
// without materializing the product-dimension matrices.
class ChainOperator {
 public:
  // `final_values` substitutes the last stage's output variables.
  // Each wrap m (1 <= m < stages) right-multiplies by (I + P) on the composite of stages [0, m),
  // where P sends every accept index of that prefix to its start index.
  ChainOperator(const std::vector<SubstMatrixFamily>& stages, const std::vector<u64>& final_values, std::vector<int> wraps = {})
      : f_(stages.at(0).field), wraps_(std::move(wraps)) {
    for (std::size_t t = 0; t + 1 < stages.size(); ++t)
      if (!(stages[t].out == stages[t + 1].in)) throw Error(Errc::VarSetMismatch, stages[t].name + " output does not feed " + stages[t + 1].name);
    const std::size_t K = stages.size();
    tail_.assign(K + 1, 1);
    for (std::size_t t = K; t-- > 0;) tail_[t] = tail_[t + 1] * static_cast<std::size_t>(stages[t].dim);
    for (std::size_t t = 0; t < K; ++t) {
      const auto& st = stages[t];
      Stage s;
      s.dim = st.dim;
      dims_.push_back(st.dim);
      for (const Matrix& m : st.mats) {
        std::vector<Row> rows(static_cast<std::size_t>(st.dim));
        for (const auto& [ij, a] : m.e) {
          Entry e{ij.second, a.c0, {}};
          if (t + 1 == K) e.c0 = af_eval(f_, a, final_values);
          else e.lin.assign(a.lin.begin(), a.lin.end());
          if (e.c0 == 0 && e.lin.empty()) continue;
          Row& r = rows[static_cast<std::size_t>(ij.first)];
          r.entries.push_back(std::move(e));
          for (const auto& [k, c] : r.entries.back().lin)
            if (std::find(r.vars.begin(), r.vars.end(), k) == r.vars.end()) r.vars.push_back(k);
        }
        s.per_var.push_back(std::move(rows));
      }
      stages_.push_back(std::move(s));
    }
    // flat start and accepts, row-major
    std::vector<std::size_t> starts{0};
    std::vector<std::vector<std::size_t>> acc{{0}};
    for (std::size_t t = 0; t < K; ++t) {
      const std::size_t d = static_cast<std::size_t>(stages[t].dim);
      starts.push_back(starts.back() * d + static_cast<std::size_t>(stages[t].start));
      std::vector<std::size_t> nx;
      for (std::size_t a : acc.back())
        for (int b : stages[t].accepts) nx.push_back(a * d + static_cast<std::size_t>(b));
      acc.push_back(std::move(nx));
    }
    start_ = starts[K];
    accepts_ = acc[K];
    std::sort(wraps_.begin(), wraps_.end());
    for (int m : wraps_) {
      if (m < 1 || static_cast<std::size_t>(m) >= K) throw Error(Errc::DimensionMismatch, "wrap position out of range");
      wrap_info_.push_back({starts[static_cast<std::size_t>(m)], acc[static_cast<std::size_t>(m)], tail_[static_cast<std::size_t>(m)]});
    }
  }

  std::size_t dim() const { return tail_[0]; }
  const std::vector<int>& stage_dims() const { return dims_; }

  // Row-major flat indices for a choice of accept states per stage.
  std::vector<std::size_t> flatten(const std::vector<std::vector<int>>& per_stage) const {
    if (per_stage.size() != dims_.size()) throw Error(Errc::DimensionMismatch, "one accept list per stage");
    std::vector<std::size_t> acc{0};
    for (std::size_t t = 0; t < dims_.size(); ++t) {
      std::vector<std::size_t> nx;
      for (std::size_t a : acc)
        for (int b : per_stage[t]) nx.push_back(a * static_cast<std::size_t>(dims_[t]) + static_cast<std::size_t>(b));
      acc = std::move(nx);
    }
    return acc;
  }
  std::size_t start() const { return start_; }
  const std::vector<std::size_t>& accepts() const { return accepts_; }
  const Field& field() const { return f_; }

  RowVec unit_start() const {
    RowVec v(dim(), 0);
    v[start_] = 1;
    return v;
  }

  // v * C_x
  RowVec apply(int x, const RowVec& v) const {
    RowVec r = apply_stage(0, x, v);
    for (const auto& w : wrap_info_) {
      RowVec add(w.block, 0);
      bool any = false;
      for (std::size_t a : w.accepts)
        for (std::size_t u = 0; u < w.block; ++u)
          if (u64 val = r[a * w.block + u]) {
            add[u] = f_.add(add[u], val);
            any = true;
          }
      if (!any) continue;
      for (std::size_t u = 0; u < w.block; ++u) r[w.start * w.block + u] = f_.add(r[w.start * w.block + u], add[u]);
    }
    return r;
  }

  // Dense matrix C_x, for tests at small dimension.
  DenseMatrix materialize(int x) const {
    const std::size_t N = dim();
    DenseMatrix m(static_cast<int>(N));
    for (std::size_t i = 0; i < N; ++i) {
      RowVec e(N, 0);
      e[i] = 1;
      RowVec r = apply(x, e);
      for (std::size_t j = 0; j < N; ++j) m.at(static_cast<int>(i), static_cast<int>(j)) = r[j];
    }
    return m;
  }

 private:
  struct Entry {
    int col;
    u64 c0;
    std::vector<std::pair<int, u64>> lin;
  };
  struct Row {
    std::vector<Entry> entries;
    std::vector<int> vars;
  };
  struct Stage {
    int dim = 0;
    std::vector<std::vector<Row>> per_var;
  };
  struct Wrap {
    std::size_t start;
    std::vector<std::size_t> accepts;
    std::size_t block;
  };

  RowVec apply_stage(std::size_t t, int x, const RowVec& v) const {
    const Stage& st = stages_[t];
    const std::size_t B = tail_[t + 1];
    RowVec r(v.size(), 0);
    const auto& rows = st.per_var.at(static_cast<std::size_t>(x));
    const bool last = t + 1 == stages_.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& row = rows[i];
      if (row.entries.empty()) continue;
      const u64* vi = v.data() + i * B;
      if (std::all_of(vi, vi + B, [](u64 z) { return z == 0; })) continue;
      if (last) {
        for (const Entry& e : row.entries) r[static_cast<std::size_t>(e.col)] = f_.fma(r[static_cast<std::size_t>(e.col)], e.c0, vi[0]);
        continue;
      }
      RowVec block(vi, vi + B);
      std::vector<RowVec> u(row.vars.size());
      for (std::size_t q = 0; q < row.vars.size(); ++q) u[q] = apply_stage(t + 1, row.vars[q], block);
      for (const Entry& e : row.entries) {
        u64* out = r.data() + static_cast<std::size_t>(e.col) * B;
        if (e.c0)
          for (std::size_t k = 0; k < B; ++k)
            if (vi[k]) out[k] = f_.fma(out[k], e.c0, vi[k]);
        for (const auto& [var, c] : e.lin) {
          const RowVec& uk = u[static_cast<std::size_t>(std::find(row.vars.begin(), row.vars.end(), var) - row.vars.begin())];
          for (std::size_t k = 0; k < B; ++k)
            if (uk[k]) out[k] = f_.fma(out[k], c, uk[k]);
        }
      }
    }
    return r;
  }

  Field f_;
  std::vector<int> wraps_;
  std::vector<std::size_t> tail_;
  std::vector<int> dims_;
  std::vector<Stage> stages_;
  std::size_t start_ = 0;
  std::vector<std::size_t> accepts_;
  std::vector<Wrap> wrap_info_;
};

}  // namespace ncpit
