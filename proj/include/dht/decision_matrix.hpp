#ifndef DHT_DECISION_MATRIX_HPP_
#define DHT_DECISION_MATRIX_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dht {

// Boolean decision matrix A with A(my, mx) = psi(mx, my): rows indexed by the
// Y symbol, columns by the X symbol.
struct DecisionMatrix {
  int mx = 0;
  int my = 0;
  std::vector<std::uint8_t> bits;  // row-major, my rows of mx entries

  DecisionMatrix() = default;
  DecisionMatrix(int mx_, int my_) : mx(mx_), my(my_), bits(static_cast<size_t>(mx_) * my_, 0) {
    if (mx < 1 || my < 1) throw std::invalid_argument("DecisionMatrix: sizes must be >= 1");
  }

  std::uint8_t at(int row_my, int col_mx) const {
    return bits[static_cast<size_t>(row_my) * mx + col_mx];
  }
  void set(int row_my, int col_mx, int v) {
    bits[static_cast<size_t>(row_my) * mx + col_mx] = static_cast<std::uint8_t>(v);
  }
  int psi(int sym_x, int sym_y) const { return at(sym_y, sym_x); }

  std::vector<std::uint8_t> row(int r) const {
    return {bits.begin() + static_cast<long>(r) * mx, bits.begin() + static_cast<long>(r + 1) * mx};
  }
  std::vector<std::uint8_t> col(int c) const {
    std::vector<std::uint8_t> v(static_cast<size_t>(my));
    for (int r = 0; r < my; ++r) v[static_cast<size_t>(r)] = at(r, c);
    return v;
  }

  bool is_constant(int value) const {
    for (auto b : bits)
      if (b != value) return false;
    return true;
  }
  bool is_trivial() const { return is_constant(0) || is_constant(1); }

  bool operator==(const DecisionMatrix&) const = default;
  bool operator<(const DecisionMatrix& o) const {
    if (mx != o.mx) return mx < o.mx;
    if (my != o.my) return my < o.my;
    return bits < o.bits;
  }

  // Row strings top to bottom, e.g. "1001/0011/0110/1100".
  std::string to_string() const {
    std::string s;
    for (int r = 0; r < my; ++r) {
      if (r) s += '/';
      for (int c = 0; c < mx; ++c) s += at(r, c) ? '1' : '0';
    }
    return s;
  }
  static DecisionMatrix parse(const std::string& literal) {
    std::vector<std::string> rows;
    std::string cur;
    for (char ch : literal) {
      if (ch == '/') {
        rows.push_back(cur);
        cur.clear();
      } else if (ch == '0' || ch == '1') {
        cur += ch;
      } else if (ch != ' ') {
        throw std::invalid_argument("DecisionMatrix: bad character in literal");
      }
    }
    rows.push_back(cur);
    if (rows.empty() || rows[0].empty())
      throw std::invalid_argument("DecisionMatrix: empty literal");
    DecisionMatrix d(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
    for (int r = 0; r < d.my; ++r) {
      if (static_cast<int>(rows[static_cast<size_t>(r)].size()) != d.mx)
        throw std::invalid_argument("DecisionMatrix: ragged literal");
      for (int c = 0; c < d.mx; ++c)
        d.set(r, c, rows[static_cast<size_t>(r)][static_cast<size_t>(c)] == '1');
    }
    return d;
  }
};

// psi_{mx,my}(m_x, m_y) = 1 iff m_x + m_y >= min(mx, my).
inline DecisionMatrix threshold_decoder(int mx, int my) {
  DecisionMatrix d(mx, my);
  const int m = std::min(mx, my);
  for (int r = 0; r < my; ++r)
    for (int c = 0; c < mx; ++c) d.set(r, c, c + r >= m);
  return d;
}

inline DecisionMatrix complement(const DecisionMatrix& d) {
  DecisionMatrix out = d;
  for (auto& b : out.bits) b = static_cast<std::uint8_t>(1 - b);
  return out;
}

inline DecisionMatrix threshold_decoder_bar(int mx, int my) {
  return complement(threshold_decoder(mx, my));
}

namespace detail {

inline DecisionMatrix from_rows(int mx, const std::vector<std::vector<std::uint8_t>>& rows) {
  DecisionMatrix d(mx, static_cast<int>(rows.size()));
  for (int r = 0; r < d.my; ++r)
    for (int c = 0; c < mx; ++c) d.set(r, c, rows[static_cast<size_t>(r)][static_cast<size_t>(c)]);
  return d;
}

inline DecisionMatrix transpose(const DecisionMatrix& d) {
  DecisionMatrix t(d.my, d.mx);
  for (int r = 0; r < d.my; ++r)
    for (int c = 0; c < d.mx; ++c) t.set(c, r, d.at(r, c));
  return t;
}

inline DecisionMatrix dedupe_rows(const DecisionMatrix& d) {
  std::vector<std::vector<std::uint8_t>> kept;
  for (int r = 0; r < d.my; ++r) {
    auto row = d.row(r);
    if (std::find(kept.begin(), kept.end(), row) == kept.end()) kept.push_back(row);
  }
  return from_rows(d.mx, kept);
}

inline DecisionMatrix sort_rows(const DecisionMatrix& d) {
  std::vector<std::vector<std::uint8_t>> rows;
  for (int r = 0; r < d.my; ++r) rows.push_back(d.row(r));
  std::sort(rows.begin(), rows.end());
  return from_rows(d.mx, rows);
}

}  // namespace detail

// Canonical representative under row/column permutation and duplicate-line
// deletion: dedupe both axes, then alternately sort rows and columns
// lexicographically until a fixed point.
inline DecisionMatrix canonical_form(const DecisionMatrix& d) {
  DecisionMatrix cur = detail::dedupe_rows(d);
  cur = detail::transpose(detail::dedupe_rows(detail::transpose(cur)));
  while (true) {
    DecisionMatrix next = detail::sort_rows(cur);
    next = detail::transpose(detail::sort_rows(detail::transpose(next)));
    if (next == cur) return cur;
    cur = next;
  }
}

inline bool equivalent(const DecisionMatrix& d1, const DecisionMatrix& d2) {
  return canonical_form(d1) == canonical_form(d2);
}

enum class Axis { X, Y };

// Deletes every i-dominated column (Axis::X) or row (Axis::Y): lines whose
// entries are all equal to i. Absent when no such line exists or the deletion
// would remove every line.
inline std::optional<DecisionMatrix> reduce_step(const DecisionMatrix& d, Axis axis, int i) {
  const DecisionMatrix& w = (axis == Axis::X) ? d : detail::transpose(d);
  std::vector<int> keep;
  for (int c = 0; c < w.mx; ++c) {
    auto column = w.col(c);
    bool dominated = std::all_of(column.begin(), column.end(),
                                 [&](std::uint8_t b) { return b == i; });
    if (!dominated) keep.push_back(c);
  }
  if (static_cast<int>(keep.size()) == w.mx || keep.empty()) return std::nullopt;
  DecisionMatrix out(static_cast<int>(keep.size()), w.my);
  for (int r = 0; r < w.my; ++r)
    for (size_t k = 0; k < keep.size(); ++k)
      out.set(r, static_cast<int>(k), w.at(r, keep[k]));
  return (axis == Axis::X) ? out : detail::transpose(out);
}

inline bool is_reducible(const DecisionMatrix& d) {
  if (d.is_trivial()) return false;
  for (Axis a : {Axis::X, Axis::Y})
    for (int i : {0, 1})
      if (reduce_step(d, a, i)) return true;
  return false;
}

// Applies reduction steps until no dominated line remains. Returns the unique
// irreducible residue, or absent when reduction reaches a trivial matrix
// (i.e. d is completely reducible). Trivial input is treated as completely
// reducible by an empty sequence.
inline std::optional<DecisionMatrix> reduced_form(const DecisionMatrix& d) {
  DecisionMatrix cur = d;
  while (true) {
    if (cur.is_trivial()) return std::nullopt;
    bool stepped = false;
    for (Axis a : {Axis::X, Axis::Y}) {
      for (int i : {0, 1}) {
        if (auto next = reduce_step(cur, a, i)) {
          cur = *next;
          stepped = true;
          break;
        }
      }
      if (stepped) break;
    }
    if (!stepped) return cur;
  }
}

inline bool is_completely_reducible_via_reduction(const DecisionMatrix& d) {
  return !reduced_form(d).has_value();
}

// S2 criterion: no 2x2 subdecoder equals [[0,1],[1,0]] or [[1,0],[0,1]].
inline bool is_completely_reducible(const DecisionMatrix& d) {
  for (int r1 = 0; r1 < d.my; ++r1)
    for (int r2 = r1 + 1; r2 < d.my; ++r2)
      for (int c1 = 0; c1 < d.mx; ++c1)
        for (int c2 = c1 + 1; c2 < d.mx; ++c2) {
          int a = d.at(r1, c1), b = d.at(r1, c2), c = d.at(r2, c1), e = d.at(r2, c2);
          if (a != b && a != c && a == e) return false;
        }
  return true;
}

// When d has no anti-monotone 2x2 subdecoder, sorting rows and columns by
// line sums yields a representative with non-decreasing lines on both axes.
inline std::optional<DecisionMatrix> monotone_equivalent_form(const DecisionMatrix& d) {
  if (!is_completely_reducible(d)) return std::nullopt;
  std::vector<int> rows(static_cast<size_t>(d.my)), cols(static_cast<size_t>(d.mx));
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  auto row_sum = [&](int r) {
    int s = 0;
    for (int c = 0; c < d.mx; ++c) s += d.at(r, c);
    return s;
  };
  auto col_sum = [&](int c) {
    int s = 0;
    for (int r = 0; r < d.my; ++r) s += d.at(r, c);
    return s;
  };
  std::stable_sort(rows.begin(), rows.end(), [&](int a, int b) { return row_sum(a) < row_sum(b); });
  std::stable_sort(cols.begin(), cols.end(), [&](int a, int b) { return col_sum(a) < col_sum(b); });
  DecisionMatrix out(d.mx, d.my);
  for (int r = 0; r < d.my; ++r)
    for (int c = 0; c < d.mx; ++c)
      out.set(r, c, d.at(rows[static_cast<size_t>(r)], cols[static_cast<size_t>(c)]));
  return out;
}

struct Decomposition {
  DecisionMatrix psi0;
  DecisionMatrix psi1;
  int i = 0;  // psi = psi0 xor psi1 xor (1 - i)
};

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[static_cast<size_t>(a)] != a) {
      parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
      a = parent[static_cast<size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); }
};

}  // namespace detail

// Decomposability test for value i: the bipartite graph on columns and rows
// that contain an i-cell, with edges at i-cells, is disconnected iff the
// i-cells split into two groups with disjoint active column and row sets.
// Each group then defines a non-trivial component of the decomposition
// psi = psi0 xor psi1 xor (1-i), where psi_j equals d on its group's lines
// and is constant 1-i elsewhere.
inline std::optional<Decomposition> decompose(const DecisionMatrix& d) {
  for (int i : {0, 1}) {
    detail::UnionFind uf(d.mx + d.my);
    std::vector<char> col_active(static_cast<size_t>(d.mx), 0);
    std::vector<char> row_active(static_cast<size_t>(d.my), 0);
    int cells = 0;
    for (int r = 0; r < d.my; ++r)
      for (int c = 0; c < d.mx; ++c)
        if (d.at(r, c) == i) {
          uf.unite(c, d.mx + r);
          col_active[static_cast<size_t>(c)] = 1;
          row_active[static_cast<size_t>(r)] = 1;
          ++cells;
        }
    if (cells == 0) continue;
    std::set<int> roots;
    for (int c = 0; c < d.mx; ++c)
      if (col_active[static_cast<size_t>(c)]) roots.insert(uf.find(c));
    for (int r = 0; r < d.my; ++r)
      if (row_active[static_cast<size_t>(r)]) roots.insert(uf.find(d.mx + r));
    if (roots.size() < 2) continue;

    int first_root = *roots.begin();
    Decomposition dec;
    dec.i = i;
    dec.psi0 = DecisionMatrix(d.mx, d.my);
    dec.psi1 = DecisionMatrix(d.mx, d.my);
    for (auto& b : dec.psi0.bits) b = static_cast<std::uint8_t>(1 - i);
    for (auto& b : dec.psi1.bits) b = static_cast<std::uint8_t>(1 - i);
    for (int r = 0; r < d.my; ++r)
      for (int c = 0; c < d.mx; ++c)
        if (d.at(r, c) == i) {
          DecisionMatrix& target = (uf.find(c) == first_root) ? dec.psi0 : dec.psi1;
          target.set(r, c, i);
        }
    return dec;
  }
  return std::nullopt;
}

inline bool is_decomposable(const DecisionMatrix& d) { return decompose(d).has_value(); }

enum class DecoderCategory {
  trivial,
  completely_reducible,
  reducible_to_indecomposable,
  reducible_to_decomposable,
  irreducible_indecomposable,
  irreducible_decomposable,
};

inline const char* to_string(DecoderCategory c) {
  switch (c) {
    case DecoderCategory::trivial: return "trivial";
    case DecoderCategory::completely_reducible: return "completely_reducible";
    case DecoderCategory::reducible_to_indecomposable: return "reducible_to_indecomposable";
    case DecoderCategory::reducible_to_decomposable: return "reducible_to_decomposable";
    case DecoderCategory::irreducible_indecomposable: return "irreducible_indecomposable";
    case DecoderCategory::irreducible_decomposable: return "irreducible_decomposable";
  }
  return "?";
}

struct DecoderClass {
  DecoderCategory category = DecoderCategory::trivial;
  bool reducible = false;
  bool completely_reducible = false;
  std::optional<DecisionMatrix> reduced;
  bool decomposable_reduced_form = false;
  std::optional<DecisionMatrix> monotone_equivalent;
};

inline DecoderClass classify(const DecisionMatrix& d) {
  DecoderClass out;
  if (d.is_trivial()) {
    out.category = DecoderCategory::trivial;
    out.completely_reducible = true;
    out.monotone_equivalent = monotone_equivalent_form(d);
    return out;
  }
  out.reducible = is_reducible(d);
  out.reduced = reduced_form(d);
  out.completely_reducible = !out.reduced.has_value();
  out.monotone_equivalent = monotone_equivalent_form(d);
  if (out.completely_reducible) {
    out.category = DecoderCategory::completely_reducible;
    return out;
  }
  out.decomposable_reduced_form = is_decomposable(*out.reduced);
  if (out.reducible) {
    out.category = out.decomposable_reduced_form
                       ? DecoderCategory::reducible_to_decomposable
                       : DecoderCategory::reducible_to_indecomposable;
  } else {
    out.category = out.decomposable_reduced_form
                       ? DecoderCategory::irreducible_decomposable
                       : DecoderCategory::irreducible_indecomposable;
  }
  return out;
}

struct ClassTally {
  int mx = 0;
  int my = 0;
  std::map<DecoderCategory, long long> counts;
  std::map<DecoderCategory, DecisionMatrix> exemplars;
};

inline ClassTally enumerate_classify(int mx, int my) {
  if (mx < 1 || my < 1) throw std::invalid_argument("enumerate_classify: sizes must be >= 1");
  if (static_cast<long long>(mx) * my > 20)
    throw std::invalid_argument("enumerate_classify: enumeration budget exceeded (mx*my <= 20)");
  ClassTally tally;
  tally.mx = mx;
  tally.my = my;
  const int cells = mx * my;
  const std::uint64_t total = 1ULL << cells;
  for (std::uint64_t code = 0; code < total; ++code) {
    DecisionMatrix d(mx, my);
    for (int z = 0; z < cells; ++z)
      d.bits[static_cast<size_t>(z)] = static_cast<std::uint8_t>((code >> z) & 1);
    DecoderCategory cat = classify(d).category;
    tally.counts[cat] += 1;
    tally.exemplars.try_emplace(cat, d);
  }
  return tally;
}

}  // namespace dht

#endif  // DHT_DECISION_MATRIX_HPP_
