// Copyright 2026 spmdperf Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "spmdperf/errors.hpp"

namespace spmdperf {

// Nominal-valued decision table: objects x condition attributes, plus one
// decision column.
struct DecisionTable {
  std::vector<std::string> objects;              // display ids
  std::vector<std::string> attributes;           // condition attribute names
  std::vector<std::vector<std::string>> values;  // [object][attribute]
  std::vector<std::string> decisions;            // [object]

  std::size_t object_count() const { return objects.size(); }
  std::size_t attribute_count() const { return attributes.size(); }
};

// Attribute subsets as bitmasks; bit i corresponds to attributes[i].
using AttrMask = std::uint32_t;
inline constexpr int kMaxAttributes = 20;

// Pairs of objects with equal condition attributes but different decisions.
// Such pairs cannot be discerned by any attribute subset; they are reported
// and then ignored by reduct computation.
struct InconsistencyReport {
  std::vector<std::pair<int, int>> pairs;  // object indices, i < j

  bool empty() const { return pairs.empty(); }
};

// Upper-triangular matrix of discerning attribute sets: entry (i, j) holds
// the attributes on which objects i and j differ, if their decisions differ;
// otherwise the empty set.
struct DiscernibilityMatrix {
  int object_count = 0;
  std::vector<std::string> attributes;
  std::vector<AttrMask> entries;  // row-major upper triangle, i < j

  std::size_t index(int i, int j) const {
    // Offset of (i, j), i < j, within the packed upper triangle.
    const std::size_t n = static_cast<std::size_t>(object_count);
    const std::size_t si = static_cast<std::size_t>(i);
    const std::size_t sj = static_cast<std::size_t>(j);
    return si * n - si * (si + 1) / 2 + (sj - si - 1);
  }

  AttrMask at(int i, int j) const {
    if (i == j) return 0;
    if (i > j) std::swap(i, j);
    return entries[index(i, j)];
  }
};

struct MatrixBuildResult {
  DiscernibilityMatrix matrix;
  InconsistencyReport inconsistencies;
};

inline MatrixBuildResult build_matrix(const DecisionTable& table) {
  if (table.object_count() == 0) {
    throw AnalysisError(ErrorCode::EmptyInput, "decision table has no objects");
  }
  if (static_cast<int>(table.attribute_count()) > kMaxAttributes) {
    throw AnalysisError(ErrorCode::TooManyAttributes,
                        std::to_string(table.attribute_count()) +
                            " attributes exceeds the supported maximum of " +
                            std::to_string(kMaxAttributes));
  }
  MatrixBuildResult out;
  const int n = static_cast<int>(table.object_count());
  const int a = static_cast<int>(table.attribute_count());
  out.matrix.object_count = n;
  out.matrix.attributes = table.attributes;
  out.matrix.entries.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (table.decisions[static_cast<std::size_t>(i)] ==
          table.decisions[static_cast<std::size_t>(j)]) {
        continue;  // same decision: nothing to discern
      }
      AttrMask mask = 0;
      for (int k = 0; k < a; ++k) {
        if (table.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] !=
            table.values[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]) {
          mask |= (AttrMask{1} << k);
        }
      }
      if (mask == 0) {
        out.inconsistencies.pairs.emplace_back(i, j);
      } else {
        out.matrix.entries[out.matrix.index(i, j)] = mask;
      }
    }
  }
  return out;
}

// True iff `subset` intersects every non-empty matrix entry.
inline bool covers(AttrMask subset, const DiscernibilityMatrix& matrix) {
  for (AttrMask entry : matrix.entries) {
    if (entry != 0 && (subset & entry) == 0) return false;
  }
  return true;
}

struct ReductSet {
  std::vector<AttrMask> reduct_masks;               // by size, then lexicographic
  std::vector<std::vector<std::string>> reducts;    // same order, named
  AttrMask core_mask = 0;
  std::vector<std::string> core;                    // attribute order
};

namespace detail {

// Distinct non-empty entries reduced to a minimal antichain: supersets of
// another entry are redundant for hitting-set purposes.
inline std::vector<AttrMask> minimal_entries(const DiscernibilityMatrix& m) {
  std::vector<AttrMask> distinct;
  for (AttrMask e : m.entries) {
    if (e != 0) distinct.push_back(e);
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<AttrMask> minimal;
  for (AttrMask e : distinct) {
    bool dominated = false;
    for (AttrMask f : distinct) {
      if (f != e && (f & e) == f) {  // f is a proper subset of e
        dominated = true;
        break;
      }
    }
    if (!dominated) minimal.push_back(e);
  }
  return minimal;
}

inline bool hits_all(AttrMask subset, const std::vector<AttrMask>& entries) {
  for (AttrMask e : entries) {
    if ((subset & e) == 0) return false;
  }
  return true;
}

// Visits index combinations of the given size in lexicographic order.
template <typename Fn>
inline void for_each_combination(int total, int size, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (size > total) return;
  while (true) {
    fn(idx);
    int i = size - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == total - size + i) --i;
    if (i < 0) break;
    idx[static_cast<std::size_t>(i)]++;
    for (int j = i + 1; j < size; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

}  // namespace detail

// All reducts (minimal attribute subsets preserving decision discernibility)
// ordered by size then lexicographically, plus the core.  The core is the
// intersection of all reducts; it equals the union of singleton matrix
// entries, and both derivations are computed and cross-checked.
inline ReductSet compute_reducts(const DiscernibilityMatrix& matrix) {
  const int a = static_cast<int>(matrix.attributes.size());
  if (a > kMaxAttributes) {
    throw AnalysisError(ErrorCode::TooManyAttributes,
                        std::to_string(a) + " attributes exceeds the supported maximum of " +
                            std::to_string(kMaxAttributes));
  }
  const std::vector<AttrMask> entries = detail::minimal_entries(matrix);

  ReductSet out;
  for (int size = 0; size <= a; ++size) {
    detail::for_each_combination(a, size, [&](const std::vector<int>& idx) {
      AttrMask mask = 0;
      for (int i : idx) mask |= (AttrMask{1} << i);
      if (!detail::hits_all(mask, entries)) return;
      // Irredundancy: removing any single attribute must break coverage.
      for (int i : idx) {
        if (detail::hits_all(mask & ~(AttrMask{1} << i), entries)) return;
      }
      out.reduct_masks.push_back(mask);
    });
  }

  AttrMask intersection = ~AttrMask{0};
  for (AttrMask r : out.reduct_masks) intersection &= r;
  if (out.reduct_masks.empty()) intersection = 0;
  // Mask off bits beyond the attribute count.
  const AttrMask all_attrs =
      a >= 32 ? ~AttrMask{0} : ((AttrMask{1} << a) - 1);
  intersection &= all_attrs;

  AttrMask singleton_union = 0;
  for (AttrMask e : matrix.entries) {
    if (e != 0 && (e & (e - 1)) == 0) singleton_union |= e;
  }
  if (intersection != singleton_union) {
    // Provably equal for hitting sets of non-empty entries; a mismatch means
    // a defect in this module, not bad input.
    throw std::logic_error("core derivations disagree");
  }
  out.core_mask = intersection;

  auto names_of = [&](AttrMask mask) {
    std::vector<std::string> names;
    for (int i = 0; i < a; ++i) {
      if (mask & (AttrMask{1} << i)) names.push_back(matrix.attributes[static_cast<std::size_t>(i)]);
    }
    return names;
  };
  for (AttrMask r : out.reduct_masks) out.reducts.push_back(names_of(r));
  out.core = names_of(out.core_mask);
  return out;
}

// ---------------------------------------------------------------------------
// CSV persistence: header `id,<attributes...>,decision`, decision last.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  for (std::string& f : fields) {
    const auto begin = f.find_first_not_of(" \t\r");
    const auto end = f.find_last_not_of(" \t\r");
    f = begin == std::string::npos ? std::string() : f.substr(begin, end - begin + 1);
  }
  return fields;
}

}  // namespace detail

inline DecisionTable load_table_csv(std::istream& in) {
  DecisionTable table;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = detail::split_csv_line(line);
    if (!have_header) {
      if (fields.size() < 3 || fields.front() != "id" || fields.back() != "decision") {
        throw AnalysisError(ErrorCode::ParseError,
                            "line " + std::to_string(line_no) +
                                ": expected header `id,<attributes...>,decision`");
      }
      table.attributes.assign(fields.begin() + 1, fields.end() - 1);
      if (static_cast<int>(table.attributes.size()) > kMaxAttributes) {
        throw AnalysisError(ErrorCode::TooManyAttributes,
                            "more than " + std::to_string(kMaxAttributes) +
                                " attributes in header");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != table.attributes.size() + 2) {
      throw AnalysisError(ErrorCode::ParseError,
                          "line " + std::to_string(line_no) + ": expected " +
                              std::to_string(table.attributes.size() + 2) +
                              " fields, found " + std::to_string(fields.size()));
    }
    table.objects.push_back(fields.front());
    table.values.emplace_back(fields.begin() + 1, fields.end() - 1);
    table.decisions.push_back(fields.back());
  }
  if (!have_header) {
    throw AnalysisError(ErrorCode::ParseError, "empty decision-table file");
  }
  return table;
}

inline std::string save_table_csv(const DecisionTable& table) {
  std::ostringstream out;
  out << "id";
  for (const std::string& a : table.attributes) out << ',' << a;
  out << ",decision\n";
  for (std::size_t i = 0; i < table.object_count(); ++i) {
    out << table.objects[i];
    for (const std::string& v : table.values[i]) out << ',' << v;
    out << ',' << table.decisions[i] << '\n';
  }
  return out.str();
}

}  // namespace spmdperf
