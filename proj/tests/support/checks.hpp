#pragma once

// Structural invariant checks shared by the unit tests and the acceptance
// runner.  Each check returns an empty string on success and a description
// of the first violation otherwise, so callers can CHECK(msg.empty()) or
// print the message directly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sfmm/tree.hpp"

namespace sfmm::testsupport {

inline std::string check_tree(const Tree& t) {
  std::ostringstream err;
  const std::int64_t n = t.pts.size();
  const std::int64_t nb = t.n_boxes();
  if (t.dim != 2 && t.dim != 3) return "tree dim is not 2 or 3";
  if (static_cast<int>(t.level_begin.size()) != t.depth + 2) return "level_begin size mismatch";
  if (t.level_begin.front() != 0 || t.level_begin.back() != nb)
    return "level_begin does not span the box array";
  for (int l = 0; l <= t.depth; ++l)
    if (t.level_begin[l] > t.level_begin[l + 1]) return "level_begin is not monotone";

  // perm is a permutation and inv_perm inverts it.
  if (static_cast<std::int64_t>(t.perm.size()) != n ||
      static_cast<std::int64_t>(t.inv_perm.size()) != n)
    return "perm size mismatch";
  std::vector<char> seen(n, 0);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int32_t p = t.perm[i];
    if (p < 0 || p >= n || seen[p]) return "perm is not a permutation";
    seen[p] = 1;
    if (t.inv_perm[p] != i) return "inv_perm does not invert perm";
  }

  std::vector<char> covered(n, 0);
  for (std::int64_t b = 0; b < nb; ++b) {
    const TreeBox& bx = t.boxes[b];
    if (bx.id != static_cast<BoxId>(b)) return "box id does not match its position";
    if (b < t.level_begin[bx.level] || b >= t.level_begin[bx.level + 1])
      return "box stored outside its level range";
    if (bx.npoints() < 1) {
      err << "box " << b << " is empty (pruning failed)";
      return err.str();
    }
    if (bx.begin < 0 || bx.end > n) return "box range out of bounds";

    // Geometry: dyadic side length, center derived from the integer cell.
    const double side = 2.0 * t.root_half / static_cast<double>(std::int64_t{1} << bx.level);
    if (std::abs(2.0 * bx.half - side) > 1e-12 * t.root_half)
      return "box half length is not dyadic";
    const std::int64_t lim = std::int64_t{1} << bx.level;
    for (int k = 0; k < t.dim; ++k) {
      if (bx.cell[k] < 0 || bx.cell[k] >= lim) return "cell coordinate out of range";
      const double want = t.root_center[k] - t.root_half + (bx.cell[k] + 0.5) * side;
      if (std::abs(bx.center[k] - want) > 1e-12 * (t.root_half + std::abs(want)))
        return "box center does not match its cell";
    }
    if (bx.morton != morton_from_cell(bx.cell, t.dim, bx.level))
      return "morton code does not match the cell";
    if (b > t.level_begin[bx.level] && t.boxes[b - 1].morton >= bx.morton)
      return "morton codes not strictly increasing within a level";

    if (bx.leaf) {
      for (BoxId c : bx.child)
        if (c >= 0) return "leaf box has children";
      if (bx.npoints() > t.leaf_cap) {
        err << "leaf " << b << " holds " << bx.npoints() << " > cap " << t.leaf_cap;
        return err.str();
      }
      for (std::int32_t i = bx.begin; i < bx.end; ++i) {
        if (covered[i]) return "point covered by two leaves";
        covered[i] = 1;
        for (int k = 0; k < t.dim; ++k)
          if (std::abs(t.pts[i][k] - bx.center[k]) > bx.half * (1.0 + 1e-9))
            return "point outside its leaf box";
      }
    } else {
      std::int32_t cursor = bx.begin;
      bool any = false;
      for (BoxId c : bx.child) {
        if (c < 0) continue;
        any = true;
        const TreeBox& ch = t.boxes[c];
        if (ch.parent != bx.id) return "child does not point back to its parent";
        if (ch.level != bx.level + 1) return "child level is not parent level + 1";
        if (ch.begin != cursor) return "children do not partition the parent range";
        cursor = ch.end;
      }
      if (!any) return "internal box has no children";
      if (cursor != bx.end) return "children do not cover the parent range";
    }
  }
  const TreeBox& root = t.boxes[0];
  if (root.level != 0 || root.parent != -1 || root.begin != 0 || root.end != n)
    return "root does not cover all points";
  for (std::int64_t i = 0; i < n; ++i)
    if (!covered[i]) return "point not covered by any leaf";
  return {};
}

// Closed boxes touch when the center gap is at most the summed half sides on
// every axis; 2:1 balance requires touching leaves to differ by at most one
// level.  Quadratic scan, intended for test-sized trees.
inline bool boxes_touch(const Tree& t, const TreeBox& a, const TreeBox& b) {
  const double slack = 1e-9 * std::min(a.half, b.half);
  for (int k = 0; k < t.dim; ++k)
    if (std::abs(a.center[k] - b.center[k]) > a.half + b.half + slack) return false;
  return true;
}

inline std::string check_balance(const Tree& t) {
  std::vector<const TreeBox*> leaves;
  for (const TreeBox& bx : t.boxes)
    if (bx.leaf) leaves.push_back(&bx);
  for (std::size_t i = 0; i < leaves.size(); ++i)
    for (std::size_t j = i + 1; j < leaves.size(); ++j) {
      if (std::abs(leaves[i]->level - leaves[j]->level) <= 1) continue;
      if (boxes_touch(t, *leaves[i], *leaves[j])) {
        std::ostringstream err;
        err << "leaves " << leaves[i]->id << " (level " << leaves[i]->level << ") and "
            << leaves[j]->id << " (level " << leaves[j]->level << ") touch";
        return err.str();
      }
    }
  return {};
}

inline std::string check_colleagues(const Tree& t, const NeighborLists& nl) {
  if (nl.colleagues.size() != t.boxes.size()) return "colleague list count mismatch";
  for (std::int64_t b = 0; b < t.n_boxes(); ++b) {
    const auto& cl = nl.colleagues[b];
    if (!std::is_sorted(cl.begin(), cl.end())) return "colleague list not sorted";
    if (std::adjacent_find(cl.begin(), cl.end()) != cl.end()) return "duplicate colleague";
    if (!std::binary_search(cl.begin(), cl.end(), static_cast<BoxId>(b)))
      return "colleague list missing the box itself";
    const TreeBox& bx = t.boxes[b];
    // Brute-force recount over the whole level.
    std::vector<BoxId> want;
    for (std::int32_t o = t.level_begin[bx.level]; o < t.level_begin[bx.level + 1]; ++o) {
      bool adj = true;
      for (int k = 0; k < t.dim; ++k)
        adj = adj && std::abs(t.boxes[o].cell[k] - bx.cell[k]) <= 1;
      if (adj) want.push_back(o);
    }
    if (want != cl) return "colleague list does not match the brute-force scan";
    for (BoxId c : cl)
      if (!std::binary_search(nl.colleagues[c].begin(), nl.colleagues[c].end(),
                              static_cast<BoxId>(b)))
        return "colleague relation not symmetric";
  }
  return {};
}

inline std::string check_coarse_fine(const Tree& t, const NeighborLists& nl) {
  if (nl.coarse.size() != t.boxes.size() || nl.fine.size() != t.boxes.size())
    return "coarse/fine list count mismatch";
  std::set<std::pair<BoxId, BoxId>> coarse_pairs, fine_pairs;
  for (std::int64_t b = 0; b < t.n_boxes(); ++b) {
    const TreeBox& bx = t.boxes[b];
    if (bx.level == 0 && !nl.coarse[b].empty()) return "root has a coarse list";
    for (BoxId c : nl.coarse[b]) {
      const TreeBox& cx = t.boxes[c];
      if (!cx.leaf) return "coarse entry is not a leaf";
      if (cx.level != bx.level - 1) return "coarse entry not one level up";
      bool adj = true;
      for (int k = 0; k < t.dim; ++k)
        adj = adj && std::abs(t.boxes[bx.parent].cell[k] - cx.cell[k]) <= 1;
      if (!adj) return "coarse entry not adjacent to the parent";
      coarse_pairs.emplace(static_cast<BoxId>(b), c);
    }
    if (!bx.leaf && !nl.fine[b].empty()) return "non-leaf has a fine list";
    for (BoxId c : nl.fine[b]) {
      const TreeBox& cx = t.boxes[c];
      if (cx.level != bx.level + 1) return "fine entry not one level down";
      if (!std::binary_search(nl.colleagues[b].begin(), nl.colleagues[b].end(), cx.parent))
        return "fine entry's parent is not a colleague";
      fine_pairs.emplace(c, static_cast<BoxId>(b));
    }
  }
  if (coarse_pairs != fine_pairs) return "coarse and fine lists are not mutual inverses";
  return {};
}

inline std::string check_all(const Tree& t, const NeighborLists& nl) {
  std::string msg = check_tree(t);
  if (msg.empty()) msg = check_balance(t);
  if (msg.empty()) msg = check_colleagues(t, nl);
  if (msg.empty()) msg = check_coarse_fine(t, nl);
  return msg;
}

}  // namespace sfmm::testsupport
