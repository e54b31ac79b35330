#include "sfmm/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace sfmm {

namespace {

int child_index(const double* x, const double* c, int dim) {
  // A point on a split plane belongs to the child with the larger coordinate.
  int ci = 0;
  for (int k = 0; k < dim; ++k)
    if (x[k] >= c[k]) ci |= 1 << k;
  return ci;
}

// Morton codes of different levels can collide as plain integers, so map
// keys carry a leading one bit marking the code length.
std::uint64_t cell_key(int dim, int level, std::uint64_t code) {
  return (std::uint64_t{1} << (dim * level)) | code;
}

struct Builder {
  const PointSet& pts;
  int dim;
  int leaf_cap;
  int max_depth;
  std::vector<TreeBox> arena;
  std::vector<std::int32_t> perm;
  std::vector<std::int32_t> scratch;
  std::vector<std::uint8_t> cls;
  std::unordered_map<std::uint64_t, BoxId> cellmap;

  // Partitions the box's point range by child octant (stable, so the order
  // within a child stays deterministic) and creates the non-empty children.
  void split(BoxId bid, std::vector<BoxId>& created) {
    const TreeBox parent = arena[bid];  // copy, arena growth invalidates references
    const int nch = 1 << dim;
    const std::int32_t nb = parent.npoints();
    std::int32_t counts[8] = {0};
    cls.resize(nb);
    for (std::int32_t i = 0; i < nb; ++i) {
      const int ci = child_index(pts[perm[parent.begin + i]], parent.center, dim);
      cls[i] = static_cast<std::uint8_t>(ci);
      ++counts[ci];
    }
    std::int32_t offs[9];
    offs[0] = 0;
    for (int c = 0; c < nch; ++c) offs[c + 1] = offs[c] + counts[c];
    std::int32_t pos[8];
    std::copy(offs, offs + nch, pos);
    for (std::int32_t i = 0; i < nb; ++i) scratch[pos[cls[i]]++] = perm[parent.begin + i];
    std::copy(scratch.begin(), scratch.begin() + nb, perm.begin() + parent.begin);

    arena[bid].leaf = false;
    for (int c = 0; c < nch; ++c) {
      if (counts[c] == 0) continue;  // empty boxes are pruned
      TreeBox ch;
      ch.id = static_cast<BoxId>(arena.size());
      ch.parent = bid;
      ch.level = parent.level + 1;
      ch.morton = (parent.morton << dim) | static_cast<std::uint64_t>(c);
      ch.half = parent.half * 0.5;
      for (int k = 0; k < 3; ++k) ch.center[k] = parent.center[k];
      for (int k = 0; k < dim; ++k) {
        ch.cell[k] = parent.cell[k] * 2 + ((c >> k) & 1);
        ch.center[k] += ((c >> k) & 1) ? ch.half : -ch.half;
      }
      ch.begin = parent.begin + offs[c];
      ch.end = ch.begin + counts[c];
      ch.leaf = true;
      arena.push_back(ch);
      arena[bid].child[c] = ch.id;
      cellmap.emplace(cell_key(dim, ch.level, ch.morton), ch.id);
      created.push_back(ch.id);
    }
  }
};

void reject_duplicates(const PointSet& pts) {
  const std::int64_t n = pts.size();
  const int d = pts.dim;
  std::vector<std::int32_t> ord(n);
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](std::int32_t a, std::int32_t b) {
    const double *pa = pts[a], *pb = pts[b];
    for (int k = 0; k < d; ++k) {
      if (pa[k] < pb[k]) return true;
      if (pa[k] > pb[k]) return false;
    }
    return false;
  });
  for (std::int64_t i = 0; i + 1 < n; ++i) {
    const double *pa = pts[ord[i]], *pb = pts[ord[i + 1]];
    bool same = true;
    for (int k = 0; k < d; ++k) same = same && pa[k] == pb[k];
    if (same)
      throw DuplicatePointError("build_tree: points " + std::to_string(ord[i]) + " and " +
                                std::to_string(ord[i + 1]) + " coincide");
  }
}

}  // namespace

std::uint64_t morton_from_cell(const std::array<std::int64_t, 3>& cell, int dim, int level) {
  std::uint64_t code = 0;
  for (int i = 0; i < level; ++i) {
    std::uint64_t g = 0;
    for (int k = 0; k < dim; ++k) g |= static_cast<std::uint64_t>((cell[k] >> i) & 1) << k;
    code |= g << (dim * i);
  }
  return code;
}

std::uint64_t morton_encode(const double* root_center, double root_half, int dim,
                            const double* x, int level) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("morton_encode: dim must be 2 or 3");
  if (level < 0 || level > max_tree_depth(dim))
    throw std::invalid_argument("morton_encode: level out of range");
  for (int k = 0; k < dim; ++k)
    if (!(std::abs(x[k] - root_center[k]) <= root_half))
      throw std::domain_error("morton_encode: point outside the root box");
  double c[3] = {0, 0, 0};
  for (int k = 0; k < dim; ++k) c[k] = root_center[k];
  double h = root_half;
  std::uint64_t code = 0;
  for (int l = 0; l < level; ++l) {
    const int ci = child_index(x, c, dim);
    code = (code << dim) | static_cast<std::uint64_t>(ci);
    h *= 0.5;
    for (int k = 0; k < dim; ++k) c[k] += ((ci >> k) & 1) ? h : -h;
  }
  return code;
}

std::int64_t Tree::n_leaves() const {
  std::int64_t n = 0;
  for (const auto& b : boxes) n += b.leaf ? 1 : 0;
  return n;
}

Tree build_tree(const PointSet& pts, int leaf_cap) {
  const int d = pts.dim;
  if (d != 2 && d != 3) throw std::invalid_argument("build_tree: dim must be 2 or 3");
  if (leaf_cap < 1) throw std::invalid_argument("build_tree: leaf capacity must be positive");
  const std::int64_t n = pts.size();
  if (n < 1) throw std::invalid_argument("build_tree: empty point set");
  if (n > (std::numeric_limits<std::int32_t>::max)() / 2)
    throw std::invalid_argument("build_tree: point count out of range");
  if (static_cast<std::int64_t>(pts.coords.size()) != n * d)
    throw std::invalid_argument("build_tree: coordinate array size mismatch");
  for (double v : pts.coords)
    if (!std::isfinite(v)) throw std::invalid_argument("build_tree: non-finite coordinate");
  reject_duplicates(pts);

  double lo[3], hi[3];
  for (int k = 0; k < d; ++k) {
    lo[k] = std::numeric_limits<double>::infinity();
    hi[k] = -std::numeric_limits<double>::infinity();
  }
  for (std::int64_t i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], pts[i][k]);
      hi[k] = std::max(hi[k], pts[i][k]);
    }
  Builder b{pts, d, leaf_cap, max_tree_depth(d), {}, {}, {}, {}, {}};
  TreeBox root;
  root.id = 0;
  root.level = 0;
  root.half = 0;
  for (int k = 0; k < d; ++k) {
    root.center[k] = 0.5 * (lo[k] + hi[k]);
    root.half = std::max(root.half, 0.5 * (hi[k] - lo[k]));
  }
  // Grow slightly so boundary points land strictly inside; a lone point
  // still needs a positive extent.
  root.half *= 1.0 + 1e-12;
  if (root.half == 0.0) root.half = 0.5;
  root.begin = 0;
  root.end = static_cast<std::int32_t>(n);
  root.leaf = false;
  b.arena.push_back(root);
  b.cellmap.emplace(cell_key(d, 0, 0), 0);
  b.perm.resize(n);
  std::iota(b.perm.begin(), b.perm.end(), 0);
  b.scratch.resize(n);

  std::vector<BoxId> frontier{0}, next;
  while (!frontier.empty()) {
    next.clear();
    for (BoxId bid : frontier) {
      if (b.arena[bid].npoints() <= leaf_cap) {
        b.arena[bid].leaf = true;
        continue;
      }
      if (b.arena[bid].level == b.max_depth)
        throw DepthExceededError("build_tree: leaf capacity unreachable at depth " +
                                 std::to_string(b.max_depth) +
                                 " (near-duplicate points?)");
      b.split(bid, next);
    }
    std::swap(frontier, next);
  }

  // 2:1 balance.  For each leaf, any coarser leaf covering one of its
  // neighbor cells may be at most one level up; offending leaves are split
  // and the new children requeued until nothing changes.
  {
    std::vector<BoxId> leaves;
    for (const auto& box : b.arena)
      if (box.leaf) leaves.push_back(box.id);
    std::sort(leaves.begin(), leaves.end(), [&](BoxId x, BoxId y) {
      const auto &bx = b.arena[x], &by = b.arena[y];
      if (bx.level != by.level) return bx.level < by.level;
      return bx.morton < by.morton;
    });
    std::deque<BoxId> queue(leaves.begin(), leaves.end());
    std::vector<BoxId> created;
    while (!queue.empty()) {
      const BoxId bid = queue.front();
      queue.pop_front();
      if (!b.arena[bid].leaf) continue;
      bool repeat = true;
      while (repeat) {
        repeat = false;
        const TreeBox box = b.arena[bid];
        if (box.level < 2) break;
        const std::int64_t lim = std::int64_t{1} << box.level;
        const int zrange = d == 3 ? 1 : 0;
        for (std::int64_t dz = -zrange; dz <= zrange; ++dz)
          for (std::int64_t dy = -1; dy <= 1; ++dy)
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
              if (dx == 0 && dy == 0 && dz == 0) continue;
              std::array<std::int64_t, 3> nc = {box.cell[0] + dx, box.cell[1] + dy,
                                                box.cell[2] + dz};
              bool out = false;
              for (int k = 0; k < d; ++k) out = out || nc[k] < 0 || nc[k] >= lim;
              if (out) continue;
              // deepest existing box covering the neighbor cell
              for (int lvl = box.level; lvl >= 1; --lvl) {
                std::array<std::int64_t, 3> cc;
                for (int k = 0; k < 3; ++k) cc[k] = nc[k] >> (box.level - lvl);
                const auto it = b.cellmap.find(cell_key(d, lvl, morton_from_cell(cc, d, lvl)));
                if (it == b.cellmap.end()) continue;
                const BoxId cid = it->second;
                if (b.arena[cid].leaf && b.arena[cid].level <= box.level - 2) {
                  created.clear();
                  b.split(cid, created);
                  for (BoxId nk : created) queue.push_back(nk);
                  repeat = true;
                }
                break;
              }
            }
      }
    }
  }

  // Compact into level-major, Morton-sorted order.
  Tree t;
  t.dim = d;
  t.leaf_cap = leaf_cap;
  for (int k = 0; k < 3; ++k) t.root_center[k] = root.center[k];
  t.root_half = root.half;
  const std::int64_t nb = static_cast<std::int64_t>(b.arena.size());
  std::vector<std::int32_t> order(nb);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t x, std::int32_t y) {
    const auto &bx = b.arena[x], &by = b.arena[y];
    if (bx.level != by.level) return bx.level < by.level;
    return bx.morton < by.morton;
  });
  std::vector<BoxId> idmap(nb);
  for (std::int64_t i = 0; i < nb; ++i) idmap[order[i]] = static_cast<BoxId>(i);
  t.boxes.resize(nb);
  t.depth = 0;
  for (std::int64_t i = 0; i < nb; ++i) {
    TreeBox box = b.arena[order[i]];
    box.id = static_cast<BoxId>(i);
    if (box.parent >= 0) box.parent = idmap[box.parent];
    for (auto& c : box.child)
      if (c >= 0) c = idmap[c];
    t.depth = std::max(t.depth, box.level);
    t.boxes[i] = box;
  }
  t.level_begin.assign(t.depth + 2, 0);
  for (const auto& box : t.boxes) ++t.level_begin[box.level + 1];
  for (int l = 0; l <= t.depth; ++l) t.level_begin[l + 1] += t.level_begin[l];

  t.perm = std::move(b.perm);
  t.inv_perm.resize(n);
  for (std::int64_t i = 0; i < n; ++i) t.inv_perm[t.perm[i]] = static_cast<std::int32_t>(i);
  t.pts.dim = d;
  t.pts.coords.resize(n * d);
  for (std::int64_t i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) t.pts.coords[i * d + k] = pts[t.perm[i]][k];
  return t;
}

NeighborLists build_neighbor_lists(const Tree& t) {
  const int d = t.dim;
  const std::int64_t nb = t.n_boxes();
  NeighborLists nl;
  nl.colleagues.resize(nb);
  nl.coarse.resize(nb);
  nl.fine.resize(nb);

  const auto find_box = [&](int level, std::uint64_t code) -> BoxId {
    const auto first = t.boxes.begin() + t.level_begin[level];
    const auto last = t.boxes.begin() + t.level_begin[level + 1];
    const auto it = std::lower_bound(
        first, last, code, [](const TreeBox& tb, std::uint64_t c) { return tb.morton < c; });
    if (it != last && it->morton == code) return it->id;
    return -1;
  };

  for (std::int64_t i = 0; i < nb; ++i) {
    const TreeBox& box = t.boxes[i];
    const std::int64_t lim = std::int64_t{1} << box.level;
    const int zrange = d == 3 ? 1 : 0;
    for (std::int64_t dz = -zrange; dz <= zrange; ++dz)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          std::array<std::int64_t, 3> nc = {box.cell[0] + dx, box.cell[1] + dy, box.cell[2] + dz};
          bool out = false;
          for (int k = 0; k < d; ++k) out = out || nc[k] < 0 || nc[k] >= lim;
          if (out) continue;
          const BoxId id = find_box(box.level, morton_from_cell(nc, d, box.level));
          if (id >= 0) nl.colleagues[i].push_back(id);
        }
    std::sort(nl.colleagues[i].begin(), nl.colleagues[i].end());
  }

  for (std::int64_t i = 0; i < nb; ++i) {
    const TreeBox& box = t.boxes[i];
    if (box.level < 1) continue;
    for (BoxId q : nl.colleagues[box.parent])
      if (t.boxes[q].leaf) nl.coarse[i].push_back(q);
  }

  for (std::int64_t i = 0; i < nb; ++i) {
    if (!t.boxes[i].leaf) continue;
    for (BoxId q : nl.colleagues[i])
      for (BoxId c : t.boxes[q].child)
        if (c >= 0) nl.fine[i].push_back(c);
    std::sort(nl.fine[i].begin(), nl.fine[i].end());
  }
  return nl;
}

}  // namespace sfmm
