#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sfmm/common.hpp"

namespace sfmm {

// Morton codes pack one child-octant group per level into 64 bits, which
// caps the depth.
inline constexpr int kMaxDepth2d = 31;
inline constexpr int kMaxDepth3d = 21;

inline int max_tree_depth(int dim) { return dim == 2 ? kMaxDepth2d : kMaxDepth3d; }

struct TreeBox {
  BoxId id = -1;
  BoxId parent = -1;
  std::array<BoxId, 8> child{-1, -1, -1, -1, -1, -1, -1, -1};  // by child octant
  int level = 0;
  std::uint64_t morton = 0;  // octant path, level-1 group in the most significant bits
  std::array<std::int64_t, 3> cell{0, 0, 0};  // integer cell coords at `level`
  double center[3] = {0, 0, 0};
  double half = 0;  // half side length
  std::int32_t begin = 0, end = 0;  // tree-order point range
  bool leaf = false;

  std::int32_t npoints() const { return end - begin; }
};

struct Tree {
  int dim = 0;
  int depth = 0;     // deepest populated level; the root is level 0
  int leaf_cap = 0;
  double root_center[3] = {0, 0, 0};
  double root_half = 0;
  std::vector<TreeBox> boxes;              // level-major, Morton-ordered per level
  std::vector<std::int32_t> level_begin;   // size depth + 2
  std::vector<std::int32_t> perm;          // tree position -> original point index
  std::vector<std::int32_t> inv_perm;      // original point index -> tree position
  PointSet pts;                            // coordinates permuted into tree order

  std::span<const TreeBox> level(int l) const {
    return {boxes.data() + level_begin[l],
            static_cast<std::size_t>(level_begin[l + 1] - level_begin[l])};
  }
  std::int64_t n_boxes() const { return static_cast<std::int64_t>(boxes.size()); }
  std::int64_t n_leaves() const;
};

// Octant path code of the cell containing x at the given level.  Points on a
// split plane go to the child with the larger coordinate; the x bit is least
// significant within each level group.
std::uint64_t morton_encode(const double* root_center, double root_half, int dim,
                            const double* x, int level);

std::uint64_t morton_from_cell(const std::array<std::int64_t, 3>& cell, int dim, int level);

// Adaptive tree: splits while a box holds more than leaf_cap points, prunes
// empty boxes, then refines until adjacent leaves differ by at most one
// level.  Throws DuplicatePointError for exact coordinate duplicates and
// DepthExceededError when the Morton depth budget runs out.
Tree build_tree(const PointSet& pts, int leaf_cap);

struct NeighborLists {
  // Same level, closed regions touching, self included; ascending box id.
  std::vector<std::vector<BoxId>> colleagues;
  // Leaves one level up whose box is adjacent to this box's parent.
  std::vector<std::vector<BoxId>> coarse;
  // Boxes one level down whose parent is adjacent to this leaf (inverse of
  // coarse); empty for non-leaves.
  std::vector<std::vector<BoxId>> fine;
};

NeighborLists build_neighbor_lists(const Tree& tree);

}  // namespace sfmm
