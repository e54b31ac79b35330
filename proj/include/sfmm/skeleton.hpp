#pragma once

#include <cstdint>
#include <vector>

#include "sfmm/common.hpp"
#include "sfmm/kernel.hpp"
#include "sfmm/matrix.hpp"
#include "sfmm/tree.hpp"

namespace sfmm {

struct ProxyConfig {
  double radius_factor = 2.95;  // proxy box side relative to the box side
  int edge_points_2d = 24;      // Lobatto nodes per square edge
  int face_grid_3d = 8;         // Lobatto grid per cube face axis
};

// Surface point cloud (interleaved coords) on the boundary of the scaled box
// around (center, half).  Corner and edge nodes appear once: 4p - 4 points in
// 2d, 6g^2 - 12g + 8 in 3d.
std::vector<double> proxy_surface(int dim, const double* center, double half,
                                  const ProxyConfig& cfg);

// Interpolative decomposition of the columns of M: M[:,red] ~= M[:,skel] * interp.
// Pivots greedily by largest residual column norm (ties to the lowest index)
// and stops once the largest remaining residual drops to eps times the
// largest initial column norm.  skel and red are sorted ascending and the
// rows/columns of interp follow that order.
template <class T>
struct ColumnIdResult {
  int k = 0;
  std::vector<std::int32_t> skel, red;
  Matrix<T> interp;  // k x (n - k)
};

template <class T>
ColumnIdResult<T> column_id(const Matrix<T>& m, double eps);

template <class T>
struct BoxSkeleton {
  std::vector<std::int32_t> index_vec;  // tree-order point ids owned by the box
  std::vector<std::int32_t> skel_pos;   // positions into index_vec, ascending
  std::vector<std::int32_t> red_pos;    // complement of skel_pos, ascending
  Matrix<T> interp;                     // |skel| x |red|
  std::int32_t parent_offset = 0;       // start of this box's skeleton slice in the parent
  bool saturated = false;               // rank hit the proxy row budget before tol
  std::int32_t k() const { return static_cast<std::int32_t>(skel_pos.size()); }
};

template <class T>
struct SkeletonSet {
  double tol = 0;
  ProxyConfig proxy;
  int k_max = 0;
  std::int64_t proj_scalars = 0;  // sum over boxes of |skel| * |red|
  int saturated_boxes = 0;        // boxes whose rank hit the proxy row budget
  std::vector<BoxSkeleton<T>> box;
};

// Upward sweep: leaves own their points, internal boxes own the concatenation
// of their children's skeletons, and every box at level 2 or deeper is
// compressed against its proxy surface.  Boxes above level 2 only get index
// vectors (empty for an internal root, since its children stay uncompressed).
template <class K>
SkeletonSet<typename K::scalar> build_skeletons(const Tree& tree, const K& kernel, double tol,
                                                const ProxyConfig& cfg = {});

}  // namespace sfmm
