#include "sfmm/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sfmm {

namespace {

// Chebyshev-Lobatto nodes on [-1,1], endpoints included.  Mirrored explicitly
// so opposite faces produce bit-identical coordinates.
std::vector<double> lobatto_nodes(int p) {
  std::vector<double> t(p);
  for (int j = 0; j <= (p - 1) / 2; ++j) {
    const double v = std::cos(kPi * j / (p - 1));
    t[j] = v;
    t[p - 1 - j] = -v;
  }
  if (p % 2 == 1) t[p / 2] = 0.0;
  return t;
}

}  // namespace

std::vector<double> proxy_surface(int dim, const double* c, double half, const ProxyConfig& cfg) {
  if (!(cfg.radius_factor > 1.0))
    throw std::invalid_argument("proxy_surface: radius factor must exceed 1");
  std::vector<double> out;
  const double h = cfg.radius_factor * half;
  if (dim == 2) {
    const int p = cfg.edge_points_2d;
    if (p < 4) throw std::invalid_argument("proxy_surface: need at least 4 nodes per edge");
    const auto t = lobatto_nodes(p);
    out.reserve(2 * (4 * p - 4));
    for (int j = 0; j < p; ++j) {  // bottom and top edges carry the corners
      out.push_back(c[0] + t[j] * h);
      out.push_back(c[1] - h);
      out.push_back(c[0] + t[j] * h);
      out.push_back(c[1] + h);
    }
    for (int j = 1; j + 1 < p; ++j) {
      out.push_back(c[0] - h);
      out.push_back(c[1] + t[j] * h);
      out.push_back(c[0] + h);
      out.push_back(c[1] + t[j] * h);
    }
  } else if (dim == 3) {
    const int g = cfg.face_grid_3d;
    if (g < 4) throw std::invalid_argument("proxy_surface: need at least a 4x4 face grid");
    const auto t = lobatto_nodes(g);
    out.reserve(3 * (6 * g * g - 12 * g + 8));
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j)
        for (int k = 0; k < g; ++k) {
          if (i != 0 && i != g - 1 && j != 0 && j != g - 1 && k != 0 && k != g - 1) continue;
          out.push_back(c[0] + t[i] * h);
          out.push_back(c[1] + t[j] * h);
          out.push_back(c[2] + t[k] * h);
        }
  } else {
    throw std::invalid_argument("proxy_surface: dim must be 2 or 3");
  }
  return out;
}

template <class T>
ColumnIdResult<T> column_id(const Matrix<T>& m_in, double eps) {
  if (!(eps >= 0)) throw std::invalid_argument("column_id: tolerance must be non-negative");
  const std::int64_t m = m_in.rows(), n = m_in.cols();
  ColumnIdResult<T> out;
  if (n == 0) return out;

  // Column-major working copy; the pivoted QR walks down the columns.
  std::vector<T> a(static_cast<std::size_t>(m * n));
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j) a[j * m + i] = m_in(i, j);
  std::vector<std::int32_t> colid(n);
  std::iota(colid.begin(), colid.end(), 0);
  std::vector<double> vn1(n), vn2(n);
  for (std::int64_t j = 0; j < n; ++j) {
    double s = 0;
    for (std::int64_t i = 0; i < m; ++i) s += abs_sq(a[j * m + i]);
    vn1[j] = std::sqrt(s);
    vn2[j] = vn1[j];
  }
  const double thresh = eps * *std::max_element(vn1.begin(), vn1.end());

  std::vector<T> u(m);
  std::int64_t k = 0;
  const std::int64_t kmax = std::min(m, n);
  while (k < kmax) {
    std::int64_t jp = k;
    for (std::int64_t j = k + 1; j < n; ++j)
      if (vn1[j] > vn1[jp]) jp = j;  // strict, so ties pick the lowest index
    if (!(vn1[jp] > thresh)) break;
    if (jp != k) {
      std::swap_ranges(a.begin() + jp * m, a.begin() + (jp + 1) * m, a.begin() + k * m);
      std::swap(vn1[jp], vn1[k]);
      std::swap(vn2[jp], vn2[k]);
      std::swap(colid[jp], colid[k]);
    }

    double normx2 = 0;
    for (std::int64_t i = k; i < m; ++i) normx2 += abs_sq(a[k * m + i]);
    const double normx = std::sqrt(normx2);
    if (normx == 0.0) break;
    const T x0 = a[k * m + k];
    const double ax0 = std::sqrt(abs_sq(x0));
    const T phase = ax0 == 0.0 ? T(1) : T(x0 / ax0);
    const T beta = -phase * normx;
    double un2 = 0;
    u[k] = x0 - beta;
    un2 += abs_sq(u[k]);
    for (std::int64_t i = k + 1; i < m; ++i) {
      u[i] = a[k * m + i];
      un2 += abs_sq(u[i]);
    }
    a[k * m + k] = beta;

    if (un2 > 0) {
      const double scale = 2.0 / un2;
      for (std::int64_t j = k + 1; j < n; ++j) {
        T* cj = &a[j * m];
        T w{};
        for (std::int64_t i = k; i < m; ++i) w += conj_scalar(u[i]) * cj[i];
        w *= scale;
        for (std::int64_t i = k; i < m; ++i) cj[i] -= u[i] * w;
        if (vn1[j] != 0.0) {
          // Downdate the residual norm; recompute when cancellation makes the
          // running value untrustworthy (same guard as dqp3).
          const double r = std::sqrt(abs_sq(cj[k]));
          double t1 = 1.0 - (r / vn1[j]) * (r / vn1[j]);
          if (t1 < 0) t1 = 0;
          const double ratio = vn1[j] / vn2[j];
          if (t1 * ratio * ratio <= 1.5e-8) {
            double s = 0;
            for (std::int64_t i = k + 1; i < m; ++i) s += abs_sq(cj[i]);
            vn1[j] = std::sqrt(s);
            vn2[j] = vn1[j];
          } else {
            vn1[j] *= std::sqrt(t1);
          }
        }
      }
    }
    ++k;
  }

  out.k = static_cast<int>(k);
  const std::int64_t nr = n - k;
  // interp in selection order: solve the triangular system R11 X = R12.
  Matrix<T> tw(k, nr);
  for (std::int64_t j = 0; j < nr; ++j) {
    const T* rhs = &a[(k + j) * m];
    for (std::int64_t i = k - 1; i >= 0; --i) {
      T s = rhs[i];
      for (std::int64_t l = i + 1; l < k; ++l) s -= a[l * m + i] * tw(l, j);
      tw(i, j) = s / a[i * m + i];
    }
  }

  std::vector<std::int32_t> sel(colid.begin(), colid.begin() + k);
  std::vector<std::int32_t> rem(colid.begin() + k, colid.end());
  out.skel = sel;
  std::sort(out.skel.begin(), out.skel.end());
  out.red = rem;
  std::sort(out.red.begin(), out.red.end());
  out.interp = Matrix<T>(k, nr);
  for (std::int64_t i = 0; i < k; ++i) {
    const auto ri = std::lower_bound(out.skel.begin(), out.skel.end(), sel[i]) - out.skel.begin();
    for (std::int64_t j = 0; j < nr; ++j) {
      const auto rj = std::lower_bound(out.red.begin(), out.red.end(), rem[j]) - out.red.begin();
      out.interp(ri, rj) = tw(i, j);
    }
  }
  return out;
}

template ColumnIdResult<double> column_id(const Matrix<double>&, double);
template ColumnIdResult<cplx> column_id(const Matrix<cplx>&, double);

template <class K>
SkeletonSet<typename K::scalar> build_skeletons(const Tree& tree, const K& kernel, double tol,
                                                const ProxyConfig& cfg) {
  using S = typename K::scalar;
  if (!(tol > 0.0 && tol < 0.5))
    throw std::invalid_argument("build_skeletons: tolerance must lie in (0, 0.5)");
  if (tree.dim != K::dim)
    throw std::invalid_argument("build_skeletons: kernel dimension does not match the tree");
  SkeletonSet<S> ss;
  ss.tol = tol;
  ss.proxy = cfg;
  ss.box.resize(tree.n_boxes());
  const int d = tree.dim;

  for (int l = tree.depth; l >= 0; --l) {
    const std::int32_t b0 = tree.level_begin[l], b1 = tree.level_begin[l + 1];
#pragma omp parallel for schedule(dynamic)
    for (std::int32_t bi = b0; bi < b1; ++bi) {
      const TreeBox& box = tree.boxes[bi];
      BoxSkeleton<S>& sk = ss.box[bi];
      if (box.leaf) {
        sk.index_vec.resize(box.npoints());
        std::iota(sk.index_vec.begin(), sk.index_vec.end(), box.begin);
      } else {
        // Children sit one level deeper and are already compressed; their
        // skeletons concatenate in child-octant order.
        std::int32_t off = 0;
        for (BoxId c : box.child) {
          if (c < 0) continue;
          BoxSkeleton<S>& ch = ss.box[c];
          ch.parent_offset = off;
          for (std::int32_t pos : ch.skel_pos) sk.index_vec.push_back(ch.index_vec[pos]);
          off += ch.k();
        }
      }
      if (l < 2) continue;  // level-1 boxes interact densely, no compression

      const std::int64_t nc = static_cast<std::int64_t>(sk.index_vec.size());
      const std::vector<double> proxy = proxy_surface(d, box.center, box.half, cfg);
      const std::int64_t np = static_cast<std::int64_t>(proxy.size()) / d;
      // Stack incoming and conjugated outgoing proxy interactions so one
      // skeleton serves both directions.  For real kernels the second block
      // would repeat the first, so it is dropped.
      constexpr bool stacked = is_complex_scalar<S>::value;
      const std::int64_t rows = stacked ? 2 * np : np;
      Matrix<S> p(rows, nc);
      for (std::int64_t j = 0; j < nc; ++j) {
        const double* xt = tree.pts[sk.index_vec[j]];
        for (std::int64_t i = 0; i < np; ++i) {
          const double* y = proxy.data() + i * d;
          double r2 = 0;
          for (int kk = 0; kk < d; ++kk) {
            const double dx = y[kk] - xt[kk];
            r2 += dx * dx;
          }
          const S v = kernel.from_r2(r2);
          p(i, j) = v;
          if constexpr (stacked) p(np + i, j) = conj_scalar(v);
        }
      }
      ColumnIdResult<S> id = column_id(p, tol);
      sk.skel_pos = std::move(id.skel);
      sk.red_pos = std::move(id.red);
      sk.interp = std::move(id.interp);
      sk.saturated = id.k == rows && nc > id.k;
    }
  }

  for (std::int64_t i = 0; i < tree.n_boxes(); ++i) {
    const BoxSkeleton<S>& sk = ss.box[i];
    ss.k_max = std::max(ss.k_max, static_cast<int>(sk.k()));
    ss.proj_scalars +=
        static_cast<std::int64_t>(sk.k()) * static_cast<std::int64_t>(sk.red_pos.size());
    ss.saturated_boxes += sk.saturated ? 1 : 0;
  }
  return ss;
}

template SkeletonSet<double> build_skeletons(const Tree&, const Laplace2d&, double,
                                             const ProxyConfig&);
template SkeletonSet<double> build_skeletons(const Tree&, const Laplace3d&, double,
                                             const ProxyConfig&);
template SkeletonSet<cplx> build_skeletons(const Tree&, const Helmholtz2d&, double,
                                           const ProxyConfig&);
template SkeletonSet<cplx> build_skeletons(const Tree&, const Helmholtz3d&, double,
                                           const ProxyConfig&);

}  // namespace sfmm
