#include "sfmm/apply.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sfmm/oracle.hpp"

namespace sfmm {

namespace {

// u[i] (+/-)= sum_j G(xt_i, xs_j) q[j] with the zero diagonal keyed on
// tree-order point ids.  Coincident points with distinct ids only raise the
// flag; the caller throws outside the parallel region.
template <bool kSub, class K>
void add_block(const K& kern, const double* xt, const std::int32_t* ti, std::int64_t nt,
               const double* xs, const std::int32_t* si, std::int64_t ns,
               const typename K::scalar* q, typename K::scalar* u, bool& coincident) {
  constexpr int d = K::dim;
  for (std::int64_t i = 0; i < nt; ++i) {
    const double* xi = xt + i * d;
    typename K::scalar acc{};
    for (std::int64_t j = 0; j < ns; ++j) {
      const double* xj = xs + j * d;
      double r2 = 0;
      for (int k = 0; k < d; ++k) {
        const double dx = xi[k] - xj[k];
        r2 += dx * dx;
      }
      if (r2 == 0.0) {
        if (ti[i] != si[j]) coincident = true;
        continue;
      }
      acc += kern.from_r2(r2) * q[j];
    }
    if constexpr (kSub)
      u[i] -= acc;
    else
      u[i] += acc;
  }
}

[[noreturn]] void throw_coincident(const char* pass) {
  throw DuplicatePointError(std::string(pass) + ": coincident points with distinct indices");
}

}  // namespace

template <class T>
ExpansionState<T> make_state(const SkeletonSet<T>& skel) {
  ExpansionState<T> st;
  const std::size_t n = skel.box.size();
  st.q.resize(n);
  st.qhat.resize(n);
  st.u.resize(n);
  st.uhat.resize(n);
  for (std::size_t b = 0; b < n; ++b) {
    st.q[b].assign(skel.box[b].index_vec.size(), T{});
    st.u[b].assign(skel.box[b].index_vec.size(), T{});
    st.qhat[b].assign(skel.box[b].skel_pos.size(), T{});
    st.uhat[b].assign(skel.box[b].skel_pos.size(), T{});
  }
  return st;
}

template ExpansionState<double> make_state(const SkeletonSet<double>&);
template ExpansionState<cplx> make_state(const SkeletonSet<cplx>&);

template <class K>
ApplyPlan<K> make_plan(const K& kernel, const Tree& tree, const NeighborLists& nb,
                       const SkeletonSet<typename K::scalar>& skel) {
  if (tree.dim != K::dim) throw std::invalid_argument("make_plan: kernel dimension mismatch");
  if (skel.box.size() != tree.boxes.size())
    throw std::invalid_argument("make_plan: skeleton set does not match the tree");
  ApplyPlan<K> plan;
  plan.kernel = kernel;
  plan.tree = &tree;
  plan.nb = &nb;
  plan.skel = &skel;
  const std::int64_t nboxes = tree.n_boxes();
  plan.x.resize(nboxes);
  plan.xs.resize(nboxes);
  plan.sid.resize(nboxes);
  const int d = tree.dim;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < nboxes; ++b) {
    const auto& sk = skel.box[b];
    auto& xb = plan.x[b];
    xb.resize(sk.index_vec.size() * d);
    for (std::size_t i = 0; i < sk.index_vec.size(); ++i) {
      const double* p = tree.pts[sk.index_vec[i]];
      std::copy(p, p + d, xb.data() + i * d);
    }
    auto& xsb = plan.xs[b];
    auto& sidb = plan.sid[b];
    xsb.resize(sk.skel_pos.size() * d);
    sidb.resize(sk.skel_pos.size());
    for (std::size_t i = 0; i < sk.skel_pos.size(); ++i) {
      const std::int32_t idx = sk.index_vec[sk.skel_pos[i]];
      sidb[i] = idx;
      const double* p = tree.pts[idx];
      std::copy(p, p + d, xsb.data() + i * d);
    }
  }
  return plan;
}

template <class K>
void upward_pass(const ApplyPlan<K>& plan, const std::vector<typename K::scalar>& q,
                 ExpansionState<typename K::scalar>& st) {
  using S = typename K::scalar;
  const Tree& tree = *plan.tree;
  const SkeletonSet<S>& ss = *plan.skel;
  if (static_cast<std::int64_t>(q.size()) != tree.pts.size())
    throw std::invalid_argument("upward_pass: charge count does not match the point count");
  for (int l = tree.depth; l >= 0; --l) {
    const BoxId b0 = tree.level_begin[l], b1 = tree.level_begin[l + 1];
#pragma omp parallel for schedule(dynamic)
    for (BoxId b = b0; b < b1; ++b) {
      const TreeBox& bx = tree.boxes[b];
      const BoxSkeleton<S>& sk = ss.box[b];
      auto& qb = st.q[b];
      if (bx.leaf) {
        for (std::int32_t i = 0; i < bx.npoints(); ++i) qb[i] = q[tree.perm[bx.begin + i]];
      } else {
        for (BoxId c : bx.child) {
          if (c < 0) continue;
          const auto& qc = st.qhat[c];
          std::copy(qc.begin(), qc.end(), qb.begin() + ss.box[c].parent_offset);
        }
      }
      if (l < 2) continue;
      auto& qh = st.qhat[b];
      const std::int64_t k = sk.k();
      const std::int64_t r = static_cast<std::int64_t>(sk.red_pos.size());
      for (std::int64_t i = 0; i < k; ++i) qh[i] = qb[sk.skel_pos[i]];
      for (std::int64_t i = 0; i < k; ++i) {
        S acc{};
        const S* ti = sk.interp.row(i);
        for (std::int64_t j = 0; j < r; ++j) acc += ti[j] * qb[sk.red_pos[j]];
        qh[i] += acc;
      }
    }
  }
}

template <class K>
void translate_ifo(const ApplyPlan<K>& plan, ExpansionState<typename K::scalar>& st,
                   ApplyStats* stats) {
  using S = typename K::scalar;
  const Tree& tree = *plan.tree;
  const SkeletonSet<S>& ss = *plan.skel;
  std::int64_t pairs = 0;
  bool coincident = false;
  for (int l = 2; l <= tree.depth; ++l) {
    const BoxId b0 = tree.level_begin[l], b1 = tree.level_begin[l + 1];
#pragma omp parallel for schedule(dynamic) reduction(+ : pairs) reduction(|| : coincident)
    for (BoxId b = b0; b < b1; ++b) {
      const BoxSkeleton<S>& skb = ss.box[b];
      const std::int64_t n_b = static_cast<std::int64_t>(skb.index_vec.size());
      for (BoxId c : plan.nb->colleagues[b]) {
        const BoxSkeleton<S>& skc = ss.box[c];
        ++pairs;
        add_block<false>(plan.kernel, plan.x[b].data(), skb.index_vec.data(), n_b,
                         plan.x[c].data(), skc.index_vec.data(),
                         static_cast<std::int64_t>(skc.index_vec.size()), st.q[c].data(),
                         st.u[b].data(), coincident);
        add_block<true>(plan.kernel, plan.xs[b].data(), plan.sid[b].data(), skb.k(),
                        plan.xs[c].data(), plan.sid[c].data(), skc.k(), st.qhat[c].data(),
                        st.uhat[b].data(), coincident);
      }
    }
  }
  if (coincident) throw_coincident("translate_ifo");
  if (stats) stats->n_ifo_pairs += pairs;
}

template <class K>
void translate_ifs(const ApplyPlan<K>& plan, ExpansionState<typename K::scalar>& st,
                   ApplyStats* stats) {
  using S = typename K::scalar;
  const Tree& tree = *plan.tree;
  const SkeletonSet<S>& ss = *plan.skel;
  std::int64_t pairs = 0;
  bool coincident = false;
  for (int l = 2; l <= tree.depth; ++l) {
    const BoxId b0 = tree.level_begin[l], b1 = tree.level_begin[l + 1];
#pragma omp parallel for schedule(dynamic) reduction(+ : pairs) reduction(|| : coincident)
    for (BoxId b = b0; b < b1; ++b) {
      const BoxSkeleton<S>& skb = ss.box[b];
      const std::int64_t n_b = static_cast<std::int64_t>(skb.index_vec.size());
      for (BoxId c : plan.nb->coarse[b]) {
        const BoxSkeleton<S>& skc = ss.box[c];
        const std::int64_t n_c = static_cast<std::int64_t>(skc.index_vec.size());
        ++pairs;
        add_block<false>(plan.kernel, plan.x[b].data(), skb.index_vec.data(), n_b,
                         plan.x[c].data(), skc.index_vec.data(), n_c, st.q[c].data(),
                         st.u[b].data(), coincident);
        add_block<true>(plan.kernel, plan.xs[b].data(), plan.sid[b].data(), skb.k(),
                        plan.x[c].data(), skc.index_vec.data(), n_c, st.q[c].data(),
                        st.uhat[b].data(), coincident);
      }
    }
  }
  if (coincident) throw_coincident("translate_ifs");
  if (stats) stats->n_ifs_pairs += pairs;
}

template <class K>
void translate_tfo(const ApplyPlan<K>& plan, ExpansionState<typename K::scalar>& st,
                   ApplyStats* stats) {
  using S = typename K::scalar;
  const Tree& tree = *plan.tree;
  const SkeletonSet<S>& ss = *plan.skel;
  const std::int64_t nboxes = tree.n_boxes();
  std::int64_t pairs = 0;
  bool coincident = false;
#pragma omp parallel for schedule(dynamic) reduction(+ : pairs) reduction(|| : coincident)
  for (std::int64_t b = 0; b < nboxes; ++b) {
    const TreeBox& bx = tree.boxes[b];
    if (!bx.leaf || bx.level < 1) continue;
    const BoxSkeleton<S>& skb = ss.box[b];
    const std::int64_t n_b = static_cast<std::int64_t>(skb.index_vec.size());
    for (BoxId c : plan.nb->fine[b]) {
      const BoxSkeleton<S>& skc = ss.box[c];
      ++pairs;
      add_block<false>(plan.kernel, plan.x[b].data(), skb.index_vec.data(), n_b,
                       plan.x[c].data(), skc.index_vec.data(),
                       static_cast<std::int64_t>(skc.index_vec.size()), st.q[c].data(),
                       st.u[b].data(), coincident);
      add_block<true>(plan.kernel, plan.x[b].data(), skb.index_vec.data(), n_b,
                      plan.xs[c].data(), plan.sid[c].data(), skc.k(), st.qhat[c].data(),
                      st.u[b].data(), coincident);
    }
  }
  if (coincident) throw_coincident("translate_tfo");
  if (stats) stats->n_tfo_pairs += pairs;
}

template <class K>
void level1_dense(const ApplyPlan<K>& plan, ExpansionState<typename K::scalar>& st,
                  ApplyStats* stats) {
  using S = typename K::scalar;
  const Tree& tree = *plan.tree;
  const SkeletonSet<S>& ss = *plan.skel;
  const int lev = tree.depth >= 1 ? 1 : 0;
  const BoxId b0 = tree.level_begin[lev], b1 = tree.level_begin[lev + 1];
  std::int64_t pairs = 0;
  bool coincident = false;
#pragma omp parallel for schedule(dynamic) reduction(+ : pairs) reduction(|| : coincident)
  for (BoxId b = b0; b < b1; ++b) {
    const BoxSkeleton<S>& skb = ss.box[b];
    const std::int64_t n_b = static_cast<std::int64_t>(skb.index_vec.size());
    for (BoxId c = b0; c < b1; ++c) {
      const BoxSkeleton<S>& skc = ss.box[c];
      ++pairs;
      add_block<false>(plan.kernel, plan.x[b].data(), skb.index_vec.data(), n_b,
                       plan.x[c].data(), skc.index_vec.data(),
                       static_cast<std::int64_t>(skc.index_vec.size()), st.q[c].data(),
                       st.u[b].data(), coincident);
    }
  }
  if (coincident) throw_coincident("level1_dense");
  if (stats) stats->n_level1_pairs += pairs;
}

template <class K>
std::vector<typename K::scalar> downward_pass(const ApplyPlan<K>& plan,
                                              ExpansionState<typename K::scalar>& st) {
  using S = typename K::scalar;
  const Tree& tree = *plan.tree;
  const SkeletonSet<S>& ss = *plan.skel;
  for (int l = 2; l <= tree.depth; ++l) {
    const BoxId b0 = tree.level_begin[l], b1 = tree.level_begin[l + 1];
#pragma omp parallel for schedule(dynamic)
    for (BoxId b = b0; b < b1; ++b) {
      const TreeBox& bx = tree.boxes[b];
      const BoxSkeleton<S>& sk = ss.box[b];
      const std::int64_t k = sk.k();
      const std::int64_t r = static_cast<std::int64_t>(sk.red_pos.size());
      auto& uh = st.uhat[b];
      const auto& up = st.u[bx.parent];
      for (std::int64_t i = 0; i < k; ++i) uh[i] += up[sk.parent_offset + i];
      auto& ub = st.u[b];
      for (std::int64_t i = 0; i < k; ++i) ub[sk.skel_pos[i]] += uh[i];
      for (std::int64_t i = 0; i < k; ++i) {
        const S* ti = sk.interp.row(i);
        const S uhi = uh[i];
        for (std::int64_t j = 0; j < r; ++j) ub[sk.red_pos[j]] += conj_scalar(ti[j]) * uhi;
      }
    }
  }
  std::vector<S> u(tree.pts.size());
  const std::int64_t nboxes = tree.n_boxes();
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < nboxes; ++b) {
    const TreeBox& bx = tree.boxes[b];
    if (!bx.leaf) continue;
    const auto& ub = st.u[b];
    for (std::int32_t i = 0; i < bx.npoints(); ++i) u[tree.perm[bx.begin + i]] = ub[i];
  }
  return u;
}

template <class K>
std::vector<typename K::scalar> fmm_apply(const ApplyPlan<K>& plan,
                                          const std::vector<typename K::scalar>& q,
                                          ApplyStats* stats) {
  using S = typename K::scalar;
  const Tree& tree = *plan.tree;
  const std::int64_t n = tree.pts.size();
  if (static_cast<std::int64_t>(q.size()) != n)
    throw std::invalid_argument("fmm_apply: charge count does not match the point count");
  if (stats) *stats = ApplyStats{};
  if (tree.depth < 2) {
    // Every box pair is adjacent, so nothing can be compressed; reproduce
    // the reference sum exactly on the original point order.
    PointSet orig;
    orig.dim = tree.dim;
    orig.coords.resize(static_cast<std::size_t>(n) * tree.dim);
    for (std::int64_t t = 0; t < n; ++t) {
      const double* p = tree.pts[t];
      std::copy(p, p + tree.dim, orig[tree.perm[t]]);
    }
    if (stats) stats->direct_fallback = true;
    return direct_sum(plan.kernel, orig, q);
  }

  ExpansionState<S> st = make_state(*plan.skel);
  upward_pass(plan, q, st);
  translate_ifo(plan, st, stats);
  translate_ifs(plan, st, stats);
  translate_tfo(plan, st, stats);
  level1_dense(plan, st, stats);
  return downward_pass(plan, st);
}

#define SFMM_INSTANTIATE_APPLY(K, S)                                                          \
  template ApplyPlan<K> make_plan(const K&, const Tree&, const NeighborLists&,                \
                                  const SkeletonSet<S>&);                                     \
  template void upward_pass(const ApplyPlan<K>&, const std::vector<S>&, ExpansionState<S>&); \
  template void translate_ifo(const ApplyPlan<K>&, ExpansionState<S>&, ApplyStats*);         \
  template void translate_ifs(const ApplyPlan<K>&, ExpansionState<S>&, ApplyStats*);         \
  template void translate_tfo(const ApplyPlan<K>&, ExpansionState<S>&, ApplyStats*);         \
  template void level1_dense(const ApplyPlan<K>&, ExpansionState<S>&, ApplyStats*);          \
  template std::vector<S> downward_pass(const ApplyPlan<K>&, ExpansionState<S>&);            \
  template std::vector<S> fmm_apply(const ApplyPlan<K>&, const std::vector<S>&, ApplyStats*);

SFMM_INSTANTIATE_APPLY(Laplace2d, double)
SFMM_INSTANTIATE_APPLY(Laplace3d, double)
SFMM_INSTANTIATE_APPLY(Helmholtz2d, cplx)
SFMM_INSTANTIATE_APPLY(Helmholtz3d, cplx)

#undef SFMM_INSTANTIATE_APPLY

}  // namespace sfmm
