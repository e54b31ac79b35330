#pragma once

#include <cstdint>
#include <vector>

#include "sfmm/kernel.hpp"
#include "sfmm/skeleton.hpp"
#include "sfmm/tree.hpp"

namespace sfmm {

struct ApplyStats {
  std::int64_t n_ifo_pairs = 0;     // colleague pairs at level 2 and deeper
  std::int64_t n_ifs_pairs = 0;     // (box, coarse leaf) pairs
  std::int64_t n_tfo_pairs = 0;     // (leaf, fine box) pairs
  std::int64_t n_level1_pairs = 0;  // ordered pairs across level 1
  bool direct_fallback = false;     // tree shallower than two levels
};

// Charge and potential slots per box: q and u run over the index_vec
// entries, qhat and uhat over the skeleton.
template <class T>
struct ExpansionState {
  std::vector<std::vector<T>> q, qhat, u, uhat;
};

template <class T>
ExpansionState<T> make_state(const SkeletonSet<T>& skel);

// Per-box geometry gathered up front so the translation loops stream flat
// arrays.  tree, nb and skel must outlive the plan.
template <class K>
struct ApplyPlan {
  using scalar = typename K::scalar;
  K kernel;
  const Tree* tree = nullptr;
  const NeighborLists* nb = nullptr;
  const SkeletonSet<scalar>* skel = nullptr;
  std::vector<std::vector<double>> x;          // index_vec coordinates
  std::vector<std::vector<double>> xs;         // skeleton coordinates
  std::vector<std::vector<std::int32_t>> sid;  // skeleton tree-order point ids
};

template <class K>
ApplyPlan<K> make_plan(const K& kernel, const Tree& tree, const NeighborLists& nb,
                       const SkeletonSet<typename K::scalar>& skel);

// Upward sweep over a freshly zeroed state: leaves gather the charges
// (given in original point order), internal boxes concatenate their
// children's skeleton charges, and boxes at level 2 and deeper compress
// qhat = q_S + T q_R.
template <class K>
void upward_pass(const ApplyPlan<K>& plan, const std::vector<typename K::scalar>& q,
                 ExpansionState<typename K::scalar>& st);

// Same-level colleague exchange at level 2 and deeper: dense interaction on
// the index_vec points, minus the skeleton copy the parent level delivers
// again.
template <class K>
void translate_ifo(const ApplyPlan<K>& plan, ExpansionState<typename K::scalar>& st,
                   ApplyStats* stats = nullptr);

// Coarse leaves adjacent to the parent: dense add of their charges onto the
// box points, skeleton retraction of the duplicate arriving via the parent.
template <class K>
void translate_ifs(const ApplyPlan<K>& plan, ExpansionState<typename K::scalar>& st,
                   ApplyStats* stats = nullptr);

// Children of a leaf's colleagues: dense add of their charges minus their
// compressed contribution already delivered at the leaf's own level.
template <class K>
void translate_tfo(const ApplyPlan<K>& plan, ExpansionState<typename K::scalar>& st,
                   ApplyStats* stats = nullptr);

// Uncompressed interaction over all ordered pairs at the coarsest partitioned
// level (level 1, or the root alone when the tree never splits).
template <class K>
void level1_dense(const ApplyPlan<K>& plan, ExpansionState<typename K::scalar>& st,
                  ApplyStats* stats = nullptr);

// Downward sweep for level 2 and deeper: pull the parent slice into uhat,
// then spread uhat onto the box points through the interpolation operator.
// Returns the leaf potentials scattered back to the original point order.
template <class K>
std::vector<typename K::scalar> downward_pass(const ApplyPlan<K>& plan,
                                              ExpansionState<typename K::scalar>& st);

// u = A q with charges and potentials in original point order.  Falls back
// to the dense direct sum when the tree has fewer than two levels.  The
// result is independent of the OpenMP thread count, bit for bit.
template <class K>
std::vector<typename K::scalar> fmm_apply(const ApplyPlan<K>& plan,
                                          const std::vector<typename K::scalar>& q,
                                          ApplyStats* stats = nullptr);

}  // namespace sfmm
