#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "spectralforge/core_spectra.hpp"

namespace spectralforge {

using Swap = std::pair<int, int>;

struct BirkhoffTerm {
  double weight;
  Permutation perm;
};

struct BirkhoffDecomposition {
  std::vector<BirkhoffTerm> terms;

  std::size_t dimension() const { return terms.empty() ? 0 : terms.front().perm.size(); }
  double total_weight() const;
  /// Sum_i weight_i * W(perm_i).
  RealMatrix reconstruct() const;
};

constexpr std::size_t max_birkhoff_terms(std::size_t n) { return n * n - 2 * n + 2; }
constexpr std::size_t max_schedule_switches(std::size_t n) { return n * n * n - 3 * n * n + 4 * n - 2; }

/// Greedy Birkhoff decomposition. Each step takes the lexicographically
/// first perfect matching on the support (entries > 1e-12) found by Kuhn's
/// augmenting paths, and subtracts its bottleneck weight.
BirkhoffDecomposition birkhoff_decompose(const BistochasticMatrix& r);

/// Selection-sort decomposition into at most n-1 swaps. Applying the swaps in
/// order to the array (0, 1, ..., n-1) yields p's mapping.
std::vector<Swap> permutation_to_transpositions(const Permutation& p);
Permutation compose_transpositions(std::size_t n, const std::vector<Swap>& swaps);

/// One segment per term, fraction = weight, heaviest first (stable on ties).
SwitchingSchedule build_schedule(const BirkhoffDecomposition& d, double total_time);

/// Two-level switching operations needed to realize every segment's permutation.
std::size_t switch_count(const SwitchingSchedule& schedule);

/// R = r_0 I + sum_c r_c P_c with P_c the product of the first c swaps.
struct MinimalDesign {
  std::vector<double> weights;
  std::vector<Swap> chain;
  std::vector<Permutation> perms;
  Spectrum effective;
  double achieved_range;

  BistochasticMatrix implied_weights() const;
  /// Highest chain position carrying weight; 0 when only the identity is used.
  std::size_t active_swaps() const;
};

/// Solves the per-chain LP: maximize the effective range over weights in
/// [0,1] summing to 1, subject to the target-ratio rows. nullopt when the
/// chain cannot realize the target with a positive range.
std::optional<MinimalDesign> solve_chain(const Spectrum& s, const TargetVector& t,
                                         const std::vector<Swap>& chain);

/// Best of `tries` random chains of k distinct swaps. Throws NoFeasibleChain.
MinimalDesign minimal_switch_design(const Spectrum& s, const TargetVector& t, int k, int tries,
                                    std::uint64_t seed);

/// Every chain of k distinct swaps; limited to n <= 4.
MinimalDesign minimal_switch_design_exhaustive(const Spectrum& s, const TargetVector& t, int k);

}  // namespace spectralforge
