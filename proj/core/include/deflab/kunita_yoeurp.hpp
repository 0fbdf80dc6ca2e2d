#pragma once

#include <deflab/deflator.hpp>
#include <deflab/filtered_space.hpp>

#include <optional>
#include <string>
#include <vector>

namespace deflab {

/// Death index zeta in {1..n} or infinity; encoded as 1..n and kNever.
inline constexpr int kNever = 0;

/// Points (leaf, zeta) of the enlarged space. Slot z in 0..n-1 holds zeta =
/// z + 1; slot n holds zeta = infinity.
struct EnlargedSpace {
  const EventTree* base = nullptr;

  int horizon() const { return base->horizon(); }
  std::size_t slots() const { return static_cast<std::size_t>(horizon()) + 1; }
  std::size_t slot(int zeta) const;
  int zeta(std::size_t slot) const;
};

/// The dominating measure on the enlarged space built from a deflator with
/// E[Z_0] = 1: Q(w, k) = P(w) dA_k(w) and Q(w, inf) = P(w) Z_n(w).
struct DominatingMeasure {
  EnlargedSpace space;
  ProbMeasure P;
  AdaptedProcess Z;
  DoobDecomposition doob;
  std::vector<RationalVector> q;  // q[leaf index][slot]

  const EventTree& tree() const { return *space.base; }
  const Rational& mass(std::size_t leaf_index, int zeta) const;
  Rational total_mass() const;

  /// Q(atom v x {zeta > k}) with k = time(v).
  Rational survival_mass(NodeId v) const;
  /// Q(atom v x {zeta = j}) for j <= time(v).
  Rational death_mass(NodeId v, int j) const;

  /// dPbar/dQ on the survival atom v x {zeta > time(v)}; empty when Q-null.
  std::optional<Rational> gamma_survival(NodeId v) const;
  /// dPbar/dQ on the dead atom v x {zeta = j}; empty when Q-null.
  std::optional<Rational> gamma_dead(NodeId v, int j) const;
};

/// Requires a strictly positive P, E[Z_0] = 1 and Z a nonnegative
/// supermartingale; throws PreconditionError otherwise.
DominatingMeasure build_dominating_measure(const EventTree& tree, const ProbMeasure& P, const AdaptedProcess& Z);

struct KyFailure {
  std::string property;  // "mass", "1", "2", "3", "3-stopping"
  NodeId node = 0;
  int time = 0;
  std::string detail;
};

struct KyReport {
  bool mass_ok = false;        // sum Q = 1
  bool property1 = false;      // Pbar(T = inf) = 1
  bool property2 = false;      // {zeta <= t} is Pbar-null and carries Q(. , T <= t)
  bool property3 = false;      // Q(A x {zeta > t}) = E_P[1_A Z_t]
  bool stopping_ok = false;    // Q(A, T > tau) = E_P[1_{A, tau < inf} Z_tau]
  bool no_death = false;       // dA == 0: Z is a P-martingale and Q(T < inf) = 0
  std::size_t stopping_times_checked = 0;
  std::vector<KyFailure> failures;

  bool ok() const { return mass_ok && property1 && property2 && property3 && stopping_ok; }
};

KyReport verify_ky(const DominatingMeasure& dm, const std::vector<StoppingTime>& stopping_times = {});

struct DominationReport {
  bool dominated = false;  // every Q-null atom of the terminal enlarged filtration is Pbar-null
  std::size_t atoms_checked = 0;
  std::vector<std::pair<NodeId, int>> offending;  // (leaf, zeta)
};

DominationReport check_domination(const DominatingMeasure& dm);

struct YoeurpResult {
  Rational q_side;
  Rational p_side;
};

/// Predictable form: predictable Y (one value per decision node) plus an optional
/// terminal value on survival (one per leaf, default Y_n). Q side is
/// E_Q[Y_T]; P side is E_P[Y_inf Z_n + sum_k Y_k dA_k]. Throws Error when
/// the two sides differ.
YoeurpResult yoeurp_expectation(const DominatingMeasure& dm, const Strategy& Y,
                                const std::optional<RationalVector>& survival = std::nullopt);

/// Left-limit form: adapted Y, Q side E_Q[Y^{T-}_n] with Y_{zeta-1} at death,
/// P side E_P[Y_n Z_n + sum_k Y_{k-1} dA_k].
YoeurpResult yoeurp_expectation_left(const DominatingMeasure& dm, const AdaptedProcess& Y);

struct DriftAtom {
  NodeId node = 0;  // survival atom node x {zeta > time(node)}
  int time = 0;
  RationalVector drift;  // E_Q[S^{T-}_{k+1} - S^{T-}_k | atom]
};

struct StoppedPriceReport {
  bool martingale = false;
  std::size_t atoms_checked = 0;
  std::vector<DriftAtom> violations;
  bool converse_deflator = false;  // 1{k < T} / gamma_k is a P-supermartingale density
  DeflationReport converse;
};

StoppedPriceReport check_stopped_price(const DominatingMeasure& dm, const AdaptedProcess& S);

}  // namespace deflab
