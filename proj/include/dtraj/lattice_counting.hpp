#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dtraj/core_model.hpp"
#include "dtraj/numeric.hpp"
#include "dtraj/path_count.hpp"

namespace dtraj {

// Set of per-step displacement vectors on the n-dimensional grid, every
// component in {-1, 0, +1}. Moves are kept in lexicographic order.
class MoveSet {
 public:
  MoveSet(std::size_t dimension, std::vector<std::vector<int>> moves);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return moves_.size(); }
  const std::vector<std::vector<int>>& moves() const noexcept { return moves_; }

  bool contains(std::span<const int> move) const;
  bool contains_zero() const;
  // All 3^n diagonal moves present.
  bool is_full() const;
  // Closed under flipping the sign of any single axis; the corridor closed
  // forms (method of images) require this.
  bool is_reflection_symmetric() const;

 private:
  std::size_t dimension_;
  std::vector<std::vector<int>> moves_;
};

inline constexpr std::size_t kMaxMoveSetDimension = 12;

// {-1,0,1}^n in lexicographic order.
MoveSet full_move_set(std::size_t n);
// The zero move plus +/- one unit along each axis.
MoveSet axis_move_set(std::size_t n);
// Moves with every component >= 0.
MoveSet nonnegative_subset(const MoveSet& ms);

// Walls at 0 and d_j along axis j; interior positions 1..d_j-1.
struct CorridorSpec {
  std::vector<int> d;
  MoveSet move_set;

  void validate() const;
  std::size_t dimension() const noexcept { return d.size(); }
};

// Closed form for the 3-way corridor:
//   (2/d) sum_{w=1}^{d-1} sin(pi w b/d) (1 + 2 cos(pi w/d))^m sin(pi w a/d)
// evaluated in HighReal with compensated summation. Throws DomainError when
// a or b is not interior.
ClosedFormValue corridor_sum_1d(int d, int a, int b, unsigned m);
PathCount corridor_count_1d(int d, int a, int b, unsigned m);

inline constexpr std::size_t kMaxDpCells = 10'000'000;

// Exact count by m applications of the move-set stencil with absorbing
// walls. Throws ResourceLimit beyond max_cells interior cells.
PathCount corridor_count_dp(const CorridorSpec& spec, std::span<const int> a,
                            std::span<const int> b, unsigned m,
                            std::size_t max_cells = kMaxDpCells);

// sum over mu in M+ of prod_j (2 cos(pi omega_j / d_j))^{mu_j}
double t_hat(std::span<const int> omega, std::span<const int> d, const MoveSet& ms);
HighReal t_hat_high(std::span<const int> omega, std::span<const int> d, const MoveSet& ms);

enum class NdMethod {
  kAuto,        // factorized when the move set is full, direct otherwise
  kDirect,      // the frequency sum over every omega vector
  kFactorized,  // product of 1-D closed forms (full move set only)
};

enum class Precision {
  kHigh,    // HighReal; results carry a rigorous-enough error bound
  kDouble,  // IEEE double; diagnostic only, cancellation is not bounded
};

// Structurally nonzero terms of the direct sum, i.e. omega vectors without a
// component where sin(pi omega_j a_j / d_j) vanishes identically.
inline constexpr std::size_t kMaxDirectTerms = 20'000'000;

struct NdOptions {
  NdMethod method = NdMethod::kAuto;
  Precision precision = Precision::kHigh;
  std::size_t max_terms = kMaxDirectTerms;
  double agreement_tolerance = 1e-6;
  // The direct sum is split over the first axis; the reduction order is
  // fixed so the result does not depend on this.
  unsigned workers = 1;
};

// Direct n-dimensional corridor sum with omega_j running over -d_j+1..d_j,
// phase sum_j pi omega_j b_j / d_j, cosine of the phase for even n and sine
// for odd n. Requires a reflection-symmetric move set (DomainError).
ClosedFormValue corridor_sum_nd_direct(const CorridorSpec& spec, std::span<const int> a,
                                       std::span<const int> b, unsigned m,
                                       const NdOptions& options = {});

// Product of per-axis corridor_count_1d values; full move set only.
PathCount corridor_count_factorized(const CorridorSpec& spec, std::span<const int> a,
                                    std::span<const int> b, unsigned m,
                                    Precision precision = Precision::kHigh);

// With NdMethod::kDirect and a full move set the factorized product is
// computed too and a relative disagreement above options.agreement_tolerance
// raises NumericalOverflow (skipped for Precision::kDouble). Double precision
// results are rounded only when their error estimate allows it and are
// otherwise reported as they came out, noise included.
PathCount corridor_count_nd(const CorridorSpec& spec, std::span<const int> a,
                            std::span<const int> b, unsigned m, const NdOptions& options = {});

// Angle-to-corridor index mapping for one joint. d = (q_max - q_min)/dq + 1;
// the index is centre-anchored so that q = 0 is interior.
struct CorridorMapping {
  int d = 0;
  int offset = 0;
  double delta_q = 0.0;
  std::string convention;

  // Throws DomainError when the angle lands on or outside a wall.
  int index(double angle) const;
};

CorridorMapping joint_to_corridor(const JointSpec& joint);

// log10( |A|^m / (2m+1)^n ) with |A| the product of the per-axis counts.
double approx_count_log10(std::span<const std::size_t> per_axis_counts, unsigned m, std::size_t n);

struct ScalingRow {
  std::string series;  // dof count, "go" or "atoms"
  std::string m;       // step count, "*" for constant rows
  std::optional<double> log10_count;
  std::string method;  // closed_form, approx, forced, unreachable, reference
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  std::string convention;
};

// Path counts between two configurations `separation` apart along every
// axis, for each dof count in n_values and each m in [m_min, m_max]:
// n <= 3 from the factorized closed form, n >= 4 from the |A|^m/(2m+1)^n
// estimate with three moves per axis. Rows below the minimum step count are
// unreachable; the estimate is replaced by the single forced path at exactly
// the minimum. Go (361^m) and atoms (1e80) reference rows follow.
ScalingTable scaling_table(const JointSpec& joint, std::span<const unsigned> n_values,
                           unsigned m_min, unsigned m_max, double separation);

std::string scaling_csv(const ScalingTable& table);

}  // namespace dtraj
