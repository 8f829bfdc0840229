#pragma once

#include <array>
#include <optional>
#include <string>

#include "json.hpp"

namespace anticorr::bell {

/// Atoms of {0,1}^3 are indexed by x1 + 2 x2 + 4 x3.
inline constexpr std::size_t kAtoms = 8;
/// Constraint rows: normalization, three marginals, three agreements.
inline constexpr std::size_t kConstraints = 7;

/// Unordered variable pairs in agreement order: (1,2), (1,3), (2,3).
inline constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

/// Prescribed P(X_i = 1) and P(X_i = X_j) for three binary variables.
struct PairwiseSpec {
  std::array<double, 3> marginals{0.5, 0.5, 0.5};
  std::array<double, 3> agreements{0.5, 0.5, 0.5};

  /// Throws std::invalid_argument unless every entry is in [0, 1].
  void validate() const;
  /// Right-hand side of the constraint rows.
  std::array<double, kConstraints> targets() const;
};

struct JointDistribution {
  std::array<double, kAtoms> weights{};

  double marginal(int variable) const;
  double agreement(int a, int b) const;
  /// Largest deviation from `spec` over all seven constraints.
  double max_violation(const PairwiseSpec& spec) const;
};

/// Coefficient of atom `atom` in constraint row `row`.
int constraint_coefficient(std::size_t row, std::size_t atom);

/// Farkas certificate: multipliers y over the constraint rows such that the
/// atom functional c = A^T y is nonnegative on every atom while y . b < 0
/// for the spec's targets b. Any distribution meeting the spec would give
/// c . w = y . b, contradicting c . w >= 0.
struct InfeasibilityCertificate {
  std::array<double, kConstraints> multipliers{};
  std::array<double, kAtoms> atom_coefficients{};
  double spec_value = 0.0;
  /// Exact rational forms ("p/q") of the fields above.
  std::array<std::string, kConstraints> exact_multipliers;
  std::array<std::string, kAtoms> exact_atom_coefficients;
  std::string exact_spec_value;
};

struct FeasibilityResult {
  bool feasible = false;
  std::optional<JointDistribution> witness;
  std::optional<InfeasibilityCertificate> certificate;
};

/// Exact phase-one simplex over the rationals (spec doubles converted
/// exactly). Returns a witness distribution or a Farkas certificate.
FeasibilityResult check_feasibility(const PairwiseSpec& spec);

/// Re-derives A^T y and y . b in exact arithmetic from the certificate's
/// rational multipliers and checks every sign condition.
bool verify_certificate(const InfeasibilityCertificate& certificate, const PairwiseSpec& spec);

/// Tight lower bound on P(A and B): max(0, p_a + p_b - 1).
double conjunction_bound(double p_a, double p_b);

nlohmann::json to_json(const FeasibilityResult& result);

}  // namespace anticorr::bell
