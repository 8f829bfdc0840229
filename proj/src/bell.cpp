#include "anticorr/bell.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace anticorr::bell {
namespace {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

int bit(std::size_t atom, int variable) { return static_cast<int>((atom >> variable) & 1U); }

Rational to_rational(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite value");
  if (x == 0.0) return Rational(0);
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  // 53 significant bits: mantissa * 2^53 is an exact integer.
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r{Integer(scaled)};
  if (exponent > 0) {
    r *= Rational(Integer(1) << exponent);
  } else if (exponent < 0) {
    r /= Rational(Integer(1) << -exponent);
  }
  return r;
}

std::string to_exact_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  return den == 1 ? num.str() : num.str() + "/" + den.str();
}

std::array<Rational, kConstraints> exact_targets(const PairwiseSpec& spec) {
  std::array<Rational, kConstraints> b;
  const auto t = spec.targets();
  for (std::size_t i = 0; i < kConstraints; ++i) b[i] = to_rational(t[i]);
  return b;
}

// Dense phase-one tableau: minimise the sum of artificials subject to
// A w + s = b, w, s >= 0. Bland's rule keeps it finite.
class PhaseOne {
 public:
  explicit PhaseOne(const std::array<Rational, kConstraints>& b) {
    for (std::size_t i = 0; i < kConstraints; ++i) {
      sign_[i] = b[i] < 0 ? -1 : 1;
      auto& row = rows_[i];
      row.assign(kColumns + 1, Rational(0));
      for (std::size_t j = 0; j < kAtoms; ++j) row[j] = sign_[i] * constraint_coefficient(i, j);
      row[kAtoms + i] = 1;
      row[kColumns] = sign_[i] * b[i];
      basis_[i] = kAtoms + i;
    }
    cost_.assign(kColumns + 1, Rational(0));
    for (std::size_t j = kAtoms; j < kColumns; ++j) cost_[j] = 1;
    for (std::size_t i = 0; i < kConstraints; ++i) {
      for (std::size_t j = 0; j <= kColumns; ++j) cost_[j] -= rows_[i][j];
    }
  }

  void solve() {
    for (;;) {
      std::size_t entering = kColumns;
      for (std::size_t j = 0; j < kColumns; ++j) {
        if (cost_[j] < 0) {
          entering = j;
          break;
        }
      }
      if (entering == kColumns) return;

      std::size_t leaving = kConstraints;
      Rational best;
      for (std::size_t i = 0; i < kConstraints; ++i) {
        if (rows_[i][entering] > 0) {
          Rational ratio = rows_[i][kColumns] / rows_[i][entering];
          if (leaving == kConstraints || ratio < best ||
              (ratio == best && basis_[i] < basis_[leaving])) {
            leaving = i;
            best = ratio;
          }
        }
      }
      // Phase one is bounded below by zero, so an entering column always
      // has a positive entry somewhere.
      pivot(leaving, entering);
    }
  }

  Rational objective() const { return -cost_[kColumns]; }

  std::array<Rational, kAtoms> atoms() const {
    std::array<Rational, kAtoms> w;
    for (auto& x : w) x = 0;
    for (std::size_t i = 0; i < kConstraints; ++i) {
      if (basis_[i] < kAtoms) w[basis_[i]] = rows_[i][kColumns];
    }
    return w;
  }

  /// Farkas multipliers for the original (unflipped) rows.
  std::array<Rational, kConstraints> certificate_multipliers() const {
    std::array<Rational, kConstraints> y;
    for (std::size_t i = 0; i < kConstraints; ++i) {
      const Rational dual = Rational(1) - cost_[kAtoms + i];
      y[i] = -dual * sign_[i];
    }
    return y;
  }

 private:
  static constexpr std::size_t kColumns = kAtoms + kConstraints;

  void pivot(std::size_t r, std::size_t c) {
    const Rational p = rows_[r][c];
    for (auto& v : rows_[r]) v /= p;
    for (std::size_t i = 0; i < kConstraints; ++i) {
      if (i == r || rows_[i][c] == 0) continue;
      const Rational f = rows_[i][c];
      for (std::size_t j = 0; j <= kColumns; ++j) rows_[i][j] -= f * rows_[r][j];
    }
    if (cost_[c] != 0) {
      const Rational f = cost_[c];
      for (std::size_t j = 0; j <= kColumns; ++j) cost_[j] -= f * rows_[r][j];
    }
    basis_[r] = c;
  }

  std::array<std::vector<Rational>, kConstraints> rows_;
  std::vector<Rational> cost_;
  std::array<std::size_t, kConstraints> basis_{};
  std::array<int, kConstraints> sign_{};
};

}  // namespace

void PairwiseSpec::validate() const {
  for (double m : marginals) {
    if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("marginals must lie in [0, 1]");
  }
  for (double a : agreements) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("agreements must lie in [0, 1]");
  }
}

std::array<double, kConstraints> PairwiseSpec::targets() const {
  return {1.0,           marginals[0],  marginals[1], marginals[2],
          agreements[0], agreements[1], agreements[2]};
}

int constraint_coefficient(std::size_t row, std::size_t atom) {
  if (row == 0) return 1;
  if (row <= 3) return bit(atom, static_cast<int>(row - 1));
  const auto& pair = kPairs[row - 4];
  return bit(atom, pair[0]) == bit(atom, pair[1]) ? 1 : 0;
}

double JointDistribution::marginal(int variable) const {
  double p = 0.0;
  for (std::size_t a = 0; a < kAtoms; ++a) {
    if (bit(a, variable)) p += weights[a];
  }
  return p;
}

double JointDistribution::agreement(int x, int y) const {
  double p = 0.0;
  for (std::size_t a = 0; a < kAtoms; ++a) {
    if (bit(a, x) == bit(a, y)) p += weights[a];
  }
  return p;
}

double JointDistribution::max_violation(const PairwiseSpec& spec) const {
  const auto b = spec.targets();
  double worst = 0.0;
  for (std::size_t row = 0; row < kConstraints; ++row) {
    double lhs = 0.0;
    for (std::size_t a = 0; a < kAtoms; ++a) lhs += constraint_coefficient(row, a) * weights[a];
    worst = std::max(worst, std::abs(lhs - b[row]));
  }
  for (double w : weights) worst = std::max(worst, -w);
  return worst;
}

FeasibilityResult check_feasibility(const PairwiseSpec& spec) {
  spec.validate();
  const auto b = exact_targets(spec);
  PhaseOne lp(b);
  lp.solve();

  FeasibilityResult result;
  if (lp.objective() == 0) {
    result.feasible = true;
    JointDistribution witness;
    const auto atoms = lp.atoms();
    for (std::size_t a = 0; a < kAtoms; ++a) witness.weights[a] = atoms[a].convert_to<double>();
    result.witness = witness;
    return result;
  }

  InfeasibilityCertificate cert;
  const auto y = lp.certificate_multipliers();
  Rational value = 0;
  for (std::size_t i = 0; i < kConstraints; ++i) {
    cert.multipliers[i] = y[i].convert_to<double>();
    cert.exact_multipliers[i] = to_exact_string(y[i]);
    value += y[i] * b[i];
  }
  for (std::size_t a = 0; a < kAtoms; ++a) {
    Rational c = 0;
    for (std::size_t i = 0; i < kConstraints; ++i) c += y[i] * constraint_coefficient(i, a);
    cert.atom_coefficients[a] = c.convert_to<double>();
    cert.exact_atom_coefficients[a] = to_exact_string(c);
  }
  cert.spec_value = value.convert_to<double>();
  cert.exact_spec_value = to_exact_string(value);
  result.certificate = cert;
  return result;
}

bool verify_certificate(const InfeasibilityCertificate& certificate, const PairwiseSpec& spec) {
  try {
    const auto b = exact_targets(spec);
    std::array<Rational, kConstraints> y;
    for (std::size_t i = 0; i < kConstraints; ++i) y[i] = Rational(certificate.exact_multipliers[i]);
    Rational value = 0;
    for (std::size_t i = 0; i < kConstraints; ++i) value += y[i] * b[i];
    if (!(value < 0)) return false;
    for (std::size_t a = 0; a < kAtoms; ++a) {
      Rational c = 0;
      for (std::size_t i = 0; i < kConstraints; ++i) c += y[i] * constraint_coefficient(i, a);
      if (c < 0) return false;
      if (c != Rational(certificate.exact_atom_coefficients[a])) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

double conjunction_bound(double p_a, double p_b) {
  if (!(p_a >= 0.0 && p_a <= 1.0 && p_b >= 0.0 && p_b <= 1.0)) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  return std::max(0.0, p_a + p_b - 1.0);
}

nlohmann::json to_json(const FeasibilityResult& result) {
  auto atom_label = [](std::size_t a) {
    return std::string{static_cast<char>('0' + bit(a, 0)), static_cast<char>('0' + bit(a, 1)),
                       static_cast<char>('0' + bit(a, 2))};
  };
  nlohmann::json j;
  j["feasible"] = result.feasible;
  if (result.witness) {
    nlohmann::json w;
    for (std::size_t a = 0; a < kAtoms; ++a) w[atom_label(a)] = result.witness->weights[a];
    j["witness"] = w;
  }
  if (result.certificate) {
    const auto& c = *result.certificate;
    nlohmann::json coefficients;
    nlohmann::json exact;
    for (std::size_t a = 0; a < kAtoms; ++a) {
      coefficients[atom_label(a)] = c.atom_coefficients[a];
      exact[atom_label(a)] = c.exact_atom_coefficients[a];
    }
    j["certificate"] = {
        {"rows", {"normalization", "P(X1=1)", "P(X2=1)", "P(X3=1)", "P(X1=X2)", "P(X1=X3)",
                  "P(X2=X3)"}},
        {"multipliers", c.multipliers},
        {"exact_multipliers", c.exact_multipliers},
        {"atom_coefficients", coefficients},
        {"exact_atom_coefficients", exact},
        {"spec_value", c.spec_value},
        {"exact_spec_value", c.exact_spec_value},
    };
  }
  return j;
}

}  // namespace anticorr::bell
