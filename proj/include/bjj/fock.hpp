#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bjj {

using Complex = std::complex<double>;

enum class Mode { Left, Right };
enum class LadderKind { Create, Annihilate };

/// A single bosonic creation or annihilation operator on one of the two wells.
struct LadderOp {
  Mode mode;
  LadderKind kind;
};

inline constexpr LadderOp adag_L{Mode::Left, LadderKind::Create};
inline constexpr LadderOp a_L{Mode::Left, LadderKind::Annihilate};
inline constexpr LadderOp adag_R{Mode::Right, LadderKind::Create};
inline constexpr LadderOp a_R{Mode::Right, LadderKind::Annihilate};

/// Pure state of N bosons distributed over the two wells.
///
/// Amplitudes are indexed by the right-well occupation m = 0..N; the left
/// occupation is implicitly N - m. The vector is not forced to unit norm
/// here: ladder operators return unnormalized states carrying the usual
/// sqrt factors. State constructors (phase, NOON, ...) normalize.
class TwoModeState {
 public:
  TwoModeState(int n_total, Eigen::VectorXcd amplitudes)
      : n_total_(n_total), amplitudes_(std::move(amplitudes)) {
    if (n_total_ < 0) throw std::domain_error("TwoModeState: n_total must be >= 0");
    if (amplitudes_.size() != n_total_ + 1)
      throw std::domain_error("TwoModeState: amplitude vector must have length n_total + 1");
  }

  /// Number basis vector |N-m>_L |m>_R.
  static TwoModeState basis(int n_total, int n_right) {
    if (n_right < 0 || n_right > n_total)
      throw std::domain_error("TwoModeState::basis: n_right out of range");
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(n_total + 1);
    amps(n_right) = 1.0;
    return TwoModeState(n_total, std::move(amps));
  }

  int n_total() const { return n_total_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Complex amplitude(int m) const { return amplitudes_(m); }

  double norm() const { return amplitudes_.norm(); }

  bool is_normalized(double tol = 1e-12) const {
    return std::abs(amplitudes_.squaredNorm() - 1.0) <= tol;
  }

  TwoModeState normalized() const {
    const double n = norm();
    if (n == 0.0) throw std::domain_error("TwoModeState::normalized: zero state");
    return TwoModeState(n_total_, amplitudes_ / n);
  }

  /// <this|other>; both states must live in the same fixed-N space.
  Complex inner(const TwoModeState& other) const {
    if (other.n_total_ != n_total_)
      throw std::domain_error("TwoModeState::inner: particle numbers differ");
    return amplitudes_.dot(other.amplitudes_);
  }

 private:
  int n_total_;
  Eigen::VectorXcd amplitudes_;
};

/// Density matrix in the right-occupation number basis,
/// entries(m, l) = <N-m, m| rho |N-l, l>.
class DensityMatrix {
 public:
  DensityMatrix(int n_total, Eigen::MatrixXcd entries)
      : n_total_(n_total), entries_(std::move(entries)) {
    if (n_total_ < 0) throw std::domain_error("DensityMatrix: n_total must be >= 0");
    if (entries_.rows() != n_total_ + 1 || entries_.cols() != n_total_ + 1)
      throw std::domain_error("DensityMatrix: entries must be (N+1) x (N+1)");
  }

  /// |psi><psi| / <psi|psi>.
  static DensityMatrix from_pure(const TwoModeState& state) {
    const double n2 = state.amplitudes().squaredNorm();
    if (n2 == 0.0) throw std::domain_error("DensityMatrix::from_pure: zero state");
    Eigen::MatrixXcd outer =
        (state.amplitudes() * state.amplitudes().adjoint()) / n2;
    return DensityMatrix(state.n_total(), std::move(outer));
  }

  /// Convex mixture sum_i w_i |psi_i><psi_i|. Weights must sum to 1.
  static DensityMatrix mixture(std::span<const double> weights,
                               std::span<const TwoModeState> states) {
    if (weights.size() != states.size() || states.empty())
      throw std::domain_error("DensityMatrix::mixture: need matching nonempty weights/states");
    const int n = states[0].n_total();
    double wsum = 0.0;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (states[i].n_total() != n)
        throw std::domain_error("DensityMatrix::mixture: particle numbers differ");
      if (weights[i] < 0.0)
        throw std::domain_error("DensityMatrix::mixture: negative weight");
      acc += weights[i] * DensityMatrix::from_pure(states[i]).entries();
      wsum += weights[i];
    }
    if (std::abs(wsum - 1.0) > 1e-12)
      throw std::domain_error("DensityMatrix::mixture: weights must sum to 1");
    return DensityMatrix(n, std::move(acc));
  }

  int n_total() const { return n_total_; }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  Complex entry(int m, int l) const { return entries_(m, l); }

  Complex trace() const { return entries_.trace(); }

  bool is_hermitian(double tol = 1e-12) const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }

  bool has_unit_trace(double tol = 1e-10) const {
    return std::abs(trace() - Complex(1.0, 0.0)) <= tol;
  }

  /// Smallest eigenvalue of the Hermitian part; used by positivity checks.
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (entries_ + entries_.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  int n_total_;
  Eigen::MatrixXcd entries_;
};

namespace detail {

/// Applies one ladder operator, mapping the vacuum annihilation to the zero
/// functional (nullopt) instead of throwing; used by operator strings.
inline std::optional<TwoModeState> ladder_apply_or_zero(LadderOp op,
                                                        const TwoModeState& s) {
  const int n = s.n_total();
  const auto& in = s.amplitudes();
  if (op.kind == LadderKind::Annihilate) {
    if (n == 0) return std::nullopt;
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
    if (op.mode == Mode::Right) {
      for (int m = 1; m <= n; ++m) out(m - 1) = std::sqrt(double(m)) * in(m);
    } else {
      for (int m = 0; m <= n - 1; ++m) out(m) = std::sqrt(double(n - m)) * in(m);
    }
    return TwoModeState(n - 1, std::move(out));
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n + 2);
  if (op.mode == Mode::Right) {
    for (int m = 0; m <= n; ++m) out(m + 1) = std::sqrt(double(m + 1)) * in(m);
  } else {
    for (int m = 0; m <= n; ++m) out(m) = std::sqrt(double(n - m + 1)) * in(m);
  }
  return TwoModeState(n + 1, std::move(out));
}

/// Applies an operator string; ops[0] is the leftmost operator, so the walk
/// runs from the back of the span. Returns nullopt when the string maps the
/// state to zero through a vacuum annihilation.
inline std::optional<TwoModeState> apply_string(std::span<const LadderOp> ops,
                                                const TwoModeState& s) {
  std::optional<TwoModeState> cur = s;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    cur = ladder_apply_or_zero(*it, *cur);
    if (!cur) return std::nullopt;
  }
  return cur;
}

}  // namespace detail

/// Applies one ladder operator. The result is unnormalized and lives in the
/// fixed-N space with N shifted by one.
inline TwoModeState ladder_apply(LadderOp op, const TwoModeState& state) {
  if (op.kind == LadderKind::Annihilate && state.n_total() == 0)
    throw std::domain_error("ladder_apply: annihilation on the vacuum");
  return *detail::ladder_apply_or_zero(op, state);
}

/// <bra| ops[0] ops[1] ... |ket>. Throws if the string does not map the ket
/// space onto the bra space.
inline Complex matrix_element(std::span<const LadderOp> ops,
                              const TwoModeState& bra, const TwoModeState& ket) {
  int delta = 0;
  for (const auto& op : ops) delta += (op.kind == LadderKind::Create) ? 1 : -1;
  if (ket.n_total() + delta != bra.n_total())
    throw std::domain_error("matrix_element: operator string does not connect the two spaces");
  auto applied = detail::apply_string(ops, ket);
  if (!applied) return Complex(0.0, 0.0);
  return bra.inner(*applied);
}

/// Tr[O rho] for a number-conserving operator string O = ops[0] ops[1] ...
/// Non-conserving strings cannot be hosted in the fixed-N representation and
/// raise a domain error.
inline Complex expectation(std::span<const LadderOp> ops, const DensityMatrix& rho) {
  int creates = 0, annihilates = 0;
  for (const auto& op : ops)
    (op.kind == LadderKind::Create ? creates : annihilates) += 1;
  if (creates != annihilates)
    throw std::domain_error("expectation: operator string does not conserve the total number");

  const int n = rho.n_total();
  Complex sum(0.0, 0.0);
  for (int l = 0; l <= n; ++l) {
    auto applied = detail::apply_string(ops, TwoModeState::basis(n, l));
    if (!applied) continue;
    // Tr[O rho] = sum_{m,l} <m|O|l> rho(l,m)
    sum += rho.entries().row(l).transpose().cwiseProduct(applied->amplitudes()).sum();
  }
  return sum;
}

inline Complex expectation(std::initializer_list<LadderOp> ops, const DensityMatrix& rho) {
  return expectation(std::span<const LadderOp>(ops.begin(), ops.size()), rho);
}

/// Operator string for the k-particle cross coherence (adag_L)^k (a_R)^k.
inline std::vector<LadderOp> cross_coherence_string(int k) {
  if (k < 0) throw std::domain_error("cross_coherence_string: k must be >= 0");
  std::vector<LadderOp> ops;
  ops.reserve(2 * std::size_t(k));
  for (int i = 0; i < k; ++i) ops.push_back(adag_L);
  for (int i = 0; i < k; ++i) ops.push_back(a_R);
  return ops;
}

}  // namespace bjj
