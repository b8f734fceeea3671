#pragma once

#include <concepts>
#include <utility>

#include "exactpen/lipschitz.hpp"
#include "exactpen/penalties.hpp"

namespace exactpen {

template <class F>
concept SmoothLoss = requires(const F &f, const Vector &x) {
  { f.dim() } -> std::convertible_to<Index>;
  { f.value(x) } -> std::convertible_to<double>;
  { f.value_grad(x) } -> std::same_as<ValueGrad>;
};

template <class F>
concept HasLipschitzBound = requires(const F &f, const LipschitzOptions &o) {
  { lipschitz_upper_bound(f, o) } -> std::same_as<LipschitzEstimate>;
};

/// F(x) = f(x) + g(x), together with the Lipschitz constant of grad f.
template <SmoothLoss Loss, ProxPenalty Penalty>
struct CompositeObjective {
  Loss loss;
  Penalty penalty;
  double lipschitz = 0.0;

  CompositeObjective(Loss f, Penalty g, double L)
      : loss(std::move(f)), penalty(std::move(g)), lipschitz(L) {
    if (!(L > 0.0))
      throw InvalidDataError("Lipschitz constant must be positive");
  }

  CompositeObjective(Loss f, Penalty g, const LipschitzOptions &opts = {})
    requires HasLipschitzBound<Loss>
      : loss(std::move(f)), penalty(std::move(g)),
        lipschitz(lipschitz_upper_bound(loss, opts).L) {}

  Index dim() const { return loss.dim(); }
  double value(const Vector &x) const { return loss.value(x) + penalty.value(x); }
};

template <class Loss, class Penalty>
CompositeObjective(Loss, Penalty, double) -> CompositeObjective<Loss, Penalty>;
template <class Loss, class Penalty>
CompositeObjective(Loss, Penalty, LipschitzOptions) -> CompositeObjective<Loss, Penalty>;
template <class Loss, class Penalty>
CompositeObjective(Loss, Penalty) -> CompositeObjective<Loss, Penalty>;

/// F(x, z) = 1/2||Ax - b - z||^2 + g(x) + h(z).
///
/// `lipschitz_x` bounds grad_x f in x (lambda_max(A^T A)); grad_z f is 1-Lipschitz
/// in z. `joint_lipschitz` is the constant M of the stacked gradient map.
template <ProxPenalty PenaltyX, ProxPenalty PenaltyZ>
struct TwoBlockObjective {
  RobustLeastSquares loss;
  PenaltyX penalty_x;
  PenaltyZ penalty_z;
  double lipschitz_x = 0.0;
  double lipschitz_z = 1.0;
  double joint_lipschitz = 0.0;

  TwoBlockObjective(RobustLeastSquares f, PenaltyX g, PenaltyZ h,
                    const LipschitzOptions &opts = {})
      : loss(std::move(f)), penalty_x(std::move(g)), penalty_z(std::move(h)) {
    lipschitz_x = gram_lambda_max(loss.design(), opts).L;
    joint_lipschitz = lipschitz_upper_bound(loss, opts).L;
  }

  TwoBlockObjective(RobustLeastSquares f, PenaltyX g, PenaltyZ h, double Lx, double M)
      : loss(std::move(f)), penalty_x(std::move(g)), penalty_z(std::move(h)), lipschitz_x(Lx),
        joint_lipschitz(M) {}

  Index dim_x() const { return loss.dim_x(); }
  Index dim_z() const { return loss.dim_z(); }
  double value(const Vector &x, const Vector &z) const {
    return loss.value(x, z) + penalty_x.value(x) + penalty_z.value(z);
  }
};

template <class Px, class Pz>
TwoBlockObjective(RobustLeastSquares, Px, Pz) -> TwoBlockObjective<Px, Pz>;
template <class Px, class Pz>
TwoBlockObjective(RobustLeastSquares, Px, Pz, LipschitzOptions) -> TwoBlockObjective<Px, Pz>;
template <class Px, class Pz>
TwoBlockObjective(RobustLeastSquares, Px, Pz, double, double) -> TwoBlockObjective<Px, Pz>;

/// Objective of the two-point counterexample: f(x) = 1/2 (x - 2)^2,
/// g1 = |x|, g2 = max{0, -x}, so that g = max{0, x}.
inline CompositeObjective<LeastSquares, PiecewiseLinearPenalty> counterexample_objective() {
  DenseRowMajor A(1, 1);
  A(0, 0) = 1.0;
  Vector b(1);
  b[0] = 2.0;
  PiecewiseLinearPenalty g(1.0, {SignPattern{{0}}, SignPattern{{-1}}});
  return {LeastSquares(DesignMatrix(std::move(A)), std::move(b)), std::move(g), 1.0};
}

} // namespace exactpen
