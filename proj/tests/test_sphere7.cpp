#include <gtest/gtest.h>

#include <random>

#include "g2lab/sphere7.hpp"
#include "test_support.hpp"

namespace g2lab::sphere7 {
namespace {

Vector8d point_q(int epsilon) {
  Vector8d q;
  q << 0.5, 0, 0.5, 0, 0.5, 0, 0, 0.5 * epsilon;
  return q;
}

/// 4((x0x2 − x1x3)(x4x7 + x5x6) + (x1x2 + x0x3)(x5x7 − x4x6)), the expanded polynomial.
double nu_expanded(const Vector8d& x) {
  return 4.0 * ((x(0) * x(2) - x(1) * x(3)) * (x(4) * x(7) + x(5) * x(6)) +
                (x(1) * x(2) + x(0) * x(3)) * (x(5) * x(7) - x(4) * x(6)));
}

Form dx(std::initializer_list<int> idx) { return Form::basis(8, idx); }

TEST(Spin7Form, MatchesGammaBetaDecomposition) {
  const Form gamma1 = dx({0, 1}) + dx({2, 3}), gamma2 = dx({0, 2}) + dx({3, 1}), gamma3 = dx({0, 3}) + dx({1, 2});
  const Form beta5 = dx({4, 5}) + dx({6, 7}), beta6 = dx({4, 6}) + dx({7, 5}), beta7 = dx({4, 7}) + dx({5, 6});
  const Form expected = dx({0, 1, 2, 3}) - wedge(gamma1, beta5) - wedge(gamma2, beta6) - wedge(gamma3, beta7) +
                        dx({4, 5, 6, 7});
  const Form psi = spin7_form();
  EXPECT_EQ(psi.size(), 14u);
  for (const auto& [m, c] : psi.terms()) EXPECT_EQ(std::abs(c), 1.0);
  EXPECT_DOUBLE_EQ(psi.coefficient({0, 1, 2, 3}), 1.0);
  EXPECT_TRUE(approx_equal(psi, expected, 1e-15));
}

TEST(Spin7Form, SelfDualWithFourteenVolumes) {
  const Form psi = spin7_form();
  EXPECT_TRUE(approx_equal(hodge_star(psi, Metric::euclidean(8)), psi, 1e-15));
  EXPECT_NEAR(wedge(psi, psi)[0xff], 14.0, 1e-15);
}

TEST(Spin7Form, TorusPreservesPsi) {
  const Form psi = spin7_form();
  for (const Matrix8d& m : torus_generators()) EXPECT_TRUE(linear_derivation(m, psi).empty());
  // L_{V_i}Ψ = ε_i(γ3∧β6 − γ2∧β7). By hand for V0: L dx^0 = −dx^1 and
  // L dx^1 = dx^0 give L γ2 = −γ3, L γ3 = γ2, so ε0 = +1; likewise ε = (+1, +1, −1, −1).
  const Form gamma2 = dx({0, 2}) + dx({3, 1}), gamma3 = dx({0, 3}) + dx({1, 2});
  const Form beta6 = dx({4, 6}) + dx({7, 5}), beta7 = dx({4, 7}) + dx({5, 6});
  const Form base = wedge(gamma3, beta6) - wedge(gamma2, beta7);
  const double eps[4] = {1, 1, -1, -1};
  for (int i = 0; i < 4; ++i)
    EXPECT_TRUE(approx_equal(linear_derivation(rotation_generator(i), psi), eps[i] * base, 1e-15)) << i;
}

TEST(SpherePoint, RejectsNonUnitVectors) {
  EXPECT_THROW(SpherePoint(2.0 * Vector8d::Unit(0)), Error);
  EXPECT_NO_THROW(SpherePoint(Vector8d::Unit(3)));
  Vector8d almost = Vector8d::Unit(1);
  almost(1) += 5e-13;
  EXPECT_NO_THROW(SpherePoint{almost});
}

TEST(InducedPhi, AtBasePointIsTheStandardForm) {
  const InducedStructure s = induced_phi_at(SpherePoint(Vector8d::Unit(0)));
  EXPECT_TRUE(approx_equal(s.ambient_phi, embed(standard_phi(), 8, 1), 1e-15));
}

TEST(InducedPhi, RecoversRoundMetricAndPositiveOrientation) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const SpherePoint p(uniform_on_sphere(rng));
    const InducedStructure s = induced_phi_at(p);
    EXPECT_LT((s.frame.transpose() * s.frame - Eigen::Matrix<double, 7, 7>::Identity()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((s.frame.transpose() * p.x()).norm(), 1e-14);
    EXPECT_LT((s.g2.metric.g - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(s.g2.metric.orientation, 1);
    // ⋆φ on the sphere is the restriction of Ψ.
    EXPECT_LT(max_difference(s.g2.star_phi, pullback(spin7_form(), s.frame)), 1e-12);
  }
}

TEST(MultiMoment, PolynomialMatchesContractionAndExpandedForm) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 1000; ++trial) {
    const SpherePoint p(uniform_on_sphere(rng));
    EXPECT_NEAR(nu(p), nu_expanded(p.x()), 1e-14);
    EXPECT_NEAR(nu(p), nu_from_phi(p), 1e-10);
    EXPECT_LT((grad_nu(p) - grad_nu_from_star_phi(p)).norm(), 1e-9);
    EXPECT_LE(std::abs(nu(p)), 0.25);
  }
}

TEST(MultiMoment, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(71);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const Vector8d x = testing::random_vector(rng, 8);
    const Vector8d g = nu_euclidean_gradient(x);
    const Matrix8d hess = nu_euclidean_hessian(x);
    for (int a = 0; a < 8; ++a) {
      const Vector8d e = h * Vector8d::Unit(a);
      EXPECT_NEAR(g(a), (nu_expanded(x + e) - nu_expanded(x - e)) / (2 * h), 1e-8);
      const Vector8d column = (nu_euclidean_gradient(x + e) - nu_euclidean_gradient(x - e)) / (2 * h);
      EXPECT_LT((hess.col(a) - column).norm(), 1e-8);
    }
  }
}

TEST(MultiMoment, VanishesWhenAFactorVanishes) {
  std::mt19937_64 rng(73);
  Vector8d x = uniform_on_sphere(rng);
  x(0) = x(1) = 0.0;
  EXPECT_EQ(nu(SpherePoint::normalized(x)), 0.0);
}

TEST(Critical, PointQIsAnAssociativeExtremum) {
  for (int epsilon : {1, -1}) {
    const SpherePoint q(point_q(epsilon));
    EXPECT_DOUBLE_EQ(nu(q), 0.25 * epsilon);
    const CriticalReport r = critical_classify(q);
    EXPECT_EQ(r.kind, CriticalKind::critical_nonzero_associative);
    EXPECT_LT(r.grad_norm, 1e-15);
    ASSERT_TRUE(r.associative_residual.has_value());
    EXPECT_LT(*r.associative_residual, 1e-12);
  }
}

TEST(Critical, ZeroLevelSpheresAndCircles) {
  EXPECT_EQ(critical_classify(SpherePoint(Vector8d::Unit(0))).kind, CriticalKind::critical_zero_degenerate);
  std::mt19937_64 rng(79);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int trial = 0; trial < 50; ++trial) {
        const SpherePoint p = sample_zero_sphere(i, j, rng);
        EXPECT_EQ(nu(p), 0.0);
        EXPECT_LT(grad_nu(p).norm(), 1e-10);
        EXPECT_EQ(critical_classify(p).kind, CriticalKind::critical_zero_degenerate);
      }
}

TEST(Critical, GenericSlicePointIsRegular) {
  Vector8d x = Vector8d::Zero();
  x(0) = 0.3;
  x(2) = 0.5;
  x(4) = 0.6;
  x(7) = 0.4;
  x(6) = 0.2;
  const CriticalReport r = critical_classify(SpherePoint::normalized(x));
  EXPECT_EQ(r.kind, CriticalKind::regular);
  EXPECT_GT(r.grad_norm, 1e-3);
}

TEST(Hessian, MatchesBlockMatrixAtQ) {
  Eigen::Matrix4d ones = Eigen::Matrix4d::Ones();
  Matrix8d expected = Matrix8d::Zero();
  expected.topLeftCorner<4, 4>() = 0.5 * (ones - 4.0 * Eigen::Matrix4d::Identity());
  expected.bottomRightCorner<4, 4>() = -ones;
  for (int epsilon : {1, -1}) {
    const HessianReport h = hessian_at(SpherePoint(point_q(epsilon)));
    EXPECT_EQ(h.epsilon, epsilon);
    EXPECT_LT((h.matrix - epsilon * expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(h.rank, 4);
    // The intrinsic Hessian has the three orbit directions in its kernel and
    // a definite sign on the four normal directions.
    int zeros = 0, signed_ok = 0;
    for (int k = 0; k < 7; ++k) {
      const double ev = h.intrinsic_eigenvalues(k);
      if (std::abs(ev) < 1e-10) ++zeros;
      else if (epsilon * ev < 0) ++signed_ok;
    }
    EXPECT_EQ(zeros, 3);
    EXPECT_EQ(signed_ok, 4);
  }
}

TEST(Hessian, RejectsNonCriticalPoints) {
  Vector8d x = Vector8d::Constant(1.0);
  try {
    (void)hessian_at(SpherePoint::normalized(x));
    FAIL() << "expected contract_violation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::contract_violation);
  }
}

TEST(Slice, ReductionLandsOnSliceAndPreservesNu) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 200; ++trial) {
    const SpherePoint p(uniform_on_sphere(rng));
    const SliceReduction r = reduce_to_slice(p);
    EXPECT_EQ(r.point[1], 0.0);
    EXPECT_EQ(r.point[3], 0.0);
    EXPECT_EQ(r.point[5], 0.0);
    EXPECT_GE(r.point[0], 0.0);
    EXPECT_GE(r.point[2], 0.0);
    EXPECT_GE(r.point[4], 0.0);
    EXPECT_NEAR(nu(r.point), nu(p), 1e-14);
    EXPECT_LT((apply_torus(p, r.angles).x() - r.point.x()).norm(), 1e-14);
  }
}

TEST(Slice, TorusActionIsTheFlowOfTheGenerators) {
  // d/dt exp(tU_k)·x at t = 0 equals U_k(x).
  std::mt19937_64 rng(89);
  const SpherePoint p(uniform_on_sphere(rng));
  const auto u = torus_fields(p);
  const double t = 1e-6;
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector3d dt = t * Eigen::Vector3d::Unit(k);
    const Vector8d fd = (apply_torus(p, dt).x() - apply_torus(p, -dt).x()) / (2 * t);
    EXPECT_LT((fd - u[k]).norm(), 1e-9);
  }
}

TEST(Extrema, SearchFindsQuarterAndIsThreadIndependent) {
  const ExtremaSearch one = search_extrema(100000, 42, 1);
  const ExtremaSearch three = search_extrema(100000, 42, 3);
  EXPECT_EQ(one.sample_max, three.sample_max);
  EXPECT_EQ(one.sample_min, three.sample_min);
  EXPECT_LE(one.max_abs_sample, 0.25);
  EXPECT_NEAR(nu(one.maximum.point), 0.25, 1e-8);
  EXPECT_NEAR(nu(one.minimum.point), -0.25, 1e-8);
  EXPECT_LT(one.maximum.grad_norm, 1e-9);
  // The maximum lies on the T³-orbit of q with ε = +1.
  EXPECT_LT((reduce_to_slice(one.maximum.point).point.x() - point_q(1)).norm(), 1e-6);
  EXPECT_LT((reduce_to_slice(one.minimum.point).point.x() - point_q(-1)).norm(), 1e-6);
}

}  // namespace
}  // namespace g2lab::sphere7
