#include <gtest/gtest.h>

#include <random>

#include "g2lab/exterior.hpp"
#include "g2lab/g2.hpp"
#include "test_support.hpp"

namespace g2lab {
namespace {

using testing::random_form;
using testing::random_vector;

TEST(Wedge, BasisProducts) {
  EXPECT_TRUE(approx_equal(wedge(Form::basis(3, {0}), Form::basis(3, {1})), Form::basis(3, {0, 1})));
  EXPECT_TRUE(wedge(Form::basis(3, {0}), Form::basis(3, {0})).empty());
  EXPECT_DOUBLE_EQ(wedge(Form::basis(3, {1}), Form::basis(3, {0})).coefficient({0, 1}), -1.0);
}

TEST(Wedge, PhiWedgeStarPhiIsSevenVolumes) {
  const Form top = wedge(standard_phi(), standard_star_phi());
  EXPECT_EQ(top.size(), 1u);
  EXPECT_NEAR(top[0x7f], 7.0, 1e-14);
}

TEST(Wedge, GradedAnticommutativeAndAssociative) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 3 + trial % 6;
    const int p = static_cast<int>(rng() % 3) + 1;
    const int q = static_cast<int>(rng() % 3) + 1;
    if (p + q > dim) continue;
    const Form a = random_form(rng, dim, p);
    const Form b = random_form(rng, dim, q);
    const double sign = ((p * q) & 1) ? -1.0 : 1.0;
    EXPECT_LT(max_difference(wedge(a, b), sign * wedge(b, a)), 1e-13);
    if (p + q + 1 <= dim) {
      const Form c = random_form(rng, dim, 1);
      EXPECT_LT(max_difference(wedge(wedge(a, b), c), wedge(a, wedge(b, c))), 1e-13);
    }
  }
}

TEST(Wedge, DimensionMismatchIsAContractViolation) {
  try {
    (void)wedge(Form::basis(3, {0}), Form::basis(4, {0}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::contract_violation);
  }
}

TEST(Form, PrunesTinyCoefficientsAndComparesWithTolerance) {
  Form f = Form::basis(4, {0, 1}, 1e-15);
  EXPECT_TRUE(f.empty());
  f.add(0b0011, 1.0);
  f.add(0b0011, -1.0 + 5e-15);
  EXPECT_TRUE(f.empty());
  EXPECT_TRUE(approx_equal(Form::basis(4, {2}, 1.0), Form::basis(4, {2}, 1.0 + 1e-12)));
  EXPECT_FALSE(approx_equal(Form::basis(4, {2}, 1.0), Form::basis(4, {2}, 1.0 + 1e-8)));
  EXPECT_FALSE(approx_equal(Form::basis(4, {2}), Form::basis(5, {2})));
}

TEST(Interior, BasisAndPhi) {
  const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(7, 0);
  EXPECT_TRUE(approx_equal(interior(e1, Form::basis(7, {0, 1})), Form::basis(7, {1})));
  const Form expected = Form::basis(7, {1, 2}) - Form::basis(7, {3, 4}) - Form::basis(7, {5, 6});
  EXPECT_TRUE(approx_equal(interior(e1, standard_phi()), expected, 1e-15));
  EXPECT_TRUE(interior(e1, Form::scalar(7, 3.0)).empty());
}

TEST(Interior, IsAnAntiderivationAndSquaresToZero) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 7;
    const int p = 1 + static_cast<int>(rng() % 3);
    const int q = 1 + static_cast<int>(rng() % 3);
    const Form a = random_form(rng, dim, p);
    const Form b = random_form(rng, dim, q);
    const Eigen::VectorXd v = random_vector(rng, dim);
    const Form lhs = interior(v, wedge(a, b));
    const Form rhs = wedge(interior(v, a), b) + ((p & 1) ? -1.0 : 1.0) * wedge(a, interior(v, b));
    EXPECT_LT(max_difference(lhs, rhs), 1e-13);
    EXPECT_LT(interior(v, interior(v, a)).max_abs(), 1e-13);
  }
}

TEST(HodgeStar, StandardValues) {
  const Metric flat = Metric::euclidean(7);
  EXPECT_TRUE(approx_equal(hodge_star(Form::scalar(7, 1.0), flat), Form::basis(7, {0, 1, 2, 3, 4, 5, 6})));
  EXPECT_TRUE(approx_equal(hodge_star(standard_phi(), flat), standard_star_phi(), 1e-15));
}

TEST(HodgeStar, InvolutiveIsometryInOddDimension) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    Metric metric{testing::random_spd(rng, 7), (trial & 1) ? -1 : 1};
    const int k = static_cast<int>(rng() % 8);
    const Form a = random_form(rng, 7, k, 0.4);
    const Form star = hodge_star(a, metric);
    EXPECT_LT(max_difference(hodge_star(star, metric), a), 1e-12);
    EXPECT_NEAR(inner(a, a, metric), inner(star, star, metric), 1e-12 * std::max(1.0, inner(a, a, metric)));
  }
}

TEST(HodgeStar, DefiningIdentityAgainstBruteForceGram) {
  // a ∧ ⋆b = ⟨a, b⟩ vol with ⟨·,·⟩ evaluated from the Gram determinant of
  // the inverse metric by Laplace expansion.
  std::mt19937_64 rng(3);
  Metric metric{testing::random_spd(rng, 5), 1};
  const Eigen::MatrixXd ginv = metric.g.inverse();
  const double vol = std::sqrt(testing::laplace_det(metric.g));
  for (int k = 0; k <= 5; ++k)
    for (Mask a : masks_of_degree(5, k))
      for (Mask b : masks_of_degree(5, k)) {
        Form fa(5, k), fb(5, k);
        fa.add(a, 1.0);
        fb.add(b, 1.0);
        const auto ra = mask_indices(a), rb = mask_indices(b);
        double gram = 1.0;
        if (k > 0) {
          Eigen::MatrixXd block(k, k);
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) block(i, j) = ginv(ra[i], rb[j]);
          gram = testing::laplace_det(block);
        }
        EXPECT_NEAR(wedge(fa, hodge_star(fb, metric))[0x1f], gram * vol, 1e-12);
      }
}

TEST(ExteriorDerivative, BianchiFrames) {
  const FrameAlgebra su2 = FrameAlgebra::bianchi({1, 1, 1});
  EXPECT_TRUE(approx_equal(exterior_derivative(Form::basis(3, {0}), su2), Form::basis(3, {1, 2})));
  EXPECT_TRUE(approx_equal(exterior_derivative(Form::basis(3, {1}), su2), Form::basis(3, {2, 0})));
  const FrameAlgebra flat = FrameAlgebra::abelian(3);
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(exterior_derivative(Form::basis(3, {i}), flat).empty());
}

TEST(ExteriorDerivative, SquaresToZeroOnEveryDiagonalBianchiFrame) {
  std::mt19937_64 rng(13);
  for (int code = 0; code < 27; ++code) {
    const Eigen::Vector3d lambda(code % 3 - 1, (code / 3) % 3 - 1, code / 9 - 1);
    const FrameAlgebra frame = FrameAlgebra::bianchi(lambda);
    EXPECT_LE(frame.jacobi_defect(), 1e-14);
    for (int k = 0; k < 3; ++k) {
      const Form a = random_form(rng, 3, k, 1.0);
      EXPECT_LE(exterior_derivative(exterior_derivative(a, frame), frame).max_abs(), 1e-14);
    }
  }
}

TEST(ExteriorDerivative, LeibnizRule) {
  std::mt19937_64 rng(17);
  // A nilpotent six-frame (0, 0, 0, 23, 31, 12): de^3 = e^{12} etc.
  std::vector<FormJet> d;
  for (int i = 0; i < 3; ++i) d.push_back(FormJet::constant(Form(6, 2)));
  d.push_back(FormJet::constant(Form::basis(6, {1, 2})));
  d.push_back(FormJet::constant(Form::basis(6, {2, 0})));
  d.push_back(FormJet::constant(Form::basis(6, {0, 1})));
  const FrameAlgebra frame(std::move(d), Metric::euclidean(6));
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 1 + static_cast<int>(rng() % 2), q = 1 + static_cast<int>(rng() % 2);
    const Form a = random_form(rng, 6, p), b = random_form(rng, 6, q);
    const Form lhs = exterior_derivative(wedge(a, b), frame);
    const Form rhs = wedge(exterior_derivative(a, frame), b) +
                     ((p & 1) ? -1.0 : 1.0) * wedge(a, exterior_derivative(b, frame));
    EXPECT_LT(max_difference(lhs, rhs), 1e-13);
    EXPECT_LT(exterior_derivative(exterior_derivative(a, frame), frame).max_abs(), 1e-13);
  }
}

TEST(ExteriorDerivative, SDependentCoefficientsUseTheDsChannel) {
  // Frame {ds, e^1}: d(f(s) e^1) = f'(s) ds ∧ e^1.
  std::vector<FormJet> d{FormJet::constant(Form(2, 2)), FormJet::constant(Form(2, 2))};
  const FrameAlgebra frame(std::move(d), Metric::euclidean(2), 0);
  const SDependentScalar f{2.0, -3.0};
  const FormJet a = FormJet::s_dependent(Form::basis(2, {1}, f.value), Form::basis(2, {1}, f.s_derivative), 0);
  EXPECT_TRUE(approx_equal(exterior_derivative(a, frame), Form::basis(2, {0, 1}, -3.0)));
}

TEST(FrameAlgebra, RejectsInconsistentStructureEquations) {
  // de^1 = e^{03}, de^3 = e^{12}: d(de^3) = e^{032} does not vanish.
  std::vector<FormJet> d{FormJet::constant(Form(4, 2)), FormJet::constant(Form::basis(4, {0, 3})),
                         FormJet::constant(Form(4, 2)), FormJet::constant(Form::basis(4, {1, 2}))};
  try {
    FrameAlgebra frame(std::move(d), Metric::euclidean(4));
    FAIL() << "expected inconsistent_connection";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::inconsistent_connection);
  }
}

TEST(FrameAlgebra, DsGeneratorMustBeClosed) {
  std::vector<FormJet> d{FormJet::constant(Form::basis(2, {0, 1})), FormJet::constant(Form(2, 2))};
  EXPECT_THROW(FrameAlgebra(std::move(d), Metric::euclidean(2), 0), Error);
}

TEST(TripleCalculus, DefinitionsAndAdjugate) {
  const FormTriple e = coframe_triple(Eigen::Matrix3d::Identity());
  const FormTriple sq = wedge_square(e);
  EXPECT_TRUE(approx_equal(sq[0], Form::basis(3, {1, 2})));
  EXPECT_TRUE(approx_equal(sq[1], Form::basis(3, {2, 0})));
  EXPECT_TRUE(approx_equal(sq[2], Form::basis(3, {0, 1})));

  Eigen::Matrix3d sym;
  sym << 1, 2, 3, 2, 5, 6, 3, 6, 9;
  EXPECT_EQ(natural_flat(sym), Eigen::Vector3d::Zero());
  Eigen::Matrix3d x = sym;
  x(0, 1) += 1.0;
  EXPECT_EQ(natural_flat(x), Eigen::Vector3d(0, 0, 1));

  EXPECT_EQ(adjugate(Eigen::Vector3d(2, 3, 5).asDiagonal()), Eigen::Matrix3d(Eigen::Vector3d(15, 10, 6).asDiagonal()));

  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Matrix3d h = testing::random_matrix(rng, 3, 3);
    const Eigen::Matrix3d adj = adjugate(h);
    EXPECT_LT((adj - testing::cofactor_adjugate(h)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((h * adj - testing::laplace_det(h) * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(TripleCalculus, BarwedgeAntisymmetryIdentity) {
  // (Y Hdγ) ⊼ (Xγ) − (Xγ) ⊼ (Y Hdγ) = (Y Xᵀ)^♮ vol_γ, expanded by hand from
  // ε_a ∧ γ_b = δ_ab vol_γ.
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Matrix3d c = testing::random_matrix(rng, 3, 3);
    const Eigen::Matrix3d X = testing::random_matrix(rng, 3, 3);
    const Eigen::Matrix3d Y = testing::random_matrix(rng, 3, 3);
    const FormTriple gamma = coframe_triple(c);
    const Form vol = wedge(gamma[0], gamma[1], gamma[2]);
    const FormTriple lhs = barwedge(Y * wedge_square(gamma), X * gamma) - barwedge(X * gamma, Y * wedge_square(gamma));
    const Eigen::Vector3d nat = natural_flat(Y * X.transpose());
    for (int i = 0; i < 3; ++i) EXPECT_LT(max_difference(lhs[i], nat(i) * vol), 1e-12);
  }
}

TEST(Pullback, ReexpressesInNewBasis) {
  std::mt19937_64 rng(29);
  const Form a = random_form(rng, 4, 2, 1.0);
  const Eigen::MatrixXd basis = testing::random_matrix(rng, 4, 4);
  const Form pulled = pullback(a, basis);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      EXPECT_NEAR(pulled.coefficient({i, j}), evaluate(a, {basis.col(i), basis.col(j)}), 1e-13);
}

TEST(LinearDerivation, MatchesInfinitesimalPullback) {
  // (L_M a) = d/dt exp(tM)^* a at t = 0; compared with a central difference.
  std::mt19937_64 rng(31);
  const Form a = random_form(rng, 5, 3, 1.0);
  const Eigen::MatrixXd M = testing::random_matrix(rng, 5, 5);
  const double t = 1e-5;
  auto flow = [&](double s) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Identity(5, 5), term = Eigen::MatrixXd::Identity(5, 5);
    for (int n = 1; n < 12; ++n) {
      term = term * (s * M) / n;
      e += term;
    }
    return pullback(a, e);
  };
  const Form fd = (1.0 / (2 * t)) * (flow(t) - flow(-t));
  EXPECT_LT(max_difference(linear_derivation(M, a), fd), 1e-8);
}

}  // namespace
}  // namespace g2lab
