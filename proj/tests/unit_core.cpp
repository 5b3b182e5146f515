// Unit tests: RNG, activation pair, manifold algebra, modulation network.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ncae/activations.hpp"
#include "ncae/manifold.hpp"
#include "ncae/neuromod.hpp"
#include "ncae/rng.hpp"

using namespace ncae;

namespace {
constexpr double kPi4 = 0.78539816339744830962;
constexpr double kPi8 = 0.39269908169872415481;
}  // namespace

// ---------------------------------------------------------------------------
// RNG
// ---------------------------------------------------------------------------

TEST_CASE("rng streams are deterministic per seed") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_differ = false;
  for (int i = 0; i < 32; ++i) {
    const double x = a.uniform(), y = b.uniform(), z = c.uniform();
    all_equal = all_equal && (x == y);
    any_differ = any_differ || (x != z);
  }
  REQUIRE(all_equal);
  REQUIRE(any_differ);
}

TEST_CASE("uniform draws stay inside their interval") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = rng.uniform(3.133, 3.193);
    REQUIRE(v >= 3.133);
    REQUIRE(v < 3.193);
  }
}

TEST_CASE("normal draws have roughly standard moments") {
  Rng rng(2024);
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.05);
  REQUIRE(std::abs(var - 1.0) < 0.08);
}

TEST_CASE("derive_seed separates trajectory streams") {
  REQUIRE(derive_seed(5, 0) != derive_seed(5, 1));
  REQUIRE(derive_seed(5, 0) != derive_seed(6, 0));
  REQUIRE(derive_seed(5, 3) == derive_seed(5, 3));
  Rng a(derive_seed(9, 0)), b(derive_seed(9, 1));
  REQUIRE(a.uniform() != b.uniform());
}

TEST_CASE("below and shuffle behave as permutation utilities") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    REQUIRE(rng.below(7) < 7u);
  }
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;
  rng.shuffle(w);
  REQUIRE(w != v);  // astronomically unlikely to be identity
  std::sort(w.begin(), w.end());
  REQUIRE(w == v);
}

// ---------------------------------------------------------------------------
// Activation pair
// ---------------------------------------------------------------------------

TEST_CASE("activation values match independently computed references") {
  REQUIRE_THAT(sigma_plus(1.0, 0.3),
               Catch::Matchers::WithinAbs(1.4466271103858674, 1e-14));
  const SigmaDerivs d0 = sigma_plus_all(0.0, kPi8);
  REQUIRE_THAT(d0.dx, Catch::Matchers::WithinAbs(1.0, 1e-14));
  const SigmaDerivs d1 = sigma_plus_all(0.7, 0.2);
  REQUIRE_THAT(d1.dxx,
               Catch::Matchers::WithinAbs(0.2861659189320218, 1e-14));
}

TEST_CASE("the two activations are mutual inverses") {
  const double alphas[] = {1e-4, 0.05, 0.1, kPi8};
  for (double alpha : alphas) {
    for (double x = -8.0; x <= 8.0; x += 0.37) {
      REQUIRE_THAT(sigma_minus(sigma_plus(x, alpha), alpha),
                   Catch::Matchers::WithinAbs(x, 1e-9));
      REQUIRE_THAT(sigma_plus(sigma_minus(x, alpha), alpha),
                   Catch::Matchers::WithinAbs(x, 1e-9));
    }
  }
}

TEST_CASE("slopes interpolate between the two asymptotic tangents") {
  const double t_hi = std::tan(kPi4 + kPi8);
  const double t_lo = std::tan(kPi4 - kPi8);
  REQUIRE_THAT(sigma_plus_all(1e6, kPi8).dx,
               Catch::Matchers::WithinAbs(t_hi, 1e-5));
  REQUIRE_THAT(sigma_plus_all(-1e6, kPi8).dx,
               Catch::Matchers::WithinAbs(t_lo, 1e-5));
  REQUIRE_THAT(sigma_minus_all(1e6, kPi8).dx,
               Catch::Matchers::WithinAbs(t_lo, 1e-5));
  REQUIRE_THAT(sigma_minus_all(-1e6, kPi8).dx,
               Catch::Matchers::WithinAbs(t_hi, 1e-5));
  for (double x = -5.0; x <= 5.0; x += 0.61) {
    const double dx = sigma_plus_all(x, 0.22).dx;
    REQUIRE(dx > 0.0);
  }
}

TEST_CASE("activation derivatives agree with finite differences") {
  const double h = 1e-6;
  const double xs[] = {-3.1, -0.4, 0.0, 0.9, 2.7};
  const double als[] = {0.05, 0.2, kPi8};
  for (int br = 0; br < 2; ++br) {
    const auto all = [&](double x, double a) {
      return br == 0 ? sigma_plus_all(x, a) : sigma_minus_all(x, a);
    };
    for (double a : als) {
      for (double x : xs) {
        const SigmaDerivs d = all(x, a);
        const double fd_dx = (all(x + h, a).val - all(x - h, a).val) / (2 * h);
        REQUIRE_THAT(d.dx, Catch::Matchers::WithinAbs(fd_dx, 1e-6 + 1e-5 * std::abs(fd_dx)));
        const double fd_dxx = (all(x + h, a).dx - all(x - h, a).dx) / (2 * h);
        REQUIRE_THAT(d.dxx, Catch::Matchers::WithinAbs(fd_dxx, 1e-6 + 1e-5 * std::abs(fd_dxx)));
        const double fd_dal = (all(x, a + h).val - all(x, a - h).val) / (2 * h);
        REQUIRE_THAT(d.dal, Catch::Matchers::WithinAbs(fd_dal, 1e-6 + 1e-5 * std::abs(fd_dal)));
        const double fd_dxdal = (all(x, a + h).dx - all(x, a - h).dx) / (2 * h);
        REQUIRE_THAT(d.dxdal,
                     Catch::Matchers::WithinAbs(fd_dxdal, 1e-6 + 1e-5 * std::abs(fd_dxdal)));
      }
    }
  }
}

TEST_CASE("slope is insensitive to the opening angle at the origin") {
  for (double a : {0.03, 0.1, 0.3}) {
    REQUIRE_THAT(sigma_plus_all(0.0, a).dal,
                 Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("activation stays finite at extreme arguments") {
  for (double x : {1e150, -1e150, 1e300, -1e300}) {
    const SigmaDerivs d = sigma_plus_all(x, kPi8);
    REQUIRE(std::isfinite(d.val));
    REQUIRE(std::isfinite(d.dx));
    REQUIRE(std::isfinite(d.dxx));
    REQUIRE(std::isfinite(d.dal));
    REQUIRE(std::isfinite(d.dxdal));
  }
}

TEST_CASE("activation domain and input validation") {
  REQUIRE_THROWS_AS(sigma_plus(0.0, 0.0), std::domain_error);
  REQUIRE_THROWS_AS(sigma_plus(0.0, kPi4), std::domain_error);
  REQUIRE_THROWS_AS(sigma_plus(0.0, -0.1), std::domain_error);
  REQUIRE_THROWS(sigma_plus(std::numeric_limits<double>::quiet_NaN(), 0.2));
  REQUIRE_THROWS(sigma_plus(std::numeric_limits<double>::infinity(), 0.2));
}

TEST_CASE("raw-to-angle squashing hits its reference value and bounds") {
  REQUIRE_THAT(alpha_from_raw(std::log(3.0), 1e-5, kPi8),
               Catch::Matchers::WithinAbs(0.2945268112740431, 1e-14));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double a = alpha_from_raw(rng.uniform(-40.0, 40.0), 1e-5, kPi8);
    REQUIRE(a > 0.0);
    REQUIRE(a < kPi4);
  }
  const double h = 1e-6;
  for (double r : {-2.0, 0.0, 1.3}) {
    const double fd =
        (alpha_from_raw(r + h, 1e-5, kPi8) - alpha_from_raw(r - h, 1e-5, kPi8)) /
        (2 * h);
    REQUIRE_THAT(alpha_from_raw_deriv(r, 1e-5, kPi8),
                 Catch::Matchers::WithinAbs(fd, 1e-9));
  }
  REQUIRE_THROWS_AS(alpha_from_raw(0.0, 0.0, kPi8), std::invalid_argument);
  REQUIRE_THROWS_AS(alpha_from_raw(0.0, 0.2, 0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(alpha_from_raw(0.0, 1e-5, kPi4 + 0.1),
                    std::invalid_argument);
}

TEST_CASE("batch activation kernels match the scalar path") {
  Rng rng(17);
  const int rows = 5, cols = 7;
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd alpha(rows);
  for (int i = 0; i < rows; ++i) alpha[i] = rng.uniform(0.02, kPi8);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) X(i, j) = rng.normal() * 2.0;
  }
  const SigmaCoefTable table = SigmaCoefTable::from_alpha(alpha);
  Eigen::MatrixXd val, dx, dxx, dal, dxdal;
  sigma_batch_all(X, table, +1, val, dx, dxx, dal, dxdal);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const SigmaDerivs d = sigma_plus_all(X(i, j), alpha[i]);
      REQUIRE(val(i, j) == d.val);
      REQUIRE(dx(i, j) == d.dx);
      REQUIRE(dxx(i, j) == d.dxx);
      REQUIRE(dal(i, j) == d.dal);
      REQUIRE(dxdal(i, j) == d.dxdal);
    }
  }
  Eigen::MatrixXd val2, dx2;
  sigma_batch_fwd(X, table, -1, val2, dx2);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const SigmaDerivs d = sigma_minus_all(X(i, j), alpha[i]);
      REQUIRE(val2(i, j) == d.val);
      REQUIRE(dx2(i, j) == d.dx);
    }
  }
}

// ---------------------------------------------------------------------------
// Biorthogonal manifold
// ---------------------------------------------------------------------------

TEST_CASE("random initialization satisfies the pairing constraint") {
  Rng rng(5);
  for (auto [r, c] : {std::pair{6, 3}, {36, 21}, {4, 4}, {9, 1}}) {
    const BiorthPair pr = init_biorthogonal(r, c, rng);
    REQUIRE(biorthogonality_defect(pr) < 1e-12);
  }
  REQUIRE_THROWS_AS(init_biorthogonal(3, 5, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(init_biorthogonal(3, 0, rng), std::invalid_argument);
}

TEST_CASE("sylvester solver produces a true solution") {
  Rng rng(8);
  const int n = 4, m = 3;
  Eigen::MatrixXd X(n, n), Y(m, m), C(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X(i, j) = rng.normal();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) Y(i, j) = rng.normal();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) C(i, j) = rng.normal();
  const Eigen::MatrixXd A =
      X * X.transpose() + Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd B =
      Y * Y.transpose() + Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd L = solve_sylvester_spd(A, B, C);
  REQUIRE((A * L + L * B - C).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("tangent projection lands in the constraint's tangent space") {
  Rng rng(21);
  const BiorthPair pr = init_biorthogonal(10, 4, rng);
  Eigen::MatrixXd g_phi(10, 4), g_psi(10, 4);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 4; ++j) {
      g_phi(i, j) = rng.normal();
      g_psi(i, j) = rng.normal();
    }
  }
  Eigen::MatrixXd t_phi, t_psi;
  tangent_project(pr, g_phi, g_psi, t_phi, t_psi);
  // First-order constraint preservation: psi^T t_phi + t_psi^T phi = 0.
  const Eigen::MatrixXd viol =
      pr.psi.transpose() * t_phi + t_psi.transpose() * pr.phi;
  REQUIRE(viol.cwiseAbs().maxCoeff() < 1e-10);
  // Idempotency of the projection.
  Eigen::MatrixXd t_phi2, t_psi2;
  tangent_project(pr, t_phi, t_psi, t_phi2, t_psi2);
  REQUIRE((t_phi2 - t_phi).cwiseAbs().maxCoeff() < 1e-10);
  REQUIRE((t_psi2 - t_psi).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("retraction restores the constraint after a step") {
  Rng rng(31);
  const BiorthPair pr = init_biorthogonal(8, 5, rng);
  Eigen::MatrixXd sp(8, 5), ss(8, 5);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 5; ++j) {
      sp(i, j) = 0.05 * rng.normal();
      ss(i, j) = 0.05 * rng.normal();
    }
  }
  const BiorthPair out = retract(pr, sp, ss);
  REQUIRE(biorthogonality_defect(out) < 1e-12);
  REQUIRE((out.psi - (pr.psi + ss)).isZero(0.0));  // psi side moves freely
}

TEST_CASE("degenerate retraction is reported, not silently accepted") {
  Rng rng(33);
  const BiorthPair pr = init_biorthogonal(6, 3, rng);
  // Annihilate psi: the moved overlap becomes exactly singular.
  REQUIRE_THROWS_AS(
      retract(pr, Eigen::MatrixXd::Zero(6, 3), (-pr.psi).eval()),
      RetractionSingularError);
}

// ---------------------------------------------------------------------------
// Modulation network
// ---------------------------------------------------------------------------

TEST_CASE("silu matches its reference value and finite differences") {
  REQUIRE_THAT(silu(1.0),
               Catch::Matchers::WithinAbs(0.7310585786300049, 1e-14));
  REQUIRE(silu(0.0) == 0.0);
  const double h = 1e-6;
  for (double x : {-2.3, -0.1, 0.7, 3.9}) {
    const double fd = (silu(x + h) - silu(x - h)) / (2 * h);
    REQUIRE_THAT(silu_deriv(x), Catch::Matchers::WithinAbs(fd, 1e-9));
  }
}

TEST_CASE("modulation network shapes follow topology and chain") {
  Rng rng(12);
  const std::vector<int> topo{4, 4, 4};
  const std::vector<int> chain{4, 8, 12, 14, 16};
  const NeuromodNet net = init_neuromod(topo, chain, rng);
  REQUIRE(net.context_dim() == 4);
  REQUIRE(net.signal_dim() == 4);
  REQUIRE(net.mlp_w.size() == 2);
  REQUIRE(net.mlp_w[0].rows() == 4);
  REQUIRE(net.mlp_w[0].cols() == 4);
  REQUIRE(net.mlp_b[0].isZero(0.0));
  REQUIRE(net.w_alpha.size() == 4);
  REQUIRE(net.w_bias.size() == 4);
  REQUIRE(net.w_alpha[0].rows() == 4);   // signal dim
  REQUIRE(net.w_alpha[0].cols() == 4);   // n_0
  REQUIRE(net.w_alpha[3].cols() == 14);  // n_3
  REQUIRE(net.w_bias[3].cols() == 16);   // n_4
  REQUIRE_THROWS_AS(init_neuromod({4}, chain, rng), std::invalid_argument);
}

TEST_CASE("zero context yields the neutral modulation point") {
  Rng rng(13);
  const std::vector<int> topo{1, 2, 2, 2};
  const std::vector<int> chain{2, 18, 36};
  const NeuromodNet net = init_neuromod(topo, chain, rng);
  const Eigen::VectorXd s =
      modulation_signal(net, Eigen::VectorXd::Zero(1), nullptr);
  REQUIRE(s.isZero(0.0));  // zero biases, zero input, silu(0) = 0
  Eigen::VectorXd alpha, bias;
  const Eigen::VectorXd base = Eigen::VectorXd::Constant(18, 0.25);
  layer_parameters(net, s, 1, base, alpha, bias, nullptr);
  const double mid = 0.5 * (net.alpha_min + net.alpha_max);
  for (int i = 0; i < alpha.size(); ++i) {
    REQUIRE_THAT(alpha[i], Catch::Matchers::WithinAbs(mid, 1e-15));
  }
  REQUIRE((bias - base).isZero(0.0));
}

TEST_CASE("modulated angles stay inside their open interval") {
  Rng rng(14);
  const std::vector<int> topo{1, 2, 2, 2};
  const std::vector<int> chain{2, 18, 36};
  const NeuromodNet net = init_neuromod(topo, chain, rng);
  for (double c : {-50.0, -3.0, 0.4, 7.7, 90.0}) {
    const Eigen::VectorXd s =
        modulation_signal(net, Eigen::VectorXd::Constant(1, c), nullptr);
    for (int l = 1; l <= 2; ++l) {
      Eigen::VectorXd alpha, bias;
      const Eigen::VectorXd base = Eigen::VectorXd::Zero(chain[l]);
      layer_parameters(net, s, l, base, alpha, bias, nullptr);
      for (int i = 0; i < alpha.size(); ++i) {
        REQUIRE(alpha[i] > 0.0);
        REQUIRE(alpha[i] < kPi4);
      }
    }
  }
  REQUIRE_THROWS_AS(modulation_signal(net, Eigen::VectorXd::Zero(3), nullptr),
                    std::invalid_argument);
  Eigen::VectorXd alpha, bias;
  REQUIRE_THROWS_AS(layer_parameters(net, Eigen::VectorXd::Zero(2), 5,
                                     Eigen::VectorXd::Zero(36), alpha, bias,
                                     nullptr),
                    std::out_of_range);
}
