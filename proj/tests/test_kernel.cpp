#include "kslab/kernel.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <random>

#include "testing.hpp"

using namespace kslab;

namespace {

SystemParams canonical() { return SystemParams{}; }

// Reference field for the datum min{1, e^{-kappa x}} extended by its own
// tails: constant 1 on the left, rate-kappa decay on the right.  Splitting
// the two-sided kernel integral at 0 and at x gives, for x >= 0,
//   psi = mu B [ e^{-l1 x}/l1 + (e^{-k x} - e^{-l1 x})/(l1 - k)
//                + e^{-k x}/(l2 + k) ]
// and for x < 0
//   psi = mu B [ 1/l1 + (1 - e^{l2 x})/l2 + e^{l2 x}/(l2 + k) ].
double ramp_field_exact(double x, double kappa, const SystemParams& p, const DecayRates& r) {
  if (x >= 0.0) {
    return p.mu * r.B *
           (std::exp(-r.lambda1 * x) / r.lambda1 +
            (std::exp(-kappa * x) - std::exp(-r.lambda1 * x)) / (r.lambda1 - kappa) +
            std::exp(-kappa * x) / (r.lambda2 + kappa));
  }
  return p.mu * r.B *
         (1.0 / r.lambda1 + (1.0 - std::exp(r.lambda2 * x)) / r.lambda2 +
          std::exp(r.lambda2 * x) / (r.lambda2 + kappa));
}

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double eps, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double flo = f(lo), fmid = f(mid), fhi = f(hi);
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double a, double b, double fa, double fm, double fb, double whole, int d) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = f(lm), frm = f(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * eps)
          return left + right + (left + right - whole) / 15.0;
        return rec(a, m, fa, flm, fm, left, d - 1) + rec(m, b, fm, frm, fb, right, d - 1);
      };
  const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  return rec(lo, hi, flo, fmid, fhi, whole, depth);
}

// Independent representation of the chemical field driven by a Gaussian:
// integrate the damped drift-diffusion semigroup against time.  A Gaussian
// stays Gaussian under the semigroup, so the integrand is explicit.
double semigroup_field(double x, double sigma, const SystemParams& p, double c) {
  auto integrand = [&](double s) {
    const double var = sigma * sigma + 2.0 * s;
    const double y = x + p.tau * c * s;
    return std::exp(-p.lambda * s) * sigma / std::sqrt(var) * std::exp(-y * y / (2.0 * var));
  };
  return p.mu * adaptive_simpson(integrand, 0.0, 32.0 / p.lambda, 1e-10, 40);
}

void testConstantDatum() {
  std::cout << "Testing constant datum (field mu*M/lambda)..." << std::endl;
  SystemParams p = canonical();
  p.lambda = 2.5;
  const double M = 1.7;
  auto u = sample(-20.0, 20.0, 801, [&](double) { return M; });
  const PsiField f = psi_field(u, TailModel::constant(M), p, 2.5);
  const double ref = p.mu * M / p.lambda;
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(std::abs(f.psi[i] - ref) <= 1e-12 * ref);
    CHECK(std::abs(f.psi_x[i]) <= 1e-12);
    CHECK(std::abs(f.psi_xx[i]) <= 1e-11);
  }
}

void testExponentialDatumExact() {
  std::cout << "Testing front-like datum against the exact field..." << std::endl;
  const double kappa = 0.1;
  struct Case {
    SystemParams p;
    double c;
  };
  SystemParams other = canonical();
  other.lambda = 2.0;
  other.tau = 1.5;
  const Case cases[] = {{canonical(), 2.5}, {other, 2.0}};
  for (const Case& cs : cases) {
    const DecayRates r = decay_rates(cs.p, cs.c);
    auto u = sample(-6.0, 6.0, 8193,
                    [&](double x) { return std::min(1.0, std::exp(-kappa * x)); });
    const PsiField f = psi_field(u, TailModel::front(1.0, kappa), cs.p, cs.c);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      worst = std::max(worst, std::abs(f.psi[i] - ramp_field_exact(u.x(i), kappa, cs.p, r)));
    CHECK(worst <= 1e-8);
  }
}

void testLinearityAndSigns() {
  std::cout << "Testing linearity, positivity, and monotonicity..." << std::endl;
  SystemParams p = canonical();
  const double c = 1.3;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto u = sample(-8.0, 8.0, 401, [&](double) { return U(rng); });
  auto v = sample(-8.0, 8.0, 401, [&](double) { return U(rng); });

  // Zero datum gives the zero field exactly.
  auto z = make_grid(-8.0, 8.0, 401);
  const PsiField fz = psi_field(z, TailModel::zero(), p, c);
  CHECK(sup_norm(fz.psi) == 0.0);
  CHECK(sup_norm(fz.psi_x) == 0.0);

  // psi[2u + 3v] = 2 psi[u] + 3 psi[v].
  GridFunction w = u;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 2.0 * u[i] + 3.0 * v[i];
  const GridFunction pu = psi(u, TailModel::zero(), p, c);
  const GridFunction pv = psi(v, TailModel::zero(), p, c);
  const GridFunction pw = psi(w, TailModel::zero(), p, c);
  double worst = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    worst = std::max(worst, std::abs(pw[i] - 2.0 * pu[i] - 3.0 * pv[i]));
  CHECK(worst <= 1e-12);

  // Nonnegative datum, nonnegative field; adding mass never lowers it.
  CHECK(min_value(pu) >= 0.0);
  GridFunction bigger = u;
  for (std::size_t i = 0; i < bigger.size(); ++i)
    bigger[i] += 0.5 * (1.0 + std::sin(0.3 * bigger.x(i)));
  const GridFunction pb = psi(bigger, TailModel::zero(), p, c);
  for (std::size_t i = 0; i < pb.size(); ++i) CHECK(pb[i] >= pu[i] - 1e-12);
}

void testGradientBound() {
  std::cout << "Testing the gradient bound |psi_x| <= lambda1 * psi..." << std::endl;
  SystemParams p = canonical();
  const double c = 2.5;
  const DecayRates r = decay_rates(p, c);
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = -HUGE_VAL;
  for (int k = 0; k < 20; ++k) {
    auto u = sample(-10.0, 10.0, 513, [&](double) { return U(rng); });
    const PsiField f = psi_field(u, TailModel::zero(), p, c);
    for (std::size_t i = 0; i < u.size(); ++i)
      worst = std::max(worst, std::abs(f.psi_x[i]) - r.lambda1 * f.psi[i]);
  }
  CHECK(worst <= 1e-12);
}

void testEllipticResidualConvergence() {
  std::cout << "Testing second-order decay of the elliptic residual..." << std::endl;
  SystemParams p = canonical();
  const double c = 2.5;
  auto residual = [&](std::size_t n) {
    auto u = sample(-20.0, 20.0, n, [](double x) { return std::exp(-x * x / 8.0); });
    const PsiField f = psi_field(u, TailModel::zero(), p, c);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
      const double pxx = (f.psi[i - 1] - 2.0 * f.psi[i] + f.psi[i + 1]) / (u.dx * u.dx);
      const double px = (f.psi[i + 1] - f.psi[i - 1]) / (2.0 * u.dx);
      worst = std::max(worst,
                       std::abs(pxx + p.tau * c * px - p.lambda * f.psi[i] + p.mu * u[i]));
    }
    return worst;
  };
  const double ratio = residual(1025) / residual(2049);
  CHECK(std::abs(ratio - 4.0) <= 0.6);

  // The reconstructed second derivative is consistent with the centered
  // stencil of psi at the same second-order rate.
  auto recon = [&](std::size_t n) {
    auto u = sample(-20.0, 20.0, n, [](double x) { return std::exp(-x * x / 8.0); });
    const PsiField f = psi_field(u, TailModel::zero(), p, c);
    const GridFunction pxx2 = psi_xx_from_identity(f.psi, f.psi_x, u, p, c);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
      const double pxx = (f.psi[i - 1] - 2.0 * f.psi[i] + f.psi[i + 1]) / (u.dx * u.dx);
      worst = std::max(worst, std::abs(pxx - pxx2[i]));
    }
    // The one-pass field and the identity route agree with each other first.
    for (std::size_t i = 0; i < u.size(); ++i)
      CHECK(std::abs(f.psi_xx[i] - pxx2[i]) <= 1e-12);
    return worst;
  };
  const double ratio2 = recon(1025) / recon(2049);
  CHECK(std::abs(ratio2 - 4.0) <= 0.6);
}

void testSemigroupOracle() {
  std::cout << "Testing against the damped-semigroup representation..." << std::endl;
  SystemParams p = canonical();
  const double c = 2.5;
  const double sigma = 2.0;
  auto u = sample(-40.0, 40.0, 4097,
                  [&](double x) { return std::exp(-x * x / (2.0 * sigma * sigma)); });
  const GridFunction field = psi(u, TailModel::zero(), p, c);
  for (double x : {-1.0, 0.7, 2.3}) {
    const double ref = semigroup_field(x, sigma, p, c);
    CHECK(std::abs(field.at(x) - ref) <= 5e-5);
  }
}

void testSuperSolutionCertificate() {
  std::cout << "Testing the drift-functional certificate..." << std::endl;
  SystemParams p = canonical();
  {
    // kappa = 0: constant state at the cap; the functional vanishes and the
    // bound reduces to chi*mu*M.
    const double M = p.uniform_bound();
    auto u = sample(-15.0, 15.0, 601, [&](double) { return M; });
    const SuperSolutionCheck sc =
        super_solution_check(u, TailModel::constant(M), p, 2.5, 0.0, M);
    CHECK(sc.certified);
    CHECK(sc.max_excess <= 1e-12);
    CHECK_NEAR(sc.bound[0], p.chi * p.mu * M, 1e-12);
    CHECK(sup_norm(sc.functional) <= 1e-10);
  }
  {
    // Wave-construction setting: envelope min{M, M e^{-kappa x}} at the decay
    // rate of speed c = 2.5.
    const double c = 2.5;
    const double kappa = kappa_of_speed(p.a, c);
    const double M = p.uniform_bound();
    auto u = sample(-30.0, 50.0, 2049,
                    [&](double x) { return M * std::min(1.0, std::exp(-kappa * x)); });
    const SuperSolutionCheck sc =
        super_solution_check(u, TailModel::front(M, kappa), p, c, kappa, M);
    CHECK(sc.certified);
    CHECK(sc.max_excess <= sc.slack);
  }
  {
    // Any admissible datum below the envelope stays certified.
    const double c = 3.0;
    const double kappa = kappa_of_speed(p.a, c);
    const double M = 1.2;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
      auto u = sample(-20.0, 40.0, 1025, [&](double x) {
        return M * std::exp(-kappa * std::max(0.0, x)) * U(rng);
      });
      const SuperSolutionCheck sc = super_solution_check(u, TailModel::zero(), p, c, kappa, M);
      CHECK(sc.certified);
    }
  }
  {
    // Precondition violations.
    const double c = 2.5;
    const double kappa = kappa_of_speed(p.a, c);
    auto u = sample(-10.0, 10.0, 401,
                    [&](double x) { return std::min(1.0, std::exp(-kappa * x)); });
    CHECK_THROWS(super_solution_check(u, TailModel::front(1.0, kappa), p, c, kappa, 0.5),
                 ConfigError);  // datum pokes through the envelope
    CHECK_THROWS(super_solution_check(u, TailModel::constant(1.0), p, c, kappa, 1.0),
                 ConfigError);  // constant right tail cannot decay
    CHECK_THROWS(
        super_solution_check(u, TailModel::front(1.0, 0.5 * kappa), p, c, kappa, 1.0),
        ConfigError);  // right tail flatter than the envelope
    CHECK_THROWS(super_solution_check(u, TailModel::front(1.0, kappa), p, c, -0.1, 1.0),
                 ConfigError);  // negative decay rate
    CHECK_THROWS(super_solution_check(u, TailModel::front(1.0, kappa), p, c, kappa, 0.0),
                 ConfigError);  // empty envelope
    GridFunction neg = u;
    neg[5] = -1e-3;
    CHECK_THROWS(super_solution_check(neg, TailModel::front(1.0, kappa), p, c, kappa, 1.0),
                 ConfigError);  // negative density
  }
}

void testInputGuards() {
  std::cout << "Testing kernel input guards..." << std::endl;
  SystemParams p = canonical();
  auto u = sample(0.0, 20.0, 201, [](double) { return 1.0; });
  GridFunction neg = u;
  neg[3] = -0.5;
  CHECK_THROWS(psi(neg, TailModel::zero(), p, 1.0), ConfigError);

  // Coarse grid against a steep kernel: dx*lambda1 beyond the resolvable
  // range must be rejected rather than silently losing the recurrence.
  SystemParams stiff = canonical();
  stiff.lambda = 1e6;  // lambda1 ~ 1000, dx = 0.1 -> dx*lambda1 = 100
  CHECK_THROWS(psi(u, TailModel::zero(), stiff, 1.0), ConfigError);

  GridFunction bad = u;
  bad.values[7] = std::nan("");
  CHECK_THROWS(psi(bad, TailModel::zero(), p, 1.0), ConfigError);
}

}  // namespace

int main() {
  testConstantDatum();
  testExponentialDatumExact();
  testLinearityAndSigns();
  testGradientBound();
  testEllipticResidualConvergence();
  testSemigroupOracle();
  testSuperSolutionCertificate();
  testInputGuards();
  return test_summary("chemical kernel");
}
