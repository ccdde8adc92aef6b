#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "spatcov/models.hpp"

using namespace spatcov;

namespace {

// central finite difference with one Richardson step
double fd1(const IsotropicFamily& f, double t, double h) {
  const double a = (phi(f, t + h) - phi(f, t - h)) / (2.0 * h);
  const double b = (phi(f, t + 0.5 * h) - phi(f, t - 0.5 * h)) / h;
  return (4.0 * b - a) / 3.0;
}
double fd2(const IsotropicFamily& f, double t, double h) {
  const double a = (phi(f, t + h) - 2.0 * phi(f, t) + phi(f, t - h)) / (h * h);
  const double b =
      (phi(f, t + 0.5 * h) - 2.0 * phi(f, t) + phi(f, t - 0.5 * h)) / (0.25 * h * h);
  return (4.0 * b - a) / 3.0;
}

const std::vector<IsotropicFamily> all_families = {
    IsotropicFamily::matern(0.5),  IsotropicFamily::matern(1.0),
    IsotropicFamily::matern(1.5),  IsotropicFamily::matern(2.5),
    IsotropicFamily::cauchy(0.75), IsotropicFamily::cauchy(1.0),
    IsotropicFamily::cauchy(2.0),  IsotropicFamily::hypergeometric(3.0, 3.5, 6.0, 2),
    IsotropicFamily::cardinal_sine(), IsotropicFamily::gaussian()};

}  // namespace

TEST_CASE("family parameter validation") {
  CHECK_THROWS_AS(IsotropicFamily::matern(0.0), std::domain_error);
  CHECK_THROWS_AS(IsotropicFamily::cauchy(-1.0), std::domain_error);
  // 2 alpha <= d violates membership
  CHECK_THROWS_AS(IsotropicFamily::hypergeometric(1.0, 3.5, 6.0, 2), std::domain_error);
}

TEST_CASE("phi closed-form values") {
  CHECK(phi(IsotropicFamily::matern(0.5), 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(phi(IsotropicFamily::matern(1.5), 2.0) ==
        doctest::Approx(3.0 * std::exp(-2.0)).epsilon(1e-14));
  CHECK(phi(IsotropicFamily::cardinal_sine(), M_PI) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(phi(IsotropicFamily::cauchy(1.0), 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  const auto H = IsotropicFamily::hypergeometric(3.0, 3.5, 6.0, 2);
  CHECK(phi(H, 1.0) == 0.0);
  CHECK(phi(H, 3.7) == 0.0);
  CHECK(phi_normalized(H, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& f : all_families) {
    if (f.kind != FamilyKind::gauss_hypergeom) CHECK(phi(f, 0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(phi(f, -0.5), std::domain_error);
  }
  // general-nu branch continuous with the closed forms
  CHECK(phi(IsotropicFamily::matern(1.5 + 1e-9), 1.3) ==
        doctest::Approx(phi(IsotropicFamily::matern(1.5), 1.3)).epsilon(1e-7));
}

TEST_CASE("radial derivatives against finite differences") {
  for (const auto& f : all_families) {
    for (double t : {0.3, 0.7, 1.1, 2.4, 5.0}) {
      if (f.kind == FamilyKind::gauss_hypergeom && t > 0.95) continue;
      const double d1 = phi_d1(f, t);
      const double d2 = phi_d2(f, t);
      CHECK(d1 == doctest::Approx(fd1(f, t, 1e-4)).epsilon(1e-6));
      CHECK(d2 == doctest::Approx(fd2(f, t, 1e-3)).epsilon(1e-6));
      CHECK(phi_d1_over_t(f, t) == doctest::Approx(d1 / t).epsilon(1e-12));
    }
  }
}

TEST_CASE("derivative values at the origin") {
  CHECK(phi_d2(IsotropicFamily::cardinal_sine(), 0.0) == doctest::Approx(-1.0 / 3.0));
  for (double d : {0.75, 1.0, 2.0})
    CHECK(phi_d2(IsotropicFamily::cauchy(d), 0.0) == doctest::Approx(-2.0 * d));
  CHECK(phi_d2(IsotropicFamily::gaussian(), 0.0) == doctest::Approx(-2.0));
  // M_{3/2}''(t) = (t-1)e^{-t}
  CHECK(phi_d2(IsotropicFamily::matern(1.5), 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(phi_d2(IsotropicFamily::matern(1.5), 0.0) == doctest::Approx(-1.0));
  CHECK(phi_d2(IsotropicFamily::matern(2.5), 0.0) == doctest::Approx(-1.0 / 3.0));
  CHECK_THROWS_AS(phi_d2(IsotropicFamily::matern(0.5), 0.0), std::domain_error);
  CHECK_THROWS_AS(phi_d1(IsotropicFamily::matern(0.5), 0.0), std::domain_error);
  CHECK(phi_d1(IsotropicFamily::matern(1.5), 0.0) == 0.0);
  CHECK(phi_d1(IsotropicFamily::cardinal_sine(), 0.0) == doctest::Approx(0.0));
  // the t -> 0 limit of phi'/t is phi''(0)
  for (const auto& f : all_families) {
    if (f.kind == FamilyKind::matern && f.nu <= 1.0) continue;
    CHECK(phi_d1_over_t(f, 0.0) == doctest::Approx(phi_d2(f, 0.0)));
    CHECK(phi_d1_over_t(f, 1e-5) == doctest::Approx(phi_d2(f, 0.0)).epsilon(1e-4));
  }
}

TEST_CASE("family traits") {
  CHECK_FALSE(family_traits(IsotropicFamily::matern(0.5), 2).twice_differentiable_at_origin);
  CHECK(family_traits(IsotropicFamily::matern(1.5), 2).twice_differentiable_at_origin);
  CHECK(family_traits(IsotropicFamily::cauchy(1.0), 2).twice_differentiable_at_origin);
  CHECK(family_traits(IsotropicFamily::gaussian(), 2).twice_differentiable_at_origin);
  CHECK(family_traits(IsotropicFamily::cardinal_sine(), 2).twice_differentiable_at_origin);
  // H: 2 alpha > d + 2 needed
  CHECK(family_traits(IsotropicFamily::hypergeometric(3.0, 3.5, 6.0, 2), 2)
            .twice_differentiable_at_origin);
  CHECK_FALSE(family_traits(IsotropicFamily::hypergeometric(2.1, 3.5, 6.0, 3), 3)
                  .twice_differentiable_at_origin);

  CHECK(family_traits(IsotropicFamily::matern(0.5), 2).spectral_density_nonincreasing);
  CHECK(family_traits(IsotropicFamily::cauchy(1.0), 2).spectral_density_nonincreasing);
  CHECK_FALSE(family_traits(IsotropicFamily::cardinal_sine(), 2).spectral_density_nonincreasing);

  CHECK(family_traits(IsotropicFamily::cardinal_sine(), 2).has_spectral_density);
  CHECK_FALSE(family_traits(IsotropicFamily::cardinal_sine(), 3).has_spectral_density);
  CHECK(family_traits(IsotropicFamily::cardinal_sine(), 3).valid_in_dim);
  CHECK_FALSE(family_traits(IsotropicFamily::cardinal_sine(), 4).valid_in_dim);
  // Cauchy density requires delta > (d-1)/4
  CHECK_FALSE(family_traits(IsotropicFamily::cauchy(0.2), 2).has_spectral_density);
}

TEST_CASE("spectral densities: closed-form anchor points") {
  // Matern at omega = 0
  for (double nu : {0.5, 1.0, 1.5})
    for (int d : {1, 2, 3})
      CHECK(spectral_density(IsotropicFamily::matern(nu), d, 0.0) ==
            doctest::Approx(gamma_fn(nu + 0.5 * d) / (gamma_fn(nu) * std::pow(M_PI, 0.5 * d))));
  // 1D Cauchy(1) pair: f(omega) = e^{-omega}/2 pins the Fourier convention
  for (double w : {0.3, 1.0, 4.0})
    CHECK(spectral_density(IsotropicFamily::cauchy(1.0), 1, w) ==
          doctest::Approx(0.5 * std::exp(-w)).epsilon(1e-12));
  // wave: positive part
  CHECK(spectral_density(IsotropicFamily::cardinal_sine(), 2, 1.0) == 0.0);
  CHECK(spectral_density(IsotropicFamily::cardinal_sine(), 2, 3.0) == 0.0);
  CHECK(spectral_density(IsotropicFamily::cardinal_sine(), 1, 0.5) == doctest::Approx(0.5));
  // Gaussian self-transform
  for (int d : {1, 2, 3})
    for (double w : {0.0, 1.0, 5.0})
      CHECK(spectral_density(IsotropicFamily::gaussian(), d, w) ==
            doctest::Approx(std::pow(4.0 * M_PI, -0.5 * d) * std::exp(-0.25 * w * w)));
  CHECK_THROWS_AS(spectral_density(IsotropicFamily::cardinal_sine(), 3, 0.5),
                  std::domain_error);
  CHECK_THROWS_AS(spectral_density(IsotropicFamily::cauchy(1.0), 2, 0.0), std::domain_error);
  // delta > d/2: finite limit at omega = 0
  CHECK(std::isfinite(spectral_density(IsotropicFamily::cauchy(2.0), 2, 0.0)));
  CHECK(spectral_density(IsotropicFamily::cauchy(2.0), 2, 1e-8) ==
        doctest::Approx(spectral_density(IsotropicFamily::cauchy(2.0), 2, 0.0)).epsilon(1e-5));
}

TEST_CASE("spectral densities vs Hankel oracle (spot grid)") {
  struct Case {
    IsotropicFamily f;
    int d;
  };
  const std::vector<Case> cases = {{IsotropicFamily::matern(1.0), 2},
                                   {IsotropicFamily::matern(2.5), 3},
                                   {IsotropicFamily::cauchy(1.0), 2},
                                   {IsotropicFamily::gaussian(), 2},
                                   {IsotropicFamily::hypergeometric(3.0, 3.5, 6.0, 2), 2}};
  for (const auto& c : cases) {
    auto prof = [&](double t) { return phi(c.f, t); };
    const double trunc = c.f.kind == FamilyKind::gauss_hypergeom ? 1.5 : 200.0;
    for (double w : {0.05, 0.7, 3.0, 12.0}) {
      const double closed = spectral_density(c.f, c.d, w);
      const double oracle = hankel_spectral_oracle(prof, c.d, w, trunc);
      CHECK(closed == doctest::Approx(oracle).epsilon(1e-6));
    }
  }
  // wave in d = 2: absolute band away from the endpoint
  auto wave = [](double t) { return phi(IsotropicFamily::cardinal_sine(), t); };
  for (double w : {0.2, 0.6, 1.5, 4.0}) {
    const double closed = spectral_density(IsotropicFamily::cardinal_sine(), 2, w);
    const double oracle =
        hankel_spectral_oracle(wave, 2, w, 4000.0, 1e-10, 4000, M_PI / (1.0 + w));
    CHECK(std::abs(closed - oracle) < 1e-3);
  }
}

TEST_CASE("spectral density nonnegativity and monotone flags") {
  for (const auto& f : all_families) {
    for (int d : {1, 2, 3}) {
      if (!family_traits(f, d).has_spectral_density) continue;
      double prev = std::numeric_limits<double>::infinity();
      // the numeric monotonicity sweep covers the closed-form decreasing
      // densities; the hypergeometric flag is a parameter-range statement,
      // and its tail ripples at the same order as its algebraic decay
      bool monotone_claim = family_traits(f, d).spectral_density_nonincreasing &&
                            f.kind != FamilyKind::gauss_hypergeom;
      for (int i = 0; i <= 40; ++i) {
        const double w = std::pow(10.0, -2.0 + 3.3 * i / 40.0);  // 0.01 .. 20
        const double v = spectral_density(f, d, w);
        CHECK(v >= 0.0);
        if (monotone_claim) CHECK(v <= prev + 1e-12);
        prev = v;
      }
    }
  }
}

TEST_CASE("normalized profiles bounded") {
  for (const auto& f : all_families) {
    if (f.kind == FamilyKind::cardinal_sine) continue;
    for (int i = 0; i <= 200; ++i) {
      const double t = 100.0 * i / 200.0;
      CHECK(std::abs(phi_normalized(f, t)) <= 1.0 + 1e-12);
    }
  }
  // cardinal sine bounded below by the Omega_3 minimum
  for (int i = 0; i <= 2000; ++i)
    CHECK(phi(IsotropicFamily::cardinal_sine(), 100.0 * i / 2000.0) >= -0.218);
}
