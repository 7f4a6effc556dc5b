#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "elicit/family.hpp"
#include "elicit/quadrature.hpp"
#include "oracle.hpp"

using namespace elicit;

namespace {

Hyper alpha_hyper(std::vector<double> alpha) {
  DirichletHyper d;
  d.alpha = std::move(alpha);
  return d.as_hyper();
}

// Random reachable hyper built by updating the prior on a random multiset.
Hyper random_reachable(const FamilySpec& spec, const Hyper& prior, std::mt19937& gen, int max_n = 25) {
  oracle::McSampler mc(gen());
  Hyper h = prior;
  int count = std::uniform_int_distribution<int>(0, max_n)(gen);
  std::vector<double> theta;
  switch (spec.family) {
    case Family::normal_known_var: theta = {mc.normal(prior.nu[0] / prior.n, 1.0)}; break;
    case Family::poisson_gamma: theta = {mc.gamma(prior.nu[0], prior.n)}; break;
    case Family::uniform_pareto: theta = {mc.pareto(prior.nu[0], prior.n)}; break;
    default: theta = mc.dirichlet(prior.nu); break;
  }
  for (int i = 0; i < count; ++i) {
    double x = 0.0;
    switch (spec.family) {
      case Family::normal_known_var: x = mc.normal(theta[0], std::sqrt(spec.sigma2)); break;
      case Family::poisson_gamma: x = mc.poisson(theta[0]); break;
      case Family::uniform_pareto: x = mc.uniform(0.0, theta[0]); break;
      default: x = mc.categorical(theta); break;
    }
    h = posterior_update(spec, h, x);
  }
  return h;
}

}  // namespace

TEST_CASE("single-observation updates") {
  auto poisson = FamilySpec::poisson_gamma();
  Hyper h = posterior_update(poisson, scalar_hyper(2, 1), 3.0);
  CHECK(h.nu[0] == 5.0);
  CHECK(h.n == 2.0);

  auto uniform = FamilySpec::uniform_pareto();
  h = posterior_update(uniform, scalar_hyper(4.0, 3), 7.5);
  CHECK(h.nu[0] == 7.5);
  CHECK(h.n == 4.0);
  h = posterior_update(uniform, scalar_hyper(4.0, 3), 2.0);  // below the running max
  CHECK(h.nu[0] == 4.0);

  auto cat = FamilySpec::categorical_dirichlet(3);
  h = posterior_update(cat, alpha_hyper({1, 1, 1}), 2.0);
  CHECK(h.nu == std::vector<double>{1, 2, 1});
  CHECK(h.n == 4.0);
}

TEST_CASE("batch updates") {
  auto poisson = FamilySpec::poisson_gamma();
  Hyper h = batch_update(poisson, scalar_hyper(1, 1), {Family::poisson_gamma, {2, 0, 4}});
  CHECK(h.nu[0] == 7.0);
  CHECK(h.n == 4.0);

  auto normal = FamilySpec::normal_known_var(1.0);
  h = batch_update(normal, scalar_hyper(0, 1), {Family::normal_known_var, {1.0, 3.0}});
  CHECK(h.nu[0] == 4.0);
  CHECK(h.n == 3.0);

  auto uniform = FamilySpec::uniform_pareto();
  h = batch_update(uniform, scalar_hyper(2, 3), {Family::uniform_pareto, {1.0, 9.0, 4.0}});
  CHECK(h.nu[0] == 9.0);
  CHECK(h.n == 6.0);
}

TEST_CASE("outcome and hyper validation") {
  auto poisson = FamilySpec::poisson_gamma();
  CHECK_THROWS_AS(posterior_update(poisson, scalar_hyper(1, 1), -1.0), std::domain_error);
  CHECK_THROWS_AS(posterior_update(poisson, scalar_hyper(1, 1), 2.5), std::domain_error);

  auto cat = FamilySpec::categorical_dirichlet(3);
  CHECK_THROWS_AS(posterior_update(cat, alpha_hyper({1, 1, 1}), 4.0), std::domain_error);
  CHECK_THROWS_AS(posterior_update(cat, alpha_hyper({1, 1, 1}), 0.0), std::domain_error);

  CHECK_THROWS_AS(validate_hyper(poisson, scalar_hyper(1, -1)), std::invalid_argument);
  CHECK_THROWS_AS(validate_hyper(poisson, scalar_hyper(-1, 1)), std::invalid_argument);
  Hyper bad = alpha_hyper({1, 1});
  bad.n = 3.0;  // disagrees with the pseudo-count total
  CHECK_THROWS_AS(validate_hyper(FamilySpec::categorical_dirichlet(2), bad), std::invalid_argument);
}

TEST_CASE("predictive mass examples") {
  auto cat = FamilySpec::categorical_dirichlet(3);
  CHECK(ppd_density(cat, alpha_hyper({8, 8, 4}), 1.0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(ppd_density(cat, alpha_hyper({8, 8, 4}), 3.0) == doctest::Approx(0.2).epsilon(1e-14));
  for (double x : {1.0, 2.0, 3.0})
    CHECK(ppd_density(cat, alpha_hyper({1, 1, 1}), x) == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("predictive density against quadrature oracles") {
  auto poisson = FamilySpec::poisson_gamma();
  for (long x : {0L, 1L, 3L, 7L}) {
    double got = ppd_density(poisson, scalar_hyper(2, 1), x);
    double want = oracle::poisson_ppd_quadrature(2.0, 1.0, x);
    CHECK(got == doctest::Approx(want).epsilon(1e-8));
  }

  auto normal = FamilySpec::normal_known_var(1.0);
  for (double x : {-1.0, 0.0, 0.7, 2.5}) {
    double got = ppd_density(normal, scalar_hyper(5, 5), x);
    double want = oracle::normal_ppd_quadrature(5.0, 5.0, 1.0, x);
    CHECK(got == doctest::Approx(want).epsilon(1e-8));
  }

  // The mixture form of the uniform predictive is derived, so pin it to the
  // integral it must equal before trusting it anywhere else.
  auto uniform = FamilySpec::uniform_pareto();
  for (double x : {0.5, 2.0, 3.9, 4.1, 9.0}) {
    double got = ppd_density(uniform, scalar_hyper(4, 4), x);
    double want = oracle::uniform_ppd_quadrature(4.0, 4.0, x);
    CHECK(got == doctest::Approx(want).epsilon(1e-7));
  }
}

TEST_CASE("predictive moments") {
  auto poisson = FamilySpec::poisson_gamma();
  auto m = ppd_moments(poisson, scalar_hyper(6, 3), 2);
  CHECK(m[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m[1] == doctest::Approx(20.0 / 3).epsilon(1e-14));

  auto uniform = FamilySpec::uniform_pareto();
  m = ppd_moments(uniform, scalar_hyper(4, 4), 2);
  CHECK(m[0] == doctest::Approx(16.0 / 6).epsilon(1e-14));
  CHECK(m[1] == doctest::Approx(64.0 / 6).epsilon(1e-14));
  CHECK_THROWS_AS(ppd_moments(uniform, scalar_hyper(4, 2), 2), std::domain_error);
  CHECK_THROWS_AS(ppd_moments(uniform, scalar_hyper(4, 1), 1), std::domain_error);

  auto normal = FamilySpec::normal_known_var(1.0);
  CHECK(ppd_moments(normal, scalar_hyper(0, 1), 1)[0] == 0.0);
  CHECK_THROWS_AS(ppd_moments(normal, scalar_hyper(0, 1), 3), std::invalid_argument);
}

TEST_CASE("update commutativity and consistency") {
  std::mt19937 gen(7);
  auto specs = {FamilySpec::normal_known_var(1.0), FamilySpec::poisson_gamma(),
                FamilySpec::uniform_pareto(), FamilySpec::categorical_dirichlet(3)};
  for (const auto& spec : specs) {
    Hyper prior = spec.categorical() ? alpha_hyper({1, 1, 1})
                  : spec.family == Family::uniform_pareto ? scalar_hyper(2, 3)
                                                          : scalar_hyper(1, 1);
    for (int rep = 0; rep < 30; ++rep) {
      oracle::McSampler mc(gen());
      SampleSet xs{spec.family, {}};
      int count = std::uniform_int_distribution<int>(0, 12)(gen);
      for (int i = 0; i < count; ++i) {
        switch (spec.family) {
          case Family::normal_known_var: xs.values.push_back(mc.normal(0, 2)); break;
          case Family::poisson_gamma: xs.values.push_back(mc.poisson(3.0)); break;
          case Family::uniform_pareto: xs.values.push_back(mc.uniform(0, 8)); break;
          default: xs.values.push_back(mc.categorical({0.5, 0.3, 0.2})); break;
        }
      }
      Hyper a = batch_update(spec, prior, xs);
      SampleSet shuffled = xs;
      std::shuffle(shuffled.values.begin(), shuffled.values.end(), gen);
      Hyper b = batch_update(spec, prior, shuffled);
      if (spec.integer_statistic()) {
        CHECK(a.nu == b.nu);
        CHECK(a.n == b.n);
      } else {
        CHECK(a.nu[0] == doctest::Approx(b.nu[0]).epsilon(1e-12));
        CHECK(a.n == b.n);
      }

      // Splitting the multiset and updating in two stages lands on the same
      // hyper, max rule included.
      size_t cut = xs.values.size() / 2;
      SampleSet first{spec.family, {xs.values.begin(), xs.values.begin() + cut}};
      SampleSet second{spec.family, {xs.values.begin() + cut, xs.values.end()}};
      Hyper c = batch_update(spec, batch_update(spec, prior, first), second);
      CHECK(c.n == a.n);
      for (size_t i = 0; i < a.nu.size(); ++i)
        CHECK(c.nu[i] == doctest::Approx(a.nu[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("predictive normalization") {
  std::mt19937 gen(11);
  auto cat = FamilySpec::categorical_dirichlet(4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> alpha(4);
    for (double& a : alpha) a = std::uniform_int_distribution<int>(1, 20)(gen);
    Hyper h = alpha_hyper(alpha);
    double total = 0.0;
    for (int x = 1; x <= 4; ++x) total += ppd_density(cat, h, x);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }

  auto poisson = FamilySpec::poisson_gamma();
  for (int rep = 0; rep < 20; ++rep) {
    Hyper h = scalar_hyper(std::uniform_real_distribution<double>(0.5, 20)(gen),
                           std::uniform_real_distribution<double>(0.5, 10)(gen));
    double total = 0.0;
    for (int x = 0; x < 100000 && total < 1.0 - 1e-10; ++x) total += ppd_density(poisson, h, x);
    CHECK(total >= 1.0 - 1e-10);
    CHECK(total <= 1.0 + 1e-9);
  }

  auto normal = FamilySpec::normal_known_var(1.0);
  Hyper h = scalar_hyper(3, 4);
  double mass = integrate([&](double x) { return ppd_density(normal, h, x); }, 3.0 / 4 - 14, 3.0 / 4 + 14);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

  auto uniform = FamilySpec::uniform_pareto();
  h = scalar_hyper(4, 4);
  // Split at the kink; map the tail to a bounded interval.
  double head = integrate([&](double x) { return ppd_density(uniform, h, x); }, 0.0, 4.0);
  double tail = integrate(
      [&](double t) {
        if (t <= 0.0) return 0.0;
        double x = 4.0 / t;
        return ppd_density(uniform, h, x) * 4.0 / (t * t);
      },
      0.0, 1.0);
  CHECK(head + tail == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("moment-density agreement on random hypers") {
  std::mt19937 gen(13);
  for (int rep = 0; rep < 50; ++rep) {
    {
      auto spec = FamilySpec::poisson_gamma();
      Hyper h = scalar_hyper(std::uniform_real_distribution<double>(1.0, 25)(gen),
                             std::uniform_real_distribution<double>(1.0, 8)(gen));
      auto m = ppd_moments(spec, h, 2);
      double m1 = 0, m2 = 0, cum = 0;
      for (long x = 0; x < 200000 && cum < 1.0 - 1e-13; ++x) {
        double p = ppd_density(spec, h, x);
        cum += p;
        m1 += x * p;
        m2 += double(x) * x * p;
      }
      CHECK(m[0] == doctest::Approx(m1).epsilon(1e-6));
      CHECK(m[1] == doctest::Approx(m2).epsilon(1e-6));
    }
    {
      auto spec = FamilySpec::normal_known_var(1.0);
      Hyper h = scalar_hyper(std::uniform_real_distribution<double>(-10, 10)(gen),
                             std::uniform_real_distribution<double>(0.5, 20)(gen));
      auto m = ppd_moments(spec, h, 2);
      double mean = h.nu[0] / h.n, sd = std::sqrt(1.0 + 1.0 / h.n);
      double m1 = integrate([&](double x) { return x * ppd_density(spec, h, x); }, mean - 14 * sd,
                            mean + 14 * sd, 1e-10);
      double m2 = integrate([&](double x) { return x * x * ppd_density(spec, h, x); }, mean - 14 * sd,
                            mean + 14 * sd, 1e-10);
      CHECK(m[0] == doctest::Approx(m1).epsilon(1e-6));
      CHECK(m[1] == doctest::Approx(m2).epsilon(1e-6));
    }
    {
      auto spec = FamilySpec::uniform_pareto();
      Hyper h = scalar_hyper(std::uniform_real_distribution<double>(0.5, 10)(gen),
                             std::uniform_real_distribution<double>(4.0, 25)(gen));
      auto m = ppd_moments(spec, h, 2);
      auto moment = [&](int k) {
        auto f = [&](double x) { return std::pow(x, k) * ppd_density(spec, h, x); };
        return oracle::simpson_halfline(f, h.nu[0]);
      };
      CHECK(m[0] == doctest::Approx(moment(1)).epsilon(1e-6));
      CHECK(m[1] == doctest::Approx(moment(2)).epsilon(1e-6));
    }
  }
}

TEST_CASE("scaled pseudo-counts share one predictive") {
  auto cat = FamilySpec::categorical_dirichlet(3);
  std::mt19937 gen(17);
  for (int rep = 0; rep < 40; ++rep) {
    std::vector<double> alpha(3);
    for (double& a : alpha) a = std::uniform_int_distribution<int>(1, 20)(gen);
    for (double c : {2.0, 3.0, 4.0, 0.5, 8.0}) {
      std::vector<double> scaled(3);
      for (int i = 0; i < 3; ++i) scaled[i] = c * alpha[i];
      for (double x : {1.0, 2.0, 3.0})
        CHECK(ppd_density(cat, alpha_hyper(alpha), x) == ppd_density(cat, alpha_hyper(scaled), x));
    }
  }
}

TEST_CASE("bernoulli_beta matches the two-outcome categorical") {
  auto bern = FamilySpec::bernoulli_beta();
  auto cat = FamilySpec::categorical_dirichlet(2);
  std::mt19937 gen(19);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> alpha = {std::uniform_real_distribution<double>(0.5, 9)(gen),
                                 std::uniform_real_distribution<double>(0.5, 9)(gen)};
    Hyper h = alpha_hyper(alpha);
    for (double x : {1.0, 2.0}) {
      CHECK(ppd_density(bern, h, x) == ppd_density(cat, h, x));
      Hyper a = posterior_update(bern, h, x), b = posterior_update(cat, h, x);
      CHECK(a.nu == b.nu);
      CHECK(a.n == b.n);
    }
    CHECK(ppd_moments(bern, h, 2) == ppd_moments(cat, h, 2));
  }
}

TEST_CASE("parameter and observation sampling statistics") {
  auto cat = FamilySpec::categorical_dirichlet(3);
  Rng rng(123);
  const int draws = 100000;
  std::vector<double> mean(3, 0.0);
  for (int i = 0; i < draws; ++i) {
    auto theta = sample_theta(cat, alpha_hyper({1, 1, 1}), rng);
    for (int j = 0; j < 3; ++j) mean[j] += theta[j] / draws;
  }
  for (int j = 0; j < 3; ++j) CHECK(mean[j] == doctest::Approx(1.0 / 3).epsilon(0.03));

  auto poisson = FamilySpec::poisson_gamma();
  double lambda_mean = 0.0;
  for (int i = 0; i < draws; ++i) lambda_mean += sample_theta(poisson, scalar_hyper(6, 3), rng)[0] / draws;
  CHECK(lambda_mean == doctest::Approx(2.0).epsilon(0.025));

  auto normal = FamilySpec::normal_known_var(1.0);
  oracle::Welford w;
  for (int i = 0; i < draws; ++i) w.add(sample_theta(normal, scalar_hyper(5, 5), rng)[0]);
  CHECK(w.mean == doctest::Approx(1.0).epsilon(0.02));
  CHECK(w.variance() == doctest::Approx(0.2).epsilon(0.05));

  for (int i = 0; i < 200; ++i) CHECK(sample_x(cat, {1.0, 0.0, 0.0}, rng) == 1.0);

  double pois_mean = 0.0;
  for (int i = 0; i < draws; ++i) pois_mean += sample_x(poisson, {2.0}, rng) / draws;
  CHECK(pois_mean == doctest::Approx(2.0).epsilon(0.025));

  auto uniform = FamilySpec::uniform_pareto();
  double umean = 0.0;
  for (int i = 0; i < draws; ++i) {
    double x = sample_x(uniform, {10.0}, rng);
    CHECK(x >= 0.0);
    CHECK(x <= 10.0);
    umean += x / draws;
  }
  CHECK(umean == doctest::Approx(5.0).epsilon(0.02));
}

TEST_CASE("random reachable hypers stay valid") {
  std::mt19937 gen(29);
  auto specs = {FamilySpec::normal_known_var(1.0), FamilySpec::poisson_gamma(),
                FamilySpec::uniform_pareto(), FamilySpec::bernoulli_beta()};
  for (const auto& spec : specs) {
    Hyper prior = spec.categorical() ? alpha_hyper({1, 1})
                  : spec.family == Family::uniform_pareto ? scalar_hyper(2, 3)
                  : spec.family == Family::poisson_gamma ? scalar_hyper(1, 1)
                                                         : scalar_hyper(0, 1);
    for (int rep = 0; rep < 20; ++rep) CHECK_NOTHROW(validate_hyper(spec, random_reachable(spec, prior, gen)));
  }
}
