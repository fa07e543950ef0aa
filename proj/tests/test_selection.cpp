#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mlpsel/errors.hpp"
#include "mlpsel/selection.hpp"

using namespace mlpsel;

namespace {

const std::vector<long long> kGrid{10, 100, 1000, 10000, 100000, 1000000};
const std::vector<std::pair<int, int>> kPairs{{2, 1}, {3, 2}, {4, 3}, {4, 1}};

FitResult fake_fit(int k, double loglik) {
  FitResult r;
  r.k = k;
  r.loglik = loglik;
  return r;
}

}  // namespace

TEST_CASE("penalty values") {
  CHECK(penalty_eval(PenaltySpec::bic(), 100, 2, 1) == doctest::Approx(3.5 * std::log(100.0)).epsilon(1e-15));
  CHECK(penalty_eval(PenaltySpec::bic(), 100, 2, 1) == doctest::Approx(16.1181).epsilon(1e-5));
  for (long long n : {1LL, 10LL, 5000LL}) CHECK(penalty_eval(PenaltySpec::aic_like(), n, 1, 1) == 4.0);
  CHECK(penalty_eval(PenaltySpec::custom(2.0, 0.5), 400, 1, 2) == doctest::Approx(2.0 * 5 * 20).epsilon(1e-15));
  CHECK(penalty_eval(PenaltySpec::bic(), 1, 3, 2) == 0.0);
}

TEST_CASE("bic is increasing in k") {
  for (long long n : {10LL, 100LL, 10000LL})
    for (int d = 1; d <= 3; ++d)
      for (int k = 1; k < 10; ++k)
        CHECK(penalty_eval(PenaltySpec::bic(), n, k + 1, d) > penalty_eval(PenaltySpec::bic(), n, k, d));
}

TEST_CASE("penalty spec validation") {
  CHECK_THROWS_AS(PenaltySpec::custom(0.0, 0.5).validate(), ConfigError);
  CHECK_THROWS_AS(PenaltySpec::custom(1.0, -0.1).validate(), ConfigError);
  CHECK_NOTHROW(PenaltySpec::custom(1.0, 1.0).validate());
  CHECK_THROWS_AS(penalty_eval(PenaltySpec::bic(), 0, 1, 1), InvalidInput);
  CHECK_THROWS_AS(penalty_eval(PenaltySpec::bic(), 10, 0, 1), InvalidInput);
  CHECK(PenaltySpec::bic().name() == "bic");
  CHECK(PenaltySpec::aic_like().name() == "aic_like");
}

TEST_CASE("select arithmetic") {
  const std::vector<double> ll{-150.0, -100.0, -99.0};

  // d = 1: aic_like penalties 4, 7, 10 give T = (-154, -107, -109).
  const SelectionResult sel = select(ll, PenaltySpec::aic_like(), 100, 1);
  CHECK(sel.k_hat == 2);
  REQUIRE(sel.table.size() == 3);
  CHECK(sel.table[1].criterion == -107.0);
  CHECK(sel.table[2].penalty == 10.0);
  CHECK(sel.n == 100);

  const SelectionResult tie = select(std::vector<double>{-4.0, -1.0, 2.0}, PenaltySpec::aic_like(), 100, 1);
  CHECK(tie.table[0].criterion == tie.table[1].criterion);
  CHECK(tie.k_hat == 1);

  CHECK_THROWS_AS(select(std::vector<double>{}, PenaltySpec::bic(), 10, 1), InvalidInput);
}

TEST_CASE("select from profiles in any order") {
  std::vector<FitResult> profile{fake_fit(1, -150), fake_fit(2, -100), fake_fit(3, -99), fake_fit(4, -98.5)};
  const int base = select(profile, PenaltySpec::bic(), 200, 1).k_hat;
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(profile.begin(), profile.end(), rng);
    CHECK(select(profile, PenaltySpec::bic(), 200, 1).k_hat == base);
  }
  CHECK_THROWS_AS(select(std::vector<FitResult>{fake_fit(1, 0), fake_fit(3, 0)}, PenaltySpec::bic(), 10, 1),
                  InvalidInput);
}

TEST_CASE("select ignores a common shift of the log-likelihoods") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z(0.0, 20.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> ll(5);
    for (double& v : ll) v = z(rng);
    const double shift = z(rng) * 100.0;
    std::vector<double> shifted = ll;
    for (double& v : shifted) v += shift;
    for (const auto& spec : {PenaltySpec::bic(), PenaltySpec::aic_like()})
      CHECK(select(ll, spec, 1000, 2).k_hat == select(shifted, spec, 1000, 2).k_hat);
  }
}

TEST_CASE("penalty condition verdicts") {
  const H4Report bic = check_H4(PenaltySpec::bic(), 1, kPairs, kGrid);
  CHECK(bic.monotone.passed);
  CHECK(bic.divergence.passed);
  CHECK(bic.sublinear.passed);
  CHECK(bic.passed);
  CHECK_FALSE(bic.monotone.heuristic);
  CHECK(bic.divergence.heuristic);
  CHECK(bic.sublinear.heuristic);

  const H4Report aic = check_H4(PenaltySpec::aic_like(), 1, kPairs, kGrid);
  CHECK(aic.monotone.passed);
  CHECK_FALSE(aic.divergence.passed);
  CHECK(aic.sublinear.passed);
  CHECK_FALSE(aic.passed);

  const H4Report linear = check_H4(PenaltySpec::custom(1.0, 1.0), 1, kPairs, kGrid);
  CHECK(linear.monotone.passed);
  CHECK(linear.divergence.passed);
  CHECK_FALSE(linear.sublinear.passed);
  CHECK_FALSE(linear.passed);

  CHECK(check_H4(PenaltySpec::custom(1.0, 0.5), 1, kPairs, kGrid).passed);
}

TEST_CASE("bic passes the penalty conditions in every dimension") {
  for (int d = 1; d <= 10; ++d) CHECK(check_H4(PenaltySpec::bic(), d, kPairs, kGrid).passed);
}

TEST_CASE("penalty check grid requirements") {
  CHECK_THROWS_AS(check_H4(PenaltySpec::bic(), 1, kPairs, {10, 100, 1000}), InvalidInput);
  CHECK_THROWS_AS(check_H4(PenaltySpec::bic(), 1, kPairs, {10, 20, 30, 40}), InvalidInput);
  CHECK_THROWS_AS(check_H4(PenaltySpec::bic(), 1, kPairs, {10, 100, 50, 10000}), InvalidInput);
  CHECK_THROWS_AS(check_H4(PenaltySpec::bic(), 1, {{1, 2}}, kGrid), InvalidInput);
  CHECK_NOTHROW(check_H4(PenaltySpec::bic(), 1, kPairs, {10, 100, 1000, 10000}));
}
