#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "twfe/error.hpp"
#include "twfe/regression.hpp"

using namespace twfe;
using doctest::Approx;

TEST_CASE("two-by-three residuals and coefficient") {
  const CellTable c = fixture::two_by_three();
  const FeResiduals r = residualize_fe(c);
  CHECK(r.at(0, 2) == Approx(1.0 / 6).epsilon(1e-12));
  CHECK(r.at(1, 1) == Approx(1.0 / 3).epsilon(1e-12));
  CHECK(r.at(1, 2) == Approx(-1.0 / 6).epsilon(1e-12));
  CHECK(beta_fe(c).beta == Approx(-0.5).epsilon(1e-12));
  CHECK(beta_fd(c).beta == Approx(-0.5).epsilon(1e-12));
  CHECK(beta_fe(c).n_obs == 6);
  CHECK(beta_fd(c).n_obs == 4);

  const FdResiduals f = residualize_fd(c);
  CHECK(f.at(0, 1) == Approx(-0.5));
  CHECK(f.at(1, 1) == Approx(0.5));
  CHECK(f.at(0, 2) == Approx(0.5));
  CHECK(f.at(1, 2) == Approx(-0.5));
  CHECK(f.at(0, 0) == 0.0);
  CHECK(f.at(0, 3) == 0.0);
}

TEST_CASE("closed form matches under equal counts") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    fixture::RandomPanelOptions o;
    o.max_count = 1;
    const CellTable c = fixture::random_panel(rng, o);
    const auto cf = closed_form_fe_residuals(c);
    FeResiduals r;
    try {
      r = residualize_fe(c);
    } catch (const Error&) {
      continue;
    }
    for (std::size_t k = 0; k < cf.size(); ++k) CHECK(r.eps[k] == Approx(cf[k]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("residualization agrees with the dummy regression") {
  std::mt19937_64 rng(7);
  int compared = 0;
  for (int i = 0; i < 200; ++i) {
    const CellTable c = fixture::random_panel(rng);
    const auto fe = try_beta_fe(c);
    const auto ofe = oracle::ols_fe_beta(c);
    CHECK(fe.degenerate == !ofe.has_value());
    if (ofe && !fe.degenerate) {
      CHECK(std::fabs(fe.beta - *ofe) < 1e-8 * std::max(1.0, std::fabs(*ofe)));
      ++compared;
    }
    const auto fd = try_beta_fd(c);
    const auto ofd = oracle::ols_fd_beta(c);
    CHECK(fd.degenerate == !ofd.has_value());
    if (ofd && !fd.degenerate) CHECK(std::fabs(fd.beta - *ofd) < 1e-8 * std::max(1.0, std::fabs(*ofd)));
  }
  CHECK(compared > 150);
}

TEST_CASE("collinear designs") {
  // Everyone switches at the same date: D is a period effect.
  const CellTable c = fixture::from_paths({"011", "011"}, {1, 2, 3, 4, 5, 6});
  CHECK_THROWS_AS(beta_fe(c), Error);
  try {
    beta_fe(c);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Collinear);
  }
  CHECK(try_beta_fe(c).degenerate);
  CHECK(std::isnan(try_beta_fe(c).beta));
  CHECK(try_beta_fd(c).degenerate);

  // Never-changing treatment: D is a group effect.
  const CellTable g = fixture::from_paths({"111", "000"}, {1, 2, 3, 4, 5, 6});
  CHECK(try_beta_fe(g).degenerate);
}

TEST_CASE("two periods: fe equals fd") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    fixture::RandomPanelOptions o;
    o.min_periods = o.max_periods = 2;
    o.time_invariant_counts = true;
    const CellTable c = fixture::random_panel(rng, o);
    const auto fe = try_beta_fe(c);
    const auto fd = try_beta_fd(c);
    REQUIRE(fe.degenerate == fd.degenerate);
    if (!fe.degenerate) CHECK(fe.beta == Approx(fd.beta).epsilon(1e-10));
  }
}

TEST_CASE("unbalanced counts still use the exact projection") {
  // Different growth rates across groups: the closed form no longer applies
  // but the iterative residual must still match the oracle.
  const CellTable c = fixture::from_paths({"001", "011", "000"}, {1, 2, 4, 1, 3, 7, 0, 1, 2},
                                          {1, 5, 2, 3, 3, 1, 2, 2, 9});
  const auto fe = beta_fe(c);
  const auto oracle_fe = oracle::ols_fe_beta(c);
  REQUIRE(oracle_fe);
  CHECK(fe.beta == Approx(*oracle_fe).epsilon(1e-10));
}

TEST_CASE("fd needs two periods") {
  const CellTable c = fixture::from_paths({"0", "1"});
  CHECK_THROWS_AS(residualize_fd(c), Error);
}
