#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "slicesim/baselines.hpp"
#include "slicesim/channel.hpp"
#include "slicesim/isolation.hpp"

using namespace slicesim;

namespace {

ScenarioConfig cell(std::vector<int> users) {
  return with_user_counts(default_config(), users);
}

}  // namespace

TEST_CASE("bisection hits the requirement") {
  const auto c = default_config();
  Rng rng(1);
  std::uniform_real_distribution<double> loss(70, 120);
  for (int i = 0; i < 500; ++i) {
    const double g = db_to_linear_loss(loss(rng));
    for (const auto& s : c.slices) {
      const double f = required_fraction(s.rate_requirement_bps, c.total_bandwidth_hz, g,
                                         c.tx_power_w, c.noise_density_w_per_hz);
      const double r = data_rate_bps(f, c.total_bandwidth_hz, g, c.tx_power_w,
                                     c.noise_density_w_per_hz);
      if (f < 1.0) {
        REQUIRE(std::abs(r - s.rate_requirement_bps) / s.rate_requirement_bps < 1e-6);
      } else {
        REQUIRE(r <= s.rate_requirement_bps * (1 + 1e-12));
      }
    }
  }
  // A hopeless channel takes the whole band.
  CHECK(required_fraction(1e9, 1e6, 1e-15, 1.0, 4e-21) == 1.0);
  CHECK(required_fraction(0.0, 1e6, 1e-9, 1.0, 4e-21) == 0.0);
}

TEST_CASE("single user with plenty of bandwidth receives exactly its need") {
  auto c = default_config();
  c.slices.resize(1);
  c.slices[0].num_users = 1;
  c.frozen_gains = std::vector<double>{1e-9};
  validate(c);
  const auto st = init_scenario(c, 1);
  const auto a = rssi_ip_allocate(st, {1});
  const double need = required_fraction(c.slices[0].rate_requirement_bps, c.total_bandwidth_hz,
                                        1e-9, c.tx_power_w, c.noise_density_w_per_hz);
  CHECK(a.inter[0] == doctest::Approx(need).epsilon(1e-12));
  CHECK(a.intra[0] == doctest::Approx(1.0).epsilon(1e-12));
  const double r = data_rate_bps(a.intra[0], a.inter[0] * c.total_bandwidth_hz, 1e-9,
                                 c.tx_power_w, c.noise_density_w_per_hz);
  CHECK(std::abs(r / c.slices[0].rate_requirement_bps - 1) < 1e-6);
  CHECK_FALSE(a.shortfall);
}

TEST_CASE("identical slices get identical shares") {
  auto c = default_config();
  c.slices.resize(2);
  c.slices[1] = c.slices[0];
  c.slices[1].name = "eMBB-2";
  c.slices[0].num_users = c.slices[1].num_users = 3;
  c.frozen_gains = std::vector<double>{1e-9, 2e-10, 5e-11, 1e-9, 2e-10, 5e-11};
  validate(c);
  const auto a = rssi_ip_allocate(init_scenario(c, 1), {3, 3});
  CHECK(a.inter[0] == doctest::Approx(a.inter[1]).epsilon(1e-14));
  CHECK(a.intra.head(3).isApprox(a.intra.tail(3)));
}

TEST_CASE("a slice with nothing to serve gets nothing") {
  auto c = cell({4, 14, 42});
  auto st = init_scenario(c, 1);
  auto zero = c;
  zero.slices[2].rate_requirement_bps = 0.0;
  st.config = std::make_shared<const ScenarioConfig>(zero);
  const auto a = rssi_ip_allocate(st, reference_contracted_users(c));
  CHECK(a.demand[2] == 0.0);
  CHECK(a.inter[2] == 0.0);
  CHECK(a.intra.tail(42).isZero());
}

TEST_CASE("budgets hold and the redistribution settles on random instances") {
  Rng rng(7);
  std::uniform_int_distribution<int> users(1, 40);
  std::uniform_real_distribution<double> req_scale(0.1, 30);
  int shortfalls = 0;
  for (int k = 0; k < 1000; ++k) {
    auto c = cell({users(rng), users(rng), users(rng)});
    for (auto& s : c.slices) s.rate_requirement_bps *= req_scale(rng);
    const auto st = init_scenario(c, std::uint64_t(k + 1));
    const auto a = rssi_ip_allocate(st, {20, 70, 210});
    REQUIRE(a.iterations <= 20);
    REQUIRE(a.inter.sum() <= 1.0 + 1e-9);
    REQUIRE((a.inter.array() >= 0).all());
    REQUIRE((a.inter.array() <= a.demand.array() + 1e-12).all());
    for (int s = 0; s < 3; ++s) {
      const double sum = a.intra.segment(st.layout.begin(s), st.layout.size(s)).sum();
      REQUIRE(sum <= 1.0 + 1e-9);
    }
    // Fixed point: either everything fits or the whole cell is handed out.
    if (a.demand.sum() <= 1.0) {
      REQUIRE(a.inter.isApprox(a.demand, 1e-9));
    } else {
      ++shortfalls;
      REQUIRE(a.shortfall);
      REQUIRE(a.inter.sum() == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  CHECK(shortfalls > 0);
}

TEST_CASE("contracted shares protect the light slices under shortfall") {
  // Ten times the contracted eMBB population asks for far more than the cell.
  auto c = cell({200, 70, 210});
  const auto st = init_scenario(c, 3);
  const auto a = rssi_ip_allocate(st, reference_contracted_users(c));
  REQUIRE(a.shortfall);
  // The two light slices still receive everything they need.
  CHECK(a.inter[1] == doctest::Approx(a.demand[1]));
  CHECK(a.inter[2] == doctest::Approx(a.demand[2]));
}

TEST_CASE("wic environment checks only the budgets") {
  auto c = cell({4, 14, 42});
  SlicingEnv full(c), wic = make_wic_env(c);
  full.reset(2);
  wic.reset(2);
  // First slot: both accept a plain in-budget action.
  CHECK(full.global_step(Eigen::Vector3d(0.3, 0.3, 0.3)).valid);
  CHECK(wic.global_step(Eigen::Vector3d(0.3, 0.3, 0.3)).valid);

  // Action violating only an implication after a slice asks for more.
  std::vector<SliceFlags> flags(3);
  flags[0].needs_resources = true;
  const Eigen::Vector3d prev(0.3, 0.3, 0.3), shrink(0.2, 0.3, 0.3);
  const auto bounds = c.global_fraction_bounds;
  CHECK_FALSE(validate_inter_action(shrink, flags, prev, bounds, full.rules()).empty());
  CHECK(validate_inter_action(shrink, flags, prev, bounds, wic.rules()).empty());
  const Eigen::Vector3d over(0.5, 0.4, 0.2);
  CHECK_FALSE(validate_inter_action(over, flags, prev, bounds, full.rules()).empty());
  CHECK_FALSE(validate_inter_action(over, flags, prev, bounds, wic.rules()).empty());

  // Satisfaction and cost follow the same formulas in both.
  for (int s = 0; s < 3; ++s) {
    const auto f = full.state().segment(full.state().intra_fractions, s).eval();
    full.slice_step(s, f);
    wic.slice_step(s, f);
  }
  const auto of = full.complete_slot(), ow = wic.complete_slot();
  CHECK(of.system_satisfaction == ow.system_satisfaction);
  CHECK(of.total_cost == ow.total_cost);
}

TEST_CASE("contracted users follow the reference cell") {
  CHECK(reference_contracted_users(cell({4, 14, 42})) == std::vector<int>{20, 70, 210});
  auto c = cell({4, 14, 42});
  c.slices[1].name = "custom";
  CHECK(reference_contracted_users(c)[1] == 14);
}
