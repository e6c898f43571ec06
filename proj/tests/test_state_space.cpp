#include "dgs/rng.hpp"
#include "dgs/state_space.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace dgs;

TEST_CASE("ordinal grid spacing and endpoints") {
  const auto g = make_ordinal_grid(50, -1.5, 3.0);
  REQUIRE(g.support_size() == 50);
  CHECK(g.values().front() == -1.5);
  CHECK(g.values().back() == 3.0);
  CHECK(g.values()[1] - g.values()[0] == doctest::Approx(4.5 / 49).epsilon(1e-12));
  CHECK(4.5 / 49 == doctest::Approx(0.091837).epsilon(1e-5));

  const auto two = make_ordinal_grid(2, 0.0, 1.0);
  CHECK(two.values() == StateSpace::binary01().values());

  const auto three = make_ordinal_grid(3, -1.0, 1.0);
  CHECK(three.values() == std::vector<double>{-1.0, 0.0, 1.0});

  CHECK_THROWS_AS(make_ordinal_grid(1, 0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(make_ordinal_grid(5, 1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(make_ordinal_grid(5, 2.0, 1.0), ParameterError);
  CHECK_THROWS_AS(StateSpace::ordinal({0.0, 0.0}), ParameterError);
  CHECK_THROWS_AS(StateSpace::categorical(1), ParameterError);
}

TEST_CASE("enumeration order and counts") {
  const auto bin = enumerate_states(StateSpace::binary01(), 2, 100);
  REQUIRE(bin.size() == 4);
  CHECK(bin[0] == Vector::Zero(2));
  CHECK(bin[1] == (Vector(2) << 0, 1).finished());
  CHECK(bin[2] == (Vector(2) << 1, 0).finished());
  CHECK(bin[3] == Vector::Ones(2));

  const auto pm = enumerate_states(StateSpace::binary_pm1(), 3, 100);
  REQUIRE(pm.size() == 8);
  CHECK(pm[0] == Vector::Constant(3, -1.0));

  const auto ord = enumerate_states(StateSpace::ordinal({-1, 0, 1}), 2, 100);
  CHECK(ord.size() == 9);

  CHECK_THROWS_AS(enumerate_states(StateSpace::binary01(), 10, 100), CapacityError);
}

TEST_CASE("enumeration yields distinct members and round-trips the index") {
  const std::vector<StateSpace> spaces = {StateSpace::binary01(), StateSpace::binary_pm1(),
                                          make_ordinal_grid(5, 0.0, 1.0), StateSpace::categorical(3)};
  for (const auto& space : spaces) {
    const auto states = enumerate_states(space, 3, 1000);
    CHECK(states.size() == state_count(space, 3));
    std::set<std::vector<double>> seen;
    for (std::size_t i = 0; i < states.size(); ++i) {
      CHECK(space.contains(states[i]));
      CHECK(state_index(space, states[i]) == i);
      CHECK(state_from_index(space, 3, i) == states[i]);
      seen.insert({states[i].begin(), states[i].end()});
    }
    CHECK(seen.size() == states.size());
  }
}

TEST_CASE("random states") {
  Rng rng(7);
  const auto s = random_state(StateSpace::binary01(), 1000, rng);
  CHECK(s.mean() == doctest::Approx(0.5).epsilon(0.1));

  const auto cat = StateSpace::categorical(4);
  const auto c = random_state(cat, 2, rng);
  REQUIRE(c.size() == 8);
  CHECK(cat.contains(c));
  CHECK(c.segment(0, 4).sum() == 1.0);
  CHECK(c.segment(4, 4).sum() == 1.0);

  Rng a(42, 3), b(42, 3);
  const auto grid = make_ordinal_grid(50, -1.5, 3.0);
  CHECK(random_state(grid, 20, a) == random_state(grid, 20, b));
}

TEST_CASE("membership checks") {
  const auto space = StateSpace::binary_pm1();
  CHECK(space.contains((Vector(2) << 1, -1).finished()));
  CHECK_FALSE(space.contains((Vector(2) << 1, 0).finished()));
  CHECK_THROWS_AS(space.require_member((Vector(1) << 0.5).finished()), SupportError);

  const auto cat = StateSpace::categorical(3);
  CHECK_FALSE(cat.contains((Vector(3) << 1, 1, 0).finished()));
  CHECK_FALSE(cat.contains((Vector(3) << 0, 0, 0).finished()));
  CHECK_FALSE(cat.contains((Vector(4) << 1, 0, 0, 0).finished()));
  CHECK_THROWS_AS(cat.site_count(4), DimensionError);
}

TEST_CASE("state csv header") {
  std::ostringstream out;
  write_states_csv(out, Matrix::Ones(2, 3));
  CHECK(out.str() == "dim_0,dim_1,dim_2\n1,1,1\n1,1,1\n");
}
