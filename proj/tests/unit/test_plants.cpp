#include <doctest.h>

#include <random>

#include "facetmpc/io.hpp"
#include "facetmpc/plants.hpp"
#include "helpers.hpp"

using namespace facetmpc;
using testing::mat;
using testing::vec;

TEST_CASE("generate_plant is deterministic") {
  const Plant a = generate_plant(3, 42);
  const Plant b = generate_plant(3, 42);
  CHECK(plant_to_json(a).dump() == plant_to_json(b).dump());
  CHECK(plant_hash(a) == plant_hash(b));
  CHECK(plant_hash(a) != plant_hash(generate_plant(3, 43)));
  CHECK(plant_hash(a).size() == 16);
}

TEST_CASE("UniformStream is pinned to mt19937_64") {
  // First output of mt19937_64 with the default seed is fixed by the standard.
  std::mt19937_64 ref(5489u);
  CHECK(ref() == 14514284786278117030ull);
  UniformStream s(5489u);
  CHECK(s.next() == static_cast<double>(14514284786278117030ull >> 11) * 0x1.0p-53);
}

TEST_CASE("generated plants satisfy the invariants") {
  for (int m = 2; m <= 5; ++m) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Plant p = generate_plant(m, seed);
      CHECK_NOTHROW(validate_plant(p));
      const GlobalModel g = assemble_global(p);
      CHECK(spectral_radius(g.a) < 1.0);
      CHECK(controllability_rank(g.a, g.b_stacked()) == p.nx());
      CHECK(p.num_subsystems() == m);
      CHECK(p.horizon == 3);
      for (const auto& s : p.subsystems) {
        CHECK(s.nx() == 2);
        CHECK(s.nu() == 1);
        CHECK(s.a.cwiseAbs().maxCoeff() <= 1.0);
        CHECK((s.x_lb.array() >= -100).all());
        CHECK((s.x_lb.array() <= -10).all());
        CHECK((s.x_ub.array() >= 10).all());
        CHECK((s.x_ub.array() <= 100).all());
        CHECK((s.u_lb.array() >= -5).all());
        CHECK((s.u_lb.array() <= -1).all());
        CHECK((s.u_ub.array() >= 1).all());
        CHECK((s.u_ub.array() <= 5).all());
      }
    }
  }
}

TEST_CASE("generate_plant errors") {
  CHECK_THROWS_AS(generate_plant(1, 1), Error);
  GenerationConfig hopeless;
  hopeless.entry_range = 50.0;
  hopeless.max_rejections = 20;
  try {
    generate_plant(2, 1, hopeless);
    FAIL("expected GenerationExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GenerationExhausted);
  }
}

TEST_CASE("sample plant") {
  const Plant p = sample_plant();
  CHECK_NOTHROW(validate_plant(p));
  CHECK(p.subsystems[0].a.isApprox(mat({{0.1645, 0.7399}, {0.0815, -0.4704}})));
  CHECK(p.subsystems[0].b[0].isApprox(mat({{-0.3639}, {-0.7616}})));
  CHECK(p.subsystems[0].b[1].isApprox(mat({{0.8797}, {0.2911}})));
  CHECK(p.horizon == 3);
}

TEST_CASE("assemble_global") {
  const Plant p = sample_plant();
  const GlobalModel g = assemble_global(p);
  REQUIRE(g.a.rows() == 4);
  CHECK(g.a.topLeftCorner(2, 2) == p.subsystems[0].a);
  CHECK(g.a.bottomRightCorner(2, 2) == p.subsystems[1].a);
  CHECK(g.a.topRightCorner(2, 2).isZero());
  CHECK(g.a.bottomLeftCorner(2, 2).isZero());
  REQUIRE(g.b.size() == 2);
  CHECK(g.b[0].rows() == 4);
  CHECK(g.b[0].cols() == 1);
  CHECK(g.b[0].topRows(2) == p.subsystems[0].b[0]);
  CHECK(g.b[0].bottomRows(2) == p.subsystems[1].b[0]);
  CHECK(g.b_stacked().cols() == 2);

  Plant one;
  one.subsystems = {p.subsystems[0]};
  one.subsystems[0].b = {p.subsystems[0].b[0]};
  const GlobalModel g1 = assemble_global(one);
  CHECK(g1.a == one.subsystems[0].a);
  CHECK(g1.b[0] == one.subsystems[0].b[0]);

  const GlobalModel gd = assemble_global(testing::decoupled_sample_plant());
  CHECK(gd.b[0].bottomRows(2).isZero());
  CHECK(gd.b[1].topRows(2).isZero());
}

TEST_CASE("step examples and linearity") {
  const Plant p = sample_plant();
  CHECK(step(p, Vec::Zero(4), Vec::Zero(2)).isZero());
  CHECK(step(p, vec({1, 0, 0, 0}), Vec::Zero(2)).isApprox(vec({0.1645, 0.0815, 0, 0})));
  const Vec x1 = step(p, Vec::Zero(4), vec({1, 0}));
  CHECK((x1 - vec({-0.3639, -0.7616, 0.0878, 0.4421})).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK_THROWS_AS(step(p, Vec::Zero(3), Vec::Zero(2)), Error);

  std::mt19937_64 rng(79);
  for (int k = 0; k < 100; ++k) {
    const Plant q = generate_plant(2 + k % 4, 100 + k % 7);
    const Vec xa = testing::uniform_vec(rng, q.nx(), -50, 50);
    const Vec xb = testing::uniform_vec(rng, q.nx(), -50, 50);
    const Vec ua = testing::uniform_vec(rng, q.nu(), -5, 5);
    const Vec ub = testing::uniform_vec(rng, q.nu(), -5, 5);
    const Vec lhs = step(q, xa + xb, ua + ub);
    const Vec rhs = step(q, xa, ua) + step(q, xb, ub) - step(q, Vec::Zero(q.nx()), Vec::Zero(q.nu()));
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + lhs.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("random_initial_state") {
  const Plant p = generate_plant(3, 5);
  const Vec x = random_initial_state(p, 9);
  CHECK(x == random_initial_state(p, 9));
  CHECK((x.array() >= 0.4 * p.x_lb().array()).all());
  CHECK((x.array() <= 0.4 * p.x_ub().array()).all());
}

TEST_CASE("validate_plant rejects broken plants") {
  Plant p = sample_plant();
  p.subsystems[0].x_lb(0) = 1.0;
  CHECK_THROWS_AS(validate_plant(p), Error);

  p = sample_plant();
  p.subsystems[0].a *= 3.0;
  CHECK_THROWS_AS(validate_plant(p), Error);

  p = sample_plant();
  p.subsystems[1].b.pop_back();
  CHECK_THROWS_AS(validate_plant(p), Error);

  p = sample_plant();
  p.horizon = 0;
  CHECK_THROWS_AS(validate_plant(p), Error);
}
