#include "impvo/core_types.hpp"
#include "impvo/mesh.hpp"

#include <doctest.h>

#include <cmath>

using namespace impvo;

TEST_CASE("schedule validation") {
  CHECK(validate_schedule(std::vector<double>{0.3, 0.7}, 1.0, 0.01).empty());

  auto v = validate_schedule(std::vector<double>{0.7, 0.3}, 1.0, 0.01);
  REQUIRE(v.size() == 1);
  CHECK(v[0].index == 2);
  CHECK(v[0].message.find("-0.4") != std::string::npos);

  v = validate_schedule(std::vector<double>{0.5}, 0.5, 0.01);
  REQUIRE(v.size() == 1);
  CHECK(v[0].message.find("T - min_gap") != std::string::npos);

  CHECK_THROWS_AS(validate_schedule(std::vector<double>{0.2, NAN}, 1.0, 0.01), std::invalid_argument);
  CHECK(validate_schedule(std::vector<double>{}, 1.0, 0.01).empty());
}

TEST_CASE("mesh nodes") {
  auto nodes_of = [](std::vector<double> tau, int M) {
    return build_mesh(ImpulseSchedule{tau, 1.0, 0.01}, M);
  };
  Mesh m = nodes_of({}, 4);
  REQUIRE(m.nodes().size() == 5);
  for (int k = 0; k < 5; ++k) CHECK(m.nodes()[k] == doctest::Approx(0.25 * k));

  m = nodes_of({0.5}, 2);
  REQUIRE(m.nodes().size() == 5);
  for (int k = 0; k < 5; ++k) CHECK(m.nodes()[k] == doctest::Approx(0.25 * k));
  CHECK(m.impulse_node_index() == std::vector<int>{2});

  m = nodes_of({0.3, 0.7}, 2);
  REQUIRE(m.nodes().size() == 7);
  CHECK(m.nodes()[m.impulse_node_index()[0]] == 0.3);
  CHECK(m.nodes()[m.impulse_node_index()[1]] == 0.7);
  CHECK(m.time(m.left_point(1)) == 0.3);
  CHECK(m.time(m.right_point(1)) == 0.3);

  CHECK_THROWS_AS(nodes_of({0.5}, 1), std::invalid_argument);
}

TEST_CASE("quadrature weights integrate exactly where they should") {
  Mesh m = build_mesh(ImpulseSchedule{{0.3, 0.7}, 1.0, 0.01}, 5);
  double total = 0, lin = 0;
  for (int q = 0; q < m.point_count(); ++q) {
    total += m.trapezoid_weight(q);
    lin += m.trapezoid_weight(q) * m.time(q);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lin == doctest::Approx(0.5).epsilon(1e-14));

  // int_0^{t_p} 1 and int_{t_q}^T 1
  for (int p = 0; p < m.point_count(); ++p) {
    double fw = 0, tw = 0;
    for (int q = 0; q < m.point_count(); ++q) {
      fw += m.forward_weight(p, q);
      tw += m.tail_weight(p, q);
    }
    CHECK(fw == doctest::Approx(m.time(p)).epsilon(1e-13));
    CHECK(tw == doctest::Approx(1.0 - m.time(p)).epsilon(1e-13));
  }
}

TEST_CASE("control lookup") {
  ImpulseSchedule s{{0.5}, 1.0, 0.01};
  ControlVector a{Vector::Constant(1, 1.0), Vector::Constant(1, 2.0)};
  CHECK(control_at(s, a, 0.2)(0) == 1.0);
  CHECK(control_at(s, a, 0.5, Side::Left)(0) == 1.0);
  CHECK(control_at(s, a, 0.5, Side::Right)(0) == 2.0);
  CHECK_THROWS_AS(control_at(s, a, 1.5), std::out_of_range);

  ImpulseSchedule s2{{0.3, 0.7}, 1.0, 0.01};
  ControlVector b{Vector::Constant(1, 0.0), Vector::Constant(1, 5.0), Vector::Constant(1, 9.0)};
  CHECK(control_at(s2, b, 0.9)(0) == 9.0);
}

TEST_CASE("control boxes") {
  ControlBox box{Vector::Zero(2), Vector::Ones(2)};
  Vector v(2);
  v << -1, 0.5;
  Vector c = box.clamp(v);
  CHECK(c(0) == 0.0);
  CHECK(c(1) == 0.5);
  CHECK(box.contains(c));
  CHECK_FALSE(box.contains(v));
}
