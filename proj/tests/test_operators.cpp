#include <doctest.h>

#include <cmath>

#include "geoflow/errors.hpp"
#include "geoflow/fft.hpp"
#include "geoflow/operators.hpp"
#include "support/oracles.hpp"

using namespace geoflow;

namespace {

GridPtr circle(int n) { return make_grid({n}, {2 * M_PI}); }

// dx^2 + e^{-2 sin x} dtheta^2 on T^2
SnapshotPtr warped_2d_snapshot(int n) {
  auto grid = make_grid({n, n / 4}, {2 * M_PI, 2 * M_PI});
  SymTensorField g(grid);
  for (std::size_t node = 0; node < grid->size(); ++node) {
    const double x = grid->coord(node, 0);
    g.at(0, 0, node) = 1.0;
    g.at(1, 1, node) = std::exp(-2.0 * std::sin(x));
  }
  return make_snapshot(std::move(g), ScalarField(grid));
}

SnapshotPtr conformal_1d_snapshot(int n, double a_amp,
                                  const ScalarField* phi = nullptr) {
  auto grid = circle(n);
  SymTensorField g(grid);
  for (std::size_t node = 0; node < grid->size(); ++node)
    g.at(0, 0, node) = std::exp(2.0 * a_amp * std::sin(grid->coord(node, 0)));
  return make_snapshot(std::move(g), phi ? *phi : ScalarField(grid));
}

}  // namespace

TEST_CASE("christoffel of a flat metric vanishes") {
  auto grid = make_grid({16, 16}, {2 * M_PI, 2 * M_PI});
  ChristoffelField gamma = christoffel(SymTensorField::identity(grid));
  double worst = 0.0;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j)
        for (std::size_t node = 0; node < grid->size(); ++node)
          worst = std::max(worst, std::abs(gamma(k, i, j, node)));
  CHECK(worst <= 1e-14);
}

TEST_CASE("christoffel of g = e^{2 sin x} dx^2 is cos x") {
  auto snap = conformal_1d_snapshot(64, 1.0);
  const ChristoffelField& gamma = snap->christoffel();
  double worst = 0.0;
  for (std::size_t node = 0; node < snap->grid().size(); ++node)
    worst = std::max(worst, std::abs(gamma(0, 0, 0, node) -
                                     std::cos(snap->grid().coord(node, 0))));
  CHECK(worst <= 1e-10);
}

TEST_CASE("warped 2-d christoffel blocks match the closed forms") {
  auto snap = warped_2d_snapshot(128);
  const ChristoffelField& gamma = snap->christoffel();
  const Grid& grid = snap->grid();
  double worst_xtt = 0.0, worst_txt = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double x = grid.coord(node, 0);
    const double expected_xtt = std::cos(x) * std::exp(-2.0 * std::sin(x));
    worst_xtt =
        std::max(worst_xtt, std::abs(gamma(0, 1, 1, node) - expected_xtt));
    worst_txt = std::max(worst_txt, std::abs(gamma(1, 0, 1, node) + std::cos(x)));
  }
  CHECK(worst_xtt <= 1e-10);
  CHECK(worst_txt <= 1e-10);
}

TEST_CASE("christoffel rejects a degenerate metric and names the node") {
  auto grid = circle(16);
  SymTensorField g(grid);  // zero metric
  try {
    christoffel(g);
    FAIL("expected geometry_error");
  } catch (const geometry_error& e) {
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
}

TEST_CASE("gradient: constant, flat, and conformal cases") {
  auto grid = circle(64);
  auto flat = make_flat_snapshot(grid);

  ScalarField c(grid);
  for (auto& x : c.values()) x = 2.0;
  VectorField gc = gradient(*flat, c);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i)
    worst = std::max(worst, std::abs(gc(0, i)));
  CHECK(worst <= 1e-13);

  ScalarField f =
      ScalarField::sample(grid, [](const double* x) { return std::cos(x[0]); });
  VectorField gf = gradient(*flat, f);
  worst = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i)
    worst = std::max(worst,
                     std::abs(gf(0, i) + std::sin(grid->coord(i, 0))));
  CHECK(worst <= 1e-12);

  // (grad p)^x = e^{-2 sin x} p'(x) for g = e^{2 sin x} dx^2
  auto curved = conformal_1d_snapshot(64, 1.0);
  ScalarField p = ScalarField::sample(
      grid, [](const double* x) { return std::cos(2 * x[0]); });
  VectorField gp = gradient(*curved, p);
  worst = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double x = grid->coord(i, 0);
    const double expected = std::exp(-2 * std::sin(x)) * (-2 * std::sin(2 * x));
    worst = std::max(worst, std::abs(gp(0, i) - expected));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("hessian on flat T^2 equals the matrix of second partials") {
  auto grid = make_grid({64, 64}, {2 * M_PI, 2 * M_PI});
  auto flat = make_flat_snapshot(grid);
  ScalarField f = ScalarField::sample(
      grid, [](const double* x) { return std::sin(x[0]) * std::sin(x[1]); });
  SymTensorField h = hessian(*flat, f);
  double worst = 0.0;
  for (std::size_t node = 0; node < grid->size(); ++node) {
    const double x = grid->coord(node, 0), y = grid->coord(node, 1);
    worst = std::max(worst,
                     std::abs(h(0, 0, node) + std::sin(x) * std::sin(y)));
    worst = std::max(worst,
                     std::abs(h(0, 1, node) - std::cos(x) * std::cos(y)));
    worst = std::max(worst,
                     std::abs(h(1, 1, node) + std::sin(x) * std::sin(y)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("hessian fiber block of a base-only function on the warped metric") {
  auto snap = warped_2d_snapshot(128);
  const Grid& grid = snap->grid();
  ScalarField f =
      ScalarField::sample(snap->grid_ptr(),
                          [](const double* x) { return std::cos(x[0]); });
  SymTensorField h = hessian(*snap, f);
  // H_tt = -Gamma^x_tt f' = sin x cos x e^{-2 sin x}
  double worst = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double x = grid.coord(node, 0);
    const double expected =
        std::sin(x) * std::cos(x) * std::exp(-2.0 * std::sin(x));
    worst = std::max(worst, std::abs(h(1, 1, node) - expected));
    worst = std::max(worst, std::abs(h(0, 1, node)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("laplace-beltrami closed forms") {
  auto grid = circle(64);
  auto flat = make_flat_snapshot(grid);
  ScalarField f =
      ScalarField::sample(grid, [](const double* x) { return std::cos(x[0]); });
  ScalarField lap = laplace_beltrami(*flat, f);
  ScalarField expected = -1.0 * f;
  CHECK(oracles::max_abs_diff(lap, expected) <= 1e-11);

  ScalarField c(grid);
  for (auto& x : c.values()) x = 1.0;
  CHECK(oracles::max_abs(laplace_beltrami(*flat, c)) <= 1e-13);

  // g = e^{2a} dx^2: Delta p = e^{-2a}(p'' - a' p')
  const double amp = 0.4;
  auto curved = conformal_1d_snapshot(64, amp);
  ScalarField p = ScalarField::sample(
      grid, [](const double* x) { return std::cos(2 * x[0]); });
  ScalarField lap_curved = laplace_beltrami(*curved, p);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double x = grid->coord(i, 0);
    const double a_prime = amp * std::cos(x);
    const double expected_val = std::exp(-2 * amp * std::sin(x)) *
                                (-4 * std::cos(2 * x) + a_prime * 2 * std::sin(2 * x));
    worst = std::max(worst, std::abs(lap_curved[i] - expected_val));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("witten laplacian: potential and drift") {
  auto grid = circle(64);
  ScalarField phi =
      ScalarField::sample(grid, [](const double* x) { return std::sin(x[0]); });
  auto snap = make_snapshot(SymTensorField::identity(grid), phi);

  // phi const: L reduces to Delta
  ScalarField c_phi(grid);
  for (auto& x : c_phi.values()) x = 0.7;
  auto snap_c = make_snapshot(SymTensorField::identity(grid), c_phi);
  ScalarField f =
      ScalarField::sample(grid, [](const double* x) { return std::cos(x[0]); });
  CHECK(oracles::max_abs_diff(witten_laplacian(*snap_c, f),
                              laplace_beltrami(*snap_c, f)) <= 1e-11);

  // flat T^1, phi = sin x, f = cos x: Lf = -cos x + sin x cos x
  ScalarField lf = witten_laplacian(*snap, f);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double x = grid->coord(i, 0);
    worst = std::max(worst, std::abs(lf[i] + std::cos(x) -
                                     std::sin(x) * std::cos(x)));
  }
  CHECK(worst <= 1e-10);

  ScalarField one(grid);
  for (auto& x : one.values()) x = 1.0;
  CHECK(oracles::max_abs(witten_laplacian(*snap, one)) <= 1e-13);
}

TEST_CASE("witten laplacian agrees with trace form on smooth fields") {
  auto grid = circle(128);
  ScalarField phi = ScalarField::sample(
      grid, [](const double* x) { return 0.5 * std::cos(x[0]); });
  SymTensorField g(grid);
  for (std::size_t node = 0; node < grid->size(); ++node)
    g.at(0, 0, node) = std::exp(0.6 * std::sin(grid->coord(node, 0)));
  auto snap = make_snapshot(std::move(g), phi);
  ScalarField f = ScalarField::sample(
      grid, [](const double* x) { return std::sin(2 * x[0]); });

  ScalarField div_form = witten_laplacian(*snap, f);
  ScalarField trace_form = laplace_beltrami(*snap, f);
  VectorField grad_phi = gradient(*snap, phi);
  ScalarField df = spectral_derivative(f, 0);
  for (std::size_t i = 0; i < grid->size(); ++i)
    trace_form[i] -= grad_phi(0, i) * df[i];
  CHECK(oracles::max_abs_diff(div_form, trace_form) <= 1e-9);
}

TEST_CASE("discrete self-adjointness and divergence structure of L") {
  auto grid = circle(64);
  SymTensorField g(grid);
  for (std::size_t node = 0; node < grid->size(); ++node)
    g.at(0, 0, node) = std::exp(0.4 * std::sin(grid->coord(node, 0)));
  ScalarField phi = ScalarField::sample(
      grid, [](const double* x) { return 0.3 * std::cos(x[0]); });
  auto snap = make_snapshot(std::move(g), phi);

  ScalarField f = oracles::random_positive_field(grid, 11);
  ScalarField h = oracles::random_positive_field(grid, 12);
  const double lhs = inner_mu(witten_laplacian(*snap, f), h, *snap);
  const double rhs = inner_mu(witten_laplacian(*snap, h), f, *snap);
  const double scale = std::sqrt(inner_mu(f, f, *snap)) *
                       std::sqrt(inner_mu(h, h, *snap));
  CHECK(std::abs(lhs - rhs) <= 1e-9 * scale);

  ScalarField one(grid);
  for (auto& x : one.values()) x = 1.0;
  CHECK(std::abs(inner_mu(witten_laplacian(*snap, f), one, *snap)) <= 1e-12);
}

TEST_CASE("integration by parts against the weighted measure") {
  auto grid = circle(64);
  ScalarField phi = ScalarField::sample(
      grid, [](const double* x) { return 0.3 * std::cos(x[0]); });
  auto snap = make_snapshot(SymTensorField::identity(grid), phi);
  ScalarField u = oracles::random_positive_field(grid, 21);

  ScalarField log_u = map(u, [](double x) { return std::log(x); });
  ScalarField lap_log = laplace_beltrami(*snap, log_u);
  const double lhs = inner_mu(lap_log, u, *snap);

  VectorField grad_log = gradient(*snap, log_u);
  ScalarField dlog = spectral_derivative(log_u, 0);
  ScalarField dphi = spectral_derivative(phi, 0);
  ScalarField grad_sq(grid), drift(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    grad_sq[i] = grad_log(0, i) * dlog[i];
    drift[i] = grad_log(0, i) * dphi[i];
  }
  const double rhs = -inner_mu(grad_sq, u, *snap) + inner_mu(drift, u, *snap);
  CHECK(std::abs(lhs - rhs) <= 1e-9);
}

TEST_CASE("ricci tensor: flat, 1-d, and warped closed form") {
  auto flat_grid = make_grid({16, 16}, {2 * M_PI, 2 * M_PI});
  SymTensorField ric_flat = ricci_tensor(SymTensorField::identity(flat_grid));
  for (int s = 0; s < ric_flat.slots(); ++s)
    for (std::size_t i = 0; i < flat_grid->size(); ++i)
      CHECK(std::abs(ric_flat.component(s)[i]) <= 1e-14);

  // any 1-d metric has no intrinsic curvature
  auto grid1 = circle(32);
  SymTensorField g1(grid1);
  for (std::size_t i = 0; i < grid1->size(); ++i)
    g1.at(0, 0, i) = std::exp(2.0 * std::sin(grid1->coord(i, 0)));
  SymTensorField ric1 = ricci_tensor(g1);
  for (std::size_t i = 0; i < grid1->size(); ++i)
    CHECK(ric1(0, 0, i) == 0.0);

  // dx^2 + e^{-2 phi} dtheta^2 with phi = sin x:
  //   R_xx = phi'' - phi'^2, R_tt = (phi'' - phi'^2) e^{-2 phi}, R_xt = 0
  auto snap = warped_2d_snapshot(128);
  const SymTensorField& ric = snap->ricci();
  const Grid& grid = snap->grid();
  double worst = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double x = grid.coord(node, 0);
    const double base = -std::sin(x) - std::cos(x) * std::cos(x);
    worst = std::max(worst, std::abs(ric(0, 0, node) - base));
    worst = std::max(worst, std::abs(ric(1, 1, node) -
                                     base * std::exp(-2.0 * std::sin(x))));
    worst = std::max(worst, std::abs(ric(0, 1, node)));
  }
  CHECK(worst <= 1e-8);

  // R = 2 (phi'' - phi'^2) for this metric
  ScalarField r = scalar_curvature(*snap);
  worst = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double x = grid.coord(node, 0);
    worst = std::max(
        worst,
        std::abs(r[node] - 2.0 * (-std::sin(x) - std::cos(x) * std::cos(x))));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("metric compatibility: covariant derivative of g vanishes") {
  auto grid = make_grid({64, 64}, {2 * M_PI, 2 * M_PI});
  SymTensorField g(grid);
  for (std::size_t node = 0; node < grid->size(); ++node) {
    const double x = grid->coord(node, 0), y = grid->coord(node, 1);
    g.at(0, 0, node) = 1.0 + 0.2 * std::cos(x);
    g.at(0, 1, node) = 0.1 * std::sin(x + y);
    g.at(1, 1, node) = 1.0 + 0.2 * std::sin(y);
  }
  ChristoffelField gamma = christoffel(g);
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    // d_k g_ij as spectral fields
    for (int i = 0; i < 2; ++i) {
      for (int j = i; j < 2; ++j) {
        ScalarField comp(grid, std::vector<double>(
                                   g.component(g.slot(i, j)).begin(),
                                   g.component(g.slot(i, j)).end()));
        ScalarField d = spectral_derivative(comp, k);
        for (std::size_t node = 0; node < grid->size(); ++node) {
          double corr = 0.0;
          for (int l = 0; l < 2; ++l)
            corr += gamma(l, k, i, node) * g(l, j, node) +
                    gamma(l, k, j, node) * g(i, l, node);
          worst = std::max(worst, std::abs(d[node] - corr));
        }
      }
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("bakry-emery tensors") {
  auto grid = circle(64);
  ScalarField phi =
      ScalarField::sample(grid, [](const double* x) { return std::sin(x[0]); });
  auto snap = make_snapshot(SymTensorField::identity(grid), phi);

  // flat, constant potential: both vanish
  ScalarField c_phi(grid);
  auto snap_c = make_snapshot(SymTensorField::identity(grid), c_phi);
  SymTensorField be_c = bakry_emery_tensor(*snap_c);
  double worst_c = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i)
    worst_c = std::max(worst_c, std::abs(be_c(0, 0, i)));
  CHECK(worst_c <= 1e-13);

  // m -> infinity limit
  SymTensorField be = bakry_emery_tensor(*snap);
  SymTensorField bem = bakry_emery_tensor_m(*snap, 1e6);
  double worst = 0.0, grad_sq_max = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    worst = std::max(worst, std::abs(be(0, 0, i) - bem(0, 0, i)));
    const double dphi = std::cos(grid->coord(i, 0));
    grad_sq_max = std::max(grad_sq_max, dphi * dphi);
  }
  CHECK(worst <= 1e-5 * grad_sq_max);

  // flat T^1, phi = sin x, m = 3: -sin x - cos^2 x / 2
  SymTensorField be3 = bakry_emery_tensor_m(*snap, 3.0);
  worst = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double x = grid->coord(i, 0);
    const double expected = -std::sin(x) - 0.5 * std::cos(x) * std::cos(x);
    worst = std::max(worst, std::abs(be3(0, 0, i) - expected));
  }
  CHECK(worst <= 1e-10);

  CHECK_THROWS_AS(bakry_emery_tensor_m(*snap, 1.0), parameter_error);
  CHECK_THROWS_AS(bakry_emery_tensor_m(*snap, 0.5), parameter_error);
}

TEST_CASE("tensor norms and relative eigenvalues") {
  auto grid = make_grid({16, 16}, {2 * M_PI, 2 * M_PI});
  SymTensorField g(grid);
  for (std::size_t node = 0; node < grid->size(); ++node) {
    const double x = grid->coord(node, 0);
    g.at(0, 0, node) = 1.5 + 0.3 * std::cos(x);
    g.at(0, 1, node) = 0.2;
    g.at(1, 1, node) = 1.0;
  }
  auto snap = make_snapshot(g, ScalarField(grid));

  // |g|^2 = n
  ScalarField norm_g = tensor_norm_sq(*snap, g);
  for (std::size_t i = 0; i < grid->size(); ++i)
    CHECK(norm_g[i] == doctest::Approx(2.0).epsilon(1e-12));

  SymTensorField zero(grid);
  CHECK(oracles::max_abs(tensor_norm_sq(*snap, zero)) == 0.0);

  // flat metric, T = diag(a, b): |T|^2 = a^2 + b^2, min rel eig of diag(2,-1)
  auto flat = make_flat_snapshot(grid);
  SymTensorField t(grid);
  for (std::size_t node = 0; node < grid->size(); ++node) {
    t.at(0, 0, node) = 2.0;
    t.at(1, 1, node) = -1.0;
  }
  ScalarField norm_t = tensor_norm_sq(*flat, t);
  for (std::size_t i = 0; i < grid->size(); ++i)
    CHECK(norm_t[i] == doctest::Approx(5.0).epsilon(1e-13));
  ScalarField eig = min_relative_eigenvalue(*flat, t);
  for (std::size_t i = 0; i < grid->size(); ++i)
    CHECK(eig[i] == doctest::Approx(-1.0).epsilon(1e-13));

  // T = c g relative to curved g
  SymTensorField cg = scaled(g, 0.7);
  ScalarField eig_cg = min_relative_eigenvalue(*snap, cg);
  for (std::size_t i = 0; i < grid->size(); ++i)
    CHECK(eig_cg[i] == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("relative eigenvalue of the warped Ricci tensor") {
  // Ric = (phi'' - phi'^2) g for dx^2 + e^{-2 phi} dtheta^2, so both
  // relative eigenvalues equal the closed-form factor.
  auto snap = warped_2d_snapshot(128);
  ScalarField eig = min_relative_eigenvalue(*snap, snap->ricci());
  double worst = 0.0;
  for (std::size_t node = 0; node < snap->grid().size(); ++node) {
    const double x = snap->grid().coord(node, 0);
    const double expected = -std::sin(x) - std::cos(x) * std::cos(x);
    worst = std::max(worst, std::abs(eig[node] - expected));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("integration against the weighted measure") {
  auto grid = make_grid({128}, {2 * M_PI});
  auto flat = make_flat_snapshot(grid);
  ScalarField one(grid);
  for (auto& x : one.values()) x = 1.0;
  CHECK(integrate(one, *flat) == doctest::Approx(2 * M_PI).epsilon(1e-14));

  ScalarField phi =
      ScalarField::sample(grid, [](const double* x) { return std::sin(x[0]); });
  auto weighted = make_snapshot(SymTensorField::identity(grid), phi);
  const double expected = 2.0 * M_PI * oracles::bessel_i0(1.0);
  CHECK(std::abs(integrate(one, *weighted) - expected) <= 1e-10);

  ScalarField odd =
      ScalarField::sample(grid, [](const double* x) { return std::sin(x[0]); });
  CHECK(std::abs(integrate(odd, *flat)) <= 1e-14);

  ScalarField bad(grid);
  bad[0] = std::nan("");
  CHECK_THROWS_AS(integrate(bad, *flat), input_error);
}

TEST_CASE("snapshot caches are computed once and shared") {
  auto snap = warped_2d_snapshot(32);
  const ChristoffelField* first = &snap->christoffel();
  const ChristoffelField* second = &snap->christoffel();
  CHECK(first == second);
  const SymTensorField* r1 = &snap->ricci();
  const SymTensorField* r2 = &snap->ricci();
  CHECK(r1 == r2);
}

TEST_CASE("snapshot construction rejects non-positive-definite metrics") {
  auto grid = make_grid({16, 16}, {2 * M_PI, 2 * M_PI});
  SymTensorField g = SymTensorField::identity(grid);
  g.at(0, 0, 40) = -0.5;
  CHECK_THROWS_AS(make_snapshot(std::move(g), ScalarField(grid)),
                  geometry_error);
}
