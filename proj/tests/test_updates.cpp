#include <catch2/catch_amalgamated.hpp>

#include "anmf/anmf.hpp"
#include "test_util.hpp"

using namespace anmf;
using testutil::random_dense;
using testutil::random_sparse;
using testutil::u01;

namespace {

// Quadratic objective of the W subproblem up to the constant ||M||^2:
// q(W) = -2<A, W> + <W^T W, B>. Differences and gradients of the true
// objective match this exactly.
double subproblem_objective(const DenseMatrix& w, const DenseMatrix& a, const DenseMatrix& b) {
  return -2.0 * dot(a, w) + dot(gram_cols(w), b);
}

struct RandomInstance {
  Matrix m;
  DenseMatrix w, h, a, b;
};

RandomInstance make_instance(std::mt19937_64& g, bool sparse) {
  const index_t m = 2 + static_cast<index_t>(g() % 29);
  const index_t n = 2 + static_cast<index_t>(g() % 29);
  const index_t r = 1 + static_cast<index_t>(g() % 5);
  RandomInstance inst;
  inst.m = sparse ? Matrix(random_sparse(m, n, 0.1, g)) : Matrix(random_dense(m, n, g));
  inst.w = random_dense(m, r, g);
  inst.h = random_dense(r, n, g);
  inst.a = right_product(inst.m, inst.h);
  inst.b = gram(inst.h);
  return inst;
}

}  // namespace

TEST_CASE("mu_update examples") {
  SECTION("scalar arithmetic") {
    const DenseMatrix out = mu_update(DenseMatrix::from_rows({{2.0}}),
                                      DenseMatrix::from_rows({{4.0}}),
                                      DenseMatrix::from_rows({{1.0}}));
    REQUIRE(out(0, 0) == 4.0);  // WB = 2, ratio = 2
  }
  SECTION("A = WB is a fixed point") {
    auto g = testutil::rng(31);
    const DenseMatrix w = random_dense(5, 3, g);
    const DenseMatrix b = gram(random_dense(3, 7, g));
    const DenseMatrix a = matmul(w, b);
    const DenseMatrix out = mu_update(w, a, b);
    for (index_t i = 0; i < w.values.size(); ++i) REQUIRE(out.values[i] == w.values[i]);
  }
  SECTION("vanishing numerator lands on the delta floor, not zero") {
    Safeguards sg;
    sg.delta = 1e-16;
    const DenseMatrix out = mu_update(DenseMatrix::from_rows({{1.0}}),
                                      DenseMatrix::from_rows({{0.0}}),
                                      DenseMatrix::from_rows({{1.0}}), sg);
    REQUIRE(out(0, 0) == 1e-16);
  }
  SECTION("zero B exercises the denominator guard") {
    const DenseMatrix out = mu_update(DenseMatrix::from_rows({{0.5}}),
                                      DenseMatrix::from_rows({{0.0}}),
                                      DenseMatrix::from_rows({{0.0}}));
    REQUIRE(out(0, 0) == 1e-16);
    REQUIRE(std::isfinite(out(0, 0)));
  }
  SECTION("negative W is rejected") {
    REQUIRE_THROWS_AS(mu_update(DenseMatrix::from_rows({{-1.0}}),
                                DenseMatrix::from_rows({{1.0}}),
                                DenseMatrix::from_rows({{1.0}})),
                      std::invalid_argument);
  }
}

TEST_CASE("mu_update keeps every entry at or above delta") {
  auto g = testutil::rng(37);
  Safeguards sg;
  sg.delta = 1e-16;
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = make_instance(g, trial % 2 == 0);
    DenseMatrix w = inst.w;
    for (double& v : w.values) v = std::max(v, sg.delta);
    // zero out some numerator entries to push iterates toward the floor
    DenseMatrix a = inst.a;
    for (index_t i = 0; i < a.values.size(); i += 3) a.values[i] = 0.0;
    const DenseMatrix out = mu_update(w, a, inst.b, sg);
    REQUIRE(out.min_entry() >= 1e-16);
  }
}

TEST_CASE("hals_update examples") {
  SECTION("single column closed form") {
    const DenseMatrix out = hals_update(DenseMatrix::from_rows({{5.0}, {5.0}}),
                                        DenseMatrix::from_rows({{3.0}, {-1.0}}),
                                        DenseMatrix::from_rows({{2.0}}));
    REQUIRE(out(0, 0) == 1.5);
    REQUIRE(out(1, 0) == 0.0);  // column is not all-zero, so no reseed
  }
  SECTION("identity Gram decouples the columns") {
    auto g = testutil::rng(41);
    const DenseMatrix w = random_dense(6, 3, g);
    DenseMatrix a = random_dense(6, 3, g);
    for (index_t i = 0; i < a.values.size(); i += 2) a.values[i] -= 0.9;
    const DenseMatrix out = hals_update(w, a, DenseMatrix::identity(3));
    for (index_t i = 0; i < a.values.size(); ++i)
      REQUIRE(out.values[i] == std::max(0.0, a.values[i]));
  }
  SECTION("all-negative numerator reseeds the zeroed column") {
    const DenseMatrix out = hals_update(DenseMatrix::from_rows({{1.0}, {2.0}}),
                                        DenseMatrix::from_rows({{-3.0}, {-1.0}}),
                                        DenseMatrix::from_rows({{1.0}}));
    REQUIRE(out(0, 0) == 1e-16);
    REQUIRE(out(1, 0) == 1e-16);
  }
  SECTION("r=1 equals max(0, A/B11) exactly") {
    auto g = testutil::rng(43);
    for (int trial = 0; trial < 10; ++trial) {
      const DenseMatrix w = random_dense(7, 1, g);
      DenseMatrix a = random_dense(7, 1, g);
      for (double& v : a.values) v -= 0.5;
      const double b11 = 0.1 + u01(g);
      const DenseMatrix out = hals_update(w, a, DenseMatrix::from_rows({{b11}}));
      bool any_nonzero = false;
      for (index_t i = 0; i < 7; ++i)
        if (std::max(0.0, a(i, 0) / b11) != 0.0) any_nonzero = true;
      if (!any_nonzero) continue;  // reseed case, covered above
      for (index_t i = 0; i < 7; ++i) REQUIRE(out(i, 0) == std::max(0.0, a(i, 0) / b11));
    }
  }
  SECTION("near-zero diagonal leaves the column unchanged") {
    const DenseMatrix w = DenseMatrix::from_rows({{2.0, 3.0}, {4.0, 5.0}});
    DenseMatrix b(2, 2);
    b(0, 0) = 1.0;
    b(1, 1) = 0.0;  // degenerate second column
    auto g = testutil::rng(47);
    const DenseMatrix out = hals_update(w, random_dense(2, 2, g), b);
    REQUIRE(out(0, 1) == 3.0);
    REQUIRE(out(1, 1) == 5.0);
  }
  SECTION("asymmetric B is rejected") {
    REQUIRE_THROWS_AS(hals_update(DenseMatrix::from_rows({{1.0, 1.0}}),
                                  DenseMatrix::from_rows({{1.0, 1.0}}),
                                  DenseMatrix::from_rows({{1.0, 0.5}, {0.4, 1.0}})),
                      std::invalid_argument);
  }
}

TEST_CASE("hals column updates satisfy their per-column optimality conditions") {
  auto g = testutil::rng(53);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = make_instance(g, trial % 3 == 0);
    DenseMatrix w = inst.w;
    const double tol = 1e-9 * frob_norm(inst.a);
    for (index_t p = 0; p < w.cols; ++p) {
      hals_update_column(w, inst.a, inst.b, p);
      bool reseeded = true;
      for (index_t i = 0; i < w.rows; ++i)
        if (w(i, p) != Safeguards{}.reinit_value) reseeded = false;
      if (reseeded) continue;
      // residual correlation for column p, checked before later columns move
      const DenseMatrix wb = matmul(w, inst.b);
      for (index_t i = 0; i < w.rows; ++i) {
        const double resid = inst.a(i, p) - wb(i, p);
        if (w(i, p) > 0.0) {
          REQUIRE(std::abs(resid) <= tol);
        } else {
          REQUIRE(resid <= tol);
        }
      }
    }
  }
}

TEST_CASE("pg_update examples") {
  SECTION("interior stationary point is a fixed point") {
    auto g = testutil::rng(59);
    const DenseMatrix w = random_dense(4, 2, g);
    const DenseMatrix b = gram(random_dense(2, 6, g));
    const DenseMatrix a = matmul(w, b);  // gradient 2WB - 2A vanishes
    const PgStep st = pg_update(w, a, b);
    REQUIRE_FALSE(st.stalled);
    for (index_t i = 0; i < w.values.size(); ++i) REQUIRE(st.w.values[i] == w.values[i]);
  }
  SECTION("projection clips at the boundary") {
    PgParams pp;
    pp.initial_step = 0.5;
    const DenseMatrix w = DenseMatrix::from_rows({{1.0}});
    const DenseMatrix a = DenseMatrix::from_rows({{0.0}});
    const DenseMatrix b = DenseMatrix::from_rows({{1.0}});
    const PgStep st = pg_update(w, a, b, pp);
    // gradient is 2, candidate max(0, 1 - 0.5*2) = 0; the quadratic
    // objective confirms acceptance: q(0) = 0 < q(1) = 1
    REQUIRE(subproblem_objective(st.w, a, b) < subproblem_objective(w, a, b));
    REQUIRE(st.w(0, 0) == 0.0);
    REQUIRE(st.step == 0.5);
    REQUIRE_FALSE(st.stalled);
  }
  SECTION("exhausted backtracking returns W unchanged with the shrunk step") {
    PgParams pp;
    pp.max_backtracks = 0;
    const DenseMatrix w = DenseMatrix::from_rows({{1.0}});
    const PgStep st = pg_update(w, DenseMatrix::from_rows({{0.0}}),
                                DenseMatrix::from_rows({{1.0}}), pp);
    REQUIRE(st.stalled);
    REQUIRE(st.w(0, 0) == 1.0);
    REQUIRE(st.step == pp.initial_step);  // beta^0
  }
}

TEST_CASE("pg gradient matches central finite differences") {
  auto g = testutil::rng(61);
  const double h_fd = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix w = random_dense(4, 3, g);
    const DenseMatrix hmat = random_dense(3, 8, g);
    const DenseMatrix b = gram(hmat);
    const DenseMatrix a = random_dense(4, 3, g);
    // G = 2WB - 2A
    DenseMatrix grad = matmul(w, b);
    for (index_t i = 0; i < grad.values.size(); ++i)
      grad.values[i] = 2.0 * grad.values[i] - 2.0 * a.values[i];
    for (index_t i = 0; i < w.rows; ++i)
      for (index_t j = 0; j < w.cols; ++j) {
        DenseMatrix wp = w, wm = w;
        wp(i, j) += h_fd;
        wm(i, j) -= h_fd;
        const double fd =
            (subproblem_objective(wp, a, b) - subproblem_objective(wm, a, b)) / (2.0 * h_fd);
        REQUIRE(fd == Catch::Approx(grad(i, j)).epsilon(1e-5));
      }
  }
}

TEST_CASE("no update rule increases the factorization error") {
  auto g = testutil::rng(67);
  Safeguards sg;
  for (int trial = 0; trial < 60; ++trial) {
    auto inst = make_instance(g, trial % 2 == 1);
    DenseMatrix w = inst.w;
    for (double& v : w.values) v = std::max(v, sg.delta);
    const double before = frob_error(inst.m, w, inst.h);
    const double allowed = before * (1.0 + 1e-10);

    REQUIRE(frob_error(inst.m, mu_update(w, inst.a, inst.b, sg), inst.h) <= allowed);
    REQUIRE(frob_error(inst.m, hals_update(w, inst.a, inst.b, sg), inst.h) <= allowed);
    const PgStep st = pg_update(w, inst.a, inst.b);
    REQUIRE(frob_error(inst.m, st.w, inst.h) <= allowed);
    REQUIRE(st.w.min_entry() >= 0.0);
  }
}

TEST_CASE("transposed-kernel H update equals the direct H-side formula") {
  auto g = testutil::rng(71);
  for (int trial = 0; trial < 15; ++trial) {
    const index_t m = 3 + static_cast<index_t>(g() % 10);
    const index_t n = 3 + static_cast<index_t>(g() % 10);
    const index_t r = 1 + static_cast<index_t>(g() % 4);
    const DenseMatrix mat = random_dense(m, n, g);
    const DenseMatrix w = random_dense(m, r, g);
    const DenseMatrix h = random_dense(r, n, g);
    const DenseMatrix wtm = left_product(w, mat);  // r x n
    const DenseMatrix wtw = gram_cols(w);

    // direct multiplicative H-update, written out entrywise
    const DenseMatrix wtwh = matmul(wtw, h);
    DenseMatrix direct(r, n);
    for (index_t p = 0; p < r; ++p)
      for (index_t j = 0; j < n; ++j) {
        const double denom = std::max(wtwh(p, j), Safeguards{}.denom_floor);
        direct(p, j) = std::max(Safeguards{}.delta, h(p, j) * wtm(p, j) / denom);
      }

    // transposed route: update H^T as a "W" with A = M^T W and B = W^T W
    const DenseMatrix via_transpose =
        transpose(mu_update(transpose(h), transpose(wtm), wtw));

    for (index_t i = 0; i < direct.values.size(); ++i) {
      const double ref = direct.values[i];
      REQUIRE(std::abs(via_transpose.values[i] - ref) <= 1e-13 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("hals transposed route matches a direct row sweep on H") {
  auto g = testutil::rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    const index_t m = 3 + static_cast<index_t>(g() % 8);
    const index_t n = 3 + static_cast<index_t>(g() % 8);
    const index_t r = 1 + static_cast<index_t>(g() % 3);
    const DenseMatrix mat = random_dense(m, n, g);
    const DenseMatrix w = random_dense(m, r, g);
    const DenseMatrix h = random_dense(r, n, g);
    const DenseMatrix wtm = left_product(w, mat);
    const DenseMatrix wtw = gram_cols(w);

    // direct cyclic row sweep on H
    DenseMatrix direct = h;
    for (index_t p = 0; p < r; ++p) {
      if (wtw(p, p) <= Safeguards{}.denom_floor) continue;
      bool all_zero = true;
      for (index_t j = 0; j < n; ++j) {
        double s = wtm(p, j);
        for (index_t l = 0; l < p; ++l) s -= wtw(p, l) * direct(l, j);
        for (index_t l = p + 1; l < r; ++l) s -= wtw(p, l) * direct(l, j);
        direct(p, j) = std::max(0.0, s / wtw(p, p));
        if (direct(p, j) != 0.0) all_zero = false;
      }
      if (all_zero)
        for (index_t j = 0; j < n; ++j) direct(p, j) = Safeguards{}.reinit_value;
    }

    const DenseMatrix via_transpose =
        transpose(hals_update(transpose(h), transpose(wtm), wtw));
    for (index_t i = 0; i < direct.values.size(); ++i) {
      const double ref = direct.values[i];
      REQUIRE(std::abs(via_transpose.values[i] - ref) <= 1e-13 * std::max(1.0, std::abs(ref)));
    }
  }
}
