#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <sstream>
#include <vector>

#include "bsq5/diagnostics.hpp"
#include "bsq5/operator.hpp"
#include "bsq5/rng.hpp"

using namespace bsq5;

namespace {

// test-local polynomial oracle: evaluation and exact differentiation
struct Poly {
  std::vector<double> c;  // c[k] x^k
  double operator()(double x) const {
    double acc = 0.0;
    for (size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
  }
  Poly deriv() const {
    if (c.size() <= 1) return {{0.0}};
    std::vector<double> d(c.size() - 1);
    for (size_t k = 1; k < c.size(); ++k) d[k - 1] = k * c[k];
    return {d};
  }
};

Poly mul(const Poly& a, const Poly& b) {
  std::vector<double> c(a.c.size() + b.c.size() - 1, 0.0);
  for (size_t i = 0; i < a.c.size(); ++i)
    for (size_t j = 0; j < b.c.size(); ++j) c[i + j] += a.c[i] * b.c[j];
  return {c};
}

// x^2 (L-x)^2 (x + 0.3): quintic vanishing to second order at both ends
Poly eta_poly(double L) {
  return mul(mul(Poly{{0, 0, 1}}, Poly{{L * L, -2 * L, 1}}), Poly{{0.3, 1}});
}
// x^3 (L-x)^3
Poly u_poly(double L) {
  Poly q{{0, 0, 0, 1}};
  Poly r{{L * L * L, -3 * L * L, 3 * L, -1}};
  return mul(q, r);
}

double scalar_generator(const ModelCoefficients& c, const Poly& f, double x) {
  const Poly f1 = f.deriv();
  const Poly f3 = f1.deriv().deriv();
  const Poly f5 = f3.deriv().deriv();
  return -f1(x) + c.a * f3(x) - c.b * f5(x);
}

ModelCoefficients direct_coeffs(double a, double b, double al1, double al2, double L) {
  ModelCoefficients c;
  c.a = a;
  c.b = b;
  c.alpha1 = al1;
  c.alpha2 = al2;
  c.L = L;
  return c;
}

// smooth pair vanishing to third order at both ends (compatible with every
// boundary-condition family); the seed varies the modulation phases
State smooth_compatible_state(const Grid& g, std::uint64_t seed) {
  Rng rng(seed);
  const double p1 = rng.uniform(0.0, 6.28), p2 = rng.uniform(0.0, 6.28);
  State s(g);
  for (int j = 0; j <= g.N; ++j) {
    const double x = g.node(j);
    const double env = std::pow(std::sin(M_PI * x / g.L), 3);
    s.eta[j] = env * (1.0 + 0.3 * std::sin(2 * M_PI * x / g.L + p1));
    s.u[j] = env * (1.0 - 0.4 * std::cos(M_PI * x / g.L + p2));
  }
  s.eta[0] = s.eta[g.N] = s.u[0] = s.u[g.N] = 0.0;
  return s;
}

}  // namespace

TEST_CASE("grid construction") {
  CHECK(make_grid(1.0, 100).h() == doctest::Approx(0.01));
  CHECK(make_grid(M_PI, 128).h() == doctest::Approx(M_PI / 128));
  CHECK_THROWS_AS(make_grid(1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(-1.0, 64), std::invalid_argument);
}

TEST_CASE("zero state maps to zero") {
  const auto c = direct_coeffs(0.5, 1.0, 1.0, 1.0, 1.0);
  const auto g = make_grid(1.0, 64);
  for (auto fam : {BcFamily::Dissipative, BcFamily::Conservative, BcFamily::Clamped}) {
    const auto op = assemble_operator(c, g, fam);
    const State z(g);
    const State out = op.apply(z);
    for (double v : out.eta) CHECK(v == 0.0);
    for (double v : out.u) CHECK(v == 0.0);
  }
}

TEST_CASE("block symmetry on (f, f) input") {
  const auto c = direct_coeffs(0.7, 1.3, 1.0, 1.0, 2.0);
  const auto g = make_grid(2.0, 64);
  const auto op = assemble_operator(c, g, BcFamily::Clamped);
  State s(g);
  const Poly f = u_poly(2.0);
  for (int j = 0; j <= g.N; ++j) s.eta[j] = s.u[j] = f(g.node(j));
  const State out = op.apply(s);
  for (int j = 0; j <= g.N; ++j) CHECK(out.eta[j] == out.u[j]);

  // antisymmetric input reduces to the scalar problem with flipped sign
  for (int j = 0; j <= g.N; ++j) s.u[j] = -s.eta[j];
  const State out2 = op.apply(s);
  for (int j = 0; j <= g.N; ++j) CHECK(out2.eta[j] == -out2.u[j]);

  // at unit gains the feedback closure has the same symmetry
  const auto opd = assemble_operator(c, g, BcFamily::Dissipative);
  for (int j = 0; j <= g.N; ++j) s.u[j] = s.eta[j];
  const State out3 = opd.apply(s);
  for (int j = 0; j <= g.N; ++j)
    CHECK(out3.eta[j] == doctest::Approx(out3.u[j]).epsilon(1e-12));
}

TEST_CASE("interior rows reproduce the analytic generator at O(h^2)") {
  const double L = 1.5;
  const auto c = direct_coeffs(-0.5, 0.8, 1.0, 1.0, L);
  const Poly fe = eta_poly(L), fu = u_poly(L);

  auto interior_error = [&](int N, BcFamily fam) {
    const auto g = make_grid(L, N);
    const auto op = assemble_operator(c, g, fam);
    State s(g);
    for (int j = 0; j <= N; ++j) {
      s.eta[j] = fe(g.node(j));
      s.u[j] = fu(g.node(j));
    }
    const State out = op.apply(s);
    double err = 0.0;
    for (int j = 3; j <= N - 3; ++j) {
      err = std::max(err, std::abs(out.eta[j] - scalar_generator(c, fu, g.node(j))));
      err = std::max(err, std::abs(out.u[j] - scalar_generator(c, fe, g.node(j))));
    }
    return err;
  };

  for (auto fam : {BcFamily::Dissipative, BcFamily::Conservative}) {
    const double e64 = interior_error(64, fam);
    const double e128 = interior_error(128, fam);
    const double e256 = interior_error(256, fam);
    CHECK(std::log2(e64 / e128) > 1.8);
    CHECK(std::log2(e128 / e256) > 1.8);
  }
}

TEST_CASE("conservative quadratic form shrinks under refinement") {
  const auto base = direct_coeffs(-0.0284700655, 0.0012158169, 1.0, 1.0, 2 * M_PI);
  double prev = 0.0;
  for (int N : {64, 128, 256}) {
    const auto g = make_grid(base.L, N);
    const auto op = assemble_operator(base, g, BcFamily::Conservative);
    const auto s = smooth_compatible_state(g, 11);
    const auto As = op.apply(s);
    const double form = inner_product(As, s, g) / norm_sq(s, g);
    if (N > 64) CHECK(std::abs(form) < 0.6 * std::abs(prev));
    if (N == 256) CHECK(std::abs(form) < 0.05 * g.h());  // well inside O(h)
    prev = form;
  }
}

TEST_CASE("dissipative quadratic form matches the boundary-trace law") {
  const auto base = direct_coeffs(-0.0284700655, 0.0012158169, 1.3, 0.6, 2 * M_PI);
  double prev = 0.0;
  for (int N : {64, 128, 256}) {
    const auto g = make_grid(base.L, N);
    const auto op = assemble_operator(base, g, BcFamily::Dissipative);
    const auto s = smooth_compatible_state(g, 17);
    const auto As = op.apply(s);
    const auto tr = op.second_derivative_traces(s);
    const double form = inner_product(As, s, g);
    const double target = -base.alpha1 * base.b * tr.eta_xx_0 * tr.eta_xx_0 -
                          base.alpha2 * base.b * tr.eta_xx_L * tr.eta_xx_L;
    const double defect = std::abs(form - target) / norm_sq(s, g);
    if (N > 64) CHECK(defect < 0.6 * prev);
    prev = defect;
  }
}

TEST_CASE("dissipative traces satisfy the feedback coupling exactly") {
  const auto c = direct_coeffs(0.3, 1.0, 1.7, 0.4, 1.0);
  const auto g = make_grid(1.0, 64);
  const auto op = assemble_operator(c, g, BcFamily::Dissipative);
  const auto s = smooth_compatible_state(g, 3);
  const auto tr = op.second_derivative_traces(s);
  CHECK(tr.u_xx_0 == doctest::Approx(-c.alpha1 * tr.eta_xx_0).epsilon(1e-12));
  CHECK(tr.u_xx_L == doctest::Approx(c.alpha2 * tr.eta_xx_L).epsilon(1e-12));
}

TEST_CASE("second-derivative trace accuracy") {
  const double L = 1.0;
  const auto c = direct_coeffs(0.0, 1.0, 0.0, 0.0, L);
  const Poly f = mul(Poly{{0, 0, 1}}, Poly{{L * L, -2 * L, 1}});  // x^2 (L-x)^2
  for (int N : {64, 128}) {
    // the extension reproduces quartics exactly, so the trace is 2 L^2 up
    // to roundoff
    const auto g = make_grid(L, N);
    const auto op = assemble_operator(c, g, BcFamily::Dissipative);
    State s(g);
    for (int j = 0; j <= N; ++j) s.eta[j] = f(g.node(j));
    const auto tr = op.second_derivative_traces(s);
    CHECK(std::abs(tr.eta_xx_0 - 2 * L * L) < 1e-7);
  }

  SUBCASE("convergence on a non-polynomial profile") {
    double prev = 0.0;
    for (int N : {64, 128}) {
      const auto g = make_grid(L, N);
      const auto op = assemble_operator(c, g, BcFamily::Dissipative);
      State s(g);
      for (int j = 0; j <= N; ++j)
        s.eta[j] = std::pow(std::sin(M_PI * g.node(j) / L), 2);
      const auto tr = op.second_derivative_traces(s);
      const double exact = 2.0 * M_PI * M_PI / (L * L);
      const double err = std::abs(tr.eta_xx_0 - exact);
      if (N == 128) CHECK(err < 0.3 * prev);
      prev = err;
    }
  }

  SUBCASE("zero state has zero traces") {
    const auto g = make_grid(L, 64);
    const auto op = assemble_operator(c, g, BcFamily::Dissipative);
    const auto tr = op.second_derivative_traces(State(g));
    CHECK(tr.eta_xx_0 == 0.0);
    CHECK(tr.eta_xx_L == 0.0);
    CHECK(tr.u_xx_0 == 0.0);
    CHECK(tr.u_xx_L == 0.0);
  }

  SUBCASE("conservative closure pins eta_xx(0) to zero") {
    const auto g = make_grid(L, 64);
    const auto op = assemble_operator(c, g, BcFamily::Conservative);
    const auto s = smooth_compatible_state(g, 5);
    const auto tr = op.second_derivative_traces(s);
    CHECK(tr.eta_xx_0 == 0.0);
    CHECK(tr.u_xx_L == 0.0);
  }
}

TEST_CASE("block bandwidth stays within seven nodes") {
  const auto c = direct_coeffs(0.5, 1.0, 1.0, 1.0, 1.0);
  const auto g = make_grid(1.0, 48);
  const int n = g.n_nodes();
  for (auto fam : {BcFamily::Dissipative, BcFamily::Conservative, BcFamily::Clamped}) {
    const auto op = assemble_operator(c, g, fam);
    const auto M = op.dense_stacked();
    const int d = 2 * n;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (M[static_cast<size_t>(i) * d + j] == 0.0) continue;
        const int ni = i % n, nj = j % n;
        CHECK(std::abs(ni - nj) <= 7);
      }
  }
}

TEST_CASE("triplet dump matches the dense operator") {
  const auto c = direct_coeffs(0.2, 0.9, 1.0, 1.0, 1.0);
  const auto g = make_grid(1.0, 32);
  const auto op = assemble_operator(c, g, BcFamily::Conservative);
  std::ostringstream os;
  op.dump_triplets(os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header.find("MatrixMarket") != std::string::npos);
  int rows, cols;
  long nnz;
  is >> rows >> cols >> nnz;
  CHECK(rows == op.dim());
  const auto M = op.dense_stacked();
  long count = 0;
  int i, j;
  double v;
  while (is >> i >> j >> v) {
    CHECK(M[static_cast<size_t>(i - 1) * rows + (j - 1)] == doctest::Approx(v));
    ++count;
  }
  CHECK(count == nnz);
}

TEST_CASE("assembly rejects invalid inputs") {
  const auto g = make_grid(1.0, 64);
  ModelCoefficients bad = direct_coeffs(3.0, 1.0, 1.0, 1.0, 1.0);
  CHECK_THROWS_AS(assemble_operator(bad, g, BcFamily::Dissipative), std::invalid_argument);
  ModelCoefficients mismatch = direct_coeffs(0.0, 1.0, 1.0, 1.0, 2.0);
  CHECK_THROWS_AS(assemble_operator(mismatch, g, BcFamily::Dissipative),
                  std::invalid_argument);
  const auto c = direct_coeffs(0.0, 1.0, 1.0, 1.0, 1.0);
  const auto op = assemble_operator(c, g, BcFamily::Dissipative);
  State wrong;
  wrong.eta.assign(10, 0.0);
  wrong.u.assign(10, 0.0);
  CHECK_THROWS_AS(op.apply(wrong), std::invalid_argument);
}
