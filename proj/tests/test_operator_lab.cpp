// Tests for the truncated-operator layer: branch convention of K(z), the
// certified perturbation table, B(z) orientation and Hilbert-Schmidt bound,
// the exact resolvent factorization, and the text-format round trip.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rieszlab/operator_lab.hpp"
#include "rieszlab/sequence_models.hpp"

using namespace rieszlab;

namespace {

// Pairwise antisymmetric coupling on (2k-1, 2k) with strength s_k/2: the
// sparse-spike model whose 2x2 blocks have closed-form eigensystems.
PerturbationMatrix spike_pair_table(Index size) {
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(size, size);
  for (Index k = 1; 2 * k <= size; ++k) {
    double s = counterexample_s(k);
    v(2 * k - 2, 2 * k - 1) = Complex(-0.5 * s, 0.0);
    v(2 * k - 1, 2 * k - 2) = Complex(0.5 * s, 0.0);
  }
  return PerturbationMatrix::dense(std::move(v),
                                   WeightSequence::counterexample());
}

// Deterministic certified table: v_jk = omega_j omega_k * u_jk with
// |u_jk| <= 1 from a small linear congruential generator.
PerturbationMatrix random_certified(const WeightSequence& w, Index size,
                                    std::uint64_t seed) {
  std::uint64_t state = seed;
  auto next_unit = [&state]() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  };
  Eigen::MatrixXcd v(size, size);
  for (Index j = 1; j <= size; ++j) {
    for (Index k = 1; k <= size; ++k) {
      double cap = omega(w, j) * omega(w, k);
      double re = next_unit(), im = next_unit();
      double len = std::hypot(re, im);
      Complex dir = len == 0.0 ? Complex(1.0, 0.0) : Complex(re / len, im / len);
      v(j - 1, k - 1) = cap * next_unit() * dir;
    }
  }
  return PerturbationMatrix::dense(std::move(v), w);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("K diagonal: principal branch with arg in (-pi, pi]") {
  Spectrum lin = Spectrum::linear();

  // (2 - 1)^{-1/2} = 1.
  Eigen::VectorXcd d1 = k_diag(lin, {2.0, 0.0}, 1);
  CHECK(std::abs(d1(0) - Complex(1.0, 0.0)) <= 1e-16);

  // (-1 - 1)^{-1/2}: arg(-2) = +pi, so the root is -i/sqrt(2).
  Eigen::VectorXcd dm = k_diag(lin, {-1.0, 0.0}, 1);
  CHECK(std::abs(dm(0) - Complex(0.0, -1.0 / std::sqrt(2.0))) <= 1e-15);

  // (1 + i - 1)^{-1/2} = i^{-1/2} = e^{-i pi/4}.
  Eigen::VectorXcd di = k_diag(lin, {1.0, 1.0}, 1);
  CHECK(std::abs(di(0) - Complex(std::sqrt(0.5), -std::sqrt(0.5))) <= 1e-15);

  // z exactly on the truncated spectrum is rejected.
  CHECK_THROWS_AS(k_diag(lin, {2.0, 0.0}, 3), std::invalid_argument);

  // Squaring K recovers the diagonal resolvent on either side of the cut.
  std::vector<Complex> zs = {{-2.5, 0.0}, {0.3, 1.7}, {10.25, 0.0},
                             {-4.0, -3.0}, {5.5, -0.1}};
  for (Complex z : zs) {
    Eigen::VectorXcd d = k_diag(lin, z, 12);
    for (Index j = 1; j <= 12; ++j) {
      Complex expect = 1.0 / (z - mu(lin, j));
      CHECK(std::abs(d(j - 1) * d(j - 1) - expect) <= 1e-15 * std::abs(expect));
    }
  }
}

TEST_CASE("perturbation table: dominance certificate and band structure") {
  WeightSequence w = WeightSequence::explicit_list({0.5, 0.5});

  Eigen::MatrixXcd bad(2, 2);
  bad << 0.0, 0.26, 0.0, 0.0;  // 0.26 > 0.25
  bool threw = false;
  try {
    PerturbationMatrix::dense(bad, w);
  } catch (const std::invalid_argument& e) {
    threw = true;
    CHECK(std::string(e.what()).find("(1, 2)") != std::string::npos);
  }
  CHECK(threw);

  Eigen::MatrixXcd edge(2, 2);
  edge << 0.0, 0.25 + 5e-13, 0.25, 0.0;  // inside the 1e-12 slack
  CHECK_NOTHROW(PerturbationMatrix::dense(edge, w));

  // Weights vanish beyond an explicit list's support.
  Eigen::MatrixXcd beyond = Eigen::MatrixXcd::Zero(2, 2);
  beyond(1, 1) = 0.1;
  CHECK_THROWS_AS(
      PerturbationMatrix::dense(beyond, WeightSequence::explicit_list({1.0})),
      std::invalid_argument);

  // Banded storage forbids entries outside the band.
  WeightSequence w4 = WeightSequence::explicit_list({1.0, 1.0, 1.0, 1.0});
  Eigen::MatrixXcd off = Eigen::MatrixXcd::Zero(4, 4);
  off(0, 2) = 0.5;
  CHECK_THROWS_AS(PerturbationMatrix::banded(off, 1, w4),
                  std::invalid_argument);
  Eigen::MatrixXcd tri = Eigen::MatrixXcd::Zero(4, 4);
  tri(0, 1) = 0.5;
  tri(1, 0) = 0.5;
  tri(2, 3) = Complex(0.1, 0.2);
  PerturbationMatrix vb = PerturbationMatrix::banded(tri, 1, w4);
  CHECK(vb.storage() == Storage::banded);
  CHECK(vb.bandwidth() == 1);

  // The spike pairs saturate the certificate exactly.
  CHECK_NOTHROW(spike_pair_table(18));

  PerturbationMatrix z = PerturbationMatrix::zero(3, w4);
  CHECK(z.size() == 3);
  CHECK(z.values().norm() == 0.0);
}

TEST_CASE("B matrix: entries, orientation, and realness off the cut") {
  Spectrum lin = Spectrum::linear();

  WeightSequence w1 = WeightSequence::explicit_list({0.6});
  Eigen::MatrixXcd v1(1, 1);
  v1 << 0.3;
  PerturbationMatrix V1 = PerturbationMatrix::dense(v1, w1);
  Eigen::MatrixXcd B1 = b_matrix(lin, V1, {3.0, 0.0}, 1);
  CHECK(B1(0, 0).real() == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(B1(0, 0).imag() == 0.0);

  WeightSequence wz = WeightSequence::explicit_list({1.0, 1.0, 1.0});
  Eigen::MatrixXcd Bz =
      b_matrix(lin, PerturbationMatrix::zero(3, wz), {2.5, 1.0}, 3);
  CHECK(Bz.norm() == 0.0);

  // Antisymmetric coupling: column l of B carries the image of psi_l, so
  // B(1,2) picks up v_21 and B(2,1) picks up v_12.
  WeightSequence w2 = WeightSequence::explicit_list({0.6, 0.5});
  Eigen::MatrixXcd va(2, 2);
  va << 0.0, -0.3, 0.3, 0.0;
  PerturbationMatrix Va = PerturbationMatrix::dense(va, w2);
  Eigen::MatrixXcd Ba = b_matrix(lin, Va, {10.0, 0.0}, 2);
  double k1 = 1.0 / 3.0, k2 = 1.0 / std::sqrt(8.0);
  CHECK(Ba(0, 1).real() == doctest::Approx(0.3 * k1 * k2).epsilon(1e-14));
  CHECK(Ba(1, 0).real() == doctest::Approx(-0.3 * k1 * k2).epsilon(1e-14));
  CHECK(Ba(0, 0) == Complex(0.0, 0.0));

  // Real z above the truncated spectrum and a real table keep B real.
  WeightSequence pw = WeightSequence::power(0.8);
  Eigen::MatrixXcd vreal(8, 8);
  for (Index j = 1; j <= 8; ++j) {
    for (Index k = 1; k <= 8; ++k) {
      vreal(j - 1, k - 1) =
          omega(pw, j) * omega(pw, k) * std::cos(3.0 * j + k);
    }
  }
  PerturbationMatrix Vreal = PerturbationMatrix::dense(vreal, pw);
  Eigen::MatrixXcd Br = b_matrix(lin, Vreal, {20.5, 0.0}, 8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      CHECK(Br(r, c).imag() == 0.0);
    }
  }

  // Entrywise bound inherited from the certificate.
  PerturbationMatrix Vc = random_certified(pw, 30, 777);
  Complex z{0.5, 2.0};
  Eigen::MatrixXcd Bc = b_matrix(lin, Vc, z, 30);
  for (Index l = 1; l <= 30; ++l) {
    for (Index m = 1; m <= 30; ++m) {
      double cap = omega(pw, l) * omega(pw, m) /
                       std::sqrt(std::abs(z - mu(lin, l)) *
                                 std::abs(z - mu(lin, m))) +
                   1e-12;
      CHECK(std::abs(Bc(m - 1, l - 1)) <= cap);
    }
  }
}

TEST_CASE("Hilbert-Schmidt bound on B") {
  Spectrum lin = Spectrum::linear();
  WeightSequence pw = WeightSequence::power(1.0);

  HsCheck z0 = hs_bound_check(lin, pw, PerturbationMatrix::zero(10, pw),
                              {-5.0, 0.0}, 10);
  CHECK(z0.hs_norm == 0.0);
  CHECK(z0.bound > 0.0);

  // Saturated rank-1 table: equality at the truncated depth.
  Index n = 40;
  Eigen::MatrixXcd sat(n, n);
  for (Index j = 1; j <= n; ++j) {
    for (Index k = 1; k <= n; ++k) {
      sat(j - 1, k - 1) = omega(pw, j) * omega(pw, k);
    }
  }
  PerturbationMatrix Vs = PerturbationMatrix::dense(sat, pw);
  HsCheck eq = hs_bound_check(lin, pw, Vs, {-5.0, 0.0}, n);
  CHECK(eq.hs_norm == doctest::Approx(eq.bound).epsilon(1e-12));

  // Certified random tables stay below the bound at every sampled z.
  PerturbationMatrix Vr = random_certified(pw, 50, 2024);
  std::vector<Complex> zs = {{-5.0, 0.0}, {0.5, 2.0}, {3.25, 0.0},
                             {100.5, 0.0}, {7.5, -4.0}};
  for (Complex z : zs) {
    HsCheck hc = hs_bound_check(lin, pw, Vr, z, 50);
    CHECK(hc.hs_norm <= hc.bound + 1e-10);
  }
}

TEST_CASE("resolvent factorization is exact at truncated scale") {
  Spectrum lin = Spectrum::linear();
  WeightSequence pw = WeightSequence::power(1.0);

  // V = 0: both sides are the diagonal resolvent.
  double r0 = resolvent_factorization_residual(
      lin, PerturbationMatrix::zero(20, pw), {-1.0, 0.0}, 20);
  CHECK(r0 <= 1e-13);

  // Spike pairs truncated at size 18, z inside the ninth pair's cluster.
  double rs = resolvent_factorization_residual(lin, spike_pair_table(18),
                                               {17.5, 1.0}, 18);
  CHECK(rs < 1e-9);

  // Saturated symmetric table at size 200, z far left: ||B|| < 1/2, so the
  // conditioning of I - B is mild and the residual is rounding noise.
  Index n = 200;
  Eigen::MatrixXcd sat(n, n);
  for (Index j = 1; j <= n; ++j) {
    for (Index k = 1; k <= n; ++k) {
      sat(j - 1, k - 1) = omega(pw, j) * omega(pw, k);
    }
  }
  PerturbationMatrix Vs = PerturbationMatrix::dense(sat, pw);
  double rbig = resolvent_factorization_residual(lin, Vs, {-10.0, 0.0}, n);
  CHECK(rbig < 1e-9);

  // z hitting an eigenvalue of the truncated T: diag(1.5, 2) at z = 1.5.
  WeightSequence w2 = WeightSequence::explicit_list({0.8, 0.8});
  Eigen::MatrixXcd vd = Eigen::MatrixXcd::Zero(2, 2);
  vd(0, 0) = 0.5;
  PerturbationMatrix Vd = PerturbationMatrix::dense(vd, w2);
  CHECK_THROWS_AS(
      resolvent_factorization_residual(lin, Vd, {1.5, 0.0}, 2),
      std::runtime_error);
}

TEST_CASE("truncated T assembly") {
  Spectrum lin = Spectrum::linear();
  WeightSequence w = WeightSequence::explicit_list({1, 1, 1, 1, 1, 1});

  TruncatedOperator t0 =
      build_truncated_T(lin, PerturbationMatrix::zero(3, w), 3);
  CHECK(t0.matrix(0, 0) == Complex(1.0, 0.0));
  CHECK(t0.matrix(1, 1) == Complex(2.0, 0.0));
  CHECK(t0.matrix(2, 2) == Complex(3.0, 0.0));
  CHECK(t0.matrix.norm() == doctest::Approx(std::sqrt(14.0)).epsilon(1e-15));

  // Spike pairs at m = 3: pair index k = 9 occupies rows/columns 17, 18 with
  // entries +s/2 above and -s/2 below the diagonal.
  TruncatedOperator ts = build_truncated_T(lin, spike_pair_table(18), 18);
  double s9 = std::sqrt(8.0) / 3.0;
  CHECK(ts.matrix(16, 17).real() == doctest::Approx(0.5 * s9).epsilon(1e-15));
  CHECK(ts.matrix(17, 16).real() == doctest::Approx(-0.5 * s9).epsilon(1e-15));
  double s4 = std::sqrt(3.0) / 2.0;
  CHECK(ts.matrix(6, 7).real() == doctest::Approx(0.5 * s4).epsilon(1e-15));
  CHECK(ts.matrix(7, 6).real() == doctest::Approx(-0.5 * s4).epsilon(1e-15));
  // Pairs with index not a perfect square carry no coupling.
  CHECK(ts.matrix(2, 3) == Complex(0.0, 0.0));
  CHECK(ts.matrix(4, 5) == Complex(0.0, 0.0));
  for (int j = 0; j < 18; ++j) {
    CHECK(ts.matrix(j, j) == Complex(j + 1.0, 0.0));
  }

  // Asymmetric banded table: the operator matrix is the transposed table.
  Eigen::MatrixXcd tri = Eigen::MatrixXcd::Zero(6, 6);
  tri(0, 1) = Complex(0.25, 0.125);
  tri(1, 0) = Complex(-0.5, 0.0);
  tri(4, 5) = Complex(0.0, 0.75);
  PerturbationMatrix Vt = PerturbationMatrix::banded(tri, 1, w);
  TruncatedOperator tt = build_truncated_T(lin, Vt, 6);
  CHECK(tt.matrix(1, 0) == Complex(0.25, 0.125));
  CHECK(tt.matrix(0, 1) == Complex(-0.5, 0.0));
  CHECK(tt.matrix(5, 4) == Complex(0.0, 0.75));
  CHECK(tt.matrix(4, 5) == Complex(0.0, 0.0));
}

TEST_CASE("perturbation file format round-trips byte-identically") {
  WeightSequence w = WeightSequence::power(0.6);
  Eigen::MatrixXcd tri = Eigen::MatrixXcd::Zero(6, 6);
  for (Index j = 1; j < 6; ++j) {
    double cap = omega(w, j) * omega(w, j + 1);
    tri(j - 1, j) = cap * Complex(std::cos(static_cast<double>(j)),
                                  0.5 * std::sin(static_cast<double>(j)));
    tri(j, j - 1) = cap * Complex(-1.0 / (j + 2.0), 1.0 / (3 * j + 1.0));
  }
  PerturbationMatrix V = PerturbationMatrix::banded(tri, 1, w);

  const std::string path_a = "perturbation_roundtrip_a.txt";
  const std::string path_b = "perturbation_roundtrip_b.txt";
  V.save(path_a);
  PerturbationMatrix loaded = PerturbationMatrix::load(path_a, w);
  CHECK(loaded.size() == V.size());
  CHECK(loaded.storage() == V.storage());
  CHECK(loaded.bandwidth() == V.bandwidth());
  CHECK((loaded.values() - V.values()).norm() == 0.0);

  loaded.save(path_b);
  CHECK(slurp(path_a) == slurp(path_b));
  std::remove(path_a.c_str());
  std::remove(path_b.c_str());

  // Malformed inputs are rejected with a description.
  const std::string path_bad = "perturbation_bad.txt";
  {
    std::ofstream out(path_bad);
    out << "size 2\nstorage dense\nbandwidth 1\n3 1 0.5 0.0\n";
  }
  CHECK_THROWS_AS(PerturbationMatrix::load(path_bad, w), std::runtime_error);
  {
    std::ofstream out(path_bad);
    out << "dimension 2\nstorage dense\nbandwidth 1\n";
  }
  CHECK_THROWS_AS(PerturbationMatrix::load(path_bad, w), std::runtime_error);
  {
    // A file whose entries break the loading weights' certificate.
    std::ofstream out(path_bad);
    out << "size 2\nstorage dense\nbandwidth 1\n1 2 0.9 0.0\n";
  }
  CHECK_THROWS_AS(
      PerturbationMatrix::load(path_bad,
                               WeightSequence::explicit_list({0.5, 0.5})),
      std::invalid_argument);
  std::remove(path_bad.c_str());
}
