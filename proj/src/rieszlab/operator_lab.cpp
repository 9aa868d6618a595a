#include "rieszlab/operator_lab.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace rieszlab {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

constexpr double kCertificateSlack = 1e-12;

// Throws when some |v_jk| exceeds omega_j omega_k, naming the entry.
void verify_certificate(const Eigen::MatrixXcd& values,
                        const WeightSequence& w) {
  const Index n = static_cast<Index>(values.rows());
  for (Index j = 1; j <= n; ++j) {
    double wj = omega(w, j);
    for (Index k = 1; k <= n; ++k) {
      double cap = wj * omega(w, k) + kCertificateSlack;
      if (std::abs(values(j - 1, k - 1)) > cap) {
        std::ostringstream msg;
        msg << "perturbation entry (" << j << ", " << k << ") has modulus "
            << std::abs(values(j - 1, k - 1))
            << ", above the weight product bound " << cap;
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

void verify_band(const Eigen::MatrixXcd& values, Index bandwidth) {
  const Index n = static_cast<Index>(values.rows());
  for (Index j = 1; j <= n; ++j) {
    for (Index k = 1; k <= n; ++k) {
      if (std::abs(j - k) > bandwidth && values(j - 1, k - 1) != 0.0) {
        std::ostringstream msg;
        msg << "banded perturbation has a nonzero entry (" << j << ", " << k
            << ") outside bandwidth " << bandwidth;
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

// Principal inverse square root: |w|^{-1/2} e^{-i arg(w)/2} with
// arg in (-pi, pi]. A negative real w must land on the +pi side even when
// its imaginary part is a signed zero.
Complex inv_sqrt_principal(Complex w) {
  double im = w.imag() == 0.0 ? 0.0 : w.imag();
  double a = std::atan2(im, w.real());
  double s = 1.0 / std::sqrt(std::abs(w));
  return {s * std::cos(0.5 * a), -s * std::sin(0.5 * a)};
}

}  // namespace

PerturbationMatrix::PerturbationMatrix(Eigen::MatrixXcd values,
                                       Storage storage, Index bandwidth,
                                       WeightSequence w)
    : values_(std::move(values)),
      storage_(storage),
      bandwidth_(bandwidth),
      weights_(std::move(w)) {
  require(values_.rows() >= 1, "perturbation: size >= 1 required");
  require(values_.rows() == values_.cols(),
          "perturbation: square table required");
  require(bandwidth_ >= 0, "perturbation: bandwidth >= 0 required");
  if (storage_ == Storage::banded) verify_band(values_, bandwidth_);
  verify_certificate(values_, weights_);
}

PerturbationMatrix PerturbationMatrix::dense(Eigen::MatrixXcd values,
                                             WeightSequence w) {
  Index n = static_cast<Index>(values.rows());
  return PerturbationMatrix(std::move(values), Storage::dense,
                            n > 0 ? n - 1 : 0, std::move(w));
}

PerturbationMatrix PerturbationMatrix::banded(Eigen::MatrixXcd values,
                                              Index bandwidth,
                                              WeightSequence w) {
  return PerturbationMatrix(std::move(values), Storage::banded, bandwidth,
                            std::move(w));
}

PerturbationMatrix PerturbationMatrix::zero(Index size, WeightSequence w) {
  return PerturbationMatrix(Eigen::MatrixXcd::Zero(size, size), Storage::dense,
                            size > 0 ? size - 1 : 0, std::move(w));
}

PerturbationMatrix PerturbationMatrix::load(const std::string& path,
                                            WeightSequence w) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open perturbation file: " + path);

  auto read_header = [&](const char* key) -> std::string {
    std::string line;
    if (!std::getline(in, line)) {
      throw std::runtime_error("perturbation file truncated before '" +
                               std::string(key) + "' header: " + path);
    }
    std::istringstream is(line);
    std::string name, value;
    if (!(is >> name >> value) || name != key) {
      throw std::runtime_error("perturbation file: expected '" +
                               std::string(key) + " <value>', got: " + line);
    }
    return value;
  };

  Index size = std::stoll(read_header("size"));
  require(size >= 1, "perturbation file: size >= 1 required");
  std::string storage_name = read_header("storage");
  Storage storage;
  if (storage_name == "dense") {
    storage = Storage::dense;
  } else if (storage_name == "banded") {
    storage = Storage::banded;
  } else {
    throw std::runtime_error("perturbation file: unknown storage '" +
                             storage_name + "'");
  }
  Index bandwidth = std::stoll(read_header("bandwidth"));

  Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(size, size);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    Index j = 0, k = 0;
    double re = 0.0, im = 0.0;
    if (!(is >> j >> k >> re >> im)) {
      throw std::runtime_error("perturbation file: bad entry row: " + line);
    }
    if (j < 1 || j > size || k < 1 || k > size) {
      throw std::runtime_error("perturbation file: entry (" +
                               std::to_string(j) + ", " + std::to_string(k) +
                               ") outside size " + std::to_string(size));
    }
    values(j - 1, k - 1) = Complex(re, im);
  }
  return PerturbationMatrix(std::move(values), storage, bandwidth,
                            std::move(w));
}

void PerturbationMatrix::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write perturbation file: " + path);
  const Index n = size();
  out << "size " << n << "\n";
  out << "storage " << (storage_ == Storage::dense ? "dense" : "banded")
      << "\n";
  out << "bandwidth " << bandwidth_ << "\n";
  char buf[96];
  for (Index j = 1; j <= n; ++j) {
    for (Index k = 1; k <= n; ++k) {
      Complex v = values_(j - 1, k - 1);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g %.17g",
                    static_cast<long long>(j), static_cast<long long>(k),
                    v.real(), v.imag());
      out << buf << "\n";
    }
  }
}

Eigen::VectorXcd k_diag(const Spectrum& spec, Complex z, Index size) {
  require(size >= 1, "k_diag: size >= 1 required");
  Eigen::VectorXcd d(size);
  for (Index j = 1; j <= size; ++j) {
    double mu_j = mu(spec, j);
    if (z.imag() == 0.0 && z.real() == mu_j) {
      throw std::invalid_argument(
          "k_diag: z coincides with an eigenvalue of the diagonal part");
    }
    d(j - 1) = inv_sqrt_principal(z - mu_j);
  }
  return d;
}

Eigen::MatrixXcd b_matrix(const Spectrum& spec, const PerturbationMatrix& V,
                          Complex z, Index size) {
  require(size >= 1 && size <= V.size(),
          "b_matrix: 1 <= size <= perturbation size required");
  Eigen::VectorXcd k = k_diag(spec, z, size);
  // Row m, column l holds v_lm k_l k_m, so column l is the coordinate vector
  // of B psi_l.
  return k.asDiagonal() * V.values().topLeftCorner(size, size).transpose() *
         k.asDiagonal();
}

HsCheck hs_bound_check(const Spectrum& spec, const WeightSequence& w,
                       const PerturbationMatrix& V, Complex z, Index size) {
  HsCheck out;
  out.hs_norm = b_matrix(spec, V, z, size).norm();
  for (Index j = 1; j <= size; ++j) {
    double wj = omega(w, j);
    out.bound += wj * wj / std::abs(z - mu(spec, j));
  }
  return out;
}

double resolvent_factorization_residual(const Spectrum& spec,
                                        const PerturbationMatrix& V, Complex z,
                                        Index size) {
  TruncatedOperator T = build_truncated_T(spec, V, size);
  Eigen::MatrixXcd zmT =
      z * Eigen::MatrixXcd::Identity(size, size) - T.matrix;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu_T(zmT);
  if (!lu_T.isInvertible()) {
    throw std::runtime_error(
        "resolvent factorization: z - T is singular at this truncation");
  }

  Eigen::MatrixXcd B = b_matrix(spec, V, z, size);
  Eigen::MatrixXcd ImB = Eigen::MatrixXcd::Identity(size, size) - B;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu_B(ImB);
  if (!lu_B.isInvertible()) {
    throw std::runtime_error("resolvent factorization: I - B is singular");
  }

  Eigen::VectorXcd k = k_diag(spec, z, size);
  Eigen::MatrixXcd lhs = lu_T.inverse();
  Eigen::MatrixXcd rhs = k.asDiagonal() * lu_B.inverse() * k.asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(lhs - rhs);
  return svd.singularValues()(0);
}

TruncatedOperator build_truncated_T(const Spectrum& spec,
                                    const PerturbationMatrix& V, Index size) {
  require(size >= 1 && size <= V.size(),
          "truncated T: 1 <= size <= perturbation size required");
  Eigen::MatrixXcd corner = V.values().topLeftCorner(size, size);
  verify_certificate(corner, V.certificate_weights());

  TruncatedOperator out;
  out.size = size;
  // The form table has v_jk = v(psi_j, psi_k) = <V psi_j, psi_k>, so the
  // operator's coordinate matrix is its transpose.
  out.matrix = corner.transpose();
  for (Index j = 1; j <= size; ++j) {
    out.matrix(j - 1, j - 1) += mu(spec, j);
  }
  out.spectrum = spec;
  out.weights = V.certificate_weights();
  return out;
}

}  // namespace rieszlab
