// SPDX-License-Identifier: Apache-2.0

#include "wpmec/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "wpmec/model.hpp"

namespace wpmec {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Real symmetric embedding of a Hermitian matrix, halved so that
// <embed(A), embed2(S)> = tr(A S) for Hermitian A, S.
MatrixXd embed_coefficient(const Eigen::MatrixXcd& A, int n) {
  MatrixXd E = MatrixXd::Zero(2 * n, 2 * n);
  if (A.size() == 0) return E;
  const Eigen::MatrixXcd H = 0.5 * (A + A.adjoint());
  E.topLeftCorner(n, n) = H.real();
  E.bottomRightCorner(n, n) = H.real();
  E.topRightCorner(n, n) = -H.imag();
  E.bottomLeftCorner(n, n) = H.imag();
  return 0.5 * E;
}

Eigen::MatrixXcd extract(const MatrixXd& X, int n) {
  const MatrixXd re = 0.5 * (X.topLeftCorner(n, n) + X.bottomRightCorner(n, n));
  const MatrixXd im = 0.5 * (X.bottomLeftCorner(n, n) - X.topRightCorner(n, n));
  Eigen::MatrixXcd S(n, n);
  S.real() = 0.5 * (re + re.transpose());
  S.imag() = 0.5 * (im - im.transpose());
  return S;
}

double inner(const MatrixXd& A, const MatrixXd& B) { return A.cwiseProduct(B).sum(); }

MatrixXd sym(const MatrixXd& A) { return 0.5 * (A + A.transpose()); }

// Largest alpha in (0, 1] with X + alpha dX >= 0, given a Cholesky factor of X.
double psd_step(const MatrixXd& L, const MatrixXd& dX) {
  if (L.size() == 0) return 1.0;
  const auto tri = L.triangularView<Eigen::Lower>();
  MatrixXd T = tri.solve(dX);
  T = tri.solve(T.transpose()).transpose();
  const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(sym(T), Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin >= 0.0 ? 1.0 : std::min(1.0, -1.0 / lmin);
}

double orthant_step(const VectorXd& x, const VectorXd& dx) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
  }
  return a;
}

// Standard form: minimize <C, X> + c^T x  s.t.  <A_i, X> + a_i^T x = b_i,  X >= 0, x >= 0.
struct StandardForm {
  int n = 0;  // embedded PSD size
  int q = 0;  // orthant size
  int m = 0;
  MatrixXd C;
  VectorXd c;
  std::vector<MatrixXd> A;
  MatrixXd Alp;  // m x q
  VectorXd b;
  // Original x = col_scale .* x, original y = y ./ row_scale.
  VectorXd col_scale;
  VectorXd row_scale;
  // Original X, x = b_scale * scaled; original objective = b_scale * c_scale * scaled.
  double b_scale = 1.0;
  double c_scale = 1.0;

  VectorXd apply(const MatrixXd& X, const VectorXd& x) const {
    VectorXd r = Alp * x;
    for (int i = 0; i < m && n > 0; ++i) r[i] += inner(A[i], X);
    return r;
  }
  MatrixXd adjoint(const VectorXd& y) const {
    MatrixXd R = MatrixXd::Zero(n, n);
    for (int i = 0; i < m && n > 0; ++i) R += y[i] * A[i];
    return R;
  }
};

// Scales scalar columns and constraint rows to unit max-abs, two sweeps,
// then b and the costs to unit max-abs.
// Cost coefficients of nearly idle pairs can otherwise reach 1e70.
void equilibrate(StandardForm& f) {
  f.col_scale = VectorXd::Ones(f.q);
  f.row_scale = VectorXd::Ones(f.m);
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (int j = 0; j < f.q; ++j) {
      const double c = f.m > 0 ? f.Alp.col(j).cwiseAbs().maxCoeff() : 0.0;
      if (c > 0.0 && std::isfinite(c)) {
        f.Alp.col(j) /= c;
        f.c[j] /= c;
        f.col_scale[j] /= c;
      }
    }
    for (int i = 0; i < f.m; ++i) {
      double r = f.q > 0 ? f.Alp.row(i).cwiseAbs().maxCoeff() : 0.0;
      if (f.n > 0) r = std::max(r, f.A[i].cwiseAbs().maxCoeff());
      if (r > 0.0 && std::isfinite(r)) {
        f.Alp.row(i) /= r;
        if (f.n > 0) f.A[i] /= r;
        f.b[i] /= r;
        f.row_scale[i] *= r;
      }
    }
  }
  const double bmax = f.m > 0 ? f.b.cwiseAbs().maxCoeff() : 0.0;
  if (bmax > 0.0 && std::isfinite(bmax)) {
    f.b /= bmax;
    f.b_scale = bmax;
  }
  double cmax = f.q > 0 ? f.c.cwiseAbs().maxCoeff() : 0.0;
  if (f.n > 0) cmax = std::max(cmax, f.C.cwiseAbs().maxCoeff());
  if (cmax > 0.0 && std::isfinite(cmax)) {
    f.c /= cmax;
    if (f.n > 0) f.C /= cmax;
    f.c_scale = cmax;
  }
}

StandardForm standardize(const LinearSdp& p) {
  const int n = p.psd_dim;
  int n_slack = 0;
  for (const auto& c : p.constraints) n_slack += c.sense == SdpConstraint::Sense::LessEqual;
  StandardForm f;
  f.n = 2 * n;
  f.q = p.n_scalars + n_slack;
  f.m = static_cast<int>(p.constraints.size());
  f.C = -embed_coefficient(p.objective_matrix, n);
  f.c = VectorXd::Zero(f.q);
  if (p.objective_scalars.size() > 0) f.c.head(p.n_scalars) = -p.objective_scalars;
  f.Alp = MatrixXd::Zero(f.m, f.q);
  f.b.resize(f.m);
  int slack = p.n_scalars;
  for (int i = 0; i < f.m; ++i) {
    const auto& con = p.constraints[i];
    f.A.push_back(embed_coefficient(con.matrix, n));
    if (con.scalars.size() > 0) f.Alp.row(i).head(p.n_scalars) = con.scalars.transpose();
    if (con.sense == SdpConstraint::Sense::LessEqual) f.Alp(i, slack++) = 1.0;
    f.b[i] = con.rhs;
  }
  equilibrate(f);
  return f;
}

void check_problem(const LinearSdp& p) {
  if (p.psd_dim < 0 || p.n_scalars < 0) {
    throw Error(ErrorKind::DimensionMismatch, "psd_dim", "sizes must be nonnegative");
  }
  auto check_matrix = [&](const Eigen::MatrixXcd& A, const char* field) {
    if (A.size() == 0) return;
    if (A.rows() != p.psd_dim || A.cols() != p.psd_dim) {
      throw Error(ErrorKind::DimensionMismatch, field, "matrix coefficient must be psd_dim x psd_dim");
    }
    if (!A.allFinite()) throw Error(ErrorKind::DomainError, field, "non-finite coefficient");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw Error(ErrorKind::NotHermitian, field, "matrix coefficient is not Hermitian");
    }
  };
  auto check_vector = [&](const VectorXd& v, const char* field) {
    if (v.size() != 0 && v.size() != p.n_scalars) {
      throw Error(ErrorKind::DimensionMismatch, field, "scalar row must have n_scalars entries");
    }
    if (!v.allFinite()) throw Error(ErrorKind::DomainError, field, "non-finite coefficient");
  };
  check_matrix(p.objective_matrix, "objective_matrix");
  check_vector(p.objective_scalars, "objective_scalars");
  for (const auto& c : p.constraints) {
    check_matrix(c.matrix, "constraints.matrix");
    check_vector(c.scalars, "constraints.scalars");
    if (!std::isfinite(c.rhs)) throw Error(ErrorKind::DomainError, "constraints.rhs", "non-finite rhs");
  }
}

}  // namespace

SdpSolution solve_linear_sdp(const LinearSdp& problem, const SdpOptions& opt) {
  check_problem(problem);
  const StandardForm f = standardize(problem);
  const int n = f.n, q = f.q, m = f.m;
  const double nu = static_cast<double>(n + q);

  double normA = 0.0;
  for (int i = 0; i < m; ++i) {
    double a = f.Alp.row(i).norm();
    if (n > 0) a = std::hypot(a, f.A[i].norm());
    normA = std::max(normA, a);
  }
  const double normb = f.b.norm();
  const double normC = std::hypot(n > 0 ? f.C.norm() : 0.0, f.c.norm());

  double xi_p = std::max(10.0, std::sqrt(std::max(1.0, nu)));
  for (int i = 0; i < m; ++i) {
    double a = f.Alp.row(i).norm();
    if (n > 0) a = std::hypot(a, f.A[i].norm());
    xi_p = std::max(xi_p, (1.0 + std::abs(f.b[i])) / (1.0 + a));
  }
  const double xi_d = std::max({10.0, std::sqrt(std::max(1.0, nu)), normA, normC});

  MatrixXd X = xi_p * MatrixXd::Identity(n, n);
  MatrixXd Z = xi_d * MatrixXd::Identity(n, n);
  VectorXd x = VectorXd::Constant(q, xi_p);
  VectorXd z = VectorXd::Constant(q, xi_d);
  VectorXd y = VectorXd::Zero(m);

  SdpSolution sol;
  double rel_p = INFINITY, rel_d = INFINITY, rel_gap = INFINITY;
  // Best iterate seen so far; late iterations can lose accuracy.
  struct Snapshot {
    MatrixXd X, Z;
    VectorXd x, y, z;
    double p = INFINITY, d = INFINITY, gap = INFINITY;
    int it = 0;
    double score() const { return std::max({p, d, gap}); }
  } best;
  int stall = 0;
  const double blowup = 1e12 * std::max(xi_p, xi_d);

  for (int it = 0; it <= opt.max_iter; ++it) {
    const VectorXd rp = f.b - f.apply(X, x);
    const MatrixXd Rd = n > 0 ? MatrixXd(f.C - f.adjoint(y) - Z) : MatrixXd();
    const VectorXd rd = f.c - f.Alp.transpose() * y - z;
    const double pobj = (n > 0 ? inner(f.C, X) : 0.0) + f.c.dot(x);
    const double dobj = f.b.dot(y);
    rel_p = rp.norm() / (1.0 + normb);
    rel_d = std::hypot(n > 0 ? Rd.norm() : 0.0, rd.norm()) / (1.0 + normC);
    rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.iterations = it;
    if (std::getenv("WPMEC_SDP_TRACE")) {
      std::fprintf(stderr, "it %d p %.2e d %.2e gap %.2e pobj %.10g dobj %.10g\n", it, rel_p, rel_d, rel_gap, pobj, dobj);
    }
    if (std::max({rel_p, rel_d, rel_gap}) < best.score()) {
      best = Snapshot{X, Z, x, y, z, rel_p, rel_d, rel_gap, it};
      stall = 0;
    } else if (++stall >= 6 && best.score() <= opt.accept_tol) {
      break;
    }
    if (rel_p <= opt.tol && rel_d <= opt.tol && rel_gap <= opt.tol) {
      sol.converged = true;
      break;
    }
    if (it == opt.max_iter) break;
    const double xnorm = std::hypot(n > 0 ? X.norm() : 0.0, x.norm());
    if (xnorm > blowup) throw Error(ErrorKind::Infeasible, "sdp", "primal iterates diverge (dual infeasible)");
    if (y.norm() > blowup) throw Error(ErrorKind::Infeasible, "sdp", "dual iterates diverge (primal infeasible)");

    const double mu = ((n > 0 ? inner(X, Z) : 0.0) + x.dot(z)) / nu;

    // Nesterov-Todd scaling point.
    MatrixXd Lx, G, Ginv, W;
    VectorXd lam;
    if (n > 0) {
      Eigen::LLT<MatrixXd> cx(X), cz(Z);
      if (cx.info() != Eigen::Success || cz.info() != Eigen::Success) {
        if (best.score() <= opt.accept_tol) break;
        throw Error(ErrorKind::NumericalFailure, "sdp", "iterate left the PSD cone");
      }
      Lx = cx.matrixL();
      const MatrixXd Rz = cz.matrixL();
      Eigen::JacobiSVD<MatrixXd> svd(Rz.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
      lam = svd.singularValues();
      G = Lx * svd.matrixV() * lam.cwiseSqrt().cwiseInverse().asDiagonal();
      W = G * G.transpose();
      // G^{-1} = Lam^{1/2} V^T L^{-1}
      Ginv = lam.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() *
             Lx.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(n, n));
    }
    const VectorXd dlp = x.cwiseQuotient(z);

    // Schur complement.
    MatrixXd M = f.Alp * dlp.asDiagonal() * f.Alp.transpose();
    if (n > 0) {
      // <A_i, W A_j W> = <G^T A_i G, G^T A_j G>
      std::vector<MatrixXd> GAG;
      GAG.reserve(m);
      for (int j = 0; j < m; ++j) GAG.push_back(G.transpose() * f.A[j] * G);
      for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) M(i, j) += inner(GAG[i], GAG[j]);
      M = M.selfadjointView<Eigen::Upper>();
    }
    M.diagonal().array() += 1e-14 * std::max(1.0, M.diagonal().maxCoeff());
    Eigen::LDLT<MatrixXd> schur(M);
    if (schur.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "sdp", "Schur factorization failed");

    // Solves for a direction given the scaled complementarity rhs.
    auto direction = [&](const MatrixXd& Rc_scaled, const VectorXd& rc_lp, MatrixXd& dX, VectorXd& dx, VectorXd& dy,
                         MatrixXd& dZ, VectorXd& dz) {
      MatrixXd RX;
      if (n > 0) {
        MatrixXd T(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) T(i, j) = 2.0 * Rc_scaled(i, j) / (lam[i] + lam[j]);
        RX = G * T * G.transpose();
      }
      VectorXd rhs = rp - f.Alp * (rc_lp.cwiseQuotient(z) - dlp.cwiseProduct(rd));
      if (n > 0) rhs -= f.apply(RX - W * Rd * W, VectorXd::Zero(q));
      dy = schur.solve(rhs);
      dy += schur.solve(rhs - M * dy);
      dz = rd - f.Alp.transpose() * dy;
      dx = rc_lp.cwiseQuotient(z) - dlp.cwiseProduct(dz);
      if (n > 0) {
        dZ = sym(Rd - f.adjoint(dy));
        dX = sym(RX - W * dZ * W);
      }
    };
    auto steps = [&](const MatrixXd& dX, const VectorXd& dx, const MatrixXd& dZ, const VectorXd& dz) {
      double ap = orthant_step(x, dx), ad = orthant_step(z, dz);
      if (n > 0) {
        ap = std::min(ap, psd_step(Lx, dX));
        Eigen::LLT<MatrixXd> cz(Z);
        ad = std::min(ad, psd_step(cz.matrixL(), dZ));
      }
      return std::pair{ap, ad};
    };

    const MatrixXd Lam2 = n > 0 ? MatrixXd(lam.array().square().matrix().asDiagonal()) : MatrixXd();
    MatrixXd dX, dZ;
    VectorXd dx, dy, dz;
    // Predictor.
    direction(-Lam2, -x.cwiseProduct(z), dX, dx, dy, dZ, dz);
    auto [ap, ad] = steps(dX, dx, dZ, dz);
    const double mu_aff = ((n > 0 ? inner(X + ap * dX, Z + ad * dZ) : 0.0) + (x + ap * dx).dot(z + ad * dz)) / nu;
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector with the second-order term in the scaled space.
    MatrixXd Rc;
    if (n > 0) {
      const MatrixXd dXs = Ginv * dX * Ginv.transpose();
      const MatrixXd dZs = G.transpose() * dZ * G;
      Rc = sigma * mu * MatrixXd::Identity(n, n) - Lam2 - sym(dXs * dZs);
    }
    const VectorXd rc = VectorXd::Constant(q, sigma * mu) - x.cwiseProduct(z) - dx.cwiseProduct(dz);
    direction(Rc, rc, dX, dx, dy, dZ, dz);
    std::tie(ap, ad) = steps(dX, dx, dZ, dz);
    const double gamma = 0.98;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    if (n > 0) {
      X = sym(X + ap * dX);
      Z = sym(Z + ad * dZ);
    }
    x += ap * dx;
    y += ad * dy;
    z += ad * dz;
  }

  if (!sol.converged && best.score() < std::max({rel_p, rel_d, rel_gap})) {
    X = best.X;
    Z = best.Z;
    x = best.x;
    y = best.y;
    z = best.z;
    rel_p = best.p;
    rel_d = best.d;
    rel_gap = best.gap;
  }
  sol.primal_residual = rel_p;
  sol.dual_residual = rel_d;
  sol.gap = rel_gap;
  if (!sol.converged && std::max({rel_p, rel_d, rel_gap}) > opt.accept_tol) {
    throw Error(ErrorKind::NumericalFailure, "sdp",
                "residuals after " + std::to_string(sol.iterations) + " iterations: primal " +
                    std::to_string(rel_p) + ", dual " + std::to_string(rel_d) + ", gap " + std::to_string(rel_gap));
  }
  const int n_half = problem.psd_dim;
  const double scale = f.b_scale * f.c_scale;
  sol.S = n > 0 ? (f.b_scale * extract(X, n_half)).eval() : Eigen::MatrixXcd(0, 0);
  sol.scalars = f.b_scale * x.head(problem.n_scalars).cwiseProduct(f.col_scale.head(problem.n_scalars));
  sol.objective = -scale * ((n > 0 ? inner(f.C, X) : 0.0) + f.c.dot(x));
  sol.dual_bound = -scale * f.b.dot(y);
  sol.multipliers = -f.c_scale * y.cwiseQuotient(f.row_scale);
  return sol;
}

}  // namespace wpmec
