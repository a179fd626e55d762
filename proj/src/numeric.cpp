#include "facetmpc/numeric.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace facetmpc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateRow: return "DegenerateRow";
    case ErrorCode::OutsideFeasibleSet: return "OutsideFeasibleSet";
    case ErrorCode::GenerationExhausted: return "GenerationExhausted";
    case ErrorCode::InfeasibleOcp: return "InfeasibleOcp";
    case ErrorCode::InfeasibleLocalOcp: return "InfeasibleLocalOcp";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyInput:
    case ErrorCode::DegenerateRow:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
}

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
}

Vec solve_linear(const Mat& a, const Vec& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "solve_linear expects square A matching b");
  }
  require_finite(a, "A");
  require_finite(b, "b");
  if (a.rows() == 0) return Vec(0);

  const double scale = a.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::FullPivLU<Mat> lu(a);
  const auto& packed = lu.matrixLU();
  const double min_pivot = packed.diagonal().cwiseAbs().minCoeff();
  if (scale == 0.0 || min_pivot < kTol.pivot_tol * scale) {
    throw Error(ErrorCode::SingularMatrix, "pivot below working precision");
  }
  return lu.solve(b);
}

double spectral_radius(const Mat& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "spectral_radius expects a square matrix");
  require_finite(a, "A");
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "eigenvalue iteration did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

int controllability_rank(const Mat& a, const Mat& b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n) throw Error(ErrorCode::DimensionMismatch, "controllability_rank dims");
  if (n == 0 || b.cols() == 0) return 0;
  Mat ctrb(n, n * b.cols());
  Mat block = b;
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.middleCols(k * b.cols(), b.cols()) = block;
    block = a * block;
  }
  Eigen::JacobiSVD<Mat> svd(ctrb);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > kTol.rank_tol * s(0)) ++rank;
  }
  return rank;
}

double min_eigenvalue(const Mat& symmetric) {
  if (symmetric.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "symmetric eigen solver failed");
  return es.eigenvalues().minCoeff();
}

}  // namespace facetmpc
