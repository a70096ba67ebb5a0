#include "probes/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cstdio>

#include "util/error.hpp"

namespace memaudit {

PcaProjection pca_project(const Matrix& points, int n_components) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs at least two points");
  if (n_components < 1 || dim < n_components) {
    throw Error(ErrorCode::InvalidArgument, "PCA needs dim >= n_components >= 1");
  }
  if (!points.allFinite()) throw Error(ErrorCode::InvalidArgument, "PCA input has non-finite entries");

  PcaProjection out;
  out.mean = points.colwise().mean().transpose();
  const Matrix centered = points.rowwise() - out.mean.transpose();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::Internal, "covariance eigendecomposition failed");

  // Eigen sorts ascending.
  const Vector values = eig.eigenvalues().reverse();
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  const double largest = std::max(values[0], 0.0);
  const double tol = largest * 1e-10 + 1e-300;
  double total = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] > tol) total += values[i];
  }

  out.components = Matrix::Zero(n_components, dim);
  out.explained_variance_ratio.assign(static_cast<std::size_t>(n_components), 0.0);
  for (int c = 0; c < n_components; ++c) {
    if (values[c] <= tol) {
      out.warnings.push_back("data rank below " + std::to_string(n_components) + ": component " +
                             std::to_string(c + 1) + " zero-filled");
      continue;
    }
    Vector v = vectors.col(c);
    // Sign convention: largest-magnitude coordinate positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    out.components.row(c) = v.transpose();
    out.explained_variance_ratio[static_cast<std::size_t>(c)] = values[c] / total;
  }
  out.projected = centered * out.components.transpose();
  return out;
}

double reconstruction_error(const Matrix& points, const Vector& mean, const Matrix& basis) {
  const Matrix centered = points.rowwise() - mean.transpose();
  const Matrix recon = (centered * basis.transpose()) * basis;
  return (centered - recon).squaredNorm();
}

std::string pca_csv(const PcaProjection& projection, const std::vector<std::string>& labels,
                    const std::string& field_kind) {
  std::string out = "pc1,pc2,label,field_kind\n";
  char buf[64];
  for (Eigen::Index i = 0; i < projection.projected.rows(); ++i) {
    const double pc1 = projection.projected(i, 0);
    const double pc2 = projection.projected.cols() > 1 ? projection.projected(i, 1) : 0.0;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", pc1, pc2);
    out += buf;
    if (static_cast<std::size_t>(i) < labels.size()) out += labels[static_cast<std::size_t>(i)];
    out += "," + field_kind + "\n";
  }
  return out;
}

}  // namespace memaudit
