#include "geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "errors.hpp"

namespace depthfuse {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw DomainError("focal lengths must be positive");
  if (width < 1 || height < 1) throw DomainError("image dimensions must be >= 1");
}

CameraIntrinsics CameraIntrinsics::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("intrinsics scale factor must be positive");
  CameraIntrinsics out;
  out.fx = fx * factor;
  out.fy = fy * factor;
  out.cx = cx * factor;
  out.cy = cy * factor;
  out.width = static_cast<int>(std::lround(width * factor));
  out.height = static_cast<int>(std::lround(height * factor));
  return out;
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

CameraPose::CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation_)) throw DomainError("pose rotation is not orthonormal with det +1");
}

CameraPose CameraPose::from_array(std::span<const double> values) {
  if (values.size() != 12) {
    throw DomainError("pose needs 12 values, got " + std::to_string(values.size()));
  }
  Eigen::Matrix3d r;
  r << values[0], values[1], values[2], values[3], values[4], values[5], values[6], values[7],
      values[8];
  return {r, Eigen::Vector3d(values[9], values[10], values[11])};
}

std::array<double, 12> CameraPose::to_array() const {
  std::array<double, 12> out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out[i * 3 + j] = rotation_(i, j);
    out[9 + i] = translation_(i);
  }
  return out;
}

CameraPose CameraPose::inverse() const {
  CameraPose out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

CameraPose CameraPose::compose(const CameraPose& other) const {
  CameraPose out;
  out.rotation_ = rotation_ * other.rotation_;
  out.translation_ = rotation_ * other.translation_ + translation_;
  return out;
}

Eigen::Vector3d back_project(double u, double v, double d, const CameraIntrinsics& k) {
  if (!(d > 0.0)) throw DomainError("back_project requires positive depth");
  return {(u - k.cx) / k.fx * d, (v - k.cy) / k.fy * d, d};
}

PixelProjection project_to_view(const Eigen::Vector3d& point_world, const CameraPose& pose,
                                const CameraIntrinsics& k) {
  const Eigen::Vector3d pc = pose.apply(point_world);
  PixelProjection out;
  out.depth = pc.z();
  if (!(pc.z() > 0.0)) return out;
  out.u = k.fx * pc.x() / pc.z() + k.cx;
  out.v = k.fy * pc.y() / pc.z() + k.cy;
  // Round-off from the back-projection can leave a border pixel a few ulps
  // outside the image; snap those onto the edge. Anything further out,
  // including the half-pixel margin, is discarded.
  constexpr double kSnap = 1e-10;
  auto snap = [](double c, double hi) {
    if (c < 0.0 && c > -kSnap) return 0.0;
    if (c > hi && c < hi + kSnap) return hi;
    return c;
  };
  out.u = snap(out.u, k.width - 1);
  out.v = snap(out.v, k.height - 1);
  out.in_frustum = out.u >= 0.0 && out.u <= k.width - 1 && out.v >= 0.0 && out.v <= k.height - 1;
  return out;
}

PixelProjection roundtrip_candidate(double u, double v, double d, const CameraPose& ref_pose,
                                    const CameraIntrinsics& ref_intrinsics,
                                    const CameraPose& nbr_pose,
                                    const CameraIntrinsics& nbr_intrinsics) {
  const Eigen::Vector3d world = ref_pose.inverse().apply(back_project(u, v, d, ref_intrinsics));
  return project_to_view(world, nbr_pose, nbr_intrinsics);
}

BilinearStencil bilinear_stencil(int width, int height, double u, double v) {
  if (!(u >= 0.0 && u <= width - 1 && v >= 0.0 && v <= height - 1)) {
    throw DomainError("bilinear sample outside grid");
  }
  BilinearStencil s;
  s.x0 = static_cast<int>(std::floor(u));
  s.y0 = static_cast<int>(std::floor(v));
  s.x1 = std::min(s.x0 + 1, width - 1);
  s.y1 = std::min(s.y0 + 1, height - 1);
  const double ax = u - s.x0;
  const double ay = v - s.y0;
  s.weights = {(1.0 - ax) * (1.0 - ay), ax * (1.0 - ay), (1.0 - ax) * ay, ax * ay};
  return s;
}

double bilinear_sample(const Grid<double>& grid, double u, double v) {
  const BilinearStencil s = bilinear_stencil(grid.width(), grid.height(), u, v);
  return s.weights[0] * grid(s.x0, s.y0) + s.weights[1] * grid(s.x1, s.y0) +
         s.weights[2] * grid(s.x0, s.y1) + s.weights[3] * grid(s.x1, s.y1);
}

void bilinear_sample(const VectorGrid& grid, double u, double v, std::span<double> out) {
  const BilinearStencil s = bilinear_stencil(grid.width(), grid.height(), u, v);
  const auto a = grid.at(s.x0, s.y0);
  const auto b = grid.at(s.x1, s.y0);
  const auto c = grid.at(s.x0, s.y1);
  const auto d = grid.at(s.x1, s.y1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = s.weights[0] * a[i] + s.weights[1] * b[i] + s.weights[2] * c[i] + s.weights[3] * d[i];
  }
}

}  // namespace depthfuse
