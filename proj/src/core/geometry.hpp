#pragma once

#include <array>
#include <span>

#include <Eigen/Core>

#include "grid.hpp"

namespace depthfuse {

/// Pinhole intrinsics. Pixel centers sit at integer coordinates, so the
/// valid continuous range is [0, width-1] x [0, height-1].
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws DomainError unless fx, fy > 0 and width, height >= 1.
  void validate() const;

  /// Multiplies every field by `factor`; width/height are rounded.
  CameraIntrinsics scaled(double factor) const;
};

/// Rigid transform mapping world coordinates to camera coordinates:
/// X_c = R * X_w + t.
class CameraPose {
 public:
  CameraPose() = default;
  CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static CameraPose identity() { return {}; }

  /// Builds from 12 numbers: row-major R followed by t. Throws DomainError
  /// if R is not a proper rotation within 1e-9.
  static CameraPose from_array(std::span<const double> values);
  std::array<double, 12> to_array() const;

  const Eigen::Matrix3d& rotation() const noexcept { return rotation_; }
  const Eigen::Vector3d& translation() const noexcept { return translation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& point) const {
    return rotation_ * point + translation_;
  }

  CameraPose inverse() const;

  /// (this * other)(x) = this(other(x)).
  CameraPose compose(const CameraPose& other) const;

  /// Camera center in world coordinates.
  Eigen::Vector3d center() const { return -rotation_.transpose() * translation_; }

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// Checks R^T R = I and det R = +1 within `tol`.
bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-9);

struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool in_frustum = false;
};

/// Camera-centered point on the ray through (u, v) at depth d.
/// Throws DomainError for d <= 0.
Eigen::Vector3d back_project(double u, double v, double d, const CameraIntrinsics& intrinsics);

PixelProjection project_to_view(const Eigen::Vector3d& point_world, const CameraPose& pose,
                                const CameraIntrinsics& intrinsics);

/// Back-projects (u, v, d) from the reference camera and projects the
/// resulting world point into the neighbor camera.
PixelProjection roundtrip_candidate(double u, double v, double d, const CameraPose& ref_pose,
                                    const CameraIntrinsics& ref_intrinsics,
                                    const CameraPose& nbr_pose,
                                    const CameraIntrinsics& nbr_intrinsics);

/// Tensor-product interpolation weights of the four cells around (u, v),
/// ordered (x0,y0), (x1,y0), (x0,y1), (x1,y1).
struct BilinearStencil {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  std::array<double, 4> weights{};
};

/// Throws DomainError when (u, v) lies outside [0, width-1] x [0, height-1].
BilinearStencil bilinear_stencil(int width, int height, double u, double v);

double bilinear_sample(const Grid<double>& grid, double u, double v);

/// Interpolates every channel of a vector grid into `out` (size = channels).
void bilinear_sample(const VectorGrid& grid, double u, double v, std::span<double> out);

}  // namespace depthfuse
