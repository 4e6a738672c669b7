#pragma once

#include <array>
#include <vector>

#include "polarsep/rng.hpp"

namespace polarsep {

// Parabolic cross-section of a semi-reflector, in a 2D camera/surface plane.
// The surface is the curve (P_S.x + t, P_S.y + convexity*curvature*t^2) for
// t in [-L/2, L/2]; curvature = 0 reproduces a flat pane exactly. Curvature
// runs along one image axis only, so the angle of incidence is constant
// along image columns.
struct SurfaceGeometry {
  std::array<double, 2> camera{0.0, 1.0};
  std::array<double, 2> surface_point{0.0, 0.0};
  double segment_length = 1.0;
  int convexity = 1;       // +1 or -1
  double curvature = 0.0;  // parabola quadratic coefficient, 1/m, >= 0
};

// Per-column angle of incidence, radians, strictly below pi/2.
class AoiField {
 public:
  AoiField() = default;
  explicit AoiField(std::vector<double> theta);
  // Constant field: flat pane with the camera at infinity.
  static AoiField uniform(int width, double theta);

  int width() const { return static_cast<int>(theta_.size()); }
  double theta(int column) const { return theta_[column]; }
  const std::vector<double>& thetas() const { return theta_; }
  bool is_uniform() const;

 private:
  std::vector<double> theta_;
};

// Sampling intervals for sample_surface. Curvature is drawn log-uniformly
// from its interval when the surface is not flat.
struct GeometryRanges {
  std::array<double, 2> camera_distance{0.3, 3.0};   // meters
  std::array<double, 2> lateral_offset{-2.0, 2.0};   // meters
  std::array<double, 2> segment_length{0.5, 3.0};    // meters
  std::array<double, 2> curvature{1e-4, 1.0};        // 1/m, log-uniform
  double flat_probability = 0.3;
  int max_retries = 1000;
};

// Samples the parabola at `width` pixel-center abscissae; at each sample the
// incident ray is the unit vector from the camera to the sample point, the
// normal is (-2*convexity*a*t, 1) normalized, and theta = acos(|ray.normal|).
// Throws InvalidInputError when any sample is at grazing incidence or the
// camera falls behind the local tangent plane (caller resamples).
AoiField aoi_field(const SurfaceGeometry& geometry, int width);

// Draws geometries from `ranges` until aoi_field accepts one (validated on a
// dense probe grid including the segment endpoints). Deterministic given the
// generator state. Throws ConfigError after ranges.max_retries failures.
SurfaceGeometry sample_surface(Rng& rng, const GeometryRanges& ranges);

}  // namespace polarsep
