#include "polarsep/geometry.hpp"

#include <cmath>

#include "polarsep/errors.hpp"

namespace polarsep {
namespace {

constexpr double kHalfPi = 1.5707963267948966;
// Grazing margin: fields must stay strictly below pi/2.
constexpr double kMaxTheta = kHalfPi - 1e-9;
// Probe resolution used to vet sampled geometries; includes both endpoints,
// which pixel-center sampling never reaches, so acceptance is conservative.
constexpr int kValidationProbes = 513;

void validate_geometry(const SurfaceGeometry& g) {
  if (!(g.segment_length > 0.0)) {
    throw InvalidInputError("geometry: segment length must be positive");
  }
  if (g.convexity != 1 && g.convexity != -1) {
    throw InvalidInputError("geometry: convexity must be +1 or -1");
  }
  if (!(g.curvature >= 0.0)) {
    throw InvalidInputError("geometry: curvature must be non-negative");
  }
}

// theta at the surface parameter t; sign_out receives the side of the
// tangent plane the camera is on.
double theta_at(const SurfaceGeometry& g, double t, int* sign_out) {
  const double a = g.curvature * g.convexity;
  const double px = g.surface_point[0] + t;
  const double py = g.surface_point[1] + a * t * t;

  double nx = -2.0 * a * t;
  double ny = 1.0;
  const double nn = std::hypot(nx, ny);
  nx /= nn;
  ny /= nn;

  const double vx = g.camera[0] - px;
  const double vy = g.camera[1] - py;
  const double vn = std::hypot(vx, vy);
  if (vn < 1e-12) {
    throw InvalidInputError("geometry: camera lies on the surface");
  }
  const double d = (vx * nx + vy * ny) / vn;
  *sign_out = (d > 0.0) ? 1 : ((d < 0.0) ? -1 : 0);
  return std::acos(std::min(std::abs(d), 1.0));
}

std::vector<double> trace_field(const SurfaceGeometry& g, int width,
                                bool include_endpoints) {
  std::vector<double> theta(width);
  const double half = g.segment_length * 0.5;
  int facing = 0;
  for (int j = 0; j < width; ++j) {
    const double u = include_endpoints
                         ? (width == 1 ? 0.5 : static_cast<double>(j) / (width - 1))
                         : (j + 0.5) / width;
    const double t = -half + g.segment_length * u;
    int sign = 0;
    const double th = theta_at(g, t, &sign);
    if (sign == 0 || (facing != 0 && sign != facing)) {
      throw InvalidInputError("geometry: camera behind the tangent plane");
    }
    facing = sign;
    if (th >= kMaxTheta) {
      throw InvalidInputError("geometry: grazing incidence");
    }
    theta[j] = th;
  }
  return theta;
}

}  // namespace

AoiField::AoiField(std::vector<double> theta) : theta_(std::move(theta)) {
  if (theta_.empty()) throw InvalidInputError("aoi field: empty");
  for (double th : theta_) {
    if (!(th >= 0.0) || th >= kHalfPi) {
      throw InvalidInputError("aoi field: theta outside [0, pi/2)");
    }
  }
}

AoiField AoiField::uniform(int width, double theta) {
  if (width < 1) throw InvalidInputError("aoi field: width must be >= 1");
  return AoiField(std::vector<double>(width, theta));
}

bool AoiField::is_uniform() const {
  for (double th : theta_) {
    if (th != theta_.front()) return false;
  }
  return true;
}

AoiField aoi_field(const SurfaceGeometry& geometry, int width) {
  validate_geometry(geometry);
  if (width < 1) throw InvalidInputError("aoi_field: width must be >= 1");
  return AoiField(trace_field(geometry, width, /*include_endpoints=*/false));
}

SurfaceGeometry sample_surface(Rng& rng, const GeometryRanges& ranges) {
  for (int attempt = 0; attempt < ranges.max_retries; ++attempt) {
    SurfaceGeometry g;
    const double distance =
        rng.uniform(ranges.camera_distance[0], ranges.camera_distance[1]);
    const double lateral =
        rng.uniform(ranges.lateral_offset[0], ranges.lateral_offset[1]);
    g.camera = {lateral, distance};
    g.surface_point = {0.0, 0.0};
    g.segment_length =
        rng.uniform(ranges.segment_length[0], ranges.segment_length[1]);
    g.curvature = 0.0;
    if (!rng.bernoulli(ranges.flat_probability)) {
      g.curvature = std::exp(rng.uniform(std::log(ranges.curvature[0]),
                                         std::log(ranges.curvature[1])));
    }
    g.convexity = rng.bernoulli(0.5) ? 1 : -1;
    try {
      validate_geometry(g);
      trace_field(g, kValidationProbes, /*include_endpoints=*/true);
      return g;
    } catch (const InvalidInputError&) {
      // resample
    }
  }
  throw ConfigError("sample_surface: no valid geometry within retry budget");
}

}  // namespace polarsep
