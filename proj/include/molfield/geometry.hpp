#ifndef MOLFIELD_GEOMETRY_HPP
#define MOLFIELD_GEOMETRY_HPP

#include <cmath>
#include <string>
#include <vector>

#include "molfield/config.hpp"
#include "molfield/rng.hpp"

// Spatial model: transmitters form a homogeneous Poisson point process in
// the shell between the receiver surface and a truncation radius R_max.
// The receiver sits at the origin; only distances matter to the channel,
// but full coordinates are kept so fields can be stored and replayed.
namespace molfield {
namespace geometry {

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

struct TxField {
    std::vector<Point3> points;
    core::Deployment deployment;
    double r_r = 0.0;

    std::size_t size() const { return points.size(); }
};

// Draws one field realization: a Poisson count for the shell, then
// uniformly placed points (radius by inverse CDF of the r^2 density,
// direction uniform on the sphere). Draw order is fixed: count, then per
// point radius-u, cos(theta)-u, phi-u, so traces are reproducible.
TxField sample_field(const core::Deployment& deployment, double r_r, rng::Stream& stream);

// Distance from the receiver center to the nearest transmitter.
// Density, CDF, and inverse-CDF sampler of that distance; x < r_r has mass
// zero because the shell starts at the receiver surface.
double nearest_distance_pdf(double x, double lambda_a, double r_r);
double nearest_distance_cdf(double x, double lambda_a, double r_r);
double sample_nearest_distance(double lambda_a, double r_r, rng::Stream& stream);

// Planar variant (transmitters on a plane through the receiver center,
// density per um^2). Kept for dimensional cross-checks.
double nearest_distance_pdf_2d(double x, double lambda_a2, double r_r);

// CSV persistence: "# ..." metadata line carrying the deployment, header
// x_um,y_um,z_um, one row per transmitter. read round-trips write exactly.
void write_field_csv(const std::string& path, const TxField& field);
TxField read_field_csv(const std::string& path);

}  // namespace geometry
}  // namespace molfield

#endif
