#include "molfield/geometry.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace molfield {
namespace geometry {

namespace {

constexpr double kFourThirdsPi = 4.0 * M_PI / 3.0;

double shell_volume(double r_r, double R_max) {
    return kFourThirdsPi * (R_max * R_max * R_max - r_r * r_r * r_r);
}

}  // namespace

TxField sample_field(const core::Deployment& deployment, double r_r, rng::Stream& stream) {
    if (!(r_r >= 0.0)) throw std::domain_error("receiver radius must be non-negative");
    if (!(deployment.R_max > r_r)) throw std::domain_error("R_max must exceed the receiver radius");
    if (!(deployment.lambda_a > 0.0)) throw std::domain_error("density must be positive");

    TxField field;
    field.deployment = deployment;
    field.r_r = r_r;

    const double mean = deployment.lambda_a * shell_volume(r_r, deployment.R_max);
    const long long n = stream.poisson(mean);
    field.points.reserve(static_cast<std::size_t>(n));

    const double r3_lo = r_r * r_r * r_r;
    const double r3_hi = deployment.R_max * deployment.R_max * deployment.R_max;
    for (long long i = 0; i < n; ++i) {
        const double u_r = stream.u01();
        const double r = std::cbrt(r3_lo + u_r * (r3_hi - r3_lo));
        const double cos_theta = 2.0 * stream.u01() - 1.0;
        const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
        const double phi = 2.0 * M_PI * stream.u01();
        field.points.push_back(
            {r * sin_theta * std::cos(phi), r * sin_theta * std::sin(phi), r * cos_theta});
    }
    return field;
}

double nearest_distance_pdf(double x, double lambda_a, double r_r) {
    if (!(lambda_a > 0.0)) throw std::domain_error("density must be positive");
    if (x < r_r) return 0.0;
    return 4.0 * lambda_a * M_PI * x * x *
           std::exp(-lambda_a * kFourThirdsPi * (x * x * x - r_r * r_r * r_r));
}

double nearest_distance_cdf(double x, double lambda_a, double r_r) {
    if (!(lambda_a > 0.0)) throw std::domain_error("density must be positive");
    if (x < r_r) return 0.0;
    return -std::expm1(-lambda_a * kFourThirdsPi * (x * x * x - r_r * r_r * r_r));
}

double sample_nearest_distance(double lambda_a, double r_r, rng::Stream& stream) {
    if (!(lambda_a > 0.0)) throw std::domain_error("density must be positive");
    const double u = stream.u01();
    // invert 1 - exp(-lambda (4pi/3)(x^3 - r_r^3)) = u
    const double t = -std::log1p(-u) / (lambda_a * kFourThirdsPi);
    return std::cbrt(r_r * r_r * r_r + t);
}

double nearest_distance_pdf_2d(double x, double lambda_a2, double r_r) {
    if (!(lambda_a2 > 0.0)) throw std::domain_error("density must be positive");
    if (x < r_r) return 0.0;
    return 2.0 * lambda_a2 * M_PI * x * std::exp(-lambda_a2 * M_PI * (x * x - r_r * r_r));
}

void write_field_csv(const std::string& path, const TxField& field) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.precision(17);
    out << "# lambda_per_um3=" << field.deployment.lambda_a
        << " R_max_um=" << field.deployment.R_max << " r_r_um=" << field.r_r
        << " count=" << field.points.size() << "\n";
    out << "x_um,y_um,z_um\n";
    for (const auto& p : field.points) out << p.x << "," << p.y << "," << p.z << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

TxField read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file for reading: " + path);

    TxField field;
    std::string line;
    if (!std::getline(in, line) || line.empty() || line[0] != '#')
        throw std::runtime_error("missing metadata line: " + path);
    {
        std::istringstream meta(line.substr(1));
        std::string token;
        while (meta >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = token.substr(0, eq);
            const std::string val = token.substr(eq + 1);
            if (key == "lambda_per_um3")
                field.deployment.lambda_a = std::stod(val);
            else if (key == "R_max_um")
                field.deployment.R_max = std::stod(val);
            else if (key == "r_r_um")
                field.r_r = std::stod(val);
        }
    }
    if (!std::getline(in, line) || line != "x_um,y_um,z_um")
        throw std::runtime_error("missing coordinate header: " + path);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Point3 p;
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',')) throw std::runtime_error("bad row: " + path);
        p.x = std::stod(cell);
        if (!std::getline(row, cell, ',')) throw std::runtime_error("bad row: " + path);
        p.y = std::stod(cell);
        if (!std::getline(row, cell, ',')) throw std::runtime_error("bad row: " + path);
        p.z = std::stod(cell);
        field.points.push_back(p);
    }
    return field;
}

}  // namespace geometry
}  // namespace molfield
