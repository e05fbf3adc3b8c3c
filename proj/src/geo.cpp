#include "pixmatch/geo.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pixmatch/error.hpp"

namespace pixmatch {

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

bool is_valid(const GeoPoint& p) {
    return std::isfinite(p.lon) && std::isfinite(p.lat) && p.lon >= -180.0 && p.lon <= 180.0 &&
           p.lat >= -90.0 && p.lat <= 90.0;
}

void require_valid(const GeoPoint& p) {
    if (!is_valid(p)) {
        throw InvalidInput("invalid coordinate (" + std::to_string(p.lon) + ", " +
                           std::to_string(p.lat) + ")");
    }
}

double haversine(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = deg_to_rad(a.lat);
    const double phi2 = deg_to_rad(b.lat);
    const double dphi = phi2 - phi1;
    const double dlambda = deg_to_rad(b.lon - a.lon);
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace pixmatch
