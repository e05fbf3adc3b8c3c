#pragma once

namespace pixmatch {

inline constexpr double kEarthRadiusM = 6'371'000.0;

struct GeoPoint {
    double lon = 0.0;
    double lat = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Axis-aligned lon/lat box, bounds inclusive.
struct GeoWindow {
    double min_lon = 0.0;
    double min_lat = 0.0;
    double max_lon = 0.0;
    double max_lat = 0.0;

    bool contains(const GeoPoint& p) const {
        return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
    }
};

bool is_valid(const GeoPoint& p);

/// Throws InvalidInput when `p` is not finite or out of range.
void require_valid(const GeoPoint& p);

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine(const GeoPoint& a, const GeoPoint& b);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

}  // namespace pixmatch
