"""WGS84 latitude/longitude <-> integer UTM coordinates.

Transverse Mercator via the Krueger series to sixth order in the third
flattening (Karney 2011), which is accurate to well under a millimetre
inside a UTM zone. The only rounding happens when the forward result is
snapped to whole metres.
"""
from __future__ import annotations

import math
from typing import NamedTuple

A_WGS84 = 6378137.0
F_WGS84 = 1 / 298.257223563
K0 = 0.9996
FALSE_EASTING = 500000.0
FALSE_NORTHING_SOUTH = 10000000.0
MAX_ABS_LATITUDE = 84.0

_n = F_WGS84 / (2 - F_WGS84)
_e = math.sqrt(F_WGS84 * (2 - F_WGS84))
_RECT_RADIUS = A_WGS84 / (1 + _n) * (1 + _n**2 / 4 + _n**4 / 64 + _n**6 / 256)

_ALPHA = (
    _n / 2 - 2 * _n**2 / 3 + 5 * _n**3 / 16 + 41 * _n**4 / 180
    - 127 * _n**5 / 288 + 7891 * _n**6 / 37800,
    13 * _n**2 / 48 - 3 * _n**3 / 5 + 557 * _n**4 / 1440
    + 281 * _n**5 / 630 - 1983433 * _n**6 / 1935360,
    61 * _n**3 / 240 - 103 * _n**4 / 140 + 15061 * _n**5 / 26880
    + 167603 * _n**6 / 181440,
    49561 * _n**4 / 161280 - 179 * _n**5 / 168 + 6601661 * _n**6 / 7257600,
    34729 * _n**5 / 80640 - 3418889 * _n**6 / 1995840,
    212378941 * _n**6 / 319334400,
)
_BETA = (
    _n / 2 - 2 * _n**2 / 3 + 37 * _n**3 / 96 - _n**4 / 360
    - 81 * _n**5 / 512 + 96199 * _n**6 / 604800,
    _n**2 / 48 + _n**3 / 15 - 437 * _n**4 / 1440 + 46 * _n**5 / 105
    - 1118711 * _n**6 / 3870720,
    17 * _n**3 / 480 - 37 * _n**4 / 840 - 209 * _n**5 / 4480
    + 5569 * _n**6 / 90720,
    4397 * _n**4 / 161280 - 11 * _n**5 / 504 - 830251 * _n**6 / 7257600,
    4583 * _n**5 / 161280 - 108847 * _n**6 / 3991680,
    20648693 * _n**6 / 638668800,
)


class OutOfBand(ValueError):
    """Latitude outside the band UTM is defined for."""


class OutOfRange(ValueError):
    """Planar coordinates that no UTM zone produces."""


class GeoPoint(NamedTuple):
    latitude_deg: float
    longitude_deg: float


class PlanarPoint(NamedTuple):
    """Integer metres. ``utm_zone`` is 1..60 north, -1..-60 south, 0 for a
    synthetic local frame that has no geodetic meaning."""

    easting_m: int
    northing_m: int
    utm_zone: int = 0

    @property
    def xy(self):
        return self.easting_m, self.northing_m


def zone_for(g: GeoPoint) -> int:
    """Signed UTM zone number of a point (no Norway/Svalbard exceptions)."""
    _check_band(g.latitude_deg)
    lon = (g.longitude_deg + 180.0) % 360.0 - 180.0
    number = int((lon + 180.0) // 6) + 1
    number = min(number, 60)
    return number if g.latitude_deg >= 0 else -number


def central_meridian(zone: int) -> float:
    return (abs(zone) - 1) * 6 - 180 + 3.0


def _check_band(lat):
    if not -MAX_ABS_LATITUDE <= lat <= MAX_ABS_LATITUDE:
        raise OutOfBand(f"latitude {lat} is outside the UTM band")


def _conformal_tan(tau):
    sigma = math.sinh(_e * math.atanh(_e * tau / math.hypot(1.0, tau)))
    return tau * math.hypot(1.0, sigma) - sigma * math.hypot(1.0, tau)


def project_exact(g: GeoPoint, zone: int | None = None) -> tuple[float, float, int]:
    """Unrounded easting, northing and the signed zone used."""
    _check_band(g.latitude_deg)
    if zone is None:
        zone = zone_for(g)
    if not 1 <= abs(zone) <= 60:
        raise OutOfRange(f"invalid UTM zone {zone}")
    phi = math.radians(g.latitude_deg)
    dlam = math.radians((g.longitude_deg - central_meridian(zone) + 180.0) % 360.0 - 180.0)

    tau_p = _conformal_tan(math.tan(phi))
    xi_p = math.atan2(tau_p, math.cos(dlam))
    eta_p = math.asinh(math.sin(dlam) / math.hypot(tau_p, math.cos(dlam)))

    xi, eta = xi_p, eta_p
    for j, a in enumerate(_ALPHA, start=1):
        xi += a * math.sin(2 * j * xi_p) * math.cosh(2 * j * eta_p)
        eta += a * math.cos(2 * j * xi_p) * math.sinh(2 * j * eta_p)

    easting = FALSE_EASTING + K0 * _RECT_RADIUS * eta
    northing = K0 * _RECT_RADIUS * xi
    if zone < 0:
        northing += FALSE_NORTHING_SOUTH
    return easting, northing, zone


def project(g: GeoPoint, zone: int | None = None) -> PlanarPoint:
    """Project to UTM and round to the nearest metre.

    ``zone`` pins the projection zone (e.g. the zone of a region's centroid)
    so that points of one city never straddle two zones.
    """
    e, n, z = project_exact(g, zone)
    return PlanarPoint(int(round(e)), int(round(n)), z)


def unproject_exact(easting: float, northing: float, zone: int) -> GeoPoint:
    if zone == 0 or not 1 <= abs(zone) <= 60:
        raise OutOfRange(f"zone {zone} has no geodetic meaning")
    if not 0.0 <= easting <= 1_000_000.0:
        raise OutOfRange(f"easting {easting} outside the valid UTM range")
    if zone < 0:
        northing -= FALSE_NORTHING_SOUTH
    if not -9_400_000.0 <= northing <= 9_400_000.0:
        raise OutOfRange(f"northing {northing} outside the valid UTM range")

    xi = northing / (K0 * _RECT_RADIUS)
    eta = (easting - FALSE_EASTING) / (K0 * _RECT_RADIUS)
    xi_p, eta_p = xi, eta
    for j, b in enumerate(_BETA, start=1):
        xi_p -= b * math.sin(2 * j * xi) * math.cosh(2 * j * eta)
        eta_p -= b * math.cos(2 * j * xi) * math.sinh(2 * j * eta)

    tau_p = math.sin(xi_p) / math.hypot(math.sinh(eta_p), math.cos(xi_p))
    # Newton on the conformal-latitude relation; converges in 2-3 steps
    tau = tau_p
    for _ in range(10):
        t = _conformal_tan(tau)
        dtau = (
            (tau_p - t)
            / math.hypot(1.0, t)
            * (1 + (1 - _e**2) * tau * tau)
            / ((1 - _e**2) * math.hypot(1.0, tau))
        )
        tau += dtau
        if abs(dtau) < 1e-14 * max(1.0, abs(tau)):
            break
    lat = math.degrees(math.atan(tau))
    lon = central_meridian(zone) + math.degrees(math.atan2(math.sinh(eta_p), math.cos(xi_p)))
    lon = (lon + 180.0) % 360.0 - 180.0
    return GeoPoint(lat, lon)


def unproject(p: PlanarPoint) -> GeoPoint:
    return unproject_exact(float(p.easting_m), float(p.northing_m), p.utm_zone)
