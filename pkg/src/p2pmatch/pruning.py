"""Geometric pre-filter of driver/passenger pairs.

A driver can only reach points inside an ellipse whose foci are its origin
and destination and whose major axis is the distance coverable at the
network's top speed within the driver's maximum driving time. A passenger
can be reached only within a circle around the pickup whose radius is the
distance coverable between the driver's departure and the latest pickup.
Both regions are supersets of the true reachable sets because every link is
at least as long as the straight line between its endpoints.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig


@dataclass(frozen=True)
class DriverEllipse:
    focus1: tuple
    focus2: tuple
    major_axis_km: float


@dataclass(frozen=True)
class PickupCircle:
    center: tuple
    radius_km: float


def _speed(net, v_max_kmh):
    fastest = net.v_max_kmh
    if v_max_kmh is None:
        return fastest
    if v_max_kmh < fastest:
        raise InvalidConfig(
            f"v_max_kmh={v_max_kmh} is below the fastest link ({fastest:.3f} km/h); pruning would be unsound")
    return float(v_max_kmh)


def driver_ellipse(driver, net, v_max_kmh=None):
    v = _speed(net, v_max_kmh)
    return DriverEllipse(net.coords(driver.origin), net.coords(driver.destination),
                         v * (driver.sp_time_s + driver.max_excess_s) / 3600.0)


def pickup_circle(request, driver, net, v_max_kmh=None):
    v = _speed(net, v_max_kmh)
    slack = max(0.0, request.latest_pickup_s - driver.earliest_departure_s)
    return PickupCircle(net.coords(request.origin), v * slack / 3600.0)


# Relative slack on the comparison so that rounding never prunes a pair that
# sits exactly on the boundary (straight links driven at top speed).
_SLACK = 1e-9


def intersects(e, c):
    """Conservative overlap test: focal-distance sum against the widened axis."""
    s = math.dist(e.focus1, c.center) + math.dist(e.focus2, c.center)
    return s <= (e.major_axis_km + 2.0 * c.radius_km) * (1.0 + _SLACK)


def candidate_mask(drivers, requests, net, v_max_kmh=None):
    """Boolean ``len(drivers) x len(requests)`` matrix of surviving pairs."""
    v = _speed(net, v_max_kmh)
    if not drivers or not requests:
        return np.zeros((len(drivers), len(requests)), dtype=bool)
    coords = net._coords
    idx = net.index
    do = coords[[idx[d.origin] for d in drivers]]
    dd = coords[[idx[d.destination] for d in drivers]]
    axis = v * np.array([d.sp_time_s + d.max_excess_s for d in drivers]) / 3600.0
    dep = np.array([d.earliest_departure_s for d in drivers])
    ro = coords[[idx[r.origin] for r in requests]]
    late = np.array([r.latest_pickup_s for r in requests])

    def dist(a, b):
        dx = np.subtract.outer(a[:, 0], b[:, 0])
        dy = np.subtract.outer(a[:, 1], b[:, 1])
        dx *= dx
        dy *= dy
        dx += dy
        return np.sqrt(dx, out=dx)

    focal = dist(do, ro)
    focal += dist(dd, ro)
    radius = np.subtract.outer(-dep, -late)  # late - dep
    np.maximum(radius, 0.0, out=radius)
    radius *= 2.0 * v / 3600.0
    radius += axis[:, None]
    radius *= 1.0 + _SLACK
    return focal <= radius


def candidate_pairs(drivers, requests, net, v_max_kmh=None):
    mask = candidate_mask(drivers, requests, net, v_max_kmh)
    return {(drivers[i].id, requests[j].id) for i, j in zip(*np.nonzero(mask))}
