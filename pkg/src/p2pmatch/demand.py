"""Passenger requests, driver offers and service stops."""
import csv
import enum
import math
from dataclasses import dataclass

from .errors import InvalidConfig, InvalidRequest


class StopKind(enum.Enum):
    DRIVER_ORIGIN = "origin"
    DRIVER_DESTINATION = "destination"
    PICKUP = "pickup"
    DROPOFF = "dropoff"


LOAD_DELTA = {
    StopKind.DRIVER_ORIGIN: 0,
    StopKind.DRIVER_DESTINATION: 0,
    StopKind.PICKUP: 1,
    StopKind.DROPOFF: -1,
}

_LABEL = {
    StopKind.DRIVER_ORIGIN: "o_v",
    StopKind.DRIVER_DESTINATION: "d_v",
    StopKind.PICKUP: "o",
    StopKind.DROPOFF: "d",
}


@dataclass(frozen=True)
class Stop:
    kind: StopKind
    owner: str
    node: str

    @property
    def load_delta(self):
        return LOAD_DELTA[self.kind]

    @property
    def label(self):
        """Short id such as ``o:r1`` used for ordering and dumps."""
        return f"{_LABEL[self.kind]}:{self.owner}"

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class TripRequest:
    id: str
    origin: str
    destination: str
    earliest_departure_s: float
    sp_time_s: float
    sp_dist_km: float
    max_excess_s: float
    max_wait_s: float
    seats: int = 1

    def __post_init__(self):
        if self.origin == self.destination:
            raise InvalidRequest(f"request {self.id}: origin equals destination")
        if self.max_excess_s < 0 or self.max_wait_s < 0:
            raise InvalidRequest(f"request {self.id}: negative constraint bound")

    @property
    def latest_pickup_s(self):
        return self.earliest_departure_s + self.max_wait_s

    @property
    def latest_dropoff_s(self):
        return self.earliest_departure_s + self.sp_time_s + self.max_excess_s

    @property
    def pickup(self):
        return Stop(StopKind.PICKUP, self.id, self.origin)

    @property
    def dropoff(self):
        return Stop(StopKind.DROPOFF, self.id, self.destination)


@dataclass(frozen=True)
class DriverOffer:
    id: str
    origin: str
    destination: str
    earliest_departure_s: float
    capacity: int
    sp_time_s: float
    sp_dist_km: float
    max_excess_s: float

    def __post_init__(self):
        if self.capacity < 1:
            raise InvalidRequest(f"driver {self.id}: capacity must be >= 1")
        if self.max_excess_s < 0:
            raise InvalidRequest(f"driver {self.id}: negative excess bound")

    @property
    def latest_arrival_s(self):
        return self.earliest_departure_s + self.sp_time_s + self.max_excess_s

    @property
    def start(self):
        return Stop(StopKind.DRIVER_ORIGIN, self.id, self.origin)

    @property
    def end(self):
        return Stop(StopKind.DRIVER_DESTINATION, self.id, self.destination)


def derive_constraints(sp_time_s, excess_ratio, wait_ratio):
    """Return ``(max_excess_s, max_wait_s)`` from the shortest-path time."""
    if excess_ratio < 0 or wait_ratio < 0:
        raise InvalidConfig("constraint ratios must be non-negative")
    max_excess = excess_ratio * sp_time_s
    return max_excess, wait_ratio * max_excess


def candidate_value(driver, combo, route_dist_km):
    """Vehicle-km saved when ``driver`` serves ``combo`` along a route of ``route_dist_km``."""
    solo = math.fsum([r.sp_dist_km for r in combo] + [driver.sp_dist_km])
    return solo - route_dist_km


def make_request(rid, origin, destination, departure_s, matrix, excess_ratio=0.2,
                 wait_ratio=0.5, max_excess_s=None, max_wait_s=None):
    """Build a :class:`TripRequest` with shortest-path fields taken from ``matrix``."""
    c = matrix.cost(origin, destination)
    ex, wt = derive_constraints(c.time_s, excess_ratio, wait_ratio)
    return TripRequest(str(rid), origin, destination, float(departure_s), c.time_s, c.distance_km,
                       ex if max_excess_s is None else float(max_excess_s),
                       wt if max_wait_s is None else float(max_wait_s))


def make_driver(did, origin, destination, departure_s, capacity, matrix, excess_ratio=0.2,
                max_excess_s=None):
    c = matrix.cost(origin, destination)
    ex, _ = derive_constraints(c.time_s, excess_ratio, 0.0)
    return DriverOffer(str(did), origin, destination, float(departure_s), int(capacity),
                       c.time_s, c.distance_km, ex if max_excess_s is None else float(max_excess_s))


def _opt_float(row, key):
    v = row.get(key)
    return None if v is None or v == "" else float(v)


def read_drivers(path):
    """Raw driver rows: ``id,origin,destination,earliest_departure_s,capacity[,max_excess_s]``."""
    with open(path, newline="", encoding="utf-8") as f:
        return [dict(r) for r in csv.DictReader(f)]


def read_passengers(path):
    with open(path, newline="", encoding="utf-8") as f:
        return [dict(r) for r in csv.DictReader(f)]


def drivers_from_rows(rows, matrix, excess_ratio):
    return [make_driver(r["id"], r["origin"], r["destination"], float(r["earliest_departure_s"]),
                        int(r["capacity"]), matrix, excess_ratio, _opt_float(r, "max_excess_s"))
            for r in rows]


def passengers_from_rows(rows, matrix, excess_ratio, wait_ratio):
    return [make_request(r["id"], r["origin"], r["destination"], float(r["earliest_departure_s"]),
                         matrix, excess_ratio, wait_ratio, _opt_float(r, "max_excess_s"),
                         _opt_float(r, "max_wait_s"))
            for r in rows]


def write_drivers(drivers, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["id", "origin", "destination", "earliest_departure_s", "capacity"])
        for d in drivers:
            w.writerow([d.id, d.origin, d.destination, repr(float(d.earliest_departure_s)), d.capacity])


def write_passengers(passengers, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["id", "origin", "destination", "earliest_departure_s"])
        for r in passengers:
            w.writerow([r.id, r.origin, r.destination, repr(float(r.earliest_departure_s))])
