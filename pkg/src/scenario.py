from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np

from src.utils.enumerators import BuildingKind

Point = Tuple[float, float]
Matrix = Tuple[Tuple[float, float], Tuple[float, float]]

IDENTITY = ((1.0, 0.0), (0.0, 1.0))


def _as_point(value) -> Point:
    return (float(value[0]), float(value[1]))


def _as_matrix(value) -> Matrix:
    return ((float(value[0][0]), float(value[0][1])), (float(value[1][0]), float(value[1][1])))


@dataclass(frozen=True)
class Building:
    """ Delivery destination.

    Parameters
    ----------
        position : tuple
            Planar coordinates (x, y) in grid units.
        kind : BuildingKind
            Home, office, shop or custom. Metadata only.
        cost : float
            Delivery cost c_j of the building (dimensionless, >= 0).
    """
    position: Point
    kind: BuildingKind = BuildingKind.CUSTOM
    cost: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'position', _as_point(self.position))
        object.__setattr__(self, 'kind', BuildingKind(self.kind))
        object.__setattr__(self, 'cost', float(self.cost))

    @property
    def x(self):
        return self.position[0]

    @property
    def y(self):
        return self.position[1]

    def __str__(self):
        return f'{self.kind.value}@({self.x:g}, {self.y:g}) c={self.cost:g}'


@dataclass(frozen=True)
class RestrictedZone:
    """ Point r_k of restricted airspace; drones must keep the scenario d_min away from it. """
    position: Point

    def __post_init__(self):
        object.__setattr__(self, 'position', _as_point(self.position))

    def __str__(self):
        return f'zone@({self.position[0]:g}, {self.position[1]:g})'


@dataclass(frozen=True)
class Scenario:
    """ Grid-world delivery scenario.

    Building and zone order is significant: assignments, indicators and exported
    files refer to buildings and zones by their index in these tuples.

    Parameters
    ----------
        name : str
            Identifier of the scenario.
        buildings : tuple of Building
            Buildings b_1..b_M with their costs.
        zones : tuple of RestrictedZone
            Restricted airspace points r_1..r_K.
        d_min : float
            Minimum distance (grid units) to keep from every zone.
        drone_starts : tuple of points
            Initial position x_{i,0} of every drone.
        A, B : 2x2 tuples
            State transition matrices of x(k+1) = A^T x(k) + B^T u(k).
        horizon : int
            Lookahead horizon N (timesteps).
        lambda_ : float
            Penalty weight; used for the fleet penalty and the control penalty unless
            overridden.
    """
    name: str
    buildings: Tuple[Building, ...]
    zones: Tuple[RestrictedZone, ...] = ()
    d_min: float = 1.0
    drone_starts: Tuple[Point, ...] = ((0.0, 0.0), )
    A: Matrix = IDENTITY
    B: Matrix = IDENTITY
    horizon: int = 20
    lambda_: float = 1.0
    _arrays: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, 'buildings', tuple(self.buildings))
        object.__setattr__(self, 'zones', tuple(self.zones))
        object.__setattr__(self, 'drone_starts', tuple(_as_point(p) for p in self.drone_starts))
        object.__setattr__(self, 'A', _as_matrix(self.A))
        object.__setattr__(self, 'B', _as_matrix(self.B))
        object.__setattr__(self, 'd_min', float(self.d_min))
        object.__setattr__(self, 'lambda_', float(self.lambda_))
        object.__setattr__(self, '_arrays', {})

    @property
    def n_drones(self):
        return len(self.drone_starts)

    @property
    def n_buildings(self):
        return len(self.buildings)

    @property
    def n_zones(self):
        return len(self.zones)

    @property
    def total_building_cost(self):
        return sum(b.cost for b in self.buildings)

    def _cached(self, key, factory):
        # arrays are rebuilt lazily and marked read-only so the scenario stays immutable
        if key not in self._arrays:
            arr = factory()
            arr.setflags(write=False)
            self._arrays[key] = arr
        return self._arrays[key]

    @property
    def building_positions(self) -> np.ndarray:
        return self._cached('buildings',
                            lambda: np.array([b.position for b in self.buildings],
                                             dtype=float).reshape(-1, 2))

    @property
    def building_costs(self) -> np.ndarray:
        return self._cached('costs',
                            lambda: np.array([b.cost for b in self.buildings], dtype=float))

    @property
    def zone_positions(self) -> np.ndarray:
        return self._cached('zones',
                            lambda: np.array([z.position for z in self.zones],
                                             dtype=float).reshape(-1, 2))

    @property
    def starts(self) -> np.ndarray:
        return self._cached('starts',
                            lambda: np.array(self.drone_starts, dtype=float).reshape(-1, 2))

    @property
    def A_matrix(self) -> np.ndarray:
        return self._cached('A', lambda: np.array(self.A, dtype=float))

    @property
    def B_matrix(self) -> np.ndarray:
        return self._cached('B', lambda: np.array(self.B, dtype=float))

    def replace(self, **changes):
        """ Copy of the scenario with some fields replaced (e.g. horizon=30). """
        return replace(self, **changes)

    def with_drones(self, indices):
        """ Scenario keeping only the drones in `indices`, in the given order. """
        indices = list(indices)
        if len(indices) == 0:
            raise ValueError('with_drones needs at least one drone index')
        for i in indices:
            if not 0 <= i < self.n_drones:
                raise ValueError(f'drone index {i} out of range 0..{self.n_drones - 1}')
        return self.replace(drone_starts=tuple(self.drone_starts[i] for i in indices))

    def summary(self):
        return (f'{self.name}: M={self.n_buildings} K={self.n_zones} n={self.n_drones} '
                f'N={self.horizon} lambda={self.lambda_:g} d_min={self.d_min:g}')

    def __str__(self):
        return self.summary()
