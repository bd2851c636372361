from typing import Any

import numpy as np


class DroneTrajectory(object):
    """State and control sequences of one drone over the horizon.
    """
    def __init__(self, states: Any, controls: Any) -> None:
        """class constructor

        Args:
            states (array-like): N+1 planar states x(0..N), shape (N+1, 2)
            controls (array-like): N controls u(0..N-1) (velocities), shape (N, 2)
        """
        self.states = np.array(states, dtype=float).reshape(-1, 2)
        self.controls = np.array(controls, dtype=float).reshape(-1, 2)
        if len(self.states) != len(self.controls) + 1:
            raise ValueError(f'a trajectory needs len(states) == len(controls) + 1, got '
                             f'{len(self.states)} states and {len(self.controls)} controls')

    @property
    def horizon(self) -> int:
        return len(self.controls)

    @property
    def start(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def copy(self) -> 'DroneTrajectory':
        return DroneTrajectory(self.states.copy(), self.controls.copy())

    def dynamics_residual(self, A: np.ndarray, B: np.ndarray) -> float:
        """Largest violation of x(t+1) = A^T x(t) + B^T u(t) along the trajectory.

        Returns:
            float: max absolute residual (0 for a consistent trajectory)
        """
        if self.horizon == 0:
            return 0.0
        predicted = self.states[:-1] @ A + self.controls @ B
        return float(np.max(np.abs(self.states[1:] - predicted)))

    def __len__(self) -> int:
        return len(self.states)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DroneTrajectory):
            return NotImplemented
        return (np.array_equal(self.states, other.states)
                and np.array_equal(self.controls, other.controls))

    def __str__(self) -> str:
        s = self.__class__.__name__ + "("
        s += "horizon={}, ".format(self.horizon)
        s += "start=({:g}, {:g}), ".format(*self.start)
        s += "final=({:g}, {:g})".format(*self.final_state)
        s += ")"
        return s

    __repr__ = __str__


def stack_states(trajectories) -> np.ndarray:
    """Stack the states of several drones into an array of shape (n, N+1, 2)."""
    return np.stack([traj.states for traj in trajectories])


def stack_controls(trajectories) -> np.ndarray:
    """Stack the controls of several drones into an array of shape (n, N, 2)."""
    return np.stack([traj.controls for traj in trajectories])
