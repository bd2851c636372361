import numpy as np

from src.trajectory import DroneTrajectory


def step_dynamics(A, B, x, u):
    """ One step of the drone dynamics x(k+1) = A^T x(k) + B^T u(k).

    Parameters
    ----------
    A, B : array-like
        2x2 state transition matrices.
    x : array-like
        Current planar state.
    u : array-like
        Control (velocity) applied during the step.

    Returns
    -------
    numpy.ndarray
        Next state.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return A.T @ np.asarray(x, dtype=float) + B.T @ np.asarray(u, dtype=float)


def rollout_states(A, B, starts, controls):
    """ Roll the dynamics forward for several drones at once.

    Parameters
    ----------
    A, B : numpy.ndarray
        2x2 matrices.
    starts : numpy.ndarray
        Initial states, shape (n, 2).
    controls : numpy.ndarray
        Controls, shape (n, N, 2).

    Returns
    -------
    numpy.ndarray
        States of shape (n, N+1, 2) with states[:, 0] = starts.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    controls = np.asarray(controls, dtype=float)
    n, horizon = controls.shape[0], controls.shape[1]
    states = np.empty((n, horizon + 1, 2))
    states[:, 0] = starts
    # row vectors: x @ A == (A^T x)^T
    for t in range(horizon):
        states[:, t + 1] = states[:, t] @ A + controls[:, t] @ B
    return states


def rollout(A, B, x0, controls):
    """ Trajectory of one drone starting at `x0` and driven by `controls`.

    The returned trajectory satisfies the dynamics at every step.
    """
    controls = np.asarray(controls, dtype=float).reshape(-1, 2)
    if len(controls) == 0:
        raise ValueError('rollout needs at least one control')
    x0 = np.asarray(x0, dtype=float).reshape(1, 2)
    states = rollout_states(A, B, x0, controls[None, :, :])[0]
    return DroneTrajectory(states, controls)
