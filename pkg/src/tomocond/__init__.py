"""Tomography protocols, their error robustness, and optical verification.

The package is organized as:

``tomocond.linalg``
    Dense SVD / least-squares helpers with the contracts the rest of the
    package relies on.
``tomocond.states``
    Density matrices, the real state-vector convention, named states,
    fidelity and trace distance.
``tomocond.protocols``
    The seven two-qubit measurement protocols, single-qubit variants,
    qudit/multiqubit generalizations, and their rotation matrices.
``tomocond.conditioning``
    Condition numbers, distance to singularity, perturbation bounds, and
    the protocol robustness comparison table.
``tomocond.simulate``
    Noisy measurement simulation and linear-inversion reconstruction.
``tomocond.optics``
    Wave-plate algebra, beam-splitter transformation of photon pairs, and
    coincidence classification for the two measurement setups.
``tomocond.cli``
    The ``tomocond`` command-line front end.
"""

__version__ = "0.1.0"
