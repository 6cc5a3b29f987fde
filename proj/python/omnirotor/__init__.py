"""Geometric tracking control of an omnidirectional multirotor with rotor dynamics."""

from ._core import (  # noqa: F401
    AllocationMatrix,
    ControllerMode,
    Error,
    Gains,
    RotorGeometry,
    RotorModel,
    RunConfig,
    SimConfig,
    TrajectoryKind,
    VehicleParams,
    aero_thrust,
    allocate,
    angular_velocity_error,
    attitude_error,
    build_allocation,
    build_rotational_certificate,
    build_translational_certificate,
    compare_controllers,
    default_hex_config,
    exp_so3,
    find_feasible_constants,
    force_track_experiment,
    load_config,
    parse_config,
    psi,
    run_scenario,
    step_response_experiment,
    thrust_to_speed,
    validate_gains,
    vee,
    wedge,
)

__version__ = "0.1.0"
