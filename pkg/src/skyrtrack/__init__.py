"""Finite-difference micromagnetics for notched racetracks: current
driven skyrmion and domain-wall-pair dynamics, pin/depin phase maps,
the rigid-texture velocity model and the skyrmion majority gate."""

from .analysis import (OutcomeRecord, TrajectoryRecord, classify_outcome,
                       drift_velocity, dwp_position, locate_skyrmions,
                       topological_charge)
from .dynamics import (IntegratorConfig, StiffnessError, llg_rhs, relax,
                       run_pulse, step, torque_coefficient)
from .fields import EffectiveField, EnergyReport, total_energy, total_field
from .model import (DrivePulse, GeometryMask, MagnetizationGrid,
                    MaterialParams, build_default_track, build_geometry,
                    cell_neighbors, default_material, uniform_state)
from .textures import SceneParams, seed_domain_wall_pair, seed_scene, seed_skyrmion
from .thiele import (ThieleParams, dissipative_scalar, predict_velocity,
                     skyrmion_hall_angle, stt_force)

__version__ = "0.1.0"
