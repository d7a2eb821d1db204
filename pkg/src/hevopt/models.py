"""Quasi-static powertrain component models.

Backward-facing driveline for a parallel hybrid: wheel force from the
longitudinal force balance, shaft torque and speed through the selected
gear, torque split between engine and motor, engine fuel from a gridded
map, and a zeroth-order equivalent-circuit battery with an open-circuit
voltage fit and charge/discharge resistance maps over (SOC, temperature).

Every model function evaluates on plain numpy arrays (used by the DP
benchmark and the forward simulator) and, through the pluggable lookup
backend, on forward-mode duals with C1-smoothed tables (used by the NLP
transcription).  The two backends agree everywhere except inside the
small smoothing bands around table breakpoints.

Sign conventions:
  * positive terminal power discharges the battery (SOC rate negative);
  * positive torque is traction; regenerative torque is negative and goes
    entirely to the motor, clipped at its limit, with friction brakes
    absorbing the remainder at zero cost;
  * driveline efficiency divides wheel torque in traction and multiplies
    it in braking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import ad
from .maps import Grid1D, Grid2D, interp1, interp2, interp1_c1, interp2_c1

GRAVITY = 9.81
# smooth transition half-widths (model constants, shared by both backends)
ROLL_GATE_SPEED = 0.1  # m/s; rolling resistance fades in over [0, 0.1]
FORCE_BLEND = 50.0  # N; traction/braking efficiency blend half-width
TORQUE_CLIP_EPS = 2.0  # N*m; smooth clip sharpness in the smooth backend


class ConfigError(Exception):
    """Bad user-supplied configuration (CLI exit code 2)."""


class BatteryCapabilityError(Exception):
    """Requested terminal power exceeds what the pack can deliver."""


# ---------------------------------------------------------------------
# lookup backends


class ExactBackend:
    """Hard piecewise-linear lookups on plain arrays."""

    def interp1(self, grid: Grid1D, x):
        return interp1(grid, x)

    def interp2(self, grid: Grid2D, x, y):
        return interp2(grid, x, y)

    def maximum(self, a, b, eps=TORQUE_CLIP_EPS):
        return np.maximum(a, b)

    def where(self, cond, a, b):
        return np.where(cond, a, b)


class SmoothBackend:
    """C1-smoothed lookups lifted through dual numbers."""

    def __init__(self, width_frac: float):
        self.width_frac = float(width_frac)

    def interp1(self, grid: Grid1D, x):
        y, dy, d2 = interp1_c1(grid, ad.value_of(x), self.width_frac)
        return ad.from_table(x, y, dy, d2)

    def interp2(self, grid: Grid2D, x, y):
        tab = interp2_c1(grid, ad.value_of(x), ad.value_of(y), self.width_frac)
        return ad.from_table2(x, y, *tab)

    def maximum(self, a, b, eps=TORQUE_CLIP_EPS):
        return ad.smooth_max(a, b, eps)

    def where(self, cond, a, b):
        if isinstance(a, ad.Dual) or isinstance(b, ad.Dual):
            ref = a if isinstance(a, ad.Dual) else b
            a = ref._lift(a) if not isinstance(a, ad.Dual) else a
            b = ref._lift(b) if not isinstance(b, ad.Dual) else b
            hes = None
            if a.hes is not None:
                hes = np.where(cond[..., None, None], a.hes, b.hes)
            return ad.Dual(
                np.where(cond, a.val, b.val),
                np.where(cond[..., None], a.dot, b.dot),
                hes,
            )
        return np.where(cond, a, b)


EXACT = ExactBackend()


# ---------------------------------------------------------------------
# parameter containers


@dataclass
class BatteryParams:
    n_series: int
    v_cell: float
    ocv_alpha: float
    ocv_beta: float
    ocv_gamma: float
    ocv_zeta: float
    ocv_eps: float
    capacity_ah: float
    r_charge: Grid2D
    r_discharge: Grid2D
    thermal_mass: float  # J/K
    heat_transfer: float  # W/K
    t_ambient: float  # degC

    def to_json(self):
        d = {k: getattr(self, k) for k in (
            "n_series", "v_cell", "ocv_alpha", "ocv_beta", "ocv_gamma",
            "ocv_zeta", "ocv_eps", "capacity_ah", "thermal_mass",
            "heat_transfer", "t_ambient")}
        d["r_charge"] = self.r_charge.to_json()
        d["r_discharge"] = self.r_discharge.to_json()
        return d

    @classmethod
    def from_json(cls, obj):
        obj = dict(obj)
        obj["r_charge"] = Grid2D.from_json(obj["r_charge"])
        obj["r_discharge"] = Grid2D.from_json(obj["r_discharge"])
        return cls(**obj)


@dataclass
class DrivelineParams:
    mass: float  # kg, gross vehicle
    wheel_radius: float  # m
    drag_area: float  # Cd*A, m^2
    air_density: float  # kg/m^3
    rolling_coeff: float
    final_drive: float
    gear_ratios: np.ndarray  # descending
    efficiency: float
    motor_rated_power: float  # W

    def __post_init__(self):
        self.gear_ratios = np.asarray(self.gear_ratios, dtype=float)
        if not np.all(np.diff(self.gear_ratios) < 0):
            raise ConfigError("gear ratios must be strictly descending")

    @property
    def n_gears(self) -> int:
        return self.gear_ratios.size

    def ratio_grid(self) -> Grid1D:
        return Grid1D(np.arange(1.0, self.n_gears + 1.0), self.gear_ratios)

    def to_json(self):
        d = {k: getattr(self, k) for k in (
            "mass", "wheel_radius", "drag_area", "air_density",
            "rolling_coeff", "final_drive", "efficiency", "motor_rated_power")}
        d["gear_ratios"] = self.gear_ratios.tolist()
        return d

    @classmethod
    def from_json(cls, obj):
        return cls(**obj)


@dataclass
class PowertrainParams:
    battery: BatteryParams
    driveline: DrivelineParams
    fuel_map: Grid2D  # kg/s over (shaft speed rad/s, engine torque N*m)
    engine_tau_max: Grid1D
    engine_tau_min: Grid1D
    engine_max_speed: float  # rad/s
    engine_lug_speed: float  # rad/s, minimum sustained speed while moving
    motor_tau_max: Grid1D
    motor_tau_min: Grid1D
    _ratio_grid: Grid1D = field(init=False, repr=False)

    def __post_init__(self):
        self._ratio_grid = self.driveline.ratio_grid()

    def to_json(self):
        return {
            "battery": self.battery.to_json(),
            "driveline": self.driveline.to_json(),
            "engine_map": self.fuel_map.to_json(),
            "engine_limits": {
                "tau_max": self.engine_tau_max.to_json(),
                "tau_min": self.engine_tau_min.to_json(),
                "max_speed": self.engine_max_speed,
                "lug_speed": self.engine_lug_speed,
            },
            "motor_limits": {
                "tau_max": self.motor_tau_max.to_json(),
                "tau_min": self.motor_tau_min.to_json(),
            },
        }

    @classmethod
    def from_json(cls, obj):
        eng = obj["engine_limits"]
        mot = obj["motor_limits"]
        return cls(
            battery=BatteryParams.from_json(obj["battery"]),
            driveline=DrivelineParams.from_json(obj["driveline"]),
            fuel_map=Grid2D.from_json(obj["engine_map"]),
            engine_tau_max=Grid1D.from_json(eng["tau_max"]),
            engine_tau_min=Grid1D.from_json(eng["tau_min"]),
            engine_max_speed=eng["max_speed"],
            engine_lug_speed=eng["lug_speed"],
            motor_tau_max=Grid1D.from_json(mot["tau_max"]),
            motor_tau_min=Grid1D.from_json(mot["tau_min"]),
        )


def save_params(params: PowertrainParams, path):
    with open(path, "w") as f:
        json.dump(params.to_json(), f, indent=1)


def load_params(path) -> PowertrainParams:
    try:
        with open(path) as f:
            obj = json.load(f)
        return PowertrainParams.from_json(obj)
    except FileNotFoundError:
        raise ConfigError(f"parameter file not found: {path}")
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"malformed parameter file {path}: {e}")


# ---------------------------------------------------------------------
# battery


def battery_ocv(bp: BatteryParams, soc):
    """Pack open-circuit voltage from the exponential+linear SOC fit."""
    cell = (
        bp.v_cell
        + bp.ocv_alpha * (1.0 - ad.exp(soc * (-bp.ocv_beta)))
        + bp.ocv_gamma * soc
        + bp.ocv_zeta * (1.0 - ad.exp(-bp.ocv_eps / (1.0 - soc)))
    )
    return bp.n_series * cell


def battery_resistance(bp: BatteryParams, soc, temp, power, backend=EXACT):
    """Internal resistance, charge/discharge map selected by power sign."""
    r_dis = backend.interp2(bp.r_discharge, soc, temp)
    r_chg = backend.interp2(bp.r_charge, soc, temp)
    return backend.where(ad.value_of(power) >= 0.0, r_dis, r_chg)


def battery_capability(bp: BatteryParams, soc, temp):
    """Maximum discharge power the quadratic admits: Voc^2 / (4 R)."""
    voc = battery_ocv(bp, soc)
    r = interp2(bp.r_discharge, soc, temp)
    return voc * voc / (4.0 * r)


def battery_dynamics(bp: BatteryParams, soc, temp, power, backend=EXACT):
    """(soc_rate 1/s, temp_rate K/s, current A) for a terminal power in W.

    Solves the equivalent-circuit quadratic for the physical (smaller)
    current root.  The exact backend raises BatteryCapabilityError when
    the requested power exceeds capability; the smooth backend floors the
    discriminant so iterates stay differentiable and relies on explicit
    power-path constraints to keep solutions inside capability.
    """
    voc = battery_ocv(bp, soc)
    r = battery_resistance(bp, soc, temp, power, backend)
    disc = voc * voc - 4.0 * r * power
    if isinstance(backend, SmoothBackend):
        # floor is far below any constrained operating point; eps is tiny
        # against the Voc^2 scale so the floored branch is exact there
        disc = ad.smooth_max(disc, 1.0, eps=1.0)
        current = (voc - ad.sqrt(disc)) / (2.0 * r)
    else:
        if np.any(ad.value_of(disc) < 0.0):
            raise BatteryCapabilityError("terminal power exceeds battery capability")
        current = (voc - ad.sqrt(disc)) / (2.0 * r)
    soc_rate = current * (-1.0 / (3600.0 * bp.capacity_ah))
    temp_rate = (current * current * r - bp.heat_transfer * (temp - bp.t_ambient)) * (
        1.0 / bp.thermal_mass
    )
    return soc_rate, temp_rate, current


# ---------------------------------------------------------------------
# driveline


def gear_ratio_total(pt: PowertrainParams, gear, backend=EXACT):
    """Total ratio gearbox*final drive; integer gears index the table,
    fractional (relaxed) gears interpolate it linearly."""
    dl = pt.driveline
    g = ad.value_of(gear)
    if not isinstance(gear, ad.Dual) and np.issubdtype(np.asarray(g).dtype, np.integer):
        return dl.gear_ratios[np.asarray(g) - 1] * dl.final_drive
    return backend.interp1(pt._ratio_grid, gear) * dl.final_drive


def wheel_force(dl: DrivelineParams, v, a):
    """Longitudinal force at the wheels (N)."""
    drag = 0.5 * dl.air_density * dl.drag_area * v * v
    roll = dl.rolling_coeff * dl.mass * GRAVITY * ad.smoothstep(v, 0.0, ROLL_GATE_SPEED)
    return dl.mass * a + drag + roll


def demand_torque(pt: PowertrainParams, v, a, gear, backend=EXACT):
    """(total shaft torque N*m, shaft speed rad/s) for a drive state.

    Efficiency divides in traction and multiplies in braking, blended
    smoothly over +-FORCE_BLEND newtons of wheel force.
    """
    dl = pt.driveline
    ratio = gear_ratio_total(pt, gear, backend)
    force = wheel_force(dl, v, a)
    sigma = ad.smoothstep(force, -FORCE_BLEND, FORCE_BLEND)
    eta_factor = sigma * (1.0 / dl.efficiency) + (1.0 - sigma) * dl.efficiency
    tau = force * dl.wheel_radius / ratio * eta_factor
    omega = v * ratio / dl.wheel_radius
    return tau, omega


def split_torques(pt: PowertrainParams, tau_total, omega, mu, backend=EXACT):
    """(engine torque, motor torque) from the split ratio mu.

    Traction: tau_m = mu * tau_total, tau_e = (1 - mu) * tau_total.
    Braking: all torque to the motor clipped at its limit, engine zero;
    friction brakes take the remainder at zero cost.
    """
    tau_w = TORQUE_CLIP_EPS
    sigma = ad.smoothstep(tau_total, -tau_w, tau_w)
    tau_min = backend.interp1(pt.motor_tau_min, omega)
    tau_m_regen = backend.maximum(tau_total, tau_min)
    tau_m = sigma * (mu * tau_total) + (1.0 - sigma) * tau_m_regen
    tau_e = sigma * ((1.0 - mu) * tau_total)
    return tau_e, tau_m


def fuel_rate(pt: PowertrainParams, omega, tau_e, backend=EXACT):
    """Engine fuel mass flow (kg/s) from the gridded map, clamped."""
    return backend.interp2(pt.fuel_map, omega, tau_e)


def motor_power(tau_m, omega):
    """Electrical power at the battery terminals (ideal converter)."""
    return tau_m * omega


# ---------------------------------------------------------------------
# synthetic default parameter set


def synthetic_params() -> PowertrainParams:
    """Self-consistent medium-duty parallel-hybrid parameter set.

    A 7.2 t truck, six-speed gearbox, 90 kW motor, and a 31 Ah / 106s
    LFP pack.  The fuel map is a Willans-style efficiency bowl (peak 0.40)
    with an idle column at zero torque and a zero row at zero speed.
    """
    soc_b = np.array([0.2, 0.4, 0.6, 0.8, 0.9])
    temp_b = np.array([15.0, 20.0, 25.0, 30.0, 40.0])
    # mild U-shape over SOC, decreasing with temperature; pack-level ohms
    soc_shape = 1.0 + 0.12 * ((soc_b - 0.55) / 0.35) ** 2
    temp_shape = 1.0 + 0.015 * (25.0 - temp_b)
    r_dis = 0.150 * soc_shape[:, None] * temp_shape[None, :]
    r_chg = 0.162 * soc_shape[:, None] * temp_shape[None, :]

    battery = BatteryParams(
        n_series=106,
        v_cell=3.3,
        ocv_alpha=0.15,
        ocv_beta=25.0,
        ocv_gamma=0.08,
        ocv_zeta=0.35,
        ocv_eps=0.05,
        capacity_ah=31.0,
        r_charge=Grid2D(soc_b, temp_b, r_chg),
        r_discharge=Grid2D(soc_b, temp_b, r_dis),
        thermal_mass=81000.0,
        heat_transfer=40.0,
        t_ambient=25.0,
    )

    driveline = DrivelineParams(
        mass=7200.0,
        wheel_radius=0.45,
        drag_area=5.5,
        air_density=1.2,
        rolling_coeff=0.008,
        final_drive=4.1,
        gear_ratios=np.array([5.6, 3.45, 2.25, 1.5, 1.0, 0.74]),
        efficiency=0.96,
        motor_rated_power=90e3,
    )

    # engine fuel map: fuel = max(idle(w), P / (eta(w, tau) * LHV))
    lhv = 42.6e6
    omega_b = np.array([0.0, 30.0, 60.0, 90.0, 120.0, 150.0, 180.0, 210.0, 240.0])
    tau_b = np.array([0.0, 150.0, 300.0, 450.0, 600.0, 750.0, 900.0, 1050.0, 1250.0])
    W, T = np.meshgrid(omega_b, tau_b, indexing="ij")
    eta = 0.40 * (1.0 - 0.25 * ((W - 140.0) / 110.0) ** 2 - 0.30 * ((T - 700.0) / 650.0) ** 2)
    eta = np.clip(eta, 0.12, 0.40)
    idle = 1.2e-6 * W
    fuel = np.maximum(idle, W * T / (eta * lhv))
    fuel[0, :] = 0.0  # engine stopped at zero shaft speed
    fuel[:, 0] = idle[:, 0]  # idle column at zero torque
    fuel_map = Grid2D(omega_b, tau_b, fuel)

    eng_w = np.array([0.0, 60.0, 120.0, 180.0, 240.0])
    engine_tau_max = Grid1D(eng_w, np.array([1100.0, 1200.0, 1250.0, 1150.0, 950.0]))
    engine_tau_min = Grid1D(eng_w, np.zeros(5))

    mot_w = np.array([0.0, 60.0, 120.0, 180.0, 210.0, 240.0])
    mot_tau = np.array([500.0, 500.0, 500.0, 500.0, 90e3 / 210.0, 90e3 / 240.0])
    motor_tau_max = Grid1D(mot_w, mot_tau)
    motor_tau_min = Grid1D(mot_w, -mot_tau)

    return PowertrainParams(
        battery=battery,
        driveline=driveline,
        fuel_map=fuel_map,
        engine_tau_max=engine_tau_max,
        engine_tau_min=engine_tau_min,
        engine_max_speed=240.0,
        engine_lug_speed=55.0,
        motor_tau_max=motor_tau_max,
        motor_tau_min=motor_tau_min,
    )


def battery_power_cap(pt: PowertrainParams, margin: float = 0.9) -> float:
    """Conservative symmetric terminal-power bound used as a path limit.

    Scans capability over the resistance-map grid restricted to the
    operating SOC box and applies a safety margin.
    """
    bp = pt.battery
    socs = np.clip(bp.r_discharge.xbreaks, 0.3, 0.8)
    temps = bp.r_discharge.ybreaks
    S, T = np.meshgrid(socs, temps, indexing="ij")
    cap = battery_capability(bp, S, T)
    return margin * float(cap.min())
