"""Run configuration: strict JSON schema with echoed defaults.

Every block rejects unknown keys. Serializing a parsed config writes all
defaults explicitly, so parse(serialize(parse(x))) == parse(x).
"""
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from vibronica.errors import ConfigError
from vibronica.model import CavityParams, MoleculeParams

MOLECULE_KEYS = {
    "nu_g": 1.0, "nu_e": 1.0, "lambda1": 0.0, "lambda2": None, "omega_00": 0.0,
    "gamma": 0.01, "Gamma": 0.1, "eta_l": 0.0, "omega_l": 0.0, "units": "nu_g",
}
CAVITY_KEYS = {
    "omega_c": 0.0, "g": 3.0, "kappa1": 0.5, "kappa2": 0.5, "eta_c": 0.001,
    "n_molecules": 1, "units": "kappa",
}
SCAN_KEYS = {"variable": "omega_l", "start": -1.0, "stop": 3.0, "points": 200}
SWEEP_KEYS = {"variable": "n_molecules", "start": 1, "stop": 100, "points": 100}
NUMERICS_KEYS = {
    "n_fock": 12, "photon_dim": 4, "vib_dim": 10, "tail_tol": 1e-10, "oracle": True,
    "absorption_method": "auto", "tau_points": 501, "tau_max": None,
}
OUTPUT_KEYS = {"directory": "out", "formats": ["csv"], "plots": True}
TOP_KEYS = ("molecule", "cavity", "scan", "sweep", "numerics", "output")

FREQUENCY_VARIABLES = ("omega", "omega_l")


@dataclass(frozen=True)
class ScanSpec:
    variable: str
    start: float
    stop: float
    points: int

    def grid(self):
        import numpy as np
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class Numerics:
    n_fock: int = 12
    photon_dim: int = 4
    vib_dim: int = 10
    tail_tol: float = 1e-10
    oracle: bool = True
    absorption_method: str = "auto"
    tau_points: int = 501
    tau_max: float = None


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    formats: tuple = ("csv",)
    plots: bool = True


@dataclass(frozen=True)
class RunConfig:
    molecule: MoleculeParams
    cavity: CavityParams = None
    scan: ScanSpec = None
    sweep: ScanSpec = None
    numerics: Numerics = field(default_factory=Numerics)
    output: OutputSpec = field(default_factory=OutputSpec)
    molecule_units: str = "nu_g"
    cavity_units: str = "kappa"

    def to_dict(self):
        """Fully explicit JSON-ready dict (defaults echoed)."""
        mol = asdict(self.molecule)
        mol["lambda2"] = self.molecule.lambda2
        mol["units"] = self.molecule_units
        d = {"molecule": mol}
        if self.cavity is not None:
            cav = asdict(self.cavity)
            cav["units"] = self.cavity_units
            d["cavity"] = cav
        if self.scan is not None:
            d["scan"] = asdict(self.scan)
        if self.sweep is not None:
            d["sweep"] = asdict(self.sweep)
        num = asdict(self.numerics)
        d["numerics"] = num
        out = asdict(self.output)
        out["formats"] = list(out["formats"])
        d["output"] = out
        return d

    def canonical_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def _check_keys(block, given, allowed):
    if not isinstance(given, dict):
        raise ConfigError(f"'{block}' must be a JSON object")
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in '{block}'; valid keys: {sorted(allowed)}")
    out = dict(allowed)
    out.update(given)
    return out


def _number(block, key, v, integer=False, allow_none=False):
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{block}.{key} must be a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{block}.{key} must be finite")
    if integer:
        if int(v) != v:
            raise ConfigError(f"{block}.{key} must be an integer")
        return int(v)
    return float(v)


def _scan(block, d, keys, variables):
    s = _check_keys(block, d, keys)
    var = s["variable"]
    if var not in variables:
        raise ConfigError(f"{block}.variable {var!r} is not a parameter; choose from "
                          f"{sorted(variables)}")
    points = _number(block, "points", s["points"], integer=True)
    start = _number(block, "start", s["start"])
    stop = _number(block, "stop", s["stop"])
    if points < 2:
        raise ConfigError(f"{block}.points must be >= 2")
    if not start < stop:
        raise ConfigError(f"{block}.start must be below {block}.stop")
    return ScanSpec(var, start, stop, points)


def scan_variables():
    mol = [k for k in MOLECULE_KEYS if k not in ("units", "lambda2")]
    cav = [k for k in CAVITY_KEYS if k != "units"]
    return set(mol) | set(cav) | {"omega", "tau"}


def config_from_dict(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - set(TOP_KEYS))
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {unknown}; valid keys: {list(TOP_KEYS)}")
    if "molecule" not in raw:
        raise ConfigError("config needs a 'molecule' block")

    m = _check_keys("molecule", raw["molecule"], MOLECULE_KEYS)
    mol_units = m.pop("units")
    if mol_units not in ("nu_g", "kappa"):
        raise ConfigError("molecule.units must be 'nu_g' or 'kappa'")
    given = set(raw["molecule"])
    mvals = {}
    for k, v in m.items():
        if k == "lambda2":
            if v is not None:
                mvals[k] = _number("molecule", k, v)
            continue
        if k == "nu_e" and "nu_e" not in given and "lambda2" in given:
            continue
        mvals[k] = _number("molecule", k, v)
    if "lambda2" in mvals and mvals["lambda2"] is None:
        del mvals["lambda2"]
    try:
        mol = MoleculeParams.from_mapping(mvals)
    except ValueError as exc:
        raise ConfigError(f"molecule: {exc}") from exc
    if mol_units == "nu_g" and abs(mol.nu_g - 1.0) > 1e-12:
        raise ConfigError("molecule.nu_g must be 1 when molecule.units is 'nu_g'")

    cav = None
    cav_units = "kappa"
    if raw.get("cavity") is not None:
        c = _check_keys("cavity", raw["cavity"], CAVITY_KEYS)
        cav_units = c.pop("units")
        if cav_units not in ("kappa", "nu_g"):
            raise ConfigError("cavity.units must be 'kappa' or 'nu_g'")
        cvals = {k: _number("cavity", k, v, integer=(k == "n_molecules")) for k, v in c.items()}
        try:
            cav = CavityParams(**cvals)
        except ValueError as exc:
            raise ConfigError(f"cavity: {exc}") from exc
        if cav_units == "kappa" and abs(cav.kappa - 1.0) > 1e-12:
            raise ConfigError("cavity.kappa1 + cavity.kappa2 must be 1 when cavity.units is 'kappa'")
    if mol_units == "kappa" and (cav is None or cav_units != "kappa"):
        raise ConfigError("molecule.units 'kappa' needs a cavity block in kappa units")

    scan = None
    if raw.get("scan") is not None:
        scan = _scan("scan", raw["scan"], SCAN_KEYS, scan_variables())
        if scan.variable in CAVITY_KEYS and cav is None:
            raise ConfigError(f"scan.variable {scan.variable!r} needs a cavity block")
    sweep = None
    if raw.get("sweep") is not None:
        sweep = _scan("sweep", raw["sweep"], SWEEP_KEYS, scan_variables() - {"omega", "tau"})

    n = _check_keys("numerics", raw.get("numerics", {}), NUMERICS_KEYS)
    try:
        num = Numerics(
            n_fock=_number("numerics", "n_fock", n["n_fock"], integer=True),
            photon_dim=_number("numerics", "photon_dim", n["photon_dim"], integer=True),
            vib_dim=_number("numerics", "vib_dim", n["vib_dim"], integer=True),
            tail_tol=_number("numerics", "tail_tol", n["tail_tol"]),
            oracle=n["oracle"],
            absorption_method=n["absorption_method"],
            tau_points=_number("numerics", "tau_points", n["tau_points"], integer=True),
            tau_max=_number("numerics", "tau_max", n["tau_max"], allow_none=True),
        )
    except ConfigError:
        raise
    if not isinstance(num.oracle, bool):
        raise ConfigError("numerics.oracle must be true or false")
    if num.absorption_method not in ("auto", "population", "correlator"):
        raise ConfigError("numerics.absorption_method must be 'auto', 'population' or 'correlator'")
    if num.n_fock < 2 or num.vib_dim < 2:
        raise ConfigError("numerics.n_fock and numerics.vib_dim must be >= 2")
    if num.photon_dim < 3:
        raise ConfigError("numerics.photon_dim must be >= 3")
    if not 1e-14 <= num.tail_tol <= 1e-6:
        raise ConfigError("numerics.tail_tol must lie in [1e-14, 1e-6]")
    if num.tau_points < 2:
        raise ConfigError("numerics.tau_points must be >= 2")
    if num.tau_max is not None and num.tau_max <= 0:
        raise ConfigError("numerics.tau_max must be positive")

    o = _check_keys("output", raw.get("output", {}), OUTPUT_KEYS)
    formats = o["formats"]
    if isinstance(formats, str):
        formats = [formats]
    if not formats or any(f not in ("csv", "json") for f in formats):
        raise ConfigError("output.formats must be a non-empty list drawn from 'csv', 'json'")
    if not isinstance(o["plots"], bool):
        raise ConfigError("output.plots must be true or false")
    out = OutputSpec(str(o["directory"]), tuple(formats), o["plots"])
    return RunConfig(mol, cav, scan, sweep, num, out, mol_units, cav_units)


def parse_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)
