"""Scenario files: flat INI sections describing base, profile, bundle, suites and numerics.

Example::

    [scenario]
    name = fs2-quadratic
    suites = kahler, foliation, potential, submersion
    samples = 20
    seed = 0

    [base]
    family = fubini-study
    m = 2

    [profile]
    family = quadratic
    tau_min = 1
    tau_max = 2
    s = 2

    [bundle]
    kind = warped
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import constants as C
from .bases import BaseManifold, flat_torus, fubini_study, product, verify_base
from .bundles import CircleBundleMetric, WarpedBundleMetric, circle_bundle, product_bundle, verify_kahler, warped_bundle
from .foliation import decay_report, jacobi_decay_experiment, verify_warped_foliation
from .potential import verify_warped_potential
from .profile import Profile, quadratic_q, quartic_q, realize, round_sphere_profile, validate
from .report import VerificationReport
from .submersion import verify_circle_bundle_curvature, verify_ricci_count, verify_warped_curvature
from .tensor import FDConfig, NumericError

SUITES = ("kahler", "foliation", "potential", "submersion", "jacobi")
BUNDLE_KINDS = ("circle", "warped", "product")
BASE_FAMILIES = ("flat", "fubini-study", "product")
PROFILE_FAMILIES = ("quadratic", "quartic", "round")
TOLERANCE_KEYS = {
    "kahler": C.TOL_KAHLER,
    "foliation": C.TOL_FOLIATION,
    "potential": C.TOL_POTENTIAL,
    "curvature": C.TOL_CURVATURE_REL,
    "base": C.TOL_BASE,
    "jacobi_threshold": 1e-3,
    "jacobi_tangential": 1e-8,
}
# suites that make sense for each bundle kind ("all" expands to these)
SUPPORTED = {
    "circle": ("submersion",),
    "warped": SUITES,
    "product": ("kahler", "foliation"),
}
SWEEP_PARAMETERS = ("fd_step", "n_grid", "sample_count", "s", "tau_max")


class ScenarioError(ValueError):
    """Parse or validation failure, with the offending file, line and field."""

    def __init__(self, message: str, path: str = "<scenario>", line: int | None = None, key: str | None = None):
        self.path, self.line, self.key = path, line, key
        where = path if line is None else f"{path}:{line}"
        what = f" [{key}]" if key else ""
        super().__init__(f"{where}:{what} {message}")


@dataclass(frozen=True)
class BaseSpec:
    family: str = "fubini-study"
    m: int = 2
    scale: float = 1.0
    factors: tuple[tuple[str, int, float], ...] = ()


@dataclass(frozen=True)
class ProfileSpec:
    family: str = "quadratic"
    tau_min: float = 1.0
    tau_max: float = 2.0
    s: float = 2.0
    n_grid: int = C.PROFILE_N_GRID
    weight: float = 0.0
    f_scale: float = 1.0
    radius: float = 1.0


@dataclass(frozen=True)
class BundleSpec:
    kind: str = "warped"
    a: float = 1.0
    b: float = 1.0
    s: float = 2.0


@dataclass(frozen=True)
class NumericSpec:
    fd_step: float = C.FD_STEP
    fd_step2: float = C.FD_STEP_SECOND
    richardson: bool = True
    convergence: bool = False

    def fd(self) -> FDConfig:
        if self.convergence:
            return FDConfig.convergence(self.fd_step)
        return FDConfig(step=self.fd_step, step2=self.fd_step2, richardson=self.richardson)


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str = ""
    suites: tuple[str, ...] = SUITES
    samples: int = 20
    seed: int = 0
    base: BaseSpec = field(default_factory=BaseSpec)
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    bundle: BundleSpec = field(default_factory=BundleSpec)
    numeric: NumericSpec = field(default_factory=NumericSpec)
    tolerances: dict = field(default_factory=dict)

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, TOLERANCE_KEYS[key]))

    def with_fd_step(self, step: float, convergence: bool | None = None) -> "Scenario":
        ratio = C.FD_STEP_SECOND / C.FD_STEP
        conv = self.numeric.convergence if convergence is None else convergence
        return replace(self, numeric=replace(self.numeric, fd_step=step, fd_step2=step * ratio, convergence=conv))

    def with_parameter(self, name: str, value) -> "Scenario":
        """Copy with one sweepable parameter changed."""
        if name == "fd_step":
            return self.with_fd_step(float(value), convergence=True)
        if name == "n_grid":
            return replace(self, profile=replace(self.profile, n_grid=int(value)))
        if name == "sample_count":
            return replace(self, samples=int(value))
        if name == "s":
            if self.bundle.kind == "circle":
                return replace(self, bundle=replace(self.bundle, s=float(value)))
            return replace(self, profile=replace(self.profile, s=float(value)))
        if name == "tau_max":
            return replace(self, profile=replace(self.profile, tau_max=float(value)))
        raise ScenarioError(f"unknown sweep parameter {name!r}; expected one of {', '.join(SWEEP_PARAMETERS)}")


# -- parsing --------------------------------------------------------------------------------------


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for n, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return n
            continue
        if current == section and key is not None and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return n
    return None


class _Reader:
    def __init__(self, cp: configparser.ConfigParser, text: str, path: str):
        self.cp, self.text, self.path = cp, text, path
        self.used: set[tuple[str, str]] = set()

    def err(self, section: str, key: str | None, msg: str) -> ScenarioError:
        return ScenarioError(msg, self.path, _line_of(self.text, section, key), f"{section}.{key}" if key else section)

    def get(self, section: str, key: str, conv, default, positive: bool = False):
        if not self.cp.has_option(section, key):
            return default
        self.used.add((section, key))
        raw = self.cp.get(section, key)
        try:
            value = conv(raw)
        except ValueError:
            raise self.err(section, key, f"cannot parse {raw!r}") from None
        if positive and not value > 0:
            raise self.err(section, key, f"must be positive, got {raw!r}")
        return value

    def check_unused(self):
        for sec in self.cp.sections():
            for key in self.cp.options(sec):
                if (sec, key) not in self.used:
                    raise self.err(sec, key, "unknown field")


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _choice(options):
    def conv(raw: str) -> str:
        v = raw.strip().lower()
        if v not in options:
            raise ValueError(raw)
        return v

    return conv


def _factors(raw: str) -> tuple[tuple[str, int, float], ...]:
    out = []
    for item in raw.split(","):
        parts = item.strip().split(":")
        if len(parts) != 3 or parts[0] not in ("flat", "fubini-study"):
            raise ValueError(raw)
        family, m, scale = parts[0], int(parts[1]), float(parts[2])
        if m <= 0 or scale <= 0:
            raise ValueError(raw)
        out.append((family, m, scale))
    if len(out) < 2:
        raise ValueError(raw)
    return tuple(out)


def parse_scenario(text: str, path: str = "<scenario>") -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise ScenarioError(str(exc).splitlines()[0], path, line) from None
    allowed = {"scenario", "base", "profile", "bundle", "numeric", "tolerances"}
    for sec in cp.sections():
        if sec not in allowed:
            raise ScenarioError("unknown section", path, _line_of(text, sec, None), sec)
    if not cp.has_section("scenario"):
        raise ScenarioError("missing [scenario] section", path)
    rd = _Reader(cp, text, path)

    name = rd.get("scenario", "name", str.strip, Path(path).stem)
    description = rd.get("scenario", "description", str.strip, "")
    samples = rd.get("scenario", "samples", int, 20, positive=True)
    seed = rd.get("scenario", "seed", int, 0)
    if seed < 0:
        raise rd.err("scenario", "seed", "must be non-negative")
    suites_raw = rd.get("scenario", "suites", str, "all")

    base = BaseSpec(
        family=rd.get("base", "family", _choice(BASE_FAMILIES), "fubini-study"),
        m=rd.get("base", "m", int, 2, positive=True),
        scale=rd.get("base", "scale", float, 1.0, positive=True),
        factors=rd.get("base", "factors", _factors, ()),
    )
    if base.family == "product" and not base.factors:
        raise rd.err("base", "factors", "product base needs factors = family:m:scale, family:m:scale")
    profile = ProfileSpec(
        family=rd.get("profile", "family", _choice(PROFILE_FAMILIES), "quadratic"),
        tau_min=rd.get("profile", "tau_min", float, 1.0, positive=True),
        tau_max=rd.get("profile", "tau_max", float, 2.0, positive=True),
        s=rd.get("profile", "s", float, 2.0, positive=True),
        n_grid=rd.get("profile", "n_grid", int, C.PROFILE_N_GRID, positive=True),
        weight=rd.get("profile", "weight", float, 0.0),
        f_scale=rd.get("profile", "f_scale", float, 1.0, positive=True),
        radius=rd.get("profile", "radius", float, 1.0, positive=True),
    )
    if profile.tau_max <= profile.tau_min:
        raise rd.err("profile", "tau_max", "must exceed tau_min")
    if profile.weight < 0:
        raise rd.err("profile", "weight", "must be non-negative")
    bundle = BundleSpec(
        kind=rd.get("bundle", "kind", _choice(BUNDLE_KINDS), "warped"),
        a=rd.get("bundle", "a", float, 1.0, positive=True),
        b=rd.get("bundle", "b", float, 1.0, positive=True),
        s=rd.get("bundle", "s", float, 2.0, positive=True),
    )
    numeric = NumericSpec(
        fd_step=rd.get("numeric", "fd_step", float, C.FD_STEP, positive=True),
        fd_step2=rd.get("numeric", "fd_step2", float, C.FD_STEP_SECOND, positive=True),
        richardson=rd.get("numeric", "richardson", _bool, True),
        convergence=rd.get("numeric", "convergence", _bool, False),
    )
    tolerances = {}
    if cp.has_section("tolerances"):
        for key in cp.options("tolerances"):
            if key not in TOLERANCE_KEYS:
                raise rd.err("tolerances", key, f"unknown tolerance; expected one of {', '.join(TOLERANCE_KEYS)}")
            tolerances[key] = rd.get("tolerances", key, float, None, positive=True)

    names = [s.strip().lower() for s in suites_raw.split(",") if s.strip()]
    if not names:
        raise rd.err("scenario", "suites", "no suites given")
    supported = SUPPORTED[bundle.kind]
    if "all" in names:
        suites = supported
    else:
        for s in names:
            if s not in SUITES:
                raise rd.err("scenario", "suites", f"unknown suite {s!r}; expected one of {', '.join(SUITES + ('all',))}")
            if s not in supported:
                raise rd.err("scenario", "suites", f"suite {s!r} does not apply to bundle kind {bundle.kind!r}")
        suites = tuple(s for s in SUITES if s in names)
    rd.check_unused()
    return Scenario(name=name, description=description, suites=suites, samples=samples, seed=seed, base=base,
                    profile=profile, bundle=bundle, numeric=numeric, tolerances=tolerances)


def bundled_scenarios() -> dict[str, str]:
    """Bundled scenario names mapped to their file text."""
    root = resources.files("kahlerfol") / "scenarios"
    return {p.name[: -len(".scn")]: p.read_text() for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".scn")}


def load_scenario(path_or_name: str) -> Scenario:
    p = Path(path_or_name)
    if p.is_file():
        return parse_scenario(p.read_text(), str(p))
    key = p.name[: -len(".scn")] if p.name.endswith(".scn") else p.name
    bundled = bundled_scenarios()
    if key in bundled:
        return parse_scenario(bundled[key], f"{key}.scn")
    raise ScenarioError(f"no such scenario file or bundled scenario {path_or_name!r}", str(path_or_name))


# -- construction ---------------------------------------------------------------------------------


def _one_base(family: str, m: int, scale: float) -> BaseManifold:
    return flat_torus(m) if family == "flat" else fubini_study(m, scale)


def build_base(spec: BaseSpec) -> BaseManifold:
    if spec.family == "product":
        bases = [_one_base(*f) for f in spec.factors]
        out = bases[0]
        for b in bases[1:]:
            out = product(out, b)
        return out
    return _one_base(spec.family, spec.m, spec.scale)


def build_profile(spec: ProfileSpec) -> Profile:
    if spec.family == "round":
        return round_sphere_profile(spec.radius, spec.n_grid)
    if spec.family == "quadratic":
        q = quadratic_q(spec.tau_min, spec.tau_max, spec.s)
    else:
        q = quartic_q(spec.tau_min, spec.tau_max, spec.s, spec.weight)
    p = realize(q, spec.n_grid)
    return p.perturbed(spec.f_scale) if spec.f_scale != 1.0 else p


def build_bundle(scn: Scenario) -> CircleBundleMetric | WarpedBundleMetric:
    base = build_base(scn.base)
    kind = scn.bundle.kind
    if kind == "circle":
        return circle_bundle(base, scn.bundle.a, scn.bundle.b, scn.bundle.s)
    profile = build_profile(scn.profile)
    if kind == "product":
        if scn.profile.family != "round":
            raise ScenarioError("product bundles use the round profile family", key="profile.family")
        return product_bundle(base, profile)
    if scn.profile.family == "round":
        raise ScenarioError("warped bundles need a Q profile (quadratic or quartic)", key="profile.family")
    return warped_bundle(base, profile)


# -- running --------------------------------------------------------------------------------------


def _guarded(rep: VerificationReport, suite: str, fn):
    try:
        rep.extend(fn())
    except (NumericError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        rep.add(f"{suite}.error", f"suite aborted: {type(exc).__name__}", float("inf"), 0.0)
        rep.notes.append(f"error: {suite} suite aborted: {exc}")


def run_scenario(scn: Scenario) -> VerificationReport:
    """Build the bundle and run every requested suite; the report is deterministic given the seed."""
    rep = VerificationReport(name=scn.name, seed=scn.seed)
    fd = scn.numeric.fd()
    rng = np.random.default_rng(scn.seed)
    bundle = build_bundle(scn)
    base = bundle.base
    rep.extend(verify_base(base, base.sample(rng, min(scn.samples, 5)), fd, scn.tol("base")))
    if base.flagged:
        rep.notes.append("warning: dim-4 total space; the foliation theory is only claimed for dim >= 6")
    X = bundle.sample(rng, scn.samples)
    if isinstance(bundle, CircleBundleMetric):
        if "submersion" in scn.suites:
            _guarded(rep, "submersion",
                     lambda: verify_circle_bundle_curvature(bundle, X, fd, scn.tol("curvature"), seed=scn.seed))
        return rep
    if bundle.s != 0:
        rep.extend(validate(bundle.profile))
    for suite in scn.suites:
        if suite == "kahler":
            _guarded(rep, suite, lambda: verify_kahler(bundle, X, fd, scn.tol("kahler")))
        elif suite == "foliation":
            _guarded(rep, suite, lambda: verify_warped_foliation(bundle, X, fd, scn.tol("foliation")))
        elif suite == "potential":
            _guarded(rep, suite, lambda: verify_warped_potential(bundle, X, fd, seed=scn.seed, tol=scn.tol("potential")))
        elif suite == "submersion":
            def sub():
                r = verify_warped_curvature(bundle, X, fd, scn.tol("curvature"), seed=scn.seed)
                return verify_ricci_count(bundle, X[: min(len(X), 10)], fd, rep=r)
            _guarded(rep, suite, sub)
        elif suite == "jacobi":
            def jac():
                trace = jacobi_decay_experiment(bundle, fd=fd)
                return decay_report(trace, scn.tol("jacobi_threshold"), scn.tol("jacobi_tangential"))
            _guarded(rep, suite, jac)
    return rep
