"""Scenario files: JSON configuration with strict validation and defaults.

All quantities are SI with unit-suffixed key names. Unknown keys are
rejected so typos cannot silently fall back to defaults. A minimal scenario
only needs the ``classes`` list; everything else defaults to the standard
evaluation setup (7-cell flower with 300 m inner radius, 1.1e-3 UEs/m^2,
1 MHz / 1 s / -174 dBm/Hz radio with an 11 dB noise figure).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

from .analytic import QuadratureSettings
from .layout import NetworkLayout
from .optimizer import OptimizerSettings
from .radio import LinkLoss, PathLossModel, RadioConfig
from .traffic import ContentClass, TrafficMix


class ScenarioError(ValueError):
    """Configuration parsing or validation failure."""


@dataclass(frozen=True)
class ClassSpec:
    class_id: str
    content: ContentClass
    load_share: float


@dataclass(frozen=True)
class Scenario:
    layout: NetworkLayout
    radio: RadioConfig
    channel: PathLossModel
    classes: tuple  # of ClassSpec
    quad: QuadratureSettings = QuadratureSettings()
    optimizer: OptimizerSettings = OptimizerSettings()
    n_realizations: int = 100
    base_seed: int = 12345
    output_dir: str = "out"

    @property
    def mix(self) -> TrafficMix:
        return TrafficMix(
            entries=tuple((spec.content, spec.load_share) for spec in self.classes)
        )

    @property
    def class_ids(self) -> tuple:
        return tuple(spec.class_id for spec in self.classes)


def _reject_unknown(section: dict, allowed: set, where: str):
    for key in section:
        if key not in allowed:
            raise ScenarioError(f"unknown key {key!r} in section {where!r}")


def _number(section: dict, key: str, where: str, default=None):
    if key not in section:
        if default is None:
            raise ScenarioError(f"missing required key {key!r} in section {where!r}")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"key {key!r} in section {where!r} must be a number")
    return value


def _build_layout(section: dict) -> NetworkLayout:
    _reject_unknown(
        section,
        {"cell_inner_radius_m", "cell_circumradius_m", "ue_density_per_m2", "ring_count"},
        "network",
    )
    if "cell_inner_radius_m" in section and "cell_circumradius_m" in section:
        raise ScenarioError(
            "give either cell_inner_radius_m or cell_circumradius_m, not both"
        )
    density = _number(section, "ue_density_per_m2", "network", 1.1e-3)
    ring = int(_number(section, "ring_count", "network", 1))
    try:
        if "cell_circumradius_m" in section:
            return NetworkLayout(
                cell_circumradius_m=_number(section, "cell_circumradius_m", "network"),
                ue_density=density,
                ring_count=ring,
            )
        inner = _number(section, "cell_inner_radius_m", "network", 300.0)
        return NetworkLayout.from_inner_radius(inner, ue_density=density, ring_count=ring)
    except ValueError as exc:
        raise ScenarioError(f"section 'network': {exc}") from exc


def _build_radio(section: dict) -> RadioConfig:
    allowed = {
        "bandwidth_hz",
        "slot_duration_s",
        "packet_bits",
        "noise_psd_dbm_hz",
        "noise_figure_db",
    }
    _reject_unknown(section, allowed, "radio")
    try:
        return RadioConfig(
            bandwidth_hz=_number(section, "bandwidth_hz", "radio", 1e6),
            slot_duration_s=_number(section, "slot_duration_s", "radio", 1.0),
            packet_bits=_number(section, "packet_bits", "radio", 1e6),
            noise_psd_dbm_hz=_number(section, "noise_psd_dbm_hz", "radio", -174.0),
            noise_figure_db=_number(section, "noise_figure_db", "radio", 11.0),
        )
    except ValueError as exc:
        raise ScenarioError(f"section 'radio': {exc}") from exc


def _build_link(section: dict, where: str, default: LinkLoss) -> LinkLoss:
    allowed = {"intercept_db", "slope_db_per_decade", "carrier_ghz", "reference_distance_m"}
    _reject_unknown(section, allowed, where)
    try:
        return LinkLoss(
            intercept_db=_number(section, "intercept_db", where, default.intercept_db),
            slope_db_per_decade=_number(
                section, "slope_db_per_decade", where, default.slope_db_per_decade
            ),
            carrier_ghz=_number(section, "carrier_ghz", where, default.carrier_ghz),
            reference_distance_m=_number(
                section, "reference_distance_m", where, default.reference_distance_m
            ),
        )
    except ValueError as exc:
        raise ScenarioError(f"section {where!r}: {exc}") from exc


def _build_channel(section: dict) -> PathLossModel:
    _reject_unknown(section, {"d2d", "i2d"}, "channel")
    defaults = PathLossModel()
    return PathLossModel(
        d2d=_build_link(section.get("d2d", {}), "channel.d2d", defaults.d2d),
        i2d=_build_link(section.get("i2d", {}), "channel.i2d", defaults.i2d),
    )


def _build_classes(entries) -> tuple:
    if not isinstance(entries, list) or not entries:
        raise ScenarioError("section 'classes' must be a nonempty list")
    allowed = {"id", "phi", "beta_s", "kappa", "timeout_s", "truncation_s", "load_share"}
    specs = []
    shares = []
    for pos, entry in enumerate(entries):
        where = f"classes[{pos}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{where} must be an object")
        _reject_unknown(entry, allowed, where)
        class_id = entry.get("id", f"c{pos:02d}")
        if not isinstance(class_id, str):
            raise ScenarioError(f"{where}: 'id' must be a string")
        try:
            content = ContentClass(
                popularity=_number(entry, "phi", where),
                scale_s=_number(entry, "beta_s", where),
                shape=_number(entry, "kappa", where),
                timeout_s=_number(entry, "timeout_s", where, 0.0),
                truncation_s=_number(entry, "truncation_s", where, 20000.0),
            )
        except ValueError as exc:
            raise ScenarioError(f"{where}: {exc}") from exc
        if "load_share" in entry:
            share = _number(entry, "load_share", where)
            if share < 0:
                raise ScenarioError(f"{where}: load_share must be nonnegative")
            shares.append(share)
        else:
            shares.append(None)
        specs.append((class_id, content))

    ids = [class_id for class_id, _ in specs]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise ScenarioError(f"duplicate class id(s): {sorted(dupes)}")

    given = [s for s in shares if s is not None]
    if not given:
        shares = [1.0 / len(specs)] * len(specs)
    elif len(given) != len(specs):
        raise ScenarioError("load_share must be given for all classes or for none")
    else:
        total = sum(shares)
        if abs(total - 1.0) > 1e-9:
            raise ScenarioError(f"load shares must sum to 1 (got {total})")
    return tuple(
        ClassSpec(class_id=cid, content=content, load_share=float(share))
        for (cid, content), share in zip(specs, shares)
    )


def _build_quadrature(section: dict) -> QuadratureSettings:
    allowed = {"time_nodes", "range_nodes", "relative_tolerance"}
    _reject_unknown(section, allowed, "quadrature")
    try:
        return QuadratureSettings(
            time_nodes=int(_number(section, "time_nodes", "quadrature", 64)),
            range_nodes=int(_number(section, "range_nodes", "quadrature", 64)),
            relative_tolerance=_number(section, "relative_tolerance", "quadrature", 1e-6),
        )
    except ValueError as exc:
        raise ScenarioError(f"section 'quadrature': {exc}") from exc


def _build_optimizer(section: dict) -> OptimizerSettings:
    allowed = {"r_grid_max_m", "grid_step_m", "golden_tol_m", "sim_grid_step_m"}
    _reject_unknown(section, allowed, "optimizer")
    try:
        return OptimizerSettings(
            r_grid_max_m=_number(section, "r_grid_max_m", "optimizer", 300.0),
            grid_step_m=_number(section, "grid_step_m", "optimizer", 2.0),
            golden_tol_m=_number(section, "golden_tol_m", "optimizer", 0.1),
            sim_grid_step_m=_number(section, "sim_grid_step_m", "optimizer", 10.0),
        )
    except ValueError as exc:
        raise ScenarioError(f"section 'optimizer': {exc}") from exc


def scenario_from_dict(doc: dict) -> Scenario:
    """Validate a parsed scenario document and apply defaults."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    allowed = {
        "network",
        "radio",
        "channel",
        "classes",
        "quadrature",
        "optimizer",
        "simulation",
        "output_dir",
    }
    _reject_unknown(doc, allowed, "<root>")
    if "classes" not in doc:
        raise ScenarioError("missing required section 'classes'")

    sim_section = doc.get("simulation", {})
    _reject_unknown(sim_section, {"n_realizations", "base_seed"}, "simulation")
    n_real = int(_number(sim_section, "n_realizations", "simulation", 100))
    if n_real < 1:
        raise ScenarioError("n_realizations must be at least 1")
    base_seed = int(_number(sim_section, "base_seed", "simulation", 12345))

    output_dir = doc.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ScenarioError("output_dir must be a string")

    return Scenario(
        layout=_build_layout(doc.get("network", {})),
        radio=_build_radio(doc.get("radio", {})),
        channel=_build_channel(doc.get("channel", {})),
        classes=_build_classes(doc["classes"]),
        quad=_build_quadrature(doc.get("quadrature", {})),
        optimizer=_build_optimizer(doc.get("optimizer", {})),
        n_realizations=n_real,
        base_seed=base_seed,
        output_dir=output_dir,
    )


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    try:
        return scenario_from_dict(doc)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def with_overrides(
    scenario: Scenario,
    seed: Optional[int] = None,
    realizations: Optional[int] = None,
    output_dir: Optional[str] = None,
) -> Scenario:
    """Apply command-line overrides onto a parsed scenario."""
    kwargs = {}
    if seed is not None:
        kwargs["base_seed"] = seed
    if realizations is not None:
        if realizations < 1:
            raise ScenarioError("realizations override must be at least 1")
        kwargs["n_realizations"] = realizations
    if output_dir is not None:
        kwargs["output_dir"] = output_dir
    return replace(scenario, **kwargs) if kwargs else scenario
