import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from data.sample_data import generate_spin_config
from utils.detection import (
    ComponentDetection,
    ConstantDetection,
    IdealDetection,
    PerEigenvalueDetection,
)
from utils.errors import ConfigError, EsrError, UnresolvedReferenceError
from utils.observables import GeneralizedObservable, OutcomeSet, Property, spin_matrix
from utils.states import (
    ImproperMixture,
    ProperMixture,
    PureState,
    make_improper,
    make_improper_from_composite,
    make_proper_mixture,
    make_pure,
)

logger = logging.getLogger(__name__)

SWEEP_PARAMETERS = ("theta", "phi")
OUTPUT_FORMATS = ("csv", "json", "excel")


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    end: float
    steps: int

    def values(self):
        return np.linspace(self.start, self.end, self.steps).tolist()


@dataclass(frozen=True)
class MonteCarloSpec:
    n: int = 100000
    seed: int = 42
    z: float = 3.0
    shards: int = 1


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: Optional[str] = None


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Resolved experiment: every name in the document points to a built object"""

    observable_specs: dict
    observables: dict
    states: dict
    state_kinds: dict
    component_names: dict
    detection_default: object
    detection_entries: tuple
    property_spec: dict
    target_state: str
    sweep: Optional[SweepSpec] = None
    monte_carlo: MonteCarloSpec = field(default_factory=MonteCarloSpec)
    output: OutputSpec = field(default_factory=OutputSpec)


def _require(doc, key, path):
    if not isinstance(doc, dict) or key not in doc:
        raise ConfigError("missing required field", f"{path}.{key}" if path else key)
    return doc[key]


def _parse_number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise ConfigError("must be finite", path)
    return float(value)


def _parse_complex(value, path):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError("complex entries are written [re, im]", path)
        return complex(_parse_number(value[0], path), _parse_number(value[1], path))
    return complex(_parse_number(value, path))


def _parse_vector(values, path):
    if not isinstance(values, list) or not values:
        raise ConfigError("expected a non-empty list of amplitudes", path)
    return np.array([_parse_complex(v, f"{path}[{k}]") for k, v in enumerate(values)])


def _parse_matrix(rows, path):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError("expected a list of rows", path)
    if any(len(r) != len(rows) for r in rows):
        raise ConfigError("matrix must be square", path)
    return np.array([
        [_parse_complex(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)]
        for i, row in enumerate(rows)
    ])


def _parse_probability(value, path):
    value = _parse_number(value, path)
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"probability {value} is outside [0, 1]", path)
    return value


def _parse_int(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not float(value).is_integer():
        raise ConfigError(f"expected an integer, got {value!r}", path)
    value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be at least {minimum}", path)
    return value


def _parse_name(value, path):
    if not isinstance(value, str):
        raise ConfigError(f"expected a name, got {value!r}", path)
    return value


def _section(document, key):
    """Optional object-valued section; absent or null reads as empty"""
    value = document.get(key)
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError("expected an object", key)
    return value



class ExperimentManager:
    """Class for loading and resolving experiment configurations"""

    @staticmethod
    def load_config(path):
        """
        Load an experiment config from a JSON file

        Parameters:
        - path: Path to the JSON document, or None for the built-in spin experiment

        Returns:
        - ExperimentConfig
        """
        if path is None:
            logger.debug("no config given; using the built-in spin experiment")
            return ExperimentManager.parse_config(generate_spin_config())
        try:
            with open(path, encoding="utf-8") as handle:
                document = json.load(handle)
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e.strerror or e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
        return ExperimentManager.parse_config(document)

    @staticmethod
    def parse_config(document):
        """
        Validate a config document and build every object it names

        Parameters:
        - document: Parsed JSON (dict)

        Returns:
        - ExperimentConfig
        """
        if not isinstance(document, dict):
            raise ConfigError("top level must be a JSON object")

        observable_specs = _require(document, "observables", "")
        if not isinstance(observable_specs, dict) or not observable_specs:
            raise ConfigError("expected a non-empty object", "observables")
        observables = {
            name: ExperimentManager.build_observable(name, spec)
            for name, spec in observable_specs.items()
        }

        state_specs = _require(document, "states", "")
        if not isinstance(state_specs, dict) or not state_specs:
            raise ConfigError("expected a non-empty object", "states")
        states, kinds, component_names = ExperimentManager.build_states(state_specs)

        target = _parse_name(_require(document, "target_state", ""), "target_state")
        if target not in states:
            raise UnresolvedReferenceError(f"unknown state {target!r}", "target_state")

        property_spec = _require(document, "property", "")
        ExperimentManager._check_property_spec(property_spec, observables)

        detection = _section(document, "detection")
        default, entries = ExperimentManager._parse_detection(detection, observables, states, kinds)

        sweep = None
        if document.get("sweep") is not None:
            sweep = ExperimentManager.parse_sweep(document["sweep"], "sweep")

        mc_doc = _section(document, "monte_carlo")
        monte_carlo = MonteCarloSpec(
            n=_parse_int(mc_doc.get("n", 100000), "monte_carlo.n", minimum=1),
            seed=_parse_int(mc_doc.get("seed", 42), "monte_carlo.seed", minimum=0),
            z=_parse_number(mc_doc.get("z", 3.0), "monte_carlo.z"),
            shards=_parse_int(mc_doc.get("shards", 1), "monte_carlo.shards", minimum=1),
        )

        out_doc = _section(document, "output")
        output_format = out_doc.get("format", "csv")
        if output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"format must be one of {', '.join(OUTPUT_FORMATS)}", "output.format")
        output_path = out_doc.get("path")
        if output_path is not None and not isinstance(output_path, str):
            raise ConfigError("expected a file path", "output.path")
        output = OutputSpec(output_format, output_path)

        config = ExperimentConfig(
            observable_specs=dict(observable_specs),
            observables=observables,
            states=states,
            state_kinds=kinds,
            component_names=component_names,
            detection_default=default,
            detection_entries=tuple(entries),
            property_spec=dict(property_spec),
            target_state=target,
            sweep=sweep,
            monte_carlo=monte_carlo,
            output=output,
        )
        if sweep is not None:
            ExperimentManager._check_sweepable(config, sweep)
        logger.debug("config resolved: %d observables, %d states", len(observables), len(states))
        return config

    @staticmethod
    def build_observable(name, spec, overrides=None):
        """Build an observable from its spec; overrides replace spin angles"""
        path = f"observables.{name}"
        if not isinstance(spec, dict):
            raise ConfigError("expected an object", path)
        try:
            if "spin" in spec:
                if not isinstance(spec["spin"], dict):
                    raise ConfigError("expected an object with theta and phi", f"{path}.spin")
                angles = dict(spec["spin"])
                angles.update(overrides or {})
                theta = _parse_number(angles.get("theta", 0.0), f"{path}.spin.theta")
                phi = _parse_number(angles.get("phi", 0.0), f"{path}.spin.phi")
                return GeneralizedObservable.from_operator(name, spin_matrix(theta, phi))
            if "matrix" in spec:
                return GeneralizedObservable.from_operator(name, _parse_matrix(spec["matrix"], f"{path}.matrix"))
        except ConfigError:
            raise
        except EsrError as e:
            raise ConfigError(str(e), path) from e
        raise ConfigError("needs either 'matrix' or 'spin'", path)

    @staticmethod
    def build_states(state_specs):
        states = {}
        kinds = {}
        component_names = {}

        # pure and composite states first so mixtures can refer to them
        ordered = sorted(
            state_specs.items(),
            key=lambda item: isinstance(item[1], dict) and item[1].get("kind") == "proper",
        )
        for name, spec in ordered:
            path = f"states.{name}"
            if not isinstance(spec, dict):
                raise ConfigError("expected an object", path)
            kind = _require(spec, "kind", path)
            try:
                if kind == "pure":
                    states[name] = make_pure(_parse_vector(_require(spec, "vector", path), f"{path}.vector"), name)
                elif kind == "composite":
                    dims = _require(spec, "dims", path)
                    if not isinstance(dims, list) or len(dims) != 2:
                        raise ConfigError("expected [dim_first, dim_second]", f"{path}.dims")
                    dim_first = _parse_int(dims[0], f"{path}.dims[0]", minimum=1)
                    dim_second = _parse_int(dims[1], f"{path}.dims[1]", minimum=1)
                    vector = _parse_vector(_require(spec, "vector", path), f"{path}.vector")
                    states[name] = make_improper_from_composite(vector, dim_first, dim_second, name)
                elif kind == "improper":
                    states[name] = make_improper(_parse_matrix(_require(spec, "matrix", path), f"{path}.matrix"), name)
                elif kind == "proper":
                    components = _require(spec, "components", path)
                    if not isinstance(components, list) or not components:
                        raise ConfigError("expected a non-empty list", f"{path}.components")
                    built = []
                    names = []
                    for k, item in enumerate(components):
                        item_path = f"{path}.components[{k}]"
                        ref = _parse_name(_require(item, "state", item_path), f"{item_path}.state")
                        if ref not in states:
                            raise UnresolvedReferenceError(f"unknown state {ref!r}", f"{item_path}.state")
                        built.append((states[ref], _parse_number(_require(item, "weight", item_path), f"{item_path}.weight")))
                        names.append(ref)
                    states[name] = make_proper_mixture(built)
                    component_names[name] = tuple(names)
                else:
                    raise ConfigError(f"unknown kind {kind!r}", f"{path}.kind")
            except ConfigError:
                raise
            except EsrError as e:
                raise ConfigError(str(e), path) from e
            kinds[name] = kind
        return states, kinds, component_names

    @staticmethod
    def _check_property_spec(spec, observables):
        ref = _parse_name(_require(spec, "observable", "property"), "property.observable")
        if ref not in observables:
            raise UnresolvedReferenceError(f"unknown observable {ref!r}", "property.observable")
        outcomes = spec.get("outcomes", [])
        if not isinstance(outcomes, list):
            raise ConfigError("expected a list of eigenvalues", "property.outcomes")
        if not isinstance(spec.get("includes_a0", False), bool):
            raise ConfigError("expected true or false", "property.includes_a0")
        obs = observables[ref]
        for k, value in enumerate(outcomes):
            try:
                obs.index_of(_parse_number(value, f"property.outcomes[{k}]"))
            except EsrError as e:
                raise ConfigError(str(e), f"property.outcomes[{k}]") from e

    @staticmethod
    def _parse_detection(doc, observables, states, kinds):
        if not isinstance(doc, dict):
            raise ConfigError("expected an object", "detection")
        raw_default = doc.get("default", "ideal")
        if raw_default == "ideal":
            default = IdealDetection()
        elif raw_default is None:
            default = None
        else:
            default = ConstantDetection(_parse_probability(raw_default, "detection.default"))

        raw_entries = doc.get("entries")
        if raw_entries is None:
            raw_entries = []
        if not isinstance(raw_entries, list):
            raise ConfigError("expected a list", "detection.entries")

        entries = []
        for k, entry in enumerate(raw_entries):
            path = f"detection.entries[{k}]"
            state = _parse_name(_require(entry, "state", path), f"{path}.state")
            if state not in states:
                raise UnresolvedReferenceError(f"unknown state {state!r}", f"{path}.state")
            obs_name = _parse_name(_require(entry, "observable", path), f"{path}.observable")
            if obs_name not in observables:
                raise UnresolvedReferenceError(f"unknown observable {obs_name!r}", f"{path}.observable")
            eigenvalue = _parse_number(_require(entry, "eigenvalue", path), f"{path}.eigenvalue")
            try:
                eigenvalue = observables[obs_name].canonical_eigenvalue(eigenvalue)
            except EsrError as e:
                raise ConfigError(str(e), f"{path}.eigenvalue") from e
            component = entry.get("component")
            if component is not None:
                if kinds[state] != "proper":
                    raise ConfigError("only proper mixtures have components", f"{path}.component")
                component = _parse_int(component, f"{path}.component")
                if not 0 <= component < len(states[state].components):
                    raise UnresolvedReferenceError(f"component {component} does not exist", f"{path}.component")
            probability = _parse_probability(_require(entry, "probability", path), f"{path}.probability")
            entries.append((state, component, obs_name, eigenvalue, probability))
        return default, entries

    @staticmethod
    def parse_sweep(doc, path="sweep"):
        parameter = _require(doc, "parameter", path)
        if parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"parameter must be one of {', '.join(SWEEP_PARAMETERS)}", f"{path}.parameter")
        start = _parse_number(_require(doc, "start", path), f"{path}.start")
        end = _parse_number(_require(doc, "end", path), f"{path}.end")
        steps = _require(doc, "steps", path)
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            raise ConfigError("must be a positive integer", f"{path}.steps")
        return SweepSpec(parameter, start, end, steps)

    @staticmethod
    def _check_sweepable(config, sweep):
        name = config.property_spec["observable"]
        if "spin" not in config.observable_specs[name]:
            raise ConfigError(f"sweeping {sweep.parameter} needs a spin observable", "property.observable")

    @staticmethod
    def with_sweep(config, sweep):
        if sweep is not None:
            ExperimentManager._check_sweepable(config, sweep)
        return replace(config, sweep=sweep)

    @staticmethod
    def observable_at(config, parameter=None, value=None):
        """Property observable, rebuilt with one spin angle overridden"""
        name = config.property_spec["observable"]
        if parameter is None:
            return config.observables[name]
        return ExperimentManager.build_observable(name, config.observable_specs[name], {parameter: value})

    @staticmethod
    def build_property(config, obs=None):
        obs = obs or config.observables[config.property_spec["observable"]]
        outcomes = OutcomeSet(
            frozenset(float(v) for v in config.property_spec.get("outcomes", [])),
            bool(config.property_spec.get("includes_a0", False)),
        )
        return Property(obs, outcomes)

    @staticmethod
    def detection_model_for(config, state_name=None):
        """
        Detection model of a configured state

        Parameters:
        - config: ExperimentConfig
        - state_name: State to build the model for (default: the target state)

        Returns:
        - PerEigenvalueDetection for pure and improper states, ComponentDetection
          for proper mixtures (entries keyed by component index, or by the
          component's own state name), or the default model when no entry applies
        """
        state_name = state_name or config.target_state
        state = config.states[state_name]

        def table_for(predicate):
            table = {(obs, value): p for s, c, obs, value, p in config.detection_entries if predicate(s, c)}
            if not table:
                return config.detection_default
            default = config.detection_default
            fallback = None
            if isinstance(default, IdealDetection):
                fallback = 1.0
            elif isinstance(default, ConstantDetection):
                fallback = default.value
            return PerEigenvalueDetection(table, fallback)

        if isinstance(state, ProperMixture):
            names = config.component_names.get(state_name, ())
            models = {}
            for position, component in enumerate(state.components):
                own_name = names[position] if position < len(names) else None
                model = table_for(
                    lambda s, c, position=position, own_name=own_name:
                        (s == state_name and c == position) or (s == own_name and c is None)
                )
                if model is not None:
                    models[component.device_id] = model
            return ComponentDetection(models, config.detection_default)

        if isinstance(state, (PureState, ImproperMixture)):
            model = table_for(lambda s, c: s == state_name and c is None)
            if model is None:
                raise ConfigError(f"no detection entries for state {state_name!r} and no default", "detection")
            return model
        raise ConfigError(f"unsupported state {state_name!r}", "states")
