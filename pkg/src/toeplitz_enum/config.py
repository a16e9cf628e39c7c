"""Strict TOML run configuration and the bundled sweep presets.

A document has flat tables ``[array]``, ``[scenario]``, ``[solver]``,
``[sweep]``, ``[trace]`` and ``[output]``, plus an optional ``[[series]]``
array whose entries override any of the first three tables for one sweep.
Unknown keys are rejected with the line they appear on.
"""
import re
from dataclasses import asdict, dataclass, field
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .array_model import ArrayConfig, Scenario, symmetric_angles, uniform_correlation
from .baselines import BaselineKind
from .errors import ConfigError, EnumerationError
from .experiments import BaselineMethod, SweepAxis, SweepSpec, TargetMethod
from .solver import SolverParams

PRESETS = ('fig1a', 'fig1b', 'fig1c', 'fig1d')

_KEYS = {
    None: {'verbosity', 'array', 'scenario', 'solver', 'sweep', 'trace', 'output', 'series'},
    'array': {'num_elements', 'spacing', 'wavelength'},
    'scenario': {'angles_deg', 'num_sources', 'delta_theta_deg', 'rho', 'correlation', 'snr_db',
                 'num_snapshots', 'noise_variances', 'seed'},
    'solver': {'eta', 'mu', 'eps', 'max_iters', 'k_max', 'rank_rel_tol'},
    'sweep': {'axis', 'values', 'trials', 'methods', 'seed', 'keep_trials'},
    'trace': {'num_frames', 'frame_size', 'etas'},
    'output': {'dir', 'format'},
    'series': {'label', 'array', 'scenario', 'solver'},
}
_VERBOSITY = ('debug', 'info', 'warning', 'error')


def _line_of(text, key, section=None):
    """1-based line where ``key`` is assigned (inside ``[section]`` if given), or None."""
    if text is None:
        return None
    current = None
    for n, line in enumerate(text.splitlines(), start=1):
        head = re.match(r'\s*\[\[?\s*([A-Za-z0-9_.-]+)\s*\]\]?', line)
        if head:
            current = head.group(1)
            continue
        if re.match(rf'\s*{re.escape(key)}\s*=', line) and (section is None or current == section):
            return n
    return None


def _error(msg, text=None, key=None, section=None):
    line = _line_of(text, key, section) if key else None
    where = f'line {line}: ' if line else ''
    return ConfigError(f'{where}{msg}')


@dataclass
class RunConfig:
    """Everything one CLI invocation needs, with defaults filled in."""

    array: ArrayConfig = field(default_factory=ArrayConfig)
    scenario: Scenario = field(default_factory=Scenario)
    solver: SolverParams = None
    sweep: dict = field(default_factory=dict)
    trace: dict = field(default_factory=dict)
    output_dir: str = 'out'
    output_format: str = 'binary'
    verbosity: str = 'info'
    series: list = field(default_factory=list)
    name: str = ''

    def require_solver(self):
        if self.solver is None:
            raise ConfigError('solver.eta is required for this command (pass --eta or set [solver] eta)')
        return self.solver

    def resolved(self):
        """Plain-data view with every default expanded, suitable for logging."""
        sc = self.scenario
        corr = sc.correlation
        out = {
            'array': asdict(self.array),
            'scenario': {
                'angles_deg': list(sc.angles_deg),
                'correlation': [[_num(z) for z in row] for row in corr],
                'snr_db': sc.snr_db,
                'num_snapshots': sc.num_snapshots,
                'noise_variances': list(sc.noise_profile(self.array.size)),
                'seed': sc.seed,
            },
            'solver': None if self.solver is None else {
                **asdict(self.solver), 'k_max': self.solver.resolved_k_max(self.array.size)},
            'sweep': dict(self.sweep),
            'trace': dict(self.trace),
            'output': {'dir': self.output_dir, 'format': self.output_format},
            'verbosity': self.verbosity,
        }
        if self.series:
            out['series'] = [dict(s) for s in self.series]
        return out

    def sweep_specs(self, trials=None):
        """One :class:`SweepSpec` per series (a single one when no series is declared)."""
        sw = dict(self.sweep)
        if 'axis' not in sw or 'values' not in sw:
            raise ConfigError('[sweep] needs axis and values')
        if trials is not None:
            sw['trials'] = trials
        entries = self.series or [{'label': ''}]
        specs = []
        for entry in entries:
            array, scenario, solver = self.array, self.scenario, self.solver
            if 'array' in entry:
                array = _build_array({**asdict(array), **entry['array']})
            if 'scenario' in entry:
                scenario = _build_scenario(entry['scenario'], base=scenario, num_elements=array.size)
            if 'solver' in entry:
                base = {} if solver is None else asdict(solver)
                solver = _build_solver({**base, **entry['solver']})
            methods = _build_methods(sw.get('methods', ['target']), solver)
            specs.append(SweepSpec(array=array, base_scenario=scenario, axis=sw['axis'],
                                   values=tuple(sw['values']), methods=methods,
                                   trials=int(sw.get('trials', 200)), seed=int(sw.get('seed', 0)),
                                   keep_trials=bool(sw.get('keep_trials', False)),
                                   label=entry.get('label', '')))
        return specs


def _num(z):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _check_keys(doc, text):
    for key in doc:
        if key not in _KEYS[None]:
            raise _error(f'unknown top-level key {key!r}', text, key)
    for section in ('array', 'scenario', 'solver', 'sweep', 'trace', 'output'):
        table = doc.get(section, {})
        if not isinstance(table, dict):
            raise _error(f'[{section}] must be a table', text, section)
        for key in table:
            if key not in _KEYS[section]:
                raise _error(f'unknown key {key!r} in [{section}]', text, key, section)
    series = doc.get('series', [])
    if not isinstance(series, list):
        raise _error('series must be an array of tables ([[series]])', text, 'series')
    for entry in series:
        for key, val in entry.items():
            if key not in _KEYS['series']:
                raise _error(f'unknown key {key!r} in [[series]]', text, key, 'series')
            if key != 'label':
                for sub in val:
                    if sub not in _KEYS[key]:
                        raise _error(f'unknown key {sub!r} in series.{key}', text, sub, 'series')


def _complex_matrix(rows):
    out = []
    for row in rows:
        out.append([complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in row])
    return out


def _build_array(tbl):
    return ArrayConfig(**{k: tbl[k] for k in ('num_elements', 'spacing', 'wavelength') if k in tbl})


def _build_scenario(tbl, base=None, num_elements=None):
    base = base or Scenario()
    kw = {}
    if 'angles_deg' in tbl and 'delta_theta_deg' in tbl:
        raise ConfigError('give either scenario.angles_deg or scenario.delta_theta_deg, not both')
    if 'delta_theta_deg' in tbl:
        k = int(tbl.get('num_sources', base.num_sources or 2))
        kw['angles_deg'] = symmetric_angles(k, float(tbl['delta_theta_deg']))
    elif 'angles_deg' in tbl:
        kw['angles_deg'] = tuple(tbl['angles_deg'])
        if 'num_sources' in tbl and int(tbl['num_sources']) != len(kw['angles_deg']):
            raise ConfigError('scenario.num_sources disagrees with angles_deg')
    k = len(kw.get('angles_deg', base.angles_deg))
    if 'rho' in tbl and 'correlation' in tbl:
        raise ConfigError('give either scenario.rho or scenario.correlation, not both')
    if 'rho' in tbl:
        kw['correlation'] = uniform_correlation(k, float(tbl['rho']))
    elif 'correlation' in tbl:
        kw['correlation'] = _complex_matrix(tbl['correlation'])
    elif 'angles_deg' in kw and base.correlation.shape != (k, k):
        kw['correlation'] = None
    for key in ('snr_db', 'num_snapshots', 'seed'):
        if key in tbl:
            kw[key] = tbl[key]
    if 'noise_variances' in tbl:
        nv = tbl['noise_variances']
        kw['noise_variances'] = tuple(nv) if isinstance(nv, list) else (float(nv),) * int(num_elements or 1)
    return base.replace(**kw)


def _build_solver(tbl):
    if 'eta' not in tbl:
        return None
    return SolverParams(**tbl)


def _build_methods(names, solver):
    methods = []
    for name in names:
        key = str(name).lower()
        if key == 'target':
            if solver is None:
                raise ConfigError('solver.eta is required for the target method')
            methods.append(TargetMethod(solver))
        else:
            try:
                methods.append(BaselineMethod(BaselineKind(key)))
            except ValueError:
                raise ConfigError(f'unknown method {name!r}; expected target, mdl, aic or eigengap') from None
    return tuple(methods)


def from_dict(doc, text=None, name=''):
    """Builds a :class:`RunConfig` from a parsed document, validating strictly."""
    _check_keys(doc, text)
    try:
        array = _build_array(doc.get('array', {}))
        scenario = _build_scenario(doc.get('scenario', {}), num_elements=array.size)
        solver = _build_solver(doc.get('solver', {}))
        if solver is not None:
            solver.resolved_k_max(array.size)
    except EnumerationError as exc:
        raise ConfigError(str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f'invalid value: {exc}') from None
    sweep = dict(doc.get('sweep', {}))
    if 'axis' in sweep:
        try:
            sweep['axis'] = SweepAxis(str(sweep['axis']).lower()).value
        except ValueError:
            raise _error(f"unknown sweep axis {sweep['axis']!r}; expected one of "
                         f'{[a.value for a in SweepAxis]}', text, 'axis', 'sweep') from None
    trace = dict(doc.get('trace', {}))
    if 'num_frames' in trace and (not isinstance(trace['num_frames'], int) or trace['num_frames'] < 1):
        raise _error('trace.num_frames must be a positive integer', text, 'num_frames', 'trace')
    output = doc.get('output', {})
    fmt = output.get('format', 'binary')
    if fmt not in ('binary', 'text'):
        raise _error("output.format must be 'binary' or 'text'", text, 'format', 'output')
    verbosity = doc.get('verbosity', 'info')
    if verbosity not in _VERBOSITY:
        raise _error(f'verbosity must be one of {_VERBOSITY}', text, 'verbosity')
    return RunConfig(array=array, scenario=scenario, solver=solver, sweep=sweep, trace=trace,
                     output_dir=output.get('dir', 'out'), output_format=fmt, verbosity=verbosity,
                     series=list(doc.get('series', [])), name=name)


def loads(text, name=''):
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f'{name or "config"}: {exc}') from None
    return from_dict(doc, text, name)


def load(path):
    with open(path, encoding='utf-8') as f:
        return loads(f.read(), name=str(path))


def preset_text(name):
    if name not in PRESETS:
        raise ConfigError(f'unknown preset {name!r}; expected one of {PRESETS}')
    return resources.files(__package__).joinpath('presets').joinpath(f'{name}.toml').read_text(encoding='utf-8')


def load_preset(name):
    return loads(preset_text(name), name=name)
