"""Config-driven Monte Carlo experiment runner.

A trial draws one data set, forms every requested estimator from that same
draw, and scores each against the true covariance. Records serialize to a
fixed CSV schema with shortest-round-trip floats, so reruns byte-reproduce
their output.

Seeding contract: trial i of an experiment with base seed s uses the stream
SeedSequence([s, i]), split into (sigma stream, data stream). The CSV seed
column records the trial stream's first 32-bit word. Trials are independent
work units; execution order cannot affect any value.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .asymptotics import ARITHMETIC, HARMONIC, op_error_limit, spike_prediction
from .errors import ConfigError, SingularMatrixError, ValidationError
from .estimators import (
    arithmetic_mean,
    fisher_sun_intensity,
    harmonic_mean,
    linear_shrinkage,
    rao_blackwell_harmonic,
    rb_regularized_harmonic,
)
from .linalg import as_array, operator_norm, spd_sqrt
from .metrics import frobenius_sq_per_p, operator_norm_error
from .sampling import (
    COMPLEX,
    REAL,
    CovarianceSpec,
    HaarDiagonal,
    Identity,
    Partition,
    Spiked,
    build_covariance,
    sample_data,
    split_wisharts,
    wishart,
)

CSV_COLUMNS = (
    "experiment_id",
    "trial",
    "seed",
    "p",
    "n",
    "n_splits",
    "gamma",
    "field",
    "model",
    "model_param",
    "estimator",
    "op_error",
    "op_rel_error",
    "frob_sq_per_p",
    "lambda1",
    "overlap_sq",
    "pred_op_error",
    "pred_lambda1",
    "pred_overlap_sq",
)

ESTIMATOR_KINDS = (
    "arithmetic",
    "harmonic",
    "rao_blackwell",
    "rb_regularized",
    "fisher_sun",
    "linear_shrinkage",
)

# Estimators whose math requires invertible blocks / a real two-split.
_NEEDS_BLOCKS = ("harmonic",)
_REAL_TWO_SPLIT = ("rao_blackwell", "rb_regularized")


@dataclass(frozen=True)
class EstimatorSpec:
    """One requested estimator; ``kind`` doubles as the CSV tag."""

    kind: str
    lam: float = None  # linear_shrinkage intensity
    c: float = 1.0  # rb_regularized scale
    d: float = 0.0  # rb_regularized shift

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValidationError(
                f"unknown estimator {self.kind!r}; choose from {ESTIMATOR_KINDS}"
            )
        if self.kind == "linear_shrinkage":
            if self.lam is None or not 0.0 <= float(self.lam) <= 1.0:
                raise ValidationError(
                    f"linear_shrinkage needs an intensity in [0, 1], got {self.lam!r}"
                )
        if self.kind == "rb_regularized":
            if not float(self.c) > 0 or not float(self.d) >= 0:
                raise ValidationError(
                    f"rb_regularized needs c > 0 and d >= 0, got c={self.c}, d={self.d}"
                )

    @classmethod
    def parse(cls, token: str) -> "EstimatorSpec":
        """Parse a config token: a bare kind, ``linear_shrinkage:<lam>`` or
        ``rb_regularized:<c>,<d>``."""
        token = token.strip()
        kind, _, args = token.partition(":")
        kind = kind.strip()
        args = args.strip()
        if kind == "linear_shrinkage":
            if not args:
                raise ValidationError("linear_shrinkage needs an intensity, e.g. linear_shrinkage:0.3")
            try:
                return cls(kind, lam=float(args))
            except ValueError:
                raise ValidationError(f"bad linear_shrinkage intensity {args!r}") from None
        if kind == "rb_regularized":
            if args:
                parts = [s.strip() for s in args.split(",")]
                if len(parts) != 2:
                    raise ValidationError(
                        f"rb_regularized takes c,d (e.g. rb_regularized:0.9,0.1), got {args!r}"
                    )
                try:
                    return cls(kind, c=float(parts[0]), d=float(parts[1]))
                except ValueError:
                    raise ValidationError(f"bad rb_regularized parameters {args!r}") from None
            return cls(kind)
        if args:
            raise ValidationError(f"estimator {kind!r} takes no parameters, got {args!r}")
        return cls(kind)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a reproducible experiment needs.

    ``n_per_split`` is the per-block sample count n; the total is T = n * N.
    """

    experiment_id: str
    p: int
    n_per_split: int
    n_splits: int
    field: str
    model: CovarianceSpec
    estimators: tuple
    trials: int
    base_seed: int
    output_path: object = None

    def __post_init__(self):
        if not self.experiment_id:
            raise ValidationError("experiment_id must be nonempty")
        if self.p < 1:
            raise ValidationError(f"dimension p must be >= 1, got {self.p}")
        if self.n_per_split < 1:
            raise ValidationError(f"samples per split must be >= 1, got {self.n_per_split}")
        if self.n_splits < 1:
            raise ValidationError(f"number of splits must be >= 1, got {self.n_splits}")
        if self.field not in (REAL, COMPLEX):
            raise ValidationError(f"field must be 'real' or 'complex', got {self.field!r}")
        if self.trials < 1:
            raise ValidationError(f"trial count must be >= 1, got {self.trials}")
        if self.base_seed < 0:
            raise ValidationError(f"base_seed must be >= 0, got {self.base_seed}")
        if not self.estimators:
            raise ValidationError("at least one estimator is required")
        if self.model.p != self.p:
            raise ValidationError(
                f"model dimension {self.model.p} does not match p = {self.p}"
            )
        kinds = [e.kind for e in self.estimators]
        needs_blocks = [k for k in kinds if k in _NEEDS_BLOCKS or k in _REAL_TWO_SPLIT]
        if needs_blocks and self.n_per_split < self.p:
            raise ValidationError(
                f"estimators {needs_blocks} need invertible blocks: samples per "
                f"split {self.n_per_split} < dimension {self.p}"
            )
        two_split = [k for k in kinds if k in _REAL_TWO_SPLIT]
        if two_split:
            if self.field != REAL:
                raise ValidationError(
                    f"estimators {two_split} are defined for the real field only"
                )
            if self.n_splits != 2:
                raise ValidationError(
                    f"estimators {two_split} require exactly 2 splits, got {self.n_splits}"
                )
        if "harmonic" in kinds and self.n_splits < 2:
            raise ValidationError("the harmonic mean requires at least 2 splits")

    @property
    def t_total(self) -> int:
        return self.n_per_split * self.n_splits

    @property
    def gamma(self) -> float:
        return self.p / self.t_total


@dataclass(frozen=True)
class TrialRecord:
    """One estimator's metrics for one trial; maps 1:1 onto a CSV row."""

    experiment_id: str
    trial: int
    seed: int
    p: int
    n: int
    n_splits: int
    gamma: float
    field: str
    model: str
    model_param: object
    estimator: str
    op_error: float
    op_rel_error: float
    frob_sq_per_p: float
    lambda1: float
    overlap_sq: object
    pred_op_error: object
    pred_lambda1: object
    pred_overlap_sq: object

    def to_row(self) -> list:
        return [_format_value(getattr(self, col)) for col in CSV_COLUMNS]


def _format_value(x) -> str:
    """Shortest-round-trip formatting; missing values are empty strings."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _model_name(model: CovarianceSpec) -> str:
    if isinstance(model, Identity):
        return "identity"
    if isinstance(model, Spiked):
        return "spiked"
    return "haar_diagonal"


def _model_param(model: CovarianceSpec):
    if isinstance(model, Spiked):
        return float(model.theta)
    if isinstance(model, HaarDiagonal):
        return float(model.b)
    return None


@dataclass(frozen=True)
class _SigmaBundle:
    sigma: np.ndarray
    sigma_sqrt: object  # None means identity, skip the multiply
    op_norm: float
    spike_v: object  # None unless the model is spiked


def _realize_sigma(model: CovarianceSpec, seed) -> _SigmaBundle:
    sigma = build_covariance(model, seed)
    ent = sigma.entries
    if isinstance(model, Identity):
        return _SigmaBundle(ent, None, 1.0, None)
    root = spd_sqrt(ent, what="covariance")
    v = model.unit_vector() if isinstance(model, Spiked) else None
    return _SigmaBundle(ent, root, operator_norm(ent), v)


def _predictions(config: ExperimentConfig, kind: str):
    """(pred_op_error, pred_lambda1, pred_overlap_sq) where theory applies."""
    if kind not in (ARITHMETIC, HARMONIC):
        return None, None, None
    if kind == HARMONIC and config.n_splits < 2:
        return None, None, None
    gamma = config.gamma
    if isinstance(config.model, Identity):
        try:
            return op_error_limit(gamma, kind, config.n_splits), None, None
        except ValidationError:
            return None, None, None
    if isinstance(config.model, Spiked):
        if kind == HARMONIC and config.n_splits != 2:
            return None, None, None
        try:
            pred = spike_prediction(config.model.theta, gamma, kind)
        except ValidationError:
            return None, None, None
        return None, pred.lambda1_limit, pred.overlap_sq_limit
    return None, None, None


def _top_eig(est) -> tuple:
    w, vecs = np.linalg.eigh(as_array(est))
    return float(w[-1]), vecs[:, -1]


def run_trial(config: ExperimentConfig, trial_index: int, *, _bundle=None) -> list:
    """Run one trial; all estimators share the single data draw.

    Deterministic given (config, trial_index); see the module docstring for
    the stream layout.
    """
    if not 0 <= trial_index:
        raise ValidationError(f"trial index must be >= 0, got {trial_index}")
    stream = np.random.SeedSequence([config.base_seed, trial_index])
    seed_word = int(stream.generate_state(1, np.uint32)[0])
    sigma_stream, data_stream = stream.spawn(2)

    bundle = _bundle
    if bundle is None or isinstance(config.model, HaarDiagonal):
        bundle = _realize_sigma(config.model, sigma_stream)

    try:
        data = sample_data(
            bundle.sigma,
            config.t_total,
            config.field,
            data_stream,
            sigma_sqrt=bundle.sigma_sqrt,
        )
        blocks = None
        if config.n_splits >= 2 and config.n_per_split >= config.p:
            partition = Partition.equal(config.t_total, config.n_splits)
            blocks = split_wisharts(data, partition)
            a = arithmetic_mean(blocks)
        else:
            a = wishart(data)
        eye = np.eye(config.p)

        records = []
        for spec in config.estimators:
            if spec.kind == "arithmetic":
                est = a
            elif spec.kind == "harmonic":
                est = harmonic_mean(blocks)
            elif spec.kind == "rao_blackwell":
                est = rao_blackwell_harmonic(a, config.p, config.n_per_split)
            elif spec.kind == "rb_regularized":
                est = rb_regularized_harmonic(
                    a, spec.c, spec.d, eye, config.p, config.n_per_split
                )
            elif spec.kind == "fisher_sun":
                lam = fisher_sun_intensity(a, config.t_total)
                est = linear_shrinkage(a, lam, eye)
            else:  # linear_shrinkage
                est = linear_shrinkage(a, spec.lam, eye)

            op_err = operator_norm_error(est, bundle.sigma)
            frob = frobenius_sq_per_p(est, bundle.sigma)
            if bundle.spike_v is not None:
                lambda1, top = _top_eig(est)
                overlap = float(np.abs(np.vdot(top, bundle.spike_v)) ** 2)
            else:
                lambda1 = float(np.linalg.eigvalsh(as_array(est))[-1])
                overlap = None
            pred_op, pred_lam, pred_ov = _predictions(config, spec.kind)
            records.append(
                TrialRecord(
                    experiment_id=config.experiment_id,
                    trial=trial_index,
                    seed=seed_word,
                    p=config.p,
                    n=config.n_per_split,
                    n_splits=config.n_splits,
                    gamma=config.gamma,
                    field=config.field,
                    model=_model_name(config.model),
                    model_param=_model_param(config.model),
                    estimator=spec.kind,
                    op_error=op_err,
                    op_rel_error=op_err / bundle.op_norm,
                    frob_sq_per_p=frob,
                    lambda1=lambda1,
                    overlap_sq=overlap,
                    pred_op_error=pred_op,
                    pred_lambda1=pred_lam,
                    pred_overlap_sq=pred_ov,
                )
            )
        return records
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            f"trial {trial_index} of {config.experiment_id} "
            f"(seed word {seed_word}): {exc}"
        ) from None


def run_experiment(config: ExperimentConfig) -> list:
    """All trials of one experiment, in trial order."""
    bundle = None
    if not isinstance(config.model, HaarDiagonal):
        bundle = _realize_sigma(config.model, None)
    records = []
    for i in range(config.trials):
        records.extend(run_trial(config, i, _bundle=bundle))
    return records


def write_csv(records, path) -> Path:
    """Write records to ``path`` with the mandatory header, sorted by
    (experiment_id, trial, estimator); ties keep generation order."""
    path = Path(path)
    ordered = sorted(records, key=lambda r: (r.experiment_id, r.trial, r.estimator))
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for rec in ordered:
            writer.writerow(rec.to_row())
    return path


# ---------------------------------------------------------------------------
# Config files: flat "key = value" lines, '#' comments.

_CONFIG_KEYS = (
    "experiment_id",
    "p",
    "n",
    "t",
    "splits",
    "field",
    "model",
    "theta",
    "b",
    "estimators",
    "trials",
    "base_seed",
    "output",
)


def parse_config_text(text: str, source: str = "<config>", default_id: str = None) -> ExperimentConfig:
    """Parse a flat key = value config into an ExperimentConfig.

    Exactly one of ``n`` (samples per split) and ``t`` (total samples, split
    evenly) is required. Errors carry ``source:line`` context.
    """
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{source}:{lineno}: key {key!r} has no value")
        seen[key] = (value, lineno)

    def take(key, default=None):
        return seen.pop(key, (default, None))

    def parse_int(key, value, lineno):
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: key {key!r} needs an integer, got {value!r}") from None

    def parse_float(key, value, lineno):
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: key {key!r} needs a number, got {value!r}") from None

    value, lineno = take("p")
    if value is None:
        raise ConfigError(f"{source}: missing required key 'p'")
    p = parse_int("p", value, lineno)

    value, lineno = take("trials", "20")
    trials = parse_int("trials", value, lineno)

    value, lineno = take("splits", "2")
    splits = parse_int("splits", value, lineno)

    n_value, n_line = take("n")
    t_value, t_line = take("t")
    if (n_value is None) == (t_value is None):
        raise ConfigError(f"{source}: exactly one of 'n' (per split) or 't' (total) is required")
    if n_value is not None:
        n_per_split = parse_int("n", n_value, n_line)
    else:
        t_total = parse_int("t", t_value, t_line)
        if splits < 1 or t_total % splits != 0:
            raise ConfigError(
                f"{source}:{t_line}: total t = {t_total} is not divisible by splits = {splits}"
            )
        n_per_split = t_total // splits

    value, lineno = take("field", REAL)
    field = value.lower()
    if field not in (REAL, COMPLEX):
        raise ConfigError(f"{source}:{lineno}: field must be 'real' or 'complex', got {value!r}")

    value, lineno = take("model", "identity")
    model_name = value.lower()
    theta_value, theta_line = take("theta")
    b_value, b_line = take("b")
    if model_name == "identity":
        if theta_value is not None or b_value is not None:
            bad_line = theta_line if theta_value is not None else b_line
            raise ConfigError(f"{source}:{bad_line}: identity model takes no theta/b parameter")
        model = Identity(p)
    elif model_name == "spiked":
        if theta_value is None:
            raise ConfigError(f"{source}: spiked model requires 'theta'")
        if b_value is not None:
            raise ConfigError(f"{source}:{b_line}: spiked model takes 'theta', not 'b'")
        model = Spiked(p, parse_float("theta", theta_value, theta_line))
    elif model_name == "haar_diagonal":
        if b_value is None:
            raise ConfigError(f"{source}: haar_diagonal model requires 'b'")
        if theta_value is not None:
            raise ConfigError(f"{source}:{theta_line}: haar_diagonal model takes 'b', not 'theta'")
        model = HaarDiagonal(p, parse_float("b", b_value, b_line))
    else:
        raise ConfigError(
            f"{source}:{lineno}: model must be identity, spiked or haar_diagonal, got {value!r}"
        )

    value, lineno = take("estimators", "arithmetic, harmonic")
    try:
        estimators = _parse_estimator_list(value)
    except ValidationError as exc:
        raise ConfigError(f"{source}:{lineno}: {exc}") from None

    value, lineno = take("base_seed", "0")
    base_seed = parse_int("base_seed", value, lineno)

    output_value, _ = take("output")

    exp_value, _ = take("experiment_id")
    experiment_id = exp_value or default_id or "experiment"

    try:
        return ExperimentConfig(
            experiment_id=experiment_id,
            p=p,
            n_per_split=n_per_split,
            n_splits=splits,
            field=field,
            model=model,
            estimators=estimators,
            trials=trials,
            base_seed=base_seed,
            output_path=Path(output_value) if output_value else None,
        )
    except ValidationError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _parse_estimator_list(value: str) -> tuple:
    """Split an estimator list on commas, keeping rb_regularized:c,d intact."""
    tokens = []
    parts = [s for s in (seg.strip() for seg in value.split(",")) if s]
    i = 0
    while i < len(parts):
        tok = parts[i]
        if tok.startswith("rb_regularized:") and i + 1 < len(parts) and ":" not in parts[i + 1]:
            try:
                float(parts[i + 1])
            except ValueError:
                tokens.append(tok)
                i += 1
                continue
            tokens.append(tok + "," + parts[i + 1])
            i += 2
            continue
        tokens.append(tok)
        i += 1
    return tuple(EstimatorSpec.parse(tok) for tok in tokens)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, source=str(path), default_id=path.stem)


# ---------------------------------------------------------------------------
# Figure presets and the spike experiment.

_THREE_WAY = ("arithmetic", "fisher_sun", "harmonic")


def _derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint32)[0])


def _id_num(x: float) -> str:
    """Compact number for experiment ids: 4.0 -> '4', 1.1 -> '1.1'."""
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def _scaled(value: int, scale: float, minimum: int) -> int:
    return max(minimum, round(value * scale))


def sweep_configs(figure: int, scale: float = 1.0, seed: int = 0) -> list:
    """Experiment grid for one of the four figure presets.

    1: error vs condition parameter b, p in {50, 100}, three estimators.
    2: error vs dimension p in {25, 50, 100, 200}, same b grid.
    3: error vs sample budget q (T = ceil(2qp), rounded up to even).
    4: the figure-1 grid with the Rao-Blackwellized harmonic mean added.
    ``scale`` multiplies p and the trial count to shrink or grow runtime.
    """
    if figure not in (1, 2, 3, 4):
        raise ValidationError(f"figure preset must be 1, 2, 3 or 4, got {figure}")
    if not scale > 0:
        raise ValidationError(f"scale must be > 0, got {scale}")
    trials = _scaled(20, scale, 1)
    bs = (1.0, 2.0, 4.0, 8.0)
    configs = []
    index = 0
    if figure in (1, 2, 4):
        ps = (50, 100) if figure in (1, 4) else (25, 50, 100, 200)
        estimators = _THREE_WAY if figure in (1, 2) else _THREE_WAY + ("rao_blackwell",)
        for p in ps:
            p_eff = _scaled(p, scale, 2)
            for b in bs:
                configs.append(
                    ExperimentConfig(
                        experiment_id=f"fig{figure}_p{p_eff}_b{_id_num(b)}",
                        p=p_eff,
                        n_per_split=2 * p_eff,
                        n_splits=2,
                        field=REAL,
                        model=HaarDiagonal(p_eff, b),
                        estimators=tuple(EstimatorSpec(k) for k in estimators),
                        trials=trials,
                        base_seed=_derive_seed(seed, index),
                    )
                )
                index += 1
        return configs
    qs = (1.1, 1.5, 2.0, 3.0, 4.0)
    for p in (50, 100):
        p_eff = _scaled(p, scale, 2)
        for b in (1.0, 4.0):
            for q in qs:
                t_total = math.ceil(2 * q * p_eff)
                t_total += t_total % 2
                configs.append(
                    ExperimentConfig(
                        experiment_id=f"fig3_p{p_eff}_b{_id_num(b)}_q{_id_num(q)}",
                        p=p_eff,
                        n_per_split=t_total // 2,
                        n_splits=2,
                        field=REAL,
                        model=HaarDiagonal(p_eff, b),
                        estimators=tuple(EstimatorSpec(k) for k in ("arithmetic", "harmonic")),
                        trials=trials,
                        base_seed=_derive_seed(seed, index),
                    )
                )
                index += 1
    return configs


def run_sweep(figure: int, scale: float = 1.0, seed: int = 0, progress=None) -> list:
    """Run a figure preset; returns the concatenated records."""
    records = []
    for config in sweep_configs(figure, scale, seed):
        records.extend(run_experiment(config))
        if progress is not None:
            progress(config)
    return records


def spike_experiment(
    p: int,
    gamma: float,
    theta_list,
    trials: int,
    field: str,
    seed: int,
    progress=None,
) -> list:
    """Rank-one spike recovery: overlap and top eigenvalue for both means.

    T = p/gamma must be an even integer so the two-split is exact.
    """
    if not 0.0 < float(gamma) < 0.5:
        raise ValidationError(f"gamma must lie in (0, 0.5), got {gamma}")
    t_exact = p / float(gamma)
    t_total = round(t_exact)
    if abs(t_total - t_exact) > 1e-9 or t_total % 2 != 0:
        raise ValidationError(
            f"p/gamma = {t_exact} must be an even integer total sample count"
        )
    thetas = [float(th) for th in theta_list]
    if not thetas:
        raise ValidationError("at least one theta is required")
    records = []
    for i, theta in enumerate(thetas):
        config = ExperimentConfig(
            experiment_id=f"spike_theta{_id_num(theta)}",
            p=p,
            n_per_split=t_total // 2,
            n_splits=2,
            field=field,
            model=Spiked(p, theta),
            estimators=(EstimatorSpec("arithmetic"), EstimatorSpec("harmonic")),
            trials=trials,
            base_seed=_derive_seed(seed, i),
        )
        records.extend(run_experiment(config))
        if progress is not None:
            progress(config)
    return records
