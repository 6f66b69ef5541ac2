"""End-to-end experiment runner: the model-by-group matrix.

Pipeline per cell: select group columns → rank-encode ordinals (fitted on
train) → scale (standardize for GNB/KNN/DT, min-max for ComplementNB,
fitted on train) → optional feature selection (fitted on train) → optional
grid search with stratified CV on train (resampling only inside the CV
training folds) → optional oversampling of the full training partition →
final fit → evaluate on the untouched test partition.

One stratified split is shared by every cell of a run (configurable to
per-cell splits), and each cell derives its random streams from
(master seed, group index, model index), so results are identical for any
worker count.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .dataset import Dataset, load_csv, select_group
from .errors import (
    ConfigError,
    DataSourceError,
    PipelineError,
    UnknownGroupError,
)
from .metrics import ConfusionMatrix, accuracy, confusion, f1, macro_f1
from .model_selection import (
    ParamGrid,
    SplitIndices,
    default_dt_grid,
    default_knn_grid,
    grid_search,
    select_features,
    stratified_kfold,
    stratified_shuffle_split,
)
from .naive_bayes import cnb_fit, cnb_predict_many, gnb_fit, gnb_predict_many
from .neighbors import knn_fit, knn_predict_many
from .preprocess import (
    apply_minmax,
    apply_ordinal_encoder,
    apply_standardizer,
    fit_ordinal_encoder,
    fit_standardizer,
)
from .resampling import ResamplePlan, oversample
from .schema import (
    GROUP_IDS,
    LABEL_NAMES,
    VariableGroup,
    builtin_groups,
    load_schema_json,
)
from .synthetic import generate_synthetic
from .tree import dt_fit, dt_predict_many

MODEL_IDS = (
    "GaussianNB",
    "ComplementNB",
    "KNN",
    "KNN_opt",
    "KNN_RO",
    "KNN_SMOTE",
    "DT",
    "DT_opt",
)

KNN_DEFAULTS = {"k": 5, "weighting": "uniform", "metric": "euclidean"}
DT_DEFAULTS = {
    "criterion": "gini",
    "max_depth": None,
    "min_samples_split": 2,
    "min_samples_leaf": 1,
}


@dataclass(frozen=True)
class ModelSpec:
    """One entry of the model nomenclature: family, tuning, resampling."""

    id: str
    family: str  # gnb | cnb | knn | dt
    uses_grid: bool = False
    resample: str | None = None


MODEL_SPECS = {
    "GaussianNB": ModelSpec("GaussianNB", "gnb"),
    "ComplementNB": ModelSpec("ComplementNB", "cnb"),
    "KNN": ModelSpec("KNN", "knn"),
    "KNN_opt": ModelSpec("KNN_opt", "knn", uses_grid=True),
    "KNN_RO": ModelSpec("KNN_RO", "knn", uses_grid=True, resample="random_over"),
    "KNN_SMOTE": ModelSpec("KNN_SMOTE", "knn", uses_grid=True, resample="smote"),
    "DT": ModelSpec("DT", "dt"),
    "DT_opt": ModelSpec("DT_opt", "dt", uses_grid=True),
}

_SYNTHETIC_KEYS = {"n", "seed", "signal", "p_success"}
_CONFIG_KEYS = {
    "data",
    "schema",
    "groups",
    "models",
    "test_fraction",
    "n_folds",
    "seed",
    "keep_fraction",
    "scoring",
    "per_cell_split",
    "grids",
    "workers",
    "out_dir",
    "save_models",
}


@dataclass(frozen=True)
class ExperimentConfig:
    csv_path: str | None = None
    schema_path: str | None = None
    synthetic: dict | None = None  # {"n", "seed", "signal", "p_success"}
    groups: tuple[str, ...] = GROUP_IDS
    models: tuple[str, ...] = MODEL_IDS
    test_fraction: float = 0.25
    n_folds: int = 8
    seed: int = 42
    keep_fraction: float = 1.0
    scoring: str = "f1"
    per_cell_split: bool = False
    grids: dict = field(default_factory=dict)
    workers: int = 1
    out_dir: str = "results"
    save_models: bool = False

    def __post_init__(self):
        if not self.groups or not self.models:
            raise ConfigError("groups and models must be non-empty")
        for g in self.groups:
            if g not in GROUP_IDS:
                raise UnknownGroupError(g)
        for m in self.models:
            if m not in MODEL_IDS:
                raise ConfigError(f"unknown model: {m}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in (0, 1): {self.test_fraction}")
        if not 0.0 < self.keep_fraction <= 1.0:
            raise ConfigError(f"keep_fraction must be in (0, 1]: {self.keep_fraction}")
        if self.n_folds < 2:
            raise ConfigError(f"n_folds must be ≥ 2: {self.n_folds}")
        if self.scoring not in ("f1", "accuracy"):
            raise ConfigError(f"unknown scoring: {self.scoring}")
        if self.workers < 1:
            raise ConfigError(f"workers must be ≥ 1: {self.workers}")
        if (self.csv_path is None) == (self.synthetic is None):
            raise ConfigError("configure exactly one data source (csv or synthetic)")
        if self.synthetic is not None:
            unknown = set(self.synthetic) - _SYNTHETIC_KEYS
            if unknown:
                raise ConfigError(f"unknown synthetic keys: {sorted(unknown)}")
        for fam in self.grids:
            if fam not in ("KNN", "DT"):
                raise ConfigError(f"unknown grid family: {fam}")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        data = raw.get("data")
        if data is not None:
            if set(data) - {"csv", "synthetic"} or len(data) != 1:
                raise ConfigError("data must hold exactly one of 'csv' or 'synthetic'")
            if "csv" in data:
                kwargs["csv_path"] = data["csv"]
            else:
                kwargs["synthetic"] = dict(data["synthetic"])
        else:
            kwargs["synthetic"] = {}
        if "schema" in raw:
            kwargs["schema_path"] = raw["schema"]
        for key in ("test_fraction", "n_folds", "seed", "keep_fraction", "scoring",
                    "per_cell_split", "workers", "out_dir", "save_models"):
            if key in raw:
                kwargs[key] = raw[key]
        if "groups" in raw:
            kwargs["groups"] = tuple(raw["groups"])
        if "models" in raw:
            kwargs["models"] = tuple(raw["models"])
        if "grids" in raw:
            kwargs["grids"] = {k: {p: tuple(v) for p, v in g.items()} for k, g in raw["grids"].items()}
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def canonical_dict(self) -> dict:
        """Semantic fields only: excludes out_dir/workers/save_models so the
        same experiment hashes identically wherever and however it runs."""
        if self.csv_path is not None:
            data = {"csv": self.csv_path}
        else:
            syn = dict(self.synthetic) if self.synthetic else {}
            syn.setdefault("n", 244)
            syn.setdefault("seed", self.seed)
            syn.setdefault("signal", 0.5)
            syn.setdefault("p_success", 0.522)
            data = {"synthetic": syn}
        return {
            "data": data,
            "schema": self.schema_path,
            "groups": list(self.groups),
            "models": list(self.models),
            "test_fraction": self.test_fraction,
            "n_folds": self.n_folds,
            "seed": self.seed,
            "keep_fraction": self.keep_fraction,
            "scoring": self.scoring,
            "per_cell_split": self.per_cell_split,
            "grids": {k: {p: list(v) for p, v in g.items()} for k, g in self.grids.items()},
        }

    def config_hash(self) -> str:
        text = json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class CellResult:
    group_id: str
    model_id: str
    hyperparameters: dict
    accuracy: float | None = None
    f1: float | None = None
    macro_f1: float | None = None
    confusion: ConfusionMatrix | None = None
    cv_table: list | None = None
    n_test: int = 0
    error: str | None = None


@dataclass
class FittedCell:
    """Everything needed to reproduce a cell's predictions on new records."""

    model_id: str
    group_id: str
    family: str
    feature_meta: list  # [{"name","kind","min","max"}] in group order
    ordinal_codes: dict  # column -> sorted trained codes (list)
    scaler_columns: tuple
    scaler_mean: np.ndarray
    scaler_std: np.ndarray
    scaler_min: np.ndarray
    scaler_max: np.ndarray
    scaler_constant: np.ndarray
    scaling_mode: str  # standardize | minmax
    kept: np.ndarray
    classifier: object
    hyperparameters: dict
    seed: int
    config_hash: str


def _cell_states(master_seed: int, group_id: str, model_id: str) -> np.ndarray:
    seq = np.random.SeedSequence(
        (int(master_seed), GROUP_IDS.index(group_id), MODEL_IDS.index(model_id))
    )
    return seq.generate_state(5)


def _resolved_grid(config: ExperimentConfig, family: str) -> ParamGrid:
    if family == "knn":
        base = default_knn_grid()
        override = config.grids.get("KNN")
    else:
        base = default_dt_grid()
        override = config.grids.get("DT")
    if not override:
        return base
    params = dict(base.params)
    for name, values in override.items():
        if name not in params:
            raise ConfigError(f"unknown grid parameter for {family}: {name}")
        params[name] = tuple(values)
    return ParamGrid(base.family, params)


def _fit_final(family: str, train: Dataset, params: dict):
    if family == "gnb":
        return gnb_fit(train)
    if family == "cnb":
        return cnb_fit(train)
    if family == "knn":
        return knn_fit(train, params["k"], params["weighting"], params["metric"])
    if family == "dt":
        return dt_fit(
            train,
            params["criterion"],
            params["max_depth"],
            params["min_samples_split"],
            params["min_samples_leaf"],
        )
    raise ValueError(f"unknown family: {family}")


def _predict_final(family: str, model, X: np.ndarray) -> np.ndarray:
    if family == "gnb":
        return gnb_predict_many(model, X)
    if family == "cnb":
        return cnb_predict_many(model, X)
    if family == "knn":
        return knn_predict_many(model, X)
    return dt_predict_many(model, X)


def run_cell_fitted(
    data: Dataset,
    group: VariableGroup,
    spec: ModelSpec,
    config: ExperimentConfig,
    split: SplitIndices,
) -> tuple[CellResult, FittedCell]:
    train_set = set(int(i) for i in split.train_idx)
    test_set = set(int(i) for i in split.test_idx)
    if train_set & test_set:
        raise ValueError("train/test index sets overlap")

    states = _cell_states(config.seed, group.id, spec.id)
    gdata = select_group(data, group)
    train = gdata.take(split.train_idx)
    test = gdata.take(split.test_idx)

    encoder = fit_ordinal_encoder(train)
    train = apply_ordinal_encoder(train, encoder)
    test = apply_ordinal_encoder(test, encoder)

    scaling_mode = "minmax" if spec.family == "cnb" else "standardize"
    if scaling_mode == "minmax":
        scaler = fit_standardizer(train, columns=train.feature_names)
        train = apply_minmax(train, scaler)
        test = apply_minmax(test, scaler)
    else:
        scaler = fit_standardizer(train)
        train = apply_standardizer(train, scaler)
        test = apply_standardizer(test, scaler)

    if config.keep_fraction < 1.0:
        selection = select_features(train, config.keep_fraction, seed=int(states[0]))
        kept = selection.kept
        kept_names = [train.feature_names[i] for i in kept]
        sub_schema = train.schema.subset(kept_names)
        cols = [train.schema.feature_index(n) for n in sub_schema.feature_names]
        train = Dataset(sub_schema, train.rows[:, cols], train.labels)
        test = Dataset(sub_schema, test.rows[:, cols], test.labels)
    else:
        kept = np.arange(train.width)

    cv_table = None
    if spec.uses_grid:
        folds = stratified_kfold(train.labels, config.n_folds, seed=int(states[1]))
        grid = _resolved_grid(config, spec.family)
        plan = ResamplePlan(spec.resample) if spec.resample else None
        params, cv_table = grid_search(
            train, grid, folds, resample=plan, scoring=config.scoring, seed=int(states[2])
        )
    elif spec.family == "knn":
        params = dict(KNN_DEFAULTS)
    elif spec.family == "dt":
        params = dict(DT_DEFAULTS)
    else:
        params = {}

    train_fit = train
    if spec.resample:
        plan = ResamplePlan(spec.resample, seed=int(states[3]))
        train_fit = oversample(train_fit, plan)

    model = _fit_final(spec.family, train_fit, params)
    preds = _predict_final(spec.family, model, test.rows)
    cm = confusion(test.labels, preds)

    result = CellResult(
        group_id=group.id,
        model_id=spec.id,
        hyperparameters=dict(params),
        accuracy=accuracy(cm),
        f1=f1(cm),
        macro_f1=macro_f1(cm),
        confusion=cm,
        cv_table=cv_table,
        n_test=test.n,
    )
    fitted = FittedCell(
        model_id=spec.id,
        group_id=group.id,
        family=spec.family,
        feature_meta=[
            {
                "name": c.name,
                "kind": c.kind,
                "min": None if c.valid_range is None else c.valid_range[0],
                "max": None if c.valid_range is None else c.valid_range[1],
            }
            for c in gdata.schema.feature_columns
        ],
        ordinal_codes={k: [float(v) for v in arr] for k, arr in encoder.codes.items()},
        scaler_columns=scaler.columns,
        scaler_mean=scaler.mean,
        scaler_std=scaler.std,
        scaler_min=scaler.minimum,
        scaler_max=scaler.maximum,
        scaler_constant=scaler.constant,
        scaling_mode=scaling_mode,
        kept=np.asarray(kept),
        classifier=model,
        hyperparameters=dict(params),
        seed=config.seed,
        config_hash=config.config_hash(),
    )
    return result, fitted


def run_cell(
    data: Dataset,
    group: VariableGroup,
    spec: ModelSpec,
    config: ExperimentConfig,
    split: SplitIndices,
) -> CellResult:
    return run_cell_fitted(data, group, spec, config, split)[0]


@dataclass
class ExperimentMatrix:
    groups: tuple[str, ...]
    models: tuple[str, ...]
    cells: dict  # (group_id, model_id) -> CellResult
    group_stats: dict
    model_stats: dict
    provenance: dict


def load_config_data(config: ExperimentConfig) -> Dataset:
    schema = load_schema_json(config.schema_path) if config.schema_path else None
    if config.csv_path is not None:
        try:
            ds, _report = load_csv(config.csv_path, schema)
        except OSError as exc:
            raise DataSourceError(f"cannot read {config.csv_path}: {exc}") from exc
        return ds
    syn = dict(config.synthetic or {})
    return generate_synthetic(
        n=int(syn.get("n", 244)),
        seed=int(syn.get("seed", config.seed)),
        signal=float(syn.get("signal", 0.5)),
        p_success=float(syn.get("p_success", 0.522)),
        schema=schema,
    )


def _aggregate(matrix_cells: dict, groups, models) -> tuple[dict, dict]:
    group_stats = {}
    for g in groups:
        accs = [matrix_cells[(g, m)].accuracy for m in models
                if matrix_cells[(g, m)].error is None]
        f1s = [matrix_cells[(g, m)].f1 for m in models
               if matrix_cells[(g, m)].error is None]
        group_stats[g] = {
            "mean_acc": float(np.mean(accs)) if accs else None,
            "sd_acc": float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0,
            "mean_f1": float(np.mean(f1s)) if f1s else None,
            "sd_f1": float(np.std(f1s, ddof=1)) if len(f1s) > 1 else 0.0,
        }
    model_stats = {}
    for m in models:
        accs = [matrix_cells[(g, m)].accuracy for g in groups
                if matrix_cells[(g, m)].error is None]
        f1s = [matrix_cells[(g, m)].f1 for g in groups
               if matrix_cells[(g, m)].error is None]
        model_stats[m] = {
            "mean_acc": float(np.mean(accs)) if accs else None,
            "mean_f1": float(np.mean(f1s)) if f1s else None,
        }
    return group_stats, model_stats


def run_matrix_fitted(config: ExperimentConfig) -> tuple[ExperimentMatrix, dict]:
    data = load_config_data(config)
    groups = tuple(g for g in GROUP_IDS if g in config.groups)
    models = tuple(m for m in MODEL_IDS if m in config.models)
    registry = builtin_groups()

    shared_split = stratified_shuffle_split(
        data.labels, config.test_fraction, seed=config.seed
    )

    def job(gm):
        g, m = gm
        spec = MODEL_SPECS[m]
        if config.per_cell_split:
            split_seed = int(_cell_states(config.seed, g, m)[4])
            split = stratified_shuffle_split(data.labels, config.test_fraction, split_seed)
        else:
            split = shared_split
        try:
            return gm, run_cell_fitted(data, registry[g], spec, config, split)
        except PipelineError as exc:
            return gm, (
                CellResult(group_id=g, model_id=m, hyperparameters={}, error=str(exc)),
                None,
            )

    keys = [(g, m) for g in groups for m in models]
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(job, keys))
    else:
        outcomes = [job(k) for k in keys]

    cells, fitted = {}, {}
    for gm, (result, fit) in outcomes:
        cells[gm] = result
        if fit is not None:
            fitted[gm] = fit

    group_stats, model_stats = _aggregate(cells, groups, models)
    provenance = {
        "artifact_version": __version__,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": config.canonical_dict(),
        "label_coding": {str(k): v for k, v in LABEL_NAMES.items()},
    }
    matrix = ExperimentMatrix(
        groups=groups,
        models=models,
        cells=cells,
        group_stats=group_stats,
        model_stats=model_stats,
        provenance=provenance,
    )
    return matrix, fitted


def run_matrix(config: ExperimentConfig) -> ExperimentMatrix:
    return run_matrix_fitted(config)[0]
