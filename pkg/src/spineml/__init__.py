"""spineml: spine-surgery outcome prediction pipeline.

Four classifier families (Gaussian/Complement naive Bayes, k-NN, CART
decision trees), random and SMOTE oversampling, stratified splitting and
cross-validated grid search, and an experiment runner that evaluates every
model over the seven predictor-variable groups and renders report tables
and charts.
"""

__version__ = "0.1.0"

from .dataset import Dataset, IngestionReport, derive_success, load_csv, select_group, write_csv
from .schema import (
    ColumnSpec,
    Schema,
    VariableGroup,
    builtin_groups,
    default_schema,
    group_by_id,
)
from .synthetic import generate_synthetic

__all__ = [
    "__version__",
    "ColumnSpec",
    "Dataset",
    "IngestionReport",
    "Schema",
    "VariableGroup",
    "builtin_groups",
    "default_schema",
    "derive_success",
    "generate_synthetic",
    "group_by_id",
    "load_csv",
    "select_group",
    "write_csv",
]
