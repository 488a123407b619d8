"""Figure generation for multi-target tracking batch CSV logs."""

from .figures import (
    REQUIRED_COLUMNS,
    FigureSpec,
    SchemaError,
    read_aggregate,
    render_figures,
)

__version__ = "0.1.0"
