"""Figure generation for simulation CSV outputs."""
from .render import FigureJob, render
from .schemas import SchemaError, Table, read_table

__all__ = ["FigureJob", "render", "SchemaError", "Table", "read_table"]
