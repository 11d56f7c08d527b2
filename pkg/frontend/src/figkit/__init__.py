"""figkit: deterministic figures from frakolm verification outputs."""

__version__ = "0.1.0"
