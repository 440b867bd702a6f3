"""Process-metric defect prediction: git mining, SZZ labelling and a soft-voting ensemble."""

__version__ = "0.1.0"

FEATURE_NAMES = ("n_authors", "age_days", "n_changes", "loc", "lines_added", "lines_deleted")
