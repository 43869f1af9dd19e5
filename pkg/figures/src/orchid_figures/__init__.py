"""Figure regeneration from tidy run exports.

Reads only the CSVs produced by `orchid export-figures`; never touches
checkpoints or scenario files. All plots are deterministic functions of the
CSV content: repeated runs write byte-identical SVG.
"""

__version__ = "0.1.0"
