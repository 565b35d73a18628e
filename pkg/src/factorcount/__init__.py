"""Factor counting for multi-response forecast models.

Symbolic transfer entropy picks predictors and responses from a panel of
returns; canonical correlation analysis links the two blocks, and a
Tracy-Widom test on the greatest root decides how many canonical factors are
significant.
"""

__version__ = "0.1.0"
